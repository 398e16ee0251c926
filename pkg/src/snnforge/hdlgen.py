"""Synthesizable VHDL bundle generation for fixed-point networks.

``generate`` turns a network spec into a self-contained set of text files,
one entity per file, plus memory-initialization files:

    <net>_top.vhd                     inference core (ports below)
    <net>_network_cu.vhd              step sequencer
    <net>_l<k>.vhd                    layer k: weight ROMs + neuron array
    <net>_neuron_<model>_<reset>.vhd  one per distinct neuron variant
    <net>_counters.vhd                output spike counters
    <net>_tb.vhd                      self-checking testbench harness
    <net>_l<k>_ff.mem                 feed-forward ROM image (one per layer)
    <net>_l<k>_fb.mem                 feedback ROM image (recurrent layers)
    <net>_stimuli.txt                 input raster (only when a stimulus is given)

The hardware mirrors the simulator's semantics exactly: per step each layer
snapshots its inputs, walks every weight address with spike-gated
accumulation (state-identical to skipping idle rows, which the control unit
may do without changing results), then leaks, integrates, fires and resets.
Pipelined nets start all layers together and register inter-layer spikes, so
layer k+1 consumes layer k's previous-step output; immediate nets run layers
back to back within the step.  Feedback is always a layer's own
previous-step output.

ROM image files hold one binary line per address; each line concatenates the
two's-complement weights of all neurons at that address, neuron 0 in the
most significant position.  The testbench reads stimulus rows into an
ascending-range ``bit_vector`` so the leftmost character is channel 0,
matching the text raster format.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .network import NetworkSpec
from .neuron import NeuronSpec


def clog2(n: int) -> int:
    if n < 1:
        raise ValueError("clog2 needs n >= 1")
    return (n - 1).bit_length()


def vhdl_name(raw: str) -> str:
    """Mangle an arbitrary network name into a legal VHDL identifier."""
    s = re.sub(r"[^a-z0-9_]+", "_", raw.lower())
    s = re.sub(r"_+", "_", s).strip("_")
    if not s:
        return "snn"
    if s[0].isdigit():
        s = "n" + s
    return s


def _bits(value: int, width: int) -> str:
    return format(value & ((1 << width) - 1), f"0{width}b")


def emit_meminit(weights: np.ndarray, bits: int) -> str:
    """ROM image for a (n_neurons, depth) weight matrix: one line per
    address, neuron 0 leftmost."""
    w = np.asarray(weights, dtype=np.int64)
    if w.ndim != 2:
        raise ValueError("weights must be 2-D (n_neurons, depth)")
    n_neurons, depth = w.shape
    lines = []
    for a in range(depth):
        lines.append("".join(_bits(int(w[i, a]), bits) for i in range(n_neurons)))
    return "\n".join(lines) + "\n"


def parse_meminit(text: str, bits: int) -> np.ndarray:
    """Inverse of emit_meminit."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise ValueError("empty memory image")
    width = len(lines[0])
    if width % bits != 0:
        raise ValueError(f"line width {width} is not a multiple of {bits}")
    n_neurons = width // bits
    out = np.zeros((n_neurons, len(lines)), dtype=np.int64)
    for a, ln in enumerate(lines):
        if len(ln) != width or set(ln) - {"0", "1"}:
            raise ValueError(f"line {a + 1}: malformed row {ln!r}")
        for i in range(n_neurons):
            raw = int(ln[i * bits:(i + 1) * bits], 2)
            if raw >= 1 << (bits - 1):
                raw -= 1 << bits
            out[i, a] = raw
    return out


_HEADER_VHD = """library ieee;
use ieee.std_logic_1164.all;
use ieee.numeric_std.all;
"""


def _sat_helpers(nbits_name: str, with_leak: bool, with_sub: bool) -> str:
    n = nbits_name
    parts = [f"""
  function f_vmax return signed is
    variable v : signed({n} - 1 downto 0) := (others => '1');
  begin
    v({n} - 1) := '0';
    return v;
  end function;

  function f_vmin return signed is
    variable v : signed({n} - 1 downto 0) := (others => '0');
  begin
    v({n} - 1) := '1';
    return v;
  end function;

  constant VMAX : signed({n} - 1 downto 0) := f_vmax;
  constant VMIN : signed({n} - 1 downto 0) := f_vmin;

  function sat_add(a : signed({n} - 1 downto 0); b : signed({n} - 1 downto 0)) return signed is
    variable w : signed({n} downto 0);
  begin
    w := resize(a, {n} + 1) + resize(b, {n} + 1);
    if w > resize(VMAX, {n} + 1) then
      return VMAX;
    elsif w < resize(VMIN, {n} + 1) then
      return VMIN;
    else
      return w({n} - 1 downto 0);
    end if;
  end function;
"""]
    if with_sub:
        parts.append(f"""
  function sat_sub(a : signed({n} - 1 downto 0); b : signed({n} - 1 downto 0)) return signed is
    variable w : signed({n} downto 0);
  begin
    w := resize(a, {n} + 1) - resize(b, {n} + 1);
    if w > resize(VMAX, {n} + 1) then
      return VMAX;
    elsif w < resize(VMIN, {n} + 1) then
      return VMIN;
    else
      return w({n} - 1 downto 0);
    end if;
  end function;
""")
    if with_leak:
        parts.append(f"""
  -- one leak step; the result magnitude never exceeds |v|, so the plain
  -- subtraction cannot overflow
  function leak(v : signed({n} - 1 downto 0); k : integer) return signed is
  begin
    return v - shift_right(v, k);
  end function;
""")
    return "".join(parts)


def _emit_neuron(net: str, model: str, reset: str, proto: NeuronSpec) -> str:
    ent = f"{net}_neuron_{model}_{reset}"
    items = [
        f"NBITS : integer := {proto.neuron_fmt.total_bits}",
        f"V_TH : integer := {proto.v_th}",
        f"V_RESET : integer := {proto.v_reset}",
    ]
    if model == "lif2":
        items += [
            f"ALPHA_SHIFT : integer := {proto.alpha_shift}",
            f"BETA_SHIFT : integer := {proto.beta_shift}",
            "IMMEDIATE : boolean := false",
        ]
    elif model == "lif1":
        items.append(f"BETA_SHIFT : integer := {proto.beta_shift}")
    gen_block = ";\n".join(f"    {it}" for it in items)

    helpers = _sat_helpers("NBITS", with_leak=model != "if",
                           with_sub=reset == "subtractive")

    decls = ["  signal acc : signed(NBITS - 1 downto 0);",
             "  signal v_m : signed(NBITS - 1 downto 0);"]
    if model == "lif2":
        decls.append("  signal i_syn : signed(NBITS - 1 downto 0);")
    decl_block = "\n".join(decls)

    fire_vars = ["    variable v_next : signed(NBITS - 1 downto 0);"]
    if model == "lif2":
        fire_vars.insert(0, "    variable i_next : signed(NBITS - 1 downto 0);")
        fire_vars.append("    variable drive : signed(NBITS - 1 downto 0);")
    var_block = "\n".join(fire_vars)

    reset_body = ["        acc <= (others => '0');",
                  "        v_m <= (others => '0');"]
    if model == "lif2":
        reset_body.append("        i_syn <= (others => '0');")
    reset_body.append("        spike <= '0';")
    reset_block = "\n".join(reset_body)

    if model == "if":
        integ = ["        v_next := sat_add(v_m, acc);"]
    elif model == "lif1":
        integ = ["        v_next := sat_add(leak(v_m, BETA_SHIFT), acc);"]
    else:
        integ = [
            "        i_next := sat_add(leak(i_syn, ALPHA_SHIFT), acc);",
            "        if IMMEDIATE then",
            "          drive := i_next;",
            "        else",
            "          drive := i_syn;",
            "        end if;",
            "        v_next := sat_add(leak(v_m, BETA_SHIFT), drive);",
        ]
    if reset == "static":
        reset_stmt = "          v_next := to_signed(V_RESET, NBITS);"
    else:
        reset_stmt = "          v_next := sat_sub(v_next, to_signed(V_TH, NBITS));"
    fire = integ + [
        "        if v_next > to_signed(V_TH, NBITS) then",
        "          spike <= '1';",
        reset_stmt,
        "        else",
        "          spike <= '0';",
        "        end if;",
        "        v_m <= v_next;",
    ]
    if model == "lif2":
        fire.append("        i_syn <= i_next;")
    fire.append("        acc <= (others => '0');")
    fire_block = "\n".join(fire)

    return f"""-- {net}: {model} neuron, {reset} reset
{_HEADER_VHD}
entity {ent} is
  generic (
{gen_block}
  );
  port (
    clk : in std_logic;
    rst : in std_logic;
    acc_en : in std_logic;
    fire_en : in std_logic;
    win : in signed(NBITS - 1 downto 0);
    spike : out std_logic
  );
end entity {ent};

architecture rtl of {ent} is
{helpers}
{decl_block}

begin

  process (clk)
{var_block}
  begin
    if rising_edge(clk) then
      if rst = '1' then
{reset_block}
      elsif acc_en = '1' then
        acc <= sat_add(acc, win);
      elsif fire_en = '1' then
{fire_block}
      end if;
    end if;
  end process;

end architecture rtl;
"""


def _wconv(tag: str, wbits_name: str, cmp_w_name: str) -> str:
    return f"""
  -- requantize a stored weight into the neuron format (saturating; a plain
  -- sign extension whenever the neuron format is at least as wide)
  function wconv_{tag}(w : std_logic_vector({wbits_name} - 1 downto 0)) return signed is
    variable x : signed({cmp_w_name} - 1 downto 0);
  begin
    x := resize(signed(w), {cmp_w_name});
    if x > resize(VMAX, {cmp_w_name}) then
      return VMAX;
    elsif x < resize(VMIN, {cmp_w_name}) then
      return VMIN;
    else
      return resize(x, NEURON_BITS);
    end if;
  end function;
"""


def _load_fn(tag: str, mem_t: str, depth_name: str, width_name: str) -> str:
    return f"""
  impure function load_{tag}(fname : string) return {mem_t} is
    file f : text open read_mode is fname;
    variable l : line;
    variable bits : bit_vector(0 to {width_name} - 1);
    variable m : {mem_t};
  begin
    for a in 0 to {depth_name} - 1 loop
      readline(f, l);
      read(l, bits);
      for j in 0 to {width_name} - 1 loop
        if bits(j) = '1' then
          m(a)({width_name} - 1 - j) := '1';
        else
          m(a)({width_name} - 1 - j) := '0';
        end if;
      end loop;
    end loop;
    return m;
  end function;
"""


def _emit_layer(net: str, k: int, spec: NetworkSpec) -> str:
    layer = spec.layers[k - 1]
    neuron = layer.neuron
    ent = f"{net}_l{k}"
    neuron_ent = f"{net}_neuron_{neuron.model}_{neuron.reset}"
    recurrent = layer.recurrent
    nb = neuron.neuron_fmt.total_bits
    ffb = layer.ff_fmt.total_bits
    depth_total = layer.n_inputs + (layer.n_neurons if recurrent else 0)
    addr_w = max(1, clog2(depth_total))

    generics = [
        f"    N_INPUTS : integer := {layer.n_inputs};",
        f"    N_NEURONS : integer := {layer.n_neurons};",
        f"    NEURON_BITS : integer := {nb};",
        f"    FF_WEIGHT_BITS : integer := {ffb}",
    ]
    if recurrent:
        generics[-1] += ";"
        generics.append(f"    FB_WEIGHT_BITS : integer := {layer.fb_fmt.total_bits}")
    gen_block = "\n".join(generics)

    consts = [
        "  constant FF_WIDTH : integer := N_NEURONS * FF_WEIGHT_BITS;",
        f"  constant DEPTH_TOTAL : integer := {depth_total};",
        f"  constant ADDR_W : integer := {addr_w};  -- ceil(log2(DEPTH_TOTAL)), min 1",
        f"  constant FF_CMP_W : integer := {max(ffb, nb) + 1};",
    ]
    if recurrent:
        consts.insert(1, "  constant FB_WIDTH : integer := N_NEURONS * FB_WEIGHT_BITS;")
        consts.append(
            f"  constant FB_CMP_W : integer := {max(layer.fb_fmt.total_bits, nb) + 1};"
        )
    const_block = "\n".join(consts)

    types = [
        "  type ff_mem_t is array (0 to N_INPUTS - 1) of std_logic_vector(FF_WIDTH - 1 downto 0);",
        "  type win_t is array (0 to N_NEURONS - 1) of signed(NEURON_BITS - 1 downto 0);",
        "  type state_t is (s_idle, s_scan, s_fire);",
    ]
    if recurrent:
        types.insert(1, "  type fb_mem_t is array (0 to N_NEURONS - 1) of std_logic_vector(FB_WIDTH - 1 downto 0);")
    type_block = "\n".join(types)

    # layers only need the format rails for wconv, not the neuron arithmetic
    helpers = _sat_helpers("NEURON_BITS", with_leak=False, with_sub=False)
    helpers = helpers[:helpers.index("\n  function sat_add")] + "\n"
    wconvs = _wconv("ff", "FF_WEIGHT_BITS", "FF_CMP_W")
    load_fns = _load_fn("ff", "ff_mem_t", "N_INPUTS", "FF_WIDTH")
    roms = [f'  constant FF_ROM : ff_mem_t := load_ff("{net}_l{k}_ff.mem");']
    if recurrent:
        wconvs += _wconv("fb", "FB_WEIGHT_BITS", "FB_CMP_W")
        load_fns += _load_fn("fb", "fb_mem_t", "N_NEURONS", "FB_WIDTH")
        roms.append(f'  constant FB_ROM : fb_mem_t := load_fb("{net}_l{k}_fb.mem");')
    rom_block = "\n".join(roms)

    signals = [
        "  signal state : state_t;",
        "  signal addr : unsigned(ADDR_W - 1 downto 0);",
        "  signal in_reg : std_logic_vector(N_INPUTS - 1 downto 0);",
        "  signal out_spikes_int : std_logic_vector(N_NEURONS - 1 downto 0);",
        "  signal ff_word : std_logic_vector(FF_WIDTH - 1 downto 0);",
        "  signal win_arr : win_t;",
        "  signal cur_spike : std_logic;",
        "  signal acc_en : std_logic;",
        "  signal fire_en : std_logic;",
    ]
    if recurrent:
        signals.insert(3, "  signal fb_reg : std_logic_vector(N_NEURONS - 1 downto 0);")
        signals.insert(6, "  signal fb_word : std_logic_vector(FB_WIDTH - 1 downto 0);")
        signals.append("  signal ff_phase : std_logic;")
    signal_block = "\n".join(signals)

    if recurrent:
        datapath = f"""  ff_phase <= '1' when to_integer(addr) < N_INPUTS else '0';

  ff_word <= FF_ROM(to_integer(addr)) when ff_phase = '1' else (others => '0');
  fb_word <= FB_ROM(to_integer(addr) - N_INPUTS) when ff_phase = '0' else (others => '0');

  cur_spike <= in_reg(to_integer(addr)) when ff_phase = '1'
               else fb_reg(to_integer(addr) - N_INPUTS);

  gen_win : for i in 0 to N_NEURONS - 1 generate
    win_arr(i) <= wconv_ff(ff_word((N_NEURONS - i) * FF_WEIGHT_BITS - 1 downto (N_NEURONS - i - 1) * FF_WEIGHT_BITS))
                  when ff_phase = '1'
                  else wconv_fb(fb_word((N_NEURONS - i) * FB_WEIGHT_BITS - 1 downto (N_NEURONS - i - 1) * FB_WEIGHT_BITS));
  end generate gen_win;"""
        snapshot = """            in_reg <= in_spikes;
            fb_reg <= out_spikes_int;"""
    else:
        datapath = f"""  ff_word <= FF_ROM(to_integer(addr));

  cur_spike <= in_reg(to_integer(addr));

  gen_win : for i in 0 to N_NEURONS - 1 generate
    win_arr(i) <= wconv_ff(ff_word((N_NEURONS - i) * FF_WEIGHT_BITS - 1 downto (N_NEURONS - i - 1) * FF_WEIGHT_BITS));
  end generate gen_win;"""
        snapshot = "            in_reg <= in_spikes;"

    neuron_generics = [
        "        NBITS => NEURON_BITS,",
        f"        V_TH => {neuron.v_th},",
        f"        V_RESET => {neuron.v_reset}",
    ]
    if neuron.model == "lif1":
        neuron_generics[-1] += ","
        neuron_generics.append(f"        BETA_SHIFT => {neuron.beta_shift}")
    elif neuron.model == "lif2":
        neuron_generics[-1] += ","
        neuron_generics += [
            f"        ALPHA_SHIFT => {neuron.alpha_shift},",
            f"        BETA_SHIFT => {neuron.beta_shift},",
            f"        IMMEDIATE => {'true' if neuron.immediate_current else 'false'}",
        ]
    ngen_block = "\n".join(neuron_generics)

    return f"""-- {net}: layer {k}, {layer.n_inputs} -> {layer.n_neurons}, {neuron.model}/{neuron.reset}{", recurrent" if recurrent else ""}
{_HEADER_VHD}use std.textio.all;

entity {ent} is
  generic (
{gen_block}
  );
  port (
    clk : in std_logic;
    rst : in std_logic;
    step_start : in std_logic;
    in_spikes : in std_logic_vector(N_INPUTS - 1 downto 0);
    step_done : out std_logic;
    out_spikes : out std_logic_vector(N_NEURONS - 1 downto 0)
  );
end entity {ent};

architecture rtl of {ent} is

{const_block}

{type_block}
{helpers}{wconvs}{load_fns}
{rom_block}

{signal_block}

begin

{datapath}

  acc_en <= '1' when state = s_scan and cur_spike = '1' else '0';
  fire_en <= '1' when state = s_fire else '0';
  step_done <= '1' when state = s_idle else '0';
  out_spikes <= out_spikes_int;

  gen_neurons : for i in 0 to N_NEURONS - 1 generate
    u_neuron : entity work.{neuron_ent}
      generic map (
{ngen_block}
      )
      port map (
        clk => clk,
        rst => rst,
        acc_en => acc_en,
        fire_en => fire_en,
        win => win_arr(i),
        spike => out_spikes_int(i)
      );
  end generate gen_neurons;

  process (clk)
  begin
    if rising_edge(clk) then
      if rst = '1' then
        state <= s_idle;
        addr <= (others => '0');
      else
        case state is
          when s_idle =>
            if step_start = '1' then
{snapshot}
              addr <= (others => '0');
              state <= s_scan;
            end if;
          when s_scan =>
            if to_integer(addr) = DEPTH_TOTAL - 1 then
              state <= s_fire;
            else
              addr <= addr + 1;
            end if;
          when s_fire =>
            addr <= (others => '0');
            state <= s_idle;
        end case;
      end if;
    end if;
  end process;

end architecture rtl;
"""


def _emit_cu(net: str, spec: NetworkSpec) -> str:
    ent = f"{net}_network_cu"
    n_layers = len(spec.layers)
    step_w = clog2(spec.n_cycles) + 1
    lidx_w = max(1, clog2(n_layers))
    immediate = spec.propagation == "immediate"

    if immediate and n_layers > 1:
        idx_decl = f"""  constant LIDX_W : integer := {lidx_w};
  signal lidx : unsigned(LIDX_W - 1 downto 0);
"""
        reset_extra = "        lidx <= (others => '0');\n"
        kickoff = """              lidx <= (others => '0');
              step_start <= (others => '0');
              step_start(0) <= '1';"""
        busy = """          when c_busy =>
            if layers_done(to_integer(lidx)) = '1' then
              if to_integer(lidx) = N_LAYERS - 1 then
                latch_out <= '1';
                in_advance <= '1';
                state <= c_latch;
              else
                lidx <= lidx + 1;
                step_start(to_integer(lidx) + 1) <= '1';
                state <= c_kick;
              end if;
            end if;"""
    else:
        idx_decl = ""
        reset_extra = ""
        kickoff = "              step_start <= (others => '1');"
        busy = """          when c_busy =>
            if layers_done = ALL_DONE then
              latch_out <= '1';
              in_advance <= '1';
              state <= c_latch;
            end if;"""

    return f"""-- {net}: step sequencer ({spec.propagation} propagation, {spec.n_cycles} steps)
{_HEADER_VHD}
entity {ent} is
  generic (
    N_CYCLES : integer := {spec.n_cycles};
    N_LAYERS : integer := {n_layers}
  );
  port (
    clk : in std_logic;
    rst : in std_logic;
    io_ready : in std_logic;
    layers_done : in std_logic_vector(N_LAYERS - 1 downto 0);
    step_start : out std_logic_vector(N_LAYERS - 1 downto 0);
    latch_out : out std_logic;
    in_advance : out std_logic;
    done : out std_logic
  );
end entity {ent};

architecture rtl of {ent} is

  constant STEP_W : integer := {step_w};  -- ceil(log2(N_CYCLES)) + 1
  constant ALL_DONE : std_logic_vector(N_LAYERS - 1 downto 0) := (others => '1');

  type state_t is (c_wait_io, c_kick, c_busy, c_latch, c_done);
  signal state : state_t;
  signal step_count : unsigned(STEP_W - 1 downto 0);
{idx_decl}
begin

  process (clk)
  begin
    if rising_edge(clk) then
      if rst = '1' then
        state <= c_wait_io;
        step_count <= (others => '0');
        step_start <= (others => '0');
        latch_out <= '0';
        in_advance <= '0';
        done <= '0';
{reset_extra}      else
        step_start <= (others => '0');
        latch_out <= '0';
        in_advance <= '0';
        case state is
          when c_wait_io =>
            if io_ready = '1' then
{kickoff}
              state <= c_kick;
            end if;
          when c_kick =>
            -- layers are leaving idle; their stale done flags settle here
            state <= c_busy;
{busy}
          when c_latch =>
            if to_integer(step_count) = N_CYCLES - 1 then
              state <= c_done;
            else
              step_count <= step_count + 1;
              state <= c_wait_io;
            end if;
          when c_done =>
            done <= '1';
        end case;
      end if;
    end if;
  end process;

end architecture rtl;
"""


def _emit_counters(net: str) -> str:
    ent = f"{net}_counters"
    return f"""-- {net}: per-output spike counters, sampled once per step
{_HEADER_VHD}
entity {ent} is
  generic (
    N : integer := 2;
    CNT_BITS : integer := 8
  );
  port (
    clk : in std_logic;
    rst : in std_logic;
    latch : in std_logic;
    spikes : in std_logic_vector(N - 1 downto 0);
    counts : out std_logic_vector(N * CNT_BITS - 1 downto 0)
  );
end entity {ent};

architecture rtl of {ent} is

  type cnt_t is array (0 to N - 1) of unsigned(CNT_BITS - 1 downto 0);
  signal cnt : cnt_t;

begin

  process (clk)
  begin
    if rising_edge(clk) then
      if rst = '1' then
        cnt <= (others => (others => '0'));
      elsif latch = '1' then
        for i in 0 to N - 1 loop
          if spikes(i) = '1' then
            cnt(i) <= cnt(i) + 1;
          end if;
        end loop;
      end if;
    end if;
  end process;

  gen_out : for i in 0 to N - 1 generate
    counts((N - i) * CNT_BITS - 1 downto (N - i - 1) * CNT_BITS) <= std_logic_vector(cnt(i));
  end generate gen_out;

end architecture rtl;
"""


def _emit_top(net: str, spec: NetworkSpec) -> str:
    ent = f"{net}_top"
    n_layers = len(spec.layers)
    cnt_bits = clog2(spec.n_cycles) + 1
    pipelined = spec.propagation == "pipelined"

    consts = [f"  constant N_LAYERS : integer := {n_layers};"]
    signals = [
        "  signal layers_done : std_logic_vector(N_LAYERS - 1 downto 0);",
        "  signal step_start : std_logic_vector(N_LAYERS - 1 downto 0);",
        "  signal latch_out : std_logic;",
    ]
    for k, l in enumerate(spec.layers, start=1):
        consts.append(f"  constant L{k}_NEURONS : integer := {l.n_neurons};")
        signals.append(f"  signal l{k}_out : std_logic_vector(L{k}_NEURONS - 1 downto 0);")
        if pipelined and k < n_layers:
            signals.append(f"  signal l{k}_out_q : std_logic_vector(L{k}_NEURONS - 1 downto 0);")

    insts = [f"""  u_cu : entity work.{net}_network_cu
    generic map (
      N_CYCLES => N_CYCLES,
      N_LAYERS => N_LAYERS
    )
    port map (
      clk => clk,
      rst => rst,
      io_ready => io_ready,
      layers_done => layers_done,
      step_start => step_start,
      latch_out => latch_out,
      in_advance => in_advance,
      done => done
    );"""]
    for k, l in enumerate(spec.layers, start=1):
        if k == 1:
            src = "in_spikes"
        elif pipelined:
            src = f"l{k - 1}_out_q"
        else:
            src = f"l{k - 1}_out"
        gmap = [
            f"      N_INPUTS => {l.n_inputs},",
            f"      N_NEURONS => L{k}_NEURONS,",
            f"      NEURON_BITS => {l.neuron.neuron_fmt.total_bits},",
            f"      FF_WEIGHT_BITS => {l.ff_fmt.total_bits}",
        ]
        if l.recurrent:
            gmap[-1] += ","
            gmap.append(f"      FB_WEIGHT_BITS => {l.fb_fmt.total_bits}")
        insts.append(f"""  u_l{k} : entity work.{net}_l{k}
    generic map (
{chr(10).join(gmap)}
    )
    port map (
      clk => clk,
      rst => rst,
      step_start => step_start({k - 1}),
      in_spikes => {src},
      step_done => layers_done({k - 1}),
      out_spikes => l{k}_out
    );""")
    insts.append(f"""  u_counters : entity work.{net}_counters
    generic map (
      N => N_OUTPUTS,
      CNT_BITS => CNT_BITS
    )
    port map (
      clk => clk,
      rst => rst,
      latch => latch_out,
      spikes => l{n_layers}_out,
      counts => counts
    );""")

    if pipelined and n_layers > 1:
        latches = "\n".join(
            f"""        if latch_out = '1' then
          l{k}_out_q <= l{k}_out;
        end if;"""
            for k in range(1, n_layers)
        )
        resets = "\n".join(
            f"        l{k}_out_q <= (others => '0');" for k in range(1, n_layers)
        )
        qproc = f"""
  -- pipelined propagation: each layer consumes its predecessor's
  -- previous-step output
  process (clk)
  begin
    if rising_edge(clk) then
      if rst = '1' then
{resets}
      else
{latches}
      end if;
    end if;
  end process;
"""
    else:
        qproc = ""

    return f"""-- {net}: inference core, {spec.n_inputs} inputs -> {spec.n_outputs} outputs
{_HEADER_VHD}
entity {ent} is
  generic (
    N_INPUTS : integer := {spec.n_inputs};
    N_OUTPUTS : integer := {spec.n_outputs};
    N_CYCLES : integer := {spec.n_cycles};
    CNT_BITS : integer := {cnt_bits}
  );
  port (
    clk : in std_logic;
    rst : in std_logic;
    io_ready : in std_logic;
    in_spikes : in std_logic_vector(N_INPUTS - 1 downto 0);
    in_advance : out std_logic;
    out_spikes : out std_logic_vector(N_OUTPUTS - 1 downto 0);
    counts : out std_logic_vector(N_OUTPUTS * CNT_BITS - 1 downto 0);
    done : out std_logic
  );
end entity {ent};

architecture rtl of {ent} is

{chr(10).join(consts)}

{chr(10).join(signals)}

begin

{chr(10).join(insts)}
{qproc}
  out_spikes <= l{n_layers}_out;

end architecture rtl;
"""


def _emit_tb(net: str, spec: NetworkSpec, with_stimuli: bool) -> str:
    ent = f"{net}_tb"
    cnt_bits = clog2(spec.n_cycles) + 1
    if with_stimuli:
        stim_proc = f"""  stim : process
    file f : text open read_mode is "{net}_stimuli.txt";
    variable l : line;
    variable row : bit_vector(0 to N_INPUTS - 1);
  begin
    wait for 2 * CLK_PERIOD;
    rst <= '0';
    for t in 0 to N_CYCLES - 1 loop
      readline(f, l);
      read(l, row);
      for j in 0 to N_INPUTS - 1 loop
        if row(j) = '1' then
          in_spikes(j) <= '1';
        else
          in_spikes(j) <= '0';
        end if;
      end loop;
      io_ready <= '1';
      wait until rising_edge(clk) and in_advance = '1';
    end loop;
    io_ready <= '0';
    wait until done = '1';
    report "inference complete" severity note;
    wait;
  end process stim;"""
    else:
        stim_proc = """  stim : process
  begin
    wait for 2 * CLK_PERIOD;
    rst <= '0';
    io_ready <= '1';
    wait until done = '1';
    io_ready <= '0';
    report "inference complete" severity note;
    wait;
  end process stim;"""

    return f"""-- {net}: testbench harness
{_HEADER_VHD}use std.textio.all;

entity {ent} is
end entity {ent};

architecture sim of {ent} is

  constant N_INPUTS : integer := {spec.n_inputs};
  constant N_OUTPUTS : integer := {spec.n_outputs};
  constant N_CYCLES : integer := {spec.n_cycles};
  constant CNT_BITS : integer := {cnt_bits};
  constant CLK_PERIOD : time := 10 ns;

  signal clk : std_logic := '0';
  signal rst : std_logic := '1';
  signal io_ready : std_logic := '0';
  signal in_spikes : std_logic_vector(N_INPUTS - 1 downto 0) := (others => '0');
  signal in_advance : std_logic;
  signal out_spikes : std_logic_vector(N_OUTPUTS - 1 downto 0);
  signal counts : std_logic_vector(N_OUTPUTS * CNT_BITS - 1 downto 0);
  signal done : std_logic;

begin

  dut : entity work.{net}_top
    generic map (
      N_INPUTS => N_INPUTS,
      N_OUTPUTS => N_OUTPUTS,
      N_CYCLES => N_CYCLES,
      CNT_BITS => CNT_BITS
    )
    port map (
      clk => clk,
      rst => rst,
      io_ready => io_ready,
      in_spikes => in_spikes,
      in_advance => in_advance,
      out_spikes => out_spikes,
      counts => counts,
      done => done
    );

  clk <= not clk after CLK_PERIOD / 2;

{stim_proc}

end architecture sim;
"""


def generate(spec: NetworkSpec, stimulus=None) -> dict[str, str]:
    """Emit the full file bundle for a network as {filename: text}."""
    spec = spec.canonical()
    net = vhdl_name(spec.name)
    if stimulus is not None:
        if stimulus.n_channels != spec.n_inputs:
            raise ValueError(
                f"stimulus has {stimulus.n_channels} channels, network expects {spec.n_inputs}"
            )
        if stimulus.n_steps != spec.n_cycles:
            raise ValueError(
                f"stimulus has {stimulus.n_steps} steps, network runs {spec.n_cycles}"
            )

    files: dict[str, str] = {}
    files[f"{net}_top.vhd"] = _emit_top(net, spec)
    files[f"{net}_network_cu.vhd"] = _emit_cu(net, spec)
    variants: dict[tuple[str, str], NeuronSpec] = {}
    for k, l in enumerate(spec.layers, start=1):
        files[f"{net}_l{k}.vhd"] = _emit_layer(net, k, spec)
        files[f"{net}_l{k}_ff.mem"] = emit_meminit(l.w_ff, l.ff_fmt.total_bits)
        if l.recurrent:
            files[f"{net}_l{k}_fb.mem"] = emit_meminit(l.w_fb, l.fb_fmt.total_bits)
        variants.setdefault((l.neuron.model, l.neuron.reset), l.neuron)
    for (model, reset), proto in sorted(variants.items()):
        files[f"{net}_neuron_{model}_{reset}.vhd"] = _emit_neuron(net, model, reset, proto)
    files[f"{net}_counters.vhd"] = _emit_counters(net)
    files[f"{net}_tb.vhd"] = _emit_tb(net, spec, with_stimuli=stimulus is not None)
    if stimulus is not None:
        rows = ["".join("1" if b else "0" for b in row) for row in stimulus.bits]
        files[f"{net}_stimuli.txt"] = "\n".join(rows) + "\n"
    return files


def write_bundle(spec: NetworkSpec, out_dir, stimulus=None) -> list[str]:
    """Write the bundle to a directory; returns the sorted file names."""
    files = generate(spec, stimulus=stimulus)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
    return sorted(files)
