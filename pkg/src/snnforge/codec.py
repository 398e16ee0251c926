"""File formats and deterministic input encoding.

Three interchange formats tie the tools (and external exporters) together:

**Network config (JSON).**  Top-level keys: ``name``, ``n_cycles``,
``propagation`` ("pipelined"|"immediate", default pipelined), ``parameters``
("fixed"|"float", default fixed), ``encoding`` (only "rate" is implemented;
"population" and "temporal" are reserved enum values), plus for fixed nets
``neuron_bits``, ``ff_weight_bits``, optional ``fb_weight_bits`` and
``scale_exp``.  Each entry of ``layers`` carries ``n_inputs``, ``n_neurons``,
``model`` ("if"|"lif1"|"lif2"), ``reset`` ("static"|"subtractive"),
``recurrent`` (default false), ``weights_ff``/``weights_fb`` (paths relative
to the config file), ``v_th``/``v_reset`` and the decay constants - integer
``alpha_shift``/``beta_shift`` for fixed nets, real ``alpha``/``beta`` in
(0, 1) for float nets - and optional ``immediate_current``.

**Weight file (binary).**  16-byte header: magic ``SNWT``, u16 version (1),
u32 rows, u32 cols, u8 bits, i8 scale exponent; then rows*cols little-endian
int32 values, row-major.  A value is ``raw * 2**-scale_exp``; fixed nets use
the raws directly and float nets dequantize.

**Raster file.**  Text form: header line ``<channels> <steps>``, then one
row of '0'/'1' per step, leftmost character = channel 0.  Binary form for
large batches: magic ``SNRB``, u32 channels, u32 steps, then each step row
packed to ceil(channels/8) bytes.  ``load_raster`` sniffs the magic.

**Rate encoding** is pinned so encodings are reproducible everywhere: the
bit stream comes from numpy's Philox counter-based generator
(``np.random.Generator(np.random.Philox(key=seed))``), uniforms drawn
row-major over (step, channel) with ``Generator.random``, and channel ``c``
spikes at step ``t`` iff ``u[t, c] < value[c]``.  Batch sample ``k`` uses key
``seed + k``.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

from .fxp import FxpFormat
from .network import LayerSpec, NetworkSpec, SpikeStream
from .neuron import MODELS, RESETS, NeuronSpec
from .quant import FloatLayer, FloatNetwork

WEIGHT_MAGIC = b"SNWT"
RASTER_MAGIC = b"SNRB"
WEIGHT_VERSION = 1
_HEADER = struct.Struct("<4sHIIbb")  # magic, version, rows, cols, bits, scale_exp
ENCODINGS = ("rate", "population", "temporal")


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (schema, shapes, widths)."""


class DataError(ValueError):
    """Malformed data file (weights, rasters, vectors)."""


# ---------------------------------------------------------------- weights


def save_weights(path, values, bits: int, scale_exp: int = 0) -> None:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 2:
        raise ValueError("weight matrix must be 2-D")
    fmt = FxpFormat(bits)
    if arr.size and (arr.min() < fmt.min_raw or arr.max() > fmt.max_raw):
        raise ValueError(f"values exceed the declared {bits}-bit range")
    if not -64 <= scale_exp <= 64:
        raise ValueError("scale_exp out of range [-64, 64]")
    rows, cols = arr.shape
    payload = arr.astype("<i4").tobytes()
    with open(path, "wb") as f:
        f.write(_HEADER.pack(WEIGHT_MAGIC, WEIGHT_VERSION, rows, cols, bits, scale_exp))
        f.write(payload)


def load_weights(path):
    """Returns (values int64 (rows, cols), bits, scale_exp)."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, version, rows, cols, bits, scale_exp = _HEADER.unpack_from(blob)
    if magic != WEIGHT_MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    if version != WEIGHT_VERSION:
        raise DataError(f"{path}: unsupported version {version}")
    if not 1 <= bits <= 32:
        raise DataError(f"{path}: bits={bits} outside 1..32")
    expect = _HEADER.size + rows * cols * 4
    if len(blob) != expect:
        raise DataError(f"{path}: payload length {len(blob)} != expected {expect}")
    values = np.frombuffer(blob, dtype="<i4", offset=_HEADER.size).astype(np.int64)
    values = values.reshape(rows, cols)
    fmt = FxpFormat(bits)
    if values.size and (values.min() < fmt.min_raw or values.max() > fmt.max_raw):
        raise DataError(f"{path}: payload value outside declared {bits}-bit range")
    return values, bits, scale_exp


# ---------------------------------------------------------------- rasters


def save_raster(path, stream: SpikeStream, fmt: str = "text") -> None:
    if fmt == "text":
        lines = [f"{stream.n_channels} {stream.n_steps}"]
        for row in stream.bits:
            lines.append("".join("1" if b else "0" for b in row))
        Path(path).write_text("\n".join(lines) + "\n")
    elif fmt == "binary":
        packed = np.packbits(stream.bits, axis=1)
        with open(path, "wb") as f:
            f.write(RASTER_MAGIC)
            f.write(struct.pack("<II", stream.n_channels, stream.n_steps))
            f.write(packed.tobytes())
    else:
        raise ValueError(f"unknown raster format {fmt!r}")


def load_raster(path) -> SpikeStream:
    blob = Path(path).read_bytes()
    if blob[:4] == RASTER_MAGIC:
        return _load_raster_binary(path, blob)
    return _load_raster_text(path, blob)


def _load_raster_binary(path, blob) -> SpikeStream:
    if len(blob) < 12:
        raise DataError(f"{path}: truncated binary raster header")
    channels, steps = struct.unpack_from("<II", blob, 4)
    row_bytes = (channels + 7) // 8
    expect = 12 + row_bytes * steps
    if len(blob) != expect:
        raise DataError(f"{path}: payload length {len(blob)} != expected {expect}")
    packed = np.frombuffer(blob, dtype=np.uint8, offset=12).reshape(steps, row_bytes)
    bits = np.unpackbits(packed, axis=1, count=channels)
    return SpikeStream(bits)


def _load_raster_text(path, blob) -> SpikeStream:
    try:
        text = blob.decode("ascii")
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not ascii text and not a binary raster") from e
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 2 or not all(p.isdigit() for p in head):
        raise DataError(f"{path}: line 1: header must be '<channels> <steps>'")
    channels, steps = int(head[0]), int(head[1])
    if len(lines) < steps + 1:
        raise DataError(f"{path}: expected {steps} rows, file has {len(lines) - 1}")
    rows = np.zeros((steps, channels), dtype=np.uint8)
    for n in range(steps):
        row = lines[n + 1]
        if len(row) != channels:
            raise DataError(
                f"{path}: line {n + 2}: expected {channels} characters, got {len(row)}"
            )
        for c, ch in enumerate(row):
            if ch == "1":
                rows[n, c] = 1
            elif ch != "0":
                raise DataError(f"{path}: line {n + 2}: invalid character {ch!r}")
    return SpikeStream(rows)


# ---------------------------------------------------------------- encoding


def rate_encode(values, n_steps: int, seed: int) -> SpikeStream:
    """Bernoulli rate coding with the pinned counter-based generator."""
    vals = np.asarray(values, dtype=np.float64)
    if vals.ndim != 1:
        raise ValueError("values must be a 1-D vector")
    if vals.size and (vals.min() < 0.0 or vals.max() > 1.0):
        raise ValueError("rate values must lie in [0, 1]")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    u = rng.random((n_steps, vals.size))
    return SpikeStream((u < vals).astype(np.uint8))


def encode_batch(vectors, n_steps: int, seed: int) -> list[SpikeStream]:
    """Per-sample independent streams, key = seed + sample index."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("vectors must be 2-D (samples, channels)")
    return [rate_encode(arr[k], n_steps, seed + k) for k in range(arr.shape[0])]


def load_vectors(path, label_col: int | None = None):
    """Load sample vectors from .csv or .npy; returns (array, labels|None)."""
    path = Path(path)
    if path.suffix == ".npy":
        arr = np.load(path)
        if arr.ndim != 2:
            raise DataError(f"{path}: expected a 2-D array, got ndim={arr.ndim}")
        return arr.astype(np.float64), None
    rows = []
    labels = []
    with open(path, newline="") as f:
        for n, row in enumerate(csv.reader(f), start=1):
            if not row:
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError as e:
                raise DataError(f"{path}: line {n}: {e}") from e
            if label_col is not None:
                labels.append(int(vals.pop(label_col)))
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: inconsistent row widths {sorted(widths)}")
    return np.array(rows, dtype=np.float64), (labels if label_col is not None else None)


# ---------------------------------------------------------------- datasets


def load_dataset(dirpath):
    """Rasters from ``*.rst`` files plus optional ``labels.csv``
    (``filename,label`` rows).  Returns [(name, SpikeStream, label|None)]
    sorted by filename."""
    d = Path(dirpath)
    if not d.is_dir():
        raise DataError(f"{d}: not a directory")
    labels: dict[str, int] = {}
    labfile = d / "labels.csv"
    if labfile.exists():
        with open(labfile, newline="") as f:
            for n, row in enumerate(csv.reader(f), start=1):
                if not row or row == ["filename", "label"]:
                    continue
                if len(row) != 2:
                    raise DataError(f"{labfile}: line {n}: expected 'filename,label'")
                try:
                    labels[row[0]] = int(row[1])
                except ValueError as e:
                    raise DataError(f"{labfile}: line {n}: {e}") from e
    items = []
    for p in sorted(d.glob("*.rst")):
        items.append((p.name, load_raster(p), labels.get(p.name)))
    if not items:
        raise DataError(f"{d}: no .rst rasters found")
    return items


def save_dataset(dirpath, streams, labels=None, fmt: str = "text") -> list[str]:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for k, s in enumerate(streams):
        name = f"sample_{k:05d}.rst"
        save_raster(d / name, s, fmt=fmt)
        names.append(name)
    if labels is not None:
        with open(d / "labels.csv", "w", newline="") as f:
            w = csv.writer(f)
            for name, lab in zip(names, labels):
                w.writerow([name, int(lab)])
    return names


# ---------------------------------------------------------------- configs


def _field(obj: dict, key: str, types, where: str, default=_HEADER):  # sentinel reuse
    if key not in obj:
        if default is not _HEADER:
            return default
        raise ConfigError(f"{where}.{key}: missing required field")
    val = obj[key]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"{where}.{key}: expected {types}, got {type(val).__name__}")
    return val


def _int_field(obj, key, where, default=_HEADER):
    val = _field(obj, key, (int,), where, default)
    if isinstance(val, bool):
        raise ConfigError(f"{where}.{key}: expected integer, got bool")
    return val


def load_network(path):
    """Load a config file; returns NetworkSpec (fixed) or FloatNetwork (float)."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    where = "config"
    name = _field(cfg, "name", (str,), where, default="snn")
    n_cycles = _int_field(cfg, "n_cycles", where)
    propagation = _field(cfg, "propagation", (str,), where, default="pipelined")
    parameters = _field(cfg, "parameters", (str,), where, default="fixed")
    encoding = _field(cfg, "encoding", (str,), where, default="rate")
    if encoding not in ENCODINGS:
        raise ConfigError(f"{where}.encoding: unknown encoding {encoding!r}")
    if encoding != "rate":
        raise ConfigError(f"{where}.encoding: unsupported encoding {encoding!r} "
                          "(only 'rate' is implemented)")
    if parameters not in ("fixed", "float"):
        raise ConfigError(f"{where}.parameters: must be 'fixed' or 'float'")
    layers_cfg = _field(cfg, "layers", (list,), where)
    if not layers_cfg:
        raise ConfigError(f"{where}.layers: must not be empty")

    if parameters == "fixed":
        return _load_fixed(path, cfg, name, n_cycles, propagation, layers_cfg)
    return _load_float(path, cfg, name, n_cycles, propagation, layers_cfg)


def _load_layer_common(lc: dict, where: str):
    n_inputs = _int_field(lc, "n_inputs", where)
    n_neurons = _int_field(lc, "n_neurons", where)
    model = _field(lc, "model", (str,), where)
    reset = _field(lc, "reset", (str,), where)
    if model not in MODELS:
        raise ConfigError(f"{where}.model: unknown model {model!r}")
    if reset not in RESETS:
        raise ConfigError(f"{where}.reset: unknown reset {reset!r}")
    recurrent = _field(lc, "recurrent", (bool,), where, default=False)
    imm = _field(lc, "immediate_current", (bool,), where, default=False)
    return n_inputs, n_neurons, model, reset, recurrent, imm


def _load_weight_ref(lc, key, where, base: Path, expect_shape, bits=None):
    rel = _field(lc, key, (str,), where)
    wpath = base / rel
    if not wpath.exists():
        raise ConfigError(f"{where}.{key}: file not found: {wpath}")
    values, file_bits, scale_exp = load_weights(wpath)
    if values.shape != expect_shape:
        raise ConfigError(
            f"{where}.{key}: weight shape {values.shape} != expected {expect_shape}"
        )
    if bits is not None and file_bits != bits:
        raise ConfigError(
            f"{where}.{key}: file declares {file_bits} bits, config says {bits}"
        )
    return values, file_bits, scale_exp


def _load_fixed(path, cfg, name, n_cycles, propagation, layers_cfg) -> NetworkSpec:
    where = "config"
    neuron_bits = _int_field(cfg, "neuron_bits", where)
    ff_bits = _int_field(cfg, "ff_weight_bits", where)
    fb_bits = _int_field(cfg, "fb_weight_bits", where, default=None)
    scale_exp = _int_field(cfg, "scale_exp", where, default=None)
    try:
        nfmt = FxpFormat(neuron_bits)
        ffmt = FxpFormat(ff_bits)
        bfmt = FxpFormat(fb_bits) if fb_bits is not None else None
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e
    base = path.parent
    layers = []
    for k, lc in enumerate(layers_cfg):
        lw = f"config.layers[{k}]"
        n_in, n_n, model, reset, recurrent, imm = _load_layer_common(lc, lw)
        v_th = _int_field(lc, "v_th", lw)
        v_reset = _int_field(lc, "v_reset", lw, default=0)
        alpha_shift = _int_field(lc, "alpha_shift", lw, default=None)
        beta_shift = _int_field(lc, "beta_shift", lw, default=None)
        w_ff, _, _ = _load_weight_ref(lc, "weights_ff", lw, base, (n_n, n_in), ff_bits)
        w_fb = None
        if recurrent:
            if fb_bits is None:
                raise ConfigError(f"{where}.fb_weight_bits: required for recurrent layers")
            w_fb, _, _ = _load_weight_ref(lc, "weights_fb", lw, base, (n_n, n_n), fb_bits)
        try:
            neuron = NeuronSpec(
                model=model, reset=reset, neuron_fmt=nfmt, v_th=v_th, v_reset=v_reset,
                alpha_shift=alpha_shift, beta_shift=beta_shift, immediate_current=imm,
            )
            layers.append(
                LayerSpec(
                    n_inputs=n_in, n_neurons=n_n, neuron=neuron,
                    w_ff=w_ff, ff_fmt=ffmt,
                    w_fb=w_fb, fb_fmt=bfmt if recurrent else None,
                )
            )
        except ValueError as e:
            raise ConfigError(f"{lw}: {e}") from e
    try:
        return NetworkSpec(
            name=name, layers=layers, n_cycles=n_cycles,
            propagation=propagation, scale_exp=scale_exp,
        )
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from e


def _load_float(path, cfg, name, n_cycles, propagation, layers_cfg) -> FloatNetwork:
    base = path.parent
    layers = []
    for k, lc in enumerate(layers_cfg):
        lw = f"config.layers[{k}]"
        n_in, n_n, model, reset, recurrent, imm = _load_layer_common(lc, lw)
        v_th = _field(lc, "v_th", (int, float), lw)
        v_reset = _field(lc, "v_reset", (int, float), lw, default=0.0)
        alpha = _field(lc, "alpha", (int, float), lw, default=None)
        beta = _field(lc, "beta", (int, float), lw, default=None)
        raw_ff, bits_ff, se_ff = _load_weight_ref(lc, "weights_ff", lw, base, (n_n, n_in))
        w_ff = raw_ff.astype(np.float64) * math.ldexp(1.0, -se_ff)
        w_fb = None
        if recurrent:
            raw_fb, bits_fb, se_fb = _load_weight_ref(lc, "weights_fb", lw, base, (n_n, n_n))
            w_fb = raw_fb.astype(np.float64) * math.ldexp(1.0, -se_fb)
        try:
            layers.append(
                FloatLayer(
                    n_inputs=n_in, n_neurons=n_n, model=model, reset=reset,
                    v_th=float(v_th), v_reset=float(v_reset),
                    alpha=None if alpha is None else float(alpha),
                    beta=None if beta is None else float(beta),
                    w_ff=w_ff, w_fb=w_fb, immediate_current=imm,
                )
            )
        except ValueError as e:
            raise ConfigError(f"{lw}: {e}") from e
    try:
        return FloatNetwork(
            name=name, layers=layers, n_cycles=n_cycles, propagation=propagation
        )
    except ValueError as e:
        raise ConfigError(f"config: {e}") from e


def save_network(net, path, weight_prefix: str | None = None) -> None:
    """Write a config plus its weight files next to it.

    Accepts a NetworkSpec (fixed) or FloatNetwork (float weights are stored
    as 24-bit raws with a 2^-16 scale, exact for training-scale magnitudes).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    prefix = weight_prefix if weight_prefix is not None else path.stem
    is_fixed = isinstance(net, NetworkSpec)
    cfg: dict = {
        "name": net.name,
        "n_cycles": net.n_cycles,
        "propagation": net.propagation,
        "parameters": "fixed" if is_fixed else "float",
        "encoding": "rate",
    }
    if is_fixed:
        cfg["neuron_bits"] = net.layers[0].neuron.neuron_fmt.total_bits
        cfg["ff_weight_bits"] = net.layers[0].ff_fmt.total_bits
        fb_layers = [l for l in net.layers if l.recurrent]
        if fb_layers:
            cfg["fb_weight_bits"] = fb_layers[0].fb_fmt.total_bits
        if net.scale_exp is not None:
            cfg["scale_exp"] = net.scale_exp
    layers_cfg = []
    for k, l in enumerate(net.layers):
        ff_name = f"{prefix}_l{k + 1}_ff.wgt"
        lc: dict = {
            "n_inputs": l.n_inputs,
            "n_neurons": l.n_neurons,
            "model": l.neuron.model if is_fixed else l.model,
            "reset": l.neuron.reset if is_fixed else l.reset,
            "recurrent": l.recurrent,
            "weights_ff": ff_name,
        }
        if is_fixed:
            n = l.neuron
            lc["v_th"] = n.v_th
            lc["v_reset"] = n.v_reset
            if n.alpha_shift is not None:
                lc["alpha_shift"] = n.alpha_shift
            if n.beta_shift is not None:
                lc["beta_shift"] = n.beta_shift
            if n.immediate_current:
                lc["immediate_current"] = True
            save_weights(path.parent / ff_name, l.w_ff, l.ff_fmt.total_bits,
                         net.scale_exp or 0)
        else:
            lc["v_th"] = l.v_th
            lc["v_reset"] = l.v_reset
            if l.alpha is not None:
                lc["alpha"] = l.alpha
            if l.beta is not None:
                lc["beta"] = l.beta
            if l.immediate_current:
                lc["immediate_current"] = True
            save_weights(path.parent / ff_name,
                         np.round(l.w_ff * 65536.0).astype(np.int64), 24, 16)
        if l.recurrent:
            fb_name = f"{prefix}_l{k + 1}_fb.wgt"
            lc["weights_fb"] = fb_name
            if is_fixed:
                save_weights(path.parent / fb_name, l.w_fb, l.fb_fmt.total_bits,
                             net.scale_exp or 0)
            else:
                save_weights(path.parent / fb_name,
                             np.round(l.w_fb * 65536.0).astype(np.int64), 24, 16)
        layers_cfg.append(lc)
    cfg["layers"] = layers_cfg
    path.write_text(json.dumps(cfg, indent=2) + "\n")
