"""Structural linter for generated VHDL bundles.

This is an independent consistency checker, not a compiler: it parses the
restricted VHDL subset the generator emits (entities, one architecture each,
constants, signals, array/enum types, direct entity instantiations and
for-generate blocks) and then elaborates the design from its root the way a
synthesis front end would:

* every ``entity work.X`` reference must resolve to an entity in the bundle,
  and each entity needs exactly one architecture;
* generic maps may only bind generics the target declares, and every generic
  without a default must be bound;
* port maps must bind every port of the target, formals must exist, and each
  association must agree in base type (std_logic / std_logic_vector / signed
  / unsigned, after casts) and in elaborated bit width;
* for-generate ranges must be non-negative, and index-dependent widths are
  checked at both range endpoints;
* ROM constants initialized from a file must name a file in the bundle whose
  line count and line width match the elaborated array geometry, and every
  quoted file reference must exist in the bundle.

Width expressions are evaluated with a small integer-expression interpreter
over the generic and constant bindings, so width mismatches are caught at
the same point a tool's elaboration would catch them.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field


class _Skip(Exception):
    """Type or expression outside the checked subset."""


def _eval(expr: str, env: dict) -> int:
    expr = expr.strip().lower()
    try:
        node = ast.parse(expr, mode="eval")
    except SyntaxError as e:
        raise _Skip(f"unparseable expression {expr!r}") from e

    def walk(n):
        if isinstance(n, ast.Expression):
            return walk(n.body)
        if isinstance(n, ast.BinOp) and isinstance(n.op, (ast.Add, ast.Sub, ast.Mult)):
            a, b = walk(n.left), walk(n.right)
            if isinstance(n.op, ast.Add):
                return a + b
            if isinstance(n.op, ast.Sub):
                return a - b
            return a * b
        if isinstance(n, ast.UnaryOp) and isinstance(n.op, (ast.USub, ast.UAdd)):
            v = walk(n.operand)
            return -v if isinstance(n.op, ast.USub) else v
        if isinstance(n, ast.Constant) and isinstance(n.value, (int, bool)):
            return n.value
        if isinstance(n, ast.Name):
            if n.id in env:
                return env[n.id]
            raise _Skip(f"unknown name {n.id!r} in {expr!r}")
        raise _Skip(f"unsupported construct in {expr!r}")

    return walk(node)


# ---------------------------------------------------------------- parsing


def _strip_comments(text: str) -> str:
    return re.sub(r"--[^\n]*", "", text)


def _matching_paren(text: str, start: int) -> int:
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "(":
            depth += 1
        elif text[i] == ")":
            depth -= 1
            if depth == 0:
                return i
    raise ValueError("unbalanced parentheses")


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p for p in (x.strip() for x in parts) if p]


@dataclass
class TypeSpec:
    base: str                      # sl | vec | enum | array | int | bool | other
    kind: str | None = None        # vec: std_logic_vector | signed | unsigned
    hi: str | None = None
    lo: str | None = None
    elem: "TypeSpec | None" = None
    length: str | None = None      # array element count expression

    def width(self, env: dict) -> int:
        if self.base == "sl":
            return 1
        if self.base == "vec":
            return _eval(self.hi, env) - _eval(self.lo, env) + 1
        raise _Skip(f"no width for base {self.base}")


_VEC_RE = re.compile(
    r"^(std_logic_vector|signed|unsigned)\s*\(\s*(.+?)\s+downto\s+(.+?)\s*\)$",
    re.DOTALL,
)


def _parse_type(text: str, local_types: dict) -> TypeSpec:
    t = re.sub(r"\s+", " ", text.strip().lower())
    if t == "std_logic":
        return TypeSpec("sl")
    if t == "integer":
        return TypeSpec("int")
    if t == "boolean":
        return TypeSpec("bool")
    m = _VEC_RE.match(t)
    if m:
        return TypeSpec("vec", kind=m.group(1), hi=m.group(2), lo=m.group(3))
    if t in local_types:
        return local_types[t]
    raise _Skip(f"type outside subset: {t!r}")


@dataclass
class Port:
    name: str
    direction: str
    type_text: str


@dataclass
class Generic:
    name: str
    type_text: str
    default: str | None


@dataclass
class Entity:
    name: str
    generics: dict[str, Generic] = field(default_factory=dict)
    ports: dict[str, Port] = field(default_factory=dict)
    source: str = ""


@dataclass
class Instance:
    label: str
    target: str
    generic_map: list[tuple[str, str]]
    port_map: list[tuple[str, str]]
    gen_vars: list[tuple[str, str, str]]  # (var, lo_expr, hi_expr) context


@dataclass
class Architecture:
    entity: str
    constants: list[tuple[str, str, str]] = field(default_factory=list)  # name, type, init
    signals: dict[str, str] = field(default_factory=dict)                # name -> type text
    types: dict[str, TypeSpec] = field(default_factory=dict)
    instances: list[Instance] = field(default_factory=list)
    file_refs: list[str] = field(default_factory=list)
    generates: list[tuple[str, str, str, int, int]] = field(default_factory=list)
    source: str = ""


def _parse_interface_list(text: str, what: str, errors: list[str], owner: str):
    """Items of a generic( ) or port( ) list."""
    out = []
    for item in _split_top(text, ";"):
        if ":" not in item:
            errors.append(f"{owner}: malformed {what} item {item!r}")
            continue
        names, rest = item.split(":", 1)
        rest = rest.strip()
        default = None
        if ":=" in rest:
            rest, default = rest.split(":=", 1)
            default = default.strip()
        rest = rest.strip()
        direction = None
        m = re.match(r"^(in|out|inout)\s+(.*)$", rest, re.DOTALL)
        if m:
            direction, rest = m.group(1), m.group(2)
        for name in names.split(","):
            out.append((name.strip().lower(), direction, rest.strip(), default))
    return out


_ENTITY_RE = re.compile(
    r"\bentity\s+(\w+)\s+is\b(.*?)\bend\s+entity\b", re.DOTALL | re.IGNORECASE
)
_ARCH_RE = re.compile(
    r"\barchitecture\s+(\w+)\s+of\s+(\w+)\s+is\b(.*?)\bend\s+architecture\b",
    re.DOTALL | re.IGNORECASE,
)
_INST_RE = re.compile(r"(\w+)\s*:\s*entity\s+work\.(\w+)", re.IGNORECASE)
_GEN_RE = re.compile(
    r"(\w+)\s*:\s*for\s+(\w+)\s+in\s+(.+?)\s+to\s+(.+?)\s+generate",
    re.IGNORECASE,
)
_FILE_RE = re.compile(r'"([\w.]+\.(?:mem|txt))"')
_ARRAY_RE = re.compile(
    r"^array \( ?(.+?) to (.+?) ?\) of (.+)$", re.DOTALL
)


def _parse_entity(name: str, body: str, errors: list[str]) -> Entity:
    ent = Entity(name=name.lower())
    for kw, store in (("generic", "generics"), ("port", "ports")):
        m = re.search(rf"\b{kw}\s*\(", body, re.IGNORECASE)
        if not m:
            continue
        close = _matching_paren(body, m.end() - 1)
        items = _parse_interface_list(body[m.end():close], kw, errors, ent.name)
        for iname, direction, type_text, default in items:
            if kw == "generic":
                ent.generics[iname] = Generic(iname, type_text, default)
            else:
                if direction is None:
                    errors.append(f"{ent.name}: port {iname} lacks a direction")
                    direction = "in"
                ent.ports[iname] = Port(iname, direction, type_text)
    return ent


def _parse_architecture(entity: str, body: str, errors: list[str]) -> Architecture:
    arch = Architecture(entity=entity.lower(), source=body)

    for stmt in _split_top(body, ";"):
        flat = re.sub(r"\s+", " ", stmt).strip()
        m = re.match(r"^constant (\w+) : (.+)$", flat, re.DOTALL)
        if m and ":=" in m.group(2):
            type_text, init = m.group(2).split(":=", 1)
            arch.constants.append((m.group(1).lower(), type_text.strip(), init.strip()))
            continue
        m = re.match(r"^signal ([\w, ]+) : (.+)$", flat)
        if m:
            type_text = m.group(2).split(":=")[0].strip()
            for name in m.group(1).split(","):
                arch.signals[name.strip().lower()] = type_text
            continue
        m = re.match(r"^type (\w+) is (array .+)$", flat, re.DOTALL)
        if m:
            am = _ARRAY_RE.match(m.group(2).strip())
            if am:
                arch.types[m.group(1).lower()] = TypeSpec(
                    "array",
                    lo=am.group(1).strip("( )"),
                    hi=am.group(2).strip(),
                    elem=None,
                    length=None,
                )
                # element type may itself use earlier local types
                try:
                    arch.types[m.group(1).lower()].elem = _parse_type(
                        am.group(3), arch.types
                    )
                except _Skip:
                    arch.types[m.group(1).lower()].elem = TypeSpec("other")
            continue
        m = re.match(r"^type (\w+) is \(", flat)
        if m:
            arch.types[m.group(1).lower()] = TypeSpec("enum")
            continue

    gen_spans = []
    for gm in _GEN_RE.finditer(body):
        end = body.find("end generate", gm.end())
        if end < 0:
            errors.append(f"{arch.entity}: unterminated generate {gm.group(1)!r}")
            end = len(body)
        gen_spans.append((gm.start(), end, gm.group(2).lower(),
                          gm.group(3).strip(), gm.group(4).strip()))

    for im in _INST_RE.finditer(body):
        pos = im.end()
        generic_map: list[tuple[str, str]] = []
        port_map: list[tuple[str, str]] = []
        gmatch = re.match(r"\s*generic\s+map\s*\(", body[pos:], re.IGNORECASE)
        if gmatch:
            open_idx = pos + gmatch.end() - 1
            close = _matching_paren(body, open_idx)
            generic_map = _parse_assoc(body[open_idx + 1:close])
            pos = close + 1
        pmatch = re.match(r"\s*port\s+map\s*\(", body[pos:], re.IGNORECASE)
        if pmatch:
            open_idx = pos + pmatch.end() - 1
            close = _matching_paren(body, open_idx)
            port_map = _parse_assoc(body[open_idx + 1:close])
        else:
            errors.append(f"{arch.entity}: instance {im.group(1)} has no port map")
        gen_vars = [
            (var, lo, hi)
            for (s, e, var, lo, hi) in gen_spans
            if s < im.start() < e
        ]
        arch.instances.append(
            Instance(
                label=im.group(1).lower(),
                target=im.group(2).lower(),
                generic_map=generic_map,
                port_map=port_map,
                gen_vars=gen_vars,
            )
        )

    arch.file_refs = [m.group(1) for m in _FILE_RE.finditer(body)]
    return arch


def _parse_assoc(text: str) -> list[tuple[str, str]]:
    out = []
    for item in _split_top(text, ","):
        if "=>" not in item:
            out.append(("", item.strip()))
            continue
        formal, actual = item.split("=>", 1)
        out.append((formal.strip().lower(), actual.strip()))
    return out


# ---------------------------------------------------------------- checking


_CAST_RE = re.compile(r"^(signed|unsigned|std_logic_vector)\s*\((.+)\)$", re.DOTALL)
_INDEX_RE = re.compile(r"^(\w+)\s*\((.+)\)$", re.DOTALL)


def _actual_spec(expr: str, arch: Architecture, entity: Entity, env: dict):
    """Resolve a port-map actual to ('sl', 1) or ('vec', kind, width)."""
    e = expr.strip()
    if e in ("'0'", "'1'"):
        return ("sl", 1)
    cast = None
    m = _CAST_RE.match(e)
    if m and _matching_paren(e, e.index("(")) == len(e) - 1:
        cast = m.group(1).lower()
        e = m.group(2).strip()

    def finish(spec):
        if cast is not None and spec[0] == "vec":
            return ("vec", cast, spec[2])
        return spec

    name = e.split("(")[0].strip().lower()
    type_text = arch.signals.get(name)
    if type_text is None and name in entity.ports:
        type_text = entity.ports[name].type_text
    if type_text is None:
        raise _Skip(f"unknown actual {name!r}")
    spec = _parse_type(type_text, arch.types)

    rest = e[len(e.split("(")[0]):].strip()
    if not rest:
        if spec.base == "sl":
            return finish(("sl", 1))
        if spec.base == "vec":
            return finish(("vec", spec.kind, spec.width(env)))
        raise _Skip(f"actual {name!r} has unhandled base {spec.base}")
    inner = rest[1:_matching_paren(rest, 0)]
    if "downto" in inner:
        hi, lo = (p.strip() for p in inner.split("downto", 1))
        if spec.base != "vec":
            raise _Skip(f"slice of non-vector {name!r}")
        return finish(("vec", spec.kind, _eval(hi, env) - _eval(lo, env) + 1))
    # plain index
    if spec.base == "vec":
        _eval(inner, env)
        return finish(("sl", 1))
    if spec.base == "array":
        elem = spec.elem
        if elem is None or elem.base not in ("sl", "vec"):
            raise _Skip(f"array {name!r} has unhandled element type")
        _eval(inner, env)
        if elem.base == "sl":
            return finish(("sl", 1))
        return finish(("vec", elem.kind, elem.width(env)))
    raise _Skip(f"index into unhandled type of {name!r}")


def _formal_spec(port: Port, target_arch_types: dict, bindings: dict):
    spec = _parse_type(port.type_text, target_arch_types)
    if spec.base == "sl":
        return ("sl", 1)
    if spec.base == "vec":
        return ("vec", spec.kind, spec.width(bindings))
    raise _Skip(f"port {port.name!r} has unhandled type")


class _Design:
    def __init__(self, files: dict[str, str]):
        self.files = files
        self.errors: list[str] = []
        self.entities: dict[str, Entity] = {}
        self.archs: dict[str, Architecture] = {}
        for fname in sorted(files):
            if not fname.endswith(".vhd"):
                continue
            text = _strip_comments(files[fname])
            for em in _ENTITY_RE.finditer(text):
                name = em.group(1).lower()
                if name in self.entities:
                    self.errors.append(f"{fname}: duplicate entity {name}")
                    continue
                self.entities[name] = _parse_entity(em.group(1), em.group(2), self.errors)
                self.entities[name].source = fname
            for am in _ARCH_RE.finditer(text):
                ename = am.group(2).lower()
                if ename in self.archs:
                    self.errors.append(f"{fname}: second architecture for {ename}")
                    continue
                self.archs[ename] = _parse_architecture(am.group(2), am.group(3), self.errors)

    def run(self) -> list[str]:
        for name in self.entities:
            if name not in self.archs:
                self.errors.append(f"{name}: entity has no architecture")
        for name in self.archs:
            if name not in self.entities:
                self.errors.append(f"{name}: architecture without an entity")
        targeted = {
            inst.target for arch in self.archs.values() for inst in arch.instances
        }
        roots = [n for n in sorted(self.entities) if n not in targeted]
        if not roots:
            self.errors.append("no root entity (instantiation cycle?)")
        seen: set = set()
        for root in roots:
            bindings = {}
            ent = self.entities[root]
            for g in ent.generics.values():
                if g.default is None:
                    self.errors.append(f"{root}: root generic {g.name} has no default")
                else:
                    try:
                        bindings[g.name] = _eval(g.default, {"true": True, "false": False})
                    except _Skip:
                        pass
            self._elaborate(root, bindings, seen)
        return self.errors

    def _env_for(self, arch: Architecture, bindings: dict) -> dict:
        env = dict(bindings)
        env.setdefault("true", True)
        env.setdefault("false", False)
        for name, _type_text, init in arch.constants:
            try:
                env[name] = _eval(init, env)
            except _Skip:
                pass
        return env

    def _elaborate(self, name: str, bindings: dict, seen: set) -> None:
        key = (name, tuple(sorted(bindings.items())))
        if key in seen or name not in self.archs:
            return
        seen.add(key)
        arch = self.archs[name]
        entity = self.entities[name]
        env = self._env_for(arch, bindings)
        self._check_files(name, arch, env)
        for _label, lo, hi in {(v, l, h) for i in arch.instances for (v, l, h) in i.gen_vars}:
            try:
                if _eval(hi, env) - _eval(lo, env) + 1 < 0:
                    self.errors.append(f"{name}: generate range {lo} to {hi} is negative")
            except _Skip:
                pass
        for inst in arch.instances:
            self._check_instance(name, arch, entity, env, inst, seen)

    def _check_files(self, name: str, arch: Architecture, env: dict) -> None:
        for ref in arch.file_refs:
            if ref not in self.files:
                self.errors.append(f"{name}: referenced file {ref} is not in the bundle")
        for cname, type_text, init in arch.constants:
            t = type_text.strip().lower()
            if t not in arch.types or arch.types[t].base != "array":
                continue
            m = re.match(r'^\w+\s*\(\s*"([^"]+)"\s*\)$', init)
            if not m or m.group(1) not in self.files:
                continue
            spec = arch.types[t]
            try:
                depth = _eval(spec.hi, env) - _eval(spec.lo, env) + 1
                width = spec.elem.width(env)
            except (_Skip, AttributeError):
                continue
            lines = [ln for ln in self.files[m.group(1)].splitlines() if ln]
            if len(lines) != depth:
                self.errors.append(
                    f"{name}: {m.group(1)} has {len(lines)} lines, {cname} expects {depth}"
                )
            bad = [ln for ln in lines if len(ln) != width or set(ln) - {"0", "1"}]
            if bad:
                self.errors.append(
                    f"{name}: {m.group(1)} rows must be {width} binary digits"
                )

    def _check_instance(self, parent: str, arch: Architecture, entity: Entity,
                        env: dict, inst: Instance, seen: set) -> None:
        where = f"{parent}/{inst.label}"
        target = self.entities.get(inst.target)
        if target is None:
            self.errors.append(f"{where}: unknown entity work.{inst.target}")
            return

        child_bind: dict = {}
        for g in target.generics.values():
            if g.default is not None:
                try:
                    child_bind[g.name] = _eval(g.default, {"true": True, "false": False})
                except _Skip:
                    pass
        for formal, actual in inst.generic_map:
            if formal not in target.generics:
                self.errors.append(f"{where}: no generic {formal} on {target.name}")
                continue
            try:
                child_bind[formal] = _eval(actual, env)
            except _Skip:
                pass
        missing = [g for g in target.generics if g not in child_bind]
        if missing:
            self.errors.append(f"{where}: unbound generics {missing} on {target.name}")

        mapped = {formal for formal, _ in inst.port_map}
        for pname in target.ports:
            if pname not in mapped:
                self.errors.append(f"{where}: port {pname} of {target.name} not mapped")
        target_types = self.archs[target.name].types if target.name in self.archs else {}

        index_envs = [env]
        if inst.gen_vars:
            index_envs = []
            for bounds in ("lo", "hi"):
                e2 = dict(env)
                ok = True
                for var, lo, hi in inst.gen_vars:
                    try:
                        e2[var] = _eval(lo if bounds == "lo" else hi, env)
                    except _Skip:
                        ok = False
                if ok:
                    index_envs.append(e2)
            if not index_envs:
                index_envs = [env]

        for formal, actual in inst.port_map:
            if formal not in target.ports:
                self.errors.append(f"{where}: no port {formal} on {target.name}")
                continue
            try:
                fs = _formal_spec(target.ports[formal], target_types, child_bind)
            except _Skip:
                continue
            for e2 in index_envs:
                try:
                    as_ = _actual_spec(actual, arch, entity, e2)
                except _Skip:
                    continue
                if fs[0] != as_[0]:
                    self.errors.append(
                        f"{where}: {formal}: {fs[0]} port wired to {as_[0]} actual"
                    )
                elif fs[0] == "vec":
                    if fs[1] != as_[1]:
                        self.errors.append(
                            f"{where}: {formal}: {fs[1]} port wired to {as_[1]} actual"
                        )
                    if fs[2] != as_[2]:
                        self.errors.append(
                            f"{where}: {formal}: width {fs[2]} port wired to "
                            f"width {as_[2]} actual ({actual})"
                        )

        self._elaborate(target.name, child_bind, seen)


def lint_bundle(files: dict[str, str]) -> list[str]:
    """All structural errors found in a generated bundle (empty when clean)."""
    return _Design(files).run()
