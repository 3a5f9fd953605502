"""Text format for sequence specs.

    [meta]
    d = 2
    kind = explicit          # or: family
    tail_bound = 1/3         # optional, declared never computed

    [k=1]
    m = 2
    R = 4 -2 ; 0 2
    B = (0,0);(1,0);(0,1);(1,1)
    L = (0,0);(2,-1);(0,1);(2,0)   # optional

    [family]
    name = compact
    alpha = 1/2
    beta = 1
    d = 1

Blank lines and ``#`` comments are ignored.  ``format_spec`` prints the
canonical form, and parsing it back gives an equal document.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exact_linalg import Mat
from .sequence import DigitSet, Level, SequenceSpec

_SECTION = re.compile(r"^\[(meta|family|k=(\d+))\]$")
_INT_PARAMS = {"d", "spacing", "K"}


class SpecParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass
class SpecDocument:
    d: int
    kind: str  # "explicit" | "family"
    tail_bound: Fraction | None = None
    levels: list = field(default_factory=list)  # list of Level
    family: str | None = None
    params: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, SpecDocument):
            return NotImplemented
        return format_spec(self) == format_spec(other)

    def to_sequence(self) -> SequenceSpec:
        if self.kind == "family":
            from .constructions import make_family

            spec = make_family(self.family, self.params)
            if self.tail_bound is not None:
                spec.tail_bound = self.tail_bound
            return spec
        return SequenceSpec(self.d, levels=list(self.levels), tail_bound=self.tail_bound)

    def to_moran(self):
        from .constructions import moran_family
        from .fractal_dim import MoranSpec

        if self.kind == "family":
            return moran_family(self.family, self.params)
        return MoranSpec.from_sequence(self.to_sequence())


def _tuples(text: str, lineno: int) -> list[tuple]:
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not (part.startswith("(") and part.endswith(")")):
            raise SpecParseError(lineno, f"expected a tuple like (0,1), got {part!r}")
        try:
            out.append(tuple(Fraction(x.strip()) for x in part[1:-1].split(",")))
        except (ValueError, ZeroDivisionError) as e:
            raise SpecParseError(lineno, f"bad number in {part!r}: {e}") from None
    return out


def _digits(text: str, lineno: int, d: int) -> DigitSet:
    pts = _tuples(text, lineno)
    if any(len(p) != d for p in pts):
        raise SpecParseError(lineno, f"every tuple must have {d} coordinates")
    try:
        return DigitSet(pts)
    except ValueError as e:
        raise SpecParseError(lineno, str(e)) from None


def _param(key: str, value: str, lineno: int):
    try:
        if key == "name":
            return value
        if key in _INT_PARAMS:
            return int(value)
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise SpecParseError(lineno, f"bad value {value!r} for {key}") from None


def parse_spec(text: str) -> SpecDocument:
    sections: list[tuple[str, int, dict]] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            current = (m.group(1), lineno, {})
            sections.append(current)
            continue
        if current is None:
            raise SpecParseError(lineno, "content before the first section header")
        if "=" not in line:
            raise SpecParseError(lineno, f"expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in current[2]:
            raise SpecParseError(lineno, f"duplicate key {key!r}")
        current[2][key] = (value, lineno)

    meta = [s for s in sections if s[0] == "meta"]
    if len(meta) != 1:
        raise SpecParseError(meta[1][1] if len(meta) > 1 else 1, "exactly one [meta] section is required")
    _, mline, mkeys = meta[0]
    for key in mkeys:
        if key not in ("d", "kind", "tail_bound"):
            raise SpecParseError(mkeys[key][1], f"unknown key {key!r} in [meta]")
    if "d" not in mkeys or "kind" not in mkeys:
        raise SpecParseError(mline, "[meta] needs d and kind")
    try:
        d = int(mkeys["d"][0])
    except ValueError:
        raise SpecParseError(mkeys["d"][1], "d must be an integer") from None
    if d < 1:
        raise SpecParseError(mkeys["d"][1], "d must be positive")
    kind = mkeys["kind"][0]
    if kind not in ("explicit", "family"):
        raise SpecParseError(mkeys["kind"][1], "kind must be 'explicit' or 'family'")
    tail = None
    if "tail_bound" in mkeys:
        tail = _param("tail_bound", *mkeys["tail_bound"])
    doc = SpecDocument(d, kind, tail)

    if kind == "family":
        fam = [s for s in sections if s[0] == "family"]
        if len(fam) != 1:
            raise SpecParseError(mline, "kind = family needs exactly one [family] section")
        _, fline, fkeys = fam[0]
        if "name" not in fkeys:
            raise SpecParseError(fline, "[family] needs a name")
        for key, (value, ln) in fkeys.items():
            doc.params[key] = _param(key, value, ln)
        doc.family = doc.params.pop("name")
        from .constructions import FAMILIES

        if doc.family not in FAMILIES:
            raise SpecParseError(fkeys["name"][1], f"unknown family {doc.family!r}")
        doc.params.setdefault("d", d)
        if doc.params["d"] != d:
            raise SpecParseError(fkeys["d"][1], "family d differs from [meta] d")
        return doc

    levels = sorted((int(s[0][2:]), s[1], s[2]) for s in sections if s[0].startswith("k="))
    if not levels:
        raise SpecParseError(mline, "explicit spec without any [k=i] section")
    for idx, (k, ln, keys) in enumerate(levels, start=1):
        if k != idx:
            raise SpecParseError(ln, f"levels must be numbered 1, 2, ... without gaps (found k={k})")
        for key in keys:
            if key not in ("m", "R", "B", "L"):
                raise SpecParseError(keys[key][1], f"unknown key {key!r} in [k={k}]")
        if "R" not in keys or "B" not in keys:
            raise SpecParseError(ln, f"[k={k}] needs R and B")
        try:
            R = Mat.parse(keys["R"][0])
        except (ValueError, ZeroDivisionError) as e:
            raise SpecParseError(keys["R"][1], f"bad matrix: {e}") from None
        if R.d != d:
            raise SpecParseError(keys["R"][1], f"R must be {d}x{d}")
        B = _digits(keys["B"][0], keys["B"][1], d)
        L = _digits(keys["L"][0], keys["L"][1], d) if "L" in keys else None
        m = None
        if "m" in keys:
            try:
                m = int(keys["m"][0])
            except ValueError:
                raise SpecParseError(keys["m"][1], "m must be an integer") from None
        doc.levels.append(Level(R, B, m, L))
    return doc


def _fmt_digits(D: DigitSet) -> str:
    return ";".join("(" + ",".join(str(x) for x in p) + ")" for p in D)


def format_spec(doc: SpecDocument) -> str:
    lines = ["[meta]", f"d = {doc.d}", f"kind = {doc.kind}"]
    if doc.tail_bound is not None:
        lines.append(f"tail_bound = {doc.tail_bound}")
    if doc.kind == "family":
        lines += ["", "[family]", f"name = {doc.family}"]
        for key in sorted(doc.params):
            lines.append(f"{key} = {doc.params[key]}")
    else:
        for k, lv in enumerate(doc.levels, start=1):
            lines += ["", f"[k={k}]"]
            if lv.m is not None:
                lines.append(f"m = {lv.m}")
            lines.append(f"R = {lv.R.format()}")
            lines.append(f"B = {_fmt_digits(lv.B)}")
            if lv.L is not None:
                lines.append(f"L = {_fmt_digits(lv.L)}")
    return "\n".join(lines) + "\n"


def family_document(name: str, params: dict) -> SpecDocument:
    params = dict(params)
    d = int(params.get("d", 1))
    params["d"] = d
    return SpecDocument(d, "family", None, [], name, params)


def read_spec(path: str) -> SpecDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())
