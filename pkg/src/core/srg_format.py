"""
The line-oriented ``srg v1`` text format.

    srg v1
    pair 0 sigma finite 0
    pair 0 rho finite 1
    vertices 2
    edge 0 1
    rel 2 0 1 accepts 1 2
    bag 0 1
"""

from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from ..exceptions import FormatError, SetParseError, SigmaRhoError
from .decomposition import PathDecomposition
from .instance import Constraint, GraphRelInstance
from .intset import IntSet, SetKind
from .pair import Pair, PairFamily
from .states import Language, StateString, parse_string, string_code


HEADER = "srg v1"


class SrgDocument(BaseModel):
    """Everything a srg v1 file can carry"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    instance: GraphRelInstance
    decomposition: Optional[PathDecomposition] = None
    portals: Optional[Tuple[int, ...]] = None
    language: Optional[Language] = None
    blocks: Tuple[Tuple[int, str, Tuple[int, ...]], ...] = ()
    notes: Tuple[str, ...] = ()


def _fraction_text(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def _parse_fraction(token: str, line: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise FormatError(f"bad rational '{token}'", line) from None


def _int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"expected integer, got '{token}'", line) from None


def serialize_srg(
    inst: GraphRelInstance,
    pd: Optional[PathDecomposition] = None,
    portals: Optional[Sequence[int]] = None,
    language: Optional[Language] = None,
    blocks: Sequence[Tuple[int, str, Sequence[int]]] = (),
    notes: Sequence[str] = (),
) -> str:
    lines: List[str] = [HEADER]
    lines.extend(f"# {note}" for note in notes)
    for index, pair in enumerate(inst.family.pairs):
        for name, s in (("sigma", pair.sigma), ("rho", pair.rho)):
            body = " ".join(str(v) for v in s.support)
            lines.append(f"pair {index} {name} {s.kind.value}{(' ' + body) if body else ''}")
        bound = inst.family.bound(index)
        if bound is not None:
            lines.append(f"family {index} bound {bound}")
    lines.append(f"vertices {inst.n}")
    if inst.dagger_mode:
        lines.append("dagger on")
    for u, v in inst.edges:
        lines.append(f"edge {u} {v}")
    for v in range(inst.n):
        if inst.label(v):
            lines.append(f"label {v} {inst.label(v)}")
    for c in inst.constraints:
        scope = " ".join(str(v) for v in c.scope)
        if c.weights is None:
            masks = " ".join(format(m, "x") for m in c.accepted)
            lines.append(f"rel {c.arity} {scope} accepts {masks}".replace("  ", " "))
        else:
            entries = " ".join(f"{m:x}={_fraction_text(c.weights[m])}" for m in c.accepted)
            lines.append(f"wrel {c.arity} {scope} {entries}".replace("  ", " "))
    if inst.vertex_weights:
        for v in sorted(inst.vertex_weights):
            lines.append(f"vweight {v} {_fraction_text(inst.vertex_weights[v])}")
    if portals is not None:
        lines.append("portal " + " ".join(str(v) for v in portals))
    if language is not None:
        for x in language.sorted():
            lines.append(f"lang {string_code(x)}")
    for index, side, vertices in blocks:
        lines.append(f"block {index} {side} " + " ".join(str(v) for v in vertices))
    if pd is not None:
        for bag in pd.bags:
            lines.append(("bag " + " ".join(str(v) for v in bag)).rstrip())
    return "\n".join(line.rstrip() for line in lines) + "\n"


def parse_srg(text: str) -> SrgDocument:
    """
    Parse a srg v1 document.

    Raises:
        FormatError: malformed line (carries the line number)
    """
    sets: Dict[int, Dict[str, IntSet]] = {}
    bounds: Dict[int, Optional[int]] = {}
    n: Optional[int] = None
    edges: List[Tuple[int, int]] = []
    labels: Dict[int, int] = {}
    constraints: List[Constraint] = []
    weights: Dict[int, Fraction] = {}
    dagger = False
    bags: List[Tuple[int, ...]] = []
    saw_bag = False
    portals: Optional[Tuple[int, ...]] = None
    lang: List[StateString] = []
    blocks: List[Tuple[int, str, Tuple[int, ...]]] = []
    notes: List[str] = []

    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            notes.append(stripped.lstrip("#").strip())
            continue
        tokens = stripped.split()
        head, args = tokens[0], tokens[1:]
        try:
            if head == "srg":
                if args != ["v1"]:
                    raise FormatError(f"unsupported version '{' '.join(args)}'", number)
            elif head == "pair":
                if len(args) < 3 or args[1] not in ("sigma", "rho"):
                    raise FormatError("expected 'pair <idx> <sigma|rho> <finite|cofinite> <ints...>'", number)
                index = _int(args[0], number)
                try:
                    kind = SetKind(args[2])
                except ValueError:
                    raise FormatError(f"unknown set kind '{args[2]}'", number) from None
                values = [_int(t, number) for t in args[3:]]
                sets.setdefault(index, {})[args[1]] = IntSet(kind=kind, support=values)
            elif head == "family":
                if len(args) != 3 or args[1] != "bound":
                    raise FormatError("expected 'family <idx> bound <c|unbounded>'", number)
                bounds[_int(args[0], number)] = None if args[2] == "unbounded" else _int(args[2], number)
            elif head == "vertices":
                if len(args) != 1:
                    raise FormatError("expected 'vertices <n>'", number)
                n = _int(args[0], number)
            elif head == "edge":
                if len(args) != 2:
                    raise FormatError("expected 'edge <u> <v>'", number)
                edges.append((_int(args[0], number), _int(args[1], number)))
            elif head == "label":
                if len(args) != 2:
                    raise FormatError("expected 'label <v> <pairidx>'", number)
                labels[_int(args[0], number)] = _int(args[1], number)
            elif head in ("rel", "wrel"):
                if not args:
                    raise FormatError(f"empty {head} line", number)
                k = _int(args[0], number)
                scope = tuple(_int(t, number) for t in args[1:1 + k])
                if len(scope) != k:
                    raise FormatError("scope shorter than its arity", number)
                rest = args[1 + k:]
                if head == "rel":
                    if not rest or rest[0] != "accepts":
                        raise FormatError("expected 'accepts' after the scope", number)
                    try:
                        masks = [int(t, 16) for t in rest[1:]]
                    except ValueError:
                        raise FormatError("bad hexadecimal mask", number) from None
                    constraints.append(Constraint(scope=scope, accepted=masks))
                else:
                    table: Dict[int, Fraction] = {}
                    for entry in rest:
                        mask_text, sep, value = entry.partition("=")
                        if not sep:
                            raise FormatError(f"bad weighted entry '{entry}'", number)
                        try:
                            mask = int(mask_text, 16)
                        except ValueError:
                            raise FormatError("bad hexadecimal mask", number) from None
                        table[mask] = _parse_fraction(value, number)
                    constraints.append(Constraint(scope=scope, accepted=list(table), weights=table))
            elif head == "vweight":
                if len(args) != 2:
                    raise FormatError("expected 'vweight <v> <num>/<den>'", number)
                weights[_int(args[0], number)] = _parse_fraction(args[1], number)
            elif head == "dagger":
                if args not in (["on"], ["off"]):
                    raise FormatError("expected 'dagger on|off'", number)
                dagger = args[0] == "on"
            elif head == "bag":
                saw_bag = True
                bags.append(tuple(_int(t, number) for t in args))
            elif head == "portal":
                portals = tuple(_int(t, number) for t in args)
            elif head == "lang":
                lang.append(parse_string(" ".join(args)))
            elif head == "block":
                if len(args) < 2 or args[1] not in ("B", "Bbar"):
                    raise FormatError("expected 'block <i> <B|Bbar> <v...>'", number)
                blocks.append((_int(args[0], number), args[1], tuple(_int(t, number) for t in args[2:])))
            else:
                raise FormatError(f"unknown line kind '{head}'", number)
        except FormatError:
            raise
        except SigmaRhoError as exc:
            raise FormatError(str(exc), number) from exc
        except ValueError as exc:
            raise FormatError(str(exc), number) from exc

    if n is None:
        raise FormatError("missing 'vertices' line")
    if 0 not in sets:
        raise FormatError("missing base pair 0")
    pairs = []
    for index in range(max(sets) + 1):
        entry = sets.get(index, {})
        if "sigma" not in entry or "rho" not in entry:
            raise FormatError(f"pair {index} needs both sigma and rho")
        pairs.append(Pair(sigma=entry["sigma"], rho=entry["rho"]))
    try:
        family = PairFamily(pairs=tuple(pairs), bounds=tuple(bounds.get(i) for i in range(len(pairs))))
        inst = GraphRelInstance(
            n=n,
            edges=tuple(edges),
            constraints=tuple(constraints),
            family=family,
            labels=tuple(labels.get(v, 0) for v in range(n)),
            vertex_weights=weights or None,
            dagger_mode=dagger,
        )
        language = None
        if portals is not None and lang:
            language = Language.of(len(portals), lang)
    except SigmaRhoError as exc:
        raise FormatError(str(exc)) from exc
    except ValueError as exc:
        raise FormatError(str(exc)) from exc
    return SrgDocument(
        instance=inst,
        decomposition=PathDecomposition(bags=tuple(tuple(sorted(b)) for b in bags)) if saw_bag else None,
        portals=portals,
        language=language,
        blocks=tuple(blocks),
        notes=tuple(notes),
    )
