"""
CNF formula + manager -> graph with relations whose solutions correspond
one-to-one to the satisfying assignments, together with a path
decomposition of width g * t plus a constant.

Layout: rows r = 0..t-1 (one per variable group), manager columns
J^0..J^m, clause columns j = 1..m with vertices c^j_0..c^j_t.
"""

from itertools import combinations, product
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from ..config import get_settings
from ..core.decomposition import PathDecomposition, repair, validate_path_decomposition
from ..core.instance import Constraint, GraphRelInstance, InstanceBuilder
from ..core.pair import Pair, invert_state
from ..core.states import State, rho, sigma, state_of
from ..exceptions import ConstructionError, DecompositionError, PreconditionError, ValidationError
from ..managers.manager import Manager
from ..providers.simple import sigma_rho_provider
from .cnf import Assignment, SatInstance
from .encoding import EncodingMap, choose_parameters


class Port(BaseModel):
    """A distinguished vertex w of one manager column and its two blocks"""

    model_config = ConfigDict(frozen=True)

    w: int
    near: Tuple[int, ...] = Field(description="neighbours of w in B")
    far: Tuple[int, ...] = Field(description="neighbours of w in Bbar")
    block: Tuple[int, ...]
    block_bar: Tuple[int, ...]


class CompiledSat(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    formula: SatInstance
    encoding: EncodingMap
    manager_name: str
    rows: int
    instance: GraphRelInstance
    decomposition: PathDecomposition
    ports: Tuple[Tuple[Tuple[Port, ...], ...], ...] = Field(description="[column][row][l]")
    clause_vertices: Tuple[Tuple[int, ...], ...] = Field(description="[clause][0..t]")
    width_constant: int = Field(description="decomposition width minus g * t")

    def port(self, column: int, row: int, l: int) -> Port:
        return self.ports[column][row][l]


class SatAudit(BaseModel):
    model_config = ConfigDict(frozen=True)

    ok: bool
    assignment: Optional[Assignment] = None
    problems: Tuple[str, ...] = ()


def _check_pair(pair: Pair) -> None:
    for name, s in (("sigma", pair.sigma), ("rho", pair.rho)):
        if s.is_empty:
            raise PreconditionError("SatCompiler", f"{name} must be non-empty")
        if s.is_cofinite and not s.is_simple_cofinite:
            raise PreconditionError("SatCompiler", f"{name} = {s} is cofinite but not simple cofinite")


def _choices(w: int, state: State, neighbours: Sequence[int]) -> List[FrozenSet[int]]:
    """Selections of w and its block neighbours giving w the state"""
    head = frozenset({w}) if state.selected else frozenset()
    return [head | frozenset(c) for c in combinations(neighbours, state.count)]


def _unions(factors: Sequence[Sequence[FrozenSet[int]]]) -> Iterator[FrozenSet[int]]:
    for combo in product(*factors):
        yield frozenset().union(*combo)


class _Layout:
    """Vertex bookkeeping while G_phi is emitted."""

    def __init__(self, phi: SatInstance, enc: EncodingMap, pair: Pair):
        self.phi = phi
        self.enc = enc
        self.pair = pair
        self.q = enc.q
        self.g = enc.g
        self.t = max(1, -(-phi.n // enc.q))
        self.builder = InstanceBuilder.for_pair(pair)
        self.ports: List[List[List[Port]]] = []
        self.clause_vertices: List[List[int]] = []
        self.providers: Dict[int, List[int]] = {}
        self.scopes: Dict[Tuple[int, int], List[int]] = {}

    # groups

    def allowed(self, row: int) -> List[int]:
        """Assignment indices of the row's group; padding variables stay false"""
        real = max(0, min(self.q, self.phi.n - row * self.q))
        return [k for k in range(1 << self.q) if k >> real == 0]

    def satisfies(self, clause: Sequence[int], row: int, k: int) -> bool:
        lo = row * self.q
        for literal in clause:
            v = abs(literal) - 1
            if lo <= v < lo + self.q and bool(k >> (v - lo) & 1) == (literal > 0):
                return True
        return False

    # emission

    def add_column(self, mi) -> None:
        mapping = self.builder.paste(mi.instance)
        adj = mi.instance.adjacency()
        column: List[List[Port]] = []
        for row in range(self.t):
            ports = []
            for l in range(self.g):
                k = row * self.g + l
                u = mi.distinguished[k]
                in_b, in_bar = set(mi.blocks[k]), set(mi.blocks_bar[k])
                ports.append(Port(
                    w=mapping[u],
                    near=tuple(mapping[v] for v in adj[u] if v in in_b),
                    far=tuple(mapping[v] for v in adj[u] if v in in_bar),
                    block=tuple(mapping[v] for v in mi.blocks[k]),
                    block_bar=tuple(mapping[v] for v in mi.blocks_bar[k]),
                ))
            column.append(ports)
        self.ports.append(column)

    def add_clause_column(self) -> None:
        pair = self.pair
        provider = sigma_rho_provider(pair, pair.s_min, pair.r_min)
        portal = provider.portals[0]
        cs = []
        for _ in range(self.t + 1):
            c = self.builder.add_vertex()
            mapping = self.builder.paste(provider.instance, {portal: c})
            inner = [mapping[v] for v in range(provider.n) if v != portal]
            witnesses = [
                frozenset(mapping[v] for v in provider.witness((state,)))
                for state in (sigma(pair.s_min), rho(pair.r_min))
            ]
            self.builder.add_constraint(Constraint.from_sets([c] + inner, witnesses))
            self.providers[c] = inner
            cs.append(c)
        self.builder.add_constraint(Constraint.hw_eq([cs[0]], 0))
        self.builder.add_constraint(Constraint.hw_eq([cs[-1]], 1))
        self.clause_vertices.append(cs)

    def _emit(self, key: Tuple[int, int], scope: List[int], selections: Iterator[FrozenSet[int]]) -> None:
        cap = get_settings().sat_relation_arity_cap
        if len(scope) > cap:
            raise ConstructionError(f"relation R{key} has arity {len(scope)} > sat_relation_arity_cap {cap}")
        self.builder.add_constraint(Constraint.from_sets(scope, selections))
        self.scopes[key] = scope

    def add_row_relations(self) -> None:
        enc, pair = self.enc, self.pair
        m = self.phi.m
        for row in range(self.t):
            allowed = self.allowed(row)

            first = self.ports[0][row]
            scope = [v for p in first for v in (p.w, *p.near)]
            self._emit((0, row), scope, (
                sel for k in allowed
                for sel in _unions([_choices(p.w, enc.table[k][l], p.near) for l, p in enumerate(first)])
            ))

            for j in range(1, m + 1):
                prev, cur = self.ports[j - 1][row], self.ports[j][row]
                c_prev, c_cur = self.clause_vertices[j - 1][row], self.clause_vertices[j - 1][row + 1]
                scope = [c_prev, c_cur]
                for p, n in zip(prev, cur):
                    scope.extend((p.w, *p.far, n.w, *n.near))
                clause = self.phi.clauses[j - 1]
                selections: List[FrozenSet[int]] = []
                for k in allowed:
                    x = enc.table[k]
                    factors = []
                    for l, (p, n) in enumerate(zip(prev, cur)):
                        factors.append(_choices(p.w, invert_state(x[l], pair), p.far))
                        factors.append(_choices(n.w, x[l], n.near))
                    if self.satisfies(clause, row, k):
                        factors.append([frozenset({c_cur}), frozenset({c_prev, c_cur})])
                    else:
                        factors.append([frozenset(), frozenset({c_prev, c_cur})])
                    selections.extend(_unions(factors))
                self._emit((j, row), scope, iter(selections))

            last = self.ports[m][row]
            scope = [v for p in last for v in (p.w, *p.far)]
            self._emit((m + 1, row), scope, (
                sel for k in allowed
                for sel in _unions([_choices(p.w, invert_state(enc.table[k][l], pair), p.far)
                                    for l, p in enumerate(last)])
            ))

    # decomposition

    def _y(self, j: int, row: int) -> Set[int]:
        m = self.phi.m
        if not (0 <= row < self.t and 0 <= j <= m + 1):
            return set()
        y = set(self.scopes[(j, row)])
        if j <= m:
            y.update(v for p in self.ports[j][row] for v in p.block)
        if j >= 1:
            y.update(v for p in self.ports[j - 1][row] for v in p.block_bar)
        if 1 <= j <= m:
            for c in (self.clause_vertices[j - 1][row], self.clause_vertices[j - 1][row + 1]):
                y.add(c)
                y.update(self.providers[c])
        return y

    def decomposition(self, inst: GraphRelInstance) -> PathDecomposition:
        """Stages j = 0..m+1, rounds over the rows, then contiguity repair"""
        m = self.phi.m
        bags: List[Set[int]] = []
        for j in range(m + 2):
            for row in range(self.t):
                bag = self._y(j, row) | self._y(j, row + 1) | self._y(j - 1, row)
                if j <= m:
                    bag.update(p.w for z in range(row) for p in self.ports[j][z])
                if j >= 1:
                    bag.update(p.w for z in range(row + 1, self.t) for p in self.ports[j - 1][z])
                bags.append(bag)
        pd = repair(inst, bags)
        report = validate_path_decomposition(inst, pd)
        if not report.valid:
            raise DecompositionError(f"compiled decomposition invalid: {report.violation} {report.detail}")
        return pd


def compile_sat(
    phi: SatInstance,
    manager: Manager,
    encoding: Optional[EncodingMap] = None,
    g: Optional[int] = None,
) -> CompiledSat:
    """
    Build G_phi from a manager of alphabet A.

    Args:
        phi: CNF formula
        manager: manager family; its rank-(t*g) instance is used m+1 times
        encoding: codeword map over A; chosen from A and g when omitted
        g: group width used when no encoding is given

    Raises:
        PreconditionError: sigma or rho cofinite but not simple cofinite
        ValidationError: the encoding is over another alphabet
    """
    pair = manager.pair
    _check_pair(pair)
    enc = encoding or choose_parameters(manager.alphabet, g, pair)
    if set(enc.alphabet) != set(manager.alphabet):
        raise ValidationError("encoding alphabet differs from the manager alphabet")

    layout = _Layout(phi, enc, pair)
    mi = manager.at_rank(layout.t * enc.g)
    for _ in range(phi.m + 1):
        layout.add_column(mi)
    for _ in range(phi.m):
        layout.add_clause_column()
    layout.add_row_relations()
    inst = layout.builder.freeze()
    pd = layout.decomposition(inst)

    constant = pd.width - enc.g * layout.t
    logger.info(
        f"compiled {phi.n} variables / {phi.m} clauses with {manager.name}: {inst.n} vertices, "
        f"{len(inst.constraints)} relations, width {pd.width} = g*t + {constant}"
    )
    return CompiledSat(
        formula=phi,
        encoding=enc,
        manager_name=manager.name,
        rows=layout.t,
        instance=inst,
        decomposition=pd,
        ports=tuple(tuple(tuple(row) for row in column) for column in layout.ports),
        clause_vertices=tuple(tuple(cs) for cs in layout.clause_vertices),
        width_constant=constant,
    )


def _normalised(count: int, selected: bool, pair: Pair) -> int:
    if selected and pair.sigma.is_simple_cofinite:
        return pair.s_top - count
    if not selected and pair.rho.is_simple_cofinite:
        return pair.r_top - count
    return count


def audit_solution(compiled: CompiledSat, selection) -> SatAudit:
    """
    Check a solution of G_phi: every w has exactly s_top / r_top selected
    neighbours, the normalised block counts are constant along each row,
    and the decoded assignment satisfies phi.
    """
    chosen = set(selection)
    inst = compiled.instance
    pair = inst.pair
    adj = inst.adjacency()
    enc = compiled.encoding
    problems: List[str] = []
    indices: List[int] = []

    for row in range(compiled.rows):
        for l in range(enc.g):
            chain = []
            for j, column in enumerate(compiled.ports):
                p = column[row][l]
                selected = p.w in chosen
                total = sum(1 for v in adj[p.w] if v in chosen)
                top = pair.s_top if selected else pair.r_top
                if total != top:
                    problems.append(f"w[{j}][{row}][{l}] has {total} selected neighbours, expected {top}")
                near = sum(1 for v in p.near if v in chosen)
                chain.append(_normalised(near, selected, pair))
            if len(set(chain)) > 1:
                problems.append(f"row {row}, position {l}: normalised counts {chain} not constant")

        x = tuple(
            state_of(p.w in chosen, sum(1 for v in p.near if v in chosen))
            for p in compiled.ports[0][row]
        )
        k = enc.decode(x)
        if k is None:
            problems.append(f"row {row} does not carry a codeword")
            k = 0
        indices.append(k)

    assignment = tuple(bool(k >> b & 1) for k in indices for b in range(enc.q))[: compiled.formula.n]
    if not compiled.formula.satisfies(assignment):
        problems.append("decoded assignment does not satisfy the formula")
    return SatAudit(ok=not problems, assignment=assignment, problems=tuple(problems))
