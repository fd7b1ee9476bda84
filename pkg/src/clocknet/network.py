"""Networks, circuits, valuations and the associated clock digraphs.

Network nodes are 1-based: inputs ``1..r``, intermediates ``r+1..n`` and
outputs ``n+1..n+r``.  Digraph vertices are 0-based residues mod ``n``;
network node ``v_{i+1}`` (and its output twin ``v_{n+i+1}``) becomes vertex
``i``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

DEFAULT_EVAL_BUDGET = 10**6


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""


def normalise_offsets(R: Iterable[int]) -> tuple[int, ...]:
    offsets = tuple(sorted(set(int(j) for j in R)))
    if not offsets:
        raise ValueError("R must be nonempty")
    if offsets[0] < 1:
        raise ValueError(f"R must contain positive integers only, got {offsets}")
    return offsets


@dataclass(frozen=True)
class ClockSpec:
    """Parameters ``(n, R)`` of the clock network ``N_n(R)``.

    ``n = r`` (no intermediate nodes) is accepted; :attr:`boundary` flags it.
    """

    n: int
    R: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", normalise_offsets(self.R))
        if self.n < self.r:
            raise ValueError(f"clock network needs n >= r, got n={self.n}, r={self.r}")

    @property
    def r(self) -> int:
        return self.R[-1]

    @property
    def boundary(self) -> bool:
        return self.n == self.r

    def __str__(self) -> str:
        return f"N_{self.n}({{{','.join(map(str, self.R))}}})"


@dataclass(frozen=True)
class Network:
    """An acyclic network of length ``n`` and width ``r``.

    ``gamma[k - r - 1]`` lists the in-neighbours of node ``k`` in ascending
    order.  ``R`` is set for clock networks.
    """

    n: int
    r: int
    gamma: tuple[tuple[int, ...], ...]
    R: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.gamma) != self.n:
            raise ValueError(f"need in-neighbourhoods for {self.n} non-input nodes")
        for k, nbrs in zip(self.non_input_nodes(), self.gamma):
            if any(not 1 <= i < k for i in nbrs) or list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"bad in-neighbourhood for node {k}: {nbrs}")

    @property
    def size(self) -> int:
        return self.n + self.r

    def non_input_nodes(self) -> range:
        return range(self.r + 1, self.n + self.r + 1)

    def in_neighbours(self, k: int) -> tuple[int, ...]:
        if k <= self.r:
            return ()
        return self.gamma[k - self.r - 1]

    def role(self, k: int) -> str:
        if not 1 <= k <= self.size:
            raise IndexError(k)
        if k <= self.r:
            return "input"
        if k <= self.n:
            return "intermediate"
        return "output"

    def edges(self) -> list[tuple[int, int]]:
        return [(i, k) for k in self.non_input_nodes() for i in self.in_neighbours(k)]


def build_clock_network(spec: ClockSpec) -> Network:
    r = spec.r
    gamma = tuple(
        tuple(sorted(k - j for j in spec.R if k - j >= 1))
        for k in range(r + 1, spec.n + r + 1)
    )
    return Network(spec.n, r, gamma, spec.R)


@dataclass(frozen=True)
class LinearCircuit:
    """Linear node functions ``X_k = sum_{j in R} lam[k, j] * X_{k-j}``.

    ``coeffs[k - r - 1][t]`` is the coefficient of offset ``R[t]`` at node
    ``k``.  With ``modulus=None`` the coefficients are integers and the
    circuit can be reduced to any modulus.
    """

    n: int
    R: tuple[int, ...]
    coeffs: tuple[tuple[int, ...], ...]
    modulus: int | None

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", normalise_offsets(self.R))
        object.__setattr__(self, "coeffs", tuple(tuple(int(x) for x in row) for row in self.coeffs))
        if len(self.coeffs) != self.n or any(len(row) != len(self.R) for row in self.coeffs):
            raise ValueError("coefficient table does not match (n, R)")
        if self.modulus is not None:
            if self.modulus < 2:
                raise ValueError("modulus must be >= 2")
            if any(not 0 <= x < self.modulus for row in self.coeffs for x in row):
                raise ValueError("coefficients must lie in [0, modulus)")
        r = self.r
        for k, row in zip(range(r + 1, self.n + r + 1), self.coeffs):
            if any(x and k - j < 1 for j, x in zip(self.R, row)):
                raise ValueError(f"node {k} has a coefficient on a nonexistent node")

    @property
    def r(self) -> int:
        return self.R[-1]

    def coefficient(self, k: int, j: int) -> int:
        return self.coeffs[k - self.r - 1][self.R.index(j)]

    def reduce(self, s: int) -> LinearCircuit:
        if self.modulus is not None and self.modulus != s:
            raise ValueError(f"circuit is over Z_{self.modulus}, not Z_{s}")
        return LinearCircuit(self.n, self.R, [[x % s for x in row] for row in self.coeffs], s)


@dataclass(frozen=True)
class TableCircuit:
    """Arbitrary node functions given as lookup tables.

    ``tables[k - r - 1][idx]`` is ``f_k`` at the point whose in-neighbour
    values, read in ascending node order as base-``s`` digits (first
    neighbour most significant), spell ``idx``.
    """

    modulus: int
    tables: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tables", tuple(tuple(int(x) for x in t) for t in self.tables))
        if any(not 0 <= x < self.modulus for t in self.tables for x in t):
            raise ValueError("table values must lie in [0, modulus)")


Circuit = LinearCircuit | TableCircuit


@dataclass(frozen=True)
class Valuation:
    X: tuple[int, ...]
    r: int

    def __getitem__(self, k: int) -> int:
        """``X_k`` with the 1-based node index."""
        return self.X[k - 1]

    @property
    def inputs(self) -> tuple[int, ...]:
        return self.X[: self.r]

    @property
    def outputs(self) -> tuple[int, ...]:
        return self.X[-self.r:]


def _check_shape(net: Network, circuit: Circuit, s: int | None) -> int:
    if isinstance(circuit, LinearCircuit):
        if net.R is None or net.R != circuit.R or net.n != circuit.n:
            raise ValueError("linear circuit does not match the network")
        modulus = circuit.modulus or s
        if modulus is None:
            raise ValueError("integer circuit needs an explicit modulus")
        if s is not None and s != modulus:
            raise ValueError(f"circuit is over Z_{circuit.modulus}, not Z_{s}")
        return modulus
    if s is not None and s != circuit.modulus:
        raise ValueError(f"circuit is over Z_{circuit.modulus}, not Z_{s}")
    if len(circuit.tables) != net.n:
        raise ValueError("table circuit does not match the network")
    for k, table in zip(net.non_input_nodes(), circuit.tables):
        if len(table) != circuit.modulus ** len(net.in_neighbours(k)):
            raise ValueError(f"table for node {k} has the wrong size")
    return circuit.modulus


def _sweep(net: Network, circuit: Circuit, inputs: np.ndarray, s: int) -> np.ndarray:
    """Valuations for a batch of inputs: rows are nodes, columns are inputs."""
    X = np.zeros((net.size, inputs.shape[1]), dtype=np.int64)
    X[: net.r] = inputs % s
    for pos, k in enumerate(net.non_input_nodes()):
        if isinstance(circuit, LinearCircuit):
            acc = np.zeros(inputs.shape[1], dtype=np.int64)
            for j, lam in zip(circuit.R, circuit.coeffs[pos]):
                if lam % s and k - j >= 1:
                    acc += (lam % s) * X[k - j - 1]
            X[k - 1] = acc % s
        else:
            idx = np.zeros(inputs.shape[1], dtype=np.int64)
            for i in net.in_neighbours(k):
                idx = idx * s + X[i - 1]
            X[k - 1] = np.asarray(circuit.tables[pos], dtype=np.int64)[idx]
    return X


def evaluate(net: Network, circuit: Circuit, c: Sequence[int], s: int | None = None) -> Valuation:
    """The unique valuation of ``circuit`` for input ``c``."""
    s = _check_shape(net, circuit, s)
    if len(c) != net.r:
        raise ValueError(f"input must have length {net.r}")
    X = _sweep(net, circuit, np.asarray(c, dtype=np.int64).reshape(-1, 1), s)
    return Valuation(tuple(int(x) for x in X[:, 0]), net.r)


def all_inputs(r: int, s: int) -> np.ndarray:
    """Every input in ``Z_s^r`` as columns, in lexicographic order."""
    grid = np.indices((s,) * r, dtype=np.int64).reshape(r, -1)
    return grid


def check_solves(
    net: Network, circuit: Circuit, s: int | None = None, budget: int = DEFAULT_EVAL_BUDGET
) -> bool:
    """True iff every one of the ``s^r`` inputs is reproduced at the outputs."""
    s = _check_shape(net, circuit, s)
    if s ** net.r > budget:
        raise BudgetExceeded(f"{s}^{net.r} inputs exceed the evaluation budget {budget}")
    inputs = all_inputs(net.r, s)
    # chunk to bound memory on long networks
    chunk = max(1, 2**22 // max(net.size, 1))
    for start in range(0, inputs.shape[1], chunk):
        block = inputs[:, start:start + chunk]
        X = _sweep(net, circuit, block, s)
        if not np.array_equal(X[net.n:], block):
            return False
    return True


def relay_circuit(spec: ClockSpec, s: int | None = None) -> LinearCircuit:
    """Every node copies its predecessor at offset ``r``."""
    coeffs = [[int(j == spec.r) for j in spec.R] for _ in range(spec.n)]
    return LinearCircuit(spec.n, spec.R, coeffs, s)


class GcdKind(enum.Enum):
    UNSOLVABLE = "unsolvable"
    REDUCED = "reduced"
    UNCHANGED = "unchanged"


@dataclass(frozen=True)
class GcdVerdict:
    kind: GcdKind
    d: int
    n: int
    R: tuple[int, ...]

    def __str__(self) -> str:
        if self.kind is GcdKind.UNSOLVABLE:
            return f"UNSOLVABLE: n={self.n} is not a multiple of gcd(R)={self.d}"
        if self.kind is GcdKind.REDUCED:
            return f"REDUCED: {self.d} copies of N_{self.n}({set(self.R)})"
        return "UNCHANGED: gcd(R)=1"


def gcd_reduce(n: int, R: Iterable[int]) -> GcdVerdict:
    """Split off the common divisor of ``R``.

    When ``d = gcd(R) > 1`` the network falls apart into residue classes
    mod ``d``; input ``a`` and output ``n+a`` share a class only if ``d | n``.
    ``n`` is not required to be at least ``max(R)`` here.
    """
    R = normalise_offsets(R)
    d = reduce(math.gcd, R)
    if d == 1:
        return GcdVerdict(GcdKind.UNCHANGED, 1, n, R)
    if n % d:
        return GcdVerdict(GcdKind.UNSOLVABLE, d, n, R)
    return GcdVerdict(GcdKind.REDUCED, d, n // d, tuple(j // d for j in R))


@dataclass(frozen=True)
class Digraph:
    """Directed graph on vertices ``0..n-1``.

    ``collapsed`` counts parallel edges merged while building it.
    """

    n: int
    edges: frozenset[tuple[int, int]]
    collapsed: int = 0

    def self_loops(self) -> list[tuple[int, int]]:
        return sorted(e for e in self.edges if e[0] == e[1])

    def two_cycles(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, v in self.edges if u < v and (v, u) in self.edges)

    @property
    def flagged(self) -> bool:
        return bool(self.self_loops() or self.two_cycles() or self.collapsed)

    def out_degree(self, v: int) -> int:
        return sum(1 for e in self.edges if e[0] == v)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def build_clock_digraph(n: int, R: Iterable[int]) -> Digraph:
    """Circulant digraph: ``i -> j`` iff ``(j - i) mod n`` is in ``R``."""
    R = normalise_offsets(R)
    if n < 1:
        raise ValueError("need at least one vertex")
    edges = {(i, (i + j) % n) for i in range(n) for j in R}
    return Digraph(n, frozenset(edges), n * len(R) - len(edges))


def identify_network_digraph(net: Network) -> Digraph:
    """Merge each output node ``v_{n+i}`` into its input twin ``v_i``."""

    def vertex(k: int) -> int:
        return k - 1 if k <= net.n else k - net.n - 1

    raw = [(vertex(i), vertex(k)) for i, k in net.edges()]
    edges = frozenset(raw)
    return Digraph(net.n, edges, len(raw) - len(edges))


def verify_digraph_isomorphism(d1: Digraph, d2: Digraph, mapping: Sequence[int]) -> bool:
    """Check that ``mapping`` carries the edges of ``d1`` exactly onto ``d2``."""
    if d1.n != d2.n:
        return False
    if sorted(mapping) != list(range(d1.n)):
        raise ValueError("mapping is not a permutation of the vertices")
    image = {(mapping[u], mapping[v]) for u, v in d1.edges}
    return image == set(d2.edges)


def multiplier_map(n: int, m: int) -> tuple[int, ...]:
    """The vertex permutation ``i -> m*i mod n``."""
    if math.gcd(m, n) != 1:
        raise ValueError(f"{m} is not invertible mod {n}")
    return tuple((m * i) % n for i in range(n))


def cycles(perm: Sequence[int]) -> list[tuple[int, ...]]:
    """Cycle decomposition, fixed points included, each cycle led by its minimum."""
    seen: set[int] = set()
    out = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        out.append(tuple(cyc))
    return out


def permutation_order(perm: Sequence[int]) -> int:
    return reduce(math.lcm, (len(c) for c in cycles(perm)), 1)


@dataclass(frozen=True)
class BoundsReport:
    """Guessing-number and information-defect bounds for ``G_N``."""

    n: int
    r: int
    s: int | None = None
    solvable: bool | None = None
    linearly: bool | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def gn_upper(self) -> int:
        return self.r

    @property
    def defect_lower(self) -> int:
        return self.n - self.r

    @property
    def gn_exact(self) -> bool:
        return self.solvable is True

    @property
    def gn_strict(self) -> bool:
        return self.solvable is False

    @property
    def defect_exact(self) -> bool:
        return self.linearly is True

    def lines(self) -> list[str]:
        s = "s" if self.s is None else str(self.s)
        if self.gn_exact:
            gn = f"gn(G_N,{s}) = {self.r}"
        elif self.gn_strict:
            gn = f"gn(G_N,{s}) < {self.r}"
        else:
            gn = f"gn(G_N,{s}) <= {self.r}"
        b = f"b(G_N,{s}) {'=' if self.defect_exact else '>='} {self.defect_lower}"
        return [gn, b, *self.notes]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "r": self.r,
            "s": self.s,
            "gn_upper": self.gn_upper,
            "defect_lower": self.defect_lower,
            "gn_exact": self.gn_exact,
            "gn_strict": self.gn_strict,
            "defect_exact": self.defect_exact,
            "notes": list(self.notes),
        }


def bounds_report(
    spec: ClockSpec,
    solvable: bool | None = None,
    linearly: bool | None = None,
    s: int | None = None,
) -> BoundsReport:
    if linearly:
        if solvable is False:
            raise ValueError("a linearly solvable network is solvable")
        solvable = True
    notes = ("n = r: no intermediate nodes",) if spec.boundary else ()
    return BoundsReport(spec.n, spec.r, s, solvable, linearly, notes)


def network_to_dot(net: Network, name: str = "network") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for k in range(1, net.size + 1):
        lines.append(f"  v{k} [label=\"v{k}\"]; // {net.role(k)}")
    for i, k in net.edges():
        lines.append(f"  v{i} -> v{k};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def digraph_to_dot(dg: Digraph, name: str = "clock") -> str:
    lines = [f"digraph {name} {{"]
    if dg.collapsed:
        lines.append(f"  // {dg.collapsed} parallel edge(s) collapsed")
    for u, v in dg.self_loops():
        lines.append(f"  // self-loop at {u}")
    for u, v in dg.two_cycles():
        lines.append(f"  // 2-cycle {u} <-> {v}")
    for v in range(dg.n):
        lines.append(f"  {v} [label=\"v{v + 1}\"];")
    for u, v in dg.sorted_edges():
        lines.append(f"  {u} -> {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"

