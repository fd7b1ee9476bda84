"""Explicit circuit matrices and the matrix <-> linear circuit correspondence.

A circuit matrix of a linear circuit on ``N_n(R)`` has one row per node:
row ``k`` expresses ``X_k`` as a linear form in the inputs ``c``.  It starts
with ``I_r`` and the circuit solves the network exactly when it also ends
with ``I_r``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from clocknet.linalg import IntMatrix, ModMatrix, DimensionError, reduce_mod, solve_int, solve_mod
from clocknet.network import LinearCircuit, Network, normalise_offsets


@dataclass(frozen=True)
class CircuitMatrix:
    """An ``(n + r) x r`` matrix whose first ``r`` rows are ``I_r``.

    ``modulus`` is ``None`` for integer matrices meant to be read over every
    ``Z_s``.
    """

    matrix: IntMatrix
    r: int
    R: tuple[int, ...] | None = None
    modulus: int | None = None

    def __post_init__(self) -> None:
        m = self.matrix
        if m.cols != self.r or m.rows < self.r:
            raise DimensionError(f"circuit matrix must be (n+{self.r}) x {self.r}, got {m.shape}")
        if m.submatrix(0, self.r, 0, self.r) != IntMatrix.identity(self.r):
            raise ValueError("first r rows of a circuit matrix must be I_r")
        if self.R is not None:
            object.__setattr__(self, "R", normalise_offsets(self.R))

    @property
    def n(self) -> int:
        return self.matrix.rows - self.r

    def row(self, k: int) -> tuple[int, ...]:
        """Row ``k``, 1-based like the node it describes."""
        return self.matrix.row(k - 1)

    def reduced(self, s: int) -> ModMatrix:
        return reduce_mod(self.matrix, s)

    def ends_in_identity(self, s: int | None = None) -> bool:
        tail = self.matrix.submatrix(self.n, self.n + self.r, 0, self.r)
        if s is None:
            return tail == IntMatrix.identity(self.r)
        return reduce_mod(tail, s).is_identity()

    def to_text(self) -> str:
        return str(self.matrix) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "r": self.r,
                "R": list(self.R) if self.R else None,
                "s": self.modulus,
                "rows": [list(row) for row in self.matrix.to_rows()],
            }
        )


def gim(a: int, b: int) -> IntMatrix:
    """The ``a x b`` 0/1 matrix built by subtractive recursion.

    Equal sides give ``I_a``; a wide matrix is the narrower one with ``I_a``
    appended on the right, a tall one has ``I_b`` appended underneath.
    """
    if a < 1 or b < 1:
        raise ValueError(f"gim needs positive dimensions, got ({a}, {b})")
    if a == b:
        return IntMatrix.identity(a)
    if a < b:
        return gim(a, b - a).hstack(IntMatrix.identity(a))
    return gim(a - b, b).vstack(IntMatrix.identity(b))


def full_clock_matrix(n: int, r: int) -> CircuitMatrix:
    """``I_r`` stacked on top of ``gim(n, r)``; solves the full clock network."""
    if r < 1 or n < r:
        raise ValueError(f"full clock matrix needs n >= r >= 1, got n={n}, r={r}")
    R = tuple(range(1, r + 1))
    return CircuitMatrix(IntMatrix.identity(r).vstack(gim(n, r)), r, R)


def _as_matrix(m: CircuitMatrix | IntMatrix | ModMatrix) -> IntMatrix:
    if isinstance(m, CircuitMatrix):
        return m.matrix
    if isinstance(m, ModMatrix):
        return m.lift()
    return m


def recover_coefficients(
    m: CircuitMatrix | IntMatrix | ModMatrix, R: Iterable[int], s: int | None
) -> tuple[LinearCircuit | None, int | None]:
    """Coefficients ``lam[k, j]`` reproducing every row from its predecessors.

    Returns ``(circuit, None)`` on success and ``(None, k)`` naming the first
    1-based row ``k`` that cannot be expressed (``k <= r`` means the identity
    prefix is wrong).  ``s=None`` works over the integers.
    """
    R = normalise_offsets(R)
    r = R[-1]
    mat = _as_matrix(m)
    if mat.cols != r or mat.rows < r:
        raise DimensionError(f"expected an (n+{r}) x {r} matrix, got {mat.shape}")
    n = mat.rows - r
    for i in range(r):
        diff = [x - int(i == j) for j, x in enumerate(mat.row(i))]
        if any(d % s if s else d for d in diff):
            return None, i + 1
    coeffs = []
    for k in range(r + 1, n + r + 1):
        usable = [j for j in R if k - j >= 1]
        a = IntMatrix.from_rows(
            [[mat[k - j - 1, col] for j in usable] for col in range(r)], cols=len(usable)
        )
        target = mat.row(k - 1)
        x = solve_int(a, target) if s is None else solve_mod(a, target, s)
        if x is None:
            return None, k
        by_offset = dict(zip(usable, x))
        coeffs.append([by_offset.get(j, 0) for j in R])
    return LinearCircuit(n, R, coeffs, s), None


def validate_circuit_matrix(
    m: CircuitMatrix | IntMatrix | ModMatrix, R: Iterable[int], s: int
) -> LinearCircuit | None:
    """The linear circuit over ``Z_s`` whose circuit matrix is ``m``, if any."""
    return recover_coefficients(m, R, s)[0]


def universal_validate(m: CircuitMatrix | IntMatrix, R: Iterable[int]) -> LinearCircuit | None:
    """Integer coefficients for ``m``; a result is valid over every ``Z_s``."""
    return recover_coefficients(m, R, None)[0]


def circuit_to_matrix(c: LinearCircuit, net: Network | None = None) -> CircuitMatrix:
    """Row ``k`` is the linear form computed at node ``k``."""
    if net is not None and (net.R != c.R or net.n != c.n):
        raise ValueError("circuit does not match the network")
    r = c.r
    s = c.modulus
    rows = [tuple(int(i == j) for j in range(r)) for i in range(r)]
    for k in range(r + 1, c.n + r + 1):
        acc = [0] * r
        for j, lam in zip(c.R, c.coeffs[k - r - 1]):
            if lam and k - j >= 1:
                acc = [x + lam * y for x, y in zip(acc, rows[k - j - 1])]
        rows.append(tuple(x % s for x in acc) if s else tuple(acc))
    return CircuitMatrix(IntMatrix.from_rows(rows, cols=r), r, c.R, s)


_NAMED_ROWS = {
    "A7": [
        [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1],
        [1, 1, 0], [0, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1],
    ],
    "B8": [
        [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [1, 1, 2],
        [2, 1, 0], [0, 2, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1],
    ],
    "M10": [
        [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 0, 1], [-1, 0, 1],
        [1, 1, 1], [1, 1, 0], [0, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1],
    ],
    "M14": [
        [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0], [1, 1, 0], [1, 1, 1],
        [0, 1, 1], [1, 0, -1], [0, 1, 2], [0, 0, 1], [1, 0, -1], [1, 1, 1],
        [1, 1, 0], [0, 1, 1], [1, 0, 0], [0, 1, 0], [0, 0, 1],
    ],
}

# the modulus each matrix was exhibited over; None = every modulus
_NAMED_MODULI = {"A7": 2, "B8": 3, "M10": None, "M14": None}

NAMED_MATRICES = tuple(_NAMED_ROWS)


def paper_matrix(name: str) -> CircuitMatrix:
    """The hand-built ``{1,3}``-circuit matrices ``A7``, ``B8``, ``M10``, ``M14``."""
    try:
        rows = _NAMED_ROWS[name]
    except KeyError:
        raise ValueError(f"unknown matrix {name!r}; choose from {', '.join(NAMED_MATRICES)}") from None
    return CircuitMatrix(IntMatrix.from_rows(rows), 3, (1, 3), _NAMED_MODULI[name])


def family_13(n: int) -> CircuitMatrix:
    """A ``{1,3}``-circuit matrix of length ``n >= 12`` valid over every ``Z_s``.

    Start from a stack of ``I_3`` blocks, ``M10`` or ``M14`` according to
    ``n mod 3`` and append ``I_3`` blocks until there are ``n + 3`` rows.
    Each appended row repeats the row three above it.
    """
    if n < 12:
        raise ValueError(f"family_13 needs n >= 12, got {n}")
    ident = IntMatrix.identity(3)
    if n % 3 == 0:
        base = ident.vstack(ident)
    elif n % 3 == 1:
        base = paper_matrix("M10").matrix
    else:
        base = paper_matrix("M14").matrix
    while base.rows < n + 3:
        base = base.vstack(ident)
    return CircuitMatrix(base, 3, (1, 3), None)


def riis_counterexample_circuit(n: int, r: int, s: int) -> LinearCircuit:
    """Each node negates the sum of its ``r`` predecessors.

    Every ``r + 1`` consecutive values then sum to zero, so the valuation is
    periodic with period ``r + 1`` and solves ``N_n(r)`` only when that period
    lines up with ``n``.
    """
    if r < 1 or n < r:
        raise ValueError(f"need n >= r >= 1, got n={n}, r={r}")
    if s < 2:
        raise ValueError("modulus must be >= 2")
    R = tuple(range(1, r + 1))
    return LinearCircuit(n, R, [[s - 1] * r for _ in range(n)], s)
