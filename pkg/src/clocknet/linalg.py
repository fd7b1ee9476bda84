"""Exact integer and modular matrix arithmetic.

Every matrix in the package is stored once as an :class:`IntMatrix` with
plain Python integers (so there is no overflow to worry about) and reduced
to a :class:`ModMatrix` on demand.  Linear systems over ``Z_s`` are solved
for composite ``s`` as well as primes, using a Howell-form elimination that
never divides by a zero divisor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class DimensionError(ValueError):
    """Raised when matrix shapes or moduli do not fit together."""


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative dimension")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        rows = [tuple(int(x) for x in row) for row in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        if any(len(row) != cols for row in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), cols, tuple(x for row in rows for x in row))

    @classmethod
    def identity(cls, k: int) -> IntMatrix:
        return cls.from_rows([[int(i == j) for j in range(k)] for i in range(k)], cols=k)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, (0,) * (rows * cols))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> tuple[int, ...]:
        """Row ``i``, 0-based."""
        if not 0 <= i < self.rows:
            raise IndexError(i)
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[tuple[int, ...]]:
        return [self.row(i) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def submatrix(self, row_start: int, row_stop: int, col_start: int, col_stop: int) -> IntMatrix:
        return IntMatrix.from_rows(
            [self.row(i)[col_start:col_stop] for i in range(row_start, row_stop)],
            cols=col_stop - col_start,
        )

    def vstack(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.cols:
            raise DimensionError("vstack needs equal column counts")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def hstack(self, other: IntMatrix) -> IntMatrix:
        if self.rows != other.rows:
            raise DimensionError("hstack needs equal row counts")
        return IntMatrix.from_rows(
            [a + b for a, b in zip(self.to_rows(), other.to_rows())],
            cols=self.cols + other.cols,
        )

    def transpose(self) -> IntMatrix:
        return IntMatrix.from_rows(
            [[self[i, j] for i in range(self.rows)] for j in range(self.cols)],
            cols=self.rows,
        )

    def is_identity(self) -> bool:
        return self == IntMatrix.identity(self.rows) if self.rows == self.cols else False

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        return mat_mul(self, other)

    def __str__(self) -> str:
        return format_matrix(self.to_rows())


@dataclass(frozen=True)
class ModMatrix:
    modulus: int
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.modulus < 2:
            raise DimensionError(f"modulus must be >= 2, got {self.modulus}")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError(
                f"{len(self.entries)} entries for a {self.rows}x{self.cols} matrix"
            )
        if any(not 0 <= e < self.modulus for e in self.entries):
            raise DimensionError("entries must lie in [0, modulus)")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], modulus: int) -> ModMatrix:
        return reduce_mod(IntMatrix.from_rows(rows), modulus)

    @classmethod
    def identity(cls, k: int, modulus: int) -> ModMatrix:
        return reduce_mod(IntMatrix.identity(k), modulus)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def row(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.rows:
            raise IndexError(i)
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def to_rows(self) -> list[tuple[int, ...]]:
        return [self.row(i) for i in range(self.rows)]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i * self.cols + j]

    def lift(self) -> IntMatrix:
        """The canonical integer representative, entries in ``[0, s)``."""
        return IntMatrix(self.rows, self.cols, self.entries)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self.lift() == IntMatrix.identity(self.rows)

    def __matmul__(self, other: ModMatrix) -> ModMatrix:
        return mat_mul(self, other)

    def __str__(self) -> str:
        return format_matrix(self.to_rows())


Matrix = IntMatrix | ModMatrix


def format_matrix(rows: Iterable[Sequence[int]]) -> str:
    """One row per line, space separated."""
    return "\n".join(" ".join(str(x) for x in row) for row in rows)


def parse_matrix(text: str) -> IntMatrix:
    """Inverse of :func:`format_matrix`; blank lines and ``#`` comments are skipped."""
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            rows.append([int(tok) for tok in line.replace(",", " ").split()])
    return IntMatrix.from_rows(rows)


def reduce_mod(m: Matrix, s: int) -> ModMatrix:
    if s < 2:
        raise DimensionError(f"modulus must be >= 2, got {s}")
    return ModMatrix(s, m.rows, m.cols, tuple(e % s for e in m.entries))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    """Matrix product; modular when both operands are :class:`ModMatrix`."""
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    modular = isinstance(a, ModMatrix), isinstance(b, ModMatrix)
    if modular[0] != modular[1]:
        raise DimensionError("cannot mix integer and modular matrices")
    if modular[0] and a.modulus != b.modulus:
        raise DimensionError(f"modulus mismatch: {a.modulus} vs {b.modulus}")
    bt = [b.entries[j::b.cols] for j in range(b.cols)]
    out = []
    for i in range(a.rows):
        arow = a.entries[i * a.cols:(i + 1) * a.cols]
        out.extend(sum(x * y for x, y in zip(arow, col)) for col in bt)
    if modular[0]:
        s = a.modulus
        return ModMatrix(s, a.rows, b.cols, tuple(e % s for e in out))
    return IntMatrix(a.rows, b.cols, tuple(out))


def mat_vec(a: Matrix, v: Sequence[int]) -> tuple[int, ...]:
    if a.cols != len(v):
        raise DimensionError("vector length does not match column count")
    out = tuple(sum(x * y for x, y in zip(a.row(i), v)) for i in range(a.rows))
    if isinstance(a, ModMatrix):
        out = tuple(x % a.modulus for x in out)
    return out


def det_int(m: IntMatrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination.

    Python integers are unbounded, so the intermediate minors never overflow.
    """
    if m.rows != m.cols:
        raise DimensionError("determinant of a non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = [list(row) for row in m.to_rows()]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact division is the Bareiss invariant
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``g = gcd(a, b) >= 0`` and ``a*x + b*y = g``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _unit_normaliser(a: int, modulus: int) -> int:
    """A unit ``u`` mod ``modulus`` with ``u*a = gcd(a, modulus)`` (mod ``modulus``)."""
    from math import gcd

    g = gcd(a, modulus)
    reduced_mod = modulus // g
    if reduced_mod == 1:
        return 1
    u = pow(a // g, -1, reduced_mod)
    while gcd(u, modulus) != 1:
        u += reduced_mod
    return u


def echelon_form(rows: Sequence[Sequence[int]], modulus: int | None = None) -> list[list[int]]:
    """Row echelon form of the module spanned by ``rows``.

    With ``modulus=None`` this is the Hermite normal form over the integers.
    With a modulus it is the Howell form over ``Z_modulus``: besides being in
    echelon form, every element of the row span whose first ``c`` entries
    vanish is a combination of the returned rows whose pivots lie beyond
    column ``c``.  That property is what makes greedy reduction of a vector
    give the lexicographically smallest coset representative.

    Pivots are positive (and divide the modulus); entries above a pivot are
    reduced into ``[0, pivot)``.
    """
    if not rows:
        return []
    ncols = len(rows[0])

    def norm(v: list[int]) -> list[int]:
        return [x % modulus for x in v] if modulus else v

    a = [norm(list(row)) for row in rows]
    r = 0
    for c in range(ncols):
        if r >= len(a):
            break
        for i in range(r + 1, len(a)):
            y = a[i][c]
            if y == 0:
                continue
            x = a[r][c]
            g, p, q = _xgcd(x, y)
            u, v = -(y // g), x // g
            top, other = a[r], a[i]
            a[r] = norm([p * e + q * f for e, f in zip(top, other)])
            a[i] = norm([u * e + v * f for e, f in zip(top, other)])
        pivot = a[r][c]
        if pivot == 0:
            continue
        if modulus:
            unit = _unit_normaliser(pivot, modulus)
            a[r] = norm([unit * e for e in a[r]])
        elif pivot < 0:
            a[r] = [-e for e in a[r]]
        pivot = a[r][c]
        for i in range(r):
            q = a[i][c] // pivot
            if q:
                a[i] = norm([e - q * f for e, f in zip(a[i], a[r])])
        if modulus:
            annihilated = norm([(modulus // pivot) * e for e in a[r]])
            if any(annihilated):
                a.append(annihilated)
        r += 1
    return [row for row in a[:r] if any(row)]


def _pivot_col(row: Sequence[int]) -> int:
    return next(j for j, x in enumerate(row) if x)


def _reduce(vec: list[int], basis: list[list[int]], modulus: int | None) -> list[int]:
    for row in basis:
        c = _pivot_col(row)
        q = vec[c] // row[c]
        if q:
            vec = [e - q * f for e, f in zip(vec, row)]
            if modulus:
                vec = [e % modulus for e in vec]
    return vec


def _solve(columns: Sequence[Sequence[int]], b: Sequence[int], modulus: int | None):
    """Solve ``sum_j x_j * columns[j] = b``; ``None`` when inconsistent."""
    m = len(b)
    k = len(columns)
    if any(len(col) != m for col in columns):
        raise DimensionError("column length does not match right-hand side")
    if k == 0:
        return () if all((x % modulus if modulus else x) == 0 for x in b) else None
    # rows (w_j | -e_j) span {(x.W, -x)}; reducing (b | 0) leaves (0 | x)
    gens = [list(col) + [-int(i == j) for i in range(k)] for j, col in enumerate(columns)]
    basis = echelon_form(gens, modulus)
    target = [int(x) for x in b] + [0] * k
    if modulus:
        target = [x % modulus for x in target]
    reduced = _reduce(target, basis, modulus)
    if any(reduced[:m]):
        return None
    return tuple(reduced[m:])


def solve_mod(a: ModMatrix | IntMatrix, b: Sequence[int], s: int | None = None) -> tuple[int, ...] | None:
    """Find ``x`` with ``a @ x == b (mod s)``, or ``None``.

    Among all solutions the lexicographically smallest one (entries in
    ``[0, s)``) is returned, so results are reproducible.
    """
    if s is None:
        if not isinstance(a, ModMatrix):
            raise DimensionError("modulus required for an integer matrix")
        s = a.modulus
    elif isinstance(a, ModMatrix) and a.modulus != s:
        raise DimensionError(f"modulus mismatch: {a.modulus} vs {s}")
    if s < 2:
        raise DimensionError(f"modulus must be >= 2, got {s}")
    if a.rows != len(b):
        raise DimensionError(f"{a.rows} equations but right-hand side of length {len(b)}")
    columns = [[a[i, j] % s for i in range(a.rows)] for j in range(a.cols)]
    return _solve(columns, b, s)


def solve_int(a: IntMatrix, b: Sequence[int]) -> tuple[int, ...] | None:
    """Find an integer ``x`` with ``a @ x == b`` exactly, or ``None``.

    Existence is decided exactly through the Hermite normal form, so a system
    with a rational but no integral solution correctly yields ``None``.
    """
    if a.rows != len(b):
        raise DimensionError(f"{a.rows} equations but right-hand side of length {len(b)}")
    columns = [[a[i, j] for i in range(a.rows)] for j in range(a.cols)]
    return _solve(columns, b, None)
