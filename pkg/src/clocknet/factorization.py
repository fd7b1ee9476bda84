"""Atomic, step and toggle matrices, and identity factorizations.

A linear circuit on ``N_n(R)`` is the same thing as a sequence of ``n``
R-atomic matrices: atomic ``A_i`` advances the window
``Y_{i-1} = (X_i, ..., X_{i+r-1})`` by one node.  The circuit solves the
network iff ``A_n ... A_1 = I_r``.

Convention: every list of factors in this module is in application order,
first factor first, so ``[F_1, ..., F_m]`` stands for ``F_m ... F_1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from clocknet.linalg import IntMatrix, ModMatrix, mat_mul, reduce_mod
from clocknet.network import ClockSpec, LinearCircuit, cycles, normalise_offsets


class FactorizationError(ValueError):
    pass


@dataclass(frozen=True)
class AtomicMatrix:
    """Companion-style matrix: shifted identity above, ``(a_r, ..., a_1)`` below.

    ``alpha[j - 1]`` holds ``a_j``; it must vanish for ``j`` outside ``R``.
    """

    R: tuple[int, ...]
    alpha: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", normalise_offsets(self.R))
        object.__setattr__(self, "alpha", tuple(int(a) for a in self.alpha))
        if len(self.alpha) != self.r:
            raise FactorizationError(f"need {self.r} coefficients, got {len(self.alpha)}")
        stray = [j for j in range(1, self.r + 1) if self.alpha[j - 1] and j not in self.R]
        if stray:
            raise FactorizationError(f"nonzero coefficient at offsets {stray} outside R")

    @classmethod
    def from_offsets(cls, R: Iterable[int], coeffs: dict[int, int]) -> AtomicMatrix:
        R = normalise_offsets(R)
        return cls(R, tuple(coeffs.get(j, 0) for j in range(1, R[-1] + 1)))

    @property
    def r(self) -> int:
        return self.R[-1]

    def coefficient(self, j: int) -> int:
        return self.alpha[j - 1]

    def matrix(self) -> IntMatrix:
        r = self.r
        rows = [[int(c == i + 1) for c in range(r)] for i in range(r - 1)]
        rows.append([self.alpha[r - 1 - c] for c in range(r)])
        return IntMatrix.from_rows(rows, cols=r)

    def to_line(self) -> str:
        return " ".join(f"alpha_{j}={self.alpha[j - 1]}" for j in self.R)


def _step_support_ok(R: Sequence[int], t: int, i: int) -> bool:
    r = R[-1]
    return i == t or any((i + j - t) % r == 0 for j in R)


@dataclass(frozen=True)
class StepMatrix:
    """``I_r`` with row ``t`` (1-based) replaced by ``beta``.

    ``beta_i`` may be nonzero only when ``i + j = t (mod r)`` for some
    ``j`` in ``R``, or ``i = t``.
    """

    R: tuple[int, ...]
    t: int
    beta: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", normalise_offsets(self.R))
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))
        r = self.r
        if not 1 <= self.t <= r or len(self.beta) != r:
            raise FactorizationError("step matrix row index or length out of range")
        bad = [i for i in range(1, r + 1) if self.beta[i - 1] and not _step_support_ok(self.R, self.t, i)]
        if bad:
            raise FactorizationError(f"entries {bad} of row {self.t} violate the R-step support")

    @property
    def r(self) -> int:
        return self.R[-1]

    def matrix(self) -> IntMatrix:
        r = self.r
        rows = [
            list(self.beta) if i == self.t else [int(c == i) for c in range(1, r + 1)]
            for i in range(1, r + 1)
        ]
        return IntMatrix.from_rows(rows, cols=r)


@dataclass(frozen=True)
class ToggleMatrix:
    """``I_r`` with row ``t`` (1-based) replaced by all ``-1``."""

    r: int
    t: int

    def __post_init__(self) -> None:
        if not 1 <= self.t <= self.r:
            raise FactorizationError(f"toggle row {self.t} out of range 1..{self.r}")

    def matrix(self) -> IntMatrix:
        rows = [
            [-1] * self.r if i == self.t else [int(c == i) for c in range(1, self.r + 1)]
            for i in range(1, self.r + 1)
        ]
        return IntMatrix.from_rows(rows, cols=self.r)


def product(factors: Sequence[IntMatrix | ModMatrix], size: int, s: int | None = None):
    """``F_m ... F_1`` for factors given in application order."""
    acc = IntMatrix.identity(size) if s is None else ModMatrix.identity(size, s)
    for f in factors:
        if s is not None:
            f = reduce_mod(f, s)
        acc = mat_mul(f, acc)
    return acc


def permutation_matrix(perm: Sequence[int]) -> IntMatrix:
    """Matrix sending basis vector ``e_i`` to ``e_{perm[i]}`` (0-based)."""
    r = len(perm)
    return IntMatrix.from_rows([[int(perm[j] == i) for j in range(r)] for i in range(r)], cols=r)


def permutation_of(m: IntMatrix) -> tuple[int, ...]:
    """Inverse of :func:`permutation_matrix`."""
    perm = []
    for j in range(m.cols):
        col = [m[i, j] for i in range(m.rows)]
        if sorted(col) != [0] * (m.rows - 1) + [1]:
            raise FactorizationError("not a permutation matrix")
        perm.append(col.index(1))
    if sorted(perm) != list(range(m.cols)):
        raise FactorizationError("not a permutation matrix")
    return tuple(perm)


def shift_matrix(R: Iterable[int]) -> AtomicMatrix:
    """The atomic matrix ``P`` with ``a_r = 1``: an ``r``-cycle, ``P^r = I``."""
    R = normalise_offsets(R)
    return AtomicMatrix.from_offsets(R, {R[-1]: 1})


def step_to_atomics(step: StepMatrix) -> list[AtomicMatrix]:
    """``r`` atomics: ``P`` everywhere except position ``t``.

    ``P^(r-t) A P^(t-1)`` only alters row ``t``, which becomes the last row
    of ``A`` rotated so that ``beta_i = a_j`` with ``i + j = t (mod r)``.
    """
    R, r, t = step.R, step.r, step.t
    alpha = {j: step.beta[(t - j - 1) % r] for j in R}
    core = AtomicMatrix.from_offsets(R, alpha)
    p = shift_matrix(R)
    return [core if i == t else p for i in range(1, r + 1)]


def _elementary_step(R: Sequence[int], a: int, b: int, value: int) -> StepMatrix:
    r = R[-1]
    beta = [int(c == a) for c in range(1, r + 1)]
    beta[b - 1] = value
    return StepMatrix(R, a, tuple(beta))


def toggle_to_steps(t: int, R: Iterable[int]) -> list[StepMatrix]:
    """Write the toggle ``T(t)`` as ``2r - 3`` R-step matrices.

    Grows the support ``U`` of row ``t`` from ``{x, t}`` one index at a time,
    conjugating by elementary matrices ``E_ab(+-1)`` with ``a - b`` in ``R``
    (mod ``r``).  Choices are the smallest valid ones so output is
    reproducible.  ``a`` is never ``t``: conjugating through row ``t`` would
    disturb the toggle row itself.
    """
    R = normalise_offsets(R)
    r = R[-1]
    if r < 2:
        raise FactorizationError("toggle decomposition needs r > 1")
    if reduce(math.gcd, R) != 1:
        raise FactorizationError(f"gcd of {set(R)} is not 1")
    if not 1 <= t <= r:
        raise FactorizationError(f"toggle row {t} out of range 1..{r}")

    def linked(a: int, b: int) -> bool:
        # a - b (mod r) in R, with residue 0 read as r
        return ((a - b) % r or r) in R

    x = next((x for x in range(1, r + 1) if x != t and linked(t, x)), None)
    if x is None:
        raise FactorizationError(f"no partner for row {t} under R={set(R)}")
    beta = [0] * r
    beta[x - 1] = beta[t - 1] = -1
    steps = [StepMatrix(R, t, tuple(beta))]
    support = {x, t}
    while len(support) < r:
        choice = next(
            ((b, a) for b in range(1, r + 1) if b not in support
             for a in sorted(support) if a != t and linked(a, b)),
            None,
        )
        if choice is None:
            raise FactorizationError(f"cannot extend support {sorted(support)} for R={set(R)}")
        b, a = choice
        steps = [_elementary_step(R, a, b, 1), *steps, _elementary_step(R, a, b, -1)]
        support.add(b)
    return steps


def permutation_to_toggles(perm: Sequence[int]) -> list[ToggleMatrix]:
    """Toggles whose product is ``permutation_matrix(perm)``.

    A ``k``-cycle ``a_1 -> a_2 -> ... -> a_k`` costs ``k + 1`` toggles,
    applied as ``T(a_1), T(a_2), ..., T(a_k), T(a_1)``; fixed points cost
    nothing.  Rows are reported 1-based.
    """
    r = len(perm)
    out: list[ToggleMatrix] = []
    for cyc in cycles(perm):
        if len(cyc) < 2:
            continue
        out.extend(ToggleMatrix(r, a + 1) for a in (*cyc, cyc[0]))
    return out


@dataclass(frozen=True)
class Factorization:
    """Atomics ``A_1, ..., A_n`` in application order for ``N_n(R)``."""

    n: int
    R: tuple[int, ...]
    atomics: tuple[AtomicMatrix, ...]
    modulus: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "R", normalise_offsets(self.R))
        object.__setattr__(self, "atomics", tuple(self.atomics))
        if len(self.atomics) != self.n:
            raise FactorizationError(f"{len(self.atomics)} atomics for length {self.n}")
        if any(a.R != self.R for a in self.atomics):
            raise FactorizationError("atomic matrix with a different R")

    @property
    def r(self) -> int:
        return self.R[-1]

    def product(self, s: int | None = None):
        return product([a.matrix() for a in self.atomics], self.r, s)

    def to_text(self) -> str:
        header = f"# n={self.n} R={','.join(map(str, self.R))}"
        if self.modulus is not None:
            header += f" s={self.modulus}"
        return "\n".join([header, *(a.to_line() for a in self.atomics)]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Factorization:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
        R = tuple(int(j) for j in meta["R"].split(","))
        atomics = []
        for ln in lines[1:]:
            coeffs = {}
            for tok in ln.split():
                key, val = tok.split("=", 1)
                coeffs[int(key.removeprefix("alpha_"))] = int(val)
            atomics.append(AtomicMatrix.from_offsets(R, coeffs))
        s = int(meta["s"]) if "s" in meta else None
        return cls(int(meta["n"]), R, tuple(atomics), s)


def verify_factorization(f: Factorization, s: int | None = None) -> bool:
    """Is ``A_n ... A_1`` the identity?  Over the integers when ``s`` is ``None``."""
    prod = f.product(s)
    return prod.is_identity()


def _toggle_count(n: int, R: tuple[int, ...]) -> int:
    r = R[-1]
    power = (-n) % r
    p = shift_matrix(R).matrix()
    q = product([p] * power, r)
    return len(permutation_to_toggles(permutation_of(q)))


def factorization_threshold(n: int, R: Iterable[int]) -> int:
    """Number of atomics spent on ``P^(-n)``; the construction needs ``n`` at least this."""
    R = normalise_offsets(R)
    r = R[-1]
    if r == 1:
        return 0
    return _toggle_count(n, R) * r * (2 * r - 3)


def universal_upper_bound(R: Iterable[int]) -> int:
    """Least ``N`` with :func:`identity_factorization` succeeding for every ``n >= N``."""
    R = normalise_offsets(R)
    r = R[-1]
    worst = 0
    for rho in range(r):
        need = factorization_threshold(rho, R)
        # largest n = rho (mod r) still below the threshold
        if need > rho:
            worst = max(worst, rho + ((need - 1 - rho) // r) * r)
    return worst + 1


def identity_factorization(n: int, R: Iterable[int]) -> Factorization:
    """Exactly ``n`` integer R-atomic matrices multiplying to ``I_r``.

    ``Q = P^(-n)`` is spelled out as toggles, the toggles as steps and the
    steps as atomics; the remaining ``n - m`` factors are copies of ``P``.
    Since ``m`` is a multiple of ``r``, ``P^(n-m) Q = P^(-m) = I``.
    """
    R = normalise_offsets(R)
    r = R[-1]
    if n < 0:
        raise FactorizationError("length must be nonnegative")
    if reduce(math.gcd, R) != 1:
        raise FactorizationError(f"gcd of {set(R)} is not 1")
    p = shift_matrix(R)
    if r == 1:
        return Factorization(n, R, (p,) * n)
    power = (-n) % r
    q = product([p.matrix()] * power, r)
    toggles = permutation_to_toggles(permutation_of(q))
    atomics: list[AtomicMatrix] = []
    for toggle in toggles:
        for step in toggle_to_steps(toggle.t, R):
            atomics.extend(step_to_atomics(step))
    m = len(atomics)
    if n < m:
        raise FactorizationError(
            f"n={n} is below the threshold {m} of this construction for R={set(R)}"
        )
    return Factorization(n, R, tuple(atomics) + (p,) * (n - m))


def factorization_to_circuit(f: Factorization, s: int | None) -> LinearCircuit:
    """Node ``r + i`` takes its coefficients from the last row of ``A_i``."""
    coeffs = [[a.coefficient(j) for j in f.R] for a in f.atomics]
    if s is not None:
        coeffs = [[x % s for x in row] for row in coeffs]
    return LinearCircuit(f.n, f.R, coeffs, s)


def circuit_to_factorization(c: LinearCircuit, spec: ClockSpec | None = None) -> Factorization:
    if spec is not None and (spec.n != c.n or spec.R != c.R):
        raise FactorizationError("circuit does not match the clock network")
    atomics = tuple(AtomicMatrix.from_offsets(c.R, dict(zip(c.R, row))) for row in c.coeffs)
    return Factorization(c.n, c.R, atomics, c.modulus)
