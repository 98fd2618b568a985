"""Candidate hyperplanes: unit-basis directions plus soft sparse random projections."""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np

from riforest.exceptions import DataError, DegenerateSparsityError

UNIT_BASIS = "unit_basis"
RANDOM_PROJECTION = "random_projection"

MAX_REDRAWS = 100


@dataclass(frozen=True, eq=False)
class HyperplaneVector:
    """Split direction of length d.

    A unit-basis vector stands for an original feature; projecting onto it is a
    plain column lookup. Random-projection vectors keep their nonzero
    coefficients in ``support``/``weights`` so projection only touches those
    columns.
    """

    coefficients: np.ndarray
    kind: str = RANDOM_PROJECTION
    index: int | None = None
    support: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        coef = np.asarray(self.coefficients, dtype=np.float64)
        if coef.ndim != 1 or coef.size == 0:
            raise ValueError("coefficients must be a non-empty 1-D array")
        support = np.flatnonzero(coef)
        if support.size == 0:
            raise ValueError("hyperplane vector needs at least one nonzero coefficient")
        if self.kind == UNIT_BASIS:
            if self.index is None or support.tolist() != [self.index] or coef[self.index] != 1.0:
                raise ValueError("unit-basis vector must be 1 at its index and 0 elsewhere")
        elif self.kind != RANDOM_PROJECTION:
            raise ValueError(f"unknown hyperplane kind {self.kind!r}")
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", coef[support])

    @classmethod
    def unit(cls, d: int, i: int) -> HyperplaneVector:
        coef = np.zeros(d)
        coef[i] = 1.0
        return cls(coef, UNIT_BASIS, int(i))

    @property
    def d(self) -> int:
        return self.coefficients.shape[0]

    @property
    def is_unit(self) -> bool:
        return self.kind == UNIT_BASIS

    def __eq__(self, other) -> bool:
        if not isinstance(other, HyperplaneVector):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.index == other.index
            and np.array_equal(self.coefficients, other.coefficients)
        )

    __hash__ = None


@dataclass(frozen=True)
class SparsityDraw:
    """Per-tree sparsity: a coefficient is zero with probability ``lam = 1 - 1/s``."""

    lam: float
    s: float

    @classmethod
    def from_lambda(cls, lam: float) -> SparsityDraw:
        if not (0.0 <= lam < 1.0):
            raise ValueError(f"sparsity must lie in [0, 1), got {lam}")
        return cls(float(lam), 1.0 / (1.0 - lam))


def draw_sparsity(rng: np.random.Generator) -> SparsityDraw:
    return SparsityDraw.from_lambda(rng.random())


def _magnitudes(rng: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on (0, 1]; zero is excluded so kept coefficients are nonzero."""
    return 1.0 - rng.random(size)


def _signed(u: np.ndarray, mag: np.ndarray, keep: float, scale: float) -> np.ndarray:
    """Coefficients from selector draws ``u``: negative if u < keep/2, positive if
    keep/2 <= u < keep, zero otherwise."""
    coef = np.where(u < keep, scale * mag, 0.0)
    coef[u < 0.5 * keep] *= -1.0
    return coef


def attempt_block_size(need: int, d: int, keep: float) -> int:
    """Attempts drawn at once so that one block usually yields ``need`` accepted rows."""
    p_accept = -math.expm1(d * math.log1p(-keep)) if keep < 1.0 else 1.0
    return math.ceil((need + 2.0 * math.sqrt(need)) / p_accept)


def random_coefficients(
    d: int, count: int, draw: SparsityDraw, rng: np.random.Generator
) -> np.ndarray:
    """``count`` soft sparse random directions as rows of a (count, d) matrix.

    Each coefficient is independently ``sqrt(3s) * U(0, 1]`` with probability
    1/(2s), zero with probability 1 - 1/s, and ``-sqrt(3s) * U(0, 1]`` with
    probability 1/(2s). All-zero rows are rejected and redrawn. Attempts are
    i.i.d., so they are drawn in blocks and accepted rows are taken in order.
    At very high sparsity with few features rejection can stall; once
    ``MAX_REDRAWS`` attempts per row are spent, the remaining rows are drawn
    directly from the same conditional distribution.
    """
    if d < 1:
        raise DataError(f"d must be >= 1, got {d}")
    scale = math.sqrt(3.0 * draw.s)
    keep = 1.0 / draw.s
    out = np.empty((count, d))
    filled = 0
    budget = MAX_REDRAWS * count
    while filled < count and budget > 0:
        need = count - filled
        b = min(budget, attempt_block_size(need, d, keep))
        budget -= b
        u = rng.random((b, d))
        mag = _magnitudes(rng, (b, d))
        ok = np.flatnonzero((u < keep).any(axis=1))[:need]
        out[filled : filled + ok.size] = _signed(u[ok], mag[ok], keep, scale)
        filled += ok.size
    for i in range(filled, count):
        out[i] = conditional_nonzero(d, keep, scale, rng)
    return out


def sample_projection_vector(
    d: int, draw: SparsityDraw, rng: np.random.Generator
) -> HyperplaneVector:
    """One soft sparse random direction; see :func:`random_coefficients`."""
    return HyperplaneVector(random_coefficients(d, 1, draw, rng)[0], RANDOM_PROJECTION)


def nonzero_count_cdf(d: int, keep: float) -> np.ndarray:
    """CDF over k = 1..d of Binomial(d, keep) conditioned on k >= 1."""
    log_pmf = np.array(
        [
            math.lgamma(d + 1) - math.lgamma(i + 1) - math.lgamma(d - i + 1)
            + i * math.log(keep)
            + (d - i) * math.log1p(-keep)
            for i in range(1, d + 1)
        ]
    )
    top = log_pmf.max()
    cdf = np.cumsum([math.exp(v - top) for v in log_pmf])
    return cdf / cdf[-1]


def conditional_nonzero(d: int, keep: float, scale: float, rng) -> np.ndarray:
    """One coefficient row conditioned on having at least one nonzero entry.

    Draws the number of nonzeros by inverse CDF, their positions by a partial
    Fisher-Yates shuffle, then sign and magnitude per position.
    """
    if keep <= 0.0:
        raise DegenerateSparsityError("sparsity 1 leaves no nonzero coefficients")
    cdf = nonzero_count_cdf(d, keep)
    k = min(int(np.searchsorted(cdf, rng.random(), side="right")) + 1, d)
    perm = np.arange(d)
    for i in range(k):
        j = int(rng.integers(i, d))
        perm[i], perm[j] = perm[j], perm[i]
    coef = np.zeros(d)
    for pos in perm[:k]:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        coef[pos] = sign * scale * (1.0 - rng.random())
    return coef


@lru_cache(maxsize=64)
def unit_basis(d: int) -> tuple[HyperplaneVector, ...]:
    return tuple(HyperplaneVector.unit(d, i) for i in range(d))


def build_candidate_set(
    d: int,
    tau: int,
    draw: SparsityDraw,
    use_random: bool,
    rng: np.random.Generator,
) -> list[HyperplaneVector]:
    """The d unit-basis vectors, followed by ``tau`` random vectors when ``use_random``."""
    candidates = list(unit_basis(d))
    if use_random and tau > 0:
        coef = random_coefficients(d, tau, draw, rng)
        candidates.extend(HyperplaneVector(row, RANDOM_PROJECTION) for row in coef)
    return candidates


def project(rows: np.ndarray, v: HyperplaneVector) -> np.ndarray:
    """Dot product of every row with ``v``.

    Unit-basis vectors return the column itself. Random vectors accumulate
    column contributions in a fixed order, so a row projects to the same bits
    whether it is scored alone or inside a batch.
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != v.d:
        raise DataError(f"rows have shape {rows.shape}, hyperplane has length {v.d}")
    if v.is_unit:
        return rows[:, v.index].copy()
    support, weights = v.support, v.weights
    out = rows[:, support[0]] * weights[0]
    for j, w in zip(support[1:], weights[1:]):
        out += rows[:, j] * w
    return out


def project_dense(rows: np.ndarray, coef: np.ndarray) -> np.ndarray:
    """Projections onto each row of ``coef``, shape (n_rows, n_vectors).

    Columns are accumulated in index order; zero coefficients add exact zeros,
    so each column matches :func:`project` on the same vector bit for bit.
    """
    out = rows[:, :1] * coef[:, 0]
    for j in range(1, coef.shape[1]):
        out += rows[:, j : j + 1] * coef[:, j]
    return out


def project_all(rows: np.ndarray, vectors: list[HyperplaneVector]) -> np.ndarray:
    """Column-stacked projections, shape (n_rows, len(vectors))."""
    out = np.empty((rows.shape[0], len(vectors)))
    unit_pos = [k for k, v in enumerate(vectors) if v.is_unit]
    if unit_pos:
        out[:, unit_pos] = rows[:, [vectors[k].index for k in unit_pos]]
    for k, v in enumerate(vectors):
        if not v.is_unit:
            out[:, k] = project(rows, v)
    return out
