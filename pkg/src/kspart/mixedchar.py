"""Expected characteristic polynomials of sums of independent random vectors.

The central object is the mixed characteristic polynomial of PSD matrices
A_1..A_m in dimension d,

    mu(x) = prod_i (1 - d/dz_i) det(xI + sum_i z_i A_i)  at z = 0,

which equals E det(xI - sum_i v_i v_i*) whenever the v_i are independent with
E v_i v_i* = A_i.  It is computed exactly (up to rounding) by a subset
expansion: det(xI + sum z_i A_i) is homogeneous of total degree d in (x, z),
so the coefficient of the multi-affine monomial prod_{i in S} z_i sits on
x^{d-|S|} and is extracted by the alternating sum

    g_S(x) = sum_{T subset S} (-1)^{|S|-|T|} det(xI + sum_{i in T} A_i);

contributions of z-degree >= 2 land strictly below x^{d-|S|} and are ignored.
This needs one characteristic polynomial per subset of size <= d and works
for PSD matrices of any rank.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

import numpy as np

from . import linalg
from ._parallel import chunked, ordered_map
from .policy import (
    CapacityError,
    DEFAULT_POLICY,
    NumericPolicy,
    ValidationError,
)


@dataclass(frozen=True)
class FiniteSupportVector:
    """Random vector with finitely many atoms.

    probabilities: shape (l,), strictly positive, summing to 1 (renormalized
    when the drift is below prob_sum_tol, rejected beyond that).
    values: shape (l, d) complex atom values.
    """

    probabilities: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.probabilities, dtype=np.float64))
        v = np.asarray(self.values, dtype=np.complex128)
        if v.ndim != 2:
            raise ValidationError(f"atom values must be 2-D, got shape {v.shape}")
        if p.shape[0] != v.shape[0] or p.shape[0] == 0:
            raise ValidationError("need one probability per atom, and at least one atom")
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(v.real)) \
                or not np.all(np.isfinite(v.imag)):
            raise ValidationError("non-finite atom data")
        if np.any(p <= 0):
            raise ValidationError("atom probabilities must be strictly positive")
        drift = abs(float(np.sum(p)) - 1.0)
        if drift > DEFAULT_POLICY.prob_sum_tol:
            raise ValidationError(f"probabilities sum to 1 {drift:.3e} away from 1")
        p = p / np.sum(p)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def support_size(self) -> int:
        return self.values.shape[0]

    @classmethod
    def deterministic(cls, value) -> "FiniteSupportVector":
        v = linalg.as_complex_vector(value)
        return cls(np.array([1.0]), v[None, :])


@dataclass(frozen=True)
class RandomVectorEnsemble:
    """Independent finite-support random vectors sharing one dimension."""

    dim: int
    vectors: tuple[FiniteSupportVector, ...]

    def __post_init__(self):
        object.__setattr__(self, "vectors", tuple(self.vectors))
        if self.dim < 1:
            raise ValidationError("ensemble dimension must be positive")
        for i, v in enumerate(self.vectors):
            if not isinstance(v, FiniteSupportVector):
                raise ValidationError(f"vector {i} is not a FiniteSupportVector")
            if v.dim != self.dim:
                raise ValidationError(
                    f"vector {i} has dimension {v.dim}, ensemble has {self.dim}"
                )

    @property
    def support_sizes(self) -> tuple[int, ...]:
        return tuple(v.support_size for v in self.vectors)

    @property
    def leaf_count(self) -> int:
        return math.prod(self.support_sizes) if self.vectors else 1


@dataclass(frozen=True)
class MixedInstance:
    """PSD matrices feeding the mixed characteristic polynomial."""

    dim: int
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        mats = tuple(linalg.check_psd(m) for m in self.matrices)
        for i, m in enumerate(mats):
            if m.shape[0] != self.dim:
                raise ValidationError(
                    f"matrix {i} has dimension {m.shape[0]}, instance has {self.dim}"
                )
        object.__setattr__(self, "matrices", mats)


def covariance(v: FiniteSupportVector) -> np.ndarray:
    """Second-moment matrix sum_j p_j w_j w_j* of a finite-support vector."""
    w = v.values
    c = (w.T * v.probabilities) @ w.conj()
    return (c + c.conj().T) / 2.0


def ensemble_covariances(e: RandomVectorEnsemble) -> list[np.ndarray]:
    return [covariance(v) for v in e.vectors]


def ensemble_instance(e: RandomVectorEnsemble) -> MixedInstance:
    return MixedInstance(e.dim, tuple(ensemble_covariances(e)))


def expected_char_poly_bruteforce(e: RandomVectorEnsemble,
                                  policy: NumericPolicy = DEFAULT_POLICY,
                                  threads: int = 1) -> np.ndarray:
    """E det(xI - sum v_i v_i*) by enumerating every outcome of the ensemble.

    Independent oracle for the subset expansion; outcome count is capped.
    """
    leaves = e.leaf_count
    if leaves > policy.bruteforce_cap:
        raise CapacityError(
            f"{leaves} outcomes exceed the brute-force cap {policy.bruteforce_cap}"
        )
    d = e.dim
    outers = [
        np.einsum("aj,ak->ajk", v.values, v.values.conj())
        for v in e.vectors
    ]
    assigns = list(product(*(range(s) for s in e.support_sizes)))

    def run_chunk(chunk):
        idx = np.array(chunk, dtype=int)
        sums = np.zeros((idx.shape[0], d, d), dtype=np.complex128)
        weights = np.ones(idx.shape[0])
        for i, v in enumerate(e.vectors):
            sums += outers[i][idx[:, i]]
            weights *= v.probabilities[idx[:, i]]
        polys = linalg.char_poly_stack(sums)
        return weights @ polys

    parts = ordered_map(run_chunk, chunked(assigns, 4096), threads=threads)
    total = np.zeros(d + 1)
    for part in parts:
        total += part
    return total


def _subset_mixed(mats: list[np.ndarray], d: int,
                  policy: NumericPolicy) -> np.ndarray:
    """Subset-expansion engine; mats are validated Hermitian PSD."""
    m = len(mats)
    if m > policy.matrix_cap:
        raise CapacityError(f"{m} matrices exceed the cap {policy.matrix_cap}")
    kmax = min(m, d)
    n_subsets = sum(math.comb(m, k) for k in range(kmax + 1))
    if n_subsets > policy.subset_cap:
        raise CapacityError(
            f"{n_subsets} subsets exceed the expansion cap {policy.subset_cap}"
        )
    subsets: list[tuple[int, ...]] = []
    for k in range(kmax + 1):
        subsets.extend(combinations(range(m), k))
    stack = np.zeros((len(subsets), d, d), dtype=np.complex128)
    for row, s in enumerate(subsets):
        for i in s:
            stack[row] -= mats[i]
    # char_poly(-B_T) = det(xI + B_T) as an ascending coefficient vector
    h = linalg.char_poly_stack(stack)
    coeff_of = {s: h[row] for row, s in enumerate(subsets)}
    mu = np.zeros(d + 1)
    mu[d] = 1.0
    for s in subsets:
        k = len(s)
        if k == 0:
            continue
        c_s = 0.0
        for r in range(k + 1):
            sign = -1.0 if (k - r) % 2 else 1.0
            for t in combinations(s, r):
                c_s += sign * coeff_of[t][d - k]
        mu[d - k] += c_s if k % 2 == 0 else -c_s
    return mu


def mixed_char_poly(inst: MixedInstance,
                    policy: NumericPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Mixed characteristic polynomial of a PSD instance, ascending coeffs."""
    return _subset_mixed(list(inst.matrices), inst.dim, policy)


def conditional_expected_poly(e: RandomVectorEnsemble, prefix,
                              policy: NumericPolicy = DEFAULT_POLICY,
                              cache: dict | None = None) -> np.ndarray:
    """Tree-node polynomial of the interlacing family.

    With the first k vectors pinned to the atoms named by ``prefix``, this is
    (prod of the pinned atom probabilities) times the mixed characteristic
    polynomial of the pinned outer products together with the covariances of
    the remaining vectors.  prefix = () recovers the expected characteristic
    polynomial of the whole ensemble; a full-length prefix gives the scaled
    characteristic polynomial of one outcome.

    A deterministic prefix enters the expectation only through the sum of its
    outer products, so when ``cache`` is supplied the unscaled polynomial is
    memoized under (prefix-sum matrix, remaining covariances) and shared
    between prefixes with equal sums.
    """
    prefix = tuple(int(t) for t in prefix)
    if len(prefix) > len(e.vectors):
        raise ValidationError("prefix is longer than the ensemble")
    k = len(prefix)
    prefix_sum = np.zeros((e.dim, e.dim), dtype=np.complex128)
    weight = 1.0
    for i in range(k):
        v = e.vectors[i]
        t = prefix[i]
        if not (0 <= t < v.support_size):
            raise ValidationError(f"prefix index {t} out of range for vector {i}")
        w = v.values[t]
        prefix_sum += np.outer(w, w.conj())
        weight *= float(v.probabilities[t])
    key = (prefix_sum.tobytes(), k) if cache is not None else None
    if key is not None and key in cache:
        return weight * cache[key]
    mats = []
    for i, v in enumerate(e.vectors):
        if i < k:
            w = v.values[prefix[i]]
            mats.append(np.outer(w, w.conj()))
        else:
            mats.append(covariance(v))
    unscaled = _subset_mixed(mats, e.dim, policy)
    if key is not None:
        cache[key] = unscaled
    return weight * unscaled


@dataclass(frozen=True)
class CohenReport:
    """Comparison of the deterministic top eigenvalue with the mixed bound."""

    sum_largest_root: float
    mixed_largest_root: float
    holds: bool
    slack: float


def cohen_inequality_check(inst: MixedInstance,
                           policy: NumericPolicy = DEFAULT_POLICY) -> CohenReport:
    """Numerically confirm lambda_max(sum A_i) <= lambda_max(mu)."""
    from . import realpoly

    total = np.zeros((inst.dim, inst.dim), dtype=np.complex128)
    for m in inst.matrices:
        total += m
    lhs = realpoly.largest_root(linalg.char_poly(total, policy), policy=policy)
    rhs = realpoly.largest_root(mixed_char_poly(inst, policy), policy=policy)
    return CohenReport(
        sum_largest_root=lhs,
        mixed_largest_root=rhs,
        holds=bool(lhs <= rhs + policy.cohen_slack),
        slack=policy.cohen_slack,
    )
