"""Univariate real polynomials: derivative operators, roots, interlacing.

Polynomials are 1-D float arrays of ascending coefficients.  Root finding
follows the companion-matrix route with one Newton polish per root, then
clusters nearby roots into multiplicities; a polynomial that fails the
real-rootedness check raises RootednessError carrying the offending
imaginary magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import numpy.polynomial.polynomial as npp

from .policy import (
    DEFAULT_POLICY,
    NumericPolicy,
    RootednessError,
    ValidationError,
)


def as_poly(coeffs) -> np.ndarray:
    """Coerce to an ascending coefficient array, trimming trailing zeros."""
    p = np.atleast_1d(np.asarray(coeffs, dtype=np.float64))
    if p.ndim != 1:
        raise ValidationError(f"expected 1-D coefficients, got shape {p.shape}")
    if p.size and not np.all(np.isfinite(p)):
        raise ValidationError("polynomial has non-finite coefficients")
    p = npp.polytrim(p)
    return p


def degree(p) -> int:
    """Degree after trimming; the zero polynomial reports -1."""
    q = as_poly(p)
    if q.size == 1 and q[0] == 0.0:
        return -1
    return q.size - 1


def poly_eval(p, x):
    return npp.polyval(x, as_poly(p))


def from_roots(root_values) -> np.ndarray:
    """Monic polynomial with the given roots (ascending coefficients)."""
    r = np.atleast_1d(np.asarray(root_values, dtype=np.float64))
    if r.size == 0:
        return np.array([1.0])
    return npp.polyfromroots(r)


def one_minus_c_derivative(p, c: float) -> np.ndarray:
    """Apply (1 - c d/dx) to p."""
    q = as_poly(p)
    if q.size == 1:
        return q.copy()
    d = npp.polyder(q)
    return npp.polysub(q, float(c) * d)


def laguerre_expected(n: int, applications: int, delta: float) -> np.ndarray:
    """(1 - delta d/dx)^applications applied to x^n."""
    if n < 0 or applications < 0:
        raise ValidationError("degree and application count must be nonnegative")
    if delta < 0:
        raise ValidationError("shrinkage constant must be nonnegative")
    p = np.zeros(n + 1)
    p[n] = 1.0
    for _ in range(applications):
        p = one_minus_c_derivative(p, delta)
    return p


def gaussian_expected_poly(dim: int, delta: float) -> np.ndarray:
    """Expected characteristic polynomial of an isotropized Gaussian half-sample.

    For dim-dimensional vectors with E||v||^2 = delta (per-coordinate variance
    delta/dim) a rank-one update contributes one factor (1 - (delta/dim) d/dx),
    and half of the n/delta vectors gives n/(2 delta) applications to x^dim.
    The mean of the resulting root distribution is 1/2.
    """
    if dim < 1:
        raise ValidationError("dimension must be positive")
    if not (0 < delta <= dim):
        raise ValidationError("delta must lie in (0, dim]")
    applications = int(round(dim / (2.0 * delta)))
    return laguerre_expected(dim, applications, delta / dim)


def shrunk_power_largest_root(n: int, applications: int, delta: float,
                              rel_tol: float = 1e-13) -> float:
    """Largest root of (1 - delta d/dx)^applications x^n, computed exactly.

    Beyond degree ~20 the float64 monomial coefficients of this polynomial no
    longer determine its clustered roots, so companion-matrix root finding
    falls apart.  Substituting x = delta*y turns the operator into (1 - d/dy)
    and the coefficients into exact integers; Newton from above the Cauchy
    bound then descends monotonically to the top root in rational arithmetic
    (iterates are rounded up, preserving the from-above invariant, to keep
    denominators near 2^80).
    """
    n = int(n)
    applications = int(applications)
    if n < 1 or applications < 0:
        raise ValidationError("need n >= 1 and applications >= 0")
    if not (0.0 < delta < float("inf")):
        raise ValidationError("delta must be positive and finite")
    if applications == 0:
        return 0.0
    coeffs = [0] * n + [1]
    for _ in range(applications):
        coeffs = [coeffs[k] - (k + 1) * coeffs[k + 1] if k < n else coeffs[k]
                  for k in range(n + 1)]
    deriv = [k * coeffs[k] for k in range(1, n + 1)]

    def ev(poly: list, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(poly):
            acc = acc * x + c
        return acc

    # Lagrange-style bound: 2 * max |c_{n-k}|^(1/k); computed loosely in logs
    bound = 2.0
    for k in range(1, n + 1):
        c = coeffs[n - k]
        if c:
            bound = max(bound, 2.0 * math.exp(math.log(abs(c)) / k))
    x = Fraction(math.ceil(bound))
    cap = 1 << 80
    thresh = Fraction(rel_tol).limit_denominator(10 ** 18)
    for _ in range(10000):
        slope = ev(deriv, x)
        if slope <= 0:
            break
        step = ev(coeffs, x) / slope
        if step <= 0:
            break
        xn = Fraction(math.ceil((x - step) * cap), cap)
        done = x - xn <= abs(x) * thresh
        x = xn
        if done:
            break
    return float(x) * float(delta)


@dataclass(frozen=True)
class RootList:
    """Sorted distinct real roots with multiplicities."""

    values: np.ndarray
    multiplicities: np.ndarray

    def expand(self) -> np.ndarray:
        """Roots repeated by multiplicity, ascending."""
        if self.values.size == 0:
            return np.array([])
        return np.repeat(self.values, self.multiplicities)

    @property
    def total(self) -> int:
        return int(np.sum(self.multiplicities)) if self.values.size else 0


@dataclass(frozen=True)
class RealRootedness:
    real_rooted: bool
    max_imag: float


def complex_roots(p) -> np.ndarray:
    """Companion-matrix roots with one Newton polish each."""
    q = as_poly(p)
    if degree(q) < 0:
        raise ValidationError("the zero polynomial has no root set")
    if degree(q) == 0:
        return np.array([], dtype=np.complex128)
    raw = npp.polyroots(q)
    dq = npp.polyder(q)
    vals = npp.polyval(raw, q)
    slopes = npp.polyval(raw, dq)
    safe = np.abs(slopes) > 1e-300
    polished = raw.copy()
    polished[safe] = raw[safe] - vals[safe] / slopes[safe]
    # keep the polish only where it did not wander
    worse = np.abs(npp.polyval(polished, q)) > np.abs(vals)
    polished[worse] = raw[worse]
    return polished


def _greedy_clusters(croots: np.ndarray, radius: float) -> list[np.ndarray]:
    """Group roots whose running centroid stays within radius.

    Input order is (re, im)-sorted so conjugate pairs land adjacently and a
    conjugate-closed cluster has an exactly real mean.
    """
    order = np.lexsort((croots.imag, croots.real))
    pts = croots[order]
    clusters: list[list[complex]] = [[pts[0]]]
    for z in pts[1:]:
        c = np.mean(clusters[-1])
        if abs(z - c) <= radius:
            clusters[-1].append(z)
        else:
            clusters.append([z])
    return [np.asarray(c) for c in clusters]


def _try_real_clustering(q, croots, radius, tol, policy):
    """One clustering attempt; (values, mults) or None.

    Accepts when every cluster mean is real within tol and the residual of q
    at the mean is at evaluation-noise level for coefficients of this size.
    A genuine multiple root passes (cluster means cancel the companion-matrix
    ring noise to machine precision); a merged pair of distinct roots leaves
    a residual far above noise and is refused, so coarser radii cannot paper
    over genuinely complex roots.
    """
    absq = np.abs(q)
    values, mults = [], []
    for cluster in _greedy_clusters(croots, radius):
        m = complex(np.mean(cluster))
        if abs(m.imag) > tol * (1.0 + abs(m.real)):
            return None
        x = _polish_multiple(q, m.real, len(cluster), 2.0 * radius)
        noise = policy.root_residual_rtol * float(
            npp.polyval(max(1.0, abs(x)), absq))
        if abs(npp.polyval(x, q)) > max(noise, 1e-250):
            return None
        values.append(x)
        mults.append(len(cluster))
    return values, mults


def _polish_multiple(q, x: float, k: int, leash: float) -> float:
    """Newton-polish a k-fold root candidate on the (k-1)-th derivative.

    A k-fold root of q is a simple root there, so the cluster mean (accurate
    only to a fractional power of the noise) sharpens to near machine
    precision.  Movement is leashed to the cluster scale; a step that fails
    to reduce the derivative magnitude is discarded.
    """
    dk = q
    for _ in range(k - 1):
        dk = npp.polyder(dk)
    dk1 = npp.polyder(dk)
    start = x
    for _ in range(3):
        den = npp.polyval(x, dk1)
        if abs(den) < 1e-300:
            break
        xn = x - npp.polyval(x, dk) / den
        if abs(xn - start) > leash + 1e-30:
            break
        if abs(npp.polyval(xn, dk)) < abs(npp.polyval(x, dk)):
            x = float(xn)
        else:
            break
    return x


def _root_clustering(q, tol, policy):
    croots = complex_roots(q)
    scale = 1.0 + float(np.max(np.abs(croots)))
    max_imag = float(np.max(np.abs(croots.imag)))
    # escalate the merge radius half a decade at a time: a multiplicity-k
    # root scatters over a ring of radius about eps**(1/k), so high
    # multiplicities need coarse merges while simple roots accept early
    floor = max(policy.root_merge_rtol, 1e-12)
    radius = floor * scale
    while radius <= 0.101 * scale:
        got = _try_real_clustering(q, croots, radius, tol, policy)
        if got is not None:
            return got, max_imag
        radius *= 3.1622776601683795
    return None, max_imag


def is_real_rooted(p, tol: float | None = None,
                   policy: NumericPolicy = DEFAULT_POLICY) -> RealRootedness:
    """Check all roots are real, allowing multiple-root cluster noise."""
    q = as_poly(p)
    if degree(q) < 0:
        raise ValidationError("the zero polynomial has no root set")
    if degree(q) == 0:
        return RealRootedness(True, 0.0)
    tol = policy.real_root_imag_rtol if tol is None else float(tol)
    got, max_imag = _root_clustering(q, tol, policy)
    return RealRootedness(got is not None, max_imag)


def roots(p, tol: float | None = None,
          policy: NumericPolicy = DEFAULT_POLICY) -> RootList:
    """Real roots with multiplicities; raises RootednessError if no
    noise-consistent real clustering of the computed roots exists."""
    q = as_poly(p)
    if degree(q) < 0:
        raise ValidationError("the zero polynomial has no root set")
    if degree(q) == 0:
        return RootList(np.array([]), np.array([], dtype=int))
    tol = policy.real_root_imag_rtol if tol is None else float(tol)
    got, max_imag = _root_clustering(q, tol, policy)
    if got is None:
        raise RootednessError(
            f"polynomial is not real-rooted: max imaginary part {max_imag:.3e}",
            max_imag,
        )
    values, mults = got
    order = np.argsort(values)
    return RootList(np.asarray(values)[order],
                    np.asarray(mults, dtype=int)[order])


def largest_root(p, tol: float | None = None,
                 policy: NumericPolicy = DEFAULT_POLICY) -> float:
    r = roots(p, tol, policy)
    if r.values.size == 0:
        raise ValidationError("constant polynomial has no largest root")
    return float(r.values[-1])


def interlaces(g, f, tol: float | None = None,
               policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """Weak interlacing: deg g = deg f - 1 and the roots alternate
    beta_1 <= alpha_1 <= beta_2 <= ... <= beta_n, with relative slack."""
    gp, fp = as_poly(g), as_poly(f)
    if degree(fp) < 1 or degree(gp) != degree(fp) - 1:
        raise ValidationError(
            f"degree mismatch: {degree(gp)} vs {degree(fp)} (need one less)"
        )
    if gp[-1] <= 0 or fp[-1] <= 0:
        raise ValidationError("leading coefficients must be positive")
    alpha = roots(gp, tol, policy).expand()
    beta = roots(fp, tol, policy).expand()
    allr = np.concatenate([alpha, beta]) if alpha.size else beta
    slack = (policy.interlace_rtol if tol is None else float(tol))
    slack *= 1.0 + float(np.max(np.abs(allr)))
    for i in range(alpha.size):
        if alpha[i] < beta[i] - slack or alpha[i] > beta[i + 1] + slack:
            return False
    return True


def common_interlacing_test(fs, samples: int | None = None,
                            tol: float | None = None, seed: int = 0,
                            policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """Sampled test for a common interlacing of same-degree polynomials.

    Checks real-rootedness of the uniform average, every pairwise midpoint,
    and seeded random convex combinations.  A failure is definitive (no
    common interlacing); a pass is evidence, not proof.
    """
    polys = [as_poly(f) for f in fs]
    if len(polys) == 0:
        raise ValidationError("need at least one polynomial")
    degs = {degree(p) for p in polys}
    if len(degs) != 1 or degs == {-1}:
        raise ValidationError("polynomials must share a positive degree")
    d = degs.pop()
    if d < 1:
        raise ValidationError("polynomials must share a positive degree")
    for i, p in enumerate(polys):
        if p[-1] <= 0:
            raise ValidationError(f"polynomial {i} must have a positive leading coefficient")
        if not is_real_rooted(p, tol, policy).real_rooted:
            raise ValidationError(f"polynomial {i} is not real-rooted")
    if len(polys) == 1:
        return True
    stack = np.array(polys)
    combos = [np.mean(stack, axis=0)]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            combos.append((stack[i] + stack[j]) / 2.0)
    n_samples = policy.combo_samples if samples is None else int(samples)
    rng = np.random.default_rng(seed)
    for _ in range(n_samples):
        lam = rng.dirichlet(np.ones(len(polys)))
        combos.append(lam @ stack)
    for c in combos:
        if not is_real_rooted(c, tol, policy).real_rooted:
            return False
    return True


@dataclass(frozen=True)
class SeparationReport:
    """Location of the lone window root of a sum of sign-aligned polynomials."""

    window: tuple[float, float]
    individual_roots: tuple[float, ...]
    sum_root: float
    bracket: tuple[float, float]
    ok: bool


def separate_check(fs, s: float, t: float, tol: float | None = None,
                   policy: NumericPolicy = DEFAULT_POLICY) -> SeparationReport:
    """Verify the one-root-in-a-window argument for a sum of polynomials.

    Preconditions, checked per polynomial: exactly one root (with
    multiplicity) inside [s, t], and all values at s share a sign, as do all
    values at t.  The sum then has exactly one root in the window, located
    between the smallest and largest of the individual window roots.
    """
    polys = [as_poly(f) for f in fs]
    if not polys:
        raise ValidationError("need at least one polynomial")
    if not (s < t):
        raise ValidationError("window must satisfy s < t")
    window_roots = []
    sign_s: list[int] = []
    sign_t: list[int] = []
    problems = []
    for i, p in enumerate(polys):
        rl = roots(p, tol, policy)
        expanded = rl.expand()
        slack = policy.interlace_rtol * (1.0 + float(np.max(np.abs(expanded))) if expanded.size else 1.0)
        inside = expanded[(expanded >= s - slack) & (expanded <= t + slack)]
        if inside.size != 1:
            problems.append(f"polynomial {i}: {inside.size} roots in window, expected 1")
            continue
        window_roots.append(float(inside[0]))
        cmax = float(np.max(np.abs(p)))
        for point, store in ((s, sign_s), (t, sign_t)):
            val = float(npp.polyval(point, p))
            zero_scale = 1e-12 * cmax * max(1.0, abs(point)) ** degree(p)
            store.append(0 if abs(val) <= zero_scale else (1 if val > 0 else -1))
    if problems:
        raise ValidationError("; ".join(problems))
    for name, signs in (("s", sign_s), ("t", sign_t)):
        nz = {x for x in signs if x != 0}
        if len(nz) > 1:
            raise ValidationError(f"values at {name} do not share a sign: {signs}")
    total = polys[0]
    for p in polys[1:]:
        total = npp.polyadd(total, p)
    sum_inside = roots(total, tol, policy).expand()
    sum_inside = sum_inside[(sum_inside >= s) & (sum_inside <= t)]
    lo, hi = float(min(window_roots)), float(max(window_roots))
    ok = sum_inside.size == 1 and lo - 1e-9 <= sum_inside[0] <= hi + 1e-9
    return SeparationReport(
        window=(float(s), float(t)),
        individual_roots=tuple(window_roots),
        sum_root=float(sum_inside[0]) if sum_inside.size else float("nan"),
        bracket=(lo, hi),
        ok=bool(ok),
    )


def hko_test(f, g, samples: int | None = None, tol: float | None = None,
             seed: int = 0, policy: NumericPolicy = DEFAULT_POLICY) -> bool:
    """Sampled converse-pair test: every nonnegative combination a f + b g
    drawn is real-rooted.  Failure is definitive, success is evidence."""
    fp, gp = as_poly(f), as_poly(g)
    for name, p in (("f", fp), ("g", gp)):
        if degree(p) < 1:
            raise ValidationError(f"{name} must be non-constant")
        if not is_real_rooted(p, tol, policy).real_rooted:
            raise ValidationError(f"{name} is not real-rooted")
    n_samples = policy.combo_samples if samples is None else int(samples)
    rng = np.random.default_rng(seed)
    pairs = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.5)]
    theta = rng.uniform(0.0, np.pi / 2.0, size=n_samples)
    pairs.extend(zip(np.cos(theta), np.sin(theta)))
    for a, b in pairs:
        combo = as_poly(npp.polyadd(a * fp, b * gp))
        if degree(combo) < 1:
            continue
        if not is_real_rooted(combo, tol, policy).real_rooted:
            return False
    return True
