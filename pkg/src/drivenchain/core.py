"""Shared domain types and numerical utilities.

Everything downstream (exact measures, simulators, verifier) builds on the
pieces collected here: validated chain parameters, reproducible random
streams, harmonic numbers, the exponential integral E1, and a self-contained
adaptive Gauss-Kronrod quadrature with explicit convergence reporting.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

EULER_GAMMA = 0.57721566490153286061

__all__ = [
    "ChainParams",
    "make_rng",
    "spawn_rngs",
    "harmonic_number",
    "harmonic_prefix",
    "exp_integral_e1",
    "quadrature_1d",
    "QuadResult",
    "QuadratureError",
]


@dataclass(frozen=True)
class ChainParams:
    """Bulk size and reservoir parameters for both chain models.

    The particle chain is driven by reservoir parameters ``beta_a <= beta_b``
    in (0, 1); the associated densities ``rho = beta / (1 - beta)`` are
    derived, never stored, so the two cannot drift apart.  The energy chain
    uses reservoir temperatures ``t_a <= t_b``.  Equal boundary values are
    allowed and describe the reversible equilibrium case.
    """

    n: int
    beta_a: float = 0.5
    beta_b: float = 0.5
    t_a: float = 1.0
    t_b: float = 1.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (0.0 < self.beta_a <= self.beta_b < 1.0):
            raise ValueError(
                f"need 0 < beta_a <= beta_b < 1, got ({self.beta_a}, {self.beta_b})"
            )
        if not (0.0 < self.t_a <= self.t_b) or not math.isfinite(self.t_b):
            raise ValueError(f"need 0 < t_a <= t_b < inf, got ({self.t_a}, {self.t_b})")

    @property
    def rho_a(self) -> float:
        return self.beta_a / (1.0 - self.beta_a)

    @property
    def rho_b(self) -> float:
        return self.beta_b / (1.0 - self.beta_b)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator from a 64-bit seed; same seed, same trajectory."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def spawn_rngs(seed: int, n: int) -> list[np.random.Generator]:
    """n statistically independent child streams of one root seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


# ---------------------------------------------------------------------------
# Harmonic numbers
# ---------------------------------------------------------------------------

HARMONIC_CACHE_LIMIT = 1_000_000

# _harmonic[j] == H(j); grown geometrically on demand up to the cache limit.
_harmonic = np.zeros(1024)
_harmonic[1:] = np.cumsum(1.0 / np.arange(1, 1024))


def _grow_harmonic(n: int) -> None:
    global _harmonic
    top = len(_harmonic)
    new_top = min(max(2 * top, n + 1), HARMONIC_CACHE_LIMIT + 1)
    ext = np.cumsum(1.0 / np.arange(top, new_top))
    _harmonic = np.concatenate([_harmonic, _harmonic[-1] + ext])


def harmonic_number(n: int) -> float:
    """H(n) = sum_{k=1}^{n} 1/k, with H(0) = 0.

    Exact cached partial sums up to ``HARMONIC_CACHE_LIMIT``; beyond that the
    asymptotic expansion log n + gamma + 1/(2n) - 1/(12 n^2), whose truncation
    error (~1/(120 n^4)) is far below 1e-12 in that range.
    """
    if n < 0:
        raise ValueError(f"harmonic_number needs n >= 0, got {n}")
    if n <= HARMONIC_CACHE_LIMIT:
        if n >= len(_harmonic):
            _grow_harmonic(n)
        return float(_harmonic[n])
    return math.log(n) + EULER_GAMMA + 1.0 / (2.0 * n) - 1.0 / (12.0 * n * n)


def harmonic_prefix(n: int) -> np.ndarray:
    """View of the cached prefix sums [H(0), H(1), ..., H(n)], n within cache."""
    if n > HARMONIC_CACHE_LIMIT:
        raise ValueError(f"prefix view only cached up to {HARMONIC_CACHE_LIMIT}")
    if n >= len(_harmonic):
        _grow_harmonic(n)
    return _harmonic[: n + 1]


# ---------------------------------------------------------------------------
# Exponential integral E1
# ---------------------------------------------------------------------------

def exp_integral_e1(x: float) -> float:
    """E1(x) = integral of exp(-t)/t from x to infinity, x > 0.

    Power series for x <= 1, modified-Lentz continued fraction for x > 1;
    both converge to well under 1e-10 relative error on their branches.
    """
    if not x > 0.0:
        raise ValueError(f"exp_integral_e1 needs x > 0, got {x}")
    if x <= 1.0:
        # E1(x) = -gamma - log x + sum_{k>=1} (-1)^{k+1} x^k / (k * k!)
        total = -EULER_GAMMA - math.log(x)
        term = 1.0
        for k in range(1, 60):
            term *= -x / k
            contrib = -term / k
            total += contrib
            if abs(contrib) < 1e-18 * max(abs(total), 1e-300):
                break
        return total
    # Continued fraction E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 200):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h * math.exp(-x)


# ---------------------------------------------------------------------------
# Weighted selection over dynamic rates
# ---------------------------------------------------------------------------

class FenwickTree:
    """Binary indexed tree over non-negative weights with prefix search.

    Supports O(log n) point updates and O(log n) inversion of the cumulative
    weight function, which is what an event-driven simulator needs to pick a
    channel proportionally to its rate when the channel count is large.
    """

    __slots__ = ("n", "tree")

    def __init__(self, weights: Sequence[float]):
        self.n = len(weights)
        self.tree = [0.0] * (self.n + 1)
        for i, w in enumerate(weights):
            self.add(i, w)

    def add(self, i: int, delta: float) -> None:
        i += 1
        while i <= self.n:
            self.tree[i] += delta
            i += i & (-i)

    def total(self) -> float:
        i = self.n
        s = 0.0
        while i > 0:
            s += self.tree[i]
            i &= i - 1
        return s

    def search(self, u: float) -> tuple[int, float]:
        """Index whose cumulative-weight slot [C_i, C_{i+1}) holds u, plus the offset.

        The non-strict comparison skips zero-weight entries even at u == 0,
        matching the linear-scan convention u < C_{i+1}.
        """
        idx = 0
        bit = 1
        while bit << 1 <= self.n:
            bit <<= 1
        while bit:
            nxt = idx + bit
            if nxt <= self.n and self.tree[nxt] <= u:
                idx = nxt
                u -= self.tree[nxt]
            bit >>= 1
        return min(idx, self.n - 1), u


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature (G7, K15)
# ---------------------------------------------------------------------------

# Nodes/weights on [-1, 1]; Gauss-7 nodes are the odd-indexed Kronrod nodes.
_XGK = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])  # 15 ascending nodes
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])      # Kronrod weights, same order
_GW = np.zeros(15)
_GW[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])  # Gauss weights at shared nodes


class QuadResult(NamedTuple):
    value: float
    error: float
    intervals: int


class QuadratureError(RuntimeError):
    """Adaptive subdivision ran out of budget before reaching the tolerance."""

    def __init__(self, message: str, value: float, error: float) -> None:
        super().__init__(message)
        self.value = value
        self.error = error


def _panel(f: Callable, a: float, b: float, vectorized: bool) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x = mid + half * _NODES
    if vectorized:
        fx = np.asarray(f(x), dtype=float)
    else:
        fx = np.array([f(float(t)) for t in x], dtype=float)
    if not np.all(np.isfinite(fx)):
        raise ValueError(f"integrand returned non-finite values on [{a}, {b}]")
    resk = half * float(fx @ _KW)
    resg = half * float(fx @ _GW)
    # QUADPACK-style scaled error estimate.
    mean = resk / (b - a) if b != a else 0.0
    resasc = half * float(np.abs(fx - mean) @ _KW)
    err = abs(resk - resg)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    return resk, err


def quadrature_1d(
    f: Callable,
    a: float,
    b: float,
    tol: float = 1e-10,
    limit: int = 2048,
    vectorized: bool = True,
) -> QuadResult:
    """Adaptive estimate of the integral of f over [a, b].

    ``f`` is called on a numpy array of nodes when ``vectorized`` (the
    default), otherwise on scalar floats.  Returns the estimate together with
    an error bound; raises :class:`QuadratureError` when the subdivision
    budget is exhausted, never silently truncates.
    """
    if a > b:
        raise ValueError(f"need a <= b, got ({a}, {b})")
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    val, err = _panel(f, a, b, vectorized)
    heap = [(-err, 0, a, b, val, err)]
    total_val, total_err = val, err
    count = 1
    tick = 1
    min_width = 64.0 * np.finfo(float).eps * (b - a)
    while total_err > tol:
        neg_err, _, pa, pb, pval, perr = heapq.heappop(heap)
        if pb - pa < min_width:
            # Roundoff floor: keep the panel's error on the books and see if
            # the remaining panels still get us under tolerance.
            heapq.heappush(heap, (0.0, tick, pa, pb, pval, perr))
            tick += 1
            if all(h[0] == 0.0 for h in heap):
                raise QuadratureError(
                    f"quadrature stalled at roundoff with error {total_err:.3e} > tol {tol:.3e}",
                    total_val, total_err,
                )
            continue
        if count >= limit:
            raise QuadratureError(
                f"quadrature exceeded {limit} panels with error {total_err:.3e} > tol {tol:.3e}",
                total_val, total_err,
            )
        pm = 0.5 * (pa + pb)
        lval, lerr = _panel(f, pa, pm, vectorized)
        rval, rerr = _panel(f, pm, pb, vectorized)
        total_val += lval + rval - pval
        total_err += lerr + rerr - perr
        heapq.heappush(heap, (-lerr, tick, pa, pm, lval, lerr))
        heapq.heappush(heap, (-rerr, tick + 1, pm, pb, rval, rerr))
        tick += 2
        count += 1
    return QuadResult(total_val, total_err, count)


def ordered_simplex_integral(
    factors: Sequence[Callable[[np.ndarray], np.ndarray]],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    extra: Callable[[np.ndarray], float] | None = None,
    sup_bound: float = 1.0,
) -> tuple[float, float]:
    """Iterated integral of a product over the ordered box lo <= m_1 <= ... <= m_n <= hi.

    ``factors[x]`` maps an array of m values to the x-th per-coordinate factor.
    With ``extra`` given (a map from a (batch, n) matrix of full coordinate
    vectors to a (batch,) array), the integrand is
    extra(m) * prod_x factors[x](m_x); that path handles integrands that do
    not factorize.  ``sup_bound`` is a sup-norm bound on each factor, used to
    propagate inner error estimates outward.  Returns (value, error).
    """
    n = len(factors)
    if n == 0:
        return 1.0, 0.0
    width = hi - lo
    level_tol = tol / (2.0 * (1.0 + width * sup_bound)) ** n

    if extra is not None:
        # Non-separable integrand: recurse carrying the fixed outer coordinates.
        def nested(j: int, upper: float, tail: tuple[float, ...]) -> tuple[float, float]:
            errs = [0.0]
            if j == 1:
                def g1(m_arr: np.ndarray) -> np.ndarray:
                    vecs = np.empty((len(m_arr), n))
                    vecs[:, 0] = m_arr
                    vecs[:, 1:] = tail
                    return extra(vecs) * factors[0](m_arr)

                r = quadrature_1d(g1, lo, upper, level_tol)
                return r.value, r.error

            def g(m: float) -> float:
                v, e = nested(j - 1, m, (m,) + tail)
                errs.append(e)
                return float(factors[j - 1](np.array([m]))[0]) * v

            r = quadrature_1d(g, lo, upper, level_tol, vectorized=False)
            return r.value, r.error + (upper - lo) * sup_bound * max(errs)

        return nested(n, hi, ())

    def nested_sep(j: int, upper: float) -> tuple[float, float]:
        if j == 1:
            r = quadrature_1d(factors[0], lo, upper, level_tol)
            return r.value, r.error
        errs = [0.0]

        def g(m: float) -> float:
            v, e = nested_sep(j - 1, m)
            errs.append(e)
            return float(factors[j - 1](np.array([m]))[0]) * v

        r = quadrature_1d(g, lo, upper, level_tol, vectorized=False)
        return r.value, r.error + (upper - lo) * sup_bound * max(errs)

    return nested_sep(n, hi)
