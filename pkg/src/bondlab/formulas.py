"""Closed-form quantities for dominating sets of G(n, p), evaluated in log space.

Log-space values are plain floats holding a natural logarithm, with
``-inf`` standing for zero. Binomial coefficients go through exact integer
``math.comb`` where that is cheap and through ``lgamma`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError
from .graph import RandomSource, as_generator

__all__ = [
    "DEFAULT_EPSILON",
    "FormulaContext",
    "p_hat",
    "log_comb",
    "log_f",
    "compute_r",
    "r_closed_form",
    "phi",
    "chernoff_lower_tail",
    "chernoff_lower_tail_weak",
    "chernoff_upper_tail",
    "binom_log_pmf",
    "binom_cdf_below",
    "q_i",
    "log_ewi_over_pi",
    "expected_damage",
    "expected_heavy_damage",
    "expected_heavy_count",
    "estimate_pi",
    "density_prefix",
    "logsumexp",
]

DEFAULT_EPSILON = 0.1
_EXACT_COMB_LIMIT = 4000


def logsumexp(values: Iterable[float]) -> float:
    vals = [v for v in values if v != -math.inf]
    if not vals:
        return -math.inf
    top = max(vals)
    return top + math.log(math.fsum(math.exp(v - top) for v in vals))


def p_hat(p: float) -> float:
    """log(1 / (1 - p))."""
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p_hat needs p in [0, 1), got {p}")
    return -math.log1p(-p)


def log_comb(n: int, k: int) -> float:
    if not 0 <= k <= n:
        return -math.inf
    k = min(k, n - k)
    if k <= _EXACT_COMB_LIMIT:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _log_one_minus_q_pow(q_log: float, k: int) -> float:
    """log(1 - q**k) given log q (q = 1 - p)."""
    if k == 0:
        return -math.inf
    t = k * q_log
    if t == 0.0:
        return -math.inf
    return math.log(-math.expm1(t))


def _log_q(p: float) -> float:
    return math.log1p(-p) if p < 1.0 else -math.inf


def log_f(n: int, k: int, p: float) -> float:
    """log of the expected number of size-k dominating sets in G(n, p)."""
    if not 1 <= k <= n:
        raise DomainError(f"k must lie in [1, {n}], got {k}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if k == n:
        return 0.0
    return log_comb(n, k) + (n - k) * _log_one_minus_q_pow(_log_q(p), k)


def _check_pn(n: int, p: float) -> None:
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie strictly between 0 and 1, got {p}")
    if p * n <= 1.0:
        raise DomainError(f"r is undefined unless pn > 1 (got pn = {p * n:g})")


def compute_r(n: int, p: float) -> int:
    """Smallest k with f(n, k, p) > 1/(pn), by linear scan from k = 1."""
    _check_pn(n, p)
    threshold = -math.log(p * n)
    for k in range(1, n + 1):
        if log_f(n, k, p) > threshold:
            return k
    raise AssertionError("unreachable: f(n, n, p) = 1 > 1/(pn)")


def r_closed_form(n: int, p: float) -> int:
    """Asymptotic estimate ceil(log(p_hat * n / log(pn)**2) / p_hat), at least 1.

    Lower-order corrections are dropped, so this may differ from
    :func:`compute_r` by one at finite n.
    """
    _check_pn(n, p)
    if p * n <= math.e:
        raise DomainError(f"the closed form needs pn > e (got pn = {p * n:g})")
    ph = p_hat(p)
    value = math.log(ph * n / math.log(p * n) ** 2) / ph
    return max(1, math.ceil(value))


def phi(x: float) -> float:
    """(1 + x) log(1 + x) - x, with phi(-1) = 1 and +inf below -1."""
    if x < -1.0:
        return math.inf
    if x == -1.0:
        return 1.0
    return (1.0 + x) * math.log1p(x) - x


def chernoff_lower_tail(mu: float, delta: float) -> float:
    """Bound on Pr[W < (1 - delta) mu]: exp(-mu * phi(-delta))."""
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"lower tail needs 0 < delta < 1, got {delta}")
    return math.exp(-mu * phi(-delta))


def chernoff_lower_tail_weak(mu: float, delta: float) -> float:
    """The looser form exp(-delta**2 mu / 2) of the lower-tail bound."""
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"lower tail needs 0 < delta < 1, got {delta}")
    return math.exp(-delta * delta * mu / 2.0)


def chernoff_upper_tail(mu: float, delta: float) -> float:
    """Bound on Pr[W > (1 + delta) mu]: exp(-delta**2 mu / (2 + delta))."""
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    if not delta > 0.0:
        raise DomainError(f"upper tail needs delta > 0, got {delta}")
    return math.exp(-delta * delta * mu / (2.0 + delta))


def binom_log_pmf(m: int, j: int, p: float) -> float:
    if not 0 <= j <= m:
        return -math.inf
    lp = math.log(p) if p > 0 else -math.inf
    lq = _log_q(p)
    terms = log_comb(m, j)
    if j:
        terms += j * lp
    if m - j:
        terms += (m - j) * lq
    return terms


def binom_cdf_below(m: int, t: int, p: float) -> float:
    """Pr(Bin(m, p) < t) by direct summation of the pmf."""
    if t <= 0:
        return 0.0
    if t > m:
        return 1.0
    return min(1.0, math.exp(logsumexp(binom_log_pmf(m, j, p) for j in range(t))))


@dataclass(frozen=True)
class FormulaContext:
    """Analytic state for one (n, p, epsilon) point.

    ``r`` is normally derived by :func:`compute_r`; ``build(..., r=...)``
    overrides it for experiments at a chosen set size.
    """

    n: int
    p: float
    epsilon: float
    p_hat: float
    r: int
    rho: float
    L: int

    @classmethod
    def build(cls, n: int, p: float, epsilon: float = DEFAULT_EPSILON, r: int | None = None) -> FormulaContext:
        # epsilon <= 1 keeps L = floor(eps^2 p r) <= r
        if not 0 < epsilon <= 1:
            raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
        if not 0.0 < p < 1.0:
            raise DomainError(f"p must lie strictly between 0 and 1, got {p}")
        if r is None:
            r = compute_r(n, p)
        elif not 1 <= r <= n:
            raise DomainError(f"r must lie in [1, {n}], got {r}")
        rho = epsilon * epsilon
        L = math.floor(rho * p * r)
        return cls(n=n, p=p, epsilon=epsilon, p_hat=p_hat(p), r=r, rho=rho, L=L)


def q_i(ctx: FormulaContext, i: int) -> float:
    """Sum over j < min(i, L) of Pr(Bin(i-1,p)=j) * Pr(Bin(r-i,p) < L-j)**2."""
    if not 1 <= i <= ctx.r:
        raise DomainError(f"i must lie in [1, {ctx.r}], got {i}")
    top = min(i - 1, ctx.L - 1)
    if top < 0:
        return 0.0
    logs = []
    for j in range(top + 1):
        tail = binom_cdf_below(ctx.r - i, ctx.L - j, ctx.p)
        if tail > 0:
            logs.append(binom_log_pmf(i - 1, j, ctx.p) + 2.0 * math.log(tail))
    return min(1.0, math.exp(logsumexp(logs)))


def log_ewi_over_pi(ctx: FormulaContext, i: int) -> float:
    """log(E W_i / P_i): ordered pairs of r-sets meeting in i vertices that
    dominate all vertices outside their union."""
    n, r, p = ctx.n, ctx.r, ctx.p
    if not 0 <= i <= r:
        raise DomainError(f"i must lie in [0, {r}], got {i}")
    outside = n - 2 * r + i
    if outside < 0:
        raise DomainError(f"n - 2r + i = {outside} < 0: no room for the pair of sets")
    multinomial = (
        math.lgamma(n + 1)
        - math.lgamma(i + 1)
        - 2.0 * math.lgamma(r - i + 1)
        - math.lgamma(outside + 1)
    )
    if n <= _EXACT_COMB_LIMIT:
        exact = math.factorial(n) // (
            math.factorial(i) * math.factorial(r - i) ** 2 * math.factorial(outside)
        )
        multinomial = math.log(exact)
    if outside == 0:
        return multinomial
    lq = _log_q(p)
    a = math.exp(i * lq) if i else 1.0
    b = math.exp((r - i) * lq) if r - i else 1.0
    # 1 - a + a(1-b)^2 == 1 - a*b*(2-b)
    inner = a * b * (2.0 - b)
    bracket = math.log1p(-inner) if inner < 1.0 else -math.inf
    return multinomial + outside * bracket


def expected_damage(ctx: FormulaContext) -> float:
    """log E Z for one directed pair: log((n-r)/(p n (n-1))) + log f(n, r, p)."""
    n, r, p = ctx.n, ctx.r, ctx.p
    if n - r <= 0:
        return -math.inf
    return math.log(n - r) - math.log(p) - math.log(n) - math.log(n - 1) + log_f(n, r, p)


def expected_heavy_damage(ctx: FormulaContext) -> float:
    """log E of the heavy part (buckets j <= L) of one directed-pair damage."""
    n, r, p, L = ctx.n, ctx.r, ctx.p, ctx.L
    if L < 1 or n - r <= 0:
        return -math.inf
    # Pr(1 <= Bin(r, p) <= L) / (1 - (1-p)^r)
    mass = logsumexp(binom_log_pmf(r, j, p) for j in range(1, min(L, r) + 1))
    return expected_damage(ctx) + mass - _log_one_minus_q_pow(_log_q(p), r)


def expected_heavy_count(ctx: FormulaContext) -> float:
    """log of Pr(Bin(r-1, p) < L) * E_{G(n-1,p)} Z_v.

    This is the expected unweighted number of sets in the heavy buckets of a
    directed pair; the 1/j-weighted heavy damage is at most this.
    """
    n, r, p, L = ctx.n, ctx.r, ctx.p, ctx.L
    if L < 1 or r > n - 1:
        return -math.inf
    tail = binom_cdf_below(r - 1, L, p)
    if tail <= 0:
        return -math.inf
    return math.log(tail) + math.log(r) - math.log(n - 1) + log_f(n - 1, r, p)


def estimate_pi(
    n: int,
    p: float,
    r: int,
    i: int,
    samples: int,
    rng: RandomSource | np.random.Generator | int,
    chunk: int = 4096,
) -> tuple[float, float]:
    """Monte Carlo estimate of P_i with its binomial standard error.

    Two r-sets D, D' share i vertices. They dominate each other when every
    vertex of D - D' has a neighbour in D' and every vertex of D' - D has a
    neighbour in D; shared vertices impose no condition. Only the edges
    between the private parts and the rest of D and D' matter, so only those
    are sampled.
    """
    if not 0 <= i <= r <= n:
        raise DomainError(f"need 0 <= i <= r <= n, got i={i}, r={r}, n={n}")
    if samples < 1:
        raise DomainError(f"samples must be at least 1, got {samples}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    s = r - i
    if s == 0:
        return 1.0, 0.0
    gen = as_generator(rng)
    hits = 0
    done = 0
    while done < samples:
        batch = min(chunk, samples - done)
        to_shared_b = gen.random((batch, s, i)) < p
        cross = gen.random((batch, s, s)) < p
        to_shared_c = gen.random((batch, s, i)) < p
        b_ok = to_shared_b.any(axis=2) | cross.any(axis=2)
        c_ok = to_shared_c.any(axis=2) | cross.any(axis=1)
        hits += int((b_ok.all(axis=1) & c_ok.all(axis=1)).sum())
        done += batch
    est = hits / samples
    return est, math.sqrt(est * (1.0 - est) / samples)


def density_prefix(members: Iterable[int] | Callable[[int], bool], n: int) -> Fraction:
    """|I ∩ {1..n}| / n as an exact fraction.

    ``members`` is either a predicate on positive integers or an iterable in
    increasing order (which may be infinite; it is read only up to ``n``).
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if callable(members):
        count = sum(1 for k in range(1, n + 1) if members(k))
    else:
        count = 0
        for k in members:
            if k > n:
                break
            if k >= 1:
                count += 1
    return Fraction(count, n)
