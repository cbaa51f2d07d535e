"""Closed-form quantities and regret bounds for uniform bandits.

Notation used throughout: ``S_i = b_i - a_i`` is an arm's span, ``Delta_i``
its gap to the best mean ``mu*``, and ``S_*`` the smallest span among the
optimal arms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .core import BanditInstance, InvalidParameterError, UniformArm

INF = math.inf
TAIL_TOL = 1e-12
_LOG_MAX = math.log(np.finfo(float).max) - 1
# relative slack for comparing two independently rounded closed forms
ROUNDING_SLACK = 8 * np.finfo(float).eps


def kl_uniform(f: UniformArm, g: UniformArm) -> float:
    """KL divergence of Unif(f) from Unif(g); ``math.inf`` unless supp f is inside supp g."""
    if g.a <= f.a and f.b <= g.b:
        return math.log(g.span() / f.span())
    return INF


def kl_infimum_to_mean(arm: UniformArm, mu_star: float) -> float:
    """Smallest ``kl_uniform(arm, g)`` over uniforms ``g`` with mean at least ``mu_star``."""
    gap = mu_star - arm.mean()
    if gap < 0:
        raise InvalidParameterError(f"mu_star={mu_star} is below the arm mean {arm.mean()}")
    return math.log1p(2 * gap / arm.span())


def m_bk(instance: BanditInstance) -> float:
    """Lower-bound constant: ``sum Delta_i / ln(1 + 2 Delta_i / S_i)`` over suboptimal arms."""
    return sum(mbk_terms(instance).values())


def mbk_terms(instance: BanditInstance) -> dict[int, float]:
    mu = instance.mu_star()
    return {i: instance.delta(i) / kl_infimum_to_mean(instance.arms[i], mu) for i in instance.suboptimal_arms()}


@dataclass(frozen=True)
class EpsilonDeltaChoice:
    """Per-arm slack ``(eps_i, delta_i)``; entries for optimal arms are ignored."""

    eps: tuple[float, ...]
    delta: tuple[float, ...]

    @classmethod
    def uniform(cls, instance: BanditInstance, eps: float, delta: float) -> "EpsilonDeltaChoice":
        n = instance.n_arms
        return cls((float(eps),) * n, (float(delta),) * n)

    @classmethod
    def from_lists(cls, instance: BanditInstance, eps: Sequence[float], delta: Sequence[float]) -> "EpsilonDeltaChoice":
        n = instance.n_arms
        eps, delta = list(eps), list(delta)
        if len(eps) == 1:
            eps = eps * n
        if len(delta) == 1:
            delta = delta * n
        if len(eps) != n or len(delta) != n:
            raise InvalidParameterError(
                f"eps and delta need 1 or {n} entries, got {len(eps)} and {len(delta)}")
        return cls(tuple(map(float, eps)), tuple(map(float, delta)))

    def validate(self, instance: BanditInstance) -> None:
        if len(self.eps) != instance.n_arms or len(self.delta) != instance.n_arms:
            raise InvalidParameterError("eps/delta lists must have one entry per arm")
        s_star = instance.s_star()
        for i in instance.suboptimal_arms():
            e, d = self.eps[i], self.delta[i]
            s_i, gap = instance.arms[i].span(), instance.delta(i)
            if not 0 < e < s_star:
                raise InvalidParameterError(f"arm {i}: need 0 < eps < S_* = {s_star:g}, got eps={e:g}")
            if not 0 < d < s_i:
                raise InvalidParameterError(f"arm {i}: need 0 < delta < S_i = {s_i:g}, got delta={d:g}")
            if not e + d < gap:
                raise InvalidParameterError(
                    f"arm {i}: need eps + delta < Delta_i = {gap:g}, got eps + delta = {e + d:g}")


def _check_n(instance: BanditInstance, n: float) -> None:
    if n < 3 * instance.n_arms:
        raise InvalidParameterError(f"bound holds for n >= 3N = {3 * instance.n_arms}, got n={n}")


def theorem1_terms(instance: BanditInstance, choice: EpsilonDeltaChoice) -> dict[int, tuple[float, float]]:
    """Per suboptimal arm: (coefficient of ln n, constant term)."""
    choice.validate(instance)
    s_star = instance.s_star()
    out = {}
    for i in instance.suboptimal_arms():
        e, d = choice.eps[i], choice.delta[i]
        s_i, gap = instance.arms[i].span(), instance.delta(i)
        coef = gap / math.log1p(2 * gap / s_i * (1 - (e + d) / gap))
        const = (s_i / d + 3 / 8 * s_star**3 / e**3 + 18) * gap
        out[i] = (coef, const)
    return out


def theorem1_coefficient(instance: BanditInstance, choice: EpsilonDeltaChoice) -> float:
    return sum(c for c, _ in theorem1_terms(instance, choice).values())


def theorem1_bound(instance: BanditInstance, choice: EpsilonDeltaChoice, n: float) -> float:
    """Finite-time regret bound of the ucb-uniform policy, valid for ``n >= 3N``."""
    _check_n(instance, n)
    terms = theorem1_terms(instance, choice)
    logn = math.log(n)
    return sum(coef * logn + const for coef, const in terms.values())


def theorem3_terms(instance: BanditInstance) -> dict[int, tuple[float, float, float, float]]:
    """Per suboptimal arm: coefficients of ``ln n``, ``(ln n)^(3/4)``, ``(ln n)^(1/4)`` and 1."""
    s_star = instance.s_star()
    out = {}
    for i in instance.suboptimal_arms():
        s_i, gap = instance.arms[i].span(), instance.delta(i)
        g = min(s_star, s_i, gap / 4)
        lg = math.log1p(2 * gap / s_i)
        out[i] = (
            gap / lg,
            8 * g * gap / ((s_i + 2 * gap) * lg**2) + 3 * s_star**3 * gap / (8 * g**3),
            s_i * gap / g,
            18 * gap,
        )
    return out


def theorem3_bound(instance: BanditInstance, n: float) -> float:
    """Slack-free regret bound with ``G_i = min(S_*, S_i, Delta_i / 4)``."""
    _check_n(instance, n)
    logn = math.log(n)
    powers = (logn, logn**0.75, logn**0.25, 1.0)
    return sum(sum(c * p for c, p in zip(coefs, powers)) for coefs in theorem3_terms(instance).values())


@dataclass(frozen=True)
class RemainderParams:
    p: float
    q: float

    def __post_init__(self) -> None:
        if not 0 < self.p < 1:
            raise InvalidParameterError(f"need 0 < p < 1, got p={self.p}")
        if not self.q > 1:
            raise InvalidParameterError(f"need q > 1, got q={self.q}")


def remainder_components(params: RemainderParams, alpha: float) -> tuple[float, float, float]:
    """``(C1, C2, C1 * alpha**(-1 - q/p) + C2)``.

    The last entry bounds ``sum_t t^-1 sum_s t^(-1/s) (1 - alpha)^s``.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"need 0 < alpha < 1, got alpha={alpha}")
    p, q = params.p, params.q
    r = q / p
    k = (p + q) / (1 - p)
    log_c1 = r * (math.log(r) - 1) - math.log(q - 1)
    log_c2 = k * (math.log(k) - 1) - math.log(q - 1)
    log_lead = log_c1 - (1 + r) * math.log(alpha)
    if max(log_c2, log_lead) > _LOG_MAX:
        raise InvalidParameterError(
            f"remainder bound for p={p:g}, q={q:g}, alpha={alpha:g} exceeds double range "
            f"(log C1 = {log_c1:.1f}, log C2 = {log_c2:.1f})")
    return math.exp(log_c1), math.exp(log_c2), math.exp(log_lead) + math.exp(log_c2)


def minmax_joint_density(k: int, w: float, v: float, arm: UniformArm) -> float:
    """Joint density of (max, min) of ``k`` i.i.d. draws from ``arm``."""
    if k < 2:
        raise InvalidParameterError(f"need k >= 2, got k={k}")
    if not arm.a <= v <= w <= arm.b:
        return 0.0
    return k * (k - 1) * arm.span() ** (-k) * (w - v) ** (k - 2)


def minmax_joint_cdf_corner(k: int, w: float, v: float, arm: UniformArm) -> float:
    """``P(min >= v, max <= w)`` for ``k`` draws, i.e. ``((w - v) / S)^k``."""
    if k < 1:
        raise InvalidParameterError(f"need k >= 1, got k={k}")
    if not arm.a <= v <= w <= arm.b:
        raise InvalidParameterError(f"need a <= v <= w <= b, got v={v}, w={w} on [{arm.a}, {arm.b}]")
    return ((w - v) / arm.span()) ** k


def index_underestimate_prob_bound(t: float, s: int, eps: float, optimal_arm: UniformArm) -> float:
    """Upper bound on ``P(u(t, s) < mu* - eps)`` for the ucb-uniform index of an optimal arm."""
    if s < 3:
        raise InvalidParameterError(f"need s >= 3, got s={s}")
    alpha = 2 * eps / optimal_arm.span()
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"need 0 < 2 eps / S < 1, got {alpha:g}")
    return 0.5 / t * t ** (-1 / (s - 2)) * (1 - alpha) ** s


# -- auxiliary inequalities --------------------------------------------------

def _truncation(alpha: float, tol: float = TAIL_TOL) -> int:
    """Smallest ``s`` with geometric tail ``(1 - alpha)^(s+1) / alpha < tol``."""
    s = math.ceil(math.log(tol * alpha) / math.log1p(-alpha) - 1)
    s = max(s, 1)
    while (1 - alpha) ** (s + 1) / alpha >= tol:
        s += 1
    return s


def _power_sum(x: float, lo: int, n: int) -> float:
    """``sum_{t=lo}^{n} t^(-x)`` for ``x > 1``."""
    if n < lo:
        return 0.0
    if n - lo < 20000:
        t = np.arange(lo, n + 1, dtype=np.float64)
        return float(np.sum(t ** (-x)))
    return float(special.zeta(x, lo) - special.zeta(x, n + 1))


def summation_lhs(alpha: float, n: int, t_start: int = 3, tol: float = TAIL_TOL) -> tuple[float, float]:
    """``sum_{t=t_start}^n t^-1 sum_{s>=1} t^(-1/s) (1-alpha)^s`` and an error bar.

    The inner series is cut at the first ``s`` whose geometric tail bound is
    below ``tol``; the returned error bar is that tail times ``sum 1/t``.
    """
    s_max = _truncation(alpha, tol)
    total = math.fsum((1 - alpha) ** s * _power_sum(1 + 1 / s, t_start, n) for s in range(1, s_max + 1))
    harmonic = float(special.digamma(n + 1) - special.digamma(t_start)) if n >= t_start else 0.0
    return total, (1 - alpha) ** (s_max + 1) / alpha * harmonic


@dataclass(frozen=True)
class InequalityReport:
    lhs: float
    rhs: float
    holds: bool
    error: float = 0.0

    def margin(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class Prop1Report(InequalityReport):
    half_lhs: float = 0.0
    half_rhs: float = 0.0
    half_holds: bool = True


def verify_prop1(alpha: float, n: int) -> Prop1Report:
    """Check ``sum_{t=3}^n t^-1 sum_s t^(-1/s)(1-alpha)^s <= 30 + 6/alpha^3``.

    Also checks the half-scaled variant used inside the regret proof,
    ``1/2 (1-alpha)^2 sum_{t=6}^n (...) <= (1-alpha)^2 (15 + 3/alpha^3)``.
    ``holds`` counts the truncation error bar against the inequality.
    """
    if not 0 < alpha < 1:
        raise InvalidParameterError(f"need 0 < alpha < 1, got alpha={alpha}")
    if n < 3:
        raise InvalidParameterError(f"need n >= 3, got n={n}")
    lhs, err = summation_lhs(alpha, n, 3)
    rhs = 30 + 6 / alpha**3
    inner6, err6 = summation_lhs(alpha, n, 6)
    shrink = (1 - alpha) ** 2
    half_lhs = 0.5 * shrink * inner6
    half_rhs = shrink * (15 + 3 / alpha**3)
    return Prop1Report(lhs, rhs, lhs + err <= rhs, err,
                       half_lhs, half_rhs, half_lhs + 0.5 * shrink * err6 <= half_rhs)


def verify_prop2(q: float, eps: float) -> InequalityReport:
    """Check ``1/ln(1+Q(1-eps)) <= 1/ln(1+Q) + eps/(1-eps) * Q/((1+Q) ln(1+Q)^2)``."""
    if not q > 0:
        raise InvalidParameterError(f"need Q > 0, got Q={q}")
    if not 0 <= eps < 1:
        raise InvalidParameterError(f"need 0 <= eps < 1, got eps={eps}")
    lq = math.log1p(q)
    lhs = 1 / math.log1p(q * (1 - eps))
    rhs = 1 / lq + eps / (1 - eps) * q / ((1 + q) * lq**2)
    # For small eps the true margin is O(eps^2) and drops below rounding noise.
    slack = ROUNDING_SLACK * rhs
    return InequalityReport(lhs, rhs, lhs <= rhs + slack, slack)


# -- numeric verifiers --------------------------------------------------------

def kl_infimum_grid_search(arm: UniformArm, mu_star: float, resolution: int = 41, levels: int = 12) -> float:
    """Grid-search the infimum of ``kl_uniform(arm, g)`` over ``g`` with mean >= ``mu_star``.

    Searches supports ``[a - x, b + y]`` with ``x, y >= 0`` on a grid that is
    repeatedly re-centred on the best feasible point and shrunk. Independent
    of the closed form in :func:`kl_infimum_to_mean`.
    """
    gap = mu_star - arm.mean()
    if gap < 0:
        raise InvalidParameterError(f"mu_star={mu_star} is below the arm mean {arm.mean()}")
    reach = arm.span() + 2 * gap + 1.0
    x_lo, x_hi, y_lo, y_hi = 0.0, reach, 0.0, reach + 2 * gap
    best, best_xy = INF, None
    for _ in range(levels):
        xs = np.linspace(x_lo, x_hi, resolution)
        ys = np.linspace(y_lo, y_hi, resolution)
        for x in xs:
            for y in ys:
                a, b = arm.a - x, arm.b + y
                if (a + b) / 2 < mu_star or not a < b:
                    continue
                kl = kl_uniform(arm, UniformArm(a, b))
                if kl < best:
                    best, best_xy = kl, (x, y)
        if best_xy is None:
            raise RuntimeError("grid search found no feasible support")
        hx, hy = 2 * (x_hi - x_lo) / (resolution - 1), 2 * (y_hi - y_lo) / (resolution - 1)
        x_lo, x_hi = max(0.0, best_xy[0] - hx), best_xy[0] + hx
        y_lo, y_hi = max(0.0, best_xy[1] - hy), best_xy[1] + hy
    return best


def minmax_density_mass(k: int, arm: UniformArm, v_lo: float | None = None, w_hi: float | None = None) -> float:
    """Quadrature of the (max, min) density over ``v_lo <= v <= w <= w_hi``."""
    from scipy import integrate

    v_lo = arm.a if v_lo is None else v_lo
    w_hi = arm.b if w_hi is None else w_hi
    if w_hi <= v_lo:
        return 0.0
    val, _ = integrate.dblquad(lambda w, v: minmax_joint_density(k, w, v, arm), v_lo, w_hi,
                               lambda v: v, lambda v: w_hi, epsabs=1e-13, epsrel=1e-12)
    return val


def sample_minmax(k: int, arm: UniformArm, size: int, rng: np.random.Generator,
                  batch: int = 250_000) -> tuple[np.ndarray, np.ndarray]:
    """``size`` independent (min, max) pairs of ``k`` draws from ``arm``."""
    v = np.empty(size)
    w = np.empty(size)
    for lo in range(0, size, batch):
        m = min(batch, size - lo)
        x = arm.a + arm.span() * rng.random((m, k))
        v[lo:lo + m] = x.min(axis=1)
        w[lo:lo + m] = x.max(axis=1)
    return v, w
