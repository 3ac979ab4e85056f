"""Exponent landscape, reaction terms and the Liouville classifier.

The critical exponent for  -lap_p u = u^alpha  on an n-manifold is

    p_s = ((n+1) p - n) / (n - p)^+      (= +inf when p >= n),

below which no positive entire solution exists on nonnegative Ricci;
at p_s the explicit Emden bubble solves the equation on R^n.  This
module encodes p_s together with the subsidiary thresholds from the
surrounding literature, the subcriticality conditions on a reaction
term f, a decision procedure reproducing the Liouville theorems'
hypotheses, and the bubble with its pointwise residual.

Infinite thresholds are genuine IEEE infinities (math.inf), never
sentinel magnitudes; comparisons against them are total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InputError, PreconditionError

__all__ = [
    "critical_exponent",
    "ExponentRecord",
    "threshold_table",
    "ReactionTerm",
    "is_subcritical",
    "satisfies_f2",
    "minimal_delta0",
    "GradientEstimateParams",
    "HarnackConfig",
    "classify_liouville",
    "LiouvilleVerdict",
    "emden_bubble",
    "emden_radial_jet",
    "emden_residual",
    "bubble_coefficient_audit",
]


def critical_exponent(n: int, p: float):
    """p_s = ((n+1)p - n)/(n-p)^+, +inf for p >= n."""
    if n < 2 or p <= 1:
        raise DomainError("need n >= 2 and p > 1")
    if p >= n:
        return math.inf
    return ((n + 1) * p - n) / (n - p)


@dataclass(frozen=True)
class ExponentRecord:
    """One threshold: closed-form value plus its validity constraints."""

    name: str
    value: float
    validity: str
    valid: bool


def _pos_part_div(num: float, den: float) -> float:
    return num / den if den > 0 else math.inf


def threshold_table(n: int, p: float):
    """The six thresholds of the exponent landscape at (n, p).

    ps              ((n+1)p-n)/(n-p)^+          optimal nonexistence range
    wang_wei        (n+3)(p-1)/(n-1)            gradient-estimate range
    serrin_zou_ineq n(p-1)/(n-p)^+              differential-inequality range
    cheng_yau_li    (n+1)/(n-1)+2/sqrt(n(n-2))  semilinear (p=2) predecessor
    main3_ii        2((n+1)p-n)(p-1)/((n+1)p-2n)^+   growth-condition branch
    main2_C         2(p-1)^2(3p-2)/((4-3p)^+(2-p))   two-dimensional branch
    """
    if n < 2 or p <= 1:
        raise DomainError("need n >= 2 and p > 1")
    records = [
        ExponentRecord("ps", critical_exponent(n, p), "n >= 2, p > 1", True),
        ExponentRecord(
            "wang_wei", (n + 3) * (p - 1) / (n - 1), "n >= 2, p > 1", True
        ),
        ExponentRecord(
            "serrin_zou_ineq",
            _pos_part_div(n * (p - 1), n - p),
            "differential inequality, p-1 < alpha",
            True,
        ),
        ExponentRecord(
            "cheng_yau_li",
            (n + 1) / (n - 1) + 2.0 / math.sqrt(n * (n - 2)) if n > 2 else math.inf,
            "p = 2, n > 2",
            p == 2 and n > 2,
        ),
        ExponentRecord(
            "main3_ii",
            _pos_part_div(2 * ((n + 1) * p - n) * (p - 1), (n + 1) * p - 2 * n),
            "p > n/2",
            p > n / 2,
        ),
        ExponentRecord(
            "main2_C",
            _pos_part_div(2 * (p - 1) ** 2 * (3 * p - 2), (4 - 3 * p) * (2 - p))
            if p < 2
            else math.inf,
            "n = 2, 1 < p < 2",
            n == 2 and 1 < p < 2,
        ),
    ]
    return records


# ----------------------------------------------------------------------
# reaction terms
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ReactionTerm:
    """The nonlinearity f with derivative, family tag and metadata.

    family in {pure_power, power_log, two_power, rational,
    linear_minus_power, zero, custom}.  ``alpha`` is the declared
    subcritical exponent; ``sign_class`` one of nonnegative / positive /
    nonpositive / mixed.  ``margin`` evaluates alpha*f(t) - t*f'(t)
    analytically when the family admits a closed form (closing the gap
    the sampling grid leaves open).
    """

    family: str
    alpha: float
    f: Callable
    fprime: Callable
    sign_class: str
    params: dict = field(default_factory=dict)
    margin: Optional[Callable] = None

    # -- constructors ---------------------------------------------------

    @staticmethod
    def pure_power(alpha: float) -> "ReactionTerm":
        return ReactionTerm(
            "pure_power",
            alpha,
            lambda t: np.power(t, alpha),
            lambda t: alpha * np.power(t, alpha - 1.0),
            "nonnegative" if alpha <= 0 else "positive",
            {"alpha": alpha},
            margin=lambda t, a: (a - alpha) * np.power(t, alpha),
        )

    @staticmethod
    def negated_power(alpha: float) -> "ReactionTerm":
        return ReactionTerm(
            "negated_power",
            alpha,
            lambda t: -np.power(t, alpha),
            lambda t: -alpha * np.power(t, alpha - 1.0),
            "nonpositive",
            {"alpha": alpha},
            margin=lambda t, a: -(a - alpha) * np.power(t, alpha),
        )

    @staticmethod
    def power_log(alpha: float, beta: float) -> "ReactionTerm":
        def f(t):
            return np.power(t, alpha) * np.log1p(t) ** beta

        def fp(t):
            lg = np.log1p(t)
            return np.power(t, alpha - 1.0) * lg ** (beta - 1.0) * (
                alpha * lg + beta * t / (1.0 + t)
            )

        def margin(t, a):
            lg = np.log1p(t)
            return np.power(t, alpha) * lg ** (beta - 1.0) * (
                (a - alpha) * lg - beta * t / (1.0 + t)
            )

        return ReactionTerm(
            "power_log", alpha, f, fp,
            "nonnegative" if beta <= 0 or alpha > 0 else "mixed",
            {"alpha": alpha, "beta": beta}, margin=margin,
        )

    @staticmethod
    def two_power(alpha: float, a_coef: float, beta: float) -> "ReactionTerm":
        def f(t):
            return np.power(t, alpha) + a_coef * np.power(t, beta)

        def fp(t):
            return alpha * np.power(t, alpha - 1.0) + a_coef * beta * np.power(
                t, beta - 1.0
            )

        sign = "positive" if a_coef >= 0 and alpha > 0 and beta > 0 else "mixed"
        return ReactionTerm(
            "two_power", alpha, f, fp, sign,
            {"alpha": alpha, "a": a_coef, "beta": beta},
            margin=lambda t, a: (a - alpha) * np.power(t, alpha)
            + a_coef * (a - beta) * np.power(t, beta),
        )

    @staticmethod
    def rational(alpha: float, beta: float) -> "ReactionTerm":
        def f(t):
            return np.power(t, alpha) / (1.0 + np.power(t, beta))

        def fp(t):
            tb = np.power(t, beta)
            return np.power(t, alpha - 1.0) * (alpha + (alpha - beta) * tb) / (
                1.0 + tb
            ) ** 2

        def margin(t, a):
            tb = np.power(t, beta)
            return np.power(t, alpha) * ((a - alpha) * (1.0 + tb) + beta * tb) / (
                1.0 + tb
            ) ** 2

        return ReactionTerm(
            "rational", alpha, f, fp,
            "positive" if alpha > 0 else "nonnegative",
            {"alpha": alpha, "beta": beta}, margin=margin,
        )

    @staticmethod
    def linear_minus_power(q: float, lam: float) -> "ReactionTerm":
        """f(t) = t^q - lam t (the closed-manifold scan nonlinearity)."""
        return ReactionTerm(
            "linear_minus_power",
            q,
            lambda t: np.power(t, q) - lam * t,
            lambda t: q * np.power(t, q - 1.0) - lam,
            "mixed",
            {"q": q, "lam": lam},
            margin=lambda t, a: (a - q) * np.power(t, q) + lam * (1.0 - a) * t,
        )

    @staticmethod
    def zero() -> "ReactionTerm":
        z = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        return ReactionTerm("zero", 0.0, z, z, "nonnegative", {}, margin=lambda t, a: z(t))

    @staticmethod
    def custom(f, fprime, alpha, sign_class="mixed") -> "ReactionTerm":
        return ReactionTerm("custom", alpha, f, fprime, sign_class, {})

    # -- evaluation helpers ----------------------------------------------

    def __call__(self, t):
        return self.f(np.asarray(t, dtype=float))

    def deriv(self, t):
        return self.fprime(np.asarray(t, dtype=float))

    def extended(self, t):
        """Odd extension below zero (integration device for overshoot)."""
        t = np.asarray(t, dtype=float)
        out = np.where(t > 0, self.f(np.abs(t) + (t <= 0)), 0.0)
        neg = t < 0
        if np.any(neg):
            out = np.where(neg, -self.f(np.abs(t) + (t >= 0)), out)
        return out

    def extended_scalar(self):
        """Scalar closure of the odd extension (integrator hot loop)."""
        f = self.f

        def g(t):
            if t > 0:
                return float(f(t))
            if t < 0:
                return -float(f(-t))
            return 0.0

        return g

    @property
    def is_pure_power(self) -> bool:
        return self.family == "pure_power"


# ----------------------------------------------------------------------
# subcriticality conditions
# ----------------------------------------------------------------------

_GRID_LO, _GRID_HI, _GRID_POINTS = 1e-6, 1e6, 1200


def condition_grid(lo=_GRID_LO, hi=_GRID_HI, num=_GRID_POINTS):
    return np.geomspace(lo, hi, num)


def is_subcritical(term: ReactionTerm, alpha: float, grid=None):
    """Grid verdict of  alpha f(t) - t f'(t) >= 0  for all t > 0.

    Returns (ok, witness): witness is the first failing t (None when
    ok).  The margin tolerance is -1e-12 relative to the term sizes;
    families with a closed-form margin use it directly (the analytic
    route covers the stationary points the grid could miss).
    """
    if grid is None:
        grid = condition_grid()
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3 or np.any(grid <= 0):
        raise PreconditionError("grid must contain positive points")
    if term.margin is not None:
        m = term.margin(grid, alpha)
        scale = np.abs(alpha * term(grid)) + np.abs(grid * term.deriv(grid))
    else:
        ft = term(grid)
        fpt = term.deriv(grid)
        if np.any(~np.isfinite(ft)) or np.any(~np.isfinite(fpt)):
            raise InputError("reaction term evaluator returned non-finite values")
        m = alpha * ft - grid * fpt
        scale = np.abs(alpha * ft) + np.abs(grid * fpt)
    bad = m < -1e-12 * scale
    if np.any(bad):
        return False, float(grid[np.argmax(bad)])
    return True, None


def f2_margin(term: ReactionTerm, delta0: float, n: int, p: float, grid):
    """LHS of the gradient-estimate condition on f at delta0."""
    ft = term(grid)
    fpt = term.deriv(grid)
    return (p - 1.0) / (n - 1.0) * ((n + 1) * ft + 2.0 * delta0 * np.abs(ft)) - grid * fpt


def satisfies_f2(term: ReactionTerm, delta0: float, n: int, p: float, grid=None):
    """Grid verdict of the delta0-condition; returns (ok, witness)."""
    if delta0 >= 1:
        raise PreconditionError("delta0 must be < 1")
    if grid is None:
        grid = condition_grid()
    grid = np.asarray(grid, dtype=float)
    ft = term(grid)
    fpt = term.deriv(grid)
    if np.any(~np.isfinite(ft)) or np.any(~np.isfinite(fpt)):
        raise InputError("reaction term evaluator returned non-finite values")
    m = f2_margin(term, delta0, n, p, grid)
    scale = np.abs(ft) * (n + 3) * (p - 1) / (n - 1) + np.abs(grid * fpt)
    bad = m < -1e-12 * scale
    if np.any(bad):
        return False, float(grid[np.argmax(bad)])
    return True, None


_DELTA0_FLOOR = -8.0


def minimal_delta0(term: ReactionTerm, n: int, p: float, grid=None, tol=1e-9):
    """Least delta0 on a bisection grid making the condition hold.

    The condition is monotone in delta0 (the +2 delta0 |f| term), so
    bisection on [-8, 1) applies.  Returns the floor value when the
    condition already holds there, or None when it fails for every
    delta0 < 1.
    """
    if grid is None:
        grid = condition_grid()
    hi = 1.0 - 1e-12
    if not satisfies_f2(term, hi, n, p, grid)[0]:
        return None
    lo = _DELTA0_FLOOR
    if satisfies_f2(term, lo, n, p, grid)[0]:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if satisfies_f2(term, mid, n, p, grid)[0]:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class GradientEstimateParams:
    """delta0 < 1 plus the derived positive part and lambda floor."""

    delta0: float
    p: float

    def __post_init__(self):
        if self.delta0 >= 1:
            raise PreconditionError("delta0 must be < 1")
        if self.p <= 1:
            raise PreconditionError("p must exceed 1")

    @property
    def delta0_plus(self) -> float:
        return max(0.0, self.delta0)

    @property
    def lambda0(self) -> float:
        return self.p / (1.0 - self.delta0_plus)


@dataclass(frozen=True)
class HarnackConfig:
    """Sobolev exponent chi and the admissible L^q window (0,(p-1)chi)."""

    n: int
    p: float
    chi: float = 0.0
    q: float = 1.0

    def __post_init__(self):
        chi = self.chi
        if chi == 0.0:
            chi = self.n / (self.n - self.p) if self.p < self.n else 2.0
            object.__setattr__(self, "chi", chi)
        if self.chi <= 1:
            raise PreconditionError("chi must exceed 1")
        if not (0 < self.q < (self.p - 1.0) * self.chi):
            raise PreconditionError(
                f"q must lie in (0, {(self.p - 1.0) * self.chi}); got {self.q}"
            )


# ----------------------------------------------------------------------
# Liouville classifier
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LiouvilleVerdict:
    verdict: str  # no_positive_solution | constant_forced | out_of_range
    theorems: tuple  # every hypothesis set that fires, in precedence order
    notes: tuple = ()

    @property
    def theorem_tag(self):
        return self.theorems[0] if self.theorems else None


def classify_liouville(
    n: int,
    p: float,
    alpha: float,
    sign: str = "positive",
    pure_power: bool = False,
    negated_power: bool = False,
    has_liminf_growth: bool = False,
    compact: bool = False,
) -> LiouvilleVerdict:
    """Decision procedure over the Liouville theorems (nonnegative Ricci).

    Inputs describe f: its sign class, whether it is (minus) a pure
    power, and whether |f| grows at least like t^{p0-1} for some p0 > p.
    alpha is the declared subcritical exponent.  Returns the strongest
    conclusion plus every theorem tag whose hypotheses hold; theorems
    are tried in fixed precedence (pure-power nonexistence, then the
    positive-f cases, then growth cases, then the gradient-estimate
    window) and all firing tags are reported.
    """
    if n < 2 or p <= 1:
        raise DomainError("need n >= 2 and p > 1")
    if sign not in ("nonnegative", "positive", "nonpositive", "mixed"):
        raise InputError(f"unknown sign class {sign!r}")
    if pure_power and negated_power:
        raise InputError("f cannot be both a pure power and its negation")
    if pure_power and sign == "nonpositive":
        raise InputError("a pure power t^alpha is not nonpositive")
    if negated_power and sign in ("positive", "nonnegative"):
        raise InputError("-t^alpha is not nonnegative")

    ps = critical_exponent(n, p)
    tbl = {rec.name: rec for rec in threshold_table(n, p)}
    fired = []
    notes = []

    # pure-power nonexistence
    if pure_power and alpha < ps:
        fired.append(("2.1", "no_positive_solution"))
    if negated_power and alpha > p - 1 > 0:
        fired.append(("2.2", "no_positive_solution"))

    nonneg = sign in ("nonnegative", "positive")
    window = 0 < alpha < ps

    # positive f with structural dimension cases
    if sign == "positive" and window:
        if p >= n:
            fired.append(("2.6A", "constant_forced"))
        if 3 <= n < 2 * p < 2 * n:
            fired.append(("2.6B", "constant_forced"))
        if n == 2 and 1 < p < n and alpha < tbl["main2_C"].value:
            fired.append(("2.6C", "constant_forced"))

    # nonnegative f (noncompact statement)
    if nonneg and window and not compact:
        if p >= n:
            fired.append(("2.9I", "constant_forced"))
        if 3 <= n < 2 * p:
            fired.append(("2.9II", "constant_forced"))
        if n == 2 and p >= (1.0 + math.sqrt(17.0)) / 4.0:
            fired.append(("2.9III", "constant_forced"))
            if p >= 4.0 / 3.0:
                notes.append(
                    "n=2, p>=4/3: also inside the two-dimensional positive-f "
                    "case via the (4-3p)^+ = 0 convention"
                )
        if has_liminf_growth:
            fired.append(("2.9IV", "constant_forced"))

    # growth condition cases (any sign for (ii))
    if window and has_liminf_growth:
        if nonneg:
            fired.append(("2.8i", "constant_forced"))
        if p > n / 2 and alpha <= tbl["main3_ii"].value:
            fired.append(("2.8ii", "constant_forced"))

    # gradient-estimate window
    if p - 1 < alpha < tbl["wang_wei"].value:
        fired.append(("2.3", "constant_forced"))
    if nonneg and alpha < tbl["wang_wei"].value:
        fired.append(("cor2.1a", "constant_forced"))
    if sign == "nonpositive" and alpha > p - 1:
        fired.append(("cor2.1b", "constant_forced"))

    if not fired:
        if pure_power and alpha >= ps:
            notes.append("at or above the critical exponent: the bubble family exists")
        return LiouvilleVerdict("out_of_range", (), tuple(notes))
    verdict = (
        "no_positive_solution"
        if any(v == "no_positive_solution" for _, v in fired)
        else "constant_forced"
    )
    return LiouvilleVerdict(verdict, tuple(t for t, _ in fired), tuple(notes))


# ----------------------------------------------------------------------
# the Emden bubble
# ----------------------------------------------------------------------


def _bubble_constants(n: int, p: float, lam: float):
    if not (1 < p < n):
        raise PreconditionError("bubble requires 1 < p < n")
    if lam <= 0:
        raise PreconditionError("bubble scale must be positive")
    q = p / (p - 1.0)
    s = (n - p) / p
    top = (
        lam ** (1.0 / (p - 1.0))
        * n ** (1.0 / p)
        * ((n - p) / (p - 1.0)) ** ((p - 1.0) / p)
    )
    return q, s, top


def emden_bubble(n: int, p: float, lam: float = 1.0):
    """The explicit entire solution of -lap_p u = u^{p_s} on R^n.

    Returns a callable u(r) of the distance from the center.
    """
    q, s, top = _bubble_constants(n, p, lam)

    def u(r):
        r = np.asarray(r, dtype=float)
        return (top / (lam**q + r**q)) ** s

    return u


def emden_radial_jet(n: int, p: float, lam: float, r):
    """(u, u', u'') of the bubble, analytic in r (r > 0 or r = 0)."""
    q, s, top = _bubble_constants(n, p, lam)
    r = np.asarray(r, dtype=float)
    v = lam**q + r**q
    u = top**s * v ** (-s)
    with np.errstate(divide="ignore", invalid="ignore"):
        du = -s * top**s * v ** (-s - 1.0) * q * r ** (q - 1.0)
        ddu = (
            s * q * top**s * v ** (-s - 2.0) * r ** (q - 2.0)
            * ((s + 1.0) * q * r**q - (q - 1.0) * v)
        )
    du = np.where(r > 0, du, 0.0 if q > 1 else du)
    return u, du, ddu


def emden_plaplacian(n: int, p: float, lam: float, r):
    """Radial p-Laplacian of the bubble; r = 0 via the analytic limit."""
    q, s, top = _bubble_constants(n, p, lam)
    r = np.asarray(r, dtype=float)
    u, du, ddu = emden_radial_jet(n, p, lam, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(du) ** (p - 2.0) * ((p - 1.0) * ddu + (n - 1) * du / r)
    # r -> 0: u' ~ -C r^{q-1} with C = s q top^s lam^{-q(s+1)} and
    # lap_p u -> -n C^{p-1}
    C = s * q * top**s * lam ** (-q * (s + 1.0))
    limit = -n * C ** (p - 1.0)
    return np.where(r > 0, out, limit)


def emden_residual(n: int, p: float, lam: float, r_grid) -> dict:
    """Pointwise |lap_p u + u^{p_s}| / u^{p_s} of the bubble on a grid."""
    ps = critical_exponent(n, p)
    r = np.asarray(r_grid, dtype=float)
    u = emden_bubble(n, p, lam)(r)
    plap = emden_plaplacian(n, p, lam, r)
    res = np.abs(plap + u**ps) / u**ps
    worst = int(np.argmax(res))
    return {
        "identity_id": "emden_bubble_residual",
        "samples": int(r.size),
        "max_rel_residual": float(res.max()),
        "max_abs_residual": float(np.abs(plap + u**ps).max()),
        "worst_case": {"r": float(r[worst]), "n": n, "p": p, "lam": lam},
        "tol": 1e-8,
        "pass": bool(res.max() <= 1e-8),
    }


def bubble_coefficient_audit(n: int, p) -> dict:
    """Exact algebraic check that the gradient-power coefficient vanishes
    at alpha = p_s.

    Uses rational arithmetic, so the zero is exact, not sampled: with
    a = (n-1) p alpha / ((n+1)p - n) the |grad u|^{2p} coefficient carries
    the factor 1 - (n-p) alpha / ((n+1)p - n), which vanishes iff
    alpha = ((n+1)p - n)/(n-p).
    """
    pf = Fraction(p).limit_denominator(10**9) if not isinstance(p, Fraction) else p
    nf = Fraction(n)
    if pf >= nf:
        raise PreconditionError("exact audit needs p < n")
    big_q = (nf + 1) * pf - nf
    alpha = big_q / (nf - pf)
    factor = 1 - (nf - pf) * alpha / big_q
    special_a = (nf - 1) * pf * alpha / big_q
    special_b = -nf * (pf - 1) * alpha / big_q
    mixed = nf * (pf - 1) * special_a + (nf - 1) * pf * special_b
    return {
        "alpha_critical": alpha,
        "grad2p_factor": factor,
        "grad2p_factor_is_zero": factor == 0,
        "mixed_divergence_coefficient": mixed,
        "mixed_vanishes": mixed == 0,
    }
