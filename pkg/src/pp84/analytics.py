"""Closed-form detection, information and efficiency results for PP84.

These functions are independent of the simulator; the Monte Carlo side
is checked against them.  Angles are in radians on [0, pi/2].
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .alphabet import PrepState

HALF_PI = math.pi / 2
D_MAX = 3 / 8
BB84_THRESHOLD_REFERENCE = 0.15


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name}={p} is not a probability")


def _check_angle(name: str, a: float) -> None:
    if not 0.0 <= a <= HALF_PI + 1e-12:
        raise ValueError(f"{name}={a} outside [0, pi/2]")


def binary_entropy(p: float) -> float:
    _check_prob("p", p)
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def p_nd_forward(state: PrepState, f: float, x: float, y: float) -> float:
    """Probability one attacked pass leaves ``state`` undisturbed.

    Serves the backward pass too, with the primed parameters.
    """
    _check_prob("F", f)
    _check_angle("x", x)
    _check_angle("y", y)
    if PrepState(state).basis.name == "Z":
        return f
    return 0.5 * (1 + f * math.cos(x) + (1 - f) * math.cos(y))


def p_d_average(f: float, x: float, y: float, f_p: float, x_p: float, y_p: float) -> float:
    """Detection probability of a run, averaged over the four preparations."""
    for name, p in (("F", f), ("F'", f_p)):
        _check_prob(name, p)
    for name, a in (("x", x), ("y", y), ("x'", x_p), ("y'", y_p)):
        _check_angle(name, a)
    d, d_p = 1 - f, 1 - f_p
    cx, cy, cxp, cyp = math.cos(x), math.cos(y), math.cos(x_p), math.cos(y_p)
    return (7 - 4 * f * f_p - f * cx - d * cy - f_p * cxp - d_p * cyp
            - f * f_p * cx * cxp - f * d_p * cx * cyp
            - d * f_p * cy * cxp - d * d_p * cy * cyp) / 8


def d_min(x: float, x_p: float) -> float:
    """Smallest average detection probability (reached at F = F' = 1)."""
    _check_angle("x", x)
    _check_angle("x'", x_p)
    return (1 - (1 + math.cos(x)) * (1 + math.cos(x_p)) / 4) / 2


def i_ae(x: float, x_p: float) -> float:
    """Alice-Eve information of the F = F' = 1 incoherent attack."""
    _check_angle("x", x)
    _check_angle("x'", x_p)
    return 1 - binary_entropy((1 + math.sin(x) * math.sin(x_p)) / 2)


def d_balanced(x: float) -> float:
    _check_angle("x", x)
    return 0.5 - (1 + math.cos(x)) ** 2 / 8


def x_of_d(d: float) -> float:
    """Inverse of :func:`d_balanced`."""
    if not 0.0 <= d <= D_MAX:
        raise ValueError(f"d={d} outside [0, 3/8]")
    c = 2 * math.sqrt(1 - 2 * d) - 1
    return math.acos(min(1.0, max(0.0, c)))


def i_ae_of_d(d: float) -> float:
    """Alice-Eve information of the balanced attack as a function of detection."""
    if not 0.0 <= d <= D_MAX:
        raise ValueError(f"d={d} outside [0, 3/8]")
    c = 2 * math.sqrt(1 - 2 * d) - 1
    return 1 - binary_entropy(min(1.0, (2 - c * c) / 2))


def i_ab(x: float) -> float:
    """Alice-Bob information under the balanced attack with angle ``x``."""
    return i_ab_general(x, x)


def i_ab_general(x: float, x_p: float) -> float:
    """Average of the per-basis informations: 1 on one basis, 1 - h on the other."""
    _check_angle("x", x)
    _check_angle("x'", x_p)
    return 1 - 0.5 * binary_entropy((1 + math.cos(x) * math.cos(x_p)) / 2)


def i_ae_bound(x: float) -> float:
    """Upper bound on Eve's information for any attack with forward angle ``x``."""
    _check_angle("x", x)
    return 1 - binary_entropy((1 + math.sin(x)) / 2)


@dataclass(frozen=True)
class BalancedAttackPoint:
    x: float
    d: float
    i_ae: float
    i_ab: float
    i_ae_bound: float


def balanced_point(x: float) -> BalancedAttackPoint:
    return BalancedAttackPoint(x, d_balanced(x), i_ae(x, x), i_ab(x), i_ae_bound(x))


def curve(points: int) -> list[BalancedAttackPoint]:
    """Information-vs-detection curve sampled on an even x grid over [0, pi/2]."""
    if points < 2:
        raise ValueError("need at least two grid points")
    return [balanced_point(float(x)) for x in np.linspace(0.0, HALF_PI, points)]


def bisect(fn: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10) -> float:
    """Root of ``fn`` on [lo, hi]; the bracket must show a sign change."""
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise ValueError("root is not bracketed")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Threshold:
    curve: str
    x: float
    d: float


def security_threshold(eve_curve: Literal["incoherent", "bound"] = "incoherent",
                       xtol: float = 1e-10) -> Threshold:
    """Detection probability where Bob's information meets Eve's."""
    if eve_curve == "incoherent":
        eve = lambda x: i_ae(x, x)  # noqa: E731
    elif eve_curve == "bound":
        eve = i_ae_bound
    else:
        raise ValueError(f"unknown curve {eve_curve!r}")
    x = bisect(lambda t: i_ab(t) - eve(t), 0.0, HALF_PI, xtol)
    return Threshold(eve_curve, x, d_balanced(x))


def qdc_eavesdrop_success(c: float, d: float, n: int) -> float:
    """Chance Eve reads ``n`` QDC message bits before a control run catches her."""
    _check_prob("c", c)
    _check_prob("d", d)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    return (1 - c) ** n / (1 - c * (1 - d)) ** n


@dataclass(frozen=True)
class EfficiencyInput:
    b_s: float
    q_t: float
    b_t: float
    transmission: float = 1.0

    def __post_init__(self):
        if min(self.b_s, self.q_t, self.b_t) < 0:
            raise ValueError("counts must be nonnegative")
        if self.q_t + self.b_t <= 0:
            raise ValueError("nothing transmitted")
        if not 0.0 < self.transmission <= 1.0:
            raise ValueError("transmission probability outside (0, 1]")


def efficiency(inp: EfficiencyInput, passes: int = 2) -> tuple[float, float]:
    """Theoretical efficiency and its lossy version (E times P per pass)."""
    e = inp.b_s / (inp.q_t + inp.b_t)
    return e, e * inp.transmission ** passes


PP84_IDEAL = EfficiencyInput(b_s=1, q_t=1, b_t=0)
# per sifted bit: two qubits sent, one basis bit announced for each
BB84_IDEAL = EfficiencyInput(b_s=1, q_t=2, b_t=2)


def pp84_efficiency(p: float) -> float:
    return efficiency(EfficiencyInput(PP84_IDEAL.b_s, PP84_IDEAL.q_t, PP84_IDEAL.b_t, p), 2)[1]


def bb84_efficiency(p: float) -> float:
    return efficiency(EfficiencyInput(BB84_IDEAL.b_s, BB84_IDEAL.q_t, BB84_IDEAL.b_t, p), 1)[1]


def efficiency_crossover() -> float:
    """Transmission P at which E_pp P^2 equals E_bb P, i.e. P = E_bb / E_pp."""
    return efficiency(BB84_IDEAL)[0] / efficiency(PP84_IDEAL)[0]


@dataclass(frozen=True)
class LemmaPoint:
    d: float
    x: float
    x_prime: float
    i_ae: float
    i_ae_balanced: float
    resolution: float
    feasible: int

    @property
    def balanced(self) -> bool:
        return abs(self.x - self.x_prime) <= self.resolution + 1e-12


def lemma_search(d: float, grid_size: int = 100) -> LemmaPoint:
    """Best split of (x, x') at fixed detection ``d`` by exhaustive grid scan.

    x runs over ``grid_size + 1`` even points of [0, pi/2]; for each, x' is
    solved from d_min(x, x') = d.  Infeasible x are skipped.
    """
    if grid_size < 50:
        raise ValueError("grid_size must be at least 50")
    if not 0.0 <= d <= D_MAX:
        raise ValueError(f"d={d} outside [0, 3/8]")
    k = 4 * (1 - 2 * d)  # (1 + cos x)(1 + cos x')
    resolution = HALF_PI / grid_size
    best = None
    feasible = 0
    for x in np.linspace(0.0, HALF_PI, grid_size + 1):
        cos_xp = k / (1 + math.cos(x)) - 1
        if not -1e-12 <= cos_xp <= 1 + 1e-12:
            continue
        x_p = math.acos(min(1.0, max(0.0, cos_xp)))
        feasible += 1
        val = i_ae(float(x), x_p)
        if best is None or val > best[2]:
            best = (float(x), x_p, val)
    if best is None:
        raise ValueError(f"no feasible grid point for d={d}")
    x_bal = x_of_d(d)
    return LemmaPoint(d, best[0], best[1], best[2], i_ae(x_bal, x_bal), resolution, feasible)


def verify_lemma(grid_size: int = 100, targets=(0.05, 0.1, 0.2, 0.3)) -> list[LemmaPoint]:
    return [lemma_search(d, grid_size) for d in targets]
