"""Perturbation engine and infinite-slope certifiers.

Starting from a Markov-form coding distribution p(v | u, yr), consider the
perturbed compression channels

    q(v | u, x, y1, yr) = p(v | u, yr) + alpha * r(v | u, x, y1, yr)

where the direction r sums to zero over v for every conditioning tuple and
vanishes wherever the base channel (or the tuple itself) has no support, so
q keeps exactly the support of p.

Three scalar functionals of q drive the analysis (all in bits):

    f1(alpha) = I_q(X; V | U, Y1)
    f2(alpha) = I_q(V; X, Y1 | U) - I_q(Yr; V | U)
    ccf(alpha) = I_q(X, Y1; V | U, Yr)

Their first derivatives at alpha = 0 have closed forms; ccf starts at zero
with zero slope (it is quadratic in alpha), while a direction with
f1'(0) > 0 and f2'(0) > 0 raises both rate bounds at first order. Hence,
when such a direction exists, the rate gain per unit of cooperation grows
without bound as alpha -> 0.

Existence of the direction is a linear-program feasibility question whose
dual is an exponential-alignment condition: no improving direction exists
exactly when some lambda in [0, 1] makes

    log p(v|u,x,y1) - lambda*log p(v|u,y1) - (1-lambda)*log p(v|u,yr)

constant in v on the support of p(. | u, yr), for every supported tuple
(u, x, y1, yr). ``find_direction`` solves the primal LP for a witness;
``check_lambda`` scans for the dual witness; ``infinite_slope_verdict``
combines both with the strict precondition I(X;Y1,V|U) < I(X;Y1,Yr|U).

For channels with full support, ``deterministic_reduction`` builds the
deterministic replacement W of V (connected components of the co-support
graph per u) and verifies it preserves the rate terms, and
``full_support_verdict`` returns the resulting dichotomy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
from scipy.optimize import linprog

from . import config
from .probcore import (
    FiniteDist,
    Alphabet,
    CondKernel,
    InfeasibleError,
    PreconditionError,
    conditional_table,
    compose,
    marginalize,
    mutual_information,
    reorder,
)
from .relaynet import (
    CANON_ORDER,
    CodingDist,
    RelayNetSpec,
    U,
    V,
    X,
    Y1,
    YR,
    build_joint,
    markov_kernel,
    rate_bounds,
)

#: Default geometric alpha schedule, largest first.
DEFAULT_ALPHAS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6)

VERDICT_CERTIFIED = "INFINITE_SLOPE_CERTIFIED"
VERDICT_ALIGNED = "CONDITION_12_HOLDS"
VERDICT_PRECONDITION = "PRECONDITION_FAILS"

REDUCTION_DETERMINISTIC = "DETERMINISTIC_REPLACEMENT"
REDUCTION_INFINITE_SLOPE = "INFINITE_SLOPE"


class AlphaRangeError(InfeasibleError):
    """A perturbation step size leaves the valid range."""


# ---------------------------------------------------------------------------
# Perturbation family
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Perturbation:
    """A direction r(v | u, x, y1, yr) for the perturbed channel family.

    Invariants enforced here: the base is Markov form, r sums to zero over v
    for every conditioning tuple (within 1e-12), and r vanishes wherever the
    base channel p(v | u, yr) has no support. The additional requirement
    that r vanish on zero-probability tuples (u, x, y1, yr) depends on the
    network spec; ``validate_against_joint`` checks it when the joint is at
    hand, and all constructors in this module guarantee it.
    """

    r: np.ndarray
    base: CodingDist

    def __post_init__(self) -> None:
        if not self.base.markov_form:
            raise PreconditionError("perturbation base must be in Markov form")
        shape = self.base.v_kernel.tensor.shape
        r = np.asarray(self.r, dtype=float)
        if r.shape != shape:
            raise ValueError(f"direction has shape {r.shape}, kernel needs {shape}")
        if not np.all(np.isfinite(r)):
            raise ValueError("direction contains non-finite entries")
        sums = np.abs(r.sum(axis=-1))
        if sums.size and sums.max() > 1e-12:
            raise ValueError(f"direction rows must sum to zero, worst residual {sums.max()}")
        mk = markov_kernel(self.base)  # (U, Yr, V)
        off = np.abs(r) * (mk[:, None, None, :, :] <= config.CONFIG.tol_supp)
        if off.size and off.max() > 0.0:
            raise ValueError("direction is nonzero outside the base channel support")
        r = r.copy()
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def is_zero(self) -> bool:
        return not bool(np.any(self.r))

    def scaled(self, factor: float) -> "Perturbation":
        """Same direction with every entry multiplied by ``factor``."""
        return Perturbation(self.r * float(factor), self.base)

    def to_json_dict(self) -> dict[str, Any]:
        return {"shape": list(self.r.shape), "r": self.r.ravel().tolist()}


def validate_against_joint(pert: Perturbation, joint_base: FiniteDist) -> None:
    """Check that the direction vanishes on zero-probability tuples."""
    joint = _canon(joint_base)
    tuple_p = joint.pmf.sum(axis=4)
    off = np.abs(pert.r) * (tuple_p <= config.CONFIG.tol_supp)[..., None]
    if off.size and off.max() > 0.0:
        raise ValueError("direction is nonzero on a zero-probability conditioning tuple")


def alpha_max(base: CodingDist, pert: Perturbation) -> float:
    """Largest step keeping every perturbed entry inside [0, 1].

    Infinite only for the zero direction.
    """
    if pert.base is not base and not np.array_equal(pert.base.v_kernel.rows,
                                                    base.v_kernel.rows):
        raise ValueError("perturbation was built for a different base distribution")
    r = pert.r
    p = base.v_kernel.tensor
    pos = r > 1e-15
    neg = r < -1e-15
    limits = []
    if pos.any():
        limits.append(float(((1.0 - p[pos]) / r[pos]).min()))
    if neg.any():
        limits.append(float((p[neg] / -r[neg]).min()))
    return min(limits) if limits else float("inf")


def perturb(base: CodingDist, pert: Perturbation, alpha: float) -> CodingDist:
    """Perturbed coding distribution q = p + alpha * r.

    Row sums are preserved exactly by the zero-sum property of r, and the
    support on positive-probability tuples is unchanged for alpha below the
    validity limit. The result is a general (non-Markov) coding
    distribution.
    """
    if alpha < 0.0:
        raise AlphaRangeError(f"alpha must be nonnegative, got {alpha}")
    if alpha == 0.0 or pert.is_zero:
        return base
    amax = alpha_max(base, pert)
    if alpha > amax + 1e-15:
        q = base.v_kernel.tensor + alpha * pert.r
        worst = np.unravel_index(int(np.argmax(np.maximum(-q, q - 1.0))), q.shape)
        raise AlphaRangeError(
            f"alpha {alpha} exceeds validity limit {amax}; entry (u,x,y1,yr,v)={worst} "
            f"reaches {q[worst]}")
    q = base.v_kernel.tensor + alpha * pert.r
    np.clip(q, 0.0, 1.0, out=q)  # boundary steps may overshoot by rounding
    kernel = CondKernel(base.v_kernel.from_vars, base.v_kernel.to_vars,
                        q.reshape(base.v_kernel.rows.shape))
    return CodingDist(base.ux, kernel, markov_form=False)


def default_schedule(amax: float = float("inf")) -> tuple[float, ...]:
    """The default alpha schedule truncated at half the validity limit."""
    cutoff = amax / 2.0
    out = tuple(a for a in DEFAULT_ALPHAS if a <= cutoff)
    if not out:
        raise InfeasibleError(f"validity limit {amax} leaves no usable alpha")
    return out


# ---------------------------------------------------------------------------
# Derivatives and curvature
# ---------------------------------------------------------------------------


def _canon(joint: FiniteDist) -> FiniteDist:
    if joint.names != CANON_ORDER:
        return reorder(joint, CANON_ORDER)
    return joint


def _support_tables(joint: FiniteDist):
    """Shared masks and log tables over the canonical joint."""
    tol = config.CONFIG.tol_supp
    p5 = joint.pmf
    tuple_p = p5.sum(axis=4)
    pv_uxy1 = conditional_table(joint, V, (U, X, Y1))
    pv_uy1 = conditional_table(joint, V, (U, Y1))
    pv_uyr = conditional_table(joint, V, (U, YR))
    supp5 = p5 > tol
    with np.errstate(divide="ignore"):
        l_uxy1 = np.where(pv_uxy1 > tol, np.log2(np.maximum(pv_uxy1, tol)), 0.0)
        l_uy1 = np.where(pv_uy1 > tol, np.log2(np.maximum(pv_uy1, tol)), 0.0)
        l_uyr = np.where(pv_uyr > tol, np.log2(np.maximum(pv_uyr, tol)), 0.0)
    return tuple_p, supp5, l_uxy1, l_uy1, l_uyr


def _require_markov_joint(joint: FiniteDist) -> None:
    """The joint must factor as p(u,x,y1,yr) p(v|u,yr) on its support."""
    tol = config.CONFIG.tol_supp
    pv_all = conditional_table(joint, V, (U, X, Y1, YR))
    pv_uyr = conditional_table(joint, V, (U, YR))
    tuple_p = joint.pmf.sum(axis=4)
    dev = np.abs(pv_all - pv_uyr[:, None, None, :, :]) * (tuple_p > tol)[..., None]
    if dev.size and dev.max() > 1e-9:
        raise PreconditionError(
            f"joint is not Markov (v depends on (x, y1) by {dev.max():.3g})")


def f_primes(joint_base: FiniteDist, pert: Perturbation) -> tuple[float, float]:
    """Closed-form derivatives (f1'(0), f2'(0)) in bits per unit alpha.

    f1'(0) = sum p(u,x,y1,yr) r(v|u,x,y1,yr) log2[ p(v|u,x,y1) / p(v|u,y1) ]
    f2'(0) = sum p(u,x,y1,yr) r(v|u,x,y1,yr) log2[ p(v|u,x,y1) / p(v|u,yr) ]

    with both sums restricted to the support of the base joint.
    """
    joint = _canon(joint_base)
    tuple_p, supp5, l_uxy1, l_uy1, l_uyr = _support_tables(joint)
    iu, ix, iy1, iyr, iv = np.nonzero(supp5)
    w = tuple_p[iu, ix, iy1, iyr] * pert.r[iu, ix, iy1, iyr, iv]
    l1 = l_uxy1[iu, ix, iy1, iv]
    f1 = float(np.dot(w, l1 - l_uy1[iu, iy1, iv]))
    f2 = float(np.dot(w, l1 - l_uyr[iu, iyr, iv]))
    return f1, f2


@dataclass(frozen=True)
class CurvatureReport:
    """Cooperation cost along an alpha schedule plus a log-log slope fit."""

    points: tuple[tuple[float, float, float], ...]  # (alpha, ccf, ccf/alpha)
    loglog_slope: float | None

    def to_json_dict(self) -> dict[str, Any]:
        return {"points": [{"alpha": a, "ccf": c, "ratio": q} for a, c, q in self.points],
                "loglog_slope": self.loglog_slope}


def _ccf_of(spec: RelayNetSpec, cd: CodingDist) -> float:
    joint = build_joint(spec, cd)
    return mutual_information(joint, (X, Y1), V, (U, YR))


def ccf_curvature(spec: RelayNetSpec, base: CodingDist, pert: Perturbation,
                  alphas: Sequence[float] | None = None) -> CurvatureReport:
    """Required cooperation rate ccf(alpha) along a schedule.

    ccf(alpha) vanishes quadratically at alpha = 0, so the ratios
    ccf/alpha decrease toward zero and the fitted log-log slope is close
    to 2 on full-support instances.
    """
    if alphas is None:
        alphas = default_schedule(alpha_max(base, pert))
    alphas = tuple(float(a) for a in alphas)
    if not alphas:
        raise ValueError("empty alpha schedule")
    points = []
    for a in alphas:
        if a > 0.0 and not pert.is_zero:
            ccf = _ccf_of(spec, perturb(base, pert, a))
        else:
            ccf = 0.0
        points.append((a, ccf, ccf / a if a > 0.0 else 0.0))
    usable = [(a, c) for a, c, _ in points if a > 0.0 and c > 1e-300]
    slope = None
    if len(usable) >= 2:
        la = np.log(np.array([a for a, _ in usable]))
        lc = np.log(np.array([c for _, c in usable]))
        slope = float(np.polyfit(la, lc, 1)[0])
    return CurvatureReport(tuple(points), slope)


# ---------------------------------------------------------------------------
# Direction LP (primal witness)
# ---------------------------------------------------------------------------


def _reconstruct_base(joint: FiniteDist) -> CodingDist:
    """Markov-form coding distribution matching a Markov joint on support."""
    joint = _canon(joint)
    ux = marginalize(joint, (U, X))
    pv_uyr = conditional_table(joint, V, (U, YR))  # zero rows where p(u,yr)=0
    nu, nyr, nv = pv_uyr.shape
    rows = pv_uyr.reshape(nu * nyr, nv).copy()
    empty = rows.sum(axis=1) <= config.CONFIG.tol_supp
    rows[empty, 0] = 1.0  # placeholder pmf on never-occurring (u, yr) pairs
    tensor = rows.reshape(nu, 1, 1, nyr, nv)
    nx = joint.alphabet(X).size
    ny1 = joint.alphabet(Y1).size
    tensor = np.broadcast_to(tensor, (nu, nx, ny1, nyr, nv))
    kernel = CondKernel(
        (joint.alphabet(U), joint.alphabet(X), joint.alphabet(Y1), joint.alphabet(YR)),
        (joint.alphabet(V),),
        tensor.reshape(nu * nx * ny1 * nyr, nv))
    return CodingDist(ux, kernel, markov_form=True)


def find_direction(joint_base: FiniteDist, base: CodingDist | None = None
                   ) -> tuple[Perturbation, float]:
    """Best direction for max min(f1'(0), f2'(0)) over the unit box.

    Solves: maximize t subject to f1'(r) >= t, f2'(r) >= t, zero sum over v
    per conditioning tuple, r = 0 off support, and |r| <= 1 entrywise. The
    box only fixes the scale; the sign of the optimum t* is what matters.
    A value above ``tol_lp`` certifies an improving direction exists.

    Returns the cleaned-up optimizer and t*. Degenerate supports (no free
    coordinates) return the zero direction and t* = 0.
    """
    joint = _canon(joint_base)
    _require_markov_joint(joint)
    if base is None:
        base = _reconstruct_base(joint)
    tol = config.CONFIG.tol_supp
    tuple_p, supp5, l_uxy1, l_uy1, l_uyr = _support_tables(joint)
    mk = markov_kernel(base)
    free5 = (tuple_p > tol)[..., None] & (mk[:, None, None, :, :] > tol)
    coords = np.argwhere(free5)
    n = coords.shape[0]
    shape5 = free5.shape
    if n == 0:
        return Perturbation(np.zeros(shape5), base), 0.0

    iu, ix, iy1, iyr, iv = coords.T
    w = tuple_p[iu, ix, iy1, iyr]
    l1 = l_uxy1[iu, ix, iy1, iv]
    a = w * (l1 - l_uy1[iu, iy1, iv])
    b = w * (l1 - l_uyr[iu, iyr, iv])

    tuple_ids = np.ravel_multi_index((iu, ix, iy1, iyr), shape5[:4])
    uniq, inverse = np.unique(tuple_ids, return_inverse=True)
    n_tuples = uniq.size
    a_eq = np.zeros((n_tuples, n + 1))
    a_eq[inverse, np.arange(n)] = 1.0
    a_ub = np.vstack([np.append(-a, 1.0), np.append(-b, 1.0)])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(-1.0, 1.0)] * n + [(None, None)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(2), A_eq=a_eq,
                  b_eq=np.zeros(n_tuples), bounds=bounds, method="highs")
    if res.status != 0:
        raise InfeasibleError(f"direction LP failed with status {res.status}: {res.message}")
    z = res.x[:n]
    t_star = float(res.x[-1])

    # Re-center each tuple's entries so row sums vanish to machine precision,
    # then renormalize into the unit box if rounding pushed past it.
    sums = np.zeros(n_tuples)
    counts = np.zeros(n_tuples)
    np.add.at(sums, inverse, z)
    np.add.at(counts, inverse, 1.0)
    z = z - (sums / counts)[inverse]
    peak = float(np.abs(z).max(initial=0.0))
    if peak > 1.0:
        z /= peak
        t_star /= peak
    r = np.zeros(shape5)
    r[iu, ix, iy1, iyr, iv] = z
    return Perturbation(r, base), t_star


# ---------------------------------------------------------------------------
# Exponential alignment (dual witness)
# ---------------------------------------------------------------------------


def _lambda_scan(joint: FiniteDist, grid_size: int) -> tuple[float, float, bool]:
    """Best (lambda, max deviation) over analytic candidates then a grid.

    The deviation of a candidate lambda is the largest spread, over
    supported tuples (u, x, y1, yr), of

        d(v) = log2 p(v|u,x,y1) - lambda*log2 p(v|u,y1)
               - (1-lambda)*log2 p(v|u,yr)

    across v in the support of p(. | u, yr). Constancy absorbs the free
    per-tuple factor. Returns as soon as a candidate passes ``tol_dev``.
    """
    if grid_size < 2:
        raise ValueError("lambda grid needs at least 2 points")
    joint = _canon(joint)
    tol = config.CONFIG.tol_supp
    tol_dev = config.CONFIG.tol_dev
    tuple_p, supp5, l_uxy1, l_uy1, l_uyr = _support_tables(joint)
    free5 = supp5
    has_pair = free5.sum(axis=4) >= 2
    if not bool(has_pair.any()):
        return 0.0, 0.0, True

    base = l_uxy1[:, :, :, None, :] - l_uyr[:, None, None, :, :]
    drift = l_uyr[:, None, None, :, :] - l_uy1[:, None, :, None, :]
    neg_inf = np.full(free5.shape, -np.inf)
    pos_inf = np.full(free5.shape, np.inf)

    def max_dev(lam: float) -> float:
        d = base + lam * drift
        hi = np.where(free5, d, neg_inf).max(axis=4)
        lo = np.where(free5, d, pos_inf).min(axis=4)
        spread = np.where(has_pair, hi - lo, 0.0)
        return float(spread.max(initial=0.0))

    # Analytic candidates: lambda values equating d(v) = d(v') for some
    # supported pair within a tuple; isolated roots the grid can miss.
    cands: list[float] = []
    tuples = np.argwhere(has_pair)
    for tu, tx, ty1, tyr in tuples:
        vs = np.nonzero(free5[tu, tx, ty1, tyr])[0]
        da = l_uxy1[tu, tx, ty1, vs]
        db = l_uy1[tu, ty1, vs]
        dc = l_uyr[tu, tyr, vs]
        for i in range(len(vs)):
            for j in range(i + 1, len(vs)):
                den = (db[i] - db[j]) - (dc[i] - dc[j])
                if abs(den) > 1e-12:
                    lam = ((da[i] - da[j]) - (dc[i] - dc[j])) / den
                    if -1e-9 <= lam <= 1.0 + 1e-9:
                        cands.append(min(1.0, max(0.0, float(lam))))
    analytic = np.unique(np.round(np.asarray(cands, dtype=float), 12)) if cands else np.array([])
    grid = np.linspace(0.0, 1.0, grid_size)

    best_lam, best_dev = 0.0, float("inf")
    for lam in list(analytic) + list(grid):
        dev = max_dev(float(lam))
        if dev <= tol_dev:
            return float(lam), dev, True
        if dev < best_dev:
            best_lam, best_dev = float(lam), dev
    return best_lam, best_dev, False


def check_lambda(joint_base: FiniteDist, lambda_grid_size: int = 1001
                 ) -> tuple[float, float] | None:
    """Dual witness search: a lambda certifying no improving direction.

    Returns (lambda, max deviation) for the first candidate whose deviation
    is within ``tol_dev``, or None when every candidate fails (which, by LP
    duality, means an improving direction exists).
    """
    lam, dev, ok = _lambda_scan(joint_base, lambda_grid_size)
    return (lam, dev) if ok else None


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SlopeVerdict:
    """Outcome of the infinite-slope certification at one coding distribution."""

    verdict: str
    precondition_strict: bool
    lp_value: float
    lambda_witness: tuple[float, float] | None
    direction: Perturbation | None = None
    f1_prime: float | None = None
    f2_prime: float | None = None

    def to_json_dict(self) -> dict[str, Any]:
        return {"verdict": self.verdict,
                "precondition_strict": self.precondition_strict,
                "lp_value": self.lp_value,
                "lambda_witness": (None if self.lambda_witness is None else
                                   {"lambda": self.lambda_witness[0],
                                    "max_deviation": self.lambda_witness[1]}),
                "f1_prime": self.f1_prime,
                "f2_prime": self.f2_prime,
                "direction": None if self.direction is None else self.direction.to_json_dict()}


def infinite_slope_verdict(spec: RelayNetSpec, cd: CodingDist,
                           lambda_grid_size: int = 1001) -> SlopeVerdict:
    """Certify whether small cooperation buys rate at unbounded slope here.

    PRECONDITION_FAILS: I(X;Y1,V|U) is not strictly below I(X;Y1,Yr|U),
    so raising f1 cannot raise the first bound.
    CONDITION_12_HOLDS: an exponential-alignment witness exists; no
    improving direction is available from this distribution.
    INFINITE_SLOPE_CERTIFIED: the LP produced a direction whose re-verified
    derivatives are both positive.
    """
    if not cd.markov_form:
        raise PreconditionError("verdict requires a Markov-form coding distribution")
    joint = build_joint(spec, cd)
    _, _, _, terms = rate_bounds(joint, spec.c0)
    gap = terms["I(X;Y1,Yr|U)"] - terms["I(X;Y1,V|U)"]
    strict = gap > config.CONFIG.tol_norm
    if not strict:
        return SlopeVerdict(VERDICT_PRECONDITION, False, 0.0, None)
    witness = check_lambda(joint, lambda_grid_size)
    if witness is not None:
        return SlopeVerdict(VERDICT_ALIGNED, True, 0.0, witness)
    pert, t_star = find_direction(joint, base=cd)
    f1p, f2p = f_primes(joint, pert)
    tol_lp = config.CONFIG.tol_lp
    if t_star > tol_lp and min(f1p, f2p) > tol_lp / 2.0:
        return SlopeVerdict(VERDICT_CERTIFIED, True, t_star, None, pert, f1p, f2p)
    # Numerical gray zone: the LP found nothing usable, so report the least
    # misaligned lambda (its deviation records how far the dual witness is).
    lam, dev, _ = _lambda_scan(joint, lambda_grid_size)
    return SlopeVerdict(VERDICT_ALIGNED, True, t_star, (lam, dev))


@dataclass(frozen=True)
class SlopeCurve:
    """Rate gain against cooperation cost along an alpha schedule."""

    points: tuple[tuple[float, float, float, float], ...]  # (alpha, ccf, delta, ratio)
    monotone_from_alpha: float | None

    def to_json_dict(self) -> dict[str, Any]:
        return {"points": [{"alpha": a, "ccf": c, "delta_rate": d, "ratio": q}
                           for a, c, d, q in self.points],
                "monotone_from_alpha": self.monotone_from_alpha}

    def to_csv(self) -> str:
        lines = ["alpha,ccf,delta_rate,ratio"]
        for a, c, d, q in self.points:
            lines.append(f"{a!r},{c!r},{d!r},{q!r}")
        return "\n".join(lines) + "\n"


def slope_curve(spec: RelayNetSpec, cd: CodingDist, pert: Perturbation,
                alphas: Sequence[float] | None = None) -> SlopeCurve:
    """Rate gain per unit cooperation along a schedule of step sizes.

    For each alpha the cooperation budget is set to exactly the cost
    ccf(alpha) of the perturbed distribution, the cooperative bounds are
    re-evaluated, and the gain over the unperturbed rate is divided by the
    cost. Intended for directions certified by ``infinite_slope_verdict``;
    the ratio then grows without bound as alpha shrinks, and the report
    notes the alpha below which it is observed monotone.
    """
    if alphas is None:
        alphas = default_schedule(alpha_max(cd, pert))
    alphas = tuple(sorted((float(a) for a in alphas), reverse=True))
    if not alphas:
        raise ValueError("empty alpha schedule")
    joint_p = build_joint(spec, cd)
    b1, b2, _, _ = rate_bounds(joint_p, spec.c0)
    rate_base = min(b1, b2)
    points = []
    for a in alphas:
        if pert.is_zero:
            points.append((a, 0.0, 0.0, 0.0))
            continue
        cd_q = perturb(cd, pert, a)
        joint_q = build_joint(spec, cd_q)
        ccf = mutual_information(joint_q, (X, Y1), V, (U, YR))
        q1, q2, _, _ = rate_bounds(joint_q, spec.c0)
        delta = min(q1, q2) - rate_base
        # 1e-15 is float-noise floor, not a support threshold: genuine ccf
        # values at the smallest default alphas sit near 1e-12.
        ratio = delta / ccf if ccf > 1e-15 else 0.0
        points.append((a, ccf, delta, ratio))
    monotone_from = None
    for k in range(len(points)):
        ratios = [p[3] for p in points[k:]]
        if all(ratios[i + 1] > ratios[i] for i in range(len(ratios) - 1)):
            monotone_from = points[k][0]
            break
    return SlopeCurve(tuple(points), monotone_from)


# ---------------------------------------------------------------------------
# Deterministic reduction under full support
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReductionResult:
    """Deterministic replacement W of V with rate-preservation residuals."""

    w_of_v: np.ndarray   # (|U|, |V|) component index of each v letter
    w_of_yr: np.ndarray  # (|U|, |Yr|) component index of the row support
    num_components: int
    rate_residual: float   # |I(X;Y1,V|U) - I(X;Y1,W|U)|
    penalty_slack: float   # I(Yr;V|U,X,Y1) - I(Yr;W|U,X,Y1)

    def w_map(self, u: int, yr: int) -> int:
        """Component index of the support of p(. | u, yr)."""
        return int(self.w_of_yr[u, yr])

    def to_json_dict(self) -> dict[str, Any]:
        return {"w_of_v": self.w_of_v.tolist(),
                "w_of_yr": self.w_of_yr.tolist(),
                "num_components": self.num_components,
                "rate_residual": self.rate_residual,
                "penalty_slack": self.penalty_slack}


def _components(adjacent: np.ndarray) -> np.ndarray:
    """Connected-component labels for a symmetric boolean adjacency matrix."""
    n = adjacent.shape[0]
    labels = np.full(n, -1, dtype=int)
    comp = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            node = stack.pop()
            for nxt in np.nonzero(adjacent[node])[0]:
                if labels[nxt] < 0:
                    labels[nxt] = comp
                    stack.append(nxt)
        comp += 1
    return labels


def deterministic_reduction(joint_base: FiniteDist) -> ReductionResult:
    """Replace V with the component index W of the per-u co-support graph.

    For each u, letters v_a and v_b are adjacent when some yr supports
    both; W is the component of V, which is simultaneously a deterministic
    function of (u, yr). The construction is valid when the broadcast
    channel has full support and the alignment condition holds; the result
    carries numerical residuals for I(X;Y1,W|U) = I(X;Y1,V|U) and for the
    compression penalty inequality.
    """
    joint = _canon(joint_base)
    tol = config.CONFIG.tol_supp
    p5 = joint.pmf
    tuple_p = p5.sum(axis=4)
    pux = tuple_p.sum(axis=(2, 3))
    gaps = (pux[:, :, None, None] > tol) & (tuple_p <= tol)
    if bool(gaps.any()):
        u_bad, x_bad, y1_bad, yr_bad = map(int, np.argwhere(gaps)[0])
        raise PreconditionError(
            f"broadcast support gap: p(y1={y1_bad}, yr={yr_bad} | x={x_bad}) = 0 "
            f"while p(u={u_bad}, x={x_bad}) > 0")

    pv_uyr = conditional_table(joint, V, (U, YR))  # (|U|, |Yr|, |V|)
    nu, nyr, nv = pv_uyr.shape
    w_of_v = np.zeros((nu, nv), dtype=int)
    w_of_yr = np.zeros((nu, nyr), dtype=int)
    max_comps = 1
    for u in range(nu):
        supp = pv_uyr[u] > tol  # (|Yr|, |V|)
        adjacent = np.zeros((nv, nv), dtype=bool)
        for yr in range(nyr):
            vs = np.nonzero(supp[yr])[0]
            adjacent[np.ix_(vs, vs)] = True
        labels = _components(adjacent)
        w_of_v[u] = labels
        for yr in range(nyr):
            vs = np.nonzero(supp[yr])[0]
            w_of_yr[u, yr] = labels[vs[0]] if vs.size else 0
        max_comps = max(max_comps, int(labels.max()) + 1)

    w_alpha = Alphabet("w", max_comps)
    rows = np.zeros((nu * nv, max_comps))
    rows[np.arange(nu * nv), w_of_v.ravel()] = 1.0
    w_kernel = CondKernel((joint.alphabet(U), joint.alphabet(V)), (w_alpha,), rows)
    extended = compose(joint, w_kernel)

    i_v = mutual_information(extended, X, (Y1, V), U)
    i_w = mutual_information(extended, X, (Y1, "w"), U)
    pen_v = mutual_information(extended, YR, V, (U, X, Y1))
    pen_w = mutual_information(extended, YR, "w", (U, X, Y1))
    return ReductionResult(w_of_v, w_of_yr, max_comps,
                           abs(i_v - i_w), pen_v - pen_w)


@dataclass(frozen=True, eq=False)
class ReductionVerdict:
    """Dichotomy for full-support channels: deterministic replacement of V
    at no rate cost, or the infinite-slope benefit."""

    kind: str
    lambda_witness: tuple[float, float] | None
    reduction: ReductionResult | None

    def to_json_dict(self) -> dict[str, Any]:
        return {"kind": self.kind,
                "lambda_witness": (None if self.lambda_witness is None else
                                   {"lambda": self.lambda_witness[0],
                                    "max_deviation": self.lambda_witness[1]}),
                "reduction": None if self.reduction is None else self.reduction.to_json_dict()}


def full_support_verdict(spec: RelayNetSpec, cd: CodingDist,
                         lambda_grid_size: int = 1001) -> ReductionVerdict:
    """Run the alignment check; reduce V to a deterministic W if it holds.

    Requires every broadcast transition probability to be positive.
    """
    if float(spec.broadcast.rows.min()) <= config.CONFIG.tol_supp:
        flat = int(np.argmin(spec.broadcast.rows))
        row, col = (int(k) for k in np.unravel_index(flat, spec.broadcast.rows.shape))
        raise PreconditionError(
            f"full-support hypothesis fails: broadcast entry (row {row}, column {col}) is zero")
    if not cd.markov_form:
        raise PreconditionError("reduction verdict requires a Markov-form coding distribution")
    joint = build_joint(spec, cd)
    witness = check_lambda(joint, lambda_grid_size)
    if witness is None:
        return ReductionVerdict(REDUCTION_INFINITE_SLOPE, None, None)
    return ReductionVerdict(REDUCTION_DETERMINISTIC, witness, deterministic_reduction(joint))
