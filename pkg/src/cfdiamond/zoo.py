"""Reference channel constructions and desk-scale optimizers.

Two relay channels with known closed-form structure:

- Modulo-additive channel: binary X with y1 = x XOR z and yr = z XOR w,
  where z ~ Ber(p) and w ~ Ber(delta) are independent. Its no-cooperation
  capacity is max over compression channels p(v | yr) with I(Yr;V) <= c0
  of 1 - H(Z|V); ``modadd_capacity`` searches that maximum by simplex grid
  plus local refinement and is a converging lower bound.

- Erasure pair: X binary, both broadcast components independent binary
  erasure channels with erasure probability p. With trivial U, uniform X,
  and a compression channel that re-erases surviving symbols with
  probability q, the no-cooperation rate has the closed form

      min{ (1-p)(1+p(1-q)),
           1-p - H((1-p)(1-q)) + (1-p) H(q) + c0 }

  which ``bec_rate`` evaluates and ``bec_best_q`` maximizes over q.
  ``bec_lambda_infeasibility`` runs the two-branch ratio test deciding
  whether an exponential-alignment witness exists for this family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import config
from .probcore import Alphabet, CondKernel, FiniteDist, SchemaError, binary_entropy
from .relaynet import U, V, X, Y1, YR, CodingDist, RelayNetSpec


@dataclass(frozen=True)
class ModAddParams:
    """Crossovers of the two noise bits and the relay pipe capacity."""

    p: float
    delta: float
    c0: float

    def __post_init__(self) -> None:
        for name, val in (("p", self.p), ("delta", self.delta)):
            if not 0.0 <= val <= 1.0:
                raise SchemaError(f"{name} must lie in [0, 1], got {val}")
        if self.c0 < 0.0:
            raise SchemaError(f"c0 must be nonnegative, got {self.c0}")


@dataclass(frozen=True)
class BecParams:
    """Erasure probability, re-erasure probability, pipe capacity."""

    p: float
    q: float
    c0: float

    def __post_init__(self) -> None:
        for name, val in (("p", self.p), ("q", self.q)):
            if not 0.0 <= val <= 1.0:
                raise SchemaError(f"{name} must lie in [0, 1], got {val}")
        if self.c0 < 0.0:
            raise SchemaError(f"c0 must be nonnegative, got {self.c0}")


# ---------------------------------------------------------------------------
# Modulo-additive channel
# ---------------------------------------------------------------------------


def make_modadd(params: ModAddParams, c_cf: float = 0.0) -> RelayNetSpec:
    """Network spec for the modulo-additive channel, by exact enumeration."""
    x_a = Alphabet(X, 2, ("0", "1"))
    y1_a = Alphabet(Y1, 2, ("0", "1"))
    yr_a = Alphabet(YR, 2, ("0", "1"))
    pz = (1.0 - params.p, params.p)
    pw = (1.0 - params.delta, params.delta)
    rows = np.zeros((2, 4))
    for x, z, w in itertools.product(range(2), repeat=3):
        y1 = x ^ z
        yr = z ^ w
        rows[x, yr * 2 + y1] += pz[z] * pw[w]
    return RelayNetSpec(x_a, y1_a, yr_a,
                        CondKernel((x_a,), (yr_a, y1_a), rows),
                        c0=params.c0, c_cf=c_cf)


def modadd_coding_dist(kernel: np.ndarray) -> CodingDist:
    """Markov coding distribution: trivial U, uniform X, v rows per yr.

    ``kernel`` has shape (2, |V|), one pmf row per relay output letter.
    """
    kernel = np.asarray(kernel, dtype=float)
    if kernel.ndim != 2 or kernel.shape[0] != 2:
        raise SchemaError(f"kernel must have shape (2, |V|), got {kernel.shape}")
    v_size = kernel.shape[1]
    u_a = Alphabet(U, 1)
    x_a = Alphabet(X, 2, ("0", "1"))
    y1_a = Alphabet(Y1, 2, ("0", "1"))
    yr_a = Alphabet(YR, 2, ("0", "1"))
    v_a = Alphabet(V, v_size)
    ux = FiniteDist((u_a, x_a), np.full((1, 2), 0.5))
    tensor = np.broadcast_to(kernel.reshape(1, 1, 1, 2, v_size), (1, 2, 2, 2, v_size))
    vk = CondKernel((u_a, x_a, y1_a, yr_a), (v_a,), tensor.reshape(8, v_size))
    return CodingDist(ux, vk, markov_form=True)


def _simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All pmfs over ``dim`` letters with entries that are multiples of 1/resolution."""
    out = []
    for cuts in itertools.combinations(range(resolution + dim - 1), dim - 1):
        parts = []
        prev = -1
        for c in cuts:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + dim - 2 - prev)
        out.append(parts)
    return np.asarray(out, dtype=float) / resolution


def _h_rows(rows: np.ndarray) -> np.ndarray:
    tol = config.CONFIG.tol_supp
    safe = np.maximum(rows, tol)
    return -np.where(rows > tol, rows * np.log2(safe), 0.0).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class CapacitySearchResult:
    """Best value found, its argument, and the convergence trace.

    The value is a lower bound on the true maximum; the trace pairs each
    search stage (grid resolution, then halved refinement steps) with the
    incumbent value so convergence is visible.
    """

    value: float
    kernel: np.ndarray
    trace: tuple[tuple[str, float], ...]

    def to_json_dict(self) -> dict[str, Any]:
        return {"value": self.value,
                "kernel": [row.tolist() for row in self.kernel],
                "trace": [{"stage": s, "value": v} for s, v in self.trace]}


def modadd_capacity(params: ModAddParams, grid_resolution: int,
                    v_size: int = 3, refine_steps: int = 8) -> CapacitySearchResult:
    """Search max 1 - H(Z|V) over p(v | yr) subject to I(Yr;V) <= c0.

    Global simplex-grid scan at ``grid_resolution`` followed by local
    joint-grid refinement with window halving. Points violating the
    information constraint (beyond a 1e-9 slack) are discarded, not
    penalized. The default |V| = 3 gives the relay output alphabet one
    spare letter; the result is reported as a lower bound.
    """
    if grid_resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    p, delta, c0 = params.p, params.delta, params.c0
    pz = np.array([1.0 - p, p])
    pw = np.array([1.0 - delta, delta])
    p_zyr = np.array([[pz[z] * pw[z ^ yr] for yr in range(2)] for z in range(2)])
    p_yr = p_zyr.sum(axis=0)
    slack = 1e-9

    rows = _simplex_grid(v_size, grid_resolution)
    h_rows = _h_rows(rows)
    m = rows.shape[0]
    n_starts = 24
    candidates: list[tuple[float, int, int]] = []
    chunk = max(1, int(2e6) // max(m, 1))
    for start in range(0, m, chunk):
        r0 = rows[start:start + chunk]
        pv = p_yr[0] * r0[:, None, :] + p_yr[1] * rows[None, :, :]
        hv = _h_rows(pv)
        info = hv - (p_yr[0] * h_rows[start:start + chunk, None] + p_yr[1] * h_rows[None, :])
        pzv0 = p_zyr[0, 0] * r0[:, None, :] + p_zyr[0, 1] * rows[None, :, :]
        pzv1 = p_zyr[1, 0] * r0[:, None, :] + p_zyr[1, 1] * rows[None, :, :]
        obj = 1.0 - (_h_rows(pzv0) + _h_rows(pzv1) - hv)
        obj = np.where(info <= c0 + slack, obj, -np.inf)
        flat = obj.ravel()
        top = np.argpartition(flat, -min(n_starts, flat.size))[-min(n_starts, flat.size):]
        for f in top:
            i, j = divmod(int(f), m)
            if np.isfinite(flat[f]):
                candidates.append((float(flat[f]), start + i, j))
    if not candidates:
        raise SchemaError("no feasible kernel on the grid; increase the resolution")
    candidates.sort(reverse=True)
    grid_best = candidates[0][0]

    # Local refinement: a joint grid over tangent offsets of both rows at
    # half the current window, window halving per step. Moving the rows
    # together lets the search slide along the I(Yr;V) = c0 boundary, where
    # per-row exchanges stall. Multi-start from the top grid pairs escapes
    # shallow basins of the coarse grid.
    ticks = np.array([-1.0, -0.5, 0.0, 0.5, 1.0])

    def local_offsets(window: float) -> np.ndarray:
        axes = np.meshgrid(*([ticks * window] * (v_size - 1)), indexing="ij")
        head = np.stack([a.ravel() for a in axes], axis=1)
        return np.hstack([head, -head.sum(axis=1, keepdims=True)])

    def batch_eval(c0s: np.ndarray, c1s: np.ndarray) -> np.ndarray:
        pv = p_yr[0] * c0s[:, None, :] + p_yr[1] * c1s[None, :, :]
        hv = _h_rows(pv)
        info = hv - (p_yr[0] * _h_rows(c0s)[:, None] + p_yr[1] * _h_rows(c1s)[None, :])
        pzv0 = p_zyr[0, 0] * c0s[:, None, :] + p_zyr[0, 1] * c1s[None, :, :]
        pzv1 = p_zyr[1, 0] * c0s[:, None, :] + p_zyr[1, 1] * c1s[None, :, :]
        obj = 1.0 - (_h_rows(pzv0) + _h_rows(pzv1) - hv)
        return np.where(info <= c0 + slack, obj, -np.inf)

    def refine(row0: np.ndarray, row1: np.ndarray, val: float):
        current = [row0.copy(), row1.copy()]
        steps = []
        window = 1.0 / grid_resolution
        for _ in range(refine_steps):
            for _ in range(40):  # move budget per window size
                offs = local_offsets(window)
                c0s = current[0][None, :] + offs
                c1s = current[1][None, :] + offs
                c0s = c0s[(c0s >= -1e-15).all(axis=1)]
                c1s = c1s[(c1s >= -1e-15).all(axis=1)]
                np.clip(c0s, 0.0, 1.0, out=c0s)
                np.clip(c1s, 0.0, 1.0, out=c1s)
                obj = batch_eval(c0s, c1s)
                flat = int(np.argmax(obj))
                i, j = divmod(flat, c1s.shape[0])
                if obj[i, j] > val + 1e-15:
                    val = float(obj[i, j])
                    current = [c0s[i], c1s[j]]
                else:
                    break
            window /= 2.0
            steps.append((f"refine/{window:.3e}", val))
        return val, current, steps

    best_val = -np.inf
    best_rows = None
    best_steps: list[tuple[str, float]] = []
    for val0, i, j in candidates[:n_starts]:
        val, current, steps = refine(rows[i], rows[j], val0)
        if val > best_val:
            best_val, best_rows, best_steps = val, current, steps
    trace = [(f"grid/{grid_resolution}", grid_best)] + best_steps
    return CapacitySearchResult(best_val, np.vstack(best_rows), tuple(trace))


# ---------------------------------------------------------------------------
# Erasure pair
# ---------------------------------------------------------------------------

_E = 2  # index of the erasure letter in {0, 1, e}


def make_bec_pair(p: float, c0: float = 0.0, c_cf: float = 0.0) -> RelayNetSpec:
    """Network spec whose broadcast is a product of two independent
    erasure channels with erasure probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise SchemaError(f"p must lie in [0, 1], got {p}")
    x_a = Alphabet(X, 2, ("0", "1"))
    y1_a = Alphabet(Y1, 3, ("0", "1", "e"))
    yr_a = Alphabet(YR, 3, ("0", "1", "e"))
    single = np.zeros((2, 3))
    for x in range(2):
        single[x, x] = 1.0 - p
        single[x, _E] = p
    rows = np.zeros((2, 9))
    for x, yr, y1 in itertools.product(range(2), range(3), range(3)):
        rows[x, yr * 3 + y1] = single[x, yr] * single[x, y1]
    return RelayNetSpec(x_a, y1_a, yr_a,
                        CondKernel((x_a,), (yr_a, y1_a), rows),
                        c0=c0, c_cf=c_cf)


def bec_coding_dist(p: float, q: float) -> CodingDist:
    """Trivial U, uniform X, and re-erasure compression of the relay output.

    Surviving symbols are passed with probability 1-q and erased with
    probability q; erased symbols stay erased. ``p`` only fixes the channel
    family the distribution pairs with; the kernel itself depends on q.
    """
    if not 0.0 <= p <= 1.0:
        raise SchemaError(f"p must lie in [0, 1], got {p}")
    if not 0.0 <= q <= 1.0:
        raise SchemaError(f"q must lie in [0, 1], got {q}")
    u_a = Alphabet(U, 1)
    x_a = Alphabet(X, 2, ("0", "1"))
    y1_a = Alphabet(Y1, 3, ("0", "1", "e"))
    yr_a = Alphabet(YR, 3, ("0", "1", "e"))
    v_a = Alphabet(V, 3, ("0", "1", "e"))
    per_yr = np.zeros((3, 3))
    for yr in range(2):
        per_yr[yr, yr] = 1.0 - q
        per_yr[yr, _E] = q
    per_yr[_E, _E] = 1.0
    ux = FiniteDist((u_a, x_a), np.full((1, 2), 0.5))
    tensor = np.broadcast_to(per_yr.reshape(1, 1, 1, 3, 3), (1, 2, 3, 3, 3))
    vk = CondKernel((u_a, x_a, y1_a, yr_a), (v_a,), tensor.reshape(18, 3))
    return CodingDist(ux, vk, markov_form=True)


def bec_rate(p: float, q: float, c0: float) -> float:
    """Closed-form no-cooperation rate of the re-erasure strategy."""
    for name, val in (("p", p), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise SchemaError(f"{name} must lie in [0, 1], got {val}")
    if c0 < 0.0:
        raise SchemaError(f"c0 must be nonnegative, got {c0}")
    first = (1.0 - p) * (1.0 + p * (1.0 - q))
    second = (1.0 - p - binary_entropy((1.0 - p) * (1.0 - q))
              + (1.0 - p) * binary_entropy(q) + c0)
    return min(first, second)


def bec_best_q(p: float, c0: float) -> tuple[float, float]:
    """Maximize the closed-form rate over q by golden-section search.

    Endpoints q = 0 and q = 1 are always included as candidates, and a
    coarse seeding grid guards against non-unimodal corners.
    """
    def f(q: float) -> float:
        return bec_rate(p, q, c0)

    grid = np.linspace(0.0, 1.0, 33)
    vals = [f(q) for q in grid]
    k = int(np.argmax(vals))
    lo = grid[max(0, k - 1)]
    hi = grid[min(len(grid) - 1, k + 1)]
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(80):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    candidates = [0.0, 1.0, (a + b) / 2.0, grid[k]]
    best_q = max(candidates, key=f)
    return float(best_q), float(f(best_q))


@dataclass(frozen=True)
class BecLambdaCheck:
    """Outcome of the two-branch ratio test for the erasure family."""

    infeasible: bool
    lam: float | None
    max_deviation: float

    def to_json_dict(self) -> dict[str, Any]:
        return {"infeasible": self.infeasible, "lambda": self.lam,
                "max_deviation": self.max_deviation}


def bec_lambda_infeasibility(p: float, q: float,
                             lambda_grid_size: int = 1001) -> BecLambdaCheck:
    """Decide whether an exponential-alignment witness exists at (p, q).

    The only supported letter pair in the compression channel is
    (v = x, v = e) under yr = x, which exists exactly when both erasure
    parameters are interior. Each direct-channel branch y1 = x and y1 = e
    then pins one linear equation in lambda:

        log2 LHS = (1-lambda) * log2((1-q)/q) + lambda * log2(branch ratio)

    with LHS = (1-p)(1-q) / (1 - (1-p)(1-q)) and branch ratios
    (1-p)(1-q) / (1 - (1-p)(1-q)) for y1 = x and half that for y1 = e.
    Infeasible means no lambda in [0, 1] satisfies every applicable branch
    within ``tol_dev``. Degenerate parameter values leave no constraints at
    all, so the test is feasible there; this matches the support-aware
    alignment check on the assembled joint.
    """
    for name, val in (("p", p), ("q", q)):
        if not 0.0 <= val <= 1.0:
            raise SchemaError(f"{name} must lie in [0, 1], got {val}")
    keep = (1.0 - p) * (1.0 - q)

    constraints: list[tuple[float, float]] = []  # (intercept, slope) of residual(lam)
    pair_exists = 0.0 < q < 1.0 and p < 1.0
    if pair_exists:
        lhs = np.log2(keep / (1.0 - keep))
        base = np.log2((1.0 - q) / q)
        branch_x = np.log2(keep / (1.0 - keep))
        branch_e = np.log2(0.5 * keep / (1.0 - keep))
        # residual(lam) = base + lam * (branch - base) - lhs
        if p < 1.0:  # y1 = x occurs whenever the direct channel passes
            constraints.append((base - lhs, branch_x - base))
        if p > 0.0:  # y1 = e occurs only with actual erasures
            constraints.append((base - lhs, branch_e - base))

    if not constraints:
        return BecLambdaCheck(False, 0.0, 0.0)

    tol_dev = config.CONFIG.tol_dev
    cands: list[float] = []
    for intercept, slope in constraints:
        if abs(slope) > 1e-12:
            lam = -intercept / slope
            if -1e-9 <= lam <= 1.0 + 1e-9:
                cands.append(min(1.0, max(0.0, float(lam))))
    grid = list(np.linspace(0.0, 1.0, lambda_grid_size))
    best_lam, best_dev = 0.0, float("inf")
    for lam in sorted(set(cands)) + grid:
        dev = max(abs(intercept + lam * slope) for intercept, slope in constraints)
        if dev <= tol_dev:
            return BecLambdaCheck(False, float(lam), float(dev))
        if dev < best_dev:
            best_lam, best_dev = float(lam), float(dev)
    return BecLambdaCheck(True, None, best_dev)
