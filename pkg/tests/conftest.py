"""Shared instance generators and independent oracles for the test suite.

The oracles here intentionally avoid the library's vectorized paths:
``mi_loops`` accumulates marginals in dictionaries and applies the log-ratio
definition directly, and ``shifted_terms`` rebuilds perturbed kernels by
plain array arithmetic so derivative formulas can be checked against finite
differences.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from cfdiamond.probcore import Alphabet, CondKernel, FiniteDist, mutual_information
from cfdiamond.relaynet import CodingDist, RelayNetSpec, build_joint
from cfdiamond.slope import Perturbation


def rand_pmf(rng: np.random.Generator, n: int, floor: float = 0.0) -> np.ndarray:
    x = rng.random(n) + floor
    return x / x.sum()


def random_markov_instance(rng: np.random.Generator, max_size: int = 3,
                           full_support: bool = False, c0: float | None = None,
                           c_cf: float = 0.0) -> tuple[RelayNetSpec, CodingDist]:
    """A random network spec plus Markov-form coding distribution."""
    su = int(rng.integers(1, max_size + 1))
    sx = int(rng.integers(2, max_size + 1))
    sy1 = int(rng.integers(2, max_size + 1))
    syr = int(rng.integers(2, max_size + 1))
    sv = int(rng.integers(2, max_size + 1))
    floor = 0.15 if full_support else 0.0
    u_a, x_a = Alphabet("u", su), Alphabet("x", sx)
    y1_a, yr_a = Alphabet("y1", sy1), Alphabet("yr", syr)
    v_a = Alphabet("v", sv)
    ux = FiniteDist((u_a, x_a), rand_pmf(rng, su * sx, floor))
    broadcast = CondKernel(
        (x_a,), (yr_a, y1_a),
        np.vstack([rand_pmf(rng, syr * sy1, floor) for _ in range(sx)]))
    mk = np.stack([np.stack([rand_pmf(rng, sv, floor) for _ in range(syr)])
                   for _ in range(su)])
    tensor = np.broadcast_to(mk[:, None, None, :, :], (su, sx, sy1, syr, sv))
    vk = CondKernel((u_a, x_a, y1_a, yr_a), (v_a,), tensor.reshape(-1, sv))
    cd = CodingDist(ux, vk, markov_form=True)
    if c0 is None:
        c0 = float(rng.uniform(0.0, 1.0))
    spec = RelayNetSpec(x_a, y1_a, yr_a, broadcast, c0=c0, c_cf=c_cf)
    return spec, cd


def random_direction(rng: np.random.Generator, spec: RelayNetSpec,
                     cd: CodingDist) -> Perturbation:
    """A valid random direction: zero-sum rows, zero off support, peak 1."""
    joint = build_joint(spec, cd)
    tuple_p = joint.pmf.sum(axis=4)
    mk = cd.v_kernel.tensor[:, 0, 0, :, :]
    free = (tuple_p > 1e-12)[..., None] & (mk[:, None, None, :, :] > 1e-12)
    r = np.where(free, rng.uniform(-1.0, 1.0, size=free.shape), 0.0)
    counts = free.sum(axis=-1, keepdims=True).astype(float)
    means = np.divide(r.sum(axis=-1, keepdims=True), counts,
                      out=np.zeros_like(counts), where=counts > 0)
    r = np.where(free, r - means, 0.0)
    peak = float(np.abs(r).max())
    if peak > 0.0:
        r = r / peak
    return Perturbation(r, cd)


def shifted_kernel(cd: CodingDist, pert: Perturbation, alpha: float) -> CodingDist:
    """q = p + alpha * r built by direct array arithmetic (alpha may be < 0)."""
    tensor = cd.v_kernel.tensor + alpha * pert.r
    kernel = CondKernel(cd.v_kernel.from_vars, cd.v_kernel.to_vars,
                        tensor.reshape(cd.v_kernel.rows.shape))
    return CodingDist(cd.ux, kernel, markov_form=False)


def shifted_terms(spec: RelayNetSpec, cd: CodingDist, pert: Perturbation,
                  alpha: float) -> tuple[float, float]:
    """(f1, f2) evaluated from scratch at the shifted kernel."""
    joint = build_joint(spec, shifted_kernel(cd, pert, alpha))
    f1 = mutual_information(joint, "x", "v", ("u", "y1"))
    f2 = (mutual_information(joint, "v", ("x", "y1"), "u")
          - mutual_information(joint, "yr", "v", "u"))
    return f1, f2


def central_difference(spec: RelayNetSpec, cd: CodingDist, pert: Perturbation,
                       alpha: float = 1e-5) -> tuple[float, float]:
    up = shifted_terms(spec, cd, pert, alpha)
    dn = shifted_terms(spec, cd, pert, -alpha)
    return (up[0] - dn[0]) / (2 * alpha), (up[1] - dn[1]) / (2 * alpha)


def mi_loops(joint: FiniteDist, a, b, g=()) -> float:
    """I(a; b | g) by dictionary accumulation and the log-ratio definition."""
    def names(x):
        return (x,) if isinstance(x, str) else tuple(x)

    a, b, g = names(a), names(b), names(g)
    pos = {n: k for k, n in enumerate(joint.names)}
    p_abg: dict = {}
    p_ag: dict = {}
    p_bg: dict = {}
    p_g: dict = {}
    for cell in itertools.product(*[range(s) for s in joint.sizes]):
        p = float(joint.pmf[cell])
        if p <= 0.0:
            continue
        ka = tuple(cell[pos[n]] for n in a)
        kb = tuple(cell[pos[n]] for n in b)
        kg = tuple(cell[pos[n]] for n in g)
        p_abg[(ka, kb, kg)] = p_abg.get((ka, kb, kg), 0.0) + p
        p_ag[(ka, kg)] = p_ag.get((ka, kg), 0.0) + p
        p_bg[(kb, kg)] = p_bg.get((kb, kg), 0.0) + p
        p_g[kg] = p_g.get(kg, 0.0) + p
    total = 0.0
    for (ka, kb, kg), p in p_abg.items():
        total += p * math.log2(p * p_g[kg] / (p_ag[(ka, kg)] * p_bg[(kb, kg)]))
    return total


def relative_gap(a: float, b: float, floor: float = 1e-6) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)
