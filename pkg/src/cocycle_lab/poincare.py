"""Noncommutative L_p Poincare ratios and the growth-exponent sweep.

worst_constant maximizes the ratio

    ||f - E_Fix f||_p / max{ ||Gamma(f,f)||_{p/2}, ||Gamma(f*,f*)||_{p/2} }^{1/2}

over unit coefficient vectors; the result is a certified *lower* bound on
the best constant.  At p = 2 the exact constant is (min nonzero psi)^{-1/2},
which doubles as an optimizer soundness oracle.  sweep_and_fit runs a p
grid and fits the growth exponent of log C_p against log p.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import AlgebraElement, Semigroup, fix_project, gamma, lp_norm, regular_rep
from .criterion import AlphaCertificate
from .linalg import schatten_norm
from . import rng

GRAD_STEP = 1e-6
REL_IMPROVEMENT_STOP = 1e-8


def poincare_ratio(sg: Semigroup, f: AlgebraElement, p: float) -> float:
    """Ratio at a single witness; uses ||Gamma^{1/2}||_p = ||Gamma||_{p/2}^{1/2}."""
    if p < 2:
        raise ValueError(f"Poincare ratio needs p >= 2, got {p}")
    f0 = f - fix_project(sg, f)
    num = lp_norm(f0, p)
    if num < 1e-14 * (1.0 + np.abs(f.coeffs).max()):
        raise ValueError("witness lies in the fixed-point algebra (zero numerator)")
    gc = gamma(sg, f0, f0)
    gr = gamma(sg, f0.adjoint(), f0.adjoint())
    den = max(schatten_norm(regular_rep(gc), p / 2.0),
              schatten_norm(regular_rep(gr), p / 2.0)) ** 0.5
    return num / den


def l2_oracle(sg: Semigroup) -> float:
    """Exact best L_2 constant (min{psi(g) : psi(g) > 0})^{-1/2}."""
    pos = sg.psi.values[sg.psi.values > 0]
    if pos.size == 0:
        raise ValueError("psi is identically 0: no spectral gap")
    return float(pos.min()) ** -0.5


@dataclass(frozen=True)
class WorstConstant:
    constant: float
    witness: AlgebraElement
    optimizer_gap: float    # relative improvement in the last accepted ascent step


def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("COCYCLE_LAB_THREADS", "1")))
    except ValueError:
        return 1


def maximize_on_sphere(fun: Callable[[np.ndarray], float], dim: int,
                       budget: int, seed: int, n_starts: int = 32,
                       coord_starts: int = 16, rng_tag: int = rng.TAG_POINCARE):
    """Multi-start projected gradient ascent on the unit sphere.

    Central-difference gradients with step 1e-6; the step size adapts by
    backtracking; a start stops when its relative improvement drops below
    1e-8 or the shared budget is spent.  Deterministic for a fixed seed:
    start s draws from the stream (seed, tag, s) and ties resolve in start
    order.  Returns (best value, best point, gap).
    """
    if budget < 1:
        raise ValueError(f"optimizer budget must be >= 1, got {budget}")
    starts = []
    for i in range(min(dim, coord_starts)):
        e = np.zeros(dim)
        e[i] = 1.0
        starts.append(e)
    for s in range(len(starts), n_starts):
        v = rng.stream(seed, rng_tag, s).standard_normal(dim)
        n = np.linalg.norm(v)
        starts.append(v / n if n > 0 else np.eye(dim)[0])
    per_start = max(1, budget // len(starts))

    def run_start(x0: np.ndarray):
        evals = 0

        def f(x):
            nonlocal evals
            evals += 1
            return fun(x)

        x = x0 / np.linalg.norm(x0)
        val = f(x)
        step, gap = 0.1, np.inf
        while evals < per_start:
            g = np.zeros(dim)
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = GRAD_STEP
                g[i] = (f(x + e) - f(x - e)) / (2 * GRAD_STEP)
            g -= (g @ x) * x                      # tangent projection
            if np.linalg.norm(g) < 1e-12:
                break
            improved = False
            while step > 1e-12:
                xn = x + step * g
                xn /= np.linalg.norm(xn)
                vn = f(xn)
                if vn > val:
                    gap = (vn - val) / max(abs(val), 1e-30)
                    x, val = xn, vn
                    step *= 1.3
                    improved = True
                    break
                step *= 0.5
            if not improved or gap < REL_IMPROVEMENT_STOP:
                break
        return val, x, gap if np.isfinite(gap) else 0.0

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(run_start, starts))
    else:
        results = [run_start(x0) for x0 in starts]
    best = max(range(len(results)), key=lambda i: results[i][0])
    return results[best]


def worst_constant(sg: Semigroup, p: float, budget: int = 20000,
                   seed: int = 0, n_starts: int = 32) -> WorstConstant:
    """Empirical lower bound for the best L_p Poincare constant."""
    nonfix = np.where(~sg.fix_mask)[0]
    if nonfix.size == 0:
        raise ValueError("psi is identically 0: no spectral gap")
    m = nonfix.size
    group = sg.group

    def to_element(x: np.ndarray) -> AlgebraElement:
        c = np.zeros(group.order, dtype=complex)
        c[nonfix] = x[:m] + 1j * x[m:]
        return AlgebraElement(group, c)

    def fun(x: np.ndarray) -> float:
        f = to_element(x)
        try:
            return poincare_ratio(sg, f, p)
        except ValueError:
            return 0.0

    val, x, gap = maximize_on_sphere(fun, 2 * m, budget, seed, n_starts)
    return WorstConstant(float(val), to_element(x), float(gap))


@dataclass(frozen=True)
class PoincareReport:
    p_grid: tuple[float, ...]
    constants: tuple[float, ...]
    witnesses: tuple
    slope: float
    slope_stderr: float
    fit_residual: float
    alpha_used: Optional[float] = None
    envelope: Optional[tuple[float, ...]] = None


def fit_exponent(p_grid: Sequence[float], constants: Sequence[float]):
    """Least-squares slope of log C_p against log p, with its standard error."""
    lp = np.log(np.asarray(p_grid, dtype=float))
    lc = np.log(np.asarray(constants, dtype=float))
    A = np.vstack([lp, np.ones_like(lp)]).T
    coef, *_ = np.linalg.lstsq(A, lc, rcond=None)
    resid = lc - A @ coef
    rss = float(resid @ resid)
    dof = max(len(lp) - 2, 1)
    var = rss / dof / float(((lp - lp.mean()) ** 2).sum())
    return float(coef[0]), float(np.sqrt(var)), float(np.abs(resid).max())


def sweep_and_fit(sg: Semigroup, p_grid: Sequence[float], budget: int = 20000,
                  seed: int = 0, alpha_cert: Optional[AlphaCertificate] = None,
                  n_starts: int = 32) -> PoincareReport:
    """worst_constant per p, growth-exponent fit, optional sqrt(p/alpha) envelope.

    The envelope sqrt(p/alpha*) C_2 is only reported for a strictly positive
    alpha certificate; with alpha* = 0 (criterion fails) the slope is still
    fitted but no envelope exists.
    """
    ps = [float(p) for p in p_grid]
    if any(p < 2 or p > 16 for p in ps):
        raise ValueError(f"p grid must lie in [2, 16], got {ps}")
    results = [worst_constant(sg, p, budget, seed + i, n_starts)
               for i, p in enumerate(ps)]
    constants = [r.constant for r in results]
    slope, stderr, fit_resid = fit_exponent(ps, constants)
    alpha_used = None
    envelope = None
    if alpha_cert is not None and alpha_cert.alpha_star > 0:
        alpha_used = float(alpha_cert.alpha_star)
        c2 = constants[ps.index(2.0)] if 2.0 in ps else \
            worst_constant(sg, 2.0, budget, seed + len(ps), n_starts).constant
        envelope = tuple(np.sqrt(p / alpha_used) * c2 for p in ps)
    return PoincareReport(tuple(ps), tuple(constants),
                          tuple(r.witness for r in results),
                          slope, stderr, fit_resid, alpha_used, envelope)
