"""Monte-Carlo realization of the Gaussian Markov dilation.

Per sample omega, the crossed-product image of x = sum_g x_g lambda(g) at
time t is the |G| x |G| matrix with entry (h, g^{-1}h) equal to
x_g exp(i beta_t(alpha_{h^{-1}} b(g))(omega)); the twisted vector is
alpha_{h^{-1}} b(g) = b(h^{-1}g) - b(h^{-1}) by the cocycle law, so no
representation matrices are ever applied.  beta_t(xi) = <xi, B_t> with
B a d-dimensional Brownian motion of covariance 2 min(s,t) per
coordinate.  The realization is an exact *-homomorphism sample by
sample; expectations recover the semigroup.

The discretized martingale transform, its decoupled twin (driven by an
independent increment copy), and the h_p^c / h_p^r / h_p^d bracket
estimators all share the matrices

    C_{k,j} entry (h, g^{-1}h) = x_g e^{-(L-t_k) psi(g)}
            e^{i beta_{t_k}(alpha_{h^{-1}} b(g))} (alpha_{h^{-1}} b(g))_j,

with conditional Gaussian steps integrated out analytically where the
brackets call for it (E_{k-1}[dB^j dB^l] = 2 dt delta_{jl}).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .algebra import AlgebraElement, Semigroup, gamma, regular_rep
from .cocycles import CocycleRealization, LengthFunction
from .criterion import AlphaCertificate
from .linalg import schatten_norm, schatten_pow_batch
from . import rng

BRACKET_PS = (2.0, 4.0, 6.0, 8.0)


@dataclass(frozen=True)
class BrownianScenario:
    """Seeded description of the increment ensemble; samples regenerate on demand.

    Sample s draws its (steps, d) increment block dB[k, j] ~ N(0, 2 dt)
    from the stream (seed, TAG_SCENARIO, s), row-major in (k, j); the
    independent decoupling copy uses TAG_SCENARIO_COPY with the same
    sample index.
    """
    cocycle: CocycleRealization
    steps: int
    dt: float
    samples: int
    seed: int
    with_copy: bool = True

    @property
    def d(self) -> int:
        return self.cocycle.dimension

    @property
    def horizon(self) -> float:
        return self.steps * self.dt

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def _block(self, tag: int, lo: int, hi: int) -> np.ndarray:
        out = np.empty((hi - lo, self.steps, self.d))
        sd = np.sqrt(2.0 * self.dt)
        for i in range(lo, hi):
            out[i - lo] = rng.stream(self.seed, tag, i).normal(0.0, sd, (self.steps, self.d))
        return out

    def increments(self, lo: int, hi: int) -> np.ndarray:
        return self._block(rng.TAG_SCENARIO, lo, hi)

    def increments_copy(self, lo: int, hi: int) -> np.ndarray:
        if not self.with_copy:
            raise ValueError("scenario was built without the independent increment copy")
        return self._block(rng.TAG_SCENARIO_COPY, lo, hi)

    @cached_property
    def semigroup(self) -> Semigroup:
        return Semigroup(LengthFunction(self.cocycle.group, self.cocycle.psi))


def sample_scenario(cocycle: CocycleRealization, n: int, dt: float,
                    samples: int, seed: int, with_copy: bool = True) -> BrownianScenario:
    if dt <= 0:
        raise ValueError(f"step size must be positive, got {dt}")
    if n < 1:
        raise ValueError(f"need at least one step, got {n}")
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    return BrownianScenario(cocycle, int(n), float(dt), int(samples), int(seed), with_copy)


@dataclass(frozen=True)
class _Tables:
    bdiff: np.ndarray       # (order, order, d): bdiff[h, g] = alpha_{h^{-1}} b(g)
    invmul: np.ndarray      # invmul[g, h] = g^{-1} h
    psi: np.ndarray


def _tables(cocycle: CocycleRealization) -> _Tables:
    g = cocycle.group
    b = cocycle.vectors
    invmul = g.conv_index
    bdiff = b[invmul] - b[g.inv][:, None, :]
    return _Tables(bdiff, invmul, cocycle.psi)


def _scatter(tab: _Tables, amp: np.ndarray) -> np.ndarray:
    """amp[..., h, g] -> matrix with entry (h, g^{-1}h)."""
    order = tab.invmul.shape[0]
    out = np.zeros(amp.shape[:-2] + (order, order), dtype=complex)
    rows = np.arange(order)
    for g in range(order):
        out[..., rows, tab.invmul[g]] += amp[..., :, g]
    return out


def _grid_index(scenario: BrownianScenario, t: float) -> int:
    k = int(round(t / scenario.dt))
    if k < 0 or k > scenario.steps or abs(t - k * scenario.dt) > 1e-12 * max(1.0, scenario.horizon):
        raise ValueError(f"t = {t} is not on the grid (dt = {scenario.dt}, steps = {scenario.steps})")
    return k


def _chunks(scenario: BrownianScenario) -> list[tuple[int, int]]:
    order = scenario.cocycle.group.order
    # keep the largest per-chunk tensor (steps x d x order^2 per sample) near 2^21 entries
    per = max(1, scenario.steps * order * order * (scenario.d + 2))
    c = max(1, int(2 ** 21 // per))
    return [(lo, min(lo + c, scenario.samples)) for lo in range(0, scenario.samples, c)]


def _map_chunks(scenario: BrownianScenario, fn) -> list:
    """Apply fn(lo, hi) to every chunk; fixed-order results regardless of workers."""
    spans = _chunks(scenario)
    try:
        workers = max(1, int(os.environ.get("COCYCLE_LAB_THREADS", "1")))
    except ValueError:
        workers = 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda s: fn(*s), spans))
    return [fn(lo, hi) for lo, hi in spans]


def dilation_matrix(x: AlgebraElement, t: float, scenario: BrownianScenario,
                    sample: int) -> np.ndarray:
    """Realization of the time-t dilation of x at one sample path."""
    k = _grid_index(scenario, t)
    if not 0 <= sample < scenario.samples:
        raise ValueError(f"sample index {sample} out of range [0, {scenario.samples})")
    tab = _tables(scenario.cocycle)
    dB = scenario.increments(sample, sample + 1)[0]
    Bt = dB[:k].sum(axis=0)
    args = tab.bdiff @ Bt
    return _scatter(tab, x.coeffs[None, :] * np.exp(1j * args))


def dilation_mean(x: AlgebraElement, t: float, scenario: BrownianScenario):
    """MC mean of the dilation matrices with entrywise standard errors."""
    k = _grid_index(scenario, t)
    tab = _tables(scenario.cocycle)
    order = x.group.order

    def work(lo, hi):
        dB = scenario.increments(lo, hi)
        Bt = dB[:, :k].sum(axis=1)
        args = np.einsum("hgj,cj->chg", tab.bdiff, Bt)
        D = _scatter(tab, x.coeffs[None, None, :] * np.exp(1j * args))
        return D.sum(axis=0), (np.abs(D) ** 2).sum(axis=0)

    tot = np.zeros((order, order), dtype=complex)
    tot2 = np.zeros((order, order))
    for s, s2 in _map_chunks(scenario, work):
        tot += s
        tot2 += s2
    N = scenario.samples
    mean = tot / N
    var = np.maximum(tot2 / N - np.abs(mean) ** 2, 0.0)
    se = np.sqrt(var / N)
    return mean, se


def _transform_amp(tab: _Tables, x: AlgebraElement, decay: np.ndarray,
                   dB: np.ndarray, Bcum: np.ndarray):
    """Phase and contraction fields for a chunk: amp[c,k,h,g], w[c,k,h,g]."""
    args = np.einsum("hgj,ckj->ckhg", tab.bdiff, Bcum)
    amp = x.coeffs[None, None, None, :] * decay[None, :, None, :] * np.exp(1j * args)
    w = np.einsum("hgj,ckj->ckhg", tab.bdiff, dB)
    return amp, w


def _decay(scenario: BrownianScenario, L: float, tab: _Tables) -> np.ndarray:
    tk = np.arange(scenario.steps) * scenario.dt
    return np.exp(-(L - tk)[:, None] * tab.psi[None, :])


def _check_horizon(scenario: BrownianScenario, L: float) -> None:
    if abs(L - scenario.horizon) > 1e-12 * max(1.0, L):
        raise ValueError(f"L = {L} does not match the scenario horizon {scenario.horizon}")


def martingale_transform(x: AlgebraElement, scenario: BrownianScenario, L: float,
                         decoupled: bool = False) -> np.ndarray:
    """Per-sample matrices of M_n(x); decoupled swaps in the independent copy."""
    _check_horizon(scenario, L)
    if decoupled and not scenario.with_copy:
        raise ValueError("decoupled transform requested but scenario has no independent copy")
    tab = _tables(scenario.cocycle)
    decay = _decay(scenario, L, tab)

    def work(lo, hi):
        dB = scenario.increments(lo, hi)
        Bcum = np.concatenate([np.zeros((hi - lo, 1, scenario.d)),
                               np.cumsum(dB, axis=1)], axis=1)[:, :scenario.steps]
        drive = scenario.increments_copy(lo, hi) if decoupled else dB
        amp, _ = _transform_amp(tab, x, decay, dB, Bcum)
        w = np.einsum("hgj,ckj->ckhg", tab.bdiff, drive)
        return _scatter(tab, 1j * np.sum(amp * w, axis=1))

    return np.concatenate(_map_chunks(scenario, work), axis=0)


def transform_l2_analytic(x: AlgebraElement, scenario: BrownianScenario, L: float) -> float:
    """Exact E ||M_n(x)||_2^2 = sum_g |x_g|^2 psi(g) 2dt sum_k e^{-2(L-t_k) psi(g)}."""
    _check_horizon(scenario, L)
    psi = scenario.cocycle.psi
    tk = np.arange(scenario.steps) * scenario.dt
    w = np.exp(-2.0 * (L - tk)[:, None] * psi[None, :]).sum(axis=0)
    return float(np.sum(np.abs(x.coeffs) ** 2 * psi * 2.0 * scenario.dt * w))


@dataclass(frozen=True)
class MeanSE:
    mean: float
    se: float


def _mean_se(vals: np.ndarray) -> MeanSE:
    m = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(vals.size)) if vals.size > 1 else 0.0
    return MeanSE(m, se)


def _root_stat(ms: MeanSE, root: float) -> MeanSE:
    """Delta method for mean^{1/root}."""
    if ms.mean <= 0:
        return MeanSE(0.0, 0.0)
    v = ms.mean ** (1.0 / root)
    return MeanSE(v, v * ms.se / (root * ms.mean))


@dataclass(frozen=True)
class BracketEstimates:
    p: float
    hc: MeanSE
    hr: MeanSE
    hd: MeanSE


def _bracket_pass(x: AlgebraElement, scenario: BrownianScenario, L: float, p: float,
                  want_hd: bool) -> dict:
    tab = _tables(scenario.cocycle)
    decay = _decay(scenario, L, tab)
    q = p / 2.0
    order = x.group.order
    rows = np.arange(order)

    def work(lo, hi):
        dB = scenario.increments(lo, hi)
        Bcum = np.concatenate([np.zeros((hi - lo, 1, scenario.d)),
                               np.cumsum(dB, axis=1)], axis=1)[:, :scenario.steps]
        amp, w = _transform_amp(tab, x, decay, dB, Bcum)
        C = amp[:, :, None, :, :] * tab.bdiff.transpose(2, 0, 1)[None, None]
        Cm = np.zeros(C.shape[:3] + (order, order), dtype=complex)
        for g in range(order):
            Cm[..., rows, tab.invmul[g]] += C[..., :, g]
        Sc = 2.0 * scenario.dt * np.einsum("ckjau,ckjav->cuv", np.conj(Cm), Cm)
        Sr = 2.0 * scenario.dt * np.einsum("ckjua,ckjva->cuv", Cm, np.conj(Cm))
        out = {"c": schatten_pow_batch(Sc, q), "r": schatten_pow_batch(Sr, q)}
        if want_hd:
            dx = _scatter(tab, 1j * amp * w)
            out["d"] = schatten_pow_batch(dx, p).sum(axis=1)
        return out

    parts = _map_chunks(scenario, work)
    return {k: np.concatenate([pt[k] for pt in parts]) for k in parts[0]}


def bracket_estimates(x: AlgebraElement, scenario: BrownianScenario, L: float,
                      p: float) -> BracketEstimates:
    """hc/hr from the analytically conditioned square brackets, hd per step.

    hc^2 is the L_{p/2} norm of S_c = sum_k 2 dt sum_j C_{k,j}^dag C_{k,j}
    (the Gaussian step is integrated out; the path-measurable phases stay);
    hr uses C C^dag; hd^p sums E ||dx_k||_p^p over steps.
    """
    _check_horizon(scenario, L)
    if float(p) not in BRACKET_PS:
        raise ValueError(f"bracket estimation supports p in {BRACKET_PS}, got {p}")
    vals = _bracket_pass(x, scenario, L, float(p), want_hd=True)
    q = p / 2.0
    return BracketEstimates(
        float(p),
        _root_stat(_mean_se(vals["c"]), 2.0 * q),
        _root_stat(_mean_se(vals["r"]), 2.0 * q),
        _root_stat(_mean_se(vals["d"]), float(p)),
    )


@dataclass(frozen=True)
class BracketBound:
    bound: float
    max_bracket: float
    slack: float
    se: float


@dataclass(frozen=True)
class InequalityReport:
    p: float
    transform_norm: MeanSE          # ||M_n(x)||_p MC estimate
    decoupled_norm: MeanSE
    decoupling_ratio: float
    decoupling_se: float
    hc: MeanSE
    hr: MeanSE
    hd: MeanSE
    bdg_ratio: float
    ito_mc: MeanSE                  # per-sample ||M||_2^2, MC mean
    ito_analytic: float
    bracket_bound: Optional[BracketBound] = None


def inequality_report(x: AlgebraElement, scenario: BrownianScenario, L: float, p: float,
                      alpha_cert: Optional[AlphaCertificate] = None) -> InequalityReport:
    """Decoupling / BDG / bracket-envelope statistics at a single p.

    decoupling_ratio = ||M_n||_p / ||M~_n||_p, bdg_ratio = ||M_n||_p /
    (sqrt(p) max{hc, hr}).  With a positive alpha certificate the bracket
    bound sqrt((1-e^{-2 alpha L})/alpha) max{||Gamma(x,x)||_{p/2},
    ||Gamma(x*,x*)||_{p/2}}^{1/2} is compared against max{hc, hr}; the
    gradient bound Gamma(T_s x, T_s x) <= e^{-2 alpha s} T_s Gamma(x,x)
    makes the slack nonnegative up to MC error.
    """
    _check_horizon(scenario, L)
    if float(p) not in BRACKET_PS:
        raise ValueError(f"inequality report supports p in {BRACKET_PS}, got {p}")
    p = float(p)
    M = martingale_transform(x, scenario, L, decoupled=False)
    Mt = martingale_transform(x, scenario, L, decoupled=True)
    mn = _root_stat(_mean_se(schatten_pow_batch(M, p)), p)
    mt = _root_stat(_mean_se(schatten_pow_batch(Mt, p)), p)
    ratio = mn.mean / mt.mean if mt.mean > 0 else np.inf
    ratio_se = ratio * (mn.se / mn.mean + mt.se / mt.mean) if mt.mean > 0 and mn.mean > 0 else 0.0
    br = bracket_estimates(x, scenario, L, p)
    denom = np.sqrt(p) * max(br.hc.mean, br.hr.mean)
    bdg = mn.mean / denom if denom > 0 else np.inf
    ito = _mean_se(schatten_pow_batch(M, 2.0))
    bound = None
    if alpha_cert is not None and alpha_cert.alpha_star > 0:
        a = alpha_cert.alpha_star
        sg = scenario.semigroup
        gnorm = max(
            schatten_norm(regular_rep(gamma(sg, x, x)), p / 2.0),
            schatten_norm(regular_rep(gamma(sg, x.adjoint(), x.adjoint())), p / 2.0))
        env = float(np.sqrt((1.0 - np.exp(-2.0 * a * L)) / a) * np.sqrt(gnorm))
        mb = max(br.hc.mean, br.hr.mean)
        mb_se = br.hc.se if br.hc.mean >= br.hr.mean else br.hr.se
        bound = BracketBound(env, mb, env - mb, mb_se)
    return InequalityReport(p, mn, mt, float(ratio), float(ratio_se),
                            br.hc, br.hr, br.hd, float(bdg), ito,
                            transform_l2_analytic(x, scenario, L), bound)
