"""Length functions, Gromov forms and explicit 1-cocycle realizations.

The Gromov form K(s,t) = (psi(s)+psi(t)-psi(s^{-1}t))/2 is the Gram matrix
of the cocycle vectors b(g); psi is conditionally negative exactly when K
is positive semidefinite.  PSD tests are relative:
lambda_min >= -tol*(1 + ||K||_2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .groups import FiniteGroup, build_cyclic

DEFAULT_TOL = 1e-9


class NumericalRankError(ValueError):
    """Linear system for a cocycle representation is inconsistent beyond tolerance."""


@dataclass(frozen=True)
class LengthFunction:
    group: FiniteGroup
    values: np.ndarray      # (order,) nonnegative reals, values[0] = 0

    def __post_init__(self):
        self.values.setflags(write=False)


def length_function(group: FiniteGroup, values) -> LengthFunction:
    """Validated constructor: psi(e) = 0, psi >= 0, psi(g) = psi(g^{-1})."""
    v = np.asarray(values, dtype=float)
    if v.shape != (group.order,):
        raise ValueError(f"psi has shape {v.shape}, expected ({group.order},)")
    if v[0] != 0.0:
        raise ValueError(f"psi(e) = {v[0]}, must be 0")
    if v.min() < 0:
        g = int(np.argmin(v))
        raise ValueError(f"psi({g}) = {v[g]} is negative")
    asym = np.abs(v - v[group.inv]).max()
    if asym > 1e-12:
        g = int(np.argmax(np.abs(v - v[group.inv])))
        raise ValueError(
            f"psi not symmetric: psi({g}) = {v[g]} but psi(inv({g})) = {v[group.inv[g]]}")
    return LengthFunction(group, v)


@dataclass(frozen=True)
class GromovForm:
    group: FiniteGroup
    K: np.ndarray           # (order, order) real symmetric

    def __post_init__(self):
        self.K.setflags(write=False)

    @property
    def psi(self) -> np.ndarray:
        return np.diag(self.K)


def gromov_form(psi: LengthFunction) -> GromovForm:
    """K(s,t) = (psi(s) + psi(t) - psi(s^{-1} t)) / 2."""
    psi = length_function(psi.group, psi.values)  # revalidate invariants
    v = psi.values
    K = 0.5 * (v[:, None] + v[None, :] - v[psi.group.conv_index])
    return GromovForm(psi.group, K)


@dataclass(frozen=True)
class CnVerdict:
    verdict: bool
    min_eig: float


def is_conditionally_negative(psi: LengthFunction, tol: float = DEFAULT_TOL) -> CnVerdict:
    K = gromov_form(psi).K
    w = np.linalg.eigvalsh(0.5 * (K + K.T))
    scale = 1.0 + (np.abs(w[0]) if abs(w[0]) > w[-1] else w[-1])  # 1 + ||K||_2
    return CnVerdict(bool(w[0] >= -tol * scale), float(w[0]))


@dataclass(frozen=True)
class CocycleRealization:
    group: FiniteGroup
    dimension: int
    vectors: np.ndarray     # (order, d), rows b(g)
    reps: np.ndarray        # (order, d, d) orthogonal alpha_g

    def __post_init__(self):
        self.vectors.setflags(write=False)
        self.reps.setflags(write=False)

    @property
    def psi(self) -> np.ndarray:
        """psi(g) = ||b(g)||^2."""
        return np.einsum("gj,gj->g", self.vectors, self.vectors)


def realize_cocycle(K: GromovForm, tol: float = DEFAULT_TOL) -> CocycleRealization:
    """Factor K = B B^T (rank-revealing) and solve for the orthogonal maps alpha_g.

    B's rows are the cocycle vectors; d is the numerical rank of K.  Each
    alpha_g is the solution of alpha_g b(h) = b(gh) - b(g) over all h.  For
    the eigendecomposition factor the b(g) span all of R^d, so the system
    determines alpha_g completely (the formal completion by the identity on
    an orthocomplement never has anything to act on).
    """
    group = K.group
    M = 0.5 * (K.K + K.K.T)
    lam, U = np.linalg.eigh(M)
    scale = 1.0 + max(abs(lam[0]), abs(lam[-1]))
    if lam[0] < -tol * scale:
        raise ValueError(f"K is not PSD: min eigenvalue {lam[0]:.3e}")
    keep = lam > tol * scale
    d = int(keep.sum())
    B = U[:, keep] * np.sqrt(np.clip(lam[keep], 0.0, None))
    # alpha_g^T = B^+ (b(g h) - b(g)); B^+ computed once.
    Bpinv = np.linalg.pinv(B, rcond=1e-12)
    reps = np.empty((group.order, d, d))
    gram_scale = 1.0 + np.abs(M).max()
    for g in range(group.order):
        C = B[group.mul[g]] - B[g]
        At = Bpinv @ C
        resid = np.abs(B @ At - C).max() if d else 0.0
        if resid > 10 * tol * gram_scale:
            raise NumericalRankError(
                f"cocycle system for g={g} inconsistent: residual {resid:.3e}")
        alpha = At.T
        orth = np.abs(alpha.T @ alpha - np.eye(d)).max() if d else 0.0
        if orth > 10 * tol * gram_scale:
            raise NumericalRankError(
                f"alpha_{g} deviates from orthogonal by {orth:.3e}")
        reps[g] = alpha
    return CocycleRealization(group, d, B, reps)


def word_length_cocycle(n: int) -> CocycleRealization:
    """The explicit d = n/2 realization of the word length on Z_n, n even.

    b(k) = e_1 + ... + e_k for k <= n/2 and e_{k-n/2+1} + ... + e_{n/2}
    beyond; alpha_1 is the signed shift e_j -> e_{j+1}, e_{n/2} -> -e_1,
    and alpha_k = alpha_1^k.  Everything is integer-exact.
    """
    if n < 2 or n % 2:
        raise ValueError(
            f"word-length realization needs even n >= 2, got {n}; "
            f"for odd n embed Z_n into Z_(2n) and restrict")
    d = n // 2
    group = build_cyclic(n)
    B = np.zeros((n, d))
    for k in range(1, n):
        if k <= d:
            B[k, :k] = 1.0
        else:
            B[k, k - d:d] = 1.0
    a1 = np.zeros((d, d))
    for j in range(d - 1):
        a1[j + 1, j] = 1.0
    a1[0, d - 1] = -1.0
    reps = np.empty((n, d, d))
    reps[0] = np.eye(d)
    for k in range(1, n):
        reps[k] = a1 @ reps[k - 1]
    return CocycleRealization(group, d, B, reps)


def word_length_psi(n: int) -> LengthFunction:
    """psi(k) = min(k, n-k) on Z_n (any n >= 1)."""
    k = np.arange(n)
    return length_function(build_cyclic(n), np.minimum(k, n - k).astype(float))


@dataclass(frozen=True)
class SchurReport:
    residual: float
    terms: int


def _word_block(m: int) -> np.ndarray:
    """(m-1)x(m-1) word-length Gromov matrix of Z_m over indices 1..m-1."""
    K = gromov_form(word_length_psi(m)).K
    return K[1:, 1:]


def verify_schur_identity(n: int, psi: Optional[LengthFunction] = None) -> SchurReport:
    """Check K_n o K_n - K_n = 2 sum_{l=1}^{n/2-1} embedded K_{2l}.

    K_n is the word-length Gromov matrix over indices 1..n-1 and the l-th
    block is embedded at offset (n-2l)/2.  The identity is exact for the
    word length; passing a different psi on Z_n substitutes its Gromov
    matrix on the left-hand side only, which serves as a negative control.
    """
    if n < 4 or n % 2:
        raise ValueError(f"Schur identity needs even n >= 4, got {n}")
    if psi is None:
        Kn = _word_block(n)
    else:
        if psi.group.order != n:
            raise ValueError(f"psi lives on a group of order {psi.group.order}, expected {n}")
        Kn = gromov_form(psi).K[1:, 1:]
    lhs = Kn * Kn - Kn
    rhs = np.zeros_like(lhs)
    terms = n // 2 - 1
    for l in range(1, n // 2):
        m = 2 * l
        off = (n - m) // 2
        rhs[off:off + m - 1, off:off + m - 1] += 2.0 * _word_block(m)
    return SchurReport(float(np.abs(lhs - rhs).max()), terms)
