"""Semigroups on the n x n matrix algebra.

Two generator constructors: the Fourier multiplier diagonal in the
clock/shift basis v_c u_b (delta or word-length symbol), and the
commuting-family Lindblad generator A(x) = sum_j (x a_j^2 + a_j^2 x
- 2 a_j x a_j).  Superoperators are materialized as n^2 x n^2 matrices
over row-major vec, capped at n <= 12.  The working inner product is
<x,y> = tr(x^dag y)/n and L_p norms are normalized Schatten norms.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .criterion import AlphaCertificate
from .linalg import schatten_norm
from .poincare import PoincareReport, fit_exponent, maximize_on_sphere

SUPEROP_CAP = 12


def vec(x: np.ndarray) -> np.ndarray:
    return np.asarray(x).reshape(-1)


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return v.reshape(n, n)


def pair(x: np.ndarray, y: np.ndarray) -> complex:
    """Normalized trace pairing <x, y> = tr(x^dag y)/n."""
    return complex(np.trace(x.conj().T @ y) / x.shape[0])


def matrix_lp(x: np.ndarray, p: float) -> float:
    return schatten_norm(x, p)


@dataclass(frozen=True)
class ClockShiftBasis:
    n: int
    u: tuple            # u[k] = diag phase matrix
    v: tuple            # v[k] = shift by k

    def product(self, b: int, c: int) -> np.ndarray:
        """Basis element v_c u_b."""
        return self.v[c] @ self.u[b]


def clock_shift_basis(n: int) -> ClockShiftBasis:
    """u_k = diag(e^{2 pi i k j/n}), v_k e_j = e_{j+k mod n}; the n^2
    products v_c u_b are orthonormal for the normalized trace pairing."""
    if n < 2:
        raise ValueError(f"clock/shift basis needs n >= 2, got {n}")
    om = np.exp(2j * np.pi / n)
    j = np.arange(n)
    u = tuple(np.diag(om ** (k * j)) for k in range(n))
    v1 = np.zeros((n, n), dtype=complex)
    v1[(j + 1) % n, j] = 1.0
    v = [np.eye(n, dtype=complex)]
    for _ in range(n - 1):
        v.append(v1 @ v[-1])
    return ClockShiftBasis(n, u, tuple(v))


@dataclass(frozen=True)
class Superoperator:
    n: int
    mat: np.ndarray         # (n^2, n^2) complex, row-major vec convention
    kind: str
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.mat.setflags(write=False)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.mat @ vec(x), self.n)

    @cached_property
    def _eig(self):
        return np.linalg.eigh(0.5 * (self.mat + self.mat.conj().T))

    @cached_property
    def fix_projector(self) -> np.ndarray:
        """Orthogonal projector (on vec space) onto ker A."""
        w, V = self._eig
        scale = 1.0 + max(abs(w[0]), abs(w[-1]))
        kern = np.abs(w) <= 1e-12 * scale
        Vk = V[:, kern]
        return Vk @ Vk.conj().T

    def fix_project(self, x: np.ndarray) -> np.ndarray:
        return unvec(self.fix_projector @ vec(x), self.n)

    def min_positive_eig(self) -> float:
        w, _ = self._eig
        scale = 1.0 + max(abs(w[0]), abs(w[-1]))
        pos = w[w > 1e-12 * scale]
        if pos.size == 0:
            raise ValueError("generator has no positive spectrum: no gap")
        return float(pos.min())

    def expm(self, t: float) -> np.ndarray:
        """e^{-tA} as a superoperator matrix (scaling and squaring)."""
        return scipy.linalg.expm(-t * self.mat)


def _check_cap(n: int) -> None:
    if n > SUPEROP_CAP:
        raise ValueError(f"superoperator dimension n = {n} exceeds cap {SUPEROP_CAP}")


def multiplier_symbol(n: int, psi_mode: str) -> np.ndarray:
    """psi(b,c) on the (b,c) grid: delta 2-d_{b0}-d_{c0}, or |b|+|c| word length."""
    b = np.arange(n)
    if psi_mode == "delta":
        w = 1.0 - (b == 0)
        return w[:, None] + w[None, :]
    if psi_mode == "wordlength":
        w = np.minimum(b, n - b).astype(float)
        return w[:, None] + w[None, :]
    raise ValueError(f"unknown psi_mode {psi_mode!r}")


def heisenberg_multiplier(n: int, psi_mode: str = "delta") -> Superoperator:
    """Generator diagonal in the v_c u_b basis: A(v_c u_b) = psi(b,c) v_c u_b."""
    _check_cap(n)
    basis = clock_shift_basis(n)
    sym = multiplier_symbol(n, psi_mode)
    A = np.zeros((n * n, n * n), dtype=complex)
    for b in range(n):
        for c in range(n):
            m = vec(basis.product(b, c))
            A += sym[b, c] * np.outer(m, m.conj()) / n
    return Superoperator(n, A, "multiplier", {"psi_mode": psi_mode, "symbol": sym})


def lindblad_generator(a: Sequence[np.ndarray]) -> Superoperator:
    """A(x) = sum_j (x a_j^2 + a_j^2 x - 2 a_j x a_j) for commuting Hermitian a_j."""
    if not len(a):
        raise ValueError("empty Lindblad family")
    mats = [np.asarray(m, dtype=complex) for m in a]
    n = mats[0].shape[0]
    _check_cap(n)
    for j, m in enumerate(mats):
        if m.shape != (n, n):
            raise ValueError(f"a[{j}] has shape {m.shape}, expected {(n, n)}")
        dev = np.abs(m - m.conj().T).max()
        if dev > 1e-10:
            raise ValueError(f"a[{j}] is not Hermitian: deviation {dev:.3e}")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            dev = np.abs(comm).max()
            if dev > 1e-10:
                raise ValueError(
                    f"a[{i}] and a[{j}] do not commute: ||[a_{i},a_{j}]|| = {dev:.3e}")
    eye = np.eye(n, dtype=complex)
    A = np.zeros((n * n, n * n), dtype=complex)
    for m in mats:
        m2 = m @ m
        A += np.kron(eye, m2.T) + np.kron(m2, eye) - 2.0 * np.kron(m, m.T)
    sup = Superoperator(n, A, "lindblad", {"family_size": len(mats)})
    # construction-time sanity: A(1) = 0 and self-adjointness for the pairing
    if np.abs(sup.apply(eye)).max() > 1e-10:
        raise ValueError("Lindblad generator does not annihilate the identity")
    if np.abs(A - A.conj().T).max() > 1e-10:
        raise ValueError("Lindblad generator is not self-adjoint")
    return sup


def superop_gamma(A: Superoperator, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gamma(x,y) = (A(x^dag) y + x^dag A(y) - A(x^dag y))/2."""
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != (A.n, A.n) or y.shape != (A.n, A.n):
        raise ValueError(f"arguments must be {A.n}x{A.n} matrices")
    xd = x.conj().T
    return 0.5 * (A.apply(xd) @ y + xd @ A.apply(y) - A.apply(xd @ y))


def superop_gamma2(A: Superoperator, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gamma_2(x,y) = (Gamma(Ax,y) + Gamma(x,Ay) - A Gamma(x,y))/2."""
    g = superop_gamma
    return 0.5 * (g(A, A.apply(x), y) + g(A, x, A.apply(y)) - A.apply(g(A, x, y)))


def matrix_poincare_ratio(A: Superoperator, x: np.ndarray, p: float) -> float:
    if p < 2:
        raise ValueError(f"Poincare ratio needs p >= 2, got {p}")
    x0 = x - A.fix_project(x)
    num = matrix_lp(x0, p)
    if num < 1e-14 * (1.0 + np.abs(x).max()):
        raise ValueError("witness lies in the fixed-point algebra (zero numerator)")
    den = max(schatten_norm(superop_gamma(A, x0, x0), p / 2.0),
              schatten_norm(superop_gamma(A, x0.conj().T, x0.conj().T), p / 2.0)) ** 0.5
    return num / den


def matrix_worst_constant(A: Superoperator, p: float, budget: int = 20000,
                          seed: int = 0, n_starts: int = 32):
    n = A.n

    def to_matrix(z: np.ndarray) -> np.ndarray:
        return (z[:n * n] + 1j * z[n * n:]).reshape(n, n)

    def fun(z: np.ndarray) -> float:
        try:
            return matrix_poincare_ratio(A, to_matrix(z), p)
        except ValueError:
            return 0.0

    val, z, gap = maximize_on_sphere(fun, 2 * n * n, budget, seed, n_starts)
    return float(val), to_matrix(z), float(gap)


def matrix_poincare(A: Superoperator, p_grid: Sequence[float], budget: int = 20000,
                    seed: int = 0, alpha_cert: Optional[AlphaCertificate] = None,
                    n_starts: int = 32) -> PoincareReport:
    """Poincare sweep over matrix witnesses; E_Fix comes from ker(A)."""
    ps = [float(p) for p in p_grid]
    if any(p < 2 or p > 16 for p in ps):
        raise ValueError(f"p grid must lie in [2, 16], got {ps}")
    results = [matrix_worst_constant(A, p, budget, seed + i, n_starts)
               for i, p in enumerate(ps)]
    constants = [r[0] for r in results]
    slope, stderr, fit_resid = fit_exponent(ps, constants)
    alpha_used = None
    envelope = None
    if alpha_cert is not None and alpha_cert.alpha_star > 0:
        alpha_used = float(alpha_cert.alpha_star)
        c2 = constants[ps.index(2.0)] if 2.0 in ps else \
            matrix_worst_constant(A, 2.0, budget, seed + len(ps), n_starts)[0]
        envelope = tuple(np.sqrt(p / alpha_used) * c2 for p in ps)
    return PoincareReport(tuple(ps), tuple(constants),
                          tuple(r[1] for r in results),
                          slope, stderr, fit_resid, alpha_used, envelope)
