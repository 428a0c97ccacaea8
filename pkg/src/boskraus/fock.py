"""Truncated Fock-space linear algebra.

Everything in this package lives on the span of the number states
``|0>, ..., |N_cut - 1>``.  Conventions used throughout:

* quadratures obey ``[q, p] = i`` and ``alpha = (q + i p) / sqrt(2)``;
* covariances are reported in doubled units so the vacuum covariance is
  the identity and a thermal state has covariance ``a0 * I`` with
  ``a0 = 2 <n> + 1``;
* the displacement operator is ``D(xi) = exp(xi a^dag - conj(xi) a)`` and
  the Weyl characteristic function is ``chi_W(xi) = tr(D(xi) rho)``.

States carry an explicit ``tail_mass`` recording the probability that the
untruncated state assigns beyond the cutoff, so truncation error is never
silent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import (
    CutoffTooSmall,
    DimMismatch,
    InvalidParameter,
    OrderTooLarge,
)

HERMITICITY_TOL = 1e-12
EIGENVALUE_TOL = 1e-10
TRACE_TOL = 1e-10
DEFAULT_TAIL_TOL = 1e-2

_PI_QUARTER = np.pi ** (-0.25)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """A complex matrix on the span of ``|0>, ..., |dim - 1>``."""

    mat: np.ndarray

    def __post_init__(self):
        mat = np.ascontiguousarray(self.mat, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise InvalidParameter(f"operator must be square, got shape {mat.shape}")
        if mat.shape[0] < 2:
            raise InvalidParameter("cutoff dimension must be at least 2")
        if not np.all(np.isfinite(mat)):
            raise InvalidParameter("operator entries must be finite")
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dagger(self) -> "TruncatedOperator":
        return TruncatedOperator(self.mat.conj().T)

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "re": self.mat.real.ravel().tolist(),
            "im": self.mat.imag.ravel().tolist(),
        }

    @staticmethod
    def from_json_dict(data: dict) -> "TruncatedOperator":
        dim = int(data["dim"])
        mat = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        return TruncatedOperator(mat.reshape(dim, dim))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A truncated density operator with its recorded out-of-cutoff mass.

    Invariants checked on construction: Hermiticity to 1e-12 entrywise,
    eigenvalues above -1e-10, and trace within the window allowed by
    ``tail_mass``.
    """

    op: TruncatedOperator
    tail_mass: float = 0.0

    def __post_init__(self):
        if self.tail_mass < 0:
            raise InvalidParameter("tail_mass must be nonnegative")
        mat = self.op.mat
        if np.max(np.abs(mat - mat.conj().T)) > HERMITICITY_TOL:
            raise InvalidParameter("density matrix is not Hermitian to tolerance")
        evals = np.linalg.eigvalsh(mat)
        if evals.min() < -EIGENVALUE_TOL:
            raise InvalidParameter(f"density matrix has eigenvalue {evals.min():.3e} < -{EIGENVALUE_TOL}")
        tr = float(np.trace(mat).real)
        if not (1.0 - self.tail_mass - TRACE_TOL <= tr <= 1.0 + TRACE_TOL):
            raise InvalidParameter(
                f"trace {tr:.12g} outside [{1.0 - self.tail_mass - TRACE_TOL:.12g}, {1.0 + TRACE_TOL:.12g}]"
            )

    @property
    def mat(self) -> np.ndarray:
        return self.op.mat

    @property
    def dim(self) -> int:
        return self.op.dim

    def to_json_dict(self) -> dict:
        out = self.op.to_json_dict()
        out["tail_mass"] = float(self.tail_mass)
        return out

    @staticmethod
    def from_json_dict(data: dict) -> "DensityMatrix":
        return DensityMatrix(TruncatedOperator.from_json_dict(data), float(data.get("tail_mass", 0.0)))


def _check_tail(tail: float, tail_tol: float, what: str) -> None:
    if tail > tail_tol:
        raise CutoffTooSmall(f"{what}: tail mass {tail:.3e} exceeds {tail_tol:.3e}; raise the cutoff")


def fock_state(n: int, n_cut: int) -> DensityMatrix:
    """Number state ``|n><n|``."""
    if not 0 <= n < n_cut:
        raise InvalidParameter(f"need 0 <= n < n_cut, got n={n}, n_cut={n_cut}")
    mat = np.zeros((n_cut, n_cut), dtype=np.complex128)
    mat[n, n] = 1.0
    return DensityMatrix(TruncatedOperator(mat), 0.0)


def coherent_amplitudes(alpha: complex, n_cut: int) -> np.ndarray:
    """Fock amplitudes ``<n|alpha> = exp(-|alpha|^2/2) alpha^n / sqrt(n!)``."""
    v = np.empty(n_cut, dtype=np.complex128)
    v[0] = 1.0
    for n in range(1, n_cut):
        v[n] = v[n - 1] * alpha / np.sqrt(n)
    return v * np.exp(-0.5 * abs(alpha) ** 2)


def _poisson_tail(lam: float, n_cut: int) -> float:
    # P(Poisson(lam) >= n_cut), regularized lower incomplete gamma.
    return float(gammainc(n_cut, lam))


def coherent_state(alpha: complex, n_cut: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Coherent state ``|alpha><alpha|`` with exact Poissonian tail mass."""
    tail = _poisson_tail(abs(alpha) ** 2, n_cut)
    _check_tail(tail, tail_tol, f"coherent({alpha})")
    v = coherent_amplitudes(alpha, n_cut)
    return DensityMatrix(TruncatedOperator(np.outer(v, v.conj())), tail)


def thermal_state(a0: float, n_cut: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Thermal state with covariance parameter ``a0 = 2 <n> + 1``.

    Diagonal ``(1 - x) x^n`` with ``x = (a0 - 1) / (a0 + 1)``; the mass
    beyond the cutoff is exactly ``x^n_cut``.
    """
    if a0 < 1.0:
        raise InvalidParameter(f"thermal parameter must satisfy a0 >= 1, got {a0}")
    x = (a0 - 1.0) / (a0 + 1.0)
    tail = x**n_cut
    _check_tail(tail, tail_tol, f"thermal({a0})")
    diag = (1.0 - x) * x ** np.arange(n_cut)
    return DensityMatrix(TruncatedOperator(np.diag(diag.astype(np.complex128))), tail)


def phase_averaged_state(lam: float, n_cut: int, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Phase-averaged coherent state: Poissonian diagonal ``e^-lam lam^n / n!``."""
    if lam < 0:
        raise InvalidParameter("Poisson parameter must be nonnegative")
    tail = _poisson_tail(lam, n_cut)
    _check_tail(tail, tail_tol, f"phase_averaged({lam})")
    n = np.arange(n_cut)
    logp = -lam + n * np.log(lam) - gammaln(n + 1) if lam > 0 else np.where(n == 0, 0.0, -np.inf)
    return DensityMatrix(TruncatedOperator(np.diag(np.exp(logp).astype(np.complex128))), tail)


def random_mixed_state(seed: int, rank: int, n_cut: int) -> DensityMatrix:
    """Random rank-``rank`` mixed state supported inside the cutoff."""
    if not 1 <= rank <= n_cut:
        raise InvalidParameter(f"need 1 <= rank <= n_cut, got rank={rank}")
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n_cut, rank)) + 1j * rng.normal(size=(n_cut, rank))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix(TruncatedOperator(mat), 0.0)


def state_new(kind: str, n_cut: int, *, n: int = 0, alpha: complex = 0.0, a0: float = 1.0,
              lam: float = 0.0, seed: int = 0, rank: int = 1,
              tail_tol: float = DEFAULT_TAIL_TOL) -> DensityMatrix:
    """Dispatch constructor used by the CLI; ``kind`` names the state family."""
    if kind == "fock":
        return fock_state(n, n_cut)
    if kind == "coherent":
        return coherent_state(alpha, n_cut, tail_tol)
    if kind == "thermal":
        return thermal_state(a0, n_cut, tail_tol)
    if kind == "phase_averaged":
        return phase_averaged_state(lam, n_cut, tail_tol)
    if kind == "random_mixed":
        return random_mixed_state(seed, rank, n_cut)
    raise InvalidParameter(f"unknown state kind {kind!r}")


def displacement_op(xi: complex, n_cut: int) -> TruncatedOperator:
    """Matrix of ``D(xi) = exp(xi a^dag - conj(xi) a)`` on the truncated space.

    Entries are evaluated from the associated-Laguerre closed form

        <m|D(xi)|n> = sqrt(n!/m!) xi^(m-n) L_n^(m-n)(|xi|^2) e^(-|xi|^2/2)   (m >= n)

    with the ``m < n`` triangle given by ``sqrt(m!/n!)(-conj(xi))^(n-m)
    L_m^(n-m)(|xi|^2) e^(-|xi|^2/2)``.  Each diagonal of fixed ``m - n`` is
    filled by a stable upward Laguerre recurrence; no factorial ratios of
    large arguments are formed.
    """
    x = abs(xi) ** 2
    if x * n_cut > 1e6:
        raise InvalidParameter(f"displacement argument too large: |xi|^2 = {x:.3e}")
    gauss = np.exp(-0.5 * x)
    mat = np.zeros((n_cut, n_cut), dtype=np.complex128)
    for arg, lower in ((xi, True), (-np.conj(xi), False)):
        # lower=True fills m >= n with m - n = delta; lower=False fills m < n.
        start = 0 if lower else 1
        for delta in range(start, n_cut):
            klen = n_cut - delta
            # prefactor p_k = sqrt(k!/(k+delta)!) arg^delta, built multiplicatively
            pref = np.empty(klen, dtype=np.complex128)
            p0 = 1.0 + 0.0j
            for j in range(1, delta + 1):
                p0 *= arg / np.sqrt(j)
            pref[0] = p0
            for k in range(1, klen):
                pref[k] = pref[k - 1] * np.sqrt(k / (k + delta))
            # L_k^(delta)(x) upward in k
            lag = np.empty(klen)
            lag[0] = 1.0
            if klen > 1:
                lag[1] = 1.0 + delta - x
            for k in range(1, klen - 1):
                lag[k + 1] = ((2 * k + 1 + delta - x) * lag[k] - (k + delta) * lag[k - 1]) / (k + 1)
            vals = pref * lag * gauss
            idx = np.arange(klen)
            if lower:
                mat[idx + delta, idx] = vals
            else:
                mat[idx, idx + delta] = vals
    return TruncatedOperator(mat)


def char_weyl(rho: DensityMatrix, xi: complex) -> complex:
    """Weyl-ordered characteristic function ``tr(D(xi) rho)``."""
    d = displacement_op(xi, rho.dim).mat
    return complex(np.sum(d * rho.mat.T))


def char_ordered(rho: DensityMatrix, xi: complex, order: str) -> complex:
    """Normal or antinormal ordered characteristic function.

    ``chi_N = chi_W exp(+|xi|^2/2)`` and ``chi_A = chi_W exp(-|xi|^2/2)``.
    """
    if order == "normal":
        return char_weyl(rho, xi) * np.exp(0.5 * abs(xi) ** 2)
    if order == "antinormal":
        return char_weyl(rho, xi) * np.exp(-0.5 * abs(xi) ** 2)
    raise InvalidParameter(f"order must be 'normal' or 'antinormal', got {order!r}")


def q_function(rho: DensityMatrix, alpha: complex) -> float:
    """Husimi function without the 1/pi: ``Q(alpha) = <alpha|rho|alpha>``."""
    v = coherent_amplitudes(alpha, rho.dim)
    val = complex(v.conj() @ rho.mat @ v)
    if val.real < -1e-12:
        raise InvalidParameter(f"Q function came out negative: {val.real:.3e}")
    return float(val.real)


def hermite_psi(n: int, x):
    """L2-normalized oscillator wavefunction ``psi_n(x)``.

    ``psi_0 = pi^(-1/4) exp(-x^2/2)`` and
    ``psi_(n+1) = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_(n-1)``.
    The Gaussian weight here is exp(-x^2/2); the squared weight that
    sometimes appears in print is not normalizable against H_n.
    """
    if n < 0:
        raise InvalidParameter("order must be nonnegative")
    if n > 2000:
        raise OrderTooLarge("oscillator wavefunction order limited to 2000")
    return hermite_psi_table(n, x)[n]


def hermite_psi_table(n_max: int, x) -> np.ndarray:
    """All ``psi_n(x)`` for ``n = 0..n_max``; shape ``(n_max+1,) + shape(x)``."""
    if n_max > 2000:
        raise OrderTooLarge("oscillator wavefunction order limited to 2000")
    xs = np.asarray(x, dtype=float)
    out = np.empty((n_max + 1,) + xs.shape)
    out[0] = _PI_QUARTER * np.exp(-0.5 * xs**2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xs * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xs * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """``(1/2) ||rho - sigma||_1`` via Hermitian eigendecomposition."""
    if rho.dim != sigma.dim:
        raise DimMismatch(f"dims differ: {rho.dim} vs {sigma.dim}")
    evals = np.linalg.eigvalsh(rho.mat - sigma.mat)
    return float(0.5 * np.sum(np.abs(evals)))


def quadrature_ops(n_cut: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated ``q = (a + a^dag)/sqrt(2)`` and ``p = (a - a^dag)/(i sqrt(2))``."""
    a = np.diag(np.sqrt(np.arange(1, n_cut)), 1).astype(np.complex128)
    q = (a + a.conj().T) / np.sqrt(2.0)
    p = (a - a.conj().T) / (1j * np.sqrt(2.0))
    return q, p
