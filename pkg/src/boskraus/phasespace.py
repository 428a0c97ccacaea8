"""The (X, Y) calculus for single-mode Gaussian channels.

A Gaussian channel acts on the Weyl characteristic function as
``chi'(xi) = chi(X xi) exp(-xi^T Y xi / 2)`` with ``X`` real and ``Y``
symmetric PSD.  Canonical representatives (sigma3 = diag(1, -1)):

    D(kappa; a)  : X = -kappa sigma3        Y = (1 + kappa^2 + a) I
    C1(kappa; a) : X = kappa I              Y = (1 - kappa^2 + a) I
    C2(kappa; a) : X = kappa I              Y = (kappa^2 - 1 + a) I
    A1(a)        : X = 0                    Y = (1 + a) I
    A2(a)        : X = (I + sigma3)/2       Y = (1 + a) I
    B2(a)        : X = I                    Y = a I
    B1(a)        : X = I                    Y = (a/2)(I + sigma3)
    identity     : X = I                    Y = 0

Complete positivity is the matrix inequality
``Y + i(Omega - X^T Omega X) >= 0`` with ``Omega = [[0, 1], [-1, 0]]``;
every canonical quantum-limited row above saturates it.

Moments are carried in doubled units (vacuum covariance = identity) and
propagate as ``cov' = X^T cov X + Y``, ``mean' = X^T mean``.  Composition
follows "first acts first": if channel 1 is applied before channel 2,

    X = X1 X2,    Y = X2^T Y1 X2 + Y2 .
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import ChannelSpec
from .errors import (
    InvalidParameter,
    NotCompletelyPositive,
    TailTooLarge,
    Unclassifiable,
    UnsupportedFamily,
    UnsupportedPair,
)
from .fock import DensityMatrix, quadrature_ops

OMEGA = np.array([[0.0, 1.0], [-1.0, 0.0]])
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])

CP_TOL = 1e-8


def cp_defect(x: np.ndarray, y: np.ndarray) -> float:
    """Most negative eigenvalue of ``Y + i(Omega - X^T Omega X)`` (0 if CP)."""
    m = y.astype(complex) + 1j * (OMEGA - x.T @ OMEGA @ x)
    return float(min(0.0, np.linalg.eigvalsh(m).min()))


@dataclass(frozen=True, eq=False)
class XYPair:
    """A completely positive Gaussian channel in (X, Y) form."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != (2, 2) or y.shape != (2, 2):
            raise InvalidParameter("X and Y must be 2x2 real matrices")
        if np.max(np.abs(y - y.T)) > 1e-10:
            raise InvalidParameter("Y must be symmetric")
        if np.linalg.eigvalsh(y).min() < -1e-12:
            raise InvalidParameter("Y must be positive semidefinite")
        defect = cp_defect(x, y)
        if defect < -CP_TOL:
            raise NotCompletelyPositive(f"(X, Y) violates complete positivity by {defect:.3e}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", 0.5 * (y + y.T))

    def to_json_dict(self) -> dict:
        return {"X": self.x.ravel().tolist(), "Y": self.y.ravel().tolist()}

    @staticmethod
    def from_json_dict(data: dict) -> "XYPair":
        return XYPair(np.asarray(data["X"], dtype=float).reshape(2, 2),
                      np.asarray(data["Y"], dtype=float).reshape(2, 2))


@dataclass(frozen=True, eq=False)
class Symplectic2:
    """An element of Sp(2, R) = SL(2, R)."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.shape != (2, 2):
            raise InvalidParameter("symplectic matrix must be 2x2")
        if abs(np.linalg.det(s) - 1.0) > 1e-10:
            raise InvalidParameter(f"det S = {np.linalg.det(s)!r} != 1")
        object.__setattr__(self, "s", s)

    def as_channel(self) -> XYPair:
        """The unitary Gaussian channel it generates (no added noise)."""
        return XYPair(self.s, np.zeros((2, 2)))


def rotation(theta: float) -> Symplectic2:
    c, s = np.cos(theta), np.sin(theta)
    return Symplectic2(np.array([[c, -s], [s, c]]))


def squeeze(lam: float) -> Symplectic2:
    if lam <= 0:
        raise InvalidParameter("squeeze parameter must be positive")
    return Symplectic2(np.diag([lam, 1.0 / lam]))


@dataclass(frozen=True, eq=False)
class GaussianMoments:
    """Mean vector and covariance in doubled (vacuum = identity) units."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (2, 2) or np.max(np.abs(cov - cov.T)) > 1e-8:
            raise InvalidParameter("covariance must be a symmetric 2x2 matrix")
        umin = np.linalg.eigvalsh(cov.astype(complex) + 1j * OMEGA).min()
        if umin < -1e-6:
            raise InvalidParameter(f"covariance violates the uncertainty bound by {umin:.3e}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))


def canonical_xy(spec: ChannelSpec) -> XYPair:
    """Canonical (X, Y) for a channel spec (see module docstring table)."""
    fam, a = spec.family, spec.noise_a
    if fam == "D":
        return XYPair(-spec.kappa * SIGMA3, (1.0 + spec.kappa**2 + a) * np.eye(2))
    if fam in ("C1", "C2"):
        return XYPair(spec.kappa * np.eye(2), (spec.quantum_limited_noise() + a) * np.eye(2))
    if fam == "A1":
        return XYPair(np.zeros((2, 2)), (1.0 + a) * np.eye(2))
    if fam == "A2":
        return XYPair(0.5 * (np.eye(2) + SIGMA3), (1.0 + a) * np.eye(2))
    if fam == "B2":
        return XYPair(np.eye(2), a * np.eye(2))
    if fam == "B1":
        return XYPair(np.eye(2), 0.5 * a * (np.eye(2) + SIGMA3))
    if fam == "I":
        return XYPair(np.eye(2), np.zeros((2, 2)))
    raise UnsupportedFamily(f"unknown family {fam}")


def classify(xy: XYPair, tol: float = 1e-9) -> ChannelSpec:
    """Recover the canonical spec from symplectic invariants.

    Family from the rank and determinant sign of X with
    ``kappa = sqrt(|det X|)``; classical noise from the invariant
    ``sqrt(det Y)`` minus the quantum-limited threshold.  The B1 noise
    magnitude is gauge (any positive value is symplectically reachable),
    so the trace of Y in the presented frame is reported.
    """
    x, y = xy.x, xy.y
    if cp_defect(x, y) < -CP_TOL:
        raise NotCompletelyPositive("input pair is not a channel")
    det_x = float(np.linalg.det(x))
    det_y = max(float(np.linalg.det(y)), 0.0)
    sing = np.linalg.svd(x, compute_uv=False)
    sqrt_det_y = float(np.sqrt(det_y))

    def _noise(family: str, y0: float) -> float:
        a = sqrt_det_y - y0
        if a < -1e-6:
            raise Unclassifiable(
                f"nearest form {family}: noise invariant {sqrt_det_y:.6g} sits below "
                f"its quantum limit {y0:.6g} (residual {a:.3e})")
        return max(a, 0.0)

    if sing[0] <= tol:  # X = 0
        return ChannelSpec("A1", noise_a=_noise("A1", 1.0)).normalized(tol)
    if abs(det_x) <= tol * sing[0] ** 2:  # rank one
        return ChannelSpec("A2", noise_a=_noise("A2", 1.0)).normalized(tol)
    kappa = float(np.sqrt(abs(det_x)))
    if det_x < 0.0:
        return ChannelSpec("D", kappa, _noise("D", 1.0 + kappa**2))
    if abs(kappa - 1.0) <= tol:
        # B family: distinguish by the rank of Y
        y_evals = np.linalg.eigvalsh(y)
        if y_evals.max() <= tol:
            return ChannelSpec("I")
        if det_y <= tol * y_evals.max() ** 2:
            return ChannelSpec("B1", noise_a=float(np.trace(y)))
        return ChannelSpec("B2", noise_a=sqrt_det_y)
    if kappa < 1.0:
        return ChannelSpec("C1", kappa, _noise("C1", 1.0 - kappa**2)).normalized(tol)
    return ChannelSpec("C2", kappa, _noise("C2", kappa**2 - 1.0)).normalized(tol)


def compose_xy(first: XYPair, second: XYPair) -> XYPair:
    """Composite of two channels, ``first`` applied before ``second``."""
    x = first.x @ second.x
    y = second.x.T @ first.y @ second.x + second.y
    return XYPair(x, y)


def _as_table_spec(spec: ChannelSpec) -> ChannelSpec:
    """Map the identity onto C1(1) so it can ride the C1 rows/columns."""
    if spec.family == "I":
        return ChannelSpec("C1", 1.0)
    return spec


def _conjugator_or_erasure(k: float, a: float) -> ChannelSpec:
    # a conjugator-tagged composite with vanishing gain is the erasure
    # family (X = 0), which is where its zero-kappa limit lives
    if k <= 1e-12:
        return ChannelSpec("A1", noise_a=a)
    return ChannelSpec("D", k, a)


def table1_compose(spec2: ChannelSpec, spec1: ChannelSpec) -> ChannelSpec:
    """Closed-form composition of canonical quantum-limited channels.

    ``spec1`` acts first, ``spec2`` second.  The entries (second acting on
    first) for families D, C1, C2, A2:

    ==========  ==========  =================================================
    second      first       composite
    ==========  ==========  =================================================
    D(k2)       D(k1)       C1(k; 2 k2^2 (1+k1^2)) if k<=1 else C2(k; 2(1+k2^2))
    D(k2)       C1(k1)      D(k; 2 k2^2 (1-k1^2))
    D(k2)       C2(k1)      D(k; 0)
    D(k2)       A2          A2(2 k2^2)
    C1(k2)      D(k1)       D(k; 0)
    C1(k2)      C1(k1)      C1(k; 0)
    C1(k2)      C2(k1)      C1(k; 2 k2^2 (k1^2-1)) if k<=1 else C2(k; 2(1-k2^2))
    C1(k2)      A2          A2(0)
    C2(k2)      D(k1)       D(k; 2(k2^2-1))
    C2(k2)      C1(k1)      C1(k; 2(k2^2-1)) if k<=1 else C2(k; 2 k2^2 (1-k1^2))
    C2(k2)      C2(k1)      C2(k; 0)
    C2(k2)      A2          A2(2(k2^2-1))
    A2          D(k1)       A2(sqrt(k1^2+2) - 1)
    A2          C1(k1)      A2(sqrt(2-k1^2) - 1)
    A2          C2(k1)      A2(k1 - 1)
    A2          A2          A2(sqrt(2) - 1)
    ==========  ==========  =================================================

    with ``k = k1 k2`` throughout.
    """
    s1, s2 = _as_table_spec(spec1), _as_table_spec(spec2)
    if not (s1.quantum_limited and s2.quantum_limited):
        raise UnsupportedPair("composition table covers quantum-limited channels only")
    f1, f2 = s1.family, s2.family
    if f1 == "A1":
        s1, f1 = ChannelSpec("C1", 0.0), "C1"
    if f2 == "A1":
        s2, f2 = ChannelSpec("C1", 0.0), "C1"
    allowed = ("D", "C1", "C2", "A2")
    if f1 not in allowed or f2 not in allowed:
        raise UnsupportedPair(f"no table entry for {f2} after {f1}")
    k1, k2 = s1.kappa, s2.kappa

    def c_branch(k: float, a_low: float, a_high: float) -> ChannelSpec:
        if k <= 1.0:
            return ChannelSpec("C1", k, a_low).normalized()
        return ChannelSpec("C2", k, a_high).normalized()

    if f2 == "A2":
        if f1 == "D":
            noise = np.sqrt(k1**2 + 2.0) - 1.0
        elif f1 == "C1":
            noise = np.sqrt(2.0 - k1**2) - 1.0
        elif f1 == "C2":
            noise = k1 - 1.0
        else:
            noise = np.sqrt(2.0) - 1.0
        if f1 == "C1" and k1 <= 1e-12:
            # the erased input never reaches the projector: X vanishes
            return ChannelSpec("A1", noise_a=float(noise))
        return ChannelSpec("A2", noise_a=float(noise))
    if f1 == "A2":
        noise = {"D": 2.0 * k2**2, "C1": 0.0, "C2": 2.0 * (k2**2 - 1.0)}[f2]
        if f2 == "C1" and k2 <= 1e-12:
            return ChannelSpec("A1", noise_a=float(noise))
        return ChannelSpec("A2", noise_a=float(noise))
    k = k1 * k2
    if f2 == "D":
        if f1 == "D":
            return c_branch(k, 2.0 * k2**2 * (1.0 + k1**2), 2.0 * (1.0 + k2**2))
        if f1 == "C1":
            return _conjugator_or_erasure(k, 2.0 * k2**2 * (1.0 - k1**2))
        return ChannelSpec("D", k, 0.0)  # f1 == "C2"
    if f2 == "C1":
        if f1 == "D":
            return _conjugator_or_erasure(k, 0.0)
        if f1 == "C1":
            return ChannelSpec("C1", k, 0.0).normalized()
        return c_branch(k, 2.0 * k2**2 * (k1**2 - 1.0), 2.0 * (1.0 - k2**2))
    # f2 == "C2"
    if f1 == "D":
        return ChannelSpec("D", k, 2.0 * (k2**2 - 1.0))
    if f1 == "C1":
        return c_branch(k, 2.0 * (k2**2 - 1.0), 2.0 * k2**2 * (1.0 - k1**2))
    return ChannelSpec("C2", k, 0.0).normalized()


def table2_compose(spec2: ChannelSpec, spec1: ChannelSpec, lam: float, theta: float = 0.0) -> ChannelSpec:
    """Composition with an arbitrary symplectic mismatch between the pair.

    ``lam`` is the singular value of the intervening symplectic for the
    nonsingular rows; for the rows whose second factor is A2 it is the
    eigenvalue of its Gram square, whose rotated (1,1) element
    ``lam cos^2(theta) + lam^-1 sin^2(theta)`` is what the singular
    projector picks out.  ``lam = 1`` reduces every row to the canonical
    table.
    """
    if lam <= 0:
        raise InvalidParameter("lambda must be positive")
    s1, s2 = _as_table_spec(spec1), _as_table_spec(spec2)
    if not (s1.quantum_limited and s2.quantum_limited):
        raise UnsupportedPair("composition table covers quantum-limited channels only")
    f1, f2 = s1.family, s2.family
    if f1 == "A1":
        s1, f1 = ChannelSpec("C1", 0.0), "C1"
    if f2 == "A1":
        s2, f2 = ChannelSpec("C1", 0.0), "C1"
    allowed = ("D", "C1", "C2", "A2")
    if f1 not in allowed or f2 not in allowed:
        raise UnsupportedPair(f"no table entry for {f2} after {f1}")
    y1 = s1.quantum_limited_noise()
    spread = (lam - 1.0 / lam) ** 2

    if f2 == "A2":
        p11 = lam * np.cos(theta) ** 2 + np.sin(theta) ** 2 / lam
        noise = float(np.sqrt(1.0 + y1 * p11) - 1.0)
        if f1 == "C1" and s1.kappa <= 1e-12:
            return ChannelSpec("A1", noise_a=noise)
        return ChannelSpec("A2", noise_a=noise)

    k2 = s2.kappa
    y2 = s2.quantum_limited_noise()
    c, d = k2**2 * y1, y2
    sqrt_det_y = float(np.sqrt((c + d) ** 2 + c * d * spread))
    if f1 == "A2":
        if f2 == "C1" and k2 <= 1e-12:
            return ChannelSpec("A1", noise_a=sqrt_det_y - 1.0)
        return ChannelSpec("A2", noise_a=sqrt_det_y - 1.0)
    k = s1.kappa * k2
    if f2 == "D" or f1 == "D":
        if f2 == "D" and f1 == "D":
            y0 = abs(1.0 - k**2)
            fam = "C1" if k <= 1.0 else "C2"
            return ChannelSpec(fam, k, max(sqrt_det_y - y0, 0.0)).normalized()
        return _conjugator_or_erasure(k, max(sqrt_det_y - (1.0 + k**2), 0.0))
    y0 = abs(1.0 - k**2)
    fam = "C1" if k <= 1.0 else "C2"
    return ChannelSpec(fam, k, max(sqrt_det_y - y0, 0.0)).normalized()


def synthesize_noisy(target: ChannelSpec) -> tuple[ChannelSpec, ChannelSpec]:
    """Quantum-limited (inner, outer) pair composing to a noisy target.

    The attenuator route realizes C1(kappa; a), A1(a) and B2(a) as
    ``C2(k2) after C1(kappa / k2)`` with ``k2 = sqrt(1 + a/2)``; the
    amplifier route uses ``k2 = sqrt(kappa^2 + a/2)``; the noisy
    conjugator defaults to ``C2(sqrt(1 + a/2)) after D``.  Single
    quadrature noise (B1) admits no such pair.
    """
    if target.family == "B1" and target.noise_a > 0:
        raise UnsupportedFamily("single-quadrature noise is not a composite of quantum-limited pairs")
    if target.family in ("A2",):
        raise UnsupportedFamily("noisy A2 needs a continuous-index factor; not provided here")
    if target.family not in ("C1", "C2", "D", "A1", "B2", "B1", "I"):
        raise UnsupportedFamily(f"unknown family {target.family}")
    a = target.noise_a
    if a == 0.0:
        return target, ChannelSpec("I")
    if target.family in ("C1", "A1", "B2", "B1", "I"):
        kappa = target.kappa if target.family == "C1" else (0.0 if target.family == "A1" else 1.0)
        k2 = float(np.sqrt(1.0 + 0.5 * a))
        return ChannelSpec("C1", kappa / k2), ChannelSpec("C2", k2)
    if target.family == "C2":
        k2 = float(np.sqrt(target.kappa**2 + 0.5 * a))
        return ChannelSpec("C1", target.kappa / k2), ChannelSpec("C2", k2)
    # D(kappa; a) via the amplifier: a = 2 (k2^2 - 1)
    k2 = float(np.sqrt(1.0 + 0.5 * a))
    return ChannelSpec("D", target.kappa / k2), ChannelSpec("C2", k2)


def covariance_map(xy: XYPair, g: GaussianMoments) -> GaussianMoments:
    """Propagate Gaussian moments: ``cov' = X^T cov X + Y``, ``mean' = X^T mean``."""
    return GaussianMoments(xy.x.T @ g.mean, xy.x.T @ g.cov @ xy.x + xy.y)


def moments_from_density(rho: DensityMatrix, tail_limit: float = 1e-4) -> GaussianMoments:
    """First and symmetrized second quadrature moments of a truncated state."""
    if rho.tail_mass >= tail_limit:
        raise TailTooLarge(f"tail mass {rho.tail_mass:.3e} too large for reliable moments")
    q, p = quadrature_ops(rho.dim)
    mq = float(np.trace(rho.mat @ q).real)
    mp = float(np.trace(rho.mat @ p).real)
    qq = float(np.trace(rho.mat @ q @ q).real)
    pp = float(np.trace(rho.mat @ p @ p).real)
    qp = float(0.5 * np.trace(rho.mat @ (q @ p + p @ q)).real)
    cov = 2.0 * np.array([[qq - mq**2, qp - mq * mp], [qp - mq * mp, pp - mp**2]])
    return GaussianMoments(np.array([mq, mp]), cov)
