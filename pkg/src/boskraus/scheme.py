"""Kraus operators from the two-mode metaplectic generating integral.

This module is an independent route to the same operators as
:mod:`boskraus.kraus`.  For a two-mode linear canonical transformation
that does not mix positions with momenta, ``S = M (+) (M^-1)^T``, the
two-mode Fock matrix elements of the metaplectic unitary are Taylor
coefficients of a Gaussian generating function

    F(z1, z2, eta1, eta2) = pi^-1 integral dx1 dx2
        exp{ -1/2 [ (x1 - eta1 sqrt2)^2 + (x2 - eta2 sqrt2)^2
                    + (x1' - z1 sqrt2)^2 + (x2' - z2 sqrt2)^2
                    - eta1^2 - eta2^2 - z1^2 - z2^2 ] },   x' = M x,

    C^(m1 m2)_(n1 n2) = (n1! n2! m1! m2!)^(-1/2)
        d^m1_eta1 d^m2_eta2 d^n1_z1 d^n2_z2 F |_0 .

Carrying out the x integrals leaves ``F = prefactor exp(v^T Q v / 2)``
with ``v = (z1, z2, eta1, eta2)``; Kraus operators of the induced
single-mode channel (vacuum ancilla) are read off as
``W_l[m1, n1] = C^(m1 l)_(n1 0)``.

Taylor coefficients are extracted by a linear recurrence on the scaled
coefficients of ``exp(v^T Q v / 2)`` with the square-root factorials
folded in as the recursion runs, which stays stable to order ~120.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_hermite

from .channels import ChannelSpec
from .errors import (
    InvalidParameter,
    NotPositiveDefinite,
    OrderTooLarge,
    UnsupportedFamily,
    UnsupportedShape,
)
from .fock import hermite_psi_table
from .kraus import (
    DiscreteIndex,
    KrausFamily,
    QuadratureIndex,
    hermite_quadrature,
    raw_completeness_defect,
)

MAX_ORDER = 120

A2_MIX = np.array([[0.0, 1.0], [1.0, -1.0]])
B1_MIX = np.array([[1.0, -1.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class MixMatrix:
    """Position block of a two-mode symplectic ``M (+) (M^-1)^T``."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (2, 2):
            raise InvalidParameter("mix matrix must be 2x2")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise InvalidParameter("mix matrix must be invertible")
        object.__setattr__(self, "m", m)


@dataclass(frozen=True, eq=False)
class GeneratingForm:
    """``F(v) = prefactor * exp(v^T q v / 2)`` with ``v = (z1, z2, eta1, eta2)``."""

    prefactor: float
    q: np.ndarray


def mix_matrix(spec: ChannelSpec) -> MixMatrix:
    """Canonical position-block for each channel family.

    D(kappa) uses the hyperbolic mixer with ``sinh mu = kappa``; C1 the
    two-mode rotation with ``cos theta = kappa``; C2 the two-mode squeeze
    with ``cosh nu = kappa``.
    """
    fam = spec.family
    if fam == "D":
        k, c = spec.kappa, np.sqrt(1.0 + spec.kappa**2)
        return MixMatrix(np.array([[-k, c], [c, -k]]))
    if fam == "C1":
        k, s = spec.kappa, np.sqrt(1.0 - spec.kappa**2)
        return MixMatrix(np.array([[k, s], [-s, k]]))
    if fam == "C2":
        k, s = spec.kappa, np.sqrt(spec.kappa**2 - 1.0)
        return MixMatrix(np.array([[k, -s], [-s, k]]))
    if fam == "A2":
        return MixMatrix(A2_MIX)
    if fam == "B1":
        return MixMatrix(B1_MIX)
    if fam == "I":
        return MixMatrix(np.eye(2))
    raise UnsupportedFamily(f"no direct-sum mixer stored for family {fam}")


def _quadrature_check(form: GeneratingForm, m: np.ndarray, rng: np.random.Generator,
                      points: int = 5, tol: float = 1e-10) -> None:
    # Direct 2D Gauss-Hermite evaluation of the defining integral at random v.
    x, w = roots_hermite(60)
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    ww = np.outer(w, w)
    for _ in range(points):
        v = rng.uniform(-0.6, 0.6, size=4)
        z1, z2, e1, e2 = v
        xp1 = m[0, 0] * x1 + m[0, 1] * x2
        xp2 = m[1, 0] * x1 + m[1, 1] * x2
        # integrand = exp(-x1^2 - x2^2) * g; pull the Gauss-Hermite weight out
        expo = (
            -0.5 * ((x1 - e1 * np.sqrt(2)) ** 2 + (x2 - e2 * np.sqrt(2)) ** 2
                    + (xp1 - z1 * np.sqrt(2)) ** 2 + (xp2 - z2 * np.sqrt(2)) ** 2
                    - e1**2 - e2**2 - z1**2 - z2**2)
            + x1**2 + x2**2
        )
        val = float(np.sum(ww * np.exp(expo)) / np.pi)
        ref = form.prefactor * np.exp(0.5 * v @ form.q @ v)
        if abs(val - ref) > tol * max(1.0, abs(ref)):
            raise NotPositiveDefinite(
                f"generating form fails its quadrature self-check: {val!r} vs {ref!r}"
            )


def generating_form(mix: MixMatrix, check: bool = True, seed: int = 7) -> GeneratingForm:
    """Carry out the Gaussian x-integration analytically.

    With ``A = 1 + M^T M`` and ``b = M^T z + eta`` the integral gives

        F = 2 det(A)^(-1/2) exp( b^T A^-1 b - (|z|^2 + |eta|^2) / 2 ).

    ``A`` is positive definite for every real invertible ``M``; the check
    is kept because it guards the whole scheme's domain assumption.  A
    cheap random-point quadrature comparison validates F at build time.
    """
    m = mix.m
    a = np.eye(2) + m.T @ m
    evals = np.linalg.eigvalsh(a)
    if evals.min() <= 1e-12:
        raise NotPositiveDefinite("x-integration quadratic form is not positive definite")
    prefactor = 2.0 / np.sqrt(np.linalg.det(a))
    a_inv = np.linalg.inv(a)
    b = np.zeros((2, 4))
    b[:, 0:2] = m.T  # z-part
    b[:, 2:4] = np.eye(2)  # eta-part
    q = 2.0 * b.T @ a_inv @ b - np.eye(4)
    q = 0.5 * (q + q.T)
    form = GeneratingForm(float(prefactor), q)
    if check:
        _quadrature_check(form, m, np.random.default_rng(seed))
    return form


def _scaled_taylor_slice(form: GeneratingForm, n1_max: int, ell_max: int, m1_max: int) -> np.ndarray:
    """Scaled coefficients ``C^(m1 m2)_(n1 0)`` on the ancilla-vacuum slice.

    Returns ``t[n1, m1, m2] = sqrt(n1! m1! m2!) * taylor(F/prefactor)``
    (the ``n2 = 0`` slice closes under the recurrence because lowering an
    index below zero contributes nothing).
    """
    for order in (n1_max, ell_max, m1_max):
        if order > MAX_ORDER:
            raise OrderTooLarge(f"order {order} exceeds the stable limit {MAX_ORDER}")
    q = form.q
    # v index order: 0=z1, 1=z2, 2=eta1, 3=eta2; slice axis layout (z1, eta1, eta2)
    axis_of = {0: 0, 2: 1, 3: 2}
    t = np.zeros((n1_max + 1, m1_max + 1, ell_max + 1))
    t[0, 0, 0] = 1.0
    for total in range(1, n1_max + m1_max + ell_max + 1):
        for k0 in range(min(total, n1_max) + 1):
            rem = total - k0
            for k2 in range(min(rem, m1_max) + 1):
                k3 = rem - k2
                if k3 > ell_max:
                    continue
                k = (k0, k2, k3)
                # increment the first nonzero axis: k = m + e_i
                i_axis = next(ax for ax in range(3) if k[ax] > 0)
                i = (0, 2, 3)[i_axis]
                m_idx = list(k)
                m_idx[i_axis] -= 1
                acc = 0.0
                for j in (0, 2, 3):
                    j_axis = axis_of[j]
                    if m_idx[j_axis] == 0:
                        continue
                    lower = list(m_idx)
                    lower[j_axis] -= 1
                    acc += q[i, j] * np.sqrt(m_idx[j_axis]) * t[tuple(lower)]
                t[tuple(k)] = acc / np.sqrt(k[i_axis])
    return t


def matrix_element(form: GeneratingForm, m1: int, m2: int, n1: int, n2: int) -> float:
    """Two-mode metaplectic matrix element ``<m1 m2|U|n1 n2>``."""
    for order in (m1, m2, n1, n2):
        if order < 0:
            raise InvalidParameter("orders must be nonnegative")
        if order > MAX_ORDER:
            raise OrderTooLarge(f"order {order} exceeds the stable limit {MAX_ORDER}")
    if (n1 + 1) * (n2 + 1) * (m1 + 1) * (m2 + 1) > 20_000_000:
        raise OrderTooLarge("joint orders need an infeasibly large coefficient box")
    q = form.q
    size = (n1 + 1, n2 + 1, m1 + 1, m2 + 1)
    t = np.zeros(size)
    t[0, 0, 0, 0] = 1.0
    target = (n1, n2, m1, m2)
    for total in range(1, sum(target) + 1):
        for k0 in range(min(total, n1) + 1):
            for k1 in range(min(total - k0, n2) + 1):
                for k2 in range(min(total - k0 - k1, m1) + 1):
                    k3 = total - k0 - k1 - k2
                    if k3 > m2:
                        continue
                    k = (k0, k1, k2, k3)
                    i = next(ax for ax in range(4) if k[ax] > 0)
                    m_idx = list(k)
                    m_idx[i] -= 1
                    acc = 0.0
                    for j in range(4):
                        if m_idx[j] == 0:
                            continue
                        lower = list(m_idx)
                        lower[j] -= 1
                        acc += q[i, j] * np.sqrt(m_idx[j]) * t[tuple(lower)]
                    t[k] = acc / np.sqrt(k[i])
    return float(form.prefactor * t[target])


def kraus_from_scheme(mix: MixMatrix, ell_max: int, n_cut: int) -> KrausFamily:
    """Kraus operators ``W_l[m1, n1] = C^(m1 l)_(n1 0)`` from the scheme alone.

    The defect is measured before the output-row cutoff (extra rows are
    generated and discarded) so it reflects the index sum, not range
    truncation.
    """
    form = generating_form(mix)
    n_rows = min(n_cut + ell_max, MAX_ORDER + 1)
    t = _scaled_taylor_slice(form, n_cut - 1, ell_max, n_rows - 1)
    # t axes are (n1, m1, m2); operators are indexed [m2][m1][n1]
    full = form.prefactor * np.transpose(t, (2, 1, 0)).astype(np.complex128)
    defect = raw_completeness_defect(full)
    ops = np.ascontiguousarray(full[:, :n_cut, :])
    return KrausFamily(None, ops, DiscreteIndex(ell_max), defect, origin="scheme")


def _shape_matches(m: np.ndarray, ref: np.ndarray) -> bool:
    return bool(np.max(np.abs(m - ref)) < 1e-12)


def _overlap_table(n_cut: int, qs: np.ndarray, shifted_order: int | None = None) -> np.ndarray:
    """``g[m, n, i] = integral psi_m(x) psi_n(x - q_i) dx`` by exact quadrature.

    Centering at ``q/2`` makes the integrand a polynomial times
    ``exp(-t^2)``, so Gauss-Hermite with enough nodes is exact.
    """
    nodes = n_cut + 2
    t, w = roots_hermite(nodes)
    n_hi = n_cut - 1 if shifted_order is None else shifted_order
    out = np.empty((n_cut, n_hi + 1, qs.size))
    for i, qv in enumerate(qs):
        # psi_n(y) = htilde_n(y) exp(-y^2/2); pulling both Gaussians out leaves
        # exp(-t^2 - q^2/4) against the Hermite weight
        left = _weightless_psi(n_cut - 1, t + 0.5 * qv)
        right = _weightless_psi(n_hi, t - 0.5 * qv)
        gauss = np.exp(-0.25 * qv**2)
        out[:, :, i] = gauss * np.einsum("mk,nk,k->mn", left, right, w)
    return out


def _weightless_psi(n_max: int, x: np.ndarray) -> np.ndarray:
    # psi_n without its exp(-x^2/2) factor; same three-term recurrence.
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = np.pi ** (-0.25)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for n in range(1, n_max):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[n] - np.sqrt(n / (n + 1)) * out[n - 1]
    return out


def position_kraus(mix: MixMatrix, node_count: int, n_cut: int) -> KrausFamily:
    """Continuous-index Kraus operators for the two singular-position mixers.

    For the A2 shape the ancilla position integral collapses to
    ``V_q[m, n] = g(m, 0, q) psi_n(q)``; for the unit shear it gives
    ``V_q[m, n] = psi_0(q) g(m, n, q)`` with ``g`` the shifted-wavefunction
    overlap evaluated by quadrature (no closed displacement form is used).
    """
    m = mix.m
    x, w = hermite_quadrature(node_count)
    ops = np.empty((node_count, n_cut, n_cut), dtype=np.complex128)
    if _shape_matches(m, A2_MIX):
        psi = hermite_psi_table(n_cut - 1, x)
        g = _overlap_table(n_cut, x, shifted_order=0)
        for i in range(node_count):
            ops[i] = np.sqrt(w[i]) * np.outer(g[:, 0, i], psi[:, i])
        spec = ChannelSpec("A2")
    elif _shape_matches(m, B1_MIX):
        psi0 = np.pi ** (-0.25) * np.exp(-0.5 * x**2)
        g = _overlap_table(n_cut, x)
        for i in range(node_count):
            ops[i] = np.sqrt(w[i]) * psi0[i] * g[:, :, i]
        spec = ChannelSpec("B1", noise_a=1.0)
    else:
        raise UnsupportedShape("only the A2 mixer and the unit shear are supported")
    family = KrausFamily(spec, ops, QuadratureIndex(x, w), 0.0, origin="scheme")
    from .kraus import completeness_defect as _family_defect

    return KrausFamily(spec, ops, QuadratureIndex(x, w), _family_defect(family), origin="scheme")
