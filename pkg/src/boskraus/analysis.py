"""Dynamical and structural channel analyses.

Covers iterated channel action and thermal fixed points, phase-space
cumulants and their transformation laws, interrupted (Zeno-like)
attenuation/amplification, the Gram-matrix extremality test on
``{W_m^dag W_n}``, product Kraus families for composites, and the
classicality diagnostics of each family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import ChannelSpec
from .errors import (
    CutoffTooSmall,
    DimMismatch,
    InvalidParameter,
    StencilFailure,
    UnsupportedFamily,
)
from .fock import DensityMatrix, char_weyl, coherent_amplitudes, q_function, trace_distance
from .kraus import (
    DiscreteIndex,
    KrausFamily,
    QuadratureIndex,
    apply,
    build_discrete,
    suggest_ell_max,
)
from .phasespace import table1_compose


def thermal_estimate(rho: DensityMatrix) -> float:
    """Thermal covariance parameter from the mean photon number, a0 = 2<n>+1."""
    n_mean = float(np.sum(np.arange(rho.dim) * np.diag(rho.mat).real))
    return 2.0 * n_mean + 1.0


@dataclass(frozen=True)
class Trajectory:
    """States visited under repeated channel application, with summaries."""

    states: list[DensityMatrix]
    a0_estimates: list[float]
    step_distances: list[float]


def iterate(family: KrausFamily, rho0: DensityMatrix, steps: int) -> Trajectory:
    """Apply the channel ``steps`` times, recording per-step diagnostics."""
    if steps < 1:
        raise InvalidParameter("steps must be at least 1")
    states = [rho0]
    a0s = [thermal_estimate(rho0)]
    dists: list[float] = []
    rho = rho0
    for _ in range(steps):
        nxt = apply(family, rho)
        dists.append(trace_distance(nxt, rho))
        rho = nxt
        states.append(rho)
        a0s.append(thermal_estimate(rho))
    return Trajectory(states, a0s, dists)


def thermal_step(spec: ChannelSpec, a0: float) -> float:
    """One-step affine map of the thermal parameter.

    D: a0 -> kappa^2 a0 + 1 + kappa^2;  C1: kappa^2 a0 + 1 - kappa^2;
    C2: kappa^2 a0 + kappa^2 - 1.
    """
    if a0 < 1.0:
        raise InvalidParameter("thermal parameter must be >= 1")
    if spec.family == "D":
        return spec.kappa**2 * a0 + 1.0 + spec.kappa**2
    if spec.family == "C1":
        return spec.kappa**2 * a0 + 1.0 - spec.kappa**2
    if spec.family == "C2":
        return spec.kappa**2 * a0 + spec.kappa**2 - 1.0
    raise UnsupportedFamily(f"no thermal recursion for family {spec.family}")


def fixed_point(spec: ChannelSpec) -> float | None:
    """Attracting thermal parameter, or None when no state is invariant.

    D(kappa < 1) is attracted to a0 = (1 + kappa^2)/(1 - kappa^2); the
    attenuator family (A1 included) to the vacuum.  The amplifier, the
    singular A2 and D(kappa >= 1) leave no state fixed.  The identity
    fixes everything, hence has no unique attractor and returns None.
    """
    if not spec.quantum_limited:
        raise UnsupportedFamily("fixed-point catalogue covers quantum-limited channels")
    fam = spec.family
    if fam == "D":
        if spec.kappa < 1.0:
            return (1.0 + spec.kappa**2) / (1.0 - spec.kappa**2)
        return None
    if fam == "C1":
        return 1.0 if spec.kappa < 1.0 else None
    if fam == "A1":
        return 1.0
    if fam in ("C2", "A2", "I"):
        return None
    raise UnsupportedFamily(f"no fixed-point rule for family {fam}")


def _fd_weights(order: int, offsets: np.ndarray) -> np.ndarray:
    """Fornberg finite-difference weights for the given derivative order."""
    n = offsets.size
    if order >= n:
        raise InvalidParameter("stencil too small for requested order")
    w = np.zeros((n, order + 1))
    w[0, 0] = 1.0
    c1, c4 = 1.0, offsets[0]
    for i in range(1, n):
        c2, c5, c4 = 1.0, c4, offsets[i]
        for j in range(i):
            c3 = offsets[i] - offsets[j]
            c2 *= c3
            if j == i - 1:
                for k in range(min(i, order), 0, -1):
                    w[i, k] = c1 * (k * w[i - 1, k - 1] - c5 * w[i - 1, k]) / c2
                w[i, 0] = -c1 * c5 * w[i - 1, 0] / c2
            for k in range(min(i, order), 0, -1):
                w[j, k] = (c4 * w[j, k] - k * w[j, k - 1]) / c3
            w[j, 0] = c4 * w[j, 0] / c3
        c1 = c2
    return w[:, order]


def _cumulant_table(rho: DensityMatrix, max_order: int, h: float) -> np.ndarray:
    half = (max_order + 1) // 2 + 1
    offsets = np.arange(-half, half + 1)
    grid = np.empty((offsets.size, offsets.size), dtype=complex)
    for i, oi in enumerate(offsets):
        for j, oj in enumerate(offsets):
            chi = char_weyl(rho, complex(oi * h, oj * h))
            if abs(chi) < 1e-12:
                raise StencilFailure(f"characteristic function vanishes at stencil point ({oi*h}, {oj*h})")
            grid[i, j] = np.log(chi)
    out = np.full((max_order + 1, max_order + 1), np.nan)
    for m1 in range(max_order + 1):
        for m2 in range(max_order + 1 - m1):
            if m1 == m2 == 0:
                out[0, 0] = 0.0
                continue
            w1 = _fd_weights(m1, offsets * h)
            w2 = _fd_weights(m2, offsets * h)
            val = np.einsum("i,j,ij->", w1, w2, grid)
            out[m1, m2] = ((-1j) ** (m1 + m2) * val).real
    return out


def cumulants(rho: DensityMatrix, max_order: int, h: float = 2e-2) -> np.ndarray:
    """Phase-space cumulants gamma[m1, m2] of log chi_W, Richardson-refined.

    Defined as d^m1/d(i xi1)^m1 d^m2/d(i xi2)^m2 log chi_W at xi = 0 with
    xi = xi1 + i xi2.  In these units a thermal state has
    gamma[2,0] = gamma[0,2] = a0 and all higher cumulants zero; entries
    with m1 + m2 > max_order are NaN.  Orders above 4 are reported but
    dominated by roundoff; treat them as low-confidence.  The default
    step balances the h^4 extrapolation remainder against the eps/h^4
    roundoff floor of fourth derivatives; below 1e-2 the roundoff side
    exceeds 1e-6 on exactly-Gaussian states.
    """
    if max_order > 6:
        raise InvalidParameter("cumulants supported up to total order 6")
    coarse = _cumulant_table(rho, max_order, h)
    fine = _cumulant_table(rho, max_order, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def zeno_kappa(mode: str, n_interrupts: int, steps: int, total: float | None = None) -> float:
    """Net gain after ``steps`` interrupted evolutions of length total/N.

    Attenuator: kappa = cos(total / N)^steps with total defaulting to
    pi/2 (total attenuation when uninterrupted).  Amplifier:
    kappa = cosh(total / N)^steps.
    """
    if n_interrupts < 1:
        raise InvalidParameter("need at least one evolution segment")
    if mode == "attenuator":
        total = 0.5 * np.pi if total is None else total
        return float(np.cos(total / n_interrupts) ** steps)
    if mode == "amplifier":
        if total is None:
            raise InvalidParameter("amplifier mode needs the total squeeze parameter")
        return float(np.cosh(total / n_interrupts) ** steps)
    raise InvalidParameter(f"mode must be 'attenuator' or 'amplifier', got {mode!r}")


@dataclass(frozen=True, eq=False)
class GramReport:
    """Singular spectrum of the Gram matrix of ``{W_m^dag W_n}``."""

    block: int
    singular_values: np.ndarray
    numerical_rank: int
    threshold: float


def _ordered_ops(family: KrausFamily, count: int) -> np.ndarray:
    if isinstance(family.index, DiscreteIndex):
        return family.ops[:count]
    # quadrature families: center-out, so neighboring nodes overlap
    order = np.argsort(np.abs(np.asarray(family.index.nodes, dtype=float)))
    return family.ops[order[:count]]


def gram_rank(family: KrausFamily, k: int, threshold: float = 1e-8,
              tail_check: bool = True) -> GramReport:
    """Numerical rank of the Gram matrix of the products ``W_m^dag W_n``.

    A channel is extremal iff these products are linearly independent,
    i.e. the Gram matrix of the first ``(k+1)^2`` products has full rank.
    ``threshold`` is relative to the largest singular value.  A cutoff
    sensitivity probe (dropping the top rows of the space) guards against
    band truncation silently deflating the products.

    For composite families built by :func:`product_family` the operators
    themselves are already two-factor products indexed by ``(m, n)``, so
    the Gram is taken over the first ``(k+1)^2`` operators directly: that
    is the linear-independence question those families raise (a dependent
    product set cannot certify extremality of the composite).
    """
    count = k + 1
    if family.origin == "product":
        if count * count > len(family):
            raise InvalidParameter(f"family has only {len(family)} operators, need {count * count}")
        prods = family.ops[: count * count]
    else:
        if count > len(family):
            raise InvalidParameter(f"family has only {len(family)} operators, need {count}")
        ops = _ordered_ops(family, count)
        prods = np.einsum("mji,njk->mnik", ops.conj(), ops).reshape(count * count, family.dim, family.dim)
    gram = np.einsum("aij,bij->ab", prods.conj(), prods)
    sv = np.linalg.svd(gram, compute_uv=False)
    if tail_check and family.dim > 16 and isinstance(family.index, DiscreteIndex):
        # banded products decay along their band; if entries still move when
        # the top of the space is dropped, the cutoff clipped them.
        # (Quadrature families are exempt: truncated position states gain
        # norm with the cutoff without affecting linear independence.)
        shrink = family.dim - 8
        small = prods[:, :shrink, :shrink]
        gram_small = np.einsum("aij,bij->ab", small.conj(), small)
        if np.max(np.abs(gram_small - gram)) > 1e-8 * max(sv[0], 1e-300):
            raise CutoffTooSmall("Gram entries still change when the top of the cutoff is dropped")
    rank = int(np.sum(sv > threshold * sv[0]))
    return GramReport(count * count, sv, rank, threshold)


def product_family(outer: KrausFamily, inner: KrausFamily, k: int) -> KrausFamily:
    """The ``(k+1)^2`` products (outer_m inner_n) as a Kraus family.

    Applying it agrees with applying ``inner`` then ``outer``; its spec is
    the composition-table entry for the pair.
    """
    if outer.dim != inner.dim:
        raise DimMismatch(f"dims differ: {outer.dim} vs {inner.dim}")
    if not (isinstance(outer.index, DiscreteIndex) and isinstance(inner.index, DiscreteIndex)):
        raise UnsupportedFamily("product families need two discrete-index factors")
    count = k + 1
    if count > len(outer) or count > len(inner):
        raise InvalidParameter("not enough operators for the requested block")
    ops = np.einsum("mij,njk->mnik", outer.ops[:count], inner.ops[:count])
    ops = ops.reshape(count * count, outer.dim, outer.dim)
    spec = None
    if outer.spec is not None and inner.spec is not None:
        try:
            spec = table1_compose(outer.spec, inner.spec)
        except Exception:
            spec = None
    from .kraus import completeness_defect

    return KrausFamily(spec, ops, DiscreteIndex(count * count - 1), completeness_defect(ops), origin="product")


@dataclass(frozen=True)
class ClassicalityReport:
    """Per-probe outcome of a family's phase-space scaling diagnostic."""

    spec: ChannelSpec
    check: str
    max_deviation: float
    passed: bool
    details: dict = field(default_factory=dict)


def _reconstruct_from_weight(weight_at, alphas, weights, n_cut) -> np.ndarray:
    mat = np.zeros((n_cut, n_cut), dtype=np.complex128)
    for al, w in zip(alphas, weights):
        ket = coherent_amplitudes(al, n_cut)
        mat += (w / np.pi) * weight_at(al) * np.outer(ket, ket.conj())
    return mat


def classicality_check(spec: ChannelSpec, probes: list[DensityMatrix], grid: np.ndarray,
                       tol: float = 1e-6) -> list[ClassicalityReport]:
    """Family-specific phase-space verification on the given probes.

    C1 sends coherent states to attenuated coherent states; C2 scales the
    Husimi function, ``Q'(alpha) = kappa^-2 Q(alpha/kappa)``; D outputs a
    state whose diagonal weight is the conjugate-scaled input Q, checked
    by rebuilding the output from that weight; the weight is nonnegative
    everywhere sampled.
    """
    from .fock import coherent_state

    reports = []
    fam = spec.family
    if not probes:
        raise InvalidParameter("need at least one probe state")
    n_cut = probes[0].dim
    if fam in ("C1", "C2", "D"):
        ell = suggest_ell_max(spec, n_cut, 1e-13)
        family = build_discrete(spec, ell, n_cut)
    if fam == "C1":
        lowering = np.diag(np.sqrt(np.arange(1, n_cut)), 1)
        for probe in probes:
            out = apply(family, probe)
            # coherent probes only: the center is <a>
            mean_in = complex(np.trace(probe.mat @ lowering))
            target = coherent_state(spec.kappa * mean_in, n_cut, tail_tol=1.0)
            dev = trace_distance(out, target)
            reports.append(ClassicalityReport(spec, "coherent-to-coherent", dev, dev < tol))
    elif fam == "C2":
        for probe in probes:
            out = apply(family, probe)
            devs = [abs(q_function(out, al) - q_function(probe, al / spec.kappa) / spec.kappa**2)
                    for al in grid]
            dev = float(max(devs))
            reports.append(ClassicalityReport(spec, "husimi-scaling", dev, dev < tol))
    elif fam == "D":
        k = spec.kappa
        radius = 1.2 * (np.sqrt(1.0 + k**2) * (np.max(np.abs(grid)) + 4.0))
        from .kraus import coherent_disc_grid

        alphas, weights = coherent_disc_grid(radius, 48, 48)
        for probe in probes:
            out = apply(family, probe)
            weight = lambda al: q_function(probe, np.conj(al) / k) / k**2
            rebuilt = _reconstruct_from_weight(weight, alphas, weights, n_cut)
            tr = float(np.trace(rebuilt).real)
            dev = float(np.max(np.abs(rebuilt / tr - out.mat)))
            negative = min(weight(al) for al in grid)
            ok = dev < 10 * tol and negative >= -1e-12
            reports.append(ClassicalityReport(spec, "conjugated-q-weight", dev, ok,
                                              {"min_weight": float(negative)}))
    elif fam == "A2":
        from .kraus import build_continuous

        family = build_continuous(spec, max(2 * n_cut, 64), n_cut)
        for probe in probes:
            diag_weight = [float(np.real(v.conj() @ probe.mat @ v))
                           for v in _position_vectors(family, n_cut)]
            dev = -min(0.0, min(diag_weight))
            reports.append(ClassicalityReport(spec, "position-weight-nonnegative", dev, dev < tol))
    else:
        raise UnsupportedFamily(f"no classicality diagnostic for family {fam}")
    return reports


def _position_vectors(family: KrausFamily, n_cut: int):
    from .fock import hermite_psi_table

    nodes = family.index.nodes
    table = hermite_psi_table(n_cut - 1, nodes)
    return [table[:, i] for i in range(nodes.size)]


def simultaneous_diagonality(family: KrausFamily, tol: float = 1e-12) -> tuple[bool, str]:
    """Whether all ``W^dag W`` are simultaneously diagonal, and in what basis.

    Returns a basis tag: ``fock`` when every product is diagonal in the
    number basis, ``any`` when every product is a multiple of the
    identity, ``position`` when each product is the (rank-one) projector
    onto a position wavefunction, and ``none`` otherwise.

    Displacement-built families are re-evaluated with enough extra rows
    for the unitary factor's product to close; the stored square
    truncation would leave spurious off-diagonals near the cutoff.
    """
    ops = family.ops
    spec = family.spec
    if spec is not None and spec.family == "B1" and isinstance(family.index, QuadratureIndex) \
            and spec.noise_a > 0:
        from .fock import displacement_op

        nodes = np.asarray(family.index.nodes, dtype=float)
        beta_max = float(np.max(np.abs(nodes))) / np.sqrt(2.0)
        n_ext = int(np.ceil(1.2 * (beta_max + np.sqrt(family.dim)) ** 2)) + 8
        scales = np.sqrt(np.abs(np.einsum("lij,lij->l", ops, ops.conj())))
        ops = np.stack([
            displacement_op(q / np.sqrt(2.0), n_ext).mat[:, :family.dim] for q in nodes
        ])
        norm = np.sqrt(np.abs(np.einsum("lij,lij->l", ops, ops.conj())))
        ops = ops * (scales / np.maximum(norm, 1e-300))[:, None, None]
    prods = np.einsum("lji,ljk->lik", ops.conj(), ops)
    scale = max(float(np.max(np.abs(prods))), 1e-300)
    off = prods - np.einsum("lii,ij->lij", prods, np.eye(family.dim, dtype=complex))
    if np.max(np.abs(off)) < tol * scale:
        diags = np.einsum("lii->li", prods).real
        spread = np.max(np.abs(diags - diags[:, :1]), initial=0.0)
        if spread < tol * scale:
            return True, "any"
        return True, "fock"
    if isinstance(family.index, QuadratureIndex):
        nodes = family.index.nodes
        from .fock import hermite_psi_table

        table = hermite_psi_table(family.dim - 1, np.asarray(nodes, dtype=float))
        for i in range(len(family)):
            p = prods[i]
            v = table[:, i].astype(complex)
            vv = max(float((v.conj() @ v).real), 1e-300)
            coeff = float(np.real(v.conj() @ p @ v)) / vv**2
            resid = np.max(np.abs(p - coeff * np.outer(v, v.conj())))
            if resid > 1e-8 * scale:
                return False, "none"
        return True, "position"
    return False, "none"
