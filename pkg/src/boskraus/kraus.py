"""Closed-form Kraus families for the canonical quantum-limited channels.

The discrete families are single-band matrices in the Fock basis:

* phase conjugation ``D(kappa)``::

      T_l = (1+k^2)^(-1/2) sum_n (1+k^2)^(-n/2) (1+k^-2)^(-(l-n)/2)
            sqrt(C(l,n)) |l-n><n|,        l = 0, 1, 2, ...

* attenuator ``C1(kappa)``::

      B_l = sum_m sqrt(C(m+l,l)) (1-k^2)^(l/2) k^m |m><m+l|

* amplifier ``C2(kappa)``::

      A_l = k^-1 sum_m sqrt(C(m+l,l)) (1-k^-2)^(l/2) k^-m |m+l><m|

``A1`` is ``C1(0)``.  The singular family ``A2`` and the single-quadrature
noise family ``B1(a)`` carry a continuous index and are discretized on
Gauss-Hermite nodes, with the square root of the quadrature weight
absorbed into each operator so that ``sum_i W_i^dag W_i`` approximates the
completeness integral.

All coefficient evaluation is done in log space (gammaln), never through
factorial ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, roots_hermite

from .channels import ChannelSpec
from .errors import (
    DefectTooLarge,
    DimMismatch,
    GridTooCoarse,
    InvalidParameter,
    UnsupportedFamily,
)
from .fock import (
    DensityMatrix,
    TruncatedOperator,
    coherent_amplitudes,
    displacement_op,
    hermite_psi_table,
    thermal_state,
    trace_distance,
)

DEFECT_HARD_LIMIT = 1e-4


@dataclass(frozen=True)
class DiscreteIndex:
    """Kraus label runs over l = 0 .. ell_max."""

    ell_max: int


@dataclass(frozen=True, eq=False)
class QuadratureIndex:
    """Continuous Kraus label discretized on quadrature nodes.

    ``weights`` are the full integration weights; sqrt(weight) is already
    absorbed into the stored operators.
    """

    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class KrausFamily:
    """An ordered stack of Kraus operators plus channel metadata."""

    spec: ChannelSpec | None
    ops: np.ndarray  # (n_ops, dim, dim) complex
    index: DiscreteIndex | QuadratureIndex
    completeness_defect: float
    origin: str = "closed-form"

    @property
    def dim(self) -> int:
        return self.ops.shape[1]

    def __len__(self) -> int:
        return self.ops.shape[0]

    def __getitem__(self, ell: int) -> TruncatedOperator:
        return TruncatedOperator(self.ops[ell])

    def to_json_dict(self) -> dict:
        if isinstance(self.index, DiscreteIndex):
            index = {"kind": "discrete", "ell_max": self.index.ell_max}
        else:
            index = {
                "kind": "quadrature",
                "nodes": self.index.nodes.tolist(),
                "weights": self.index.weights.tolist(),
            }
        operators = []
        for op in self.ops:
            rows, cols = np.nonzero(op)
            operators.append({
                "rows": rows.tolist(),
                "cols": cols.tolist(),
                "re": op[rows, cols].real.tolist(),
                "im": op[rows, cols].imag.tolist(),
            })
        return {
            "spec": self.spec.to_json_dict() if self.spec is not None else None,
            "index_kind": index,
            "dim": self.dim,
            "completeness_defect": float(self.completeness_defect),
            "origin": self.origin,
            "operators": operators,
        }

    @staticmethod
    def from_json_dict(data: dict) -> "KrausFamily":
        dim = int(data["dim"])
        ops = np.zeros((len(data["operators"]), dim, dim), dtype=np.complex128)
        for k, rec in enumerate(data["operators"]):
            vals = np.asarray(rec["re"], dtype=float) + 1j * np.asarray(rec["im"], dtype=float)
            ops[k][np.asarray(rec["rows"], dtype=int), np.asarray(rec["cols"], dtype=int)] = vals
        idx = data["index_kind"]
        if idx["kind"] == "discrete":
            index = DiscreteIndex(int(idx["ell_max"]))
        else:
            index = QuadratureIndex(np.asarray(idx["nodes"]), np.asarray(idx["weights"]))
        spec = None if data["spec"] is None else ChannelSpec.from_json_dict(data["spec"])
        return KrausFamily(spec, ops, index, float(data["completeness_defect"]), data.get("origin", "closed-form"))


def _log_binom_sqrt(n, k):
    """0.5 * log C(n, k), vectorized."""
    return 0.5 * (gammaln(np.asarray(n) + 1) - gammaln(np.asarray(k) + 1) - gammaln(np.asarray(n) - np.asarray(k) + 1))


def _d_op(kappa: float, ell: int, n_rows: int, n_cols: int) -> np.ndarray:
    op = np.zeros((n_rows, n_cols), dtype=np.complex128)
    n = np.arange(max(0, ell - n_rows + 1), min(ell, n_cols - 1) + 1)
    if n.size == 0:
        return op
    logc = (
        _log_binom_sqrt(ell, n)
        - 0.5 * (n + 1) * math.log1p(kappa**2)
        - 0.5 * (ell - n) * math.log1p(kappa**-2)
    )
    op[ell - n, n] = np.exp(logc)
    return op


def _c1_op(kappa: float, ell: int, n_rows: int, n_cols: int) -> np.ndarray:
    op = np.zeros((n_rows, n_cols), dtype=np.complex128)
    if kappa == 0.0:  # A1 end: B_l = |0><l|
        if ell < n_cols:
            op[0, ell] = 1.0
        return op
    if kappa == 1.0:  # identity channel
        if ell == 0:
            np.fill_diagonal(op, 1.0)
        return op
    m = np.arange(0, min(n_rows, n_cols - ell))
    if m.size == 0:
        return op
    logc = _log_binom_sqrt(m + ell, ell) + 0.5 * ell * math.log(1.0 - kappa**2) + m * math.log(kappa)
    op[m, m + ell] = np.exp(logc)
    return op


def _c2_op(kappa: float, ell: int, n_rows: int, n_cols: int) -> np.ndarray:
    op = np.zeros((n_rows, n_cols), dtype=np.complex128)
    if kappa == 1.0:
        if ell == 0:
            np.fill_diagonal(op, 1.0)
        return op
    m = np.arange(0, min(n_cols, n_rows - ell))
    if m.size == 0:
        return op
    logc = (
        -math.log(kappa)
        + _log_binom_sqrt(m + ell, ell)
        + 0.5 * ell * math.log(1.0 - kappa**-2)
        - m * math.log(kappa)
    )
    op[m + ell, m] = np.exp(logc)
    return op


def raw_completeness_defect(ops: np.ndarray, block: int | None = None) -> float:
    """Operator norm of ``sum W^dag W - 1`` on the protected lower block.

    Accepts rectangular stacks ``(n_ops, n_rows, n_cols)``: the sum runs
    over the full row range so the range cutoff does not masquerade as an
    index-sum deficiency.  The default block is half the column space.
    """
    dim = ops.shape[2]
    b = dim // 2 if block is None else block
    s = np.einsum("lji,ljk->ik", ops.conj(), ops)
    s -= np.eye(dim)
    return float(np.linalg.norm(s[:b, :b], ord=2))


def completeness_defect(family: "KrausFamily | np.ndarray", block: int | None = None) -> float:
    """Completeness defect of a family on its protected lower block.

    For closed-form discrete families the operators are rebuilt with
    enough extra rows that no band weight is lost to the range cutoff;
    for quadrature families the exactly-normalized factor (coherent ket,
    displacement unitary) is summed analytically.  Falling back to the
    stored square matrices would conflate range truncation with a genuine
    index-sum deficit.
    """
    if isinstance(family, np.ndarray):
        return raw_completeness_defect(family, block)
    spec, dim = family.spec, family.dim
    if isinstance(family.index, DiscreteIndex) and spec is not None and spec.quantum_limited \
            and spec.family in ("D", "C1", "C2", "A1", "I") and family.origin == "closed-form":
        ell_max = family.index.ell_max
        ops = _banded_ops(spec, ell_max, dim + ell_max, dim)
        return raw_completeness_defect(ops, block)
    if isinstance(family.index, QuadratureIndex) and spec is not None and spec.family == "A2":
        return _position_resolution_defect(family.index.nodes, family.index.weights, dim, block)
    if isinstance(family.index, QuadratureIndex) and spec is not None and spec.family == "B1":
        return float(abs(np.sum(family.index.weights / np.sqrt(np.pi * max(spec.noise_a, 1e-300))
                                * np.exp(-family.index.nodes**2 / max(spec.noise_a, 1e-300))) - 1.0)) \
            if spec.noise_a > 0 else 0.0
    if family.origin == "rank-one" and spec is not None and spec.family == "D":
        bra_scale = 1.0 / np.sqrt(1.0 + spec.kappa**2)
        vecs = np.stack([
            coherent_amplitudes(np.conj(al) * bra_scale, dim) * np.sqrt(w / (np.pi * (1.0 + spec.kappa**2)))
            for al, w in zip(family.index.nodes, family.index.weights)
        ])
        s = np.einsum("li,lk->ik", vecs, vecs.conj())
        b = dim // 2 if block is None else block
        return float(np.linalg.norm((s - np.eye(dim))[:b, :b], ord=2))
    return raw_completeness_defect(family.ops, block)


def _position_resolution_defect(nodes: np.ndarray, weights: np.ndarray, dim: int,
                                block: int | None = None) -> float:
    psi = hermite_psi_table(dim - 1, nodes)
    s = np.einsum("i,ni,mi->nm", weights, psi, psi)
    b = dim // 2 if block is None else block
    return float(np.linalg.norm((s - np.eye(dim))[:b, :b], ord=2))


def _banded_ops(spec: ChannelSpec, ell_max: int, n_rows: int, n_cols: int) -> np.ndarray:
    fam = spec.family
    if fam == "I":
        ops = np.zeros((1, n_rows, n_cols), dtype=np.complex128)
        np.fill_diagonal(ops[0], 1.0)
        return ops
    maker = {"D": _d_op, "C1": _c1_op, "C2": _c2_op, "A1": _c1_op}[fam]
    kappa = 0.0 if fam == "A1" else spec.kappa
    return np.stack([maker(kappa, ell, n_rows, n_cols) for ell in range(ell_max + 1)])


def suggest_ell_max(spec: ChannelSpec, n_protect: int, tol: float = 1e-12) -> int:
    """Smallest index cut keeping the completeness tail below ``tol``.

    The per-level weights of ``sum_l (W_l^dag W_l)[n, n]`` decay
    geometrically in l; the worst protected level is ``n_protect - 1``.
    """
    fam = spec.family
    if fam in ("I", "A1") or (fam == "C1"):
        return max(n_protect - 1, 0) if fam != "I" else 0
    n = n_protect - 1
    if fam == "D":
        ratio = 1.0 / (1.0 + spec.kappa**-2)
        # weight(l) = C(l, n) (1+k^2)^(-1-n) ratio^(l-n), l >= n
        log_w = -(n + 1) * math.log1p(spec.kappa**2)
        term = math.exp(log_w)  # l = n term, C(n,n)=1
        ell, remaining = n, 1.0 - term
        while remaining > tol and ell < 100000:
            ell += 1
            term *= ratio * ell / (ell - n)
            remaining -= term
        return ell
    if fam == "C2":
        if spec.kappa == 1.0:
            return 0
        ratio = 1.0 - spec.kappa**-2
        term = spec.kappa ** (-2.0 * (n + 1))  # l = 0 term at level n
        ell, remaining = 0, 1.0 - term
        while remaining > tol and ell < 100000:
            ell += 1
            term *= ratio * (n + ell) / ell
            remaining -= term
        return ell
    raise UnsupportedFamily(
        f"family {fam} has no quantum-limited discrete Kraus list; noisy: use compose/synthesize")


def build_discrete(spec: ChannelSpec, ell_max: int, n_cut: int,
                   defect_limit: float = DEFECT_HARD_LIMIT) -> KrausFamily:
    """Closed-form Kraus family for ``D``, ``C1``, ``C2``, ``A1`` or the identity.

    The stored operators are square truncations; the recorded defect is
    the index-sum deficit on the protected domain block, measured before
    the range cutoff is imposed.
    """
    if not spec.quantum_limited:
        raise UnsupportedFamily(f"{spec}: noisy; use compose/synthesize")
    fam = spec.family
    if fam == "I":
        ops = np.eye(n_cut, dtype=np.complex128)[None, :, :]
        return KrausFamily(spec, ops, DiscreteIndex(0), 0.0)
    if fam not in ("D", "C1", "C2", "A1"):
        raise UnsupportedFamily(
            f"family {fam} has no quantum-limited discrete Kraus list; noisy: use compose/synthesize")
    extended = _banded_ops(spec, ell_max, n_cut + ell_max, n_cut)
    defect = raw_completeness_defect(extended)
    if defect > defect_limit:
        raise DefectTooLarge(
            f"{spec} at ell_max={ell_max}, n_cut={n_cut}: defect {defect:.3e} > {defect_limit:.1e}"
        )
    ops = np.ascontiguousarray(extended[:, :n_cut, :])
    return KrausFamily(spec, ops, DiscreteIndex(ell_max), defect)


def hermite_quadrature(node_count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and total weights for ``integral dq f(q)``.

    Returns ``(x, w)`` with ``sum w_i f(x_i) ~ integral f`` for integrands
    decaying at least like ``exp(-x^2)``; ``w = w_GH * exp(x^2)``.
    """
    x, w = roots_hermite(node_count)
    return x, w * np.exp(x**2)


def build_continuous(spec: ChannelSpec, node_count: int, n_cut: int,
                     defect_limit: float = DEFECT_HARD_LIMIT) -> KrausFamily:
    """Quadrature-discretized Kraus family for ``A2`` or ``B1(a)``.

    A2 operators are ``V_q = |q/sqrt(2)) <q|`` (coherent ket, position
    bra); B1 operators are Gaussian-weighted displacements
    ``Z_q = (pi a)^(-1/4) exp(-q^2/(2a)) D(q/sqrt(2))``.  Both are
    premultiplied by the square root of their quadrature weight.
    """
    if node_count < 32:
        raise InvalidParameter(f"node_count must be at least 32, got {node_count}")
    fam = spec.family
    if fam == "A2":
        if not spec.quantum_limited:
            raise UnsupportedFamily("noisy A2: compose the quantum-limited family with added noise")
        x, w = hermite_quadrature(node_count)
        psi = hermite_psi_table(n_cut - 1, x)  # (n_cut, nodes)
        ops = np.empty((node_count, n_cut, n_cut), dtype=np.complex128)
        for i in range(node_count):
            ket = coherent_amplitudes(x[i] / np.sqrt(2.0), n_cut)
            ops[i] = np.sqrt(w[i]) * np.outer(ket, psi[:, i])
        index = QuadratureIndex(x, w)
        defect = _position_resolution_defect(x, w, n_cut)
    elif fam == "B1":
        a = spec.noise_a
        if a == 0.0:
            ops = np.eye(n_cut, dtype=np.complex128)[None, :, :]
            return KrausFamily(spec, ops, QuadratureIndex(np.zeros(1), np.ones(1)), 0.0)
        # substitute q = sqrt(a) t: (pi a)^(-1/2) integral dq e^(-q^2/a) D(q/sqrt2) rho D^dag
        t, w = roots_hermite(node_count)
        q = np.sqrt(a) * t
        ops = np.empty((node_count, n_cut, n_cut), dtype=np.complex128)
        for i in range(node_count):
            ops[i] = np.sqrt(w[i] / np.sqrt(np.pi)) * displacement_op(q[i] / np.sqrt(2.0), n_cut).mat
        index = QuadratureIndex(q, w * np.sqrt(a) * np.exp(t**2))
        # the displacement factor is exactly unitary, so only the Gaussian
        # quadrature itself can fall short of the completeness integral
        defect = float(abs(np.sum(w) / np.sqrt(np.pi) - 1.0))
    else:
        raise UnsupportedFamily(f"family {fam} is not a continuous-index family")
    if defect > defect_limit:
        raise DefectTooLarge(f"{spec}: defect {defect:.3e} > {defect_limit:.1e}; raise node_count or n_cut")
    return KrausFamily(spec, ops, index, defect)


def _superoperator(family: KrausFamily):
    """Cached sparse matrix of ``rho -> sum W rho W^dag`` on row-major vec.

    Banded families have ~dim nonzeros per operator, so
    ``sum_l W_l (x) conj(W_l)`` stays sparse; built lazily once per family.
    """
    cached = getattr(family, "_superop", None)
    if cached is None:
        from scipy import sparse

        cached = None
        for op in family.ops:
            m = sparse.csr_matrix(op)
            term = sparse.kron(m, m.conj(), format="csr")
            cached = term if cached is None else cached + term
        object.__setattr__(family, "_superop", cached)
    return cached


def apply_matrix(family: KrausFamily, mat: np.ndarray) -> np.ndarray:
    """Raw operator-sum action ``sum_l W_l M W_l^dag`` (no renormalization)."""
    if mat.shape[0] != family.dim:
        raise DimMismatch(f"operator dim {mat.shape[0]} != family dim {family.dim}")
    n_ops, n, _ = family.ops.shape
    sparsity = np.count_nonzero(family.ops) / family.ops.size
    if sparsity < 0.125:
        out = _superoperator(family) @ mat.astype(np.complex128).ravel()
        return out.reshape(n, n)
    # dense stacks: two flattened BLAS products instead of a per-operator loop
    tmp = (family.ops.reshape(n_ops * n, n) @ mat).reshape(n_ops, n, n)
    left = np.ascontiguousarray(tmp.transpose(1, 0, 2)).reshape(n, n_ops * n)
    right = family.ops.conj().transpose(0, 2, 1).reshape(n_ops * n, n)
    return left @ right


def apply(family: KrausFamily, rho: DensityMatrix) -> DensityMatrix:
    """Apply the channel; renormalize and report leakage in ``tail_mass``.

    The in-cutoff trace after the operator sum falls short of 1 by the
    input tail plus whatever the channel pushed past the cutoff; the
    output is rescaled to unit trace and that shortfall is recorded.
    """
    out = apply_matrix(family, rho.mat)
    out = 0.5 * (out + out.conj().T)
    tr = float(np.trace(out).real)
    if tr <= 1e-12:
        raise InvalidParameter("channel output has vanishing trace inside the cutoff")
    leak = max(0.0, 1.0 - tr)
    return DensityMatrix(TruncatedOperator(out / tr), leak)


def dual(family: KrausFamily) -> KrausFamily:
    """Adjoint Kraus set rescaled into the dual trace-preserving channel.

    ``kappa T_l(kappa)^dag = T_l(1/kappa)`` maps D(kappa) to D(1/kappa);
    ``kappa A_l(kappa)^dag = B_l(1/kappa)`` maps C2(kappa) to C1(1/kappa)
    and conversely ``kappa B_l(kappa)^dag = A_l(1/kappa)``.
    """
    if not isinstance(family.index, DiscreteIndex):
        raise UnsupportedFamily("continuous-index families have no discrete dual here")
    spec = family.spec
    if spec is None:
        raise UnsupportedFamily("cannot form the dual of an unlabeled family")
    if spec.family == "I":
        return family
    if spec.family not in ("D", "C1", "C2") or not spec.quantum_limited:
        raise UnsupportedFamily(f"no dual rule for {spec}")
    kappa = spec.kappa
    if kappa == 0.0:
        raise InvalidParameter("dual of the kappa=0 attenuator is not defined")
    dual_family = {"D": "D", "C1": "C2", "C2": "C1"}[spec.family]
    new_spec = ChannelSpec(dual_family, 1.0 / kappa)
    ops = kappa * np.transpose(family.ops.conj(), (0, 2, 1))
    out = KrausFamily(new_spec, ops, family.index, 0.0, family.origin)
    return replace(out, completeness_defect=completeness_defect(out))


def coherent_disc_grid(radius: float, n_radial: int, n_angular: int) -> tuple[np.ndarray, np.ndarray]:
    """Polar quadrature for ``integral_disc f(alpha) d^2 alpha``.

    Gauss-Legendre in the radius, uniform (trapezoidal, exact for
    trigonometric polynomials) in the angle.  Returns complex nodes and
    positive weights.
    """
    r, wr = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (r + 1.0)
    wr = 0.5 * radius * wr * r  # includes the r dr Jacobian
    theta = 2.0 * np.pi * np.arange(n_angular) / n_angular
    wt = 2.0 * np.pi / n_angular
    alphas = (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
    weights = (wr[:, None] * wt * np.ones(n_angular)[None, :]).ravel()
    return alphas, weights


def rank_one_d(kappa: float, alphas: np.ndarray, weights: np.ndarray, n_cut: int,
               probe_check: bool = True, probe_tol: float = 1e-4) -> KrausFamily:
    """Rank-one (entanglement-breaking) Kraus family for ``D(kappa)``.

    Each operator is

        T'_alpha = (1+kappa^2)^(-1/2)
                   |alpha / sqrt(1+kappa^-2)> <conj(alpha) / sqrt(1+kappa^2)|

    carrying ``sqrt(weight / pi)`` so the family sums the coherent-state
    resolution ``rho' = pi^-1 integral T' rho T'^dag d^2 alpha``.
    """
    if kappa <= 0:
        raise InvalidParameter("kappa must be positive")
    alphas = np.asarray(alphas, dtype=complex)
    weights = np.asarray(weights, dtype=float)
    if alphas.shape != weights.shape:
        raise InvalidParameter("alphas and weights must have matching shapes")
    pref = 1.0 / np.sqrt(1.0 + kappa**2)
    ket_scale = 1.0 / np.sqrt(1.0 + kappa**-2)
    bra_scale = 1.0 / np.sqrt(1.0 + kappa**2)
    ops = np.empty((alphas.size, n_cut, n_cut), dtype=np.complex128)
    for i, (al, w) in enumerate(zip(alphas, weights)):
        ket = coherent_amplitudes(al * ket_scale, n_cut)
        bra = coherent_amplitudes(np.conj(al) * bra_scale, n_cut)
        ops[i] = (pref * np.sqrt(w / np.pi)) * np.outer(ket, bra.conj())
    family = KrausFamily(
        ChannelSpec("D", kappa),
        ops,
        QuadratureIndex(alphas, weights),
        0.0,
        origin="rank-one",
    )
    family = replace(family, completeness_defect=completeness_defect(family))
    if probe_check:
        probe = thermal_state(2.0, n_cut, tail_tol=1.0)
        reference = apply(build_discrete(ChannelSpec("D", kappa), suggest_ell_max(ChannelSpec("D", kappa), n_cut), n_cut), probe)
        got = apply(family, probe)
        dev = trace_distance(got, reference)
        if dev > probe_tol:
            raise GridTooCoarse(f"rank-one grid misses the channel output by {dev:.3e} on the thermal probe")
    return family


def closed_form_action(spec: ChannelSpec, m: int, n: int, n_cut: int) -> TruncatedOperator:
    """Image of ``|m><n|`` under the channel, from the summed band formulas.

    D(kappa) with ``n = m + delta``::

        |m+d><m|  ->  (1+k^2)^(-1-m-d/2) (1+k^-2)^(-d/2)
                      sum_j (j+m+d)! (1+k^-2)^(-j)
                            / sqrt((m+d)! m! j! (j+d)!)   |j><j+d|

    C1(kappa)::

        |m><n| -> sum_l sqrt(C(m,l) C(n,l)) (1-k^2)^l k^(m+n-2l) |m-l><n-l|

    C2(kappa)::

        |m><n| -> k^(-2-m-n) sum_l sqrt(C(m+l,l) C(n+l,l)) (1-k^-2)^l
                  |m+l><n+l|
    """
    if not (0 <= m < n_cut and 0 <= n < n_cut):
        raise InvalidParameter("Fock labels must sit inside the cutoff")
    if not spec.quantum_limited:
        raise UnsupportedFamily(f"{spec}: closed forms cover quantum-limited members only")
    out = np.zeros((n_cut, n_cut), dtype=np.complex128)
    fam = spec.family
    k = spec.kappa
    if fam == "D":
        # phase conjugation swaps the band orientation: |lo+d><lo| -> sum_j c_j |j><j+d|
        lo, delta = min(m, n), abs(m - n)
        j = np.arange(n_cut - delta)
        logc = (
            -(1.0 + lo + 0.5 * delta) * math.log1p(k**2)
            - 0.5 * delta * math.log1p(k**-2)
            - 0.5 * (gammaln(lo + delta + 1) + gammaln(lo + 1))
            + gammaln(j + lo + delta + 1)
            - j * math.log1p(k**-2)
            - 0.5 * (gammaln(j + 1) + gammaln(j + delta + 1))
        )
        if m >= n:
            out[j, j + delta] = np.exp(logc)
        else:
            out[j + delta, j] = np.exp(logc)
        return TruncatedOperator(out)
    if fam in ("C1", "A1"):
        kk = 0.0 if fam == "A1" else k
        if kk == 0.0:
            if m == n:
                out[0, 0] = 1.0
            return TruncatedOperator(out)
        if kk == 1.0:
            out[m, n] = 1.0
            return TruncatedOperator(out)
        for ell in range(min(m, n) + 1):
            out[m - ell, n - ell] = math.exp(
                _log_binom_sqrt(m, ell) + _log_binom_sqrt(n, ell)
                + ell * math.log(1.0 - kk**2) + (m + n - 2 * ell) * math.log(kk)
            )
        return TruncatedOperator(out)
    if fam == "C2":
        if k == 1.0:
            out[m, n] = 1.0
            return TruncatedOperator(out)
        for ell in range(n_cut - max(m, n)):
            out[m + ell, n + ell] = math.exp(
                -(2.0 + m + n) * math.log(k)
                + _log_binom_sqrt(m + ell, ell) + _log_binom_sqrt(n + ell, ell)
                + ell * math.log(1.0 - k**-2)
            )
        return TruncatedOperator(out)
    raise UnsupportedFamily(f"no closed-form Fock action for family {fam}")
