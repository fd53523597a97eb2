"""Qubit state and process tomography on photon counting data.

State reconstruction is maximum likelihood over Poissonian counts with
the density matrix parametrized as T^dag T / tr(T^dag T), T lower
triangular (4 real parameters), so every iterate is physical. Process
reconstruction is linear inversion of the four-input action

    rho_out = sum_kl chi_kl sigma_k rho_in sigma_l^dag

in the Pauli basis (I, X, Y, Z), followed by alternating projections
onto the trace-preserving affine subspace and the positive cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EstimationError
from .polarization import PAULIS, AnalysisSetting, PolarizationState, fidelity, standard_setting
from .tableio import write_csv

SETTING_LABELS = ("H", "V", "D", "A", "R", "L")

_LL_TOL = 1e-10
_MAX_ITER = 10_000
_PROJ_TOL = 1e-9
_LOW_RANK_EIG = 1e-9


@dataclass(frozen=True, eq=False)
class TomographyData:
    """Counts per analyzer setting with relative exposures and backgrounds."""

    settings: tuple[AnalysisSetting, ...]
    counts: np.ndarray
    exposures: np.ndarray | None = None
    backgrounds: np.ndarray | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        n = len(self.settings)
        if counts.shape != (n,):
            raise ValueError("counts must match the number of settings")
        if (counts < 0).any():
            raise ValueError("counts must be nonnegative")
        exposures = np.ones(n) if self.exposures is None else np.asarray(self.exposures, dtype=float)
        backgrounds = np.zeros(n) if self.backgrounds is None else np.asarray(self.backgrounds, dtype=float)
        if exposures.shape != (n,) or backgrounds.shape != (n,):
            raise ValueError("exposures and backgrounds must match the number of settings")
        if (exposures <= 0).any():
            raise ValueError("exposures must be positive")
        if (backgrounds < 0).any():
            raise ValueError("backgrounds must be nonnegative")
        projs = np.stack([s.projector.reshape(4) for s in self.settings])
        if np.linalg.matrix_rank(projs, tol=1e-9) < 4:
            raise ValueError("settings must contain at least 4 linearly independent projectors")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "exposures", exposures)
        object.__setattr__(self, "backgrounds", backgrounds)

    @classmethod
    def from_counts(cls, counts: Mapping[str, int], exposures: Mapping[str, float] | None = None,
                    backgrounds: Mapping[str, float] | None = None) -> "TomographyData":
        labels = [lab for lab in SETTING_LABELS if lab in counts]
        if set(counts) - set(labels):
            raise ValueError(f"unknown setting labels {sorted(set(counts) - set(labels))}")
        settings = tuple(standard_setting(lab) for lab in labels)
        n = np.array([counts[lab] for lab in labels])
        expo = None if exposures is None else np.array([exposures[lab] for lab in labels], dtype=float)
        bg = None if backgrounds is None else np.array([backgrounds[lab] for lab in labels], dtype=float)
        return cls(settings, n, expo, bg)


@dataclass(frozen=True, eq=False)
class DensityMatrixEstimate:
    """Maximum-likelihood state with its ascent diagnostics."""

    state: PolarizationState
    log_likelihood: float
    iterations: int
    converged: bool
    ll_trace: np.ndarray
    low_rank: bool


def _quadratic_forms(data: TomographyData) -> np.ndarray:
    """Per-setting matrices Q with tr(T^dag T P) = t . Q t, t = (a, d, Re c, Im c)."""
    qs = np.zeros((len(data.settings), 4, 4))
    for j, setting in enumerate(data.settings):
        p = setting.projector
        p00, p11 = p[0, 0].real, p[1, 1].real
        re01, im01 = p[0, 1].real, p[0, 1].imag
        q = qs[j]
        q[0, 0] = p00
        q[2, 2] = p00
        q[3, 3] = p00
        q[1, 1] = p11
        q[1, 2] = q[2, 1] = re01
        q[1, 3] = q[3, 1] = -im01
    return qs


def _t_params_to_rho(t: np.ndarray) -> np.ndarray:
    a, d, c_re, c_im = t
    c = c_re + 1j * c_im
    m = np.array([[a * a + abs(c) ** 2, np.conj(c) * d], [c * d, d * d]], dtype=complex)
    return m


def _linear_inversion_seed(data: TomographyData) -> np.ndarray:
    """Least-squares inversion, clipped to positive and Cholesky factored."""
    rows = []
    for setting in data.settings:
        p = setting.projector
        rows.append([p[0, 0].real, p[1, 1].real, 2.0 * p[0, 1].real, 2.0 * p[0, 1].imag])
    a = np.asarray(rows) * data.exposures[:, None]
    b = data.counts - data.backgrounds
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    m = np.array([[x[0], x[2] + 1j * x[3]], [x[2] - 1j * x[3], x[1]]], dtype=complex)
    w, v = np.linalg.eigh(m)
    floor = max(w.max(), 1.0) * 1e-6
    w = np.clip(w, floor, None)
    m = (v * w) @ v.conj().T
    tchol = np.linalg.cholesky(m)
    return np.array([tchol[0, 0].real, tchol[1, 1].real, tchol[1, 0].real, tchol[1, 0].imag])


def mle_state(data: TomographyData, *, tol: float = _LL_TOL, max_iter: int = _MAX_ITER) -> DensityMatrixEstimate:
    """Maximum-likelihood density matrix from counting data.

    Maximizes sum_j [n_j log m_j - m_j] with m_j = N_j tr(rho~ P_j)+b_j
    and rho~ = T^dag T by monotone gradient ascent with backtracking;
    the trace of rho~ absorbs the overall flux, so no separate scale
    parameter is needed. Stops when the relative log-likelihood change
    drops below tol or after max_iter accepted steps.
    """
    if data.counts.sum() <= 0:
        raise EstimationError("no counts to fit")
    qs = _quadratic_forms(data)
    n = data.counts.astype(float)
    expo = data.exposures
    bg = data.backgrounds

    def ll_of(t):
        m = expo * np.einsum("i,jik,k->j", t, qs, t) + bg
        m = np.clip(m, 1e-300, None)
        return float(np.sum(n * np.log(m) - m))

    t = _linear_inversion_seed(data)
    ll = ll_of(t)
    trace = [ll]
    step = 0.1 * np.linalg.norm(t) + 1e-12
    converged = False
    iters = 0
    for iters in range(1, max_iter + 1):
        qt = qs @ t
        m = expo * (qt @ t) + bg
        m = np.clip(m, 1e-300, None)
        grad = 2.0 * ((n / m - 1.0) * expo) @ qt
        gnorm = np.linalg.norm(grad)
        if gnorm == 0.0:
            converged = True
            break
        direction = grad / gnorm
        accepted = False
        while step > 1e-16 * (np.linalg.norm(t) + 1.0):
            cand = t + step * direction
            ll_cand = ll_of(cand)
            if ll_cand >= ll:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            converged = True  # no ascent direction left at machine precision
            break
        delta = ll_cand - ll
        t, ll = cand, ll_cand
        trace.append(ll)
        step *= 1.3
        if delta <= tol * max(1.0, abs(ll)):
            converged = True
            break

    rho_unnorm = _t_params_to_rho(t)
    tr = np.trace(rho_unnorm).real
    if tr <= 0:
        raise EstimationError("degenerate fit, zero trace")
    rho = rho_unnorm / tr
    rho = 0.5 * (rho + rho.conj().T)
    state = PolarizationState(rho)
    low_rank = bool(np.linalg.eigvalsh(rho).min() < _LOW_RANK_EIG)
    return DensityMatrixEstimate(state, ll, iters, converged, np.asarray(trace), low_rank)


def monte_carlo_errors(data: TomographyData, *, target: PolarizationState | None = None,
                       scalars: Mapping[str, Callable[[PolarizationState], float]] | None = None,
                       resamples: int = 200, seed: int = 0) -> dict[str, float]:
    """Bootstrap errors by Poisson-resampling each recorded count.

    Returns the sample standard deviation of the fidelity against
    target (key 'fidelity', when a target is given) and of any extra
    scalar functionals of the reconstructed state. Resamples that come
    out all zero are skipped.
    """
    if resamples < 100:
        raise ValueError(f"resamples must be >= 100, got {resamples}")
    if data.counts.sum() <= 0:
        raise EstimationError("no counts to resample")
    fns: dict[str, Callable[[PolarizationState], float]] = {}
    if target is not None:
        fns["fidelity"] = lambda st: fidelity(st, target)
    if scalars:
        fns.update(scalars)
    if not fns:
        raise ValueError("nothing to evaluate, pass a target or scalar functionals")
    rng = np.random.default_rng(seed)
    samples: dict[str, list[float]] = {name: [] for name in fns}
    for _ in range(resamples):
        counts = rng.poisson(data.counts)
        if counts.sum() == 0:
            continue
        est = mle_state(TomographyData(data.settings, counts, data.exposures, data.backgrounds))
        for name, fn in fns.items():
            samples[name].append(fn(est.state))
    if not next(iter(samples.values())):
        raise EstimationError("all resamples were empty")
    return {name: float(np.std(vals, ddof=1)) for name, vals in samples.items()}


# ---------------------------------------------------------------------------
# process matrices

_PAULI_DAGGERS = PAULIS.conj().transpose(0, 2, 1)

# columns (sigma_k (x) I)|Omega>, the frame mapping chi to the Choi matrix
_OMEGA = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex)
_FRAME = np.stack([np.kron(s, np.eye(2)) @ _OMEGA for s in PAULIS], axis=1)


@dataclass(frozen=True, eq=False)
class ProcessMatrix:
    """Process matrix chi in the Pauli basis (I, X, Y, Z).

    chi holds the physical (projected) matrix when projected is True;
    chi_raw keeps the plain linear inversion for diagnostics.
    """

    chi: np.ndarray
    chi_raw: np.ndarray | None = None
    projected: bool = True
    iterations: int = 0

    def __post_init__(self):
        chi = np.array(self.chi, dtype=complex)
        if chi.shape != (4, 4):
            raise ValueError("chi must be 4x4")
        if np.abs(chi - chi.conj().T).max() > 1e-8:
            raise ValueError("chi must be Hermitian")
        chi.setflags(write=False)
        object.__setattr__(self, "chi", chi)

    @property
    def chi00(self) -> float:
        return float(self.chi[0, 0].real)

    def tp_defect(self) -> float:
        """Frobenius distance of sum_kl chi_kl sigma_l^dag sigma_k from the identity."""
        op = np.einsum("kl,lab,kbc->ac", self.chi, PAULIS, PAULIS)
        return float(np.linalg.norm(op - np.eye(2)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.chi).min())


def apply_process(chi: ProcessMatrix | np.ndarray, state: PolarizationState) -> PolarizationState:
    """Propagate a state through the channel described by chi.

    The output trace is renormalized when chi is not trace preserving;
    use ProcessMatrix.tp_defect to check for that beforehand.
    """
    mat = chi.chi if isinstance(chi, ProcessMatrix) else np.asarray(chi, dtype=complex)
    if mat.shape != (4, 4):
        raise ValueError("chi must be 4x4")
    if np.abs(mat - mat.conj().T).max() > 1e-8:
        raise ValueError("chi must be Hermitian")
    out = np.einsum("kl,kab,bc,lcd->ad", mat, PAULIS, state.rho, _PAULI_DAGGERS)
    out = 0.5 * (out + out.conj().T)
    tr = np.trace(out).real
    if tr <= 0:
        raise EstimationError("channel maps the state to zero trace")
    return PolarizationState(out / tr)


def chi_to_choi(chi: np.ndarray) -> np.ndarray:
    return _FRAME @ np.asarray(chi, dtype=complex) @ _FRAME.conj().T


def choi_to_chi(choi: np.ndarray) -> np.ndarray:
    return _FRAME.conj().T @ np.asarray(choi, dtype=complex) @ _FRAME / 4.0


def _hermitian_basis_4() -> list[np.ndarray]:
    basis = []
    for i in range(4):
        e = np.zeros((4, 4), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(4):
        for j in range(i + 1, 4):
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
            basis.append(e)
            e = np.zeros((4, 4), dtype=complex)
            e[i, j] = 1.0j / np.sqrt(2.0)
            e[j, i] = -1.0j / np.sqrt(2.0)
            basis.append(e)
    return basis


def _tp_projector():
    """Affine projection data for the constraint sum chi_kl sigma_l sigma_k = I."""
    basis = _hermitian_basis_4()
    gs = [s / np.sqrt(2.0) for s in PAULIS]
    m = np.zeros((4, len(basis)))
    for a, b_a in enumerate(basis):
        op = np.einsum("kl,lab,kbc->ac", b_a, PAULIS, PAULIS)
        for b, g in enumerate(gs):
            m[b, a] = np.trace(g @ op).real
    target = np.array([np.sqrt(2.0), 0.0, 0.0, 0.0])
    correction = m.T @ np.linalg.inv(m @ m.T)
    return basis, m, target, correction


_TP_CACHE = None


def _project_tp(chi: np.ndarray) -> np.ndarray:
    global _TP_CACHE
    if _TP_CACHE is None:
        _TP_CACHE = _tp_projector()
    basis, m, target, correction = _TP_CACHE
    chi = 0.5 * (chi + chi.conj().T)
    r = np.array([np.trace(b @ chi).real for b in basis])
    r = r - correction @ (m @ r - target)
    out = np.zeros((4, 4), dtype=complex)
    for coef, b in zip(r, basis):
        out += coef * b
    return out


def _project_psd(chi: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (chi + chi.conj().T))
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T


def project_process_matrix(chi: np.ndarray, *, tol: float = _PROJ_TOL, max_iter: int = _MAX_ITER) -> tuple[np.ndarray, int]:
    """Alternate between the TP affine subspace and the positive cone."""
    current = 0.5 * (chi + chi.conj().T)
    iters = 0
    for iters in range(1, max_iter + 1):
        previous = current
        current = _project_psd(_project_tp(current))
        if np.linalg.norm(current - previous) < tol:
            break
    return current, iters


def process_tomography(inputs: Sequence[PolarizationState],
                       outputs: Sequence[PolarizationState | DensityMatrixEstimate],
                       *, project: bool = True, tol: float = _PROJ_TOL) -> ProcessMatrix:
    """Reconstruct chi from matched input/output state pairs.

    Four linearly independent inputs determine the map exactly; extra
    pairs are used in the least-squares sense. With project=True the
    inversion is pushed to the nearest trace-preserving positive chi by
    alternating projections (stopping when successive iterates move by
    less than tol in Frobenius norm); the unprojected inversion is kept
    in chi_raw either way.
    """
    outs = [o.state if isinstance(o, DensityMatrixEstimate) else o for o in outputs]
    if len(inputs) != len(outs):
        raise ValueError("inputs and outputs must pair up")
    if len(inputs) < 4:
        raise ValueError("need at least 4 input states")
    span = np.stack([s.rho.reshape(4) for s in inputs])
    if np.linalg.matrix_rank(span, tol=1e-9) < 4:
        raise ValueError("input states must span the operator space")
    n = len(inputs)
    a = np.empty((4 * n, 16), dtype=complex)
    b = np.empty(4 * n, dtype=complex)
    for i, (sin, sout) in enumerate(zip(inputs, outs)):
        block = np.einsum("kab,bc,lcd->klad", PAULIS, sin.rho, _PAULI_DAGGERS)
        a[4 * i:4 * i + 4, :] = block.reshape(16, 4).T
        b[4 * i:4 * i + 4] = sout.rho.reshape(4)
    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    chi_raw = x.reshape(4, 4)
    if not project:
        return ProcessMatrix(0.5 * (chi_raw + chi_raw.conj().T), chi_raw, projected=False)
    chi_proj, iters = project_process_matrix(chi_raw, tol=tol)
    return ProcessMatrix(chi_proj, chi_raw, projected=True, iterations=iters)


def random_process_matrix(seed: int) -> ProcessMatrix:
    """Random completely positive trace-preserving chi (Ginibre Choi state)."""
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    choi = g @ g.conj().T
    w = np.einsum("aiaj->ij", choi.reshape(2, 2, 2, 2))
    ev, vec = np.linalg.eigh(w)
    w_isqrt = (vec * (1.0 / np.sqrt(ev))) @ vec.conj().T
    sandwich = np.kron(np.eye(2), w_isqrt)
    chi = choi_to_chi(sandwich @ choi @ sandwich)
    return ProcessMatrix(0.5 * (chi + chi.conj().T), projected=True)


def export_process_matrix(chi: np.ndarray, path: str, *, projected: bool,
                          metadata: Mapping[str, object] | None = None) -> None:
    """Write the 16 chi entries as (row, col, re, im) rows."""
    meta = dict(metadata or {})
    meta["projection_applied"] = "yes" if projected else "no"
    chi = np.asarray(chi, dtype=complex)
    rows = ((i, j, chi[i, j].real, chi[i, j].imag) for i in range(4) for j in range(4))
    write_csv(path, meta, ["row", "col", "re", "im"], rows)
