"""Poissonian counting simulation of the storage experiment.

One run plays the pulse sequence of Fig-style histograms: a train of
input modes, a transfer pulse into the spin state (CP1), the decoupled
spin storage, the retrieval pulse (CP2) and the echo train one comb
delay plus one spin storage time after the input. The detector is gated
on only during the input and output mode windows; the CP windows are
blanked (an optional leakage term can paint the retrieval pulse
breakthrough into CP2 for display realism).

Detected mean counts per trial and mode, at analyzer port P:

    output:  (mu eta [F_c <P>_sig + (1 - F_c) <P>_flip] + p_n) T_det + d
    input:   mu eta_t [F_t <P>_sig + (1 - F_t) <P>_flip] T_det + d

with T_det = transmission_to_detector * detector_efficiency and
d = dark_rate * gate_width * detector_efficiency. The noise floor p_n is
unpolarized, so every analyzer port sees the same p_n; this matches the
convention in which the conditional fidelity of the retrieved qubit is
S_max / (S_max + S_min) = (mu eta F_c + p_n) / (mu eta + 2 p_n).

Counts are Poissonian and independent between trials, so the histogram
accumulated over N trials is drawn in one shot as Poisson(N * lam) per
bin; the result is independent of how trials would be partitioned
across workers, which makes the merge order trivially deterministic.
Identical (config, seed) gives bit-identical histograms.

Times are microseconds, dark_rate is counts per second.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import EstimationError
from .memory import MemoryParams, StorageSchedule, anisotropic_efficiency, spin_decay_factor  # noqa: F401
from .polarization import AnalysisSetting, PolarizationState, expectation, standard_state
from .tableio import write_csv

_REL_TOL = 1e-9


def _as_tuple(value, n: int, name: str) -> tuple:
    """Broadcast a scalar or validate a length-n sequence."""
    if isinstance(value, (MemoryParams, float, int)):
        return (value,) * n
    value = tuple(value)
    if len(value) != n:
        raise ValueError(f"{name} must be scalar or length {n}, got length {len(value)}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulated counting run.

    mu_per_mode and params accept either one value for all modes or one
    per mode. bin_width must divide the mode duration; it defaults to a
    fifth of it. dark_gate_width defaults to one mode duration.
    """

    input_state: PolarizationState = field(default_factory=lambda: standard_state("D"))
    mu_per_mode: float | Sequence[float] = 1.4
    schedule: StorageSchedule = field(default_factory=StorageSchedule)
    params: MemoryParams | Sequence[MemoryParams] = field(default_factory=MemoryParams)
    detector_efficiency: float = 0.57
    dark_rate: float = 15.0
    transmission_to_detector: float = 0.07
    bin_width: float | None = None
    trials: int = 1_000_000
    rng_seed: int = 0
    dark_gate_width: float | None = None
    pol_anisotropy: bool = False
    input_window_reference: bool = False
    cp2_leakage: float = 0.0

    def __post_init__(self):
        n = self.schedule.n_modes
        mus = _as_tuple(self.mu_per_mode, n, "mu_per_mode")
        if any(m < 0 for m in mus):
            raise ValueError("mu_per_mode must be nonnegative")
        object.__setattr__(self, "mu_per_mode", tuple(float(m) for m in mus))
        object.__setattr__(self, "params", _as_tuple(self.params, n, "params"))
        for name in ("detector_efficiency", "transmission_to_detector"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} outside [0, 1]")
        if self.dark_rate < 0 or self.cp2_leakage < 0:
            raise ValueError("rates must be nonnegative")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        bw = self.schedule.mode_duration / 5.0 if self.bin_width is None else float(self.bin_width)
        if bw <= 0:
            raise ValueError("bin_width must be positive")
        ratio = self.schedule.mode_duration / bw
        if abs(ratio - round(ratio)) > _REL_TOL * ratio:
            raise ValueError(f"bin_width {bw} does not divide the mode duration {self.schedule.mode_duration}")
        object.__setattr__(self, "bin_width", bw)
        gw = self.schedule.mode_duration if self.dark_gate_width is None else float(self.dark_gate_width)
        if gw < 0:
            raise ValueError("dark_gate_width must be nonnegative")
        object.__setattr__(self, "dark_gate_width", gw)

    @property
    def t_det(self) -> float:
        """Transmission from memory output to a detection event."""
        return self.transmission_to_detector * self.detector_efficiency

    @property
    def dark_per_gate(self) -> float:
        """Mean dark counts per gate window (dark_rate is per second, gate in us)."""
        return self.dark_rate * self.dark_gate_width * 1e-6 * self.detector_efficiency

    @property
    def total_mu(self) -> float:
        return float(sum(self.mu_per_mode))


@dataclass(frozen=True)
class Window:
    """Labeled time interval of the sequence; CP windows are blanked."""

    label: str
    start: float
    stop: float
    blanked: bool = False
    mode: int | None = None


@dataclass(frozen=True, eq=False)
class CountHistogram:
    """Binned detection record of one simulated run."""

    bin_edges: np.ndarray
    counts: np.ndarray
    analysis: AnalysisSetting
    windows: tuple[Window, ...]
    mu_per_mode: tuple[float, ...]
    trials: int
    seed: int

    def window_indices(self, window: Window) -> np.ndarray:
        centers = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        return np.nonzero((centers >= window.start) & (centers < window.stop))[0]

    def window_counts(self, label: str, mode: int | None = None) -> int:
        total = 0
        for win in self.windows:
            if win.label != label:
                continue
            if mode is not None and win.mode != mode:
                continue
            total += int(self.counts[self.window_indices(win)].sum())
        return total

    def mode_counts(self, label: str) -> np.ndarray:
        """Counts per mode window for 'input' or 'output'."""
        modes = sorted({w.mode for w in self.windows if w.label == label and w.mode is not None})
        return np.array([self.window_counts(label, m) for m in modes], dtype=np.int64)

    @property
    def is_noise_run(self) -> bool:
        return all(m == 0.0 for m in self.mu_per_mode)


def sequence_windows(schedule: StorageSchedule) -> tuple[Window, ...]:
    """Input modes, CP1, CP2 and output modes on the common time axis."""
    dm = schedule.mode_duration
    wins = [Window("input", m * dm, (m + 1) * dm, mode=m) for m in range(schedule.n_modes)]
    cp1_start = schedule.n_modes * dm
    wins.append(Window("CP1", cp1_start, cp1_start + schedule.control_duration, blanked=True))
    cp2_start = cp1_start + schedule.spin_storage
    wins.append(Window("CP2", cp2_start, cp2_start + schedule.control_duration, blanked=True))
    t_out = schedule.total_storage
    wins += [Window("output", t_out + m * dm, t_out + (m + 1) * dm, mode=m) for m in range(schedule.n_modes)]
    return tuple(wins)


def _mode_rates(config: ExperimentConfig, analysis: AnalysisSetting) -> tuple[np.ndarray, np.ndarray]:
    """Mean detected counts per trial in each (input, output) mode window."""
    e_sig = expectation(config.input_state, analysis)
    t_det = config.t_det
    dark = config.dark_per_gate
    lam_in = np.empty(config.schedule.n_modes)
    lam_out = np.empty(config.schedule.n_modes)
    for m, (mu, par) in enumerate(zip(config.mu_per_mode, config.params)):
        eta = par.eta
        if config.pol_anisotropy:
            eta = anisotropic_efficiency(eta, config.input_state, par.eta_pol_spread)
        contrast_out = par.f_c * e_sig + (1.0 - par.f_c) * (1.0 - e_sig)
        lam_out[m] = (mu * eta * contrast_out + par.p_n) * t_det + dark
        if config.input_window_reference:
            # input pulse on the free path, no memory in the way; display only
            lam_in[m] = mu * e_sig * t_det + dark
        else:
            contrast_t = par.f_t * e_sig + (1.0 - par.f_t) * (1.0 - e_sig)
            lam_in[m] = mu * par.eta_t * contrast_t * t_det + dark
    return lam_in, lam_out


def model_mode_fidelity(config: ExperimentConfig, parallel: AnalysisSetting,
                        orthogonal: AnalysisSetting) -> np.ndarray:
    """Exact per-mode mean of the count-ratio fidelity, dark counts included.

    This is what the estimator converges to as trials grow; it differs
    from the noise-model prediction by the dark-count dilution of both
    analyzer ports.
    """
    _, lam_p = _mode_rates(config, parallel)
    _, lam_o = _mode_rates(config, orthogonal)
    return lam_p / (lam_p + lam_o)


def model_conditional_fidelity(config: ExperimentConfig, parallel: AnalysisSetting,
                               orthogonal: AnalysisSetting) -> float:
    """Exact mean of the train-summed count-ratio fidelity for this configuration."""
    _, lam_p = _mode_rates(config, parallel)
    _, lam_o = _mode_rates(config, orthogonal)
    return float(lam_p.sum() / (lam_p.sum() + lam_o.sum()))


def simulate_run(config: ExperimentConfig, analysis: AnalysisSetting, *, seed: int | None = None) -> CountHistogram:
    """Simulate one accumulated counting histogram.

    Parameters
    ----------
    config : ExperimentConfig
    analysis : AnalysisSetting
        The single analyzer port in front of the detector.
    seed : optional override of config.rng_seed.

    Returns
    -------
    CountHistogram with integer counts accumulated over config.trials.
    """
    used_seed = config.rng_seed if seed is None else seed
    rng = np.random.default_rng(used_seed)
    schedule = config.schedule
    windows = sequence_windows(schedule)
    span = schedule.total_storage + schedule.n_modes * schedule.mode_duration
    n_bins = int(round(span / config.bin_width))
    edges = np.arange(n_bins + 1) * config.bin_width
    lam = np.zeros(n_bins)

    lam_in, lam_out = _mode_rates(config, analysis)
    hist = CountHistogram(edges, np.zeros(n_bins, dtype=np.int64), analysis, windows,
                          config.mu_per_mode, config.trials, used_seed)
    for win in windows:
        idx = hist.window_indices(win)
        if idx.size == 0:
            continue
        if win.label == "input":
            lam[idx] += lam_in[win.mode] / idx.size
        elif win.label == "output":
            lam[idx] += lam_out[win.mode] / idx.size
        elif win.label == "CP2" and config.cp2_leakage > 0:
            lam[idx] += config.cp2_leakage / idx.size

    counts = rng.poisson(lam * config.trials)
    return CountHistogram(edges, counts.astype(np.int64), analysis, windows,
                          config.mu_per_mode, config.trials, used_seed)


def simulate_trial_counts(config: ExperimentConfig, analysis: AnalysisSetting,
                          window: str = "output", *, seed: int | None = None) -> np.ndarray:
    """Per-trial total counts in one window class, for count statistics checks."""
    if window not in ("input", "output"):
        raise ValueError("window must be 'input' or 'output'")
    lam_in, lam_out = _mode_rates(config, analysis)
    lam = float((lam_in if window == "input" else lam_out).sum())
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    return rng.poisson(lam, size=config.trials)


@dataclass(frozen=True)
class ParamEstimate:
    """Memory parameters recovered from counting histograms."""

    eta_hat: float
    eta_err: float
    p_n_hat: float
    p_n_err: float
    fidelity_hat: float
    fidelity_err: float
    mode_fidelity: np.ndarray
    mode_fidelity_err: np.ndarray
    counts_parallel: int
    counts_orthogonal: int
    counts_noise: int


def _split_runs(histograms: Sequence[CountHistogram], input_state: PolarizationState):
    parallel = orthogonal = None
    noise = []
    for h in histograms:
        if h.is_noise_run:
            noise.append(h)
            continue
        overlap = expectation(input_state, h.analysis)
        if overlap > 1.0 - 1e-6:
            parallel = h
        elif overlap < 1e-6:
            orthogonal = h
    if parallel is None or orthogonal is None:
        raise ValueError("need histograms at the analyzer settings parallel and orthogonal to the input state")
    if not noise:
        raise ValueError("need a no-input noise run (all mu_per_mode zero) to estimate the noise floor")
    return parallel, orthogonal, noise


def estimate_params(histograms: Sequence[CountHistogram], config: ExperimentConfig) -> ParamEstimate:
    """Invert the counting model for eta, p_n and the conditional fidelity.

    The noise floor comes from the no-input runs, dark-count corrected.
    The efficiency comes from the background-subtracted sum of both
    analyzer ports, corrected for T_det and mu. The conditional fidelity
    is the raw count ratio S_par / (S_par + S_orth); noise is part of
    the retrieved state by convention, so it is not subtracted there.
    Errors are Poissonian.
    """
    parallel, orthogonal, noise = _split_runs(histograms, config.input_state)
    t_det = config.t_det
    dark = config.dark_per_gate
    n_modes = config.schedule.n_modes

    n_noise = sum(h.window_counts("output") for h in noise)
    noise_exposure = sum(h.trials for h in noise) * n_modes  # gate windows observed
    p_n_hat = (n_noise - noise_exposure * dark) / (noise_exposure * t_det)
    p_n_err = np.sqrt(max(n_noise, 1)) / (noise_exposure * t_det)

    s_par = parallel.window_counts("output")
    s_orth = orthogonal.window_counts("output")
    if s_par + s_orth == 0:
        raise EstimationError("zero output counts in both analyzer ports")
    trials = parallel.trials
    mu_total = float(sum(parallel.mu_per_mode))
    if mu_total <= 0:
        raise EstimationError("cannot estimate efficiency without input photons")
    background = 2.0 * trials * n_modes * (p_n_hat * t_det + dark)
    denom = trials * mu_total * t_det
    eta_hat = (s_par + s_orth - background) / denom
    eta_err = np.sqrt((s_par + s_orth) / denom**2 + (2.0 * n_modes * trials * t_det * p_n_err / denom) ** 2)

    fid = s_par / (s_par + s_orth)
    fid_err = np.sqrt(s_par * s_orth / (s_par + s_orth) ** 3) if s_par and s_orth else 1.0 / (s_par + s_orth)

    par_m = parallel.mode_counts("output").astype(float)
    orth_m = orthogonal.mode_counts("output").astype(float)
    tot_m = par_m + orth_m
    with np.errstate(invalid="ignore", divide="ignore"):
        fid_m = np.where(tot_m > 0, par_m / tot_m, np.nan)
        fid_m_err = np.where(tot_m > 0, np.sqrt(par_m * orth_m / tot_m**3), np.nan)

    return ParamEstimate(float(eta_hat), float(eta_err), float(p_n_hat), float(p_n_err),
                         float(fid), float(fid_err), fid_m, fid_m_err,
                         int(s_par), int(s_orth), int(n_noise))


@dataclass(frozen=True)
class TransmissionEstimate:
    """Per-mode transmission and transmitted-state fidelity from the input windows."""

    transmission: np.ndarray
    transmission_err: np.ndarray
    fidelity: np.ndarray
    fidelity_err: np.ndarray


def estimate_transmission(histograms: Sequence[CountHistogram], config: ExperimentConfig) -> TransmissionEstimate:
    """Characterize the unabsorbed, transmitted input from the input windows.

    Requires runs simulated with the physical input window (not the
    reference display variant).
    """
    if config.input_window_reference:
        raise ValueError("input windows hold the free-path display trace, not the transmitted state")
    parallel = orthogonal = None
    for h in histograms:
        if h.is_noise_run:
            continue
        overlap = expectation(config.input_state, h.analysis)
        if overlap > 1.0 - 1e-6:
            parallel = h
        elif overlap < 1e-6:
            orthogonal = h
    if parallel is None or orthogonal is None:
        raise ValueError("need parallel and orthogonal analyzer runs")
    par_m = parallel.mode_counts("input").astype(float)
    orth_m = orthogonal.mode_counts("input").astype(float)
    if (par_m + orth_m).sum() == 0:
        raise EstimationError("zero input-window counts")
    trials = parallel.trials
    dark = config.dark_per_gate
    mu = np.asarray(parallel.mu_per_mode, dtype=float)
    denom = trials * mu * config.t_det
    trans = (par_m + orth_m - 2.0 * trials * dark) / denom
    trans_err = np.sqrt(par_m + orth_m) / denom
    tot = par_m + orth_m
    with np.errstate(invalid="ignore", divide="ignore"):
        fid = np.where(tot > 0, par_m / tot, np.nan)
        fid_err = np.where(tot > 0, np.sqrt(par_m * orth_m / tot**3), np.nan)
    return TransmissionEstimate(trans, trans_err, fid, fid_err)


def export_histogram(hist: CountHistogram, path: str, metadata: Mapping[str, object] | None = None) -> None:
    """Write a histogram as CSV with one row per bin."""
    labels = [""] * (len(hist.bin_edges) - 1)
    for win in hist.windows:
        for i in hist.window_indices(win):
            labels[i] = win.label
    meta = dict(metadata or {})
    meta.setdefault("analysis", hist.analysis.label)
    meta.setdefault("trials", hist.trials)
    meta.setdefault("rng_seed", hist.seed)
    rows = (
        (float(hist.bin_edges[i]), float(hist.bin_edges[i + 1]), int(hist.counts[i]), labels[i], hist.analysis.label)
        for i in range(len(hist.counts))
    )
    write_csv(path, meta, ["bin_start_us", "bin_end_us", "counts", "window_label", "analysis_label"], rows)
