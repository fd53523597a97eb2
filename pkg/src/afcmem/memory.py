"""Scalar model of the comb-based spin-wave memory.

Efficiencies and noise floors are dimensionless probabilities referred to
the memory output plane (detection-chain losses are handled separately by
the counting simulation). All times are in microseconds.

The central relation is the conditional-fidelity model for a stored qubit
read out against Poissonian noise:

    F(mu) = (eta mu F_c + p_n) / (eta mu + 2 p_n)
          = (F_c + mu1/mu) / (1 + 2 mu1/mu),   mu1 = p_n / eta

where mu is the mean input photon number, eta the end-to-end memory
efficiency, p_n the unconditional noise floor seen in one analyzer port
per retrieval gate, and F_c the noise-free conditional fidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .polarization import PolarizationState


@dataclass(frozen=True)
class MemoryParams:
    """Memory working point.

    eta            recall efficiency after the full storage time
    p_n            noise floor, detection probability in one analyzer port
                   per retrieval gate with no input pulse
    f_c            conditional fidelity of the retrieved polarization
    eta_t          transmission of the unabsorbed input through the crystal
    f_t            conditional fidelity of the transmitted polarization
    eta_pol_spread relative efficiency anisotropy between the H and V axes
    """

    eta: float = 0.036
    p_n: float = 0.0101
    f_c: float = 0.991
    eta_t: float = 0.296
    f_t: float = 0.972
    eta_pol_spread: float = 0.09

    def __post_init__(self):
        for name in ("eta", "p_n", "eta_t"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} = {val} outside [0, 1]")
        for name in ("f_c", "f_t"):
            val = getattr(self, name)
            if not 0.5 <= val <= 1.0:
                raise ValueError(f"{name} = {val} outside [1/2, 1]")
        if not 0.0 <= self.eta_pol_spread < 1.0:
            raise ValueError("eta_pol_spread outside [0, 1)")


@dataclass(frozen=True)
class StorageSchedule:
    """Timing of one storage cycle, all durations in microseconds.

    The comb delay is the fixed echo delay 1/Delta of the absorption
    comb; the input mode train and the first transfer pulse must fit
    inside it. The radio-frequency decoupling train (rf_pulse_count
    pi pulses, XY-4 phase pattern for the default count of 4) must fit
    inside the spin storage time.
    """

    comb_delay: float = 15.0
    spin_storage: float = 500.0
    mode_duration: float = 1.25
    n_modes: int = 5
    control_duration: float = 5.0
    rf_pulse_duration: float = 120.0
    rf_pulse_count: int = 4
    n_rep: int = 18

    @property
    def total_storage(self) -> float:
        """Echo emission time: comb delay plus spin storage."""
        return self.comb_delay + self.spin_storage


def validate_schedule(schedule: StorageSchedule) -> list[str]:
    """Check every schedule constraint; return violation messages.

    An empty list means the schedule is valid. Violations are returned,
    not raised, so callers can report all of them at once.
    """
    s = schedule
    violations = []
    for name in ("comb_delay", "spin_storage", "mode_duration", "control_duration", "rf_pulse_duration"):
        if getattr(s, name) <= 0:
            violations.append(f"{name} must be positive, got {getattr(s, name)}")
    if s.n_modes < 1:
        violations.append(f"n_modes must be >= 1, got {s.n_modes}")
    if s.rf_pulse_count < 0:
        violations.append(f"rf_pulse_count must be >= 0, got {s.rf_pulse_count}")
    if s.n_rep < 1:
        violations.append(f"n_rep must be >= 1, got {s.n_rep}")
    if violations:
        return violations
    train = s.n_modes * s.mode_duration + s.control_duration
    if train > s.comb_delay + 1e-12:
        violations.append(
            f"mode train plus transfer pulse ({train:g} us) exceeds the comb delay ({s.comb_delay:g} us)"
        )
    rf = s.rf_pulse_count * s.rf_pulse_duration
    if rf > s.spin_storage + 1e-12:
        violations.append(
            f"rf decoupling train ({rf:g} us) exceeds the spin storage time ({s.spin_storage:g} us)"
        )
    return violations


def visibility(s_max: float, s_min: float) -> float:
    """Two-port visibility (S_max - S_min) / (S_max + S_min)."""
    if s_min < 0 or s_max < 0:
        raise ValueError("count rates must be nonnegative")
    if s_max < s_min:
        raise ValueError(f"s_max = {s_max} smaller than s_min = {s_min}")
    if s_max + s_min == 0:
        raise ValueError("degenerate input, s_max + s_min = 0")
    return (s_max - s_min) / (s_max + s_min)


def classical_fidelity(vis: float) -> float:
    """Conditional fidelity (1 + V) / 2 of a measured visibility."""
    if not -1.0 <= vis <= 1.0:
        raise ValueError(f"visibility {vis} outside [-1, 1]")
    return (1.0 + vis) / 2.0


def mu1(params: MemoryParams) -> float:
    """Input photon number at which the retrieved signal-to-noise ratio is 1."""
    if params.eta <= 0:
        raise ValueError("eta must be positive to form p_n / eta")
    return params.p_n / params.eta


def fidelity_vs_photon_number(mu: float, mu_1: float, f_c: float) -> float:
    """Conditional fidelity (F_c + mu1/mu) / (1 + 2 mu1/mu)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if mu_1 < 0:
        raise ValueError("mu1 must be nonnegative")
    if not 0.5 <= f_c <= 1.0:
        raise ValueError(f"f_c = {f_c} outside [1/2, 1]")
    r = mu_1 / mu
    return (f_c + r) / (1.0 + 2.0 * r)


def predicted_fidelity(mu: float, params: MemoryParams) -> float:
    """Conditional fidelity of the memory at input photon number mu."""
    return fidelity_vs_photon_number(mu, mu1(params), params.f_c)


def conversion_efficiency(absorption_prob: float, transfer_prob: float) -> float:
    """Input-conversion efficiency, absorption times spin transfer."""
    for name, val in (("absorption_prob", absorption_prob), ("transfer_prob", transfer_prob)):
        if not 0.0 <= val <= 1.0:
            raise ValueError(f"{name} = {val} outside [0, 1]")
    return absorption_prob * transfer_prob


def multiplexing_gain(n_modes: int) -> float:
    """Duty-cycle gain of storing n temporal modes per cycle."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    return float(n_modes)


def anisotropic_efficiency(eta: float, state: PolarizationState, spread: float) -> float:
    """Efficiency seen by a given input polarization.

    The crystal axes are mapped onto H and V, so the efficiency is scaled
    by (1 + spread * <sigma_z>); H and V sit at the two extremes and the
    equator states are unaffected.
    """
    if not 0.0 <= spread < 1.0:
        raise ValueError("spread outside [0, 1)")
    return eta * (1.0 + spread * float(state.bloch[2]))


def spin_decay_factor(schedule: StorageSchedule, linewidth_khz: float = 27.0, t2_dd: float | None = None) -> float:
    """Multiplicative efficiency factor from spin dephasing at readout.

    The inhomogeneous (Gaussian) dephasing set by the spin linewidth is
    refocused at the echo time by the decoupling train, so it contributes
    a factor of 1 regardless of linewidth_khz; the argument is kept so the
    working point stays in one place. A finite t2_dd (us) models the
    residual decay under decoupling as exp(-spin_storage / t2_dd).
    """
    if linewidth_khz < 0:
        raise ValueError("linewidth must be nonnegative")
    if t2_dd is None:
        return 1.0
    if t2_dd <= 0:
        raise ValueError("t2_dd must be positive")
    return math.exp(-schedule.spin_storage / t2_dd)
