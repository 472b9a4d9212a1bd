"""
Application constants for Phononet.

Centralized location for physical constants, calibration tables and
numerical tolerances.
"""

from pathlib import Path

# ==================== Application Info ====================

APP_NAME = "Phononet - trapped-ion phononic network simulator"
APP_VERSION = "0.3.0"

# ==================== Physical Constants (SI) ====================

ELEMENTARY_CHARGE = 1.602176634e-19  # C
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m
HBAR = 1.054571817e-34  # J s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
COULOMB_CONSTANT = ELEMENTARY_CHARGE**2 / (4.0 * 3.141592653589793 * VACUUM_PERMITTIVITY)

# ==================== Ion Species Defaults ====================

YB171_MASS = 170.936323 * ATOMIC_MASS_UNIT
BE9_MASS = 9.0121831 * ATOMIC_MASS_UNIT
YB171_QUBIT_FREQUENCY_HZ = 12.642812e9
RAMAN_WAVELENGTH_M = 355e-9
# Counter-propagating beams at 90 degrees: |Δk| = √2 · 2π/λ
DEFAULT_RAMAN_WAVEVECTOR = 2.0**0.5 * 2.0 * 3.141592653589793 / RAMAN_WAVELENGTH_M

# ==================== Five-Ion Experiment ====================

# Measured transverse spectrum (ordinary frequency, ascending; last entry is COM)
FIVE_ION_SPECTRUM_HZ = (1.905e6, 1.985e6, 2.057e6, 2.114e6, 2.153e6)

# Calibrated 50:50 beam splitters.
# Keys are 1-based mode pairs; ion is 1-based. Couplings are η·Ω/2π in Hz as
# calibrated (signed); only magnitudes enter the mixing angle.
CALIBRATED_DETUNING_HZ = -10e3
CALIBRATED_BEAM_SPLITTERS = {
    (1, 3): {"ion": 3, "coupling_m_hz": -6.3e3, "coupling_n_hz": -4.4e3, "duration_s": 286.6e-6, "fidelity": 0.9589},
    (2, 4): {"ion": 4, "coupling_m_hz": -6.3e3, "coupling_n_hz": 3.1e3, "duration_s": 468.1e-6, "fidelity": 0.9485},
    (3, 4): {"ion": 5, "coupling_m_hz": 4.4e3, "coupling_n_hz": 3.1e3, "duration_s": 453.7e-6, "fidelity": 0.9515},
    (1, 2): {"ion": 2, "coupling_m_hz": 6.3e3, "coupling_n_hz": 6.3e3, "duration_s": 254.8e-6, "fidelity": 0.9643},
}

# Four-splitter tomography setting for a two-mode input with two vacuum ancillas.
# (mode_m, mode_n) 1-based, rotation angle and phase in units of π, in
# application order.
TOMOGRAPHY_SETTING = (
    ((1, 3), 0.696, 0.0),
    ((2, 4), 0.304, 0.0),
    ((3, 4), 0.5, 0.5),
    ((1, 2), 0.5, 1.0),
)

# Repetitions per measurement point in the experiment
EXPERIMENT_SHOTS = 300

# ==================== Noise Defaults ====================

# Heating of the non-COM modes (quanta/s) and COM mode
MEASURED_HEATING_RATE = 30.0
COM_HEATING_RATE = 2.3e3
# Motional coherence time constant (s); measured values exceed this
MOTIONAL_COHERENCE_TIME = 10e-3
# Assumed spin coherence time of the assisting ion (s)
SPIN_COHERENCE_TIME = 0.1

# ==================== Detection Defaults ====================

# Neighbouring-ion fluorescence crosstalk: dark read as bright
DEFAULT_P_BRIGHT_GIVEN_DARK = 0.013
# Optical pumping during detection: bright read as dark
DEFAULT_P_DARK_GIVEN_BRIGHT = 0.02

# ==================== Pulse Defaults ====================

DEFAULT_RAMP_FRACTION = 0.1
DEFAULT_R1 = 1.5
DEFAULT_R2 = 3.0
LANDSCAPE_MODE_SPACING_HZ = 50e3

# ==================== Numerical Tolerances ====================

UNITARY_TOL = 1e-10
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-6
ORTHONORMAL_TOL = 1e-10
TIE_RELATIVE_TOL = 1e-9
SECTOR_CAPACITY = 1_000_000
PINV_RCOND = 1e-10
MAX_CONDITION_NUMBER = 1e12
LEAKAGE_TOL = 1e-6
THERMAL_TAIL_TOL = 1e-8
NBAR_SIGMA_FLOOR = 1e-3
ODE_RTOL = 1e-10
ODE_ATOL = 1e-12
NEWTON_MAX_ITERATIONS = 200
OPTIMIZER_STARTS = 32

# ==================== Paths ====================

OUTPUT_DIR = Path("results")

# ==================== Output conventions ====================

# "adjoint": p = diag(U† ρ U); "forward": p = diag(U ρ U†)
PROBABILITY_CONVENTIONS = ("adjoint", "forward")
OUTPUT_FORMATS = ("csv", "json")
