"""Photon subtraction from a two-mode squeezed vacuum in a waveguide trimer."""

__version__ = "0.1.0"

from .analysis import (  # noqa: E402
    MomentMatrix,
    SchmidtSpectrum,
    factorial_moment,
    mean_total_photons,
    moment_matrix,
    participation_ratio,
)
from .detection import (  # noqa: E402
    JointDistribution,
    PnrPovm,
    conditional_pure_state,
    joint_distribution,
    povm_weights,
    subtracted_density,
)
from .evolution import SqueezeSource, evolve_multinomial, evolve_oracle, prepare_input  # noqa: E402
from .fock import OccupationTriple, ThreeModeState, TwoModeDensity, normalize  # noqa: E402
from .optics import CouplerConfig, TrimerUnitary, build_unitary, intensity_ratio, solve_zf  # noqa: E402
