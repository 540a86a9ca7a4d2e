"""Energy-focusing transmission design for dynamic metasurface antennas.

Jointly tunes a digital feed vector and Lorentzian-constrained metasurface
weights to maximize weighted harvested power at receivers in the radiating
near field, and evaluates the resulting spatial power distribution.
"""

from .scenario import (
    SPEED_OF_LIGHT,
    Receiver,
    Scenario,
    SystemGeometry,
    build_geometry,
    classify_region,
    fraunhofer_distance,
    fresnel_limit,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .propagation import (
    ChannelVector,
    WaveguideMatrix,
    channel_matrix,
    channel_vector,
    radiation_profile,
    waveguide_matrix,
)
from .dma import (
    DmaState,
    QuadraticForm,
    build_quadratic_form,
    circle_from_weights,
    lorentzian_weight,
    reduced_channels,
    weights_from_circle,
)
from .precoding import (
    EnergyMatrix,
    Precoder,
    PrecoderDesign,
    build_energy_matrix,
    max_eigvec,
    precoder_for,
)
from .manifold import (
    RcgOptions,
    RcgResult,
    euclidean_gradient,
    objective,
    rcg_minimize,
    retract,
    riemannian_gradient,
    transport,
)
from .solver import (
    SolverOptions,
    SolverReport,
    SolverResult,
    UnservableScenarioError,
    harvested_energies,
    solve,
)
from .field import (
    GridSpec,
    PowerGrid,
    evaluate_grid,
    normalized_power,
    received_power,
    write_grid_csv,
    write_sidecar,
)

__version__ = "0.1.0"
