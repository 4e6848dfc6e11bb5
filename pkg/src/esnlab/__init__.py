"""Echo state networks on modular random graphs.

Builds reservoirs whose topology interpolates between strongly modular and
fully random via the bridge fraction mu, and measures how memory benchmarks,
information spreading, and the attractor repertoire change along the way.
"""

__version__ = "0.1.0"

from .dynamics import (
    ActivationProfile,
    AttractorSummary,
    SpreadingConfig,
    distributed_input_experiment,
    enumerate_attractors,
    run_to_equilibrium,
    spreading_profiles,
    two_community_experiment,
)
from .harness import (
    SweepConfig,
    default_config,
    derive_seed,
    parse_config,
    run_sweep,
    serialize_config,
    validate_config,
    write_sweep_csv,
)
from .readout import (
    ReadoutLayer,
    TrainingSet,
    r_squared,
    readout_continuous,
    readout_step,
    train_readout,
)
from .reservoir import (
    ActivationParams,
    InputWeights,
    ReservoirState,
    activation,
    build_input_weights,
    run,
    step,
)
from .tasks import (
    MCResult,
    MCTaskConfig,
    RecallResult,
    RecallTaskConfig,
    generate_recall_sequences,
    run_mc_task,
    run_recall_task,
)
from .topology import (
    ModularGraphSpec,
    SpectrumReport,
    WeightedNetwork,
    WeightParams,
    assign_weights,
    generate_modular_graph,
    measured_mu,
    rescale_to_spectral_radius,
    spectrum,
    spectrum_of_matrix,
)
