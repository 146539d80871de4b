"""Monostatic OFDM radar sensing on 5G PRS grids.

Builds comb-structured PRS transmit grids, synthesizes multi-target radar
echoes, and recovers range-Doppler maps with a 2D-FFT periodogram and a
complex-AMP sparse solver, followed by CFAR detection and scoring.
"""

from .camp import (
    CampConfig,
    CampDivergenceError,
    CampIterationStats,
    SparseMap,
    camp_run,
    camp_to_map,
    soft_threshold,
    tau_from_pfa,
)
from .channel import (
    BOLTZMANN,
    SPEED_OF_LIGHT,
    ClutterPoint,
    EchoPath,
    PointScatterer,
    RadarParams,
    ReflectionCenter,
    Vehicle,
    effective_channel,
    noise_power_from_nf,
    path_params,
    synthesize_rx,
    transmit_scale,
    visible_centers,
)
from .detect import (
    CfarConfig,
    Detection,
    MatchReport,
    cfar_alpha,
    cfar_detect,
    match_detections,
)
from .prs_grid import (
    NORMAL_CP_RATIO,
    OfdmGrid,
    PrsConfig,
    ResourceSet,
    Waveform,
    comb_offsets,
    full_allocation,
    generate_allocation,
    generate_prs_symbols,
)
from .specest import (
    ChannelEstimate,
    RangeDopplerMap,
    bin_to_physical,
    estimate_channel,
    normalize,
    periodogram,
    physical_to_bin,
    to_db,
)
from .config import ConfigError, RunConfig, load_config, save_config
from .scenario import Scene, ScenarioError, load_scenario, scene_paths
from .pipeline import (
    ComparisonReport,
    SweepReport,
    compare_estimators,
    run_pipeline,
    simulate_estimate,
    sweep_comb,
)

__version__ = "0.1.0"
