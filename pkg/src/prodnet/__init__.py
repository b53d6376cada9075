"""Firm-level production networks: aggregation, overlap statistics,
shock construction, GLPF shock propagation, and constrained scenario
sampling."""

from ._kernels import BACKEND
from .network import (
    DEGREE_BINS,
    RESIDUAL_INDUSTRY,
    FirmNetwork,
    IndustryNetwork,
    NetworkFormatError,
    StrengthProfile,
    aggregate_to_industry,
    assign_degree_bins,
    build_firm_network,
    degree_bin_labels,
    load_firm_network,
    load_industry_network,
    strength_profile,
    write_firm_network,
    write_industry_network,
)
from .overlap import (
    DistributionSummary,
    binary_io_masks,
    emit_overlap_report,
    jaccard_index,
    normalized_io_vectors,
    overlap_coefficient,
    pairwise_distribution,
    retention_probabilities,
    summarize_by_bin,
    temporal_overlap,
)
from .propagation import (
    ALL_ESSENTIAL,
    EssentialityTable,
    GlpfCalibration,
    PropagationResult,
    calibrate_firm,
    calibrate_industry,
    combine_levels,
    economy_loss,
    industry_losses,
    load_essentiality,
    propagate,
    propagate_firm,
    propagate_industry,
)
from .sampler import (
    BetaDonor,
    EmpiricalDonor,
    SamplingError,
    SamplingTarget,
    ScenarioEnsemble,
    draw_shocks,
    parse_donor_spec,
    rescale_shocks,
    sample_ensemble,
    write_residuals,
)
from .shocks import (
    IndustryShock,
    aggregate_shock,
    employment_shock,
    impute_missing,
    load_employment,
    load_shock,
    write_shock,
)
from .synth import SyntheticNetworkSpec, generate_network

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEGREE_BINS",
    "RESIDUAL_INDUSTRY",
    "FirmNetwork",
    "IndustryNetwork",
    "NetworkFormatError",
    "StrengthProfile",
    "aggregate_to_industry",
    "assign_degree_bins",
    "build_firm_network",
    "degree_bin_labels",
    "load_firm_network",
    "load_industry_network",
    "strength_profile",
    "write_firm_network",
    "write_industry_network",
    "DistributionSummary",
    "binary_io_masks",
    "emit_overlap_report",
    "jaccard_index",
    "normalized_io_vectors",
    "overlap_coefficient",
    "pairwise_distribution",
    "retention_probabilities",
    "summarize_by_bin",
    "temporal_overlap",
    "ALL_ESSENTIAL",
    "EssentialityTable",
    "GlpfCalibration",
    "PropagationResult",
    "calibrate_firm",
    "calibrate_industry",
    "combine_levels",
    "economy_loss",
    "industry_losses",
    "load_essentiality",
    "propagate",
    "propagate_firm",
    "propagate_industry",
    "BetaDonor",
    "EmpiricalDonor",
    "SamplingError",
    "SamplingTarget",
    "ScenarioEnsemble",
    "draw_shocks",
    "parse_donor_spec",
    "rescale_shocks",
    "sample_ensemble",
    "write_residuals",
    "IndustryShock",
    "aggregate_shock",
    "employment_shock",
    "impute_missing",
    "load_employment",
    "load_shock",
    "write_shock",
    "SyntheticNetworkSpec",
    "generate_network",
    "__version__",
]
