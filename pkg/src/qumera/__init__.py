"""Homogeneous MERA states evaluated through QuMERA channels."""

from .channels import (
    Channel,
    NotMixingError,
    NumericRefusal,
    SpectralData,
    apply,
    asymptote,
    averaged_transfer_matrix,
    deviation_power,
    devectorize,
    power,
    qumera_channel,
    spectral_data,
    spectrum,
    transfer_matrix,
    vectorize,
)
from .cones import build_graph, build_M, cone_path, kraus, shadow, triple_shadow
from .model import (
    InvalidSpecError,
    MeraSpec,
    StructuralError,
    embedding_spec,
    hat_densities,
    random_spec,
    require_valid,
    validate,
)
from .observables import (
    HamiltonianTerms,
    connected_correlator,
    dominant_exponent,
    energy_density,
    local_expectation,
    scaling_exponents,
    shadow_correlator,
    sigma_avg,
    sigma_top,
    symmetric_correlator,
    symmetric_expectation,
    thermo_expectation,
    triple_density,
)

__version__ = "0.1.0"
