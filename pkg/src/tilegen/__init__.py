"""Random variates from arbitrary densities by equal-tile rejection sampling."""

from .density import (
    DensityModel,
    GridProfile,
    MassPoint,
    TabularDensity,
    bessel_k0_density,
    cauchy_density,
    declare_mass_point,
    exponential_density,
    from_table,
    gaussian_density,
    integral,
    load_table_csv,
    profile,
    uniform_density,
)
from .errors import (
    DegenerateDensity,
    DomainError,
    FormatError,
    InternalError,
    InvalidTable,
    MemoryBudgetExceeded,
    NonFiniteDensity,
    ParameterError,
    QuadratureFailure,
    SpecError,
    TilegenError,
)
from .estimator import TilingSampler
from .sampler import Counters, SamplerState, sample_parallel
from .specs import parse_density
from .stable import (
    StableParams,
    bimodal_fig2,
    chambers_symmetric,
    chambers_variates,
    levy_pdf_grid,
    symmetric_levy_pdf,
)
from .tiling import (
    Label,
    RefinementStats,
    StopRule,
    Tile,
    TilingTable,
    build,
    deserialize,
    eval_density_bound,
    initial_tile,
    load_table,
    refine,
    save_table,
    serialize,
    stats,
)
from .urng import UniformSource, fork_stream, uniform_index, unit_real

__version__ = "0.1.0"
