"""Storage of Fraunhofer patterns and 4f images in a diffusing atomic vapor.

The object field is Fourier transformed by the first lens, stored as Raman
coherence in the transform plane, spread by atomic diffusion, and read back
through the second lens. Diffusion in the transform plane shows up in the
image plane as a pointwise decay exp(-beta t) that grows with distance from
the axis, so dark parts of the image stay dark.
"""
from .analysis import (
    DarkRegionResult,
    DarkSpotReport,
    FidelityCurve,
    ProbeSeries,
    dark_region_check,
    dark_spot_metrics,
    fidelity,
    find_zero_crossings,
    probe_intensity,
)
from .diffusion import (
    BetaMap,
    EvolutionResult,
    ImageDecay,
    beta_map,
    decay_image,
    diffuse_fd,
    diffuse_green_1d,
    diffuse_spectral,
    evolve,
    pipeline_image,
    retrieve_field,
    store_coherence,
)
from .field import (
    ComplexField,
    DiffusionParams,
    GridMismatchError,
    GridSpec,
    OpticalParams,
    energy,
    inner_product,
    make_grid,
    normalize,
)
from .optics import LensMap, image_4f, lens_transform
from .patterns import (
    HGeometry,
    ObjectSpec,
    alpha_of,
    artificial_pattern,
    babinet_pair,
    make_object,
    slit_pattern,
)

__version__ = "0.1.0"
