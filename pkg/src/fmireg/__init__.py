"""Focus-weighted mutual-information registration toolkit.

Registers a test image onto a reference image by maximising a
mutual-information criterion computed from a joint gray-bin histogram,
optionally weighted by a prior focus distribution over the reference
image, and produces digital subtraction images of the aligned pair.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    DegenerateHistogramError,
    DegenerateLandmarksError,
    DomainError,
    EmptyFocusError,
    EmptyOverlapError,
    FmiregError,
    InputError,
    InternalError,
    InvalidDistributionError,
    InvalidTransformError,
    NoThresholdError,
    RegistrationFailedError,
    TooSmallImageError,
)
from .filters import (
    gaussian_convolve,
    gradient_modulus,
    median_filter,
    otsu_threshold,
    threshold_mask,
)
from .focus import (
    FocusMap,
    PresetParams,
    gaussian_mixture_focus,
    load_focus_map,
    mask_multiply,
    preset_bone_focus,
    preset_implant_focus,
    preset_restoration_focus,
    save_focus_map,
    save_focus_pgm,
    spline_focus,
    uniform_focus,
)
from .image import (
    BinningScheme,
    Image,
    bilinear_sample,
    bin_value,
    load_image,
    save_image,
)
from .metrics import (
    CriterionValues,
    JointHistogram,
    accumulate_joint,
    criteria_from_histogram,
    evaluate_criterion,
    shannon_entropy,
)
from .morphology import BinaryMask, complement, morph_close, morph_dilate, morph_erode
from .register import (
    RegistrationResult,
    SearchSpec,
    multiresolution_register,
    register,
)
from .splines import SplineCurve, read_curves, read_points
from .subtraction import SubtractionImage, encode_subtraction_u8, subtract
from .transform import (
    AffineTransform,
    deparameterize,
    fit_affine_least_squares,
    identity,
    load_transform,
    parameterize,
    save_transform,
    translation,
)

__version__ = "0.1.0"
