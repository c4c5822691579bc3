"""Simulation and reconstruction for lensless compressive imaging.

An aperture assembly of individually controllable elements sits between a
scene and a single point sensor. Each aperture pattern, taken from a row of
a sensing matrix, yields one sensor reading; images are recovered from far
fewer readings than pixels by total-variation minimization.
"""

from .errors import (
    FormatError,
    InvalidArgumentError,
    LensCSError,
    NumericalError,
    ResourceLimitError,
    UnsupportedModeError,
    ValidationError,
)
from .hadamard import fwht, fwht_in_place
from .metrics import RunReport, evaluate, mse, psnr
from .multiview import (
    ViewSet,
    concatenate_and_reconstruct,
    reconstruct_views,
    superres_reconstruct,
)
from .scene import (
    MeasurementSet,
    NoiseModel,
    SceneDescription,
    SensorConfig,
    acquire,
    acquire_multi,
    pixelize,
    sampling_offset,
)
from .sensing import (
    SensingMode,
    SensingSpec,
    adjoint_apply,
    binary_to_signed,
    dense_forward_apply,
    forward_apply,
    make_sensing_spec,
    pattern_for_row,
    plane_to_scan,
    scan_to_plane,
)
from .tv import (
    ReconstructionConfig,
    TVFlavor,
    div,
    grad,
    reconstruct_baseline,
    reconstruct_tv,
    tv_norm,
)

__version__ = "0.1.0"
