"""Joint transmit-waveform estimation and imaging for passive bistatic SAR.

An unknown flat-spectrum waveform is learned directly from received
phase-history measurements: a proximal gradient solver for the sparse scene
is unrolled into a recurrent auto-encoder whose parameters are the waveform
coefficients and the activation threshold, trained by projected SGD with
analytically derived complex (Wirtinger) gradients.
"""

__version__ = "0.1.0"

from .errors import CmpxError, ConfigError, NumericalError
from .geometry import (
    SPEED_OF_LIGHT,
    ImagingGeometry,
    SamplingGrid,
    bistatic_range,
    make_grid,
    receiver_position,
)
from .sensing import (
    GramOperator,
    SensingMatrix,
    apply_adjoint,
    apply_forward,
    build_gram,
    build_sensing_matrix,
    max_eigenvalue_estimate,
)
from .waveform import (
    WaveformBasis,
    WaveformCoefficients,
    generate_qpsk,
    init_all_ones,
    project_unit_modulus,
    synthesize_from_basis,
)
from .network import (
    LayerTrace,
    NetworkParams,
    decode,
    forward_encode,
    loss,
    make_network_params,
    normalize,
    phaseless_soft_threshold,
)
from .gradients import (
    GradientBundle,
    backprop_through_layers,
    compute_gradients,
    finite_difference_gradient,
    grad_loss_wrt_image,
    grad_normalization,
    grad_wrt_threshold,
    grad_wrt_waveform,
    gradient_check_case,
)
from .training import TrainConfig, TrainingRecord, sgd_step, train
from .scenes import (
    Dataset,
    SceneImage,
    add_noise,
    gen_point_phantom,
    gen_random_scene,
    make_dataset,
)
from .metrics import (
    CrossSection,
    contrast,
    cross_section,
    data_mismatch,
    image_error,
    waveform_error,
)
from .fileio import export_image_pgm, load_matrix, save_matrix, sha256_file
from .config import RunConfig, load_config, parse_config
from .estimator import PassiveSarImager
