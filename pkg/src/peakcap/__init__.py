"""Capacity bounds for peak-limited band-limited AWGN channels.

The admissible transmit blocks (band-limited, instantaneous power capped)
form a convex body in Nyquist-sample space.  Its per-dimension volume gives
the power-efficiency factor gamma that a peak constraint retains relative
to an average-power constraint, and with it a capacity lower bound that
tightens at high SNR.  The volume is evaluated two ways: semianalytically
through the law of the block maxima, and by importance-sampled Monte Carlo
over synthesized band-limited waveforms.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundCurve,
    ChannelModel,
    VolumeEstimate,
    capacity_lower_bound,
    gamma_from_log_volume,
    integrand_profile,
    log_volume_lower_bound,
    radial_length,
    sampled_only_upper_bound,
    truncated_gamma_curve,
)
from .extremes import (
    CalibrationError,
    EmpiricalMaxHistogram,
    ExtremeValueModel,
    calibrate_alpha,
    default_alpha,
    make_model,
    max_cdf,
    max_pdf,
    max_ppf,
    simulate_max_distribution,
)
from .logdomain import LogValue, StreamingLogMean
from .mc import (
    McConfig,
    McResult,
    SweepPoint,
    discard_topk,
    estimate_volume_mc,
    gamma_vs_n_sweep,
    predicted_nsim,
)
from .primitives import (
    log_unit_ball_volume,
    q_function,
    truncated_exponential_mean,
    truncated_gaussian_variance,
)
from .quadrature import QuadratureError, log_integral
from .synthesis import (
    DirectionDraw,
    SignalVector,
    bandlimit_interpolate,
    cube_dfo,
    draw_gaussian_direction,
    draw_importance_uniform,
    peak_and_radius,
    substream,
)

__all__ = [name for name in dir() if not name.startswith("_")]
