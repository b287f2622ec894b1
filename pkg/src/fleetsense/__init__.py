"""Virtual sensing for vehicle fleets.

Predicts fatigue damage sums and identifies driving maneuvers from
acceleration measurements after a parameterization phase on paired
acceleration/strain data.
"""

from .fatigue import WoehlerCurve, damage_sum, rainflow_count, turning_points
from .fft_features import assemble_fft_vector
from .ingest import (
    Labels,
    Segment,
    SplitPlan,
    TimeSeriesFile,
    load_file,
    screen_strain_channels,
    segment_file,
    split_files,
)
from .models import KnnModel, QuadraticRegressor, confusion_and_accuracy, fds_ratio, fit_quadratic, r2
from .pipeline import Bundle, RunConfig, classify_maneuvers, fit_bundle, predict_damage
from .reduction import PcaModel, Standardizer, fit_pca, fit_standardizer
from .scattering import (
    FilterBank,
    ScatteringConfig,
    ScatteringVector,
    assemble_scattering_vector,
    build_filterbank,
    scatter,
)
from .synth import SynthConfig, generate_dataset

__version__ = "0.1.0"
