"""Control-theoretic local analysis of feedforward networks.

Linearize a network around an input, form controllability and
observability Gramians of the hidden state, and rank internal modes and
neurons by their Hankel singular values.
"""

__version__ = "0.1.0"

from ._backend import BACKEND
from .activations import ActivationKind, act_deriv, act_value
from .errors import DomainError, ModelError, NumericError, ShapeError
from .gramians import (
    ModeAnalysis,
    controllability_gramian,
    hankel_modes,
    linearized_ablation,
    mode_coordinates,
    neuron_importance,
    observability_gramian,
)
from .linearization import (
    LocalLinearization,
    activation_derivative_matrices,
    finite_difference_jacobians,
    hidden_output_jacobian,
    input_state_jacobian,
    layer_jacobians,
    linearize,
)
from .network import ForwardTrace, LayerSpec, NetworkSpec, forward, load_network, load_network_file
from .report import (
    AnalysisOptions,
    ComparisonReport,
    OperatingPointReport,
    SweepReport,
    analyze_point,
    compare_points,
    dumps,
    sweep,
)

__all__ = [name for name in dir() if not name.startswith("_")]
