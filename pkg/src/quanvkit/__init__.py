"""quanvkit: frozen quantum circuits as sliding convolution kernels."""

from . import errors
from .circuits import (
    CircuitSpec,
    PatchVector,
    ScanOrder,
    concat,
    encode_patch,
    entangled_circuit,
    random_layer,
    shift_parameter,
    spec_from_json,
    spec_to_json,
)
from .qsim import (
    GateKind,
    GateOp,
    Observable,
    ObservableKind,
    Statevector,
    apply_gate,
    expectation,
    expectation_z,
    new_zero_state,
    run_circuit,
)
from .quanv import (
    CircuitKind,
    FeatureMap,
    ImageTensor,
    QuanvConfig,
    RunStats,
    ansatz_for,
    kernel_eval,
    output_shape,
    parameter_shift_gradient,
    quanvolve,
    quanvolve_parallel,
    rescale_to_unit,
    stack_layers,
)

__version__ = "0.1.0"

__all__ = [
    "CircuitKind",
    "CircuitSpec",
    "FeatureMap",
    "GateKind",
    "GateOp",
    "ImageTensor",
    "Observable",
    "ObservableKind",
    "PatchVector",
    "QuanvConfig",
    "RunStats",
    "ScanOrder",
    "Statevector",
    "ansatz_for",
    "apply_gate",
    "concat",
    "encode_patch",
    "entangled_circuit",
    "errors",
    "expectation",
    "expectation_z",
    "kernel_eval",
    "new_zero_state",
    "output_shape",
    "parameter_shift_gradient",
    "quanvolve",
    "quanvolve_parallel",
    "random_layer",
    "rescale_to_unit",
    "run_circuit",
    "shift_parameter",
    "spec_from_json",
    "spec_to_json",
    "stack_layers",
]
