"""latkit: lattice data-parallel framework with a tunable virtual vector length.

SoA lattice fields, an explicit host/target memory discipline with masked
transfers and a constant store, and a two-level (chunk x lane) execution
model whose output is bitwise identical across backends, worker counts, and
VVL values. Ships a 3-vector scale kernel, a D3Q19 binary-fluid BGK
collision kernel, and the `latbench` sweep CLI.
"""

from .errors import (
    AllocationError,
    BoundsError,
    ConcurrencyError,
    ConfigError,
    ContractViolationError,
    DeviceError,
    LatkitError,
    LifecycleError,
    PlanError,
    ShapeError,
    SingularStateError,
    TypeConflictError,
)
from .lattice import (
    DEFAULT_MAX_VVL,
    Field,
    FieldDescriptor,
    LatticeShape,
    aos_to_soa,
    field_create,
    field_dump,
    field_fill,
    field_load,
    field_max_abs_diff,
    pad_sites,
    soa_index,
    soa_to_aos,
)
from .memory import (
    BACKENDS,
    ConstantBlock,
    SiteMask,
    TargetBuffer,
    TargetDevice,
    TransferCounters,
    copy_from_target,
    copy_from_target_masked,
    copy_to_target,
    copy_to_target_masked,
    target_free,
    target_malloc,
)
from .execution import (
    Kernel,
    KernelContext,
    LaunchPlan,
    backend_schedule,
    for_each_lane,
    launch,
    python_kernel,
    sync_target,
)
from .model import D3Q19Model
from .kernels import (
    bgk_relax,
    binary_collision_kernel,
    equilibrium,
    kernel_by_id,
    moments,
    scale_kernel,
    set_model_constants,
)
from .bench import BenchResult, benchmark_run, emit_csv, report_best, run_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
