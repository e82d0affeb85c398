"""zetalab: a desk-scale numerical laboratory for zeta universality.

Evaluate candidate universal functions, fit targets with certified
sup-grid errors, scan shift windows for approximation witnesses, compute
Kronecker covering numbers, and run the witness-set transfer maps with
exact counting checks.
"""

__version__ = "0.1.0"

from .errors import (
    BranchCutFailure,
    CapExceeded,
    DivisionNearZero,
    FitBoundNotMet,
    IndependenceViolated,
    KroneckerNotFound,
    MarginTooSmall,
    NoPositiveDelta,
    OverlapDetected,
    PoleAtOne,
    SchemaError,
    ToleranceUnreachable,
    ZetalabError,
)
from .kronecker import (
    CoveringResult,
    IndependenceReport,
    OrbitAccumulator,
    TorusAngles,
    covering_number,
    find_shift,
    independence_check,
    orbit_angles,
)
from .regions import (
    CompactRegion,
    Disc,
    Rect,
    ShiftedUnion,
    TowerParams,
    build_tower,
    enlarge,
    locate,
    region_from_json,
    region_gap,
    sup_distance,
)
from .scanner import (
    ContinuousMode,
    DiscreteMode,
    OmegaSpec,
    ScanConfig,
    ScanOutcome,
    scan,
    scan_short_interval,
    scan_tower,
)
from .targets import (
    ExpPolynomialTarget,
    FitResult,
    HybridConstraint,
    MixedTarget,
    PolynomialTarget,
    TowerLift,
    continuity_modulus,
    fit_exp_polynomial,
    fit_polynomial,
    lambda_modulus,
    sample_on_region,
    target_from_json,
)
from .transfer import (
    CountingReport,
    TransferConstants,
    continuous_to_discrete_witness,
    counting_inequality_check,
    decompose_shift,
    density_lower_bound_discrete_to_continuous,
    neighborhood_expand,
)
from .witness import (
    ContinuousWitnessSet,
    DensityProfile,
    DiscreteWitnessSet,
    empirical_density,
    merge_intervals,
    witness_from_json,
)
from .zeta import (
    DEFAULT_CONFIG,
    EvalConfig,
    HurwitzShiftEvaluator,
    Strip,
    eval_hurwitz_zeta,
    eval_riemann_zeta,
    hurwitz_values,
)
from .zspec import (
    HurwitzZeta,
    Product,
    Ratio,
    RiemannZeta,
    ZSpec,
    ZTuple,
    eval_zspec,
    zspec_from_json,
)
