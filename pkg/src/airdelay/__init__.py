"""URLLC over-the-air delay laboratory.

Finite-blocklength coding kernels, delay composition and the blocklength
tradeoff, grant-based/grant-free access profiles, a variable-TTI
discrete-event simulator, blocklength optimizers, and a line-protocol
environment bridge for external learning agents.
"""

__version__ = "0.1.0"

from .delay import (
    AttemptStats,
    DelayBreakdown,
    SweepPoint,
    compose_over_the_air,
    expected_attempts,
    tradeoff_sweep,
    transmission_delay,
)
from .fbl import (
    ChannelSpec,
    FblPoint,
    InfeasibleBlocklengthError,
    capacity,
    dispersion,
    error_prob,
    fbl_rate,
    min_blocklength,
    min_blocklength_ibl,
    q_function,
    q_inverse,
)
from .optimize import (
    AllocationPlan,
    BudgetExceededError,
    InfeasiblePlanError,
    evaluate_static_plan,
    optimize_multi_user_exhaustive,
    optimize_multi_user_greedy,
    optimize_single_user,
)
from .protocols import (
    ContentionConfig,
    Protocol,
    ProtocolProfile,
    attempt_failure_prob,
    gf_collision_prob,
    profile_of,
)
from .scenario import (
    ArrivalProcess,
    Regime,
    Scenario,
    load_scenario,
    parse_scenario,
    save_scenario,
)
from .sim import (
    FrameAlloc,
    PacketRecord,
    SchedulingConflictError,
    SimStats,
    StepSession,
    generate_arrivals,
    replay_actions,
    run_fixed_baseline,
    simulate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
