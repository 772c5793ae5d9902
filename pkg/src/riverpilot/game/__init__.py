"""River-crossing gameplay: levels, ship kinematics, sessions, solver."""

from riverpilot.game.level import (  # noqa: F401
    InvariantViolation,
    Level,
    ParseError,
    Stage,
    Stream,
    default_map_path,
    load_levels,
    stage_for_letter,
    stream_levels,
)
from riverpilot.game.physics import PHYS_DT, plan_attempt, total_velocity  # noqa: F401
from riverpilot.game.session import (  # noqa: F401
    AttemptRecord,
    HeadingUnset,
    NotCrashed,
    NotDocked,
    NotSailing,
    Outcome,
    Phase,
    SessionComplete,
    SessionState,
    launch,
    new_session,
    reset,
    set_velocity,
    step,
    tick,
)
from riverpilot.game.solver import (  # noqa: F401
    Unsolvable,
    level_complexity,
    naive_bearing,
    solve_correct_direction,
)
