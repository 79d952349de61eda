"""Decision-theoretic conditional planning with a robustness-parameterized utility."""

from importlib import resources

from .core import (
    BlocksworldValueModel,
    DeltaValueModel,
    Domain,
    Fact,
    GroundAction,
    OperatorSchema,
    OutcomeSpec,
    Scenario,
    State,
    applicable,
    apply_outcome,
    ground_actions,
    state_value,
)
from .dsl import format_domain, format_scenario, parse_domain, parse_scenario
from .errors import (
    DslError,
    ModelError,
    PlanFormatError,
    PlannerError,
    ScenarioError,
    SimulationError,
    ValueRangeError,
)
from .planner import ConditionalPlan, export_plan, import_plan, plan, plan_bnb
from .simulator import ExecutionConfig, exact_distribution, exceedance, monte_carlo, probability_sweep
from .utility import UtilityParams, normalize, utility

__version__ = "0.1.0"


def data_file(name: str) -> str:
    """Text of a file shipped in ``robust_planner/data``."""
    return resources.files(__package__).joinpath("data", name).read_text(encoding="utf-8")
