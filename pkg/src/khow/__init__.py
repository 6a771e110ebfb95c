"""Model checking and plan synthesis for the epistemic logic of know-how."""

from .bisim import (BisimPartition, belief_states_bisimilar, bisimilar, distinguishing_formula,
                    largest_bisimulation)
from .eal import eval_eal, extension_eal
from .errors import (BudgetExceededError, FragmentError, KhowError, ModelError,
                     NotPerfectRecallError, ParseError, PlanError, UnknownIdentifierError)
from .kbp import (ExecutionTree, execute_on_belief_state, execute_plan, plan_from_tree,
                  strongly_executable, tree_from_plan, validate_execution_tree)
from .model import (BeliefState, Model, ValidationReport, belief_partition, belief_state,
                    check_perfect_recall, clinic, format_model, load_model, parse_model)
from .planner import (BeliefTransitionSystem, PlanningProblem, PolicyTable, check, extension,
                      quotient_system, strong_plan_existence, synthesize_plan)
from .syntax import (Fragment, fragment_of, parse_formula, parse_plan, print_formula,
                     print_plan)

__version__ = "0.1.0"
