"""Exact real arithmetic over subrecursive operator terms."""
from .base import (ArityError, BaseFunction, MissingMajorant, Native, eval_base, majorant_eval,
                   parse_base_function)
from .operators import (FunctionOracle, OperatorTerm, compose_operators, eval_operator, modulus,
                        modulus_operator, parse_operator_term)
from .names import (RationalApprox, RealName, SpecialName, apply_K, approx_from_name,
                    constant_oracle, ehelp, enumerate_special_prefix, name_of_rational, random_name)
from .systems import (BudgetExhausted, ConditionalSystem, UniformSystem, compose_conditional,
                      eval_conditional, eval_uniform, find_parameter, uniform_to_conditional)
from .witnesses import (TZConditionalWitness, TZUniformWitness, check_tz_conditional_at_point,
                        eval_tz_conditional, eval_tz_uniform)
from .translations import (MissingModulus, SearchBound, compute_search_bound, normalize_system,
                           operators_to_tz_conditional, operators_to_tz_uniform,
                           tz_to_operators_conditional, tz_to_operators_uniform)
from .elementary import builtin_system, builtin_uniform, compile_expression, parse_expression

__version__ = "0.1.0"
