# pylint: disable=unused-import
from maskeq.rewrite.base import (DEFAULT_STEP_BUDGET, RewriteCtx,
                                 RuleNotApplicable, StepBudgetExceeded,
                                 UnknownAffineConstant, normalize,
                                 poly_to_term)
from maskeq.rewrite.rules import (RULES, apply_rule, read_polynomial, redexes,
                                  rewrite_randomly)
