# pylint: disable=unused-import
from maskeq.oracle.core import (BudgetExceeded, Evaluator, MissingTable,
                                OracleConfig, OracleResult,
                                exhaustive_check_zero, sample_check_zero)
from maskeq.oracle.interp import Interpreter
