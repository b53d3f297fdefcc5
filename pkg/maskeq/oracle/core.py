"""Deciding whether a term is identically zero by evaluation.

Terms are compiled once into an `Evaluator` that evaluates numpy batches of
assignments. `sample_check_zero` tries seeded random assignments;
`exhaustive_check_zero` enumerates every assignment in canonical order (the
first variable is the most significant digit), so its witness is the first
nonzero assignment in that order.
"""
import logging
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from maskeq import util
from maskeq.term.core import (ADD, APP, CONST, MUL, VAR, MissingBinding,
                              TermId, TermStore)

__all__ = (
    'BudgetExceeded',
    'Evaluator',
    'MissingTable',
    'OracleConfig',
    'OracleResult',
    'exhaustive_check_zero',
    'sample_check_zero',
    'DEFAULT_BUDGET',
    'DEFAULT_SEED',
    'DEFAULT_TRIALS',
)

_logger = logging.getLogger().getChild(__name__)

DEFAULT_BUDGET = 1 << 20
DEFAULT_SEED = 0xF15C
DEFAULT_TRIALS = 64
CHUNK = 1 << 16


class BudgetExceeded(util.SemanticError):
  pass


class MissingTable(util.SemanticError):
  pass


class OracleConfig(NamedTuple):
  """Seeded testing and enumeration limits."""
  seed: int = DEFAULT_SEED
  trials: int = DEFAULT_TRIALS
  budget: int = DEFAULT_BUDGET


class OracleResult(NamedTuple):
  """Outcome of an oracle run.

  zero is True when no nonzero value was seen; witness and value describe
  the first nonzero assignment otherwise.
  """
  zero: bool
  witness: Optional[Dict[str, int]] = None
  value: int = 0
  evaluations: int = 0


class Evaluator:
  """A term compiled for batch evaluation.

  Attributes:
    variables: Sorted names of the variables of the term.
  """

  def __init__(self, store: TermStore, root: TermId,
               tables: Mapping[str, np.ndarray]):
    self.field = store.field
    self.root = root
    self.program: List[tuple] = []
    variables = set()
    for sub in store.postorder((root,)):
      node = store.node(sub)
      if node[0] == VAR:
        variables.add(node[1])
      elif node[0] == APP and node[1] not in tables:
        raise MissingTable('affine symbol %s has no function table' % node[1])
      self.program.append((sub, node))
    self.variables = tuple(sorted(variables))
    self.tables = {
        name: np.asarray(table, dtype=np.int64)
        for name, table in tables.items()
    }

  def __call__(self, env: Mapping[str, np.ndarray]) -> np.ndarray:
    values: Dict[TermId, np.ndarray] = {}
    shape = None
    for name in self.variables:
      if name not in env:
        raise MissingBinding('no value for variable %s' % name)
      shape = np.shape(env[name])
    for sub, node in self.program:
      op = node[0]
      if op == CONST:
        value = np.int64(node[1])
      elif op == VAR:
        value = np.asarray(env[node[1]], dtype=np.int64)
      elif op == ADD:
        value = values[node[1]] ^ values[node[2]]
      elif op == MUL:
        value = self.field.mul_array(values[node[1]], values[node[2]])
      else:
        value = self.tables[node[1]][values[node[2]]]
      values[sub] = value
    result = np.asarray(values[self.root], dtype=np.int64)
    if shape is not None:
      result = np.broadcast_to(result, shape)
    return result


def _first_nonzero(values: np.ndarray) -> Optional[int]:
  nonzero = np.flatnonzero(values)
  return int(nonzero[0]) if nonzero.size else None


def sample_check_zero(store: TermStore,
                      root: TermId,
                      variables: Sequence[str],
                      tables: Mapping[str, np.ndarray],
                      config: OracleConfig = OracleConfig()) -> OracleResult:
  """Evaluates root at config.trials seeded random assignments.

  Raises:
    MissingTable: If root applies a symbol without a table.
  """
  field = store.field
  evaluator = Evaluator(store, root, tables)
  variables = tuple(variables) or evaluator.variables
  rng = np.random.default_rng(config.seed)
  draws = field.random_array(rng, (len(variables), config.trials))
  values = evaluator(dict(zip(variables, draws)))
  if not values.shape:
    values = np.full(config.trials, values)
  index = _first_nonzero(values)
  if index is None:
    return OracleResult(True, evaluations=config.trials)
  witness = {name: int(draws[i, index]) for i, name in enumerate(variables)}
  _logger.debug('sampling found nonzero value %d at trial %d', values[index],
                index)
  return OracleResult(False, witness, int(values[index]), index + 1)


def exhaustive_check_zero(
    store: TermStore,
    root: TermId,
    variables: Sequence[str],
    tables: Mapping[str, np.ndarray],
    config: OracleConfig = OracleConfig()) -> OracleResult:
  """Evaluates root at every assignment to variables.

  Raises:
    BudgetExceeded: If (2^n)^len(variables) exceeds config.budget.
    MissingTable: If root applies a symbol without a table.
  """
  field = store.field
  evaluator = Evaluator(store, root, tables)
  variables = tuple(variables) or evaluator.variables
  total = field.size**len(variables)
  if total > config.budget:
    raise BudgetExceeded('%d assignments exceed the oracle budget %d' %
                         (total, config.budget))
  for start in range(0, total, CHUNK):
    index = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
    env = {}
    for i, name in enumerate(variables):
      shift = field.width * (len(variables) - 1 - i)
      env[name] = (index >> shift) & field.mask
    values = evaluator(env)
    if not values.shape:
      values = np.full(index.shape, values)
    hit = _first_nonzero(values)
    if hit is not None:
      witness = {name: int(env[name][hit]) for name in variables}
      return OracleResult(False, witness, int(values[hit]), start + hit + 1)
  return OracleResult(True, evaluations=total)
