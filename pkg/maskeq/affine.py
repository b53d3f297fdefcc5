"""Affine constants of affine transformations.

For every affine symbol f the analysis decides whether
f(x ^ y) = f(x) ^ f(y) ^ c for some constant c, and finds c:

  1. declared-only symbols are assumed linear (c = 0);
  2. bodies with bit-level built-ins are decided from their function table;
  3. other bodies are decided by rewriting
     tau = f(x ^ y) ^ f(x) ^ f(y) to a constant, inlining the definitions of
     inner symbols while tau stays non-constant;
  4. failing that, tau is evaluated at seeded random pairs, and two pairs
     with different values prove f is not affine;
  5. otherwise the function table decides.

Symbols are processed callees first, so inner constants are known when an
outer symbol is rewritten.
"""
import enum
import logging
import warnings
from typing import Dict, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from maskeq import symexec, util
from maskeq.field import TABLE_WIDTH, Field
from maskeq.lang import core
from maskeq.lang.visitor import build_call_graph
from maskeq.oracle.core import Evaluator, MissingTable
from maskeq.oracle import smtlib
from maskeq.oracle.interp import Interpreter
from maskeq.rewrite.base import (RewriteCtx, StepBudgetExceeded,
                                 UnknownAffineConstant, normalize)
from maskeq.term.core import TermId, TermStore
from maskeq.term.poly import Polynomial

__all__ = (
    'AffineKind',
    'AffineResult',
    'aff_const_all',
    'affine_consts',
    'check_affine_table',
    'inline_symbol',
    'masked_affine_holds',
    'table_of',
    'tables_of',
    'DISPROOF_TRIALS',
)

_logger = logging.getLogger().getChild(__name__)

DISPROOF_TRIALS = 16

Pair = Tuple[int, int]


class AffineKind(enum.Enum):
  CONSTANT = 'constant'
  NOT_AFFINE = 'not-affine'
  ASSUMED_LINEAR = 'assumed-linear'
  UNKNOWN = 'unknown'


class AffineResult(NamedTuple):
  """What the analysis found out about one symbol.

  Attributes:
    symbol: The affine symbol.
    kind: The case.
    constant: The affine constant for CONSTANT and ASSUMED_LINEAR.
    witness: For NOT_AFFINE, two (x, y) pairs with different values of
        f(x ^ y) ^ f(x) ^ f(y).
    residual: For UNKNOWN, the normal form that stayed non-constant.
    method: How the result was obtained: trs, testing, table, or declared.
    oracle_calls: Concrete evaluations of f or tau spent.
  """
  symbol: str
  kind: AffineKind
  constant: Optional[int] = None
  witness: Optional[Tuple[Pair, Pair]] = None
  residual: Optional[Polynomial] = None
  method: str = ''
  oracle_calls: int = 0

  @property
  def is_affine(self) -> bool:
    return self.kind in (AffineKind.CONSTANT, AffineKind.ASSUMED_LINEAR)

  def __str__(self) -> str:
    if self.kind == AffineKind.CONSTANT:
      return str(self.constant)
    if self.kind == AffineKind.NOT_AFFINE:
      (x0, y0), (x1, y1) = self.witness
      return 'NOT-AFFINE (x=%d, y=%d) vs (x=%d, y=%d)' % (x0, y0, x1, y1)
    if self.kind == AffineKind.ASSUMED_LINEAR:
      return '0 (declared)'
    return 'UNKNOWN %s' % self.residual


def affine_consts(
    results: Mapping[str, AffineResult]) -> Dict[str, Optional[int]]:
  """The affine constant of every symbol known to be affine."""
  return {
      name: result.constant
      for name, result in results.items()
      if result.is_affine
  }


def table_of(program: core.Program, defn: core.AffineDef) -> np.ndarray:
  """Evaluates defn at every field element.

  Raises:
    MissingTable: If defn calls a declared-only symbol.
  """
  return Interpreter(program).table_of(defn.name)


def tables_of(program: core.Program) -> Dict[str, np.ndarray]:
  """Function tables of every defined symbol that has one."""
  interp = Interpreter(program)
  tables = {}
  for defn in program.affine_defs:
    try:
      tables[defn.name] = interp.table_of(defn.name)
    except MissingTable:
      _logger.debug('%s has no function table', defn.name)
  return tables


def check_affine_table(field: Field, table: np.ndarray,
                       symbol: str = '') -> AffineResult:
  """Decides affineness from a complete function table.

  The constant is c = f(0): f(x ^ y) = f(x) ^ f(y) ^ c at x = y = 0 forces
  it. For n <= 8 every pair is checked. Beyond that, f is affine iff
  g = f ^ c is additive, and g is additive iff g(x) = g(x ^ h) ^ g(h) with h
  the highest set bit of x, for every x.
  """
  table = np.asarray(table, dtype=np.int64)
  const = int(table[0])
  if field.width <= TABLE_WIDTH:
    xs = np.arange(field.size, dtype=np.int64)
    tau = table[xs[:, None] ^ xs[None, :]] ^ table[xs][:, None] ^ table[xs][
        None, :]
    bad = np.argwhere(tau != const)
    calls = field.size * field.size
    if bad.size:
      x, y = (int(_) for _ in bad[0])
      return AffineResult(symbol, AffineKind.NOT_AFFINE,
                          witness=((0, 0), (x, y)), method='table',
                          oracle_calls=calls)
    return AffineResult(symbol, AffineKind.CONSTANT, const, method='table',
                        oracle_calls=calls)
  xs = np.arange(1, field.size, dtype=np.int64)
  high = np.left_shift(1, np.floor(np.log2(xs)).astype(np.int64))
  linear = table ^ const
  bad = np.flatnonzero(linear[xs] != linear[xs ^ high] ^ linear[high])
  if bad.size:
    x, y = int(xs[bad[0]] ^ high[bad[0]]), int(high[bad[0]])
    return AffineResult(symbol, AffineKind.NOT_AFFINE,
                        witness=((0, 0), (x, y)), method='table',
                        oracle_calls=field.size)
  return AffineResult(symbol, AffineKind.CONSTANT, const, method='table',
                      oracle_calls=field.size)


def masked_affine_holds(field: Field,
                        table: np.ndarray,
                        const: int,
                        order: int,
                        rng: np.random.Generator,
                        trials: int = 64) -> bool:
  """Whether applying f share-wise, plus c on share 0 for odd orders, maps
  an encoding of x to an encoding of f(x)."""
  table = np.asarray(table, dtype=np.int64)
  shares = field.random_array(rng, (order + 1, trials))
  masked = np.bitwise_xor.reduce(table[shares], axis=0)
  if order % 2 == 1:
    masked = masked ^ const
  return bool(np.all(masked == table[np.bitwise_xor.reduce(shares, axis=0)]))


def inline_symbol(store: TermStore, root: TermId, symbol: str, param: str,
                  body: TermId) -> TermId:
  """Replaces every symbol(u) in root by body with param bound to u."""

  def callback(name, arg):
    if name == symbol:
      return store.substitute(body, {param: arg})
    return None

  return store.map_apps(root, callback)


class _Analysis:
  """State of one aff_const_all run."""

  def __init__(self, program: core.Program, budget: int, seed: int,
               smt_dir: Optional[str], trace: bool):
    self.program = program
    self.field = program.field
    self.budget = budget
    self.seed = seed
    self.smt_dir = smt_dir
    self.trace = trace
    self.interp = Interpreter(program)
    self.results: Dict[str, AffineResult] = {}

  def table(self, name: str) -> Optional[np.ndarray]:
    try:
      return self.interp.table_of(name)
    except MissingTable:
      return None

  def tables(self, names) -> Optional[Dict[str, np.ndarray]]:
    tables = {}
    for name in names:
      table = self.table(name)
      if table is None:
        return None
      tables[name] = table
    return tables

  def run(self, defn: core.AffineDef) -> AffineResult:
    if defn.is_opaque:
      table = self.table(defn.name)
      if table is None:
        return AffineResult(defn.name, AffineKind.UNKNOWN, method='table')
      return check_affine_table(self.field, table, defn.name)
    return self.symbolic(defn)

  def symbolic(self, defn: core.AffineDef) -> AffineResult:
    store = TermStore(self.field)
    body = symexec.exec_affine(store, defn)
    x, y = store.mk_var('x'), store.mk_var('y')
    tau = store.mk_xor([
        store.substitute(body, {defn.input: store.mk_add(x, y)}),
        store.substitute(body, {defn.input: x}),
        store.substitute(body, {defn.input: y}),
    ])
    ctx = RewriteCtx(self.field, affine_consts(self.results), self.budget,
                     self.trace)
    inlined: List[str] = []
    poly = None
    while True:
      try:
        poly = normalize(store, tau, ctx)
      except UnknownAffineConstant as e:
        symbol = e.symbol
        poly = None
      except StepBudgetExceeded as e:
        _logger.warning('%s: %s', defn.name, e)
        break
      else:
        if poly.constant is not None:
          return AffineResult(defn.name, AffineKind.CONSTANT, poly.constant,
                              method='trs')
        symbol = self.innermost(store, tau, inlined)
      callee = self.program.get_affine(symbol) if symbol else None
      if callee is None or callee.is_opaque or symbol in inlined:
        break
      _logger.debug('%s: inlining %s', defn.name, symbol)
      inlined.append(symbol)
      tau = inline_symbol(store, tau, symbol, callee.input,
                          symexec.exec_affine(store, callee))
    return self.concrete(defn, store, tau, poly)

  def innermost(self, store: TermStore, tau: TermId,
                inlined: List[str]) -> Optional[str]:
    heights = store.app_depth(tau)
    candidates = [
        name for name in heights if name not in inlined and
        self.program.get_affine(name) is not None and
        not self.program.get_affine(name).is_opaque
    ]
    if not candidates:
      return None
    return min(candidates, key=lambda _: (heights[_], _))

  def concrete(self, defn: core.AffineDef, store: TermStore, tau: TermId,
               poly: Optional[Polynomial]) -> AffineResult:
    tables = self.tables(store.symbols(tau))
    if tables is None:
      _logger.info('%s: uninterpreted symbols remain', defn.name)
      self.emit_smt(defn)
      return AffineResult(defn.name, AffineKind.UNKNOWN, residual=poly,
                          method='trs')
    rng = np.random.default_rng(self.seed)
    evaluator = Evaluator(store, tau, tables)
    xs = self.field.random_array(rng, DISPROOF_TRIALS)
    ys = self.field.random_array(rng, DISPROOF_TRIALS)
    values = evaluator({'x': xs, 'y': ys})
    values = np.broadcast_to(values, xs.shape)
    differ = np.flatnonzero(values != values[0])
    if differ.size:
      i = int(differ[0])
      return AffineResult(defn.name, AffineKind.NOT_AFFINE,
                          witness=((int(xs[0]), int(ys[0])),
                                   (int(xs[i]), int(ys[i]))),
                          method='testing',
                          oracle_calls=i + 1)
    table = self.table(defn.name)
    if table is None:
      return AffineResult(defn.name, AffineKind.UNKNOWN, residual=poly,
                          method='testing', oracle_calls=DISPROOF_TRIALS)
    result = check_affine_table(self.field, table, defn.name)
    return result._replace(oracle_calls=result.oracle_calls + DISPROOF_TRIALS)

  def emit_smt(self, defn: core.AffineDef) -> None:
    if not self.smt_dir:
      return
    smtlib.write_script(self.smt_dir, 'affine_%s' % defn.name,
                        smtlib.emit_affine(self.program, defn))


def aff_const_all(program: core.Program,
                  budget: int = 10**7,
                  seed: int = 0xF15C,
                  smt_dir: Optional[str] = None,
                  trace: bool = False) -> Dict[str, AffineResult]:
  """Computes the affine constant of every affine symbol of program.

  Args:
    program: A preprocessed program.
    budget: Rewriting step budget per normalization.
    seed: Seed of the random disproof.
    smt_dir: Where to write SMT-LIB2 scripts for undecided symbols.
    trace: Whether to trace rewriting.

  Returns:
    Results keyed by symbol, declared-only symbols first, then definitions
    in source order.
  """
  graph = build_call_graph(program)
  analysis = _Analysis(program, budget, seed, smt_dir, trace)
  affines = program.affines
  for name in graph.dependency_order():
    if name not in affines:
      continue
    defn = affines[name]
    if defn is None:
      warnings.warn('%s is declared only and assumed linear' % name,
                    util.SemanticWarn)
      result = AffineResult(name, AffineKind.ASSUMED_LINEAR, 0,
                            method='declared')
    else:
      result = analysis.run(defn)
    analysis.results[name] = result
    _logger.info('affine constant of %s: %s (%s)', name, result,
                 result.method)
  results = analysis.results
  return {_: results[_] for _ in program.names if _ in results}
