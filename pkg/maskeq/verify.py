"""Equivalence of masked procedures with their originals.

For a procedure with original block xi over a, b, ... and masked block xi'
with output shares c0 ... cd, the equivalence term is

  tau = xi[a -> a0 ^ ... ^ ad, ...] ^ c0 ^ ... ^ cd

over input shares and random variables. The procedure is correct iff tau is
identically zero. `verify_proc` decides that by normalization, inlining
defined affine transformations one at a time, then by seeded testing and
exhaustive enumeration when every affine symbol left has a function table.
"""
import concurrent.futures
import enum
import functools
import logging
import time
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from maskeq import symexec
from maskeq.affine import (AffineResult, aff_const_all, affine_consts,
                           inline_symbol)
from maskeq.lang import core
from maskeq.oracle import smtlib
from maskeq.oracle.core import (BudgetExceeded, MissingTable, OracleConfig,
                                exhaustive_check_zero, sample_check_zero)
from maskeq.oracle.interp import Interpreter
from maskeq.rewrite.base import (DEFAULT_STEP_BUDGET, RewriteCtx,
                                 StepBudgetExceeded, UnknownAffineConstant,
                                 normalize, poly_to_term)
from maskeq.term.core import TermId, TermStore
from maskeq.term.poly import Polynomial

__all__ = (
    'EquivalenceTask',
    'Verdict',
    'VerdictStatus',
    'VerifyConfig',
    'build_task',
    'inline_affine',
    'replay_witness',
    'verify_all',
    'verify_proc',
)

_logger = logging.getLogger().getChild(__name__)


class VerdictStatus(enum.Enum):
  CORRECT = 'correct'
  INCORRECT = 'incorrect'
  MAYBE_INCORRECT = 'maybe-incorrect'
  UNKNOWN = 'unknown'


class Verdict(NamedTuple):
  """The outcome for one procedure.

  Attributes:
    proc: Name of the procedure.
    status: The verdict.
    method: trs, testing, or oracle; empty for undecided verdicts.
    witness: For INCORRECT, input shares and randoms with tau != 0.
    value: The value of tau at witness.
    residual: The normal form left when the verdict is not CORRECT by trs.
    reason: Why the procedure was not decided, or diagnostics.
    inlined: Affine symbols inlined, in order.
    stats: Rule group application counts.
    size: Number of monomials of the last normal form.
    oracle_calls: Evaluations of tau spent by testing and enumeration.
    seconds: Wall time.
    smt_path: Where an SMT-LIB2 script was written, if any.
  """
  proc: str
  status: VerdictStatus
  method: str = ''
  witness: Optional[Dict[str, int]] = None
  value: int = 0
  residual: Optional[Polynomial] = None
  reason: str = ''
  inlined: Tuple[str, ...] = ()
  stats: Tuple[Tuple[str, int], ...] = ()
  size: int = 0
  oracle_calls: int = 0
  seconds: float = 0.
  smt_path: Optional[str] = None

  @property
  def is_correct(self) -> bool:
    return self.status == VerdictStatus.CORRECT

  def __str__(self) -> str:
    text = '%s: %s' % (self.proc, self.status.value.upper())
    if self.method:
      text += ' (%s)' % self.method
    if self.witness is not None:
      text += ' at %s = %d' % (', '.join(
          '%s=%d' % _ for _ in sorted(self.witness.items())), self.value)
    if self.reason:
      text += ': %s' % self.reason
    return text


class VerifyConfig(NamedTuple):
  """Limits and outputs of verification.

  Attributes:
    step_budget: Rewriting steps per normalization.
    oracle: Seed, trials, and exhaustive budget of the oracles.
    smt_dir: Where to write SMT-LIB2 scripts for MAYBE_INCORRECT verdicts.
    smt_raw: Whether scripts carry tau instead of its normal form.
    trace: Whether to trace rewriting.
  """
  step_budget: int = DEFAULT_STEP_BUDGET
  oracle: OracleConfig = OracleConfig()
  smt_dir: Optional[str] = None
  smt_raw: bool = False
  trace: bool = False


class EquivalenceTask:
  """The equivalence term of one procedure and its inlining frontier.

  Attributes:
    proc: The procedure.
    store: The store tau lives in.
    tau: The equivalence term.
    raw: tau as first built, before any inlining.
    frontier: Defined, symbolically executable affine symbols not inlined
        yet.
    inlined: Symbols inlined so far.
  """

  def __init__(self, program: core.Program, proc: core.Proc, store: TermStore,
               tau: TermId):
    self.program = program
    self.proc = proc
    self.store = store
    self.tau = tau
    self.raw = tau
    self.inlined: List[str] = []
    self._bodies: Dict[str, TermId] = {}

  @property
  def frontier(self) -> Tuple[str, ...]:
    return tuple(
        name for name in self.store.symbols(self.tau)
        if name not in self.inlined and self.inlinable(name))

  def inlinable(self, name: str) -> bool:
    defn = self.program.get_affine(name)
    return defn is not None and not defn.is_opaque

  def body(self, name: str) -> TermId:
    if name not in self._bodies:
      self._bodies[name] = symexec.exec_affine(self.store,
                                               self.program.get_affine(name))
    return self._bodies[name]

  def inline(self, name: str) -> None:
    _logger.debug('%s: inlining %s', self.proc.name, name)
    defn = self.program.get_affine(name)
    self.tau = inline_affine(self.store, self.tau, name, defn.input,
                             self.body(name))
    self.inlined.append(name)

  def innermost(self) -> Optional[str]:
    """The frontier symbol of least application height."""
    frontier = self.frontier
    if not frontier:
      return None
    heights = self.store.app_depth(self.tau)
    return min(frontier, key=lambda _: (heights[_], _))


def build_task(program: core.Program, proc: core.Proc,
               store: Optional[TermStore] = None) -> EquivalenceTask:
  """Symbolically executes both blocks of proc and builds tau."""
  if store is None:
    store = TermStore(program.field, program.names)
  orig = symexec.exec_origin(store, proc)
  masked = symexec.exec_masked(store, proc)
  decoded = {
      name: store.mk_xor([store.mk_var(_) for _ in proc.input_shares(name)])
      for name in proc.inputs
  }
  tau = store.mk_add(store.substitute(orig, decoded),
                     symexec.xor_fold(store, masked))
  return EquivalenceTask(program, proc, store, tau)


def inline_affine(store: TermStore, root: TermId, symbol: str, param: str,
                  body: TermId) -> TermId:
  """Replaces every symbol(u) in root by body with param bound to u.

  Memoized over the DAG; root is returned as is if symbol does not occur.
  """
  return inline_symbol(store, root, symbol, param, body)


class _Tables:
  """Function tables of defined symbols, computed on demand."""

  def __init__(self, program: core.Program):
    self.interp = Interpreter(program)

  def get(self, names: Sequence[str]) -> Optional[Dict[str, np.ndarray]]:
    """Tables of names, or None if one of them is uninterpreted."""
    try:
      return {_: self.interp.table_of(_) for _ in names}
    except MissingTable:
      return None


class _Verifier:

  def __init__(self, program: core.Program, consts: Mapping[str, int],
               config: VerifyConfig):
    self.program = program
    self.consts = consts
    self.config = config
    self.tables = _Tables(program)

  def run(self, proc: core.Proc) -> Verdict:
    start = time.perf_counter()
    task = build_task(self.program, proc)
    ctx = RewriteCtx(self.program.field, self.consts, self.config.step_budget,
                     self.config.trace)
    verdict = self.decide(task, ctx)
    verdict = verdict._replace(inlined=tuple(task.inlined),
                               stats=tuple(sorted(ctx.stats.items())),
                               seconds=time.perf_counter() - start)
    _logger.info('%s', verdict)
    return verdict

  def decide(self, task: EquivalenceTask, ctx: RewriteCtx) -> Verdict:
    name = task.proc.name
    # R12 only holds for affine symbols; the others are expanded up front.
    while True:
      eager = [_ for _ in task.frontier if _ not in self.consts]
      if not eager:
        break
      for symbol in eager:
        task.inline(symbol)
    while True:
      try:
        poly = normalize(task.store, task.tau, ctx)
      except UnknownAffineConstant as e:
        if e.symbol in task.frontier:
          task.inline(e.symbol)
          continue
        return self.fallback(task, str(e))
      except StepBudgetExceeded as e:
        return self.fallback(task, str(e))
      if poly.is_zero:
        return Verdict(name, VerdictStatus.CORRECT, 'trs')
      const = poly.constant
      if const is not None:
        witness = {_: 0 for _ in task.store.variables(task.raw)}
        return Verdict(name, VerdictStatus.INCORRECT, 'trs', witness, const,
                       poly, size=len(poly))
      task.tau = poly_to_term(task.store, poly)
      symbol = task.innermost()
      if symbol is None:
        return self.residual(task, poly)
      task.inline(symbol)

  def residual(self, task: EquivalenceTask, poly: Polynomial) -> Verdict:
    name = task.proc.name
    tables = self.tables.get(poly.symbols())
    if tables is None:
      reason = 'uninterpreted symbols %s' % ', '.join(poly.symbols())
      return Verdict(name, VerdictStatus.MAYBE_INCORRECT, residual=poly,
                     reason=reason, size=len(poly),
                     smt_path=self.emit_smt(task))
    verdict = self.oracles(task, tables)
    if verdict.status == VerdictStatus.MAYBE_INCORRECT:
      verdict = verdict._replace(smt_path=self.emit_smt(task))
    return verdict._replace(residual=poly, size=len(poly))

  def fallback(self, task: EquivalenceTask, reason: str) -> Verdict:
    """Decides tau without normalization when every symbol has a table."""
    _logger.warning('%s: %s; falling back to the oracles', task.proc.name,
                    reason)
    tables = self.tables.get(task.store.symbols(task.tau))
    if tables is None:
      return Verdict(task.proc.name, VerdictStatus.UNKNOWN, reason=reason,
                     smt_path=self.emit_smt(task))
    verdict = self.oracles(task, tables)
    if verdict.status == VerdictStatus.MAYBE_INCORRECT:
      return verdict._replace(status=VerdictStatus.UNKNOWN,
                              reason='%s; %s' % (reason, verdict.reason))
    return verdict

  def oracles(self, task: EquivalenceTask,
              tables: Mapping[str, np.ndarray]) -> Verdict:
    name = task.proc.name
    store = task.store
    config = self.config.oracle
    variables = store.variables(task.tau)
    everything = {_: 0 for _ in store.variables(task.raw)}
    result = sample_check_zero(store, task.tau, variables, tables, config)
    calls = result.evaluations
    if not result.zero:
      everything.update(result.witness)
      return Verdict(name, VerdictStatus.INCORRECT, 'testing', everything,
                     result.value, oracle_calls=calls)
    try:
      result = exhaustive_check_zero(store, task.tau, variables, tables,
                                     config)
    except BudgetExceeded as e:
      return Verdict(name, VerdictStatus.MAYBE_INCORRECT, reason=str(e),
                     oracle_calls=calls)
    calls += result.evaluations
    if result.zero:
      _logger.info('%s: exhaustive enumeration of %d assignment(s) found '
                   'no counterexample', name, result.evaluations)
      return Verdict(name, VerdictStatus.CORRECT, 'oracle', oracle_calls=calls)
    everything.update(result.witness)
    return Verdict(name, VerdictStatus.INCORRECT, 'oracle', everything,
                   result.value, oracle_calls=calls)

  def emit_smt(self, task: EquivalenceTask) -> Optional[str]:
    smt_dir = self.config.smt_dir
    if not smt_dir:
      return None
    root = task.raw if self.config.smt_raw else task.tau
    text = smtlib.emit_equivalence(task.store, root, self.program,
                                   'equivalence of %s' % task.proc.name)
    return smtlib.write_script(smt_dir, task.proc.name, text)


def verify_proc(program: core.Program,
                proc: core.Proc,
                consts: Mapping[str, int],
                config: VerifyConfig = VerifyConfig()) -> Verdict:
  """Decides whether proc is equivalent to its original block.

  Args:
    program: The preprocessed program.
    proc: One of its procedures.
    consts: Affine constant of every symbol known to be affine; declared
        symbols map to 0.
    config: Budgets and outputs.

  Returns:
    CORRECT only if the normal form is 0 or enumeration proved tau = 0;
    INCORRECT only with a witness; MAYBE_INCORRECT when uninterpreted symbols
    remain or the enumeration budget is exceeded; UNKNOWN otherwise.
  """
  return _Verifier(program, consts, config).run(proc)


def _verify_one(program: core.Program, consts: Mapping[str, int],
                config: VerifyConfig, name: str) -> Verdict:
  return verify_proc(program, program.get_proc(name), consts, config)


def verify_all(program: core.Program,
               results: Optional[Mapping[str, AffineResult]] = None,
               config: VerifyConfig = VerifyConfig(),
               jobs: int = 1) -> List[Verdict]:
  """Verifies every procedure of program, in source order.

  Args:
    program: The preprocessed program.
    results: Output of aff_const_all; computed if not given.
    config: Budgets and outputs.
    jobs: Worker processes; procedures are independent.
  """
  if results is None:
    results = aff_const_all(program, config.step_budget, config.oracle.seed,
                            config.smt_dir, config.trace)
  consts = affine_consts(results)
  names = [_.name for _ in program.procs]
  worker = functools.partial(_verify_one, program, consts, config)
  if jobs <= 1 or len(names) <= 1:
    return [worker(_) for _ in names]
  with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as executor:
    return list(executor.map(worker, names))


def replay_witness(program: core.Program, verdict: Verdict) -> int:
  """Evaluates tau of verdict.proc at verdict.witness.

  Raises:
    MissingTable: If tau applies a declared-only symbol.
  """
  task = build_task(program, program.get_proc(verdict.proc))
  tables = _Tables(program).get(task.store.symbols(task.raw))
  if tables is None:
    raise MissingTable('%s applies declared-only symbols' % verdict.proc)
  return task.store.eval(task.raw, verdict.witness, tables)
