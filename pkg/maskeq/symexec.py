"""Symbolic execution of straight-line blocks into terms."""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from maskeq import util
from maskeq.lang import core
from maskeq.term.core import TermId, TermStore

__all__ = (
    'SymState',
    'exec_affine',
    'exec_masked',
    'exec_origin',
    'xor_fold',
)

_logger = logging.getLogger().getChild(__name__)


class SymState:
  """Symbolic state of one block.

  Attributes:
    store: Where terms are built.
    env: Variable to its current term.
    randoms: Random variables in definition order.
  """

  def __init__(self, store: TermStore, inputs: Sequence[str] = ()):
    self.store = store
    self.env: Dict[str, TermId] = {_: store.mk_var(_) for _ in inputs}
    self.randoms: List[str] = []

  def run(self, stmts: Sequence[core.Node], owner: str) -> None:
    store = self.store
    for stmt in stmts:
      if isinstance(stmt, core.Rand):
        name = stmt.target.name
        if name in self.randoms:
          raise util.SemanticError('%srandom %s of %s is defined twice' %
                                   (stmt.where, name, owner))
        self.randoms.append(name)
        self.env[name] = store.mk_var(name)
      elif isinstance(stmt, core.Assign):
        self.env[stmt.target.name] = self.expr(stmt.expr, owner)
      else:
        raise util.InternalError('%s%s is not straight-line; preprocess first' %
                                 (stmt.where, owner))

  def expr(self, expr: core.Node, owner: str) -> TermId:
    store = self.store
    if isinstance(expr, core.Num):
      return store.mk_const(expr.value)
    if isinstance(expr, core.Var):
      term = self.env.get(expr.name)
      if term is None:
        raise util.SemanticError('%s%s is read before it is assigned in %s' %
                                 (expr.where, expr.name, owner))
      return term
    if isinstance(expr, core.BinaryOp):
      operands = [self.expr(_, owner) for _ in expr.operand]
      result = operands[0]
      for operand in operands[1:]:
        if isinstance(expr, core.Xor):
          result = store.mk_add(result, operand)
        else:
          result = store.mk_mul(result, operand)
      return result
    if isinstance(expr, core.Call):
      return store.mk_app(expr.name, self.expr(expr.arg[0], owner))
    if isinstance(expr, core.AffineConst):
      # f(x ^ y) = f(x) ^ f(y) ^ c at x = y = 0 gives c = f(0).
      return store.mk_app(expr.name, store.zero)
    raise util.InternalError('%scannot execute %s symbolically' %
                             (expr.where, expr))

  def output(self, name: str, owner: str) -> TermId:
    term = self.env.get(name)
    if term is None:
      raise util.SemanticError('output %s of %s is never assigned' %
                               (name, owner))
    return term


def exec_origin(store: TermStore, proc: core.Proc) -> TermId:
  """The term of the original block over the scalar inputs."""
  state = SymState(store, proc.inputs)
  state.run(proc.orig, proc.name)
  return state.output(proc.output, proc.name)


def exec_masked(store: TermStore,
                proc: core.Proc,
                state: Optional[SymState] = None) -> Tuple[TermId, ...]:
  """One term per output share over input shares and random variables."""
  inputs = [_ for name in proc.inputs for _ in proc.input_shares(name)]
  if state is None:
    state = SymState(store, inputs)
  state.run(proc.masked, proc.name)
  outputs = tuple(state.output(_, proc.name) for _ in proc.output_shares)
  _logger.debug('%s: %d random(s), %d output share(s)', proc.name,
                len(state.randoms), len(outputs))
  return outputs


def exec_affine(store: TermStore, defn: core.AffineDef) -> TermId:
  """The body of a builtin-free affine definition over its input variable."""
  if defn.is_opaque:
    raise util.InternalError('%s uses bit-level built-ins' % defn.name)
  state = SymState(store, (defn.input,))
  state.run(defn.body, defn.name)
  return state.output(defn.output, defn.name)


def xor_fold(store: TermStore, terms: Sequence[TermId]) -> TermId:
  if not terms:
    raise util.InternalError('no shares to fold')
  return store.mk_xor(terms)
