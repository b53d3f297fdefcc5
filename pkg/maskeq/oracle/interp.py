"""Concrete execution of MSL.

The interpreter runs parsed programs directly, loops, guards, and calls
included, over numpy integer arrays so that one run evaluates a whole batch
of assignments. It is the reference semantics that function tables, the
preprocessor, and brute-force equivalence are checked against.
"""
import logging
from typing import Callable, Dict, Iterator, Mapping, Optional, Sequence, Tuple

import numpy as np

from maskeq import util
from maskeq.lang import core
from maskeq.oracle.core import MissingTable

__all__ = (
    'Interpreter',
    'stream',
)

_logger = logging.getLogger().getChild(__name__)

Value = np.ndarray
RandomSource = Callable[[str], Value]


def stream(values: Iterator) -> RandomSource:
  """A random source handing out values in rand-statement order."""

  def source(name: str) -> Value:
    del name  # unused
    return next(values)

  return source


class Interpreter:
  """Evaluates affine transformations and procedures of one program.

  Attributes:
    program: The program, preprocessed or not.
    field: Its field.
  """

  def __init__(self, program: core.Program):
    self.program = program
    self.field = program.field
    self.affines = program.affines
    self.procs = program.proc_dict
    self._tables: Dict[str, np.ndarray] = {}

  def table_of(self, name: str) -> np.ndarray:
    """The function table of a defined affine transformation.

    Raises:
      MissingTable: If name, or anything it calls, is declared only.
    """
    table = self._tables.get(name)
    if table is None:
      table = self.apply_affine(name, np.arange(self.field.size,
                                                dtype=np.int64))
      self._tables[name] = table
    return table

  def apply_affine(self, name: str, value: Value) -> Value:
    if name in self._tables:
      return self._tables[name][value]
    defn = self.affines.get(name)
    if defn is None:
      raise MissingTable('affine transformation %s has no body' % name)
    env = {defn.input: np.asarray(value, dtype=np.int64)}
    _Frame(self, env, {}, defn.name, masked=False,
           shares=1).run(defn.body)
    if defn.output not in env:
      raise util.SemanticError('output %s of %s is never assigned' %
                               (defn.output, defn.name))
    return env[defn.output]

  def run_orig(self, proc_name: str,
               inputs: Mapping[str, Value]) -> Value:
    proc = self.procs[proc_name]
    env = {name: np.asarray(inputs[name], dtype=np.int64)
           for name in proc.inputs}
    _Frame(self, env, {}, proc.name, masked=False,
           shares=proc.shares).run(proc.orig)
    return env[proc.output]

  def run_masked(self, proc_name: str, shares: Mapping[str, Value],
                 randoms: RandomSource) -> Tuple[Value, ...]:
    """Runs the masked block; shares maps share names such as x0 to values."""
    proc = self.procs[proc_name]
    env = {}
    for name in proc.inputs:
      for share in proc.input_shares(name):
        env[share] = np.asarray(shares[share], dtype=np.int64)
    frame = _Frame(self, env, {}, proc.name, masked=True,
                   shares=proc.shares, randoms=randoms,
                   encodings=set(proc.inputs))
    frame.run(proc.masked)
    return tuple(env[_] for _ in proc.output_shares)


class _Frame:
  """One activation: variables, loop bindings, and the encoding set."""

  def __init__(self,
               interp: Interpreter,
               env: Dict[str, Value],
               loops: Dict[str, int],
               owner: str,
               masked: bool,
               shares: int,
               randoms: Optional[RandomSource] = None,
               encodings: Optional[set] = None):
    self.interp = interp
    self.field = interp.field
    self.env = env
    self.loops = loops
    self.owner = owner
    self.masked = masked
    self.shares = shares
    self.randoms = randoms
    self.encodings = encodings if encodings is not None else set()

  def run(self, stmts: Sequence[core.Node]) -> None:
    for stmt in stmts:
      if isinstance(stmt, core.For):
        saved = self.loops.get(stmt.var)
        for value in range(stmt.lo.evaluate(self.loops),
                           stmt.hi.evaluate(self.loops)):
          self.loops[stmt.var] = value
          self.run(stmt.body)
        if saved is None:
          self.loops.pop(stmt.var, None)
        else:
          self.loops[stmt.var] = saved
      elif isinstance(stmt, core.If):
        self.run(stmt.then if self.guard(stmt.cond) else stmt.orelse)
      elif isinstance(stmt, core.Assume):
        pass
      elif isinstance(stmt, core.Rand):
        name = stmt.target.resolve(self.loops)
        if self.randoms is None:
          raise util.SemanticError('%srand outside a masked block' %
                                   stmt.where)
        self.env[name] = np.asarray(self.randoms(name), dtype=np.int64)
      elif isinstance(stmt, core.Assign):
        self.assign(stmt)
      else:
        raise util.InternalError('unexpected statement %r' % stmt)

  def guard(self, cond: core.Cmp) -> bool:

    def const(expr):
      if isinstance(expr, core.Num):
        return expr.value
      return self.loops[expr.name]

    lhs = const(cond.lhs)
    if cond.op is None:
      return lhs != 0
    rhs = const(cond.rhs)
    return {
        '==': lhs == rhs,
        '!=': lhs != rhs,
        '<': lhs < rhs,
        '<=': lhs <= rhs,
        '>': lhs > rhs,
        '>=': lhs >= rhs,
    }[cond.op]

  def is_encoding(self, expr: core.Node) -> bool:
    return (isinstance(expr, core.Var) and
            expr.resolve(self.loops) in self.encodings)

  def shares_of(self, expr: core.Var) -> Tuple[Value, ...]:
    name = expr.resolve(self.loops)
    return tuple(self.env[core.share_name(name, i)] for i in range(self.shares))

  def set_shares(self, target: str, values: Sequence[Value]) -> None:
    for i, value in enumerate(values):
      self.env[core.share_name(target, i)] = value
    self.encodings.add(target)

  def assign(self, stmt: core.Assign) -> None:
    target = stmt.target.resolve(self.loops)
    expr = stmt.expr
    interp = self.interp
    if self.masked:
      if isinstance(expr, core.Call) and expr.name in interp.procs:
        callee = interp.procs[expr.name]
        shares = {}
        for param, arg in zip(callee.inputs, expr.arg):
          for i, value in enumerate(self.shares_of(arg)):
            shares[core.share_name(param, i)] = value
        self.set_shares(target,
                        interp.run_masked(callee.name, shares, self.randoms))
        return
      if (isinstance(expr, core.Call) and expr.name in interp.affines and
          self.is_encoding(expr.arg[0])):
        values = [
            interp.apply_affine(expr.name, _)
            for _ in self.shares_of(expr.arg[0])
        ]
        if self.shares % 2 == 0:
          values[0] = values[0] ^ interp.apply_affine(expr.name, np.int64(0))
        self.set_shares(target, values)
        return
      if self.is_encoding(expr):
        self.set_shares(target, self.shares_of(expr))
        return
    self.env[target] = self.expr(expr)

  def expr(self, expr: core.Node) -> Value:
    field = self.field
    if isinstance(expr, core.Num):
      return np.int64(field.check(expr.value))
    if isinstance(expr, core.Var):
      if not expr.idx and expr.name in self.loops:
        return np.int64(self.loops[expr.name])
      name = expr.resolve(self.loops)
      if name not in self.env:
        raise util.SemanticError('%s%s is read before it is assigned in %s' %
                                 (expr.where, name, self.owner))
      return self.env[name]
    if isinstance(expr, core.Xor):
      result = self.expr(expr.operand[0])
      for operand in expr.operand[1:]:
        result = result ^ self.expr(operand)
      return result
    if isinstance(expr, core.Mul):
      result = self.expr(expr.operand[0])
      for operand in expr.operand[1:]:
        result = field.mul_array(result, self.expr(operand))
      return result
    if isinstance(expr, core.AffineConst):
      return self.interp.apply_affine(expr.name, np.int64(0))
    if isinstance(expr, core.Builtin):
      return self.builtin(expr)
    if isinstance(expr, core.Call):
      if expr.name in self.interp.affines:
        return self.interp.apply_affine(expr.name, self.expr(expr.arg[0]))
      args = {
          param: self.expr(arg)
          for param, arg in zip(self.interp.procs[expr.name].inputs, expr.arg)
      }
      return self.interp.run_orig(expr.name, args)
    raise util.InternalError('unexpected expression %r' % expr)

  def builtin(self, expr: core.Builtin) -> Value:
    field = self.field
    value = self.expr(expr.arg)
    if expr.name == 'not':
      return ~value & field.mask
    amount = expr.amount.evaluate(self.loops)
    if expr.name in ('rotl', 'rotr'):
      shift = amount % field.width
      if expr.name == 'rotr':
        shift = (field.width - shift) % field.width
      return ((value << shift) | (value >> (field.width - shift))) & field.mask
    if expr.name == 'shl':
      return (value << amount) & field.mask
    if expr.name == 'shr':
      return value >> amount
    if expr.name == 'and':
      return value & amount
    return (value | amount) & field.mask
