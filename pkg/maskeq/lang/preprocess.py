"""Inlining, loop unrolling, and branch elimination.

After preprocessing every procedure block and affine body is a straight-line
sequence of `Assign` and `Rand` statements over plain variable names.
Affine applications stay as `Call` nodes; procedure calls are inlined with
fresh names of the form `callee__k__var`.
"""
import collections
import logging
from typing import Dict, List, Optional, Sequence, Set

from maskeq import util
from maskeq.lang import core
from maskeq.lang.visitor import build_call_graph

__all__ = ('preprocess',)

_logger = logging.getLogger().getChild(__name__)

ORIG = 'orig'
MASKED = 'masked'


def preprocess(program: core.Program) -> core.Program:
  """Returns an equivalent program with straight-line bodies.

  Args:
    program: A parsed program.

  Returns:
    The preprocessed program; preprocessing it again returns an equal one.

  Raises:
    util.SemanticError: On recursion, non-constant loop bounds or guards,
        share-count mismatches, or reads of undefined variables.
  """
  graph = build_call_graph(program)
  affine_defs = tuple(_preprocess_affine(program, _)
                      for _ in program.affine_defs)
  done: Dict[str, core.Proc] = {}
  proc_dict = program.proc_dict
  for name in graph.dependency_order():
    if name in proc_dict:
      done[name] = _preprocess_proc(program, proc_dict[name], done)
  return program.replace(affine_defs=affine_defs,
                         procs=tuple(done[_.name] for _ in program.procs))


def _preprocess_affine(program: core.Program,
                       defn: core.AffineDef) -> core.AffineDef:
  block = _Block(program, {}, ORIG, 1, defn.name, inputs=(defn.input,))
  block.run(defn.body)
  block.check_defined((defn.output,), defn)
  return core.AffineDef(name=defn.name,
                        input=defn.input,
                        output=defn.output,
                        body=block.finish((defn.output,)),
                        pos=defn.pos)


def _preprocess_proc(program: core.Program, proc: core.Proc,
                     done: Dict[str, core.Proc]) -> core.Proc:
  orig = _Block(program, done, ORIG, proc.shares, proc.name, proc.inputs)
  orig.run(proc.orig)
  orig.check_defined((proc.output,), proc)
  shares = [_ for name in proc.inputs for _ in proc.input_shares(name)]
  masked = _Block(program, done, MASKED, proc.shares, proc.name, shares,
                  encodings=proc.inputs)
  masked.run(proc.masked)
  masked.check_defined(proc.output_shares, proc)
  _logger.debug('preprocessed %s: %d + %d statements', proc.name,
                len(orig.stmts), len(masked.stmts))
  return core.Proc(name=proc.name,
                   inputs=proc.inputs,
                   output=proc.output,
                   shares=proc.shares,
                   orig=orig.finish((proc.output,)),
                   masked=masked.finish(proc.output_shares),
                   assertions=proc.assertions,
                   pos=proc.pos)


def _rename(stmts: Sequence[core.Node], prefix: str,
            keep: Set[str] = frozenset()) -> List[core.Node]:
  """Prefixes every variable name in straight-line statements."""

  def visitor(node, args):
    if isinstance(node, core.Var) and node.name not in keep:
      return core.Var(name=prefix + node.name, idx=(), pos=node.pos)
    return None

  return [_.visit(visitor) for _ in stmts]


class _Block:
  """Flattens one block of statements.

  Attributes:
    stmts: The straight-line statements emitted so far.
    defined: Names readable at the current point.
  """

  def __init__(self,
               program: core.Program,
               done: Dict[str, core.Proc],
               mode: str,
               shares: int,
               owner: str,
               inputs: Sequence[str],
               encodings: Sequence[str] = ()):
    self.program = program
    self.affines = program.affines
    self.procs = done
    self.all_procs = program.proc_dict
    self.mode = mode
    self.shares = shares
    self.owner = owner
    self.stmts: List[core.Node] = []
    self.defined: Set[str] = set(inputs)
    self.reserved: Set[str] = set(inputs)
    self.encodings: Set[str] = set(encodings)
    self.rename: Dict[str, str] = {}
    self.env: Dict[str, int] = {}
    self.call_count = collections.Counter()
    self.fresh_count = collections.Counter()

  def run(self, stmts: Sequence[core.Node]) -> None:
    for stmt in stmts:
      self.stmt(stmt)

  def finish(self, outputs: Sequence[str]) -> tuple:
    """Returns the statements, restoring outputs hidden by renaming."""
    for output in outputs:
      if output in self.rename:
        self.stmts.append(
            core.Assign(target=core.Var(name=output, idx=()),
                        expr=core.Var(name=self.rename[output], idx=())))
    return tuple(self.stmts)

  def check_defined(self, names: Sequence[str], owner: core.Node) -> None:
    for name in names:
      if name not in self.defined:
        raise util.SemanticError('%s%s of %s is never assigned' %
                                 (owner.where, name, self.owner))

  def fresh(self, name: str) -> str:
    while True:
      self.fresh_count[name] += 1
      candidate = '%s__%d' % (name, self.fresh_count[name])
      if candidate not in self.reserved:
        return candidate

  def read(self, name: str, node: core.Node) -> str:
    name = self.rename.get(name, name)
    if name not in self.defined:
      raise util.SemanticError('%s%s is read before it is assigned in %s' %
                               (node.where, name, self.owner))
    return name

  def write(self, name: str) -> None:
    self.rename.pop(name, None)
    self.defined.add(name)
    self.reserved.add(name)

  def stmt(self, stmt: core.Node) -> None:
    if isinstance(stmt, core.For):
      lo = stmt.lo.evaluate(self.env)
      hi = stmt.hi.evaluate(self.env)
      saved = self.env.get(stmt.var)
      for value in range(lo, hi):
        self.env[stmt.var] = value
        self.run(stmt.body)
      if saved is None:
        self.env.pop(stmt.var, None)
      else:
        self.env[stmt.var] = saved
    elif isinstance(stmt, core.If):
      if self.guard(stmt.cond):
        self.run(stmt.then)
      else:
        self.run(stmt.orelse)
    elif isinstance(stmt, core.Assume):
      pass  # recorded on the procedure
    elif isinstance(stmt, core.Rand):
      name = stmt.target.resolve(self.env)
      if name in self.reserved:
        fresh = self.fresh(name)
        self.write(fresh)
        self.rename[name] = fresh
        self.defined.add(name)
        name = fresh
      else:
        self.write(name)
      self.stmts.append(
          core.Rand(target=core.Var(name=name, idx=(), pos=stmt.target.pos),
                    pos=stmt.pos))
    elif isinstance(stmt, core.Assign):
      self.assign(stmt)
    else:
      raise util.InternalError('unexpected statement %r' % stmt)

  def guard(self, cond: core.Cmp) -> bool:
    lhs = self.const(cond.lhs)
    if cond.op is None:
      return lhs != 0
    rhs = self.const(cond.rhs)
    return {
        '==': lhs == rhs,
        '!=': lhs != rhs,
        '<': lhs < rhs,
        '<=': lhs <= rhs,
        '>': lhs > rhs,
        '>=': lhs >= rhs,
    }[cond.op]

  def const(self, expr: core.Node) -> int:
    if isinstance(expr, core.Num):
      return expr.value
    if isinstance(expr, core.Var) and not expr.idx and expr.name in self.env:
      return self.env[expr.name]
    raise util.SemanticError('%sguard %s is not a compile-time constant' %
                             (expr.where, expr))

  def assign(self, stmt: core.Assign) -> None:
    target = stmt.target.resolve(self.env)
    expr = stmt.expr
    if self.mode == MASKED:
      if isinstance(expr, core.Call) and expr.name in self.all_procs:
        self.masked_proc_call(target, expr)
        return
      if (isinstance(expr, core.Call) and expr.name in self.affines and
          self.is_encoding(expr.arg[0])):
        self.masked_affine_call(target, expr)
        return
      if self.is_encoding(expr):
        src = expr.resolve(self.env)
        for i in range(self.shares):
          self.emit(core.share_name(target, i),
                    core.Var(name=self.read(core.share_name(src, i), expr),
                             idx=()), stmt)
        self.encodings.add(target)
        return
    expr = self.expr(expr)
    self.emit(target, expr, stmt)

  def emit(self, target: str, expr: core.Node, stmt: core.Node) -> None:
    self.write(target)
    self.stmts.append(
        core.Assign(target=core.Var(name=target, idx=(), pos=stmt.target.pos),
                    expr=expr,
                    pos=stmt.pos))

  def is_encoding(self, expr: core.Node) -> bool:
    return (isinstance(expr, core.Var) and
            expr.resolve(self.env) in self.encodings)

  def expr(self, expr: core.Node) -> core.Node:
    if isinstance(expr, core.Num):
      self.program.field.check(expr.value)
      return core.Num(value=expr.value, pos=expr.pos)
    if isinstance(expr, core.Var):
      if not expr.idx and expr.name in self.env:
        return core.Num(value=self.program.field.check(self.env[expr.name]),
                        pos=expr.pos)
      return core.Var(name=self.read(expr.resolve(self.env), expr),
                      idx=(),
                      pos=expr.pos)
    if isinstance(expr, core.BinaryOp):
      return type(expr)(operand=tuple(map(self.expr, expr.operand)),
                        pos=expr.pos)
    if isinstance(expr, core.Builtin):
      amount = expr.amount
      if amount is not None:
        amount = core.Index(base=amount.evaluate(self.env),
                            offset=0,
                            pos=amount.pos)
      return core.Builtin(name=expr.name,
                          arg=self.expr(expr.arg),
                          amount=amount,
                          pos=expr.pos)
    if isinstance(expr, core.AffineConst):
      return expr
    if isinstance(expr, core.Call):
      args = tuple(map(self.expr, expr.arg))
      if expr.name in self.affines:
        return core.Call(name=expr.name, arg=args, pos=expr.pos)
      if self.mode == MASKED:
        raise util.SemanticError(
            '%sprocedure %s must be called as `y <- %s(x, ...)` on encodings' %
            (expr.where, expr.name, expr.name))
      return self.orig_proc_call(expr, args)
    raise util.InternalError('unexpected expression %r' % expr)

  def callee(self, call: core.Call) -> core.Proc:
    callee = self.procs[call.name]
    if callee.shares != self.shares:
      raise util.SemanticError(
          '%s%s uses %d shares but %s uses %d' %
          (call.where, callee.name, callee.shares, self.owner, self.shares))
    return callee

  def prefix(self, name: str) -> str:
    self.call_count[name] += 1
    return '%s__%d__' % (name, self.call_count[name])

  def splice(self, stmts: Sequence[core.Node], prefix: str) -> None:
    for stmt in _rename(stmts, prefix):
      self.write(stmt.target.name)
      self.stmts.append(stmt)

  def orig_proc_call(self, call: core.Call, args) -> core.Var:
    callee = self.callee(call)
    prefix = self.prefix(callee.name)
    for param, arg in zip(callee.inputs, args):
      self.write(prefix + param)
      self.stmts.append(
          core.Assign(target=core.Var(name=prefix + param, idx=()), expr=arg))
    self.splice(callee.orig, prefix)
    return core.Var(name=prefix + callee.output, idx=(), pos=call.pos)

  def masked_proc_call(self, target: str, call: core.Call) -> None:
    callee = self.callee(call)
    for arg in call.arg:
      if not self.is_encoding(arg):
        raise util.SemanticError('%sargument %s of %s is not an encoding' %
                                 (arg.where, arg, callee.name))
    prefix = self.prefix(callee.name)
    for param, arg in zip(callee.inputs, call.arg):
      src = arg.resolve(self.env)
      for i in range(self.shares):
        dst = prefix + core.share_name(param, i)
        self.write(dst)
        self.stmts.append(
            core.Assign(target=core.Var(name=dst, idx=()),
                        expr=core.Var(name=self.read(core.share_name(src, i),
                                                     arg),
                                      idx=())))
    self.splice(callee.masked, prefix)
    for i in range(self.shares):
      self.emit(core.share_name(target, i),
                core.Var(name=prefix + core.share_name(callee.output, i),
                         idx=()), call_stmt(call, target))
    self.encodings.add(target)

  def masked_affine_call(self, target: str, call: core.Call) -> None:
    """Applies an affine symbol share-wise; odd orders add its constant."""
    src = call.arg[0].resolve(self.env)
    for i in range(self.shares):
      share = self.read(core.share_name(src, i), call)
      expr: core.Node = core.Call(name=call.name,
                                  arg=(core.Var(name=share, idx=()),),
                                  pos=call.pos)
      if i == 0 and (self.shares - 1) % 2 == 1:
        expr = core.Xor(operand=(expr, core.AffineConst(name=call.name)))
      self.emit(core.share_name(target, i), expr, call_stmt(call, target))
    self.encodings.add(target)


def call_stmt(call: core.Call, target: str) -> core.Assign:
  return core.Assign(target=core.Var(name=target, idx=(), pos=call.pos),
                     expr=call,
                     pos=call.pos)
