"""SMT-LIB2 emission for problems the oracles cannot settle.

Field elements are bit-vectors of width n. Addition is bvxor and
multiplication is the function gf_mul, a Russian peasant multiplication
unrolled into n rounds with a reduction by the modulus in every round.
Defined affine transformations become define-fun, bit-level built-ins
included; declared-only ones are uninterpreted functions constrained to be
linear.

Two kinds of scripts are written:

  * equivalence: asserts tau != 0; unsat means the procedure is correct;
  * affine: asserts that f(x ^ y) ^ f(x) ^ f(y) equals a constant c for all
    x and y; a model gives c.

Output only depends on its arguments, so scripts can be kept as golden files.
"""
import io
import logging
import os
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from maskeq import util
from maskeq.field import Field
from maskeq.lang import core
from maskeq.lang.visitor import build_call_graph
from maskeq.term.core import ADD, CONST, MUL, VAR, TermId, TermStore

__all__ = (
    'bvconst',
    'bvsort',
    'emit_affine',
    'emit_equivalence',
    'gf_mul_defs',
    'sexpr',
    'write_script',
)

_logger = logging.getLogger().getChild(__name__)

_SHIFTS = {'shl': 'bvshl', 'shr': 'bvlshr'}
_MASKS = {'and': 'bvand', 'or': 'bvor'}
_ROTATES = {'rotl': 'rotate_left', 'rotr': 'rotate_right'}


def sexpr(items: Iterable) -> str:
  return '(%s)' % ' '.join(map(str, items))


def bvsort(width: int) -> str:
  return '(_ BitVec %d)' % width


def bvconst(value: int, width: int) -> str:
  return '(_ bv%d %d)' % (value, width)


def _let(binds: Sequence[Tuple[str, str]], body: str) -> str:
  return sexpr(['let', sexpr(sexpr(_) for _ in binds), body])


def _bit(name: str, index: int) -> str:
  return '(= ((_ extract %d %d) %s) #b1)' % (index, index, name)


def gf_mul_defs(field: Field) -> List[str]:
  """define-fun lines for gf_xtime and gf_mul over field."""
  width = field.width
  sort = bvsort(width)
  one = bvconst(1, width)
  zero = bvconst(0, width)
  reduce = bvconst(field.poly & field.mask, width)
  lines = [
      '(define-fun gf_xtime ((a %s)) %s' % (sort, sort),
      '  (ite %s (bvxor (bvshl a %s) %s) (bvshl a %s)))' %
      (_bit('a', width - 1), one, reduce, one),
  ]
  # Round i adds a * x^i when bit i of b is set, then doubles a.
  body = 'p%d' % width
  for i in reversed(range(width)):
    binds = [('p%d' % (i + 1),
              '(bvxor p%d (ite %s a%d %s))' % (i, _bit('b', i), i, zero))]
    if i + 1 < width:
      binds.append(('a%d' % (i + 1), '(gf_xtime a%d)' % i))
    body = _let(binds, body)
  body = _let([('p0', zero), ('a0', 'a')], body)
  lines.append('(define-fun gf_mul ((a %s) (b %s)) %s' % (sort, sort, sort))
  lines.append('  %s)' % body)
  return lines


class _Emitter:
  """Accumulates the declarations of one script."""

  def __init__(self, program: core.Program):
    self.program = program
    self.field = program.field
    self.sort = bvsort(self.field.width)
    self.buf = io.StringIO()
    self.printer = util.Printer(self.buf)

  def header(self, title: str, logic: str) -> None:
    println = self.printer.println
    println('; %s' % title)
    println('; field %s' % self.field)
    println('(set-info :smt-lib-version 2.6)')
    println('(set-logic %s)' % logic)
    self.printer.printlns(gf_mul_defs(self.field))

  def symbols(self, roots: Iterable[str]) -> List[str]:
    """roots and everything they call, callees first."""
    graph = build_call_graph(self.program)
    wanted = set()
    for name in roots:
      wanted.add(name)
      wanted.update(graph.callees(name))
    affines = self.program.affines
    return [
        _ for _ in graph.dependency_order() if _ in wanted and _ in affines
    ]

  def declare_symbols(self, names: Sequence[str]) -> None:
    affines = self.program.affines
    for name in names:
      defn = affines[name]
      if defn is None:
        self.declare_linear(name)
      else:
        self.define_affine(defn)

  def declare_linear(self, name: str) -> None:
    sort = self.sort
    println = self.printer.println
    println('(declare-fun %s (%s) %s)' % (name, sort, sort))
    println('(assert (forall ((x %s) (y %s))' % (sort, sort))
    println('  (= (%s (bvxor x y)) (bvxor (%s x) (%s y)))))' %
            (name, name, name))

  def define_affine(self, defn: core.AffineDef) -> None:
    binds = []
    for stmt in defn.body:
      if not isinstance(stmt, core.Assign):
        raise util.InternalError('%s%s is not straight-line; preprocess first' %
                                 (stmt.where, defn.name))
      binds.append((stmt.target.name, self.expr(stmt.expr)))
    body = defn.output
    for bind in reversed(binds):
      body = _let([bind], body)
    self.printer.println('(define-fun %s ((%s %s)) %s' %
                         (defn.name, defn.input, self.sort, self.sort))
    self.printer.println('  %s)' % body)

  def expr(self, expr: core.Node) -> str:
    width = self.field.width
    if isinstance(expr, core.Num):
      return bvconst(expr.value, width)
    if isinstance(expr, core.Var):
      return expr.name
    if isinstance(expr, core.Xor):
      return sexpr(['bvxor'] + [self.expr(_) for _ in expr.operand])
    if isinstance(expr, core.Mul):
      result = self.expr(expr.operand[0])
      for operand in expr.operand[1:]:
        result = sexpr(['gf_mul', result, self.expr(operand)])
      return result
    if isinstance(expr, core.Call):
      return sexpr([expr.name, self.expr(expr.arg[0])])
    if isinstance(expr, core.AffineConst):
      return sexpr([expr.name, bvconst(0, width)])
    if isinstance(expr, core.Builtin):
      arg = self.expr(expr.arg)
      if expr.name == 'not':
        return sexpr(['bvnot', arg])
      amount = expr.amount.evaluate({})
      if expr.name in _ROTATES:
        return sexpr(['(_ %s %d)' % (_ROTATES[expr.name], amount % width), arg])
      if expr.name in _SHIFTS:
        return sexpr([_SHIFTS[expr.name], arg, bvconst(min(amount, width),
                                                       width)])
      return sexpr(
          [_MASKS[expr.name], arg,
           bvconst(amount & self.field.mask, width)])
    raise util.InternalError('cannot emit %r' % expr)

  def term(self, store: TermStore, root: TermId) -> str:
    """root as nested lets, one binding per shared inner node."""
    names: Dict[TermId, str] = {}
    binds: List[Tuple[str, str]] = []
    width = self.field.width
    for sub in store.postorder((root,)):
      node = store.node(sub)
      op = node[0]
      if op == CONST:
        names[sub] = bvconst(node[1], width)
        continue
      if op == VAR:
        names[sub] = node[1]
        continue
      if op == ADD:
        text = sexpr(['bvxor', names[node[1]], names[node[2]]])
      elif op == MUL:
        text = sexpr(['gf_mul', names[node[1]], names[node[2]]])
      else:
        text = sexpr([node[1], names[node[2]]])
      names[sub] = 't!%d' % len(binds)
      binds.append((names[sub], text))
    body = names[root]
    for bind in reversed(binds):
      body = _let([bind], body)
    return body

  def finish(self, commands: Sequence[str]) -> str:
    self.printer.printlns(commands)
    self.printer.println('(exit)')
    return self.buf.getvalue()


def _logic(program: core.Program, names: Sequence[str],
           quantified: bool) -> str:
  affines = program.affines
  if any(affines[_] is None for _ in names):
    return 'UFBV'
  return 'BV' if quantified else 'QF_BV'


def emit_equivalence(store: TermStore,
                     root: TermId,
                     program: core.Program,
                     title: str = '') -> str:
  """A script that is unsat iff root is identically zero.

  Args:
    store: The store root lives in.
    root: The equivalence term or its normal form.
    program: The preprocessed program that supplies the affine symbols.
    title: Written as the first comment line.
  """
  emitter = _Emitter(program)
  names = emitter.symbols(store.symbols(root))
  emitter.header(title or 'equivalence', _logic(program, names, False))
  emitter.declare_symbols(names)
  for name in store.variables(root):
    emitter.printer.println('(declare-fun %s () %s)' % (name, emitter.sort))
  emitter.printer.println('(assert (not (= %s %s)))' %
                          (emitter.term(store, root),
                           bvconst(0, program.field.width)))
  _logger.debug('equivalence script over %d symbol(s)', len(names))
  return emitter.finish(['(check-sat)', '(get-model)'])


def emit_affine(program: core.Program,
                defn: core.AffineDef,
                title: Optional[str] = None) -> str:
  """A script whose models give the affine constant of defn."""
  emitter = _Emitter(program)
  names = emitter.symbols([defn.name])
  emitter.header(title or 'affine constant of %s' % defn.name,
                 _logic(program, names, True))
  emitter.declare_symbols(names)
  sort = emitter.sort
  name = defn.name
  println = emitter.printer.println
  println('(declare-fun c! () %s)' % sort)
  println('(assert (forall ((x %s) (y %s))' % (sort, sort))
  println('  (= (bvxor (%s (bvxor x y)) (%s x) (%s y)) c!)))' %
          (name, name, name))
  return emitter.finish(['(check-sat)', '(get-value (c!))'])


def write_script(smt_dir: str, name: str, text: str) -> str:
  """Writes text to smt_dir/name.smt2 and returns the path."""
  os.makedirs(smt_dir, exist_ok=True)
  path = os.path.join(smt_dir, '%s.smt2' % name)
  with open(path, 'w') as out:
    out.write(text)
  _logger.info('wrote %s', path)
  return path
