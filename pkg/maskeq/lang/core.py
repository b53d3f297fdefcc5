import copy
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from maskeq import util
from maskeq.field import Field

__all__ = (
    'AffineConst',
    'AffineDecl',
    'AffineDef',
    'Assert',
    'Assign',
    'Assume',
    'BinaryOp',
    'Builtin',
    'Call',
    'Cmp',
    'For',
    'If',
    'Index',
    'Mul',
    'Node',
    'Num',
    'Proc',
    'Program',
    'Rand',
    'Var',
    'Xor',
    'parenthesize',
    'share_name',
    'BUILTINS',
    'GRAMMAR',
)

_logger = logging.getLogger().getChild(__name__)

BUILTINS = ('rotl', 'rotr', 'shl', 'shr', 'and', 'or', 'not')

GRAMMAR = r'''
Program: items*=TopItem;
TopItem: FieldDecl | AffineDef | AffineDecl | Proc;

FieldDecl: 'field' width=Num poly=Num ';';
AffineDecl: 'affine' name=ID ';';
AffineDef: 'affine' name=ID '(' input=ID ')' '->' output=ID
           '{' body*=Stmt '}';
Proc: 'proc' name=ID '(' inputs+=ID[','] ')' '->' output=ID
      '{' orig*=Stmt 'shares' shares=Num ';' masked*=Stmt '}';

Stmt: For | If | Assume | Assert | RandStmt | Assign;
For: 'for' var=ID 'in' lo=Index '..' hi=Index '{' body*=Stmt '}';
If: 'if' cond=Cond '{' then*=Stmt '}' ('else' '{' orelse*=Stmt '}')?;
Assume: 'assume' cond=Cond ';';
Assert: 'assert' cond=Cond ';';
RandStmt: target=Ref '<-' 'rand' ';';
Assign: target=Ref '<-' expr=Expr ';';

Cond: lhs=Expr (op=CmpOp rhs=Expr)?;
CmpOp: '==' | '!=' | '<=' | '>=' | '<' | '>';

Expr: operand+=Term ('^' operand+=Term)*;
Term: operand+=Operand ('*' operand+=Operand)*;
Operand: builtin=Builtin | call=Call | num=Num | ref=Ref | '(' expr=Expr ')';
Builtin: name=BuiltinName '(' arg=Expr (',' amount=Index)? ')';
BuiltinName: 'rotl' | 'rotr' | 'shl' | 'shr' | 'and' | 'or' | 'not';
Call: name=ID '(' args+=Expr[','] ')';
Ref: name=ID ('[' idx+=Index ']')*;
Index: (num=Num | var=ID) (op=IndexOp off=Num)?;
IndexOp: '+' | '-';

Num: /0[xX][0-9a-fA-F]+|0[bB][01]+|[0-9]+/;
Comment: /\/\/[^\n]*/ | /\/\*(.|\n)*?\*\//;
'''


def parenthesize(expr) -> str:
  return '(%s)' % expr


def share_name(name: str, idx: int) -> str:
  """Name of share idx of the encoding of name."""
  return '%s%d' % (name, idx)


class Node:
  """A immutable, hashable AST node.

  Source positions are kept in `pos` as (line, col) and never take part in
  equality.
  """
  SCALAR_ATTRS: Tuple[str, ...] = ()
  LINEAR_ATTRS: Tuple[str, ...] = ()

  @property
  def ATTRS(self) -> Tuple[str, ...]:
    return self.SCALAR_ATTRS + self.LINEAR_ATTRS

  def __init__(self, **kwargs):
    self.pos: Optional[Tuple[int, int]] = kwargs.pop('pos', None)
    for attr in self.SCALAR_ATTRS:
      setattr(self, attr, kwargs.pop(attr))
    for attr in self.LINEAR_ATTRS:
      setattr(self, attr, tuple(kwargs.pop(attr, ())))
    if kwargs:
      raise util.InternalError('unexpected attributes for %s: %s' %
                               (type(self).__name__, ', '.join(kwargs)))

  def __hash__(self) -> int:
    return hash((type(self).__name__,
                 tuple(getattr(self, _) for _ in self.SCALAR_ATTRS),
                 tuple(tuple(getattr(self, _)) for _ in self.LINEAR_ATTRS)))

  def __eq__(self, other) -> bool:
    return type(self) is type(other) and all(
        getattr(self, attr) == getattr(other, attr) for attr in self.ATTRS)

  def __repr__(self) -> str:
    return '%s(%s)' % (type(self).__name__, ', '.join(
        '%s=%r' % (attr, getattr(self, attr)) for attr in self.ATTRS))

  @property
  def where(self) -> str:
    if self.pos is None:
      return ''
    return '%d:%d: ' % self.pos

  def visit(self, callback, args=None, pre_recursion=None, post_recursion=None):
    """A general-purpose visitor.

    The args parameter is passed to the callbacks so that they may read or
    write any information from or to the caller. A copy of self is passed to
    the callback; if the callback returns a different object, that object is
    returned without recursion. Otherwise every child node is visited and the
    copy is rebuilt from the visited children.
    """

    def callback_wrapper(callback, obj, args):
      if callback is None:
        return obj
      result = callback(obj, args)
      if result is not None:
        return result
      return obj

    self_copy = copy.copy(self)
    obj = callback_wrapper(callback, self_copy, args)
    if obj is not self_copy:
      return obj
    obj = callback_wrapper(pre_recursion, obj, args)
    for attr in obj.SCALAR_ATTRS:
      val = getattr(obj, attr)
      if isinstance(val, Node):
        setattr(obj, attr,
                val.visit(callback, args, pre_recursion, post_recursion))
    for attr in obj.LINEAR_ATTRS:
      setattr(
          obj, attr,
          tuple(
              _.visit(callback, args, pre_recursion, post_recursion
                     ) if isinstance(_, Node) else _
              for _ in getattr(obj, attr)))
    return callback_wrapper(post_recursion, obj, args)


class Num(Node):
  SCALAR_ATTRS = ('value',)

  value: int

  def __str__(self):
    if self.value > 9:
      return '%#x' % self.value
    return str(self.value)


class Index(Node):
  """An index expression: a literal or a loop variable plus an offset."""
  SCALAR_ATTRS = 'base', 'offset'

  base: Union[int, str]
  offset: int

  def __str__(self):
    if isinstance(self.base, int):
      return str(self.base + self.offset)
    if self.offset > 0:
      return '%s+%d' % (self.base, self.offset)
    if self.offset < 0:
      return '%s-%d' % (self.base, -self.offset)
    return self.base

  def evaluate(self, env: Dict[str, int]) -> int:
    if isinstance(self.base, int):
      return self.base + self.offset
    if self.base not in env:
      raise util.SemanticError('%sindex %s is not a compile-time constant' %
                               (self.where, self))
    return env[self.base] + self.offset


class Var(Node):
  SCALAR_ATTRS = ('name',)
  LINEAR_ATTRS = ('idx',)

  name: str
  idx: Sequence[Index]

  def __str__(self):
    return self.name + ''.join(map('[{}]'.format, self.idx))

  def resolve(self, env: Dict[str, int]) -> str:
    """Flattens indexed references under loop bindings.

    x[1] is x1 and r[0][2] is r0_2; a loop variable used as an underscore
    subscript is substituted too, so r_i is r_0 when i is 0.
    """
    name = self.name
    if env and '_' in name:
      head, *subscripts = name.split('_')
      name = '_'.join([head] + [
          str(env[_]) if _ in env else _ for _ in subscripts])
    if not self.idx:
      return name
    return name + '_'.join(str(_.evaluate(env)) for _ in self.idx)


class BinaryOp(Node):
  LINEAR_ATTRS = ('operand',)
  OPERATOR = ''
  PRECEDENCE = 0

  operand: Sequence[Node]

  def __str__(self):
    parts = []
    for operand in self.operand:
      text = str(operand)
      if (isinstance(operand, BinaryOp) and
          operand.PRECEDENCE <= self.PRECEDENCE):
        text = parenthesize(text)
      parts.append(text)
    return (' %s ' % self.OPERATOR).join(parts)


class Xor(BinaryOp):
  OPERATOR = '^'
  PRECEDENCE = 1


class Mul(BinaryOp):
  OPERATOR = '*'
  PRECEDENCE = 2


class Call(Node):
  SCALAR_ATTRS = ('name',)
  LINEAR_ATTRS = ('arg',)

  name: str
  arg: Sequence[Node]

  def __str__(self):
    return '{}({})'.format(self.name, ', '.join(map(str, self.arg)))


class Builtin(Node):
  """A bit-level operation, allowed only in affine bodies."""
  SCALAR_ATTRS = 'name', 'arg', 'amount'

  name: str
  arg: Node
  amount: Optional[Index]

  def __str__(self):
    if self.amount is None:
      return '%s(%s)' % (self.name, self.arg)
    return '%s(%s, %s)' % (self.name, self.arg, self.amount)


class AffineConst(Node):
  """The affine constant of a symbol, resolved during symbolic execution."""
  SCALAR_ATTRS = ('name',)

  name: str

  def __str__(self):
    return 'const(%s)' % self.name


class Cmp(Node):
  SCALAR_ATTRS = 'lhs', 'op', 'rhs'

  lhs: Node
  op: Optional[str]
  rhs: Optional[Node]

  def __str__(self):
    if self.op is None:
      return str(self.lhs)
    return '%s %s %s' % (self.lhs, self.op, self.rhs)


class Assign(Node):
  SCALAR_ATTRS = 'target', 'expr'

  target: Var
  expr: Node

  def __str__(self):
    return '%s <- %s;' % (self.target, self.expr)


class Rand(Node):
  SCALAR_ATTRS = ('target',)

  target: Var

  def __str__(self):
    return '%s <- rand;' % self.target


class Assume(Node):
  SCALAR_ATTRS = ('cond',)
  KEYWORD = 'assume'

  cond: Cmp

  def __str__(self):
    return '%s %s;' % (self.KEYWORD, self.cond)


class Assert(Assume):
  KEYWORD = 'assert'


class For(Node):
  SCALAR_ATTRS = 'var', 'lo', 'hi'
  LINEAR_ATTRS = ('body',)

  var: str
  lo: Index
  hi: Index
  body: Sequence[Node]

  def lines(self) -> Iterator[str]:
    yield 'for %s in %s..%s {' % (self.var, self.lo, self.hi)
    for stmt in self.body:
      for line in _stmt_lines(stmt):
        yield '  ' + line
    yield '}'

  def __str__(self):
    return '\n'.join(self.lines())


class If(Node):
  SCALAR_ATTRS = ('cond',)
  LINEAR_ATTRS = 'then', 'orelse'

  cond: Cmp
  then: Sequence[Node]
  orelse: Sequence[Node]

  def lines(self) -> Iterator[str]:
    yield 'if %s {' % self.cond
    for stmt in self.then:
      for line in _stmt_lines(stmt):
        yield '  ' + line
    if self.orelse:
      yield '} else {'
      for stmt in self.orelse:
        for line in _stmt_lines(stmt):
          yield '  ' + line
    yield '}'

  def __str__(self):
    return '\n'.join(self.lines())


def _stmt_lines(stmt: Node) -> Iterator[str]:
  if isinstance(stmt, (For, If)):
    yield from stmt.lines()
  else:
    yield str(stmt)


class AffineDecl(Node):
  SCALAR_ATTRS = ('name',)

  name: str

  def __str__(self):
    return 'affine %s;' % self.name


class AffineDef(Node):
  SCALAR_ATTRS = 'name', 'input', 'output'
  LINEAR_ATTRS = ('body',)

  name: str
  input: str
  output: str
  body: Sequence[Node]

  @property
  def is_opaque(self) -> bool:
    """Whether the body uses bit-level builtins and has no symbolic form."""
    found = []

    def visitor(node, args):
      if isinstance(node, Builtin):
        args.append(node)
      return node

    for stmt in self.body:
      stmt.visit(visitor, found)
    return bool(found)

  def __str__(self):
    lines = ['affine %s(%s) -> %s {' % (self.name, self.input, self.output)]
    for stmt in self.body:
      lines.extend('  ' + _ for _ in _stmt_lines(stmt))
    lines.append('}')
    return '\n'.join(lines)


class Proc(Node):
  SCALAR_ATTRS = 'name', 'output', 'shares'
  LINEAR_ATTRS = 'inputs', 'orig', 'masked', 'assertions'

  name: str
  output: str
  shares: int
  inputs: Sequence[str]
  orig: Sequence[Node]
  masked: Sequence[Node]
  assertions: Sequence[Assume]

  @property
  def order(self) -> int:
    return self.shares - 1

  def input_shares(self, name: str) -> Tuple[str, ...]:
    return tuple(share_name(name, i) for i in range(self.shares))

  @property
  def output_shares(self) -> Tuple[str, ...]:
    return self.input_shares(self.output)

  def __str__(self):
    lines = [
        'proc %s(%s) -> %s {' % (self.name, ', '.join(self.inputs),
                                 self.output)
    ]
    for stmt in self.orig:
      lines.extend('  ' + _ for _ in _stmt_lines(stmt))
    lines.append('  shares %d;' % self.shares)
    for stmt in self.masked:
      lines.extend('  ' + _ for _ in _stmt_lines(stmt))
    lines.append('}')
    return '\n'.join(lines)


class Program:
  """A parsed MSL compilation unit over one field.

  Attributes:
    field: The field all definitions compute in.
    affine_defs: Affine transformations with bodies.
    affine_decls: Names of declared-only affine transformations.
    procs: Procedures in source order.
  """

  def __init__(self,
               field: Field,
               affine_defs: Sequence[AffineDef] = (),
               affine_decls: Sequence[str] = (),
               procs: Sequence[Proc] = ()):
    self.field = field
    self.affine_defs = tuple(affine_defs)
    self.affine_decls = tuple(affine_decls)
    self.procs = tuple(procs)

  def __eq__(self, other) -> bool:
    return (isinstance(other, Program) and self.field == other.field and
            self.affine_defs == other.affine_defs and
            self.affine_decls == other.affine_decls and
            self.procs == other.procs)

  def __hash__(self) -> int:
    return hash((self.field, self.affine_defs, self.affine_decls, self.procs))

  def __str__(self):
    lines = ['field %d %#x;' % (self.field.width, self.field.poly)]
    lines.extend(str(AffineDecl(name=_)) for _ in self.affine_decls)
    lines.extend(map(str, self.affine_defs))
    lines.extend(map(str, self.procs))
    return '\n'.join(lines) + '\n'

  @property
  def affines(self) -> Dict[str, Optional[AffineDef]]:
    """All affine symbols; declared-only ones map to None."""
    result: Dict[str, Optional[AffineDef]] = {
        name: None for name in self.affine_decls
    }
    result.update((_.name, _) for _ in self.affine_defs)
    return result

  @property
  def proc_dict(self) -> Dict[str, Proc]:
    return {_.name: _ for _ in self.procs}

  def get_affine(self, name: str) -> Optional[AffineDef]:
    for defn in self.affine_defs:
      if defn.name == name:
        return defn
    return None

  def get_proc(self, name: str) -> Proc:
    for proc in self.procs:
      if proc.name == name:
        return proc
    raise util.SemanticError('no procedure named %s' % name)

  def replace(self, **kwargs) -> 'Program':
    attrs = dict(field=self.field,
                 affine_defs=self.affine_defs,
                 affine_decls=self.affine_decls,
                 procs=self.procs)
    attrs.update(kwargs)
    return Program(**attrs)

  @property
  def names(self) -> List[str]:
    return (list(self.affine_decls) + [_.name for _ in self.affine_defs] +
            [_.name for _ in self.procs])
