"""MSL text to AST.

textX parses the text against `core.GRAMMAR`; the generic textX model is then
converted into `maskeq.lang.core` nodes so that everything downstream works
on immutable, hashable nodes with source positions.
"""
import logging
from typing import List, Optional, Sequence

import textx
from textx.exceptions import TextXSemanticError, TextXSyntaxError

from maskeq import util
from maskeq.field import DEFAULT_POLY, DEFAULT_WIDTH, Field
from maskeq.lang import core

__all__ = (
    'parse',
    'parse_units',
)

_logger = logging.getLogger().getChild(__name__)

_METAMODEL = None


def _metamodel():
  global _METAMODEL  # pylint: disable=global-statement
  if _METAMODEL is None:
    _METAMODEL = textx.metamodel_from_str(core.GRAMMAR, autokwd=True)
  return _METAMODEL


def parse_units(text: str,
                field: Optional[Field] = None,
                filename: str = '<string>') -> List[core.Program]:
  """Parses MSL text into one Program per field section.

  A `field N POLY;` directive starts a new section. Definitions before the
  first directive use the given field, or GF(2^8)/0x11B.

  Args:
    text: MSL source.
    field: Field for definitions not preceded by a directive.
    filename: Used in diagnostics only.

  Returns:
    A list of Programs; empty text gives a single empty Program.

  Raises:
    util.ParseError: On syntax errors, with line and column.
    util.SemanticError: On duplicate or unresolved names.
  """
  try:
    model = _metamodel().model_from_str(text, file_name=filename)
  except (TextXSyntaxError, TextXSemanticError) as e:
    raise util.ParseError(e.message, e.line or 0, e.col or 0) from e
  if field is None:
    field = Field(DEFAULT_WIDTH, DEFAULT_POLY)
  converter = _Converter()
  sections: List[List[core.Node]] = [[]]
  fields = [field]
  for item in model.items:
    if type(item).__name__ == 'FieldDecl':
      try:
        section_field = Field(util.str2int(item.width),
                              Field.parse_poly(item.poly))
      except ValueError as e:
        raise util.ParseError(str(e), *converter.pos(item)) from e
      if sections[-1] or len(sections) > 1:
        sections.append([])
        fields.append(section_field)
      else:
        fields[-1] = section_field
      continue
    sections[-1].append(converter.convert(item))
  programs = [_make_program(f, items) for f, items in zip(fields, sections)]
  _logger.debug('parsed %s into %d unit(s)', filename, len(programs))
  return programs


def parse(text: str,
          field: Optional[Field] = None,
          filename: str = '<string>') -> core.Program:
  """Parses MSL text holding a single field section."""
  programs = parse_units(text, field, filename)
  if len(programs) != 1:
    raise util.InputError('%s holds %d field sections, expected 1' %
                          (filename, len(programs)))
  return programs[0]


def _make_program(field: Field, items: Sequence[core.Node]) -> core.Program:
  affine_defs, affine_decls, procs = [], [], []
  seen = {}
  for item in items:
    if item.name in seen:
      raise util.SemanticError('%sduplicate definition of %s' %
                               (item.where, item.name))
    seen[item.name] = item
    if isinstance(item, core.AffineDef):
      affine_defs.append(item)
    elif isinstance(item, core.AffineDecl):
      affine_decls.append(item.name)
    else:
      procs.append(item)
  program = core.Program(field, affine_defs, affine_decls, procs)
  _check_names(program)
  return program


def _check_names(program: core.Program) -> None:
  """Checks that every call resolves and that calls are well-placed."""
  affines = program.affines
  procs = program.proc_dict

  def check_calls(stmts, where: str, allow_procs: bool, allow_builtins: bool):

    def visitor(node, args):
      if isinstance(node, core.Call):
        if node.name in affines:
          if len(node.arg) != 1:
            raise util.SemanticError(
                '%saffine transformation %s takes 1 argument, got %d' %
                (node.where, node.name, len(node.arg)))
        elif node.name in procs:
          if not allow_procs:
            raise util.SemanticError('%sprocedure %s called from %s' %
                                     (node.where, node.name, where))
          if len(node.arg) != len(procs[node.name].inputs):
            raise util.SemanticError(
                '%sprocedure %s takes %d argument(s), got %d' %
                (node.where, node.name, len(procs[node.name].inputs),
                 len(node.arg)))
        else:
          raise util.SemanticError('%sunresolved name %s' %
                                   (node.where, node.name))
      elif isinstance(node, core.Builtin) and not allow_builtins:
        raise util.SemanticError(
            '%sbuilt-in %s is only allowed in affine transformations' %
            (node.where, node.name))
      return node

    for stmt in stmts:
      stmt.visit(visitor)

  for defn in program.affine_defs:
    check_calls(defn.body, 'affine %s' % defn.name, False, True)
    for stmt in defn.body:
      if isinstance(stmt, core.Rand) or any(
          isinstance(_, core.Rand) for _ in _nested(stmt)):
        raise util.SemanticError('%srand in affine transformation %s' %
                                 (stmt.where, defn.name))
  for proc in program.procs:
    if proc.shares < 1:
      raise util.SemanticError('%sprocedure %s needs at least 1 share' %
                               (proc.where, proc.name))
    _check_share_names(proc)
    check_calls(proc.orig, 'procedure %s' % proc.name, True, False)
    check_calls(proc.masked, 'procedure %s' % proc.name, True, False)


def _check_share_names(proc: core.Proc) -> None:
  """Rejects encodings whose share names coincide, e.g. a with a1."""
  owners = {}
  for base in tuple(proc.inputs) + (proc.output,):
    for name in proc.input_shares(base):
      owner = owners.setdefault(name, base)
      if owner != base:
        raise util.SemanticError(
            '%sshare %s of %s is also a share of %s in procedure %s' %
            (proc.where, name, base, owner, proc.name))


def _nested(stmt: core.Node):
  if isinstance(stmt, core.For):
    for child in stmt.body:
      yield child
      yield from _nested(child)
  elif isinstance(stmt, core.If):
    for child in stmt.then + stmt.orelse:
      yield child
      yield from _nested(child)


class _Converter:
  """Converts textX model objects into core nodes."""

  def pos(self, obj):
    location = textx.get_location(obj)
    return location['line'], location['col']

  def convert(self, obj) -> core.Node:
    method = getattr(self, '_convert_' + type(obj).__name__)
    return method(obj)

  def _stmts(self, objs) -> tuple:
    return tuple(self.convert(_) for _ in objs)

  def _convert_AffineDecl(self, obj):
    return core.AffineDecl(name=obj.name, pos=self.pos(obj))

  def _convert_AffineDef(self, obj):
    return core.AffineDef(name=obj.name,
                          input=obj.input,
                          output=obj.output,
                          body=self._stmts(obj.body),
                          pos=self.pos(obj))

  def _convert_Proc(self, obj):
    orig = self._stmts(obj.orig)
    masked = self._stmts(obj.masked)
    assertions = tuple(
        _ for _ in orig + masked if isinstance(_, (core.Assume, core.Assert)))
    if len(set(obj.inputs)) != len(obj.inputs):
      raise util.SemanticError('%s:%s: duplicate input of procedure %s' %
                               (*self.pos(obj), obj.name))
    return core.Proc(name=obj.name,
                     inputs=tuple(obj.inputs),
                     output=obj.output,
                     shares=util.str2int(obj.shares),
                     orig=orig,
                     masked=masked,
                     assertions=assertions,
                     pos=self.pos(obj))

  def _convert_For(self, obj):
    return core.For(var=obj.var,
                    lo=self.convert(obj.lo),
                    hi=self.convert(obj.hi),
                    body=self._stmts(obj.body),
                    pos=self.pos(obj))

  def _convert_If(self, obj):
    return core.If(cond=self.convert(obj.cond),
                   then=self._stmts(obj.then),
                   orelse=self._stmts(obj.orelse),
                   pos=self.pos(obj))

  def _convert_Assume(self, obj):
    return core.Assume(cond=self.convert(obj.cond), pos=self.pos(obj))

  def _convert_Assert(self, obj):
    return core.Assert(cond=self.convert(obj.cond), pos=self.pos(obj))

  def _convert_RandStmt(self, obj):
    return core.Rand(target=self.convert(obj.target), pos=self.pos(obj))

  def _convert_Assign(self, obj):
    return core.Assign(target=self.convert(obj.target),
                       expr=self.convert(obj.expr),
                       pos=self.pos(obj))

  def _convert_Cond(self, obj):
    return core.Cmp(lhs=self.convert(obj.lhs),
                    op=obj.op or None,
                    rhs=self.convert(obj.rhs) if obj.rhs is not None else None,
                    pos=self.pos(obj))

  def _convert_Expr(self, obj):
    operands = tuple(self.convert(_) for _ in obj.operand)
    if len(operands) == 1:
      return operands[0]
    return core.Xor(operand=operands, pos=self.pos(obj))

  def _convert_Term(self, obj):
    operands = tuple(self.convert(_) for _ in obj.operand)
    if len(operands) == 1:
      return operands[0]
    return core.Mul(operand=operands, pos=self.pos(obj))

  def _convert_Operand(self, obj):
    if obj.builtin is not None:
      return self.convert(obj.builtin)
    if obj.call is not None:
      return self.convert(obj.call)
    if obj.num:
      return core.Num(value=util.str2int(obj.num), pos=self.pos(obj))
    if obj.ref is not None:
      return self.convert(obj.ref)
    return self.convert(obj.expr)

  def _convert_Builtin(self, obj):
    amount = self.convert(obj.amount) if obj.amount is not None else None
    if obj.name == 'not':
      if amount is not None:
        raise util.SemanticError('%s:%s: not() takes 1 argument' %
                                 self.pos(obj))
    elif amount is None:
      raise util.SemanticError('%s:%s: %s() takes 2 arguments' %
                               (*self.pos(obj), obj.name))
    return core.Builtin(name=obj.name,
                        arg=self.convert(obj.arg),
                        amount=amount,
                        pos=self.pos(obj))

  def _convert_Call(self, obj):
    return core.Call(name=obj.name,
                     arg=tuple(self.convert(_) for _ in obj.args),
                     pos=self.pos(obj))

  def _convert_Ref(self, obj):
    return core.Var(name=obj.name,
                    idx=tuple(self.convert(_) for _ in obj.idx),
                    pos=self.pos(obj))

  def _convert_Index(self, obj):
    offset = 0
    if obj.op:
      offset = util.str2int(obj.off)
      if obj.op == '-':
        offset = -offset
    if obj.var:
      return core.Index(base=obj.var, offset=offset, pos=self.pos(obj))
    return core.Index(base=util.str2int(obj.num), offset=offset,
                      pos=self.pos(obj))
