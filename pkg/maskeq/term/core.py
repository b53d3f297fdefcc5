"""Hash-consed term DAG.

A term is an int handle into a `TermStore`. Nodes are tuples:

  ('c', value)        field constant
  ('v', name)         variable
  ('+', left, right)  addition (XOR)
  ('*', left, right)  field multiplication
  ('f', symbol, arg)  application of a unary affine symbol

Structurally equal nodes always get the same handle, so handle equality is
structural equality. Construction never simplifies.
"""
import logging
from typing import (Callable, Collection, Dict, Iterable, Iterator, List,
                    Mapping, Optional, Sequence, Tuple)

from maskeq import util
from maskeq.field import Field

__all__ = (
    'MissingBinding',
    'TermId',
    'TermStore',
    'UnknownSymbol',
    'CONST',
    'VAR',
    'ADD',
    'MUL',
    'APP',
)

_logger = logging.getLogger().getChild(__name__)

TermId = int

CONST = 'c'
VAR = 'v'
ADD = '+'
MUL = '*'
APP = 'f'


class UnknownSymbol(util.SemanticError):
  pass


class MissingBinding(util.SemanticError):
  pass


class TermStore:
  """An append-only store of hash-consed terms over one field.

  Attributes:
    field: The field constants live in.
    known_symbols: Affine symbols applications may use, or None for any.
  """

  def __init__(self, field: Field, symbols: Optional[Collection[str]] = None):
    self.field = field
    self.known_symbols = None if symbols is None else frozenset(symbols)
    self._nodes: List[tuple] = []
    self._ids: Dict[tuple, TermId] = {}
    self.zero = self.mk_const(0)
    self.one = self.mk_const(1)

  def __len__(self) -> int:
    return len(self._nodes)

  def _intern(self, node: tuple) -> TermId:
    term = self._ids.get(node)
    if term is None:
      term = self._ids[node] = len(self._nodes)
      self._nodes.append(node)
    return term

  def node(self, term: TermId) -> tuple:
    return self._nodes[term]

  def kind(self, term: TermId) -> str:
    return self._nodes[term][0]

  def mk_const(self, value: int) -> TermId:
    return self._intern((CONST, self.field.check(value)))

  def mk_var(self, name: str) -> TermId:
    return self._intern((VAR, name))

  def mk_add(self, left: TermId, right: TermId) -> TermId:
    return self._intern((ADD, left, right))

  def mk_mul(self, left: TermId, right: TermId) -> TermId:
    return self._intern((MUL, left, right))

  def mk_app(self, symbol: str, arg: TermId) -> TermId:
    if self.known_symbols is not None and symbol not in self.known_symbols:
      raise UnknownSymbol('unknown affine symbol %s' % symbol)
    return self._intern((APP, symbol, arg))

  def mk_node(self, node: tuple) -> TermId:
    """Interns a node tuple whose operands are already handles."""
    if node[0] == APP:
      return self.mk_app(node[1], node[2])
    return self._intern(node)

  def mk_xor(self, terms: Sequence[TermId]) -> TermId:
    """Left fold of addition; the empty sum is 0."""
    if not terms:
      return self.zero
    result = terms[0]
    for term in terms[1:]:
      result = self.mk_add(result, term)
    return result

  def children(self, term: TermId) -> Tuple[TermId, ...]:
    node = self._nodes[term]
    if node[0] in (ADD, MUL):
      return node[1:]
    if node[0] == APP:
      return (node[2],)
    return ()

  def postorder(self, roots: Iterable[TermId]) -> Iterator[TermId]:
    """Yields every reachable term once, children before parents."""
    seen = set()
    for root in roots:
      if root in seen:
        continue
      stack = [(root, False)]
      while stack:
        term, expanded = stack.pop()
        if expanded:
          yield term
          continue
        if term in seen:
          continue
        seen.add(term)
        stack.append((term, True))
        for child in reversed(self.children(term)):
          if child not in seen:
            stack.append((child, False))

  def rebuild(self, term: TermId,
              callback: Callable[[TermId, tuple], Optional[TermId]]) -> TermId:
    """Rebuilds term bottom-up.

    callback gets each original term and its node with rebuilt children; it
    returns a replacement handle or None to keep the rebuilt node.
    """
    done: Dict[TermId, TermId] = {}
    for sub in self.postorder((term,)):
      node = self._nodes[sub]
      if node[0] in (ADD, MUL):
        node = (node[0], done[node[1]], done[node[2]])
      elif node[0] == APP:
        node = (APP, node[1], done[node[2]])
      result = callback(sub, node)
      if result is None:
        result = self._intern(node)
      done[sub] = result
    return done[term]

  def substitute(self, term: TermId, mapping: Mapping[str, TermId]) -> TermId:
    """Simultaneously replaces variables by terms."""
    if not mapping:
      return term

    def callback(sub, node):
      if node[0] == VAR:
        return mapping.get(node[1])
      return None

    return self.rebuild(term, callback)

  def map_apps(self, term: TermId,
               callback: Callable[[str, TermId], Optional[TermId]]) -> TermId:
    """Replaces applications f(u) by callback(f, u') where it is not None.

    u' is the already rebuilt argument.
    """

    def wrapper(sub, node):
      if node[0] == APP:
        return callback(node[1], node[2])
      return None

    return self.rebuild(term, wrapper)

  def eval(self, term: TermId, env: Mapping[str, int],
           tables: Mapping[str, Sequence[int]]) -> int:
    """Evaluates term; tables give every affine symbol as a function table.

    Raises:
      MissingBinding: If a variable or symbol has no value.
    """
    field = self.field
    values: Dict[TermId, int] = {}
    for sub in self.postorder((term,)):
      node = self._nodes[sub]
      op = node[0]
      if op == CONST:
        value = node[1]
      elif op == VAR:
        if node[1] not in env:
          raise MissingBinding('no value for variable %s' % node[1])
        value = env[node[1]]
      elif op == ADD:
        value = values[node[1]] ^ values[node[2]]
      elif op == MUL:
        value = field.mul(values[node[1]], values[node[2]])
      else:
        table = tables.get(node[1])
        if table is None:
          raise MissingBinding('no table for affine symbol %s' % node[1])
        value = int(table[values[node[2]]])
      values[sub] = value
    return values[term]

  def variables(self, term: TermId) -> Tuple[str, ...]:
    return tuple(
        sorted({
            self._nodes[_][1]
            for _ in self.postorder((term,))
            if self._nodes[_][0] == VAR
        }))

  def symbols(self, term: TermId) -> Tuple[str, ...]:
    return tuple(
        sorted({
            self._nodes[_][1]
            for _ in self.postorder((term,))
            if self._nodes[_][0] == APP
        }))

  def size(self, term: TermId) -> int:
    """Number of distinct nodes reachable from term."""
    return sum(1 for _ in self.postorder((term,)))

  def app_depth(self, term: TermId) -> Dict[str, int]:
    """Least application height per symbol.

    An application with no application below it has height 1.
    """
    depth: Dict[TermId, int] = {}
    result: Dict[str, int] = {}
    for sub in self.postorder((term,)):
      node = self._nodes[sub]
      inner = max((depth[_] for _ in self.children(sub)), default=0)
      if node[0] == APP:
        depth[sub] = inner + 1
        result[node[1]] = min(result.get(node[1], depth[sub]), depth[sub])
      else:
        depth[sub] = inner
    return result

  def to_str(self, term: TermId) -> str:
    """Infix rendering: ^ for addition, * for multiplication."""
    text: Dict[TermId, str] = {}
    for sub in self.postorder((term,)):
      node = self._nodes[sub]
      op = node[0]
      if op == CONST:
        text[sub] = '%#x' % node[1] if node[1] > 9 else str(node[1])
      elif op == VAR:
        text[sub] = node[1]
      elif op == ADD:
        text[sub] = '%s ^ %s' % (text[node[1]], text[node[2]])
      elif op == MUL:
        parts = []
        for child in node[1:]:
          if self._nodes[child][0] == ADD:
            parts.append('(%s)' % text[child])
          else:
            parts.append(text[child])
        text[sub] = ' * '.join(parts)
      else:
        text[sub] = '%s(%s)' % (node[1], text[node[2]])
    return text[term]
