"""Single rewriting steps on terms.

Each rule rewrites the subterm found by following a path of child indices
from the root (0 and 1 for the operands of + and *, 0 for an application
argument). Sums and products are read modulo associativity: R1, R3, F1 and
F3 see the flattened summands of a + node, R2 and F2 the flattened factors of
a * node, and rebuild them right-associated.

Besides R1-R13 there are three folding rules:

  F1  c1 + c2  ->  the field sum, for adjacent constant summands
  F2  c1 * c2  ->  the field product, for adjacent constant factors
  F3  a * m + b * m  ->  (a + b) * m, for adjacent monomials with equal
      non-constant factors

With only 0 and 1 as constants the folding rules are not needed and every
rewriting order reaches the polynomial `normalize` computes. With general
constants under affine symbols they are not confluent: f(1 + 2) may become
f(1) + f(2) + c or f(3).
"""
import logging
import random
from typing import Dict, List, Optional, Sequence, Tuple

from maskeq import util
from maskeq.rewrite.base import (RewriteCtx, RuleNotApplicable,
                                 StepBudgetExceeded)
from maskeq.term import core as term
from maskeq.term.poly import Factor, Monomial, Polynomial

__all__ = (
    'RULES',
    'apply_rule',
    'read_polynomial',
    'redexes',
    'rewrite_randomly',
)

_logger = logging.getLogger().getChild(__name__)

RULES = ('R1', 'R2', 'R3', 'R4', 'R5', 'R6', 'R7', 'R8', 'R9', 'R10', 'R11',
         'R12', 'R13', 'F1', 'F2', 'F3')

Path = Tuple[int, ...]


def _flatten(store: term.TermStore, root: term.TermId,
             op: str) -> List[term.TermId]:
  items = []
  stack = [root]
  while stack:
    sub = stack.pop()
    node = store.node(sub)
    if node[0] == op:
      stack.append(node[2])
      stack.append(node[1])
    else:
      items.append(sub)
  return items


def _chain(store: term.TermStore, op: str,
           items: Sequence[term.TermId]) -> term.TermId:
  if not items:
    return store.zero if op == term.ADD else store.one
  result = items[-1]
  for item in reversed(items[:-1]):
    result = store.mk_add(item, result) if op == term.ADD else store.mk_mul(
        item, result)
  return result


class _Keys:
  """Order keys of XOR-free terms, memoized per store."""

  def __init__(self, store: term.TermStore):
    self.store = store
    self.xor_free: Dict[term.TermId, bool] = {}
    self.monomial_keys: Dict[term.TermId, tuple] = {}

  def is_xor_free(self, root: term.TermId) -> bool:
    if root not in self.xor_free:
      for sub in self.store.postorder((root,)):
        if sub not in self.xor_free:
          self.xor_free[sub] = self.store.kind(sub) != term.ADD and all(
              self.xor_free[_] for _ in self.store.children(sub))
    return self.xor_free[root]

  def is_factor(self, sub: term.TermId) -> bool:
    kind = self.store.kind(sub)
    if kind in (term.CONST, term.VAR):
      return True
    return kind == term.APP and self.is_xor_free(self.store.node(sub)[2])

  def factor_key(self, sub: term.TermId) -> tuple:
    node = self.store.node(sub)
    if node[0] == term.CONST:
      return (0, node[1])
    if node[0] == term.VAR:
      return (1, node[1])
    return (2, node[1], self.monomial_key(node[2]))

  def monomial_key(self, sub: term.TermId) -> tuple:
    """Run-length encoded descending factor keys of an XOR-free term."""
    key = self.monomial_keys.get(sub)
    if key is None:
      factors = sorted(
          (self.factor_key(_) for _ in _flatten(self.store, sub, term.MUL)),
          reverse=True)
      runs: List[list] = []
      for factor in factors:
        if runs and runs[-1][0] == factor:
          runs[-1][1] += 1
        else:
          runs.append([factor, 1])
      key = self.monomial_keys[sub] = tuple(tuple(_) for _ in runs)
    return key

  def body_and_coef(self, field, sub: term.TermId) -> Tuple[tuple, int]:
    coef = 1
    body = []
    for factor in _flatten(self.store, sub, term.MUL):
      node = self.store.node(factor)
      if node[0] == term.CONST:
        coef = field.mul(coef, node[1])
      else:
        body.append(self.factor_key(factor))
    return tuple(sorted(body, reverse=True)), coef


def _adjacent(items: Sequence[term.TermId], pred) -> Optional[int]:
  for i in range(len(items) - 1):
    if pred(items[i], items[i + 1]):
      return i
  return None


class _Rules:

  def __init__(self, store: term.TermStore, ctx: RewriteCtx):
    self.store = store
    self.ctx = ctx
    self.field = ctx.field
    self.keys = _Keys(store)

  def is_const(self, sub: term.TermId, value: Optional[int] = None) -> bool:
    node = self.store.node(sub)
    return node[0] == term.CONST and (value is None or node[1] == value)

  def same_body(self, lhs: term.TermId, rhs: term.TermId) -> bool:
    keys = self.keys
    if lhs == rhs or not (keys.is_xor_free(lhs) and keys.is_xor_free(rhs)):
      return False
    return (keys.body_and_coef(self.field, lhs)[0] ==
            keys.body_and_coef(self.field, rhs)[0])

  def known(self, symbol: str) -> bool:
    return self.ctx.consts.get(symbol) is not None

  def rewrite(self, rule: str, sub: term.TermId) -> term.TermId:
    """Applies rule at the root of sub.

    Raises:
      RuleNotApplicable: If the premise of rule does not hold.
    """
    store = self.store
    node = store.node(sub)
    op = node[0]
    result = None
    if op == term.ADD:
      result = self.rewrite_add(rule, sub, node)
    elif op == term.MUL:
      result = self.rewrite_mul(rule, sub, node)
    elif op == term.APP:
      symbol, arg = node[1], node[2]
      if rule == 'R12' and store.kind(arg) == term.ADD and self.known(symbol):
        _, lhs, rhs = store.node(arg)
        result = store.mk_add(
            store.mk_add(store.mk_app(symbol, lhs), store.mk_app(symbol, rhs)),
            store.mk_const(self.ctx.constant(symbol)))
      elif rule == 'R13' and self.is_const(arg, 0) and self.known(symbol):
        result = store.mk_const(self.ctx.constant(symbol))
    if result is None:
      raise RuleNotApplicable('%s does not apply to %s' %
                              (rule, store.to_str(sub)))
    return result

  def rewrite_add(self, rule: str, sub: term.TermId,
                  node: tuple) -> Optional[term.TermId]:
    store = self.store
    _, lhs, rhs = node
    if rule == 'R6':
      return lhs if self.is_const(rhs, 0) else None
    if rule == 'R7':
      return rhs if self.is_const(lhs, 0) else None
    items = _flatten(store, sub, term.ADD)
    if rule == 'R3':
      i = _adjacent(items, lambda a, b: a == b)
      if i is not None:
        return _chain(store, term.ADD, items[:i] + items[i + 2:])
    elif rule == 'R1':
      keys = self.keys
      if all(map(keys.is_xor_free, items)):
        ordered = sorted(items, key=keys.monomial_key, reverse=True)
        if ordered != items:
          return _chain(store, term.ADD, ordered)
    elif rule == 'F1':
      i = _adjacent(items, lambda a, b: self.is_const(a) and self.is_const(b))
      if i is not None:
        value = store.node(items[i])[1] ^ store.node(items[i + 1])[1]
        return _chain(store, term.ADD,
                      items[:i] + [store.mk_const(value)] + items[i + 2:])
    elif rule == 'F3':
      i = _adjacent(items, self.same_body)
      if i is not None:
        keys = self.keys
        _, lcoef = keys.body_and_coef(self.field, items[i])
        _, rcoef = keys.body_and_coef(self.field, items[i + 1])
        coef = lcoef ^ rcoef
        merged = [
            _ for _ in _flatten(store, items[i], term.MUL)
            if not self.is_const(_)
        ]
        if coef == 0:
          return _chain(store, term.ADD, items[:i] + items[i + 2:])
        merged.append(store.mk_const(coef))
        return _chain(store, term.ADD, items[:i] +
                      [_chain(store, term.MUL, merged)] + items[i + 2:])
    return None

  def rewrite_mul(self, rule: str, sub: term.TermId,
                  node: tuple) -> Optional[term.TermId]:
    store = self.store
    _, lhs, rhs = node
    if rule == 'R4':
      return store.zero if self.is_const(rhs, 0) else None
    if rule == 'R5':
      return store.zero if self.is_const(lhs, 0) else None
    if rule == 'R8':
      return lhs if self.is_const(rhs, 1) else None
    if rule == 'R9':
      return rhs if self.is_const(lhs, 1) else None
    if rule == 'R10':
      if store.kind(lhs) != term.ADD:
        return None
      _, left, right = store.node(lhs)
      return store.mk_add(store.mk_mul(left, rhs), store.mk_mul(right, rhs))
    if rule == 'R11':
      if store.kind(rhs) != term.ADD:
        return None
      _, left, right = store.node(rhs)
      return store.mk_add(store.mk_mul(lhs, left), store.mk_mul(lhs, right))
    items = _flatten(store, sub, term.MUL)
    if rule == 'R2':
      keys = self.keys
      if all(map(keys.is_factor, items)):
        ordered = sorted(items, key=keys.factor_key, reverse=True)
        if ordered != items:
          return _chain(store, term.MUL, ordered)
    elif rule == 'F2':
      i = _adjacent(items, lambda a, b: self.is_const(a) and self.is_const(b))
      if i is not None:
        value = self.field.mul(store.node(items[i])[1],
                               store.node(items[i + 1])[1])
        return _chain(store, term.MUL,
                      items[:i] + [store.mk_const(value)] + items[i + 2:])
    return None


def _subterm(store: term.TermStore, root: term.TermId,
             path: Path) -> List[term.TermId]:
  """The terms along path, root first."""
  trail = [root]
  for index in path:
    children = store.children(trail[-1])
    if not 0 <= index < len(children):
      raise RuleNotApplicable('no position %s in %s' %
                              (path, store.to_str(root)))
    trail.append(children[index])
  return trail


def _replace(store: term.TermStore, trail: Sequence[term.TermId], path: Path,
             replacement: term.TermId) -> term.TermId:
  for parent, index in zip(reversed(trail[:-1]), reversed(path)):
    node = store.node(parent)
    if node[0] == term.APP:
      replacement = store.mk_app(node[1], replacement)
    else:
      operands = list(node[1:])
      operands[index] = replacement
      replacement = store.mk_node((node[0], *operands))
  return replacement


def apply_rule(store: term.TermStore, ctx: RewriteCtx, rule: str, path: Path,
               root: term.TermId) -> term.TermId:
  """Rewrites the subterm of root at path by rule, one step.

  Raises:
    RuleNotApplicable: If path is invalid or the premise does not hold.
  """
  if rule not in RULES:
    raise RuleNotApplicable('no rule named %s' % rule)
  trail = _subterm(store, root, tuple(path))
  replacement = _Rules(store, ctx).rewrite(rule, trail[-1])
  if ctx.trace:
    _logger.debug('%s at %s: %s', rule, path, store.to_str(trail[-1]))
  ctx.stats[rule] += 1
  return _replace(store, trail, tuple(path), replacement)


def redexes(store: term.TermStore, ctx: RewriteCtx,
            root: term.TermId) -> List[Tuple[str, Path]]:
  """Every (rule, path) at which a rule applies, in preorder."""
  rules = _Rules(store, ctx)
  result = []
  stack: List[Tuple[term.TermId, Path]] = [(root, ())]
  while stack:
    sub, path = stack.pop()
    kind = store.kind(sub)
    if kind == term.ADD:
      candidates = ('R1', 'R3', 'R6', 'R7', 'F1', 'F3')
    elif kind == term.MUL:
      candidates = ('R2', 'R4', 'R5', 'R8', 'R9', 'R10', 'R11', 'F2')
    elif kind == term.APP:
      candidates = ('R12', 'R13')
    else:
      candidates = ()
    for rule in candidates:
      try:
        rules.rewrite(rule, sub)
      except RuleNotApplicable:
        continue
      result.append((rule, path))
    children = store.children(sub)
    for index in reversed(range(len(children))):
      stack.append((children[index], path + (index,)))
  return result


def rewrite_randomly(store: term.TermStore,
                     root: term.TermId,
                     ctx: RewriteCtx,
                     rng: random.Random,
                     max_steps: Optional[int] = None) -> term.TermId:
  """Rewrites root until no rule applies, picking redexes at random.

  Raises:
    StepBudgetExceeded: After max_steps (default ctx.budget) steps.
  """
  limit = ctx.budget if max_steps is None else max_steps
  for _ in range(limit):
    candidates = redexes(store, ctx, root)
    if not candidates:
      return root
    rule, path = rng.choice(candidates)
    root = apply_rule(store, ctx, rule, path, root)
  raise StepBudgetExceeded('random rewriting exceeded %d steps' % limit)


def read_polynomial(store: term.TermStore, root: term.TermId) -> Polynomial:
  """Reads a term in normal form back as a Polynomial.

  Raises:
    util.InternalError: If an application argument contains an addition.
  """
  field = store.field

  def read_monomial(sub: term.TermId) -> Monomial:
    coef = 1
    counts: Dict[Factor, int] = {}
    for item in _flatten(store, sub, term.MUL):
      node = store.node(item)
      if node[0] == term.CONST:
        coef = field.mul(coef, node[1])
        continue
      if node[0] == term.VAR:
        factor = Factor.var(node[1])
      elif node[0] == term.APP:
        factor = Factor.app(node[1], read_monomial(node[2]))
      else:
        raise util.InternalError('%s is not a monomial' % store.to_str(sub))
      counts[factor] = counts.get(factor, 0) + 1
    return Monomial(coef, counts.items())

  if store.node(root) == (term.CONST, 0):
    return Polynomial()
  return Polynomial(read_monomial(_) for _ in _flatten(store, root, term.ADD))
