"""Term normalization.

`normalize` computes the normal form a term rewrites to under R1-R13 plus
constant folding. It works bottom-up over the term DAG: once a subterm has
been rewritten to a polynomial it is kept as a dict from monomial bodies to
coefficients, so that

  * distribution (R10, R11) is a product of two such dicts,
  * XOR cancellation (R3) and the zero/identity laws (R4-R9) are dict
    updates that drop zero coefficients,
  * affine expansion (R12, R13) turns f(m1 ^ ... ^ mk) into
    f(m1) ^ ... ^ f(mk), adding the affine constant of f when k is even,
  * exponents are reduced on every product with `Field.reduce_exponent`.

Sorting (R1, R2) happens once when the final `Polynomial` is built.
"""
import collections
import logging
from typing import Dict, List, Mapping, Optional, Tuple

from maskeq import util
from maskeq.field import Field
from maskeq.term import core as term
from maskeq.term import poly as poly_lib
from maskeq.term.poly import Factor, Monomial, Polynomial

__all__ = (
    'RewriteCtx',
    'RuleNotApplicable',
    'StepBudgetExceeded',
    'UnknownAffineConstant',
    'normalize',
    'poly_to_term',
    'DEFAULT_STEP_BUDGET',
)

_logger = logging.getLogger().getChild(__name__)

DEFAULT_STEP_BUDGET = 10**7

# Body of a monomial: (factor serial, exponent) pairs sorted by serial.
Body = Tuple[Tuple[int, int], ...]
Poly = Dict[Body, int]


class StepBudgetExceeded(util.SemanticError):
  pass


class UnknownAffineConstant(util.SemanticError):

  def __init__(self, symbol: str):
    super().__init__('affine constant of %s is unknown' % symbol)
    self.symbol = symbol


class RuleNotApplicable(util.SemanticError):
  pass


class RewriteCtx:
  """Everything normalization depends on besides the term.

  Attributes:
    field: The field of the terms.
    consts: Affine constant per symbol; symbols mapped to None, or absent,
        are not known to be affine and block R12/R13.
    budget: Maximum number of single rewriting steps per normalization.
    trace: Whether to log every rule group application at DEBUG level.
    steps: Steps taken by the last normalization.
    stats: Rule group application counts, accumulated over normalizations.
  """

  def __init__(self,
               field: Field,
               consts: Optional[Mapping[str, Optional[int]]] = None,
               budget: int = DEFAULT_STEP_BUDGET,
               trace: bool = False):
    if budget <= 0:
      raise ValueError('step budget must be positive, got %d' % budget)
    self.field = field
    self.consts = dict(consts or {})
    self.budget = budget
    self.trace = trace
    self.steps = 0
    self.stats: Dict[str, int] = collections.Counter()

  def constant(self, symbol: str) -> int:
    value = self.consts.get(symbol)
    if value is None:
      raise UnknownAffineConstant(symbol)
    return value


def normalize(store: term.TermStore, root: term.TermId,
              ctx: RewriteCtx) -> Polynomial:
  """Rewrites root to its normal form.

  Args:
    store: The store root lives in.
    root: The term to normalize.
    ctx: Affine constants, budget, and statistics.

  Returns:
    A Polynomial with strictly descending monomials and factors.

  Raises:
    StepBudgetExceeded: If more than ctx.budget steps are needed.
    UnknownAffineConstant: If R12 or R13 is needed for a symbol without a
        known constant.
  """
  return _Normalizer(store, ctx).run(root)


class _Normalizer:

  def __init__(self, store: term.TermStore, ctx: RewriteCtx):
    self.store = store
    self.ctx = ctx
    self.field = ctx.field
    self.stats = ctx.stats
    self.steps = 0
    self.factors: List[Factor] = []
    self.serials: Dict[tuple, int] = {}
    self.monomials: Dict[Tuple[Body, int], Monomial] = {}
    self.products: Dict[Tuple[Body, Body], Body] = {}

  def step(self, count: int = 1) -> None:
    self.steps += count
    if self.steps > self.ctx.budget:
      raise StepBudgetExceeded('normalization exceeded %d steps' %
                               self.ctx.budget)

  def run(self, root: term.TermId) -> Polynomial:
    store = self.store
    refs = collections.Counter()
    order = list(store.postorder((root,)))
    for sub in order:
      for child in store.children(sub):
        refs[child] += 1
    results: Dict[term.TermId, Poly] = {}
    for sub in order:
      node = store.node(sub)
      op = node[0]
      if op == term.CONST:
        results[sub] = {(): node[1]} if node[1] else {}
      elif op == term.VAR:
        results[sub] = {((self.intern(Factor.var(node[1])), 1),): 1}
      elif op == term.ADD:
        results[sub] = self.add(results, refs, node[1], node[2])
      elif op == term.MUL:
        results[sub] = self.mul(results[node[1]], results[node[2]])
      else:
        results[sub] = self.app(node[1], results[node[2]])
    poly = Polynomial(
        self.monomial(body, coef) for body, coef in results[root].items())
    self.ctx.steps = self.steps
    self.stats['R1/R2'] += len(poly)
    _logger.debug('normalized %d nodes into %d monomials in %d steps',
                  len(order), len(poly), self.steps)
    return poly

  def intern(self, factor: Factor) -> int:
    serial = self.serials.get(factor.key)
    if serial is None:
      serial = self.serials[factor.key] = len(self.factors)
      self.factors.append(factor)
    return serial

  def monomial(self, body: Body, coef: int) -> Monomial:
    monomial = self.monomials.get((body, coef))
    if monomial is None:
      monomial = self.monomials[(body, coef)] = Monomial(
          coef, [(self.factors[s], k) for s, k in body])
    return monomial

  def add(self, results: Dict[term.TermId, Poly], refs: Mapping[int, int],
          left: term.TermId, right: term.TermId) -> Poly:
    lhs, rhs = results[left], results[right]
    owned_lhs = refs[left] == 1 and left != right
    owned_rhs = refs[right] == 1 and left != right
    if owned_lhs and (not owned_rhs or len(lhs) >= len(rhs)):
      acc, other = lhs, rhs
    elif owned_rhs:
      acc, other = rhs, lhs
    elif len(lhs) >= len(rhs):
      acc, other = dict(lhs), rhs
    else:
      acc, other = dict(rhs), lhs
    if not other:
      self.stats['R4-R9'] += 1
    self.merge(acc, other)
    if owned_lhs:
      del results[left]
    if owned_rhs:
      del results[right]
    return acc

  def merge(self, acc: Poly, other: Poly) -> None:
    self.step(len(other))
    for body, coef in other.items():
      value = acc.get(body, 0) ^ coef
      if value:
        if body in acc:
          self.stats['fold'] += 1
        acc[body] = value
      else:
        del acc[body]
        self.stats['R3'] += 1

  def mul_body(self, lhs: Body, rhs: Body) -> Body:
    if not lhs:
      return rhs
    if not rhs:
      return lhs
    body = self.products.get((lhs, rhs))
    if body is None:
      merged = dict(lhs)
      for serial, k in rhs:
        if serial in merged:
          merged[serial] = self.field.reduce_exponent(merged[serial] + k)
        else:
          merged[serial] = k
      body = self.products[(lhs, rhs)] = tuple(sorted(merged.items()))
    return body

  def mul(self, lhs: Poly, rhs: Poly) -> Poly:
    if not lhs or not rhs:
      self.stats['R4-R9'] += 1
      return {}
    if len(lhs) > 1 or len(rhs) > 1:
      self.stats['R10/R11'] += 1
      if self.ctx.trace:
        _logger.debug('R10/R11: %d x %d monomials', len(lhs), len(rhs))
    self.step(len(lhs) * len(rhs))
    mul = self.field.mul
    result: Poly = {}
    for lbody, lcoef in lhs.items():
      for rbody, rcoef in rhs.items():
        body = self.mul_body(lbody, rbody)
        coef = mul(lcoef, rcoef)
        value = result.get(body, 0) ^ coef
        if value:
          result[body] = value
        else:
          del result[body]
          self.stats['R3'] += 1
    return result

  def app(self, symbol: str, arg: Poly) -> Poly:
    if not arg:
      self.stats['R13'] += 1
      if self.ctx.trace:
        _logger.debug('R13: %s(0)', symbol)
      value = self.ctx.constant(symbol)
      return {(): value} if value else {}
    if len(arg) == 1:
      (body, coef), = arg.items()
      self.step()
      return {((self.app_factor(symbol, body, coef), 1),): 1}
    const = self.ctx.constant(symbol) if len(arg) % 2 == 0 else 0
    if len(arg) % 2 == 1 and self.ctx.consts.get(symbol) is None:
      raise UnknownAffineConstant(symbol)
    self.stats['R12'] += 1
    if self.ctx.trace:
      _logger.debug('R12: %s over %d monomials', symbol, len(arg))
    self.step(len(arg))
    result: Poly = {}
    for body, coef in arg.items():
      result[((self.app_factor(symbol, body, coef), 1),)] = 1
    if const:
      result[()] = const
    return result

  def app_factor(self, symbol: str, body: Body, coef: int) -> int:
    return self.intern(Factor.app(symbol, self.monomial(body, coef)))


def monomial_to_term(store: term.TermStore, monomial: Monomial) -> term.TermId:
  """Right-associated product of the expanded factors."""
  factors = []
  for factor, k in monomial.powers:
    factors.extend([factor_to_term(store, factor)] * k)
  if monomial.coef != 1 or not factors:
    factors.append(store.mk_const(monomial.coef))
  result = factors[-1]
  for factor in reversed(factors[:-1]):
    result = store.mk_mul(factor, result)
  return result


def factor_to_term(store: term.TermStore, factor: Factor) -> term.TermId:
  if factor.kind == poly_lib.CONST:
    return store.mk_const(factor.value)
  if factor.kind == poly_lib.VAR:
    return store.mk_var(factor.name)
  return store.mk_app(factor.name, monomial_to_term(store, factor.arg))


def poly_to_term(store: term.TermStore, poly: Polynomial) -> term.TermId:
  """Right-associated XOR of the monomials; the empty polynomial is 0."""
  if poly.is_zero:
    return store.zero
  monomials = [monomial_to_term(store, _) for _ in poly.monomials]
  result = monomials[-1]
  for monomial in reversed(monomials[:-1]):
    result = store.mk_add(monomial, result)
  return result
