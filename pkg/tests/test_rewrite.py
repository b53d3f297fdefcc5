import random
import unittest

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from maskeq.field import Field
from maskeq.oracle import (OracleConfig, exhaustive_check_zero,
                           sample_check_zero)
from maskeq.rewrite import (RewriteCtx, RuleNotApplicable, StepBudgetExceeded,
                            UnknownAffineConstant, apply_rule, normalize,
                            poly_to_term, read_polynomial, redexes,
                            rewrite_randomly)
from maskeq.term import Polynomial, TermStore, check_shape
from tests.strategies import AES, GF16, build, random_tree, term_trees

# Affine tables over GF(2^4) consistent with CONSTS.
CONSTS = {'f': 3, 'g': 0}
TABLES = {
    'f': [GF16.mul(5, _) ^ 3 for _ in range(16)],
    'g': [GF16.mul(_, _) for _ in range(16)],
}


class _Builder:
  """Shorthands for building fixture terms."""

  def __init__(self, field: Field = AES):
    self.store = TermStore(field)

  def var(self, name):
    return self.store.mk_var(name)

  def const(self, value):
    return self.store.mk_const(value)

  def add(self, *terms):
    return self.store.mk_xor(list(terms))

  def mul(self, *terms):
    result = terms[0]
    for term in terms[1:]:
      result = self.store.mk_mul(result, term)
    return result

  def app(self, symbol, arg):
    return self.store.mk_app(symbol, arg)


class TestNormalize(unittest.TestCase):

  def setUp(self):
    self.b = _Builder()
    self.x = self.b.var('x')
    self.y = self.b.var('y')

  def normalize(self, term, consts=None, budget=10**6):
    return normalize(self.b.store, term, RewriteCtx(AES, consts, budget))

  def test_zero_law(self):
    b, x, y = self.b, self.x, self.y
    xy = b.add(x, y)
    term = b.add(b.mul(xy, xy), b.mul(x, x), b.mul(y, y))
    self.assertTrue(self.normalize(term).is_zero)

  def test_nested_affine(self):
    b, x, y = self.b, self.x, self.y
    term = b.add(b.app('exp2', b.app('exp2', b.add(x, y))),
                 b.app('exp2', b.app('exp2', x)),
                 b.app('exp2', b.app('exp2', y)))
    self.assertTrue(self.normalize(term, {'exp2': 0}).is_zero)

  def test_sec_mult(self):
    b = self.b
    a0, a1, b0, b1, r0 = map(b.var, ('a0', 'a1', 'b0', 'b1', 'r0'))
    c0 = b.add(b.mul(a0, b0), r0)
    r1 = b.add(b.add(r0, b.mul(a0, b1)), b.mul(a1, b0))
    c1 = b.add(b.mul(a1, b1), r1)
    term = b.add(b.mul(b.add(a0, a1), b.add(b0, b1)), c0, c1)
    self.assertTrue(self.normalize(term).is_zero)

  def test_identities(self):
    b, x = self.b, self.x
    self.assertEqual(str(self.normalize(b.add(x, b.const(0)))), 'x')
    self.assertEqual(str(self.normalize(b.mul(b.const(1), x))), 'x')
    self.assertTrue(self.normalize(b.mul(x, b.const(0))).is_zero)
    self.assertTrue(self.normalize(b.add(x, x)).is_zero)

  def test_descending_order(self):
    b, x, y = self.b, self.x, self.y
    term = b.add(b.const(1), x, b.mul(x, y), b.app('f', x), b.mul(x, x))
    self.assertEqual(str(self.normalize(term, {'f': 0})),
                     'f(x) ^ y * x ^ x^2 ^ x ^ 1')

  def test_constant_folding(self):
    b, x = self.b, self.x
    term = b.add(b.mul(b.const(3), x), b.mul(x, b.const(5)))
    self.assertEqual(str(self.normalize(term)), 'x * 6')
    term = b.mul(b.const(0x57), b.const(0x83))
    self.assertEqual(self.normalize(term).constant, 0xC1)

  def test_exponent_reduction(self):
    b = _Builder(Field(2, 0x7))
    x = b.var('x')
    term = b.mul(x, x, x, x)
    poly = normalize(b.store, term, RewriteCtx(b.store.field))
    self.assertEqual(str(poly), 'x')

  def test_affine_constants(self):
    b, x, y = self.b, self.x, self.y
    z = b.var('z')
    self.assertEqual(self.normalize(b.app('f', b.const(0)), {'f': 99}).constant,
                     99)
    even = self.normalize(b.app('f', b.add(x, y)), {'f': 99})
    self.assertEqual(str(even), 'f(y) ^ f(x) ^ 0x63')
    odd = self.normalize(b.app('f', b.add(x, y, z)), {'f': 99})
    self.assertEqual(str(odd), 'f(z) ^ f(y) ^ f(x)')

  def test_single_monomial_argument_needs_no_constant(self):
    b, x, y = self.b, self.x, self.y
    poly = self.normalize(b.app('f', b.mul(x, y)))
    self.assertEqual(str(poly), 'f(y * x)')
    self.assertEqual(poly.symbols(), ('f',))

  def test_unknown_constant(self):
    b = self.b
    with self.assertRaises(UnknownAffineConstant) as ctx:
      self.normalize(b.app('f', b.add(self.x, self.y)), {'f': None})
    self.assertEqual(ctx.exception.symbol, 'f')
    with self.assertRaises(UnknownAffineConstant):
      self.normalize(b.app('g', b.add(self.x, self.y, b.var('z'))))

  def test_budget(self):
    b, x, y = self.b, self.x, self.y
    xy = b.add(x, y)
    with self.assertRaises(StepBudgetExceeded):
      self.normalize(b.mul(xy, xy, xy), budget=3)
    with self.assertRaises(ValueError):
      RewriteCtx(AES, budget=0)

  def test_stats(self):
    b, x, y = self.b, self.x, self.y
    ctx = RewriteCtx(AES, {'f': 0})
    normalize(b.store, b.app('f', b.add(x, y)), ctx)
    normalize(b.store, b.mul(b.add(x, y), x), ctx)
    self.assertEqual(ctx.stats['R12'], 1)
    self.assertEqual(ctx.stats['R10/R11'], 1)
    self.assertGreater(ctx.steps, 0)

  def test_poly_to_term(self):
    b, x, y = self.b, self.x, self.y
    store = b.store
    self.assertEqual(poly_to_term(store, Polynomial()), store.zero)
    poly = self.normalize(b.add(b.mul(x, y), b.const(1)))
    term = poly_to_term(store, poly)
    self.assertEqual(store.to_str(term), 'y * x ^ 1')
    self.assertEqual(read_polynomial(store, term), poly)


class TestRules(unittest.TestCase):

  def setUp(self):
    self.b = _Builder()
    self.store = self.b.store
    self.ctx = RewriteCtx(AES, {'f': 99})
    self.x = self.b.var('x')
    self.y = self.b.var('y')

  def rewrite(self, rule, term, path=()):
    return self.store.to_str(apply_rule(self.store, self.ctx, rule, path, term))

  def test_r13(self):
    self.assertEqual(self.rewrite('R13', self.b.app('f', self.b.const(0))),
                     '0x63')

  def test_r12(self):
    term = self.b.app('f', self.b.add(self.x, self.y))
    self.assertEqual(self.rewrite('R12', term), 'f(x) ^ f(y) ^ 0x63')

  def test_r3(self):
    term = self.b.add(self.x, self.x)
    self.assertEqual(self.rewrite('R3', term), '0')

  def test_distribution(self):
    b, x, y = self.b, self.x, self.y
    z = b.var('z')
    self.assertEqual(self.rewrite('R10', b.mul(b.add(x, y), z)),
                     'x * z ^ y * z')
    self.assertEqual(self.rewrite('R11', b.mul(z, b.add(x, y))),
                     'z * x ^ z * y')

  def test_sorting(self):
    b, x, y = self.b, self.x, self.y
    self.assertEqual(self.rewrite('R2', b.mul(x, y)), 'y * x')
    self.assertEqual(self.rewrite('R1', b.add(x, b.mul(x, y))), 'x * y ^ x')

  def test_identities(self):
    b, x = self.b, self.x
    zero, one = b.const(0), b.const(1)
    self.assertEqual(self.rewrite('R4', b.mul(x, zero)), '0')
    self.assertEqual(self.rewrite('R5', b.mul(zero, x)), '0')
    self.assertEqual(self.rewrite('R6', b.add(x, zero)), 'x')
    self.assertEqual(self.rewrite('R7', b.add(zero, x)), 'x')
    self.assertEqual(self.rewrite('R8', b.mul(x, one)), 'x')
    self.assertEqual(self.rewrite('R9', b.mul(one, x)), 'x')

  def test_folding(self):
    b, x = self.b, self.x
    self.assertEqual(self.rewrite('F1', b.add(b.const(3), b.const(5))), '6')
    self.assertEqual(self.rewrite('F2', b.mul(b.const(2), b.const(2))), '4')
    term = b.add(b.mul(x, b.const(3)), b.mul(x, b.const(5)))
    self.assertEqual(self.rewrite('F3', term), 'x * 6')

  def test_position(self):
    b, x = self.b, self.x
    term = b.mul(x, b.add(x, b.const(0)))
    self.assertEqual(self.rewrite('R6', term, (1,)), 'x * x')
    with self.assertRaises(RuleNotApplicable):
      apply_rule(self.store, self.ctx, 'R6', (2,), term)

  def test_not_applicable(self):
    with self.assertRaises(RuleNotApplicable):
      self.rewrite('R13', self.b.app('f', self.x))
    with self.assertRaises(RuleNotApplicable):
      self.rewrite('R12', self.b.app('g', self.b.add(self.x, self.y)))
    with self.assertRaises(RuleNotApplicable):
      self.rewrite('R42', self.x)

  def test_redexes(self):
    b, x = self.b, self.x
    term = b.add(b.mul(x, b.const(1)), b.const(0))
    self.assertEqual(redexes(self.store, self.ctx, term), [('R6', ()),
                                                           ('R8', (0,))])


class TestProperties(unittest.TestCase):

  def assertSameFunction(self, store, term, other):
    """Asserts term ^ other is zero, exhaustively for up to three variables."""
    diff = store.mk_add(term, other)
    variables = store.variables(diff)
    tables = {name: np.array(table) for name, table in TABLES.items()}
    if len(variables) <= 3:
      result = exhaustive_check_zero(store, diff, variables, tables)
    else:
      result = sample_check_zero(store, diff, variables, tables,
                                 OracleConfig(trials=64))
    self.assertTrue(result.zero, msg='%s at %s' % (store.to_str(term),
                                                   result.witness))

  def test_random_terms(self):
    rng = random.Random(0x5EED)
    for _ in range(10**4):
      store = TermStore(GF16)
      term = build(store, random_tree(rng, rng.randint(1, 60)))
      ctx = RewriteCtx(GF16, CONSTS)
      poly = normalize(store, term, ctx)
      self.assertTrue(check_shape(poly, GF16))
      normal = poly_to_term(store, poly)
      self.assertEqual(normalize(store, normal, ctx), poly)
      self.assertSameFunction(store, term, normal)

  @settings(max_examples=500, deadline=None)
  @given(
      term_trees(variables=('w', 'x', 'y', 'z'),
                 symbols=('f', 'g'),
                 constants=(0, 1, 2, 7),
                 max_leaves=16))
  def test_normal_forms(self, tree):
    store = TermStore(GF16)
    term = build(store, tree)
    ctx = RewriteCtx(GF16, CONSTS, budget=10**5)
    poly = normalize(store, term, ctx)
    self.assertTrue(check_shape(poly, GF16))
    again = normalize(store, poly_to_term(store, poly), ctx)
    self.assertEqual(again, poly)
    self.assertSameFunction(store, term, poly_to_term(store, poly))

  @settings(max_examples=1000, deadline=None)
  @given(term_trees(symbols=('f', 'g'), constants=(0, 1), max_leaves=6),
         st.integers(0, 2**32 - 1))
  def test_random_rule_order(self, tree, seed):
    store = TermStore(GF16)
    term = build(store, tree)
    ctx = RewriteCtx(GF16, {'f': 1, 'g': 0}, budget=10**4)
    expected = poly_to_term(store, normalize(store, term, ctx))
    result = rewrite_randomly(store, term, ctx, random.Random(seed))
    self.assertEqual(store.to_str(result), store.to_str(expected))

  @settings(deadline=None)
  @given(term_trees(symbols=('f', 'g'), constants=(0, 1, 2, 7), max_leaves=6),
         st.integers(0, 2**32 - 1),
         st.lists(st.integers(0, 15), min_size=3, max_size=3))
  def test_single_steps_preserve_values(self, tree, seed, values):
    store = TermStore(GF16)
    term = build(store, tree)
    ctx = RewriteCtx(GF16, CONSTS)
    env = dict(zip(('x', 'y', 'z'), values))
    expected = store.eval(term, env, TABLES)
    rng = random.Random(seed)
    for _ in range(20):
      candidates = redexes(store, ctx, term)
      if not candidates:
        break
      rule, path = rng.choice(candidates)
      term = apply_rule(store, ctx, rule, path, term)
      self.assertEqual(store.eval(term, env, TABLES), expected)


if __name__ == '__main__':
  unittest.main()
