import os
import tempfile
import unittest

import numpy as np

from maskeq import util
from maskeq.affine import (AffineKind, aff_const_all, affine_consts,
                           check_affine_table, inline_symbol,
                           masked_affine_holds, table_of, tables_of)
from maskeq.cli import CORPUS_DIR, TABLE1
from maskeq.field import Field
from maskeq.lang import parse, parse_units, preprocess
from maskeq.term import TermStore
from tests.strategies import AES, GF16


def _table1():
  with open(os.path.join(CORPUS_DIR, 'table1.msl')) as f:
    programs = parse_units(f.read(), filename='table1.msl')
  return [preprocess(_) for _ in programs]


class TestTable1(unittest.TestCase):

  @classmethod
  def setUpClass(cls):
    cls.results = {}
    for program in _table1():
      cls.results.update(aff_const_all(program))

  def test_constants(self):
    self.assertEqual(set(self.results), set(TABLE1))
    for name, expected in TABLE1.items():
      with self.subTest(name):
        result = self.results[name]
        if expected is None:
          self.assertEqual(result.kind, AffineKind.NOT_AFFINE)
        else:
          self.assertEqual(result.kind, AffineKind.CONSTANT)
          self.assertEqual(result.constant, expected)

  def test_methods(self):
    for name in ('exp2', 'exp4', 'exp8', 'exp16', 'af', 'f2', 'f4', 'L1',
                 'L3', 'L5', 'L7'):
      with self.subTest(name):
        self.assertEqual(self.results[name].method, 'trs')
        self.assertEqual(self.results[name].oracle_calls, 0)
    for name in ('rotl1', 'rotl2', 'rotl3', 'rotl4'):
      self.assertEqual(self.results[name].method, 'table')
    self.assertEqual(self.results['f1'].method, 'testing')

  def test_witnesses(self):
    field = AES
    program = _table1()[0]
    for name in ('f1', 'f3'):
      table = table_of(program, program.get_affine(name))
      (x0, y0), (x1, y1) = self.results[name].witness
      tau = lambda x, y: int(table[x ^ y] ^ table[x] ^ table[y])
      self.assertNotEqual(tau(x0, y0), tau(x1, y1))
      self.assertLess(max(x0, y0, x1, y1), field.size)

  def test_order(self):
    program = _table1()[1]
    self.assertEqual(list(aff_const_all(program)), ['L1', 'L3', 'L5', 'L7'])

  def test_str(self):
    self.assertEqual(str(self.results['af']), '99')
    self.assertTrue(str(self.results['f1']).startswith('NOT-AFFINE'))


class TestAffConstAll(unittest.TestCase):

  def test_declared_only(self):
    program = preprocess(
        parse('affine g;\naffine f(x) -> y { y <- g(x) ^ g(x * x) ^ 5; }'))
    with self.assertWarns(util.SemanticWarn):
      results = aff_const_all(program)
    self.assertEqual(results['g'].kind, AffineKind.ASSUMED_LINEAR)
    self.assertEqual(results['g'].constant, 0)
    self.assertEqual(results['f'].kind, AffineKind.CONSTANT)
    self.assertEqual(results['f'].constant, 5)
    self.assertEqual(affine_consts(results), {'g': 0, 'f': 5})

  def test_inlines_non_affine_callee(self):
    # cube is not affine, yet cube(x) ^ x * x * x is.
    program = preprocess(
        parse('''
      affine cube(x) -> y { y <- x * x * x; }
      affine f(x) -> y { y <- cube(x) ^ x * x * x ^ x * x ^ 3; }
    '''))
    results = aff_const_all(program)
    self.assertEqual(results['cube'].kind, AffineKind.NOT_AFFINE)
    self.assertEqual(results['f'].kind, AffineKind.CONSTANT)
    self.assertEqual(results['f'].constant, 3)
    self.assertEqual(results['f'].method, 'trs')

  def test_unknown(self):
    program = preprocess(
        parse('affine g;\naffine f(x) -> y { y <- g(x * x * x) ^ x; }'))
    with tempfile.TemporaryDirectory() as smt_dir:
      with self.assertWarns(util.SemanticWarn):
        results = aff_const_all(program, smt_dir=smt_dir)
      self.assertEqual(results['f'].kind, AffineKind.UNKNOWN)
      self.assertIsNotNone(results['f'].residual)
      self.assertEqual(os.listdir(smt_dir), ['affine_f.smt2'])
    self.assertNotIn('f', affine_consts(results))

  def test_unknown_creates_smt_dir(self):
    program = preprocess(
        parse('affine g;\naffine f(x) -> y { y <- g(x * x * x); }'))
    with tempfile.TemporaryDirectory() as tmp:
      smt_dir = os.path.join(tmp, 'smt', 'affine')
      with self.assertWarns(util.SemanticWarn):
        results = aff_const_all(program, smt_dir=smt_dir)
      self.assertEqual(results['f'].kind, AffineKind.UNKNOWN)
      self.assertEqual(os.listdir(smt_dir), ['affine_f.smt2'])

  def test_opaque_not_affine(self):
    program = preprocess(
        parse('affine f(x) -> y { y <- and(x, 3) ^ shl(x, 9); }\n'
              'affine g(x) -> y { y <- and(x, 1) * x; }'))
    results = aff_const_all(program)
    self.assertEqual(results['f'].kind, AffineKind.CONSTANT)
    self.assertEqual(results['f'].constant, 0)
    self.assertEqual(results['g'].kind, AffineKind.NOT_AFFINE)

  def test_tables_of(self):
    program = parse('affine g;\naffine f(x) -> y { y <- x * x; }'
                    '\naffine h(x) -> y { y <- g(x); }')
    self.assertEqual(set(tables_of(program)), {'f'})


class TestTables(unittest.TestCase):

  def test_check_affine_table(self):
    xs = np.arange(16)
    linear = GF16.mul_array(xs, xs) ^ GF16.mul_array(xs, 7)
    result = check_affine_table(GF16, linear ^ 9, 'f')
    self.assertEqual((result.kind, result.constant), (AffineKind.CONSTANT, 9))
    cube = GF16.mul_array(GF16.mul_array(xs, xs), xs)
    result = check_affine_table(GF16, cube, 'g')
    self.assertEqual(result.kind, AffineKind.NOT_AFFINE)
    (_, _), (x, y) = result.witness
    self.assertNotEqual(cube[x ^ y] ^ cube[x] ^ cube[y], cube[0])

  def test_check_wide_table(self):
    field = Field(12, 0x1053)
    xs = np.arange(field.size)
    square = field.mul_array(xs, xs)
    self.assertEqual(check_affine_table(field, square ^ 5).constant, 5)
    bumped = square.copy()
    bumped[3] ^= 1
    result = check_affine_table(field, bumped)
    self.assertEqual(result.kind, AffineKind.NOT_AFFINE)
    (_, _), (x, y) = result.witness
    self.assertNotEqual(bumped[x ^ y] ^ bumped[x] ^ bumped[y], bumped[0])

  def test_masked_affine_holds(self):
    xs = np.arange(256)
    table = AES.mul_array(xs, xs) ^ 0x63
    rng = np.random.default_rng(1)
    for order in range(5):
      with self.subTest(order=order):
        self.assertTrue(masked_affine_holds(AES, table, 0x63, order, rng))
    self.assertFalse(masked_affine_holds(AES, table, 0, 1, rng))
    self.assertFalse(masked_affine_holds(AES, table, 0x62, 3, rng))
    self.assertTrue(masked_affine_holds(AES, table, 0, 2, rng))

  def test_inline_symbol(self):
    store = TermStore(GF16)
    x, y = store.mk_var('x'), store.mk_var('y')
    body = store.mk_add(store.mk_mul(x, x), store.one)
    root = store.mk_mul(store.mk_app('f', y), store.mk_app('g', y))
    result = inline_symbol(store, root, 'f', 'x', body)
    self.assertEqual(store.to_str(result), '(y * y ^ 1) * g(y)')


if __name__ == '__main__':
  unittest.main()
