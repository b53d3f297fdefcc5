import functools
import itertools
import os
import random
import re
import unittest

from maskeq.backend import GadgetSpec, generate
from maskeq.field import Field
from maskeq.lang import parse, preprocess
from maskeq.oracle.interp import Interpreter
from maskeq.oracle.smtlib import (bvconst, bvsort, emit_affine,
                                  emit_equivalence, gf_mul_defs, sexpr)
from maskeq.verify import build_task
from tests.strategies import GF16
from tests.test_lang import SEC_MULT

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), 'golden')

_TOKEN = re.compile(r'\(|\)|[^\s()]+')


def read_sexprs(text):
  """Parses every s-expression of text into nested lists of atoms."""
  stack = [[]]
  for token in _TOKEN.findall(re.sub(r';[^\n]*', '', text)):
    if token == '(':
      stack.append([])
    elif token == ')':
      done = stack.pop()
      stack[-1].append(done)
    else:
      stack[-1].append(token)
  return stack[0]


class BvEvaluator:
  """Evaluates the bit-vector fragment the emitter writes."""

  def __init__(self, width, commands):
    self.mask = (1 << width) - 1
    self.width = width
    self.funcs = {}
    for command in commands:
      if command[0] == 'define-fun':
        _, name, params, _, body = command
        self.funcs[name] = ([_[0] for _ in params], body)

  def call(self, name, *args):
    params, body = self.funcs[name]
    return self.eval(body, dict(zip(params, args)))

  def eval(self, expr, env):
    if isinstance(expr, str):
      if expr in env:
        return env[expr]
      if expr.startswith('#b'):
        return int(expr[2:], 2)
      raise KeyError(expr)
    head = expr[0]
    args = expr[1:]
    if head == '_':
      return int(args[0][2:])
    if isinstance(head, list):
      value = self.eval(args[0], env)
      if head[1] == 'extract':
        return (value >> int(head[3])) & ((1 << (int(head[2]) - int(head[3]) +
                                                  1)) - 1)
      shift = int(head[2]) % self.width
      if head[1] == 'rotate_right':
        shift = (self.width - shift) % self.width
      return ((value << shift) | (value >> (self.width - shift))) & self.mask
    if head == 'let':
      inner = dict(env)
      for name, value in args[0]:
        inner[name] = self.eval(value, env)
      return self.eval(args[1], inner)
    if head == 'ite':
      return self.eval(args[1] if self.eval(args[0], env) else args[2], env)
    values = [self.eval(_, env) for _ in args]
    if head == '=':
      return values[0] == values[1]
    if head == 'not':
      return not values[0]
    if head == 'bvxor':
      return functools.reduce(lambda a, b: a ^ b, values)
    if head == 'bvshl':
      return (values[0] << values[1]) & self.mask
    if head == 'bvnot':
      return ~values[0] & self.mask
    return self.call(head, *values)


def _assertion(commands):
  for command in commands:
    if command[0] == 'assert':
      return command[1]
  raise AssertionError('no assertion')


class TestBasics(unittest.TestCase):

  def test_helpers(self):
    self.assertEqual(sexpr(['bvxor', 'a', 'b']), '(bvxor a b)')
    self.assertEqual(bvsort(8), '(_ BitVec 8)')
    self.assertEqual(bvconst(99, 8), '(_ bv99 8)')

  def test_gf_mul(self):
    for field in (Field(1, 0x3), Field(3, 0xB), GF16):
      evaluator = BvEvaluator(field.width,
                              read_sexprs('\n'.join(gf_mul_defs(field))))
      for a, b in itertools.product(range(field.size), repeat=2):
        self.assertEqual(evaluator.call('gf_mul', a, b), field.mul(a, b),
                         '%s: %d * %d' % (field, a, b))

  def test_gf_mul_aes_samples(self):
    field = Field()
    evaluator = BvEvaluator(8, read_sexprs('\n'.join(gf_mul_defs(field))))
    self.assertEqual(evaluator.call('gf_mul', 0x57, 0x83), 0xC1)
    self.assertEqual(evaluator.call('gf_mul', 0x57, 0x13), 0xFE)
    self.assertEqual(evaluator.call('gf_xtime', 0x80), 0x1B)


class TestEquivalence(unittest.TestCase):

  def setUp(self):
    self.program = preprocess(parse(SEC_MULT, GF16))
    self.task = build_task(self.program, self.program.get_proc('sec_mult'))

  def emit(self):
    return emit_equivalence(self.task.store, self.task.raw, self.program,
                            'sec_mult')

  def test_layout(self):
    text = self.emit()
    self.assertEqual(text, self.emit())
    lines = text.splitlines()
    self.assertEqual(lines[:4], [
        '; sec_mult', '; field GF(2^4)/0x13', '(set-info :smt-lib-version 2.6)',
        '(set-logic QF_BV)'
    ])
    self.assertEqual(lines[-3:], ['(check-sat)', '(get-model)', '(exit)'])
    for name in ('a0', 'a1', 'b0', 'b1', 'r0'):
      self.assertIn('(declare-fun %s () (_ BitVec 4))' % name, lines)
    self.assertIn('t!0', text)

  def test_term_matches_store(self):
    commands = read_sexprs(self.emit())
    evaluator = BvEvaluator(4, commands)
    assertion = _assertion(commands)
    self.assertEqual(assertion[0], 'not')
    term = assertion[1][1]
    store = self.task.store
    rng = random.Random(5)
    for _ in range(50):
      env = {
          name: rng.randrange(16)
          for name in ('a0', 'a1', 'b0', 'b1', 'r0')
      }
      self.assertEqual(evaluator.eval(term, env),
                       store.eval(self.task.raw, env, {}))

  def test_uninterpreted_symbols(self):
    program = preprocess(
        parse('affine g;\nproc p(x) -> y { y <- g(x); shares 1; '
              'y0 <- g(x0 ^ 1); }'))
    task = build_task(program, program.get_proc('p'))
    text = emit_equivalence(task.store, task.raw, program)
    self.assertIn('(set-logic UFBV)', text)
    self.assertIn('(declare-fun g ((_ BitVec 8)) (_ BitVec 8))', text)
    self.assertIn('; equivalence', text)


class TestAffine(unittest.TestCase):

  def test_definitions(self):
    program = preprocess(
        parse('''
      field 4 0x13;
      affine sq(x) -> y { y <- x * x; }
      affine f(x) -> y { t <- sq(x); y <- rotl(t, 1) ^ not(x) ^ 3; }
    '''))
    text = emit_affine(program, program.get_affine('f'))
    self.assertIn('(set-logic BV)', text)
    self.assertIn('(declare-fun c! () (_ BitVec 4))', text)
    self.assertTrue(text.endswith('(check-sat)\n(get-value (c!))\n(exit)\n'))
    self.assertLess(text.index('define-fun sq'), text.index('define-fun f'))
    evaluator = BvEvaluator(4, read_sexprs(text))
    table = Interpreter(program).table_of('f')
    self.assertEqual([evaluator.call('f', _) for _ in range(16)],
                     table.tolist())

  def test_title(self):
    program = preprocess(parse('affine f(x) -> y { y <- x; }'))
    text = emit_affine(program, program.get_affine('f'), 'custom')
    self.assertTrue(text.startswith('; custom\n'))
    text = emit_affine(program, program.get_affine('f'))
    self.assertTrue(text.startswith('; affine constant of f\n'))


class TestGolden(unittest.TestCase):

  def assertGolden(self, name, text):
    with open(os.path.join(GOLDEN_DIR, name)) as f:
      self.assertEqual(text, f.read())

  def test_isw1_equivalence(self):
    program = preprocess(parse(generate(GadgetSpec('isw-mult', 1))))
    task = build_task(program, program.get_proc('sec_mult'))
    text = emit_equivalence(task.store, task.raw, program, 'sec_mult')
    self.assertGolden('isw1_aes.smt2', text)
    commands = read_sexprs(text)
    evaluator = BvEvaluator(8, commands)
    tau = _assertion(commands)[1][1]
    rng = random.Random(1)
    for _ in range(20):
      env = {
          name: rng.randrange(256)
          for name in ('a0', 'a1', 'b0', 'b1', 'r0_1')
      }
      self.assertEqual(evaluator.eval(tau, env), 0)

  def test_affine_over_declared_symbol(self):
    program = preprocess(
        parse('field 4 0x13;\naffine g;\n'
              'affine f(x) -> y { y <- g(x) ^ x * x ^ 3; }'))
    self.assertGolden('affine_f.smt2',
                      emit_affine(program, program.get_affine('f')))


if __name__ == '__main__':
  unittest.main()
