import unittest

from maskeq import util
from maskeq.lang import core, parse, preprocess
from maskeq.rewrite import RewriteCtx, normalize
from maskeq.symexec import (SymState, exec_affine, exec_masked, exec_origin,
                            xor_fold)
from maskeq.term import TermStore
from tests.test_lang import SEC_MULT


class TestSymExec(unittest.TestCase):

  def setUp(self):
    self.program = preprocess(parse(SEC_MULT))
    self.proc = self.program.get_proc('sec_mult')
    self.store = TermStore(self.program.field)

  def test_origin(self):
    term = exec_origin(self.store, self.proc)
    self.assertEqual(self.store.to_str(term), 'a * b')

  def test_masked(self):
    store = self.store
    state = SymState(store, ('a0', 'a1', 'b0', 'b1'))
    c0, c1 = exec_masked(store, self.proc, state)
    self.assertEqual(store.to_str(c0), 'a0 * b0 ^ r0')
    self.assertEqual(store.to_str(c1), 'a1 * b1 ^ r0 ^ a0 * b1 ^ a1 * b0')
    self.assertEqual(state.randoms, ['r0'])
    self.assertEqual(store.variables(c1),
                     ('a0', 'a1', 'b0', 'b1', 'r0'))

  def test_shares_fold_to_origin(self):
    store = self.store
    tau = store.mk_add(exec_origin(store, self.proc),
                       xor_fold(store, exec_masked(store, self.proc)))
    poly = normalize(store, tau, RewriteCtx(self.program.field))
    self.assertTrue(poly.is_zero)

  def test_sharing_is_kept(self):
    store = self.store
    c0, _ = exec_masked(store, self.proc)
    r0 = store.mk_var('r0')
    self.assertIn(r0, store.children(c0))
    self.assertEqual(store.size(c0), 5)

  def test_affine(self):
    program = parse('''
      affine f(x) -> y { t <- x * x; y <- t * t ^ 1; }
      affine g(x) -> y { y <- rotl(x, 1); }
    ''')
    store = TermStore(program.field)
    term = exec_affine(store, program.get_affine('f'))
    self.assertEqual(store.to_str(term), 'x * x * x * x ^ 1')
    with self.assertRaises(util.InternalError):
      exec_affine(store, program.get_affine('g'))

  def test_affine_constant(self):
    program = preprocess(
        parse('''
      affine f(x) -> y { y <- x * x ^ 1; }
      proc p(x) -> y { y <- f(x); shares 2; y <- f(x); }
    '''))
    store = TermStore(program.field)
    y0, y1 = exec_masked(store, program.get_proc('p'))
    self.assertEqual(store.to_str(y0), 'f(x0) ^ f(0)')
    self.assertEqual(store.to_str(y1), 'f(x1)')

  def test_errors(self):
    store = self.store
    state = SymState(store, ('x',))
    with self.assertRaises(util.SemanticError):
      state.expr(core.Var(name='z'), 'p')
    rand = core.Rand(target=core.Var(name='r'))
    state.run([rand], 'p')
    with self.assertRaises(util.SemanticError):
      state.run([rand], 'p')
    with self.assertRaises(util.SemanticError):
      state.output('y', 'p')
    loop = core.For(var='i', lo=core.Index(base=0, offset=0),
                    hi=core.Index(base=1, offset=0), body=[])
    with self.assertRaises(util.InternalError):
      state.run([loop], 'p')
    with self.assertRaises(util.InternalError):
      xor_fold(store, ())


if __name__ == '__main__':
  unittest.main()
