"""Hypothesis strategies shared by the tests."""
from hypothesis import strategies as st

from maskeq.field import Field
from maskeq.term.core import TermStore

FIELDS = (Field(1, 0x3), Field(2, 0x7), Field(3, 0xB), Field(4, 0x13),
          Field(8, 0x11B))
GF16 = Field(4, 0x13)
AES = Field(8, 0x11B)

fields = st.sampled_from(FIELDS)


@st.composite
def field_elements(draw, field: Field = AES, count: int = 1):
  values = [draw(st.integers(0, field.mask)) for _ in range(count)]
  return values[0] if count == 1 else tuple(values)


def term_trees(variables=('x', 'y', 'z'),
               symbols=('f',),
               constants=(0, 1),
               max_leaves: int = 8):
  """Nested tuples describing terms.

  Leaves are ('c', value) and ('v', name); inner nodes are ('+', l, r),
  ('*', l, r), and ('f', symbol, arg).
  """
  leaves = st.one_of(
      st.sampled_from(constants).map(lambda _: ('c', _)),
      st.sampled_from(variables).map(lambda _: ('v', _)))

  def extend(children):
    branches = [
        st.tuples(st.just('+'), children, children),
        st.tuples(st.just('*'), children, children),
    ]
    if symbols:
      branches.append(
          st.tuples(st.just('f'), st.sampled_from(symbols), children))
    return st.one_of(*branches)

  return st.recursive(leaves, extend, max_leaves=max_leaves)


def build(store: TermStore, tree) -> int:
  """Interns a tree drawn from term_trees."""
  op = tree[0]
  if op == 'c':
    return store.mk_const(tree[1])
  if op == 'v':
    return store.mk_var(tree[1])
  if op == '+':
    return store.mk_add(build(store, tree[1]), build(store, tree[2]))
  if op == '*':
    return store.mk_mul(build(store, tree[1]), build(store, tree[2]))
  return store.mk_app(tree[1], build(store, tree[2]))


def random_tree(rng,
                size: int,
                variables=('w', 'x', 'y', 'z'),
                symbols=('f', 'g'),
                constants=(0, 1, 2, 7)):
  """A tree like those of term_trees with at most size nodes, drawn from rng."""
  if size <= 2 or rng.random() < 0.15:
    if rng.random() < 0.3:
      return ('c', rng.choice(constants))
    return ('v', rng.choice(variables))
  roll = rng.random()
  if symbols and roll < 0.2:
    return ('f', rng.choice(symbols),
            random_tree(rng, size - 1, variables, symbols, constants))
  left = rng.randint(1, size - 2)
  return ('+' if roll < 0.7 else '*',
          random_tree(rng, left, variables, symbols, constants),
          random_tree(rng, size - 1 - left, variables, symbols, constants))
