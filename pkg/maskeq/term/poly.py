"""Factors, monomials, polynomials, and their orders.

Every object carries a structural `key`; comparing keys with the built-in
tuple order is exactly the factor order for factors and the monomial order
for monomials:

  * constants < variables < affine applications, constants by value,
    variables and symbols by name;
  * applications of the same symbol compare by their argument monomials;
  * monomials compare lexicographically on their descending factor sequence
    with powers expanded, a proper prefix being the smaller.

A monomial stores its powers as (factor, k) pairs and folds constant factors
into one coefficient. Its key lists ((factor key, k), ...) in descending
order, then the coefficient as a constant factor unless it is 1. Comparing two
such run-length encoded sequences pairwise gives the same result as comparing
the expanded sequences, because a longer run of the same factor is followed
either by a smaller factor or by nothing.
"""
from typing import Iterator, Optional, Sequence, Tuple

from maskeq.field import Field

__all__ = (
    'Factor',
    'Monomial',
    'Polynomial',
    'cmp_factor',
    'cmp_monomial',
    'check_shape',
)

CONST = 0
VAR = 1
APP = 2


class Factor:
  """A constant, a variable, or an application to an XOR-free argument."""
  __slots__ = ('kind', 'value', 'name', 'arg', 'key')

  def __init__(self,
               kind: int,
               value: int = 0,
               name: str = '',
               arg: Optional['Monomial'] = None):
    self.kind = kind
    self.value = value
    self.name = name
    self.arg = arg
    if kind == CONST:
      self.key = (CONST, value)
    elif kind == VAR:
      self.key = (VAR, name)
    else:
      self.key = (APP, name, arg.key)

  @classmethod
  def const(cls, value: int) -> 'Factor':
    return cls(CONST, value=value)

  @classmethod
  def var(cls, name: str) -> 'Factor':
    return cls(VAR, name=name)

  @classmethod
  def app(cls, symbol: str, arg: 'Monomial') -> 'Factor':
    return cls(APP, name=symbol, arg=arg)

  @property
  def is_app(self) -> bool:
    return self.kind == APP

  def __eq__(self, other) -> bool:
    return isinstance(other, Factor) and self.key == other.key

  def __lt__(self, other: 'Factor') -> bool:
    return self.key < other.key

  def __hash__(self) -> int:
    return hash(self.key)

  def __repr__(self) -> str:
    return 'Factor(%s)' % self

  def __str__(self) -> str:
    if self.kind == CONST:
      return '%#x' % self.value if self.value > 9 else str(self.value)
    if self.kind == VAR:
      return self.name
    return '%s(%s)' % (self.name, self.arg)


class Monomial:
  """A nonzero coefficient times a product of factor powers.

  Attributes:
    coef: The folded constant, never 0.
    powers: (factor, exponent) pairs, factors pairwise distinct and sorted
        descending; no constant factors.
  """
  __slots__ = ('coef', 'powers', 'key')

  def __init__(self, coef: int, powers: Sequence[Tuple[Factor, int]] = ()):
    self.coef = coef
    self.powers = tuple(sorted(powers, key=lambda _: _[0].key, reverse=True))
    key = tuple((factor.key, k) for factor, k in self.powers)
    if coef != 1 or not self.powers:
      key += (((CONST, coef), 1),)
    self.key = key

  @property
  def is_constant(self) -> bool:
    return not self.powers

  @property
  def degree(self) -> int:
    return sum(k for _, k in self.powers)

  def factors(self) -> Tuple[Factor, ...]:
    """The descending factor sequence with powers expanded."""
    result = []
    for factor, k in self.powers:
      result.extend([factor] * k)
    if self.coef != 1 or not self.powers:
      result.append(Factor.const(self.coef))
    return tuple(result)

  def __eq__(self, other) -> bool:
    return isinstance(other, Monomial) and self.key == other.key

  def __lt__(self, other: 'Monomial') -> bool:
    return self.key < other.key

  def __hash__(self) -> int:
    return hash(self.key)

  def __repr__(self) -> str:
    return 'Monomial(%s)' % self

  def __str__(self) -> str:
    parts = []
    for factor, k in self.powers:
      parts.append(str(factor) if k == 1 else '%s^%d' % (factor, k))
    if self.coef != 1 or not self.powers:
      parts.append(str(Factor.const(self.coef)))
    return ' * '.join(parts)


class Polynomial:
  """An XOR-sum of monomials sorted strictly descending; () is 0."""
  __slots__ = ('monomials',)

  def __init__(self, monomials: Sequence[Monomial] = ()):
    self.monomials = tuple(sorted(monomials, reverse=True))

  def __len__(self) -> int:
    return len(self.monomials)

  def __iter__(self) -> Iterator[Monomial]:
    return iter(self.monomials)

  def __eq__(self, other) -> bool:
    return isinstance(other, Polynomial) and self.key == other.key

  def __hash__(self) -> int:
    return hash(self.key)

  @property
  def key(self) -> tuple:
    return tuple(_.key for _ in self.monomials)

  @property
  def is_zero(self) -> bool:
    return not self.monomials

  @property
  def constant(self) -> Optional[int]:
    """The value of a constant polynomial, else None."""
    if not self.monomials:
      return 0
    if len(self.monomials) == 1 and self.monomials[0].is_constant:
      return self.monomials[0].coef
    return None

  def symbols(self) -> Tuple[str, ...]:
    return tuple(sorted({_.name for _ in self._factors() if _.is_app}))

  def variables(self) -> Tuple[str, ...]:
    return tuple(sorted({_.name for _ in self._factors() if _.kind == VAR}))

  def _factors(self) -> Iterator[Factor]:
    stack = [factor for m in self.monomials for factor, _ in m.powers]
    while stack:
      factor = stack.pop()
      yield factor
      if factor.is_app:
        stack.extend(_ for _, k in factor.arg.powers)

  def __repr__(self) -> str:
    return 'Polynomial(%s)' % self

  def __str__(self) -> str:
    if not self.monomials:
      return '0'
    return ' ^ '.join(map(str, self.monomials))


def _cmp(lhs, rhs) -> int:
  return (lhs > rhs) - (lhs < rhs)


def cmp_factor(lhs: Factor, rhs: Factor) -> int:
  """Returns 1, 0, or -1 as lhs is above, equal to, or below rhs."""
  return _cmp(lhs.key, rhs.key)


def cmp_monomial(lhs: Monomial, rhs: Monomial) -> int:
  return _cmp(lhs.key, rhs.key)


def check_shape(poly: Polynomial, field: Field) -> bool:
  """Whether poly has the shape of a normal form.

  Monomials strictly descend, factors in every monomial strictly descend
  with exponents in [1, 2^n - 1], coefficients are nonzero field elements,
  and application arguments are themselves well-shaped monomials.
  """

  def monomial_ok(monomial: Monomial) -> bool:
    if not 0 < monomial.coef < field.size:
      return False
    keys = [_.key for _, k in monomial.powers]
    if any(a <= b for a, b in zip(keys, keys[1:])):
      return False
    for factor, k in monomial.powers:
      if not 1 <= k <= field.mask or factor.kind == CONST:
        return False
      if factor.is_app and not monomial_ok(factor.arg):
        return False
    return True

  keys = [_.key for _ in poly.monomials]
  if any(a <= b for a, b in zip(keys, keys[1:])):
    return False
  return all(map(monomial_ok, poly.monomials))
