"""Arithmetic in GF(2^n) = GF(2)[X]/(P).

Field elements are plain ints in [0, 2^n). Vectorized helpers accept numpy
integer arrays so the oracles can evaluate many assignments at once.
"""
import logging
from typing import Tuple, Union

import cached_property
import numpy as np

from maskeq import util

__all__ = (
    'Field',
    'check_irreducible',
    'poly_degree',
    'poly_mod',
    'DEFAULT_WIDTH',
    'DEFAULT_POLY',
    'MAX_WIDTH',
)

_logger = logging.getLogger().getChild(__name__)

DEFAULT_WIDTH = 8
DEFAULT_POLY = 0x11B
MAX_WIDTH = 16
TABLE_WIDTH = 8

Value = Union[int, np.ndarray]


def poly_degree(poly: int) -> int:
  return poly.bit_length() - 1


def poly_mod(dividend: int, divisor: int) -> int:
  """Remainder of carry-less division over GF(2)."""
  deg = poly_degree(divisor)
  while dividend and poly_degree(dividend) >= deg:
    dividend ^= divisor << (poly_degree(dividend) - deg)
  return dividend


def check_irreducible(poly: int) -> bool:
  """Returns whether poly is irreducible over GF(2).

  Trial division by every polynomial of degree 1 to deg(poly) // 2.

  Args:
    poly: The polynomial as an integer bit vector, degree at least 1.

  Returns:
    True iff poly has no nontrivial divisor.
  """
  deg = poly_degree(poly)
  if deg < 1:
    raise ValueError('polynomial must have degree at least 1, got %#x' % poly)
  for divisor in range(2, 1 << (deg // 2 + 1)):
    if poly_mod(poly, divisor) == 0:
      return False
  return True


class Field:
  """The field GF(2^n) with modulus poly.

  Attributes:
    width: n, the number of bits per element.
    poly: The irreducible modulus, with bit n set.
    size: 2^n.
    mask: 2^n - 1, also the order of the multiplicative group.
  """

  def __init__(self, width: int = DEFAULT_WIDTH, poly: int = DEFAULT_POLY):
    if not 1 <= width <= MAX_WIDTH:
      raise ValueError('field width must be in [1, %d], got %d' %
                       (MAX_WIDTH, width))
    if poly_degree(poly) != width:
      raise ValueError('polynomial %#x does not have degree %d' % (poly, width))
    if not check_irreducible(poly):
      raise ValueError('polynomial %#x is reducible over GF(2)' % poly)
    self.width = width
    self.poly = poly
    self.size = 1 << width
    self.mask = self.size - 1

  def __repr__(self) -> str:
    return 'Field(%d, %#x)' % (self.width, self.poly)

  def __str__(self) -> str:
    return 'GF(2^%d)/%#x' % (self.width, self.poly)

  def __eq__(self, other) -> bool:
    return (isinstance(other, Field) and self.width == other.width and
            self.poly == other.poly)

  def __hash__(self) -> int:
    return hash((self.width, self.poly))

  def __getstate__(self):
    return self.width, self.poly

  def __setstate__(self, state: Tuple[int, int]) -> None:
    self.__init__(*state)

  def check(self, value: int) -> int:
    if not 0 <= value < self.size:
      raise util.SemanticError('constant %d is not an element of %s' %
                               (value, self))
    return value

  @staticmethod
  def add(a: Value, b: Value) -> Value:
    return a ^ b

  def xtime(self, a: int) -> int:
    """Multiplies a by X and reduces."""
    a <<= 1
    if a & self.size:
      a ^= self.poly
    return a

  def peasant_mul(self, a: int, b: int) -> int:
    """Russian peasant multiplication with per-round reduction."""
    result = 0
    while b:
      if b & 1:
        result ^= a
      b >>= 1
      a = self.xtime(a)
    return result

  @cached_property.cached_property
  def mul_table(self) -> np.ndarray:
    """Flat product table indexed by (a << n) | b, for n <= 8."""
    if self.width > TABLE_WIDTH:
      raise util.InternalError('no product table for %s' % self)
    table = np.zeros(self.size * self.size, dtype=np.int64)
    for a in range(self.size):
      row = a << self.width
      for b in range(a, self.size):
        table[row | b] = table[(b << self.width) | a] = self.peasant_mul(a, b)
    _logger.debug('built product table for %s', self)
    return table

  @cached_property.cached_property
  def _mul_list(self):
    return self.mul_table.tolist()

  def mul(self, a: int, b: int) -> int:
    if self.width <= TABLE_WIDTH:
      return self._mul_list[(a << self.width) | b]
    return self.peasant_mul(a, b)

  def mul_array(self, a: np.ndarray, b: Value) -> np.ndarray:
    """Elementwise product of integer arrays (or an array and a scalar)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if self.width <= TABLE_WIDTH:
      return self.mul_table[(a << self.width) | b]
    a, b = np.broadcast_arrays(a, b)
    a = a.copy()
    b = b.copy()
    result = np.zeros_like(a)
    for _ in range(self.width):
      result ^= np.where(b & 1, a, 0)
      b >>= 1
      a <<= 1
      a ^= np.where(a & self.size, self.poly, 0)
    return result

  def pow(self, a: int, k: int) -> int:
    """a^k by square-and-multiply; 0^0 is 1."""
    if k < 0:
      raise ValueError('negative exponent %d' % k)
    result = 1
    while k:
      if k & 1:
        result = self.mul(result, a)
      a = self.mul(a, a)
      k >>= 1
    return result

  def inv(self, a: int) -> int:
    if a == 0:
      raise ZeroDivisionError('0 has no inverse in %s' % self)
    return self.pow(a, self.size - 2)

  def reduce_exponent(self, k: int) -> int:
    """Maps k >= 1 into [1, 2^n - 1] keeping x^k for every x, 0 included."""
    if k < 1:
      raise ValueError('exponent must be positive, got %d' % k)
    return (k - 1) % self.mask + 1

  @cached_property.cached_property
  def generator(self) -> int:
    """The smallest element of multiplicative order 2^n - 1."""
    for g in range(2, self.size):
      x, order = g, 1
      while x != 1:
        x = self.peasant_mul(x, g)
        order += 1
      if order == self.mask:
        return g
    return 1  # GF(2): the group is trivial

  @cached_property.cached_property
  def exp_table(self) -> Tuple[int, ...]:
    """Antilog table: exp_table[i] = g^i for i in [0, 2^n - 1)."""
    if self.width > TABLE_WIDTH:
      raise util.InternalError('no log tables for %s' % self)
    table = [1]
    for _ in range(self.mask - 1):
      table.append(self.peasant_mul(table[-1], self.generator))
    return tuple(table)

  @cached_property.cached_property
  def log_table(self) -> Tuple[int, ...]:
    """log_table[a] = i such that g^i = a; entry 0 is unused."""
    table = [0] * self.size
    for i, a in enumerate(self.exp_table):
      table[a] = i
    return tuple(table)

  def log_mul(self, a: int, b: int) -> int:
    """Product via log/antilog tables."""
    if a == 0 or b == 0:
      return 0
    return self.exp_table[(self.log_table[a] + self.log_table[b]) % self.mask]

  def random_array(self, rng: np.random.Generator, shape) -> np.ndarray:
    return rng.integers(0, self.size, size=shape, dtype=np.int64)

  @staticmethod
  def parse_poly(text: Union[int, str]) -> int:
    """Reads a modulus given as a hex, decimal, or binary literal."""
    if isinstance(text, int):
      return text
    try:
      return util.str2int(text)
    except ValueError:
      raise ValueError("invalid polynomial literal '%s'" % text) from None
