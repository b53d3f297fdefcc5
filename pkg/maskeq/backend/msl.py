"""Generators of masked gadgets in MSL.

All gadgets are written unrolled for a given masking order d, with d + 1
shares named x0 ... xd:

  isw-mult         the ISW multiplication c = a * b;
  refresh-masks    one random per share i >= 1, share 0 absorbs them all;
  refreshm         the pairwise ISW refresh with d(d+1)/2 randoms;
  aes-sbox-inverse x^254 by the exp2/exp4/exp16 chain of four masked
                   multiplications and two refreshes;
  aes-sbox         the inverse followed by the AES affine map.
"""
import io
import logging
from typing import List, NamedTuple, Sequence

from maskeq import util
from maskeq.field import DEFAULT_POLY, DEFAULT_WIDTH, Field

__all__ = (
    'GadgetSpec',
    'MslPrinter',
    'gen_aes_sbox',
    'gen_aes_sbox_inverse',
    'gen_isw_mult',
    'gen_refresh_masks',
    'gen_refreshm',
    'generate',
    'KINDS',
    'MAX_ORDER',
    'REFRESHES',
)

_logger = logging.getLogger().getChild(__name__)

KINDS = ('isw-mult', 'refreshm', 'refresh-masks', 'aes-sbox-inverse',
         'aes-sbox')
REFRESHES = ('refreshm', 'refresh-masks')
MAX_ORDER = 200


class GadgetSpec(NamedTuple):
  kind: str
  order: int
  field: Field = Field()
  refresh: str = 'refreshm'


class MslPrinter(util.Printer):
  """Prints MSL definitions with two-space indentation."""

  def field(self, field: Field) -> None:
    self.println('field %d %#x;' % (field.width, field.poly))
    self.println()

  def affine(self, name: str, arg: str, output: str,
             body: Sequence[str]) -> None:
    self.println('affine %s(%s) -> %s' % (name, arg, output))
    self.do_scope()
    self.printlns(body)
    self.un_scope()
    self.println()

  def proc(self, name: str, inputs: Sequence[str], output: str,
           orig: Sequence[str], shares: int, masked: Sequence[str]) -> None:
    self.println('proc %s(%s) -> %s' % (name, ', '.join(inputs), output))
    self.do_scope(name)
    self.printlns(orig)
    self.println('shares %d;' % shares)
    self.printlns(masked)
    self.un_scope()
    self.println()


def _check_order(order: int) -> None:
  if not 0 <= order <= MAX_ORDER:
    raise ValueError('masking order must be in [0, %d], got %d' %
                     (MAX_ORDER, order))


def _isw_lines(order: int) -> List[str]:
  shares = range(order + 1)
  lines = []
  for i in shares:
    for j in shares[i + 1:]:
      lines.append('r%d_%d <- rand;' % (i, j))
  for i in shares:
    for j in shares[i + 1:]:
      lines.append('r%d_%d <- (r%d_%d ^ a%d * b%d) ^ a%d * b%d;' %
                   (j, i, i, j, i, j, j, i))
  for i in shares:
    terms = ['a%d * b%d' % (i, i)]
    terms.extend('r%d_%d' % (i, j) for j in shares if j != i)
    lines.append('c%d <- %s;' % (i, ' ^ '.join(terms)))
  return lines


def _refresh_masks_lines(order: int) -> List[str]:
  lines = ['r%d <- rand;' % i for i in range(order)]
  lines.append('y0 <- %s;' %
               ' ^ '.join(['x0'] + ['r%d' % i for i in range(order)]))
  lines.extend('y%d <- x%d ^ r%d;' % (i, i, i - 1)
               for i in range(1, order + 1))
  return lines


def _refreshm_lines(order: int) -> List[str]:
  shares = range(order + 1)
  lines = []
  for i in shares:
    for j in shares[i + 1:]:
      lines.append('r%d_%d <- rand;' % (i, j))
  for i in shares:
    terms = ['x%d' % i]
    terms.extend('r%d_%d' % (min(i, j), max(i, j)) for j in shares if j != i)
    lines.append('y%d <- %s;' % (i, ' ^ '.join(terms)))
  return lines


def _print_isw_mult(printer: MslPrinter, order: int) -> None:
  printer.proc('sec_mult', ('a', 'b'), 'c', ['c <- a * b;'], order + 1,
               _isw_lines(order))


def _print_refresh(printer: MslPrinter, order: int, refresh: str) -> str:
  if refresh not in REFRESHES:
    raise ValueError('unknown refresh %s; expected one of %s' %
                     (refresh, ', '.join(REFRESHES)))
  name = refresh.replace('-', '_')
  lines = (_refreshm_lines(order)
           if refresh == 'refreshm' else _refresh_masks_lines(order))
  printer.proc(name, ('x',), 'y', ['y <- x;'], order + 1, lines)
  return name


def _print_exp_chain(printer: MslPrinter, order: int, refresh: str) -> None:
  printer.affine('exp2', 'x', 'y', ['y <- x * x;'])
  printer.affine('exp4', 'x', 'y', ['y <- exp2(exp2(x));'])
  printer.affine('exp16', 'x', 'y', ['y <- exp4(exp4(x));'])
  _print_isw_mult(printer, order)
  name = _print_refresh(printer, order, refresh)
  orig = [
      'z <- exp2(x);',
      'y <- z * x;',
      'w <- exp4(y);',
      'y <- y * w;',
      'y <- exp16(y);',
      'y <- y * w;',
      'y <- y * z;',
  ]
  masked = [
      'z <- exp2(x);',
      'z <- %s(z);' % name,
      'y <- sec_mult(z, x);',
      'w <- exp4(y);',
      'w <- %s(w);' % name,
      'y <- sec_mult(y, w);',
      'y <- exp16(y);',
      'y <- sec_mult(y, w);',
      'y <- sec_mult(y, z);',
  ]
  printer.proc('sec_exp254', ('x',), 'y', orig, order + 1, masked)


def _render(gadget: GadgetSpec, body) -> str:
  _check_order(gadget.order)
  buf = io.StringIO()
  printer = MslPrinter(buf)
  printer.println('// %s, order %d' % (gadget.kind, gadget.order))
  printer.field(gadget.field)
  body(printer)
  return buf.getvalue()


def gen_isw_mult(order: int, field: Field = Field()) -> str:
  """MSL text of sec_mult at the given order."""
  gadget = GadgetSpec('isw-mult', order, field)
  return _render(gadget, lambda printer: _print_isw_mult(printer, order))


def gen_refresh_masks(order: int, field: Field = Field()) -> str:
  gadget = GadgetSpec('refresh-masks', order, field, 'refresh-masks')
  return _render(
      gadget, lambda printer: _print_refresh(printer, order, 'refresh-masks'))


def gen_refreshm(order: int, field: Field = Field()) -> str:
  gadget = GadgetSpec('refreshm', order, field)
  return _render(gadget,
                 lambda printer: _print_refresh(printer, order, 'refreshm'))


def gen_aes_sbox_inverse(order: int,
                         field: Field = Field(),
                         refresh: str = 'refreshm') -> str:
  """MSL text of sec_exp254 and the gadgets it calls."""
  gadget = GadgetSpec('aes-sbox-inverse', order, field, refresh)
  return _render(gadget,
                 lambda printer: _print_exp_chain(printer, order, refresh))


def gen_aes_sbox(order: int, refresh: str = 'refreshm') -> str:
  """MSL text of the masked AES S-box over GF(2^8)/0x11b."""
  field = Field(DEFAULT_WIDTH, DEFAULT_POLY)
  gadget = GadgetSpec('aes-sbox', order, field, refresh)

  def body(printer: MslPrinter) -> None:
    _print_exp_chain(printer, order, refresh)
    printer.affine('af', 'x', 'y', [
        'y <- x ^ rotl(x, 1) ^ rotl(x, 2) ^ rotl(x, 3) ^ rotl(x, 4) ^ 0x63;'
    ])
    printer.proc('sec_aes_sbox', ('x',), 'y',
                 ['t <- sec_exp254(x);', 'y <- af(t);'], order + 1,
                 ['t <- sec_exp254(x);', 'y <- af(t);'])

  return _render(gadget, body)


def generate(gadget: GadgetSpec) -> str:
  """Dispatches on gadget.kind."""
  if gadget.kind == 'isw-mult':
    return gen_isw_mult(gadget.order, gadget.field)
  if gadget.kind == 'refreshm':
    return gen_refreshm(gadget.order, gadget.field)
  if gadget.kind == 'refresh-masks':
    return gen_refresh_masks(gadget.order, gadget.field)
  if gadget.kind == 'aes-sbox-inverse':
    return gen_aes_sbox_inverse(gadget.order, gadget.field, gadget.refresh)
  if gadget.kind == 'aes-sbox':
    if gadget.field != Field(DEFAULT_WIDTH, DEFAULT_POLY):
      raise ValueError('aes-sbox is only defined over %s' % Field())
    return gen_aes_sbox(gadget.order, gadget.refresh)
  raise ValueError('unknown gadget kind %s; expected one of %s' %
                   (gadget.kind, ', '.join(KINDS)))
