import logging
from typing import Iterable, List, TextIO

from absl import flags

_logger = logging.getLogger().getChild(__name__)


class InternalError(Exception):
  """A maskeq invariant was broken; never the fault of the MSL input."""


class SemanticError(Exception):
  """Well-formed MSL that cannot be analyzed, e.g. an unresolved call."""


class SemanticWarn(Warning):
  """Analysis continues with a weaker result, e.g. an assumed constant."""


class InputError(Exception):
  """MSL input that cannot be read or is malformed."""


class ParseError(InputError):
  """A syntax error with its source position."""

  def __init__(self, msg: str, line: int = 0, col: int = 0):
    super().__init__(msg)
    self.msg = msg
    self.line = line
    self.col = col

  def __str__(self) -> str:
    if self.line:
      return '%d:%d: %s' % (self.line, self.col, self.msg)
    return self.msg


class Printer:
  """Writes lines at the current indentation depth.

  Scopes are brace blocks; un_scope closes the innermost one, labelled by the
  name given to do_scope if any.
  """

  def __init__(self, out: TextIO, tab: int = 2):
    self.out = out
    self.tab = tab
    self._depth = 0
    self._labels: List[str] = []

  def println(self, line: str = '') -> None:
    if line:
      self.out.write(' ' * (self._depth * self.tab) + line + '\n')
    else:
      self.out.write('\n')

  def printlns(self, lines: Iterable[str]) -> None:
    for line in lines:
      self.println(line)

  def do_indent(self) -> None:
    self._depth += 1

  def un_indent(self) -> None:
    if not self._depth:
      raise InternalError('unbalanced indentation')
    self._depth -= 1

  def do_scope(self, label: str = '') -> None:
    self.println('{')
    self.do_indent()
    self._labels.append(label)

  def un_scope(self) -> None:
    self.un_indent()
    label = self._labels.pop()
    self.println('} // %s' % label if label else '}')


def str2int(text: str) -> int:
  """Parses a decimal, 0x-hex, or 0b-binary integer literal."""
  text = text.strip().lower()
  if text.startswith('0x'):
    return int(text[2:], 16)
  if text.startswith('0b'):
    return int(text[2:], 2)
  return int(text)


def define_alias_flags(module: str) -> None:
  """Makes every dashed flag of module also accept underscores.

  maskeq spells its flags like --step-budget; --step_budget is an alias.
  """
  defined = {_.name for _ in flags.FLAGS.get_flags_for_module(module)}
  for name in sorted(defined):
    alias = name.replace('-', '_')
    if alias not in defined:
      flags.DEFINE_alias(alias, name, module_name=module)
      defined.add(alias)
