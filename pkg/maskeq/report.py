"""Human-readable and JSON reports.

The JSON document is versioned by its `schema` field. Wall times are only
included on request, so that the same inputs and flags give byte-identical
documents.
"""
import json
import logging
from typing import Any, Dict, Mapping, NamedTuple, Optional, Sequence, TextIO

from maskeq import util
from maskeq.affine import AffineResult
from maskeq.field import Field
from maskeq.verify import Verdict, VerdictStatus

__all__ = (
    'Unit',
    'exit_code',
    'print_text',
    'to_document',
    'write_json',
    'SCHEMA',
)

_logger = logging.getLogger().getChild(__name__)

SCHEMA = 'maskeq.report/1'

EXIT_CORRECT = 0
EXIT_INCORRECT = 1
EXIT_UNDECIDED = 2
EXIT_INPUT_ERROR = 3


class Unit(NamedTuple):
  """Results for one field section of an input."""
  field: Field
  affine: Mapping[str, AffineResult]
  verdicts: Sequence[Verdict] = ()


def exit_code(units: Sequence[Unit]) -> int:
  """0 if every verdict is CORRECT, 1 if one is INCORRECT, 2 otherwise."""
  statuses = {v.status for unit in units for v in unit.verdicts}
  if VerdictStatus.INCORRECT in statuses:
    return EXIT_INCORRECT
  if statuses - {VerdictStatus.CORRECT}:
    return EXIT_UNDECIDED
  return EXIT_CORRECT


def _affine_entry(result: AffineResult) -> Dict[str, Any]:
  entry = {
      'symbol': result.symbol,
      'kind': result.kind.value,
      'method': result.method,
      'oracle_calls': result.oracle_calls,
  }
  if result.constant is not None:
    entry['constant'] = result.constant
  if result.witness is not None:
    entry['witness'] = [list(_) for _ in result.witness]
  if result.residual is not None:
    entry['residual'] = str(result.residual)
  return entry


def _verdict_entry(verdict: Verdict, timings: bool) -> Dict[str, Any]:
  entry = {
      'name': verdict.proc,
      'verdict': verdict.status.value,
      'method': verdict.method,
      'normal_form_size': verdict.size,
      'rules': dict(verdict.stats),
      'inlined': list(verdict.inlined),
      'oracle_calls': verdict.oracle_calls,
  }
  if verdict.witness is not None:
    entry['witness'] = dict(sorted(verdict.witness.items()))
    entry['value'] = verdict.value
  if verdict.residual is not None:
    entry['residual'] = str(verdict.residual)
  if verdict.reason:
    entry['reason'] = verdict.reason
  if verdict.smt_path:
    entry['smt'] = verdict.smt_path
  if timings:
    entry['seconds'] = round(verdict.seconds, 6)
  return entry


def to_document(units: Sequence[Unit],
                seed: Optional[int] = None,
                timings: bool = False) -> Dict[str, Any]:
  """The JSON-serializable report."""
  document: Dict[str, Any] = {'schema': SCHEMA}
  if seed is not None:
    document['seed'] = seed
  document['units'] = [{
      'field': {
          'n': unit.field.width,
          'poly': '%#x' % unit.field.poly
      },
      'affine': [_affine_entry(_) for _ in unit.affine.values()],
      'procs': [_verdict_entry(_, timings) for _ in unit.verdicts],
  } for unit in units]
  return document


def write_json(units: Sequence[Unit],
               out: TextIO,
               seed: Optional[int] = None,
               timings: bool = False) -> None:
  json.dump(to_document(units, seed, timings), out, indent=2, sort_keys=False)
  out.write('\n')


def print_text(units: Sequence[Unit],
               out: TextIO,
               affine: bool = True,
               timings: bool = False) -> None:
  printer = util.Printer(out)
  for unit in units:
    printer.println('field %s' % unit.field)
    printer.do_indent()
    if affine and unit.affine:
      printer.println('affine constants:')
      printer.do_indent()
      for result in unit.affine.values():
        printer.println('%s: %s (%s)' % (result.symbol, result,
                                         result.method))
      printer.un_indent()
    for verdict in unit.verdicts:
      line = str(verdict)
      if timings:
        line += ' [%.3fs]' % verdict.seconds
      printer.println(line)
      if (verdict.residual is not None and
          verdict.status != VerdictStatus.INCORRECT):
        printer.println('  residual: %s' % verdict.residual)
      if verdict.smt_path:
        printer.println('  wrote %s' % verdict.smt_path)
    printer.un_indent()

