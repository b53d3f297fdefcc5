import io
import json
import unittest

from maskeq import report
from maskeq.affine import AffineKind, AffineResult
from maskeq.verify import Verdict, VerdictStatus
from tests.strategies import GF16

AFFINE = {
    'af': AffineResult('af', AffineKind.CONSTANT, 99, method='trs'),
    'f1': AffineResult('f1',
                       AffineKind.NOT_AFFINE,
                       witness=((1, 2), (3, 4)),
                       method='testing',
                       oracle_calls=8),
}


def _unit(*statuses):
  verdicts = []
  for i, status in enumerate(statuses):
    if status == VerdictStatus.INCORRECT:
      verdicts.append(
          Verdict('p%d' % i,
                  status,
                  'testing',
                  witness={'x1': 2, 'x0': 1},
                  value=5,
                  seconds=0.25))
    else:
      verdicts.append(Verdict('p%d' % i, status, 'trs', seconds=0.25))
  return report.Unit(GF16, AFFINE, tuple(verdicts))


class TestExitCode(unittest.TestCase):

  def test_exit_code(self):
    self.assertEqual(report.exit_code([]), report.EXIT_CORRECT)
    self.assertEqual(report.exit_code([_unit(VerdictStatus.CORRECT)]),
                     report.EXIT_CORRECT)
    self.assertEqual(
        report.exit_code(
            [_unit(VerdictStatus.CORRECT),
             _unit(VerdictStatus.UNKNOWN, VerdictStatus.INCORRECT)]),
        report.EXIT_INCORRECT)
    self.assertEqual(
        report.exit_code([_unit(VerdictStatus.MAYBE_INCORRECT)]),
        report.EXIT_UNDECIDED)


class TestDocument(unittest.TestCase):

  def test_document(self):
    document = report.to_document(
        [_unit(VerdictStatus.CORRECT, VerdictStatus.INCORRECT)], seed=3)
    self.assertEqual(document['schema'], report.SCHEMA)
    self.assertEqual(document['seed'], 3)
    unit, = document['units']
    self.assertEqual(unit['field'], {'n': 4, 'poly': '0x13'})
    self.assertEqual(unit['affine'][0]['constant'], 99)
    self.assertEqual(unit['affine'][1]['witness'], [[1, 2], [3, 4]])
    correct, incorrect = unit['procs']
    self.assertEqual(correct['verdict'], 'correct')
    self.assertNotIn('witness', correct)
    self.assertNotIn('seconds', correct)
    self.assertEqual(incorrect['witness'], {'x0': 1, 'x1': 2})
    self.assertEqual(list(incorrect['witness']), ['x0', 'x1'])
    self.assertEqual(incorrect['value'], 5)

  def test_timings(self):
    document = report.to_document([_unit(VerdictStatus.CORRECT)],
                                  timings=True)
    self.assertEqual(document['units'][0]['procs'][0]['seconds'], 0.25)
    self.assertNotIn('seed', document)

  def test_write_json(self):
    units = [_unit(VerdictStatus.CORRECT, VerdictStatus.INCORRECT)]
    first, second = io.StringIO(), io.StringIO()
    report.write_json(units, first, seed=1)
    report.write_json(units, second, seed=1)
    self.assertEqual(first.getvalue(), second.getvalue())
    self.assertTrue(first.getvalue().endswith('}\n'))
    self.assertEqual(json.loads(first.getvalue()),
                     report.to_document(units, seed=1))


class TestText(unittest.TestCase):

  def test_print_text(self):
    out = io.StringIO()
    report.print_text([_unit(VerdictStatus.CORRECT, VerdictStatus.INCORRECT)],
                      out)
    self.assertEqual(
        out.getvalue().splitlines(), [
            'field GF(2^4)/0x13',
            '  affine constants:',
            '    af: 99 (trs)',
            '    f1: NOT-AFFINE (x=1, y=2) vs (x=3, y=4) (testing)',
            '  p0: CORRECT (trs)',
            '  p1: INCORRECT (testing) at x0=1, x1=2 = 5',
        ])

  def test_print_without_affine(self):
    out = io.StringIO()
    report.print_text([_unit(VerdictStatus.CORRECT)],
                      out,
                      affine=False,
                      timings=True)
    self.assertEqual(out.getvalue().splitlines(),
                     ['field GF(2^4)/0x13', '  p0: CORRECT (trs) [0.250s]'])


if __name__ == '__main__':
  unittest.main()
