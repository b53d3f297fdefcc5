"""Command-line entry point.

  maskeq verify FILE.msl... [--json] [--emit-smt DIR] [--jobs N] ...
  maskeq affine FILE.msl... [--json] ...
  maskeq gen KIND --order D [--out FILE] [--refresh refreshm|refresh-masks]
  maskeq selftest

Exit status: 0 if every procedure is correct, 1 if one is incorrect, 2 if
one is undecided, 3 on input errors.
"""
import logging
import os
import sys
from typing import List, NamedTuple, Optional, Sequence, TextIO, Tuple

from absl import app, flags

from maskeq import report, util
from maskeq.affine import AffineKind, aff_const_all, affine_consts
from maskeq.backend.msl import KINDS, MAX_ORDER, REFRESHES, GadgetSpec, generate
from maskeq.field import (DEFAULT_POLY, DEFAULT_WIDTH, MAX_WIDTH, Field,
                          check_irreducible, poly_degree)
from maskeq.lang import parse, parse_units, preprocess
from maskeq.oracle.core import (DEFAULT_BUDGET, DEFAULT_SEED, DEFAULT_TRIALS,
                                MissingTable, OracleConfig)
from maskeq.rewrite.base import DEFAULT_STEP_BUDGET
from maskeq.verify import (VerdictStatus, VerifyConfig, replay_witness,
                           verify_all, verify_proc)

__all__ = (
    'RunConfig',
    'main',
    'run',
    'selftest',
    'COMMANDS',
    'CORPUS_DIR',
)

_logger = logging.getLogger().getChild(__name__)

COMMANDS = ('verify', 'affine', 'gen', 'selftest')
CORPUS_DIR = os.path.join(os.path.dirname(__file__), 'corpus')

# Constant per symbol of table1.msl; None for NOT-AFFINE.
TABLE1 = {
    'exp2': 0,
    'exp4': 0,
    'exp8': 0,
    'exp16': 0,
    'rotl1': 0,
    'rotl2': 0,
    'rotl3': 0,
    'rotl4': 0,
    'af': 99,
    'L1': 0,
    'L3': 0,
    'L5': 0,
    'L7': 0,
    'f1': None,
    'f2': 1,
    'f3': None,
    'f4': 99,
}

FLAGS = flags.FLAGS

flags.DEFINE_integer('n', DEFAULT_WIDTH, 'bits per field element',
                     lower_bound=1, upper_bound=MAX_WIDTH)
flags.DEFINE_integer('poly', DEFAULT_POLY,
                     'irreducible modulus, e.g. 0x11b for AES')
flags.DEFINE_integer('trials', DEFAULT_TRIALS, 'random tests per procedure',
                     lower_bound=1)
flags.DEFINE_integer('step-budget', DEFAULT_STEP_BUDGET,
                     'rewriting steps per normalization', lower_bound=1)
flags.DEFINE_integer('oracle-budget', DEFAULT_BUDGET,
                     'assignments exhaustive enumeration may try',
                     lower_bound=1)
flags.DEFINE_integer('seed', DEFAULT_SEED, 'seed of random testing')
flags.DEFINE_string('emit-smt', None,
                    'directory for SMT-LIB2 scripts of undecided problems')
flags.DEFINE_boolean('smt-raw', False,
                     'emit the equivalence term instead of its normal form')
flags.DEFINE_boolean('json', False, 'print the JSON report')
flags.DEFINE_boolean('timings', False, 'include wall times in reports')
flags.DEFINE_boolean('trace', False, 'log every rewriting step group')
flags.DEFINE_integer('jobs', 1, 'worker processes', lower_bound=1)
flags.DEFINE_integer('order', 1, 'masking order of generated gadgets',
                     lower_bound=0, upper_bound=MAX_ORDER)
flags.DEFINE_string('out', None, 'output file of gen; stdout by default')
flags.DEFINE_enum('refresh', 'refreshm', REFRESHES,
                  'refresh gadget used by the generated S-box')


@flags.multi_flags_validator(['n', 'poly'],
                             message='--poly must be irreducible of degree --n')
def _check_field(values) -> bool:
  return (poly_degree(values['poly']) == values['n'] and
          check_irreducible(values['poly']))


util.define_alias_flags(FLAGS.find_module_defining_flag('step-budget'))


class RunConfig(NamedTuple):
  """Everything a run depends on, folded from the flags."""
  command: str
  paths: Tuple[str, ...] = ()
  field: Field = Field()
  trials: int = DEFAULT_TRIALS
  step_budget: int = DEFAULT_STEP_BUDGET
  oracle_budget: int = DEFAULT_BUDGET
  seed: int = DEFAULT_SEED
  json: bool = False
  smt_dir: Optional[str] = None
  smt_raw: bool = False
  trace: bool = False
  timings: bool = False
  jobs: int = 1
  gadget: Optional[GadgetSpec] = None
  out: Optional[str] = None

  @property
  def verify_config(self) -> VerifyConfig:
    return VerifyConfig(
        step_budget=self.step_budget,
        oracle=OracleConfig(self.seed, self.trials, self.oracle_budget),
        smt_dir=self.smt_dir,
        smt_raw=self.smt_raw,
        trace=self.trace)

  @classmethod
  def from_flags(cls, argv: Sequence[str]) -> 'RunConfig':
    """Validates positional arguments against the command."""
    if len(argv) < 2 or argv[1] not in COMMANDS:
      raise app.UsageError('expected a command: %s' % ', '.join(COMMANDS))
    command, args = argv[1], tuple(argv[2:])
    gadget = None
    if command in ('verify', 'affine') and not args:
      raise app.UsageError('%s needs at least one .msl file' % command)
    if command == 'gen':
      if len(args) != 1 or args[0] not in KINDS:
        raise app.UsageError('gen needs one kind: %s' % ', '.join(KINDS))
      gadget = GadgetSpec(args[0], FLAGS.order, Field(FLAGS.n, FLAGS.poly),
                          FLAGS.refresh)
      args = ()
    if command == 'selftest' and args:
      raise app.UsageError('selftest takes no arguments')
    return cls(command=command,
               paths=args,
               field=Field(FLAGS.n, FLAGS.poly),
               trials=FLAGS.trials,
               step_budget=FLAGS.step_budget,
               oracle_budget=FLAGS.oracle_budget,
               seed=FLAGS.seed,
               json=FLAGS.json,
               smt_dir=FLAGS.emit_smt,
               smt_raw=FLAGS.smt_raw,
               trace=FLAGS.trace,
               timings=FLAGS.timings,
               jobs=FLAGS.jobs,
               gadget=gadget,
               out=FLAGS.out)


def analyze(text: str, config: RunConfig,
            filename: str = '<string>') -> List[report.Unit]:
  """Runs the pipeline on MSL text, one unit per field section."""
  units = []
  verify_config = config.verify_config
  for program in parse_units(text, config.field, filename):
    program = preprocess(program)
    results = aff_const_all(program, config.step_budget, config.seed,
                            config.smt_dir, config.trace)
    verdicts = ()
    if config.command == 'verify':
      verdicts = verify_all(program, results, verify_config, config.jobs)
    units.append(report.Unit(program.field, results, tuple(verdicts)))
  return units


def _emit(units: Sequence[report.Unit], config: RunConfig,
          out: TextIO) -> None:
  if config.json:
    report.write_json(units, out, config.seed, config.timings)
  else:
    report.print_text(units, out, timings=config.timings)


def run(config: RunConfig, out: TextIO = sys.stdout) -> int:
  """Executes one command and returns the exit status."""
  if config.trace:
    logging.getLogger().getChild('maskeq.rewrite').setLevel(logging.DEBUG)
  if config.command == 'gen':
    text = generate(config.gadget)
    if config.out:
      with open(config.out, 'w') as gen_out:
        gen_out.write(text)
      _logger.info('wrote %s', config.out)
    else:
      out.write(text)
    return report.EXIT_CORRECT
  if config.command == 'selftest':
    return selftest(config, out)
  units: List[report.Unit] = []
  for path in config.paths:
    try:
      with open(path) as src:
        units.extend(analyze(src.read(), config, path))
    except OSError as e:
      _logger.error('%s: %s', path, e.strerror)
      return report.EXIT_INPUT_ERROR
    except (util.InputError, util.SemanticError) as e:
      _logger.error('%s:%s', path, e if isinstance(e, util.ParseError) else
                    ' %s' % e)
      return report.EXIT_INPUT_ERROR
  _emit(units, config, out)
  return report.exit_code(units)


class _Selftest:
  """Checks over the shipped corpus; each prints one PASS/FAIL line."""

  def __init__(self, config: RunConfig, out: TextIO):
    self.config = config._replace(json=False, smt_dir=None)
    self.out = out
    self.failures = 0

  def check(self, name: str, ok: bool, detail: str = '') -> None:
    if not ok:
      self.failures += 1
    line = '%s %s' % ('PASS' if ok else 'FAIL', name)
    if detail:
      line += ': %s' % detail
    self.out.write(line + '\n')

  def load(self, name: str, command: str) -> List[report.Unit]:
    path = os.path.join(CORPUS_DIR, name)
    with open(path) as src:
      return analyze(src.read(), self.config._replace(command=command), path)

  def fig2(self) -> None:
    units = self.load('fig2.msl', 'verify')
    for verdict in units[0].verdicts:
      self.check('fig2 %s' % verdict.proc,
                 verdict.is_correct and verdict.method == 'trs', str(verdict))

  def table1(self) -> None:
    units = self.load('table1.msl', 'affine')
    found = {}
    for unit in units:
      found.update(unit.affine)
    for symbol, expected in TABLE1.items():
      result = found.get(symbol)
      if result is None:
        self.check('table1 %s' % symbol, False, 'missing')
        continue
      if expected is None:
        ok = result.kind == AffineKind.NOT_AFFINE
      else:
        ok = result.kind == AffineKind.CONSTANT and result.constant == expected
      self.check('table1 %s' % symbol, ok, str(result))

  def mutants(self) -> None:
    directory = os.path.join(CORPUS_DIR, 'mutants')
    for name in sorted(os.listdir(directory)):
      if not name.endswith('.msl'):
        continue
      path = os.path.join(directory, name)
      with open(path) as src:
        text = src.read()
      config = self.config._replace(command='verify')
      # The last procedure of a mutant is the mutated one.
      program = preprocess(parse(text, config.field, path))
      consts = affine_consts(
          aff_const_all(program, config.step_budget, config.seed))
      verdict = verify_proc(program, program.procs[-1], consts,
                            config.verify_config)
      ok = verdict.status == VerdictStatus.INCORRECT
      if ok:
        try:
          ok = replay_witness(program, verdict) != 0
        except MissingTable:
          ok = False
      self.check('mutant %s' % name[:-len('.msl')], ok, str(verdict))


def selftest(config: RunConfig, out: TextIO = sys.stdout) -> int:
  """Runs the shipped corpus: 0 if every check passes, else 1."""
  test = _Selftest(config, out)
  test.fig2()
  test.table1()
  test.mutants()
  out.write('%d failure(s)\n' % test.failures)
  return report.EXIT_CORRECT if not test.failures else report.EXIT_INCORRECT


def _main(argv: List[str]) -> None:
  config = RunConfig.from_flags(argv)
  sys.exit(run(config))


def main() -> None:
  app.run(_main)


if __name__ == '__main__':
  main()
