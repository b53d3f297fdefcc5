import io
import unittest

from maskeq import util


class TestUtil(unittest.TestCase):

  def test_str2int(self):
    self.assertEqual(util.str2int('42'), 42)
    self.assertEqual(util.str2int(' 0x11B '), 0x11b)
    self.assertEqual(util.str2int('0b101'), 5)
    with self.assertRaises(ValueError):
      util.str2int('0xg')

  def test_parse_error(self):
    self.assertEqual(str(util.ParseError('expected ;', 3, 7)),
                     '3:7: expected ;')
    self.assertEqual(str(util.ParseError('empty input')), 'empty input')
    self.assertIsInstance(util.ParseError('x'), util.InputError)

  def test_printer(self):
    buf = io.StringIO()
    printer = util.Printer(buf)
    printer.println('a')
    printer.do_scope('body')
    printer.printlns(['b', ''])
    printer.do_scope()
    printer.println('c')
    printer.un_scope()
    printer.un_scope()
    self.assertEqual(buf.getvalue(),
                     'a\n{\n  b\n\n  {\n    c\n  }\n} // body\n')
    with self.assertRaises(util.InternalError):
      printer.un_indent()

  def test_printer_tab(self):
    buf = io.StringIO()
    printer = util.Printer(buf, tab=4)
    printer.do_indent()
    printer.println('x')
    self.assertEqual(buf.getvalue(), '    x\n')


if __name__ == '__main__':
  unittest.main()
