# pylint: disable=unused-import
from maskeq.lang.parser import parse, parse_units
from maskeq.lang.preprocess import preprocess
from maskeq.lang.visitor import CallGraph, build_call_graph
# pylint: disable=unused-wildcard-import
from maskeq.lang.core import *
