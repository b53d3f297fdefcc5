import collections.abc
import logging
from typing import Dict, Iterator, List, Tuple

from maskeq import util
from maskeq.lang import core

__all__ = (
    'CallGraph',
    'build_call_graph',
    'get_calls',
    'get_instances_of',
)

_logger = logging.getLogger().getChild(__name__)


def get_instances_of(nodes, class_or_tuple) -> Tuple[core.Node, ...]:
  """Collects the MSL nodes of the given classes, in visiting order.

  Args:
    nodes: A statement or expression, or a possibly nested sequence of them
        such as the masked block of a procedure.
    class_or_tuple: Wanted node class or tuple of classes.

  Raises:
    TypeError: If nodes holds something other than MSL nodes.
  """
  found: List[core.Node] = []

  def visitor(node, found):
    if isinstance(node, class_or_tuple):
      found.append(node)
    return node

  if isinstance(nodes, core.Node):
    nodes.visit(visitor, found)
  elif (isinstance(nodes, collections.abc.Iterable) and
        not isinstance(nodes, str)):
    for node in nodes:
      found.extend(get_instances_of(node, class_or_tuple))
  else:
    raise TypeError('%r is not an MSL node' % (nodes,))
  return tuple(found)


def get_calls(nodes) -> Tuple[core.Node, ...]:
  return get_instances_of(nodes, core.Call)


class CallGraph:
  """Direct-invocation graph over procedures and affine transformations.

  Attributes:
    nodes: Names in source order, affine symbols first.
    edges: Mapping from caller to the sorted tuple of its callees.
  """

  def __init__(self, nodes: List[str], edges: Dict[str, Tuple[str, ...]]):
    self.nodes = tuple(nodes)
    self.edges = {name: tuple(edges.get(name, ())) for name in nodes}

  def __repr__(self) -> str:
    return 'CallGraph(%r)' % self.edges

  def tpo_node_gen(self) -> Iterator[str]:
    """Yields callers before callees; ties broken by node order.

    Raises:
      util.SemanticError: If the graph has a cycle.
    """
    indegree = {name: 0 for name in self.nodes}
    for dsts in self.edges.values():
      for dst in dsts:
        indegree[dst] += 1
    ready = [name for name in self.nodes if indegree[name] == 0]
    done = 0
    while ready:
      name = ready.pop(0)
      done += 1
      yield name
      for dst in self.edges[name]:
        indegree[dst] -= 1
        if indegree[dst] == 0:
          ready.append(dst)
    if done != len(self.nodes):
      cycle = sorted(name for name, deg in indegree.items() if deg > 0)
      raise util.SemanticError('recursion through %s' % ', '.join(cycle))

  def topological_order(self) -> Tuple[str, ...]:
    return tuple(self.tpo_node_gen())

  def dependency_order(self) -> Tuple[str, ...]:
    """Callees before callers."""
    return tuple(reversed(self.topological_order()))

  def callees(self, name: str) -> Tuple[str, ...]:
    """All names reachable from name, name excluded."""
    seen = []
    stack = list(self.edges[name])
    while stack:
      callee = stack.pop()
      if callee not in seen:
        seen.append(callee)
        stack.extend(self.edges[callee])
    return tuple(sorted(seen))


def build_call_graph(program: core.Program) -> CallGraph:
  """Builds the call graph and rejects recursion."""
  nodes = [_.name for _ in program.affine_defs] + list(program.affine_decls)
  nodes += [_.name for _ in program.procs]
  edges = {}
  for defn in program.affine_defs:
    edges[defn.name] = sorted({_.name for _ in get_calls(defn.body)})
  for proc in program.procs:
    edges[proc.name] = sorted(
        {_.name for _ in get_calls(proc.orig + proc.masked)})
  graph = CallGraph(nodes, edges)
  order = graph.topological_order()
  _logger.debug('call graph order: %s', ', '.join(order))
  return graph
