"""Itinerary calculus for pullbacks of the disk's involution image.

Pullbacks are coded by eventually-all-ones itineraries; the intersection
predicate turns the pullbacks of bounded order into the tree A_n, and each
periodic dust point is reached from the disk by a string of pullbacks.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from itertools import islice
from typing import Literal

import networkx as nx

from app.core.config import settings
from app.core.errors import (
    BudgetExceeded,
    IdenticalSources,
    NotAPullback,
    NotEnoughElements,
    NotEnoughZeros,
    NoZeros,
    OrderMismatch,
    PrefixTooShort,
)
from app.models import DELTA, ConstructionPlan, Itinerary, PullbackString, PullbackTree

logger = logging.getLogger(__name__)


def shift(i: Itinerary, steps: int) -> Itinerary:
    if steps < 0:
        raise ValueError(f"shift steps must be nonnegative, got {steps}")
    if steps <= len(i.head):
        return Itinerary(i.head[steps:], i.period)
    r = (steps - len(i.head)) % len(i.period)
    return Itinerary("", i.period[r:] + i.period[:r])


def _parent_head(head: str) -> str:
    # the pullback sharing a point with head·1_inf through its last 0
    return head[:-1].rstrip("1")


def intersects(i: Itinerary, j: Itinerary) -> bool:
    """Whether two distinct pullbacks share a point.

    They do exactly when one reads p·0·1_inf and the other p·1·1_inf.
    """
    if not (i.is_pullback and j.is_pullback):
        raise NotAPullback(f"intersection is defined on pullbacks only: {i}, {j}")
    if i == j:
        return False
    return (bool(j.head) and i.head == _parent_head(j.head)) or (
        bool(i.head) and j.head == _parent_head(i.head)
    )


def build_tree(n: int, budget: int | None = None) -> PullbackTree:
    """A_n: every pullback of order at most n, with intersection edges."""
    if n < 0:
        raise ValueError(f"tree order must be nonnegative, got {n}")
    budget = settings.TREE_BUDGET if budget is None else budget
    if 2**n > budget:
        logger.warning(f"A_{n} needs {2**n} nodes, budget is {budget}")
        raise BudgetExceeded(f"A_{n} has 2^{n} nodes, more than the budget {budget}")

    # canonical heads of w·1_inf for |w| = n: the empty head and every word ending in 0
    heads = [""]
    for length in range(1, n + 1):
        width = length - 1
        heads.extend(format(x, f"0{width}b") + "0" if width else "0" for x in range(2**width))
    nodes = [Itinerary(h) for h in heads]
    index = {h: a for a, h in enumerate(heads)}

    edges = []
    for b, node in enumerate(nodes[1:], start=1):
        a = index[_parent_head(node.head)]
        if not intersects(nodes[a], node):
            raise AssertionError(f"{nodes[a]} and {node} must intersect")
        edges.append((a, b))
    logger.info(f"built A_{n}: {len(nodes)} nodes, {len(edges)} edges")
    return PullbackTree(n=n, nodes=nodes, edges=edges)


def string_of(source: Itinerary, count: int) -> PullbackString:
    """First `count` pullbacks of the string joining the disk to the point coded by `source`.

    Element j keeps the source up to and including its j-th zero, followed by 1_inf.
    """
    zeros = list(islice(source.zero_positions(), count))
    if len(zeros) < count:
        raise NotEnoughZeros(f"{source} has {len(zeros)} zero(s), {count} requested")
    return PullbackString(
        source=source, elements=[Itinerary.pullback(source.prefix(p + 1)) for p in zeros]
    )


def basic_length(word: str) -> int:
    """Zeros in the minimal period of `word`."""
    period = Itinerary.periodic(word).period
    zeros = period.count("0")
    if not zeros:
        raise NoZeros(f"period {period!r} has no zeros")
    return zeros


def fragments(s: PullbackString, l: int, count: int) -> list[list[Itinerary]]:  # noqa: E741
    if l < 1:
        raise ValueError(f"fragment length must be positive, got {l}")
    if l * count > len(s.elements):
        raise NotEnoughElements(f"{count} fragments of length {l} need {l * count} elements, have {len(s.elements)}")
    return [s.elements[i * l : (i + 1) * l] for i in range(count)]


def verify_shift_down(word: str, depth: int) -> bool:
    """The k-th shift moves the string of (word)^ down by l pullbacks, its first fragment onto the disk."""
    source = Itinerary.periodic(word)
    k = len(source.period)
    l = basic_length(source.period)  # noqa: E741
    s = string_of(source, depth + l)
    first = fragments(s, l, 1)[0]
    if any(shift(e, k) != DELTA for e in first):
        return False
    return all(shift(s.element(j + l), k) == s.element(j) for j in range(1, depth + 1))


def common_prefix(
    u: PullbackString, v: PullbackString
) -> tuple[list[Itinerary], Itinerary | None, int]:
    """Maximal common initial run F of two strings, its last element L and its length m."""
    if u.source == v.source:
        raise IdenticalSources(f"both strings start from {u.source}")
    m = 0
    for a, b in zip(u.elements, v.elements):
        if a != b:
            break
        m += 1
    if m == min(len(u.elements), len(v.elements)):
        raise NotEnoughElements(f"strings agree on all {m} available elements")
    prefix = list(u.elements[:m])
    return prefix, (prefix[-1] if prefix else None), m


def _first_difference(u: Itinerary, v: Itinerary) -> int:
    # distinct periodic sequences differ within lcm of their periods
    horizon = max(len(u.head), len(v.head)) + math.lcm(len(u.period), len(v.period))
    for i in range(horizon):
        if u.symbol(i) != v.symbol(i):
            return i
    raise IdenticalSources(f"{u} and {v} name the same sequence")


def plan_construction(u_word: str, v_word: str) -> ConstructionPlan:
    """Combinatorial data of the two-string construction for the points (u_word)^ and (v_word)^."""
    u, v = Itinerary.periodic(u_word), Itinerary.periodic(v_word)
    if u == v:
        raise IdenticalSources(f"({u_word})^ and ({v_word})^ are the same point")
    k, l = len(u.period), len(v.period)  # noqa: E741
    w, q = basic_length(u.period), basic_length(v.period)

    # elements of equal index agree exactly while their zero precedes the first difference
    d = _first_difference(u, v)
    reach = u.prefix(d).count("0") + 1
    prefix, last, m = common_prefix(string_of(u, reach), string_of(v, reach))
    if m < 2:
        raise PrefixTooShort(f"strings of ({u_word})^ and ({v_word})^ share {m} pullback(s), need 2")
    assert last is not None

    s_u, s_v = string_of(u, m + 2 * w), string_of(v, m + 2 * q)
    hat_f_u, f_u = s_u.elements[m : m + w], s_u.elements[m + w :]
    hat_f_v, f_v = s_v.elements[m : m + q], s_v.elements[m + q :]
    n = m + 3 * k + 3 * l
    within = all(e.order <= n for e in (*prefix, *hat_f_u, *f_u, *hat_f_v, *f_v))
    plan = ConstructionPlan(
        u_word=u.period,
        v_word=v.period,
        k=k,
        l=l,
        w=w,
        q=q,
        m=m,
        prefix=prefix,
        last_common=last,
        hat_f_u=hat_f_u,
        f_u=f_u,
        hat_f_v=hat_f_v,
        f_v=f_v,
        n=n,
        assumption_flag=m < min(w, q),
        within_order=within,
    )
    logger.info(f"plan ({u.period})^ / ({v.period})^: m={m} L={last} n={n}")
    return plan


def pullback_chain(
    plan: ConstructionPlan, side: Literal["u", "v"], count: int
) -> list[list[Itinerary]]:
    """Blocks F(0), F(-1), ..., F(-count+1) that follow the hatted block on one side."""
    word, size = (plan.u_word, plan.w) if side == "u" else (plan.v_word, plan.q)
    s = string_of(Itinerary.periodic(word), plan.m + size * (count + 1))
    start = plan.m + size
    return [s.elements[start + i * size : start + (i + 1) * size] for i in range(count)]


def _any_intersect(a: Iterable[Itinerary], b: Sequence[Itinerary]) -> bool:
    return any(intersects(x, y) for x in a for y in b)


def _side_chain_holds(plan: ConstructionPlan, side: Literal["u", "v"], depth: int) -> bool:
    period, hat = (plan.k, plan.hat_f_u) if side == "u" else (plan.l, plan.hat_f_v)
    blocks = pullback_chain(plan, side, depth)
    chain = [hat, *blocks]
    for lower, upper in zip(chain, chain[1:]):
        if [shift(e, period) for e in upper] != lower:
            return False
        if not _any_intersect(lower, upper):
            return False
    for a in range(len(chain)):
        for b in range(a + 2, len(chain)):
            if _any_intersect(chain[a], chain[b]):
                return False
    return True


def verify_pullback_chain(plan: ConstructionPlan, depth: int) -> bool:
    """Chain structure of both sides and the separation of Q_u from Q_v."""
    if depth < 1:
        raise ValueError(f"chain depth must be positive, got {depth}")
    if not (_side_chain_holds(plan, "u", depth) and _side_chain_holds(plan, "v", depth)):
        return False
    q_u = [*plan.hat_f_u, *(e for block in pullback_chain(plan, "u", depth) for e in block)]
    q_v = [*plan.hat_f_v, *(e for block in pullback_chain(plan, "v", depth) for e in block)]
    if set(q_u) & set(q_v):
        return False
    return not _any_intersect(q_u, q_v)


def _labelled(
    tree: PullbackTree, labels: Sequence[str] | None
) -> tuple[nx.Graph, dict[str, str]]:
    names = list(labels) if labels is not None else [str(x) for x in tree.nodes]
    if len(names) != len(tree.nodes):
        raise ValueError(f"{len(names)} labels for {len(tree.nodes)} nodes")
    by_node = dict(zip(tree.nodes, names))
    graph = nx.Graph()
    graph.add_nodes_from(names)
    graph.add_edges_from((names[a], names[b]) for a, b in tree.edges)
    # A_n is closed under one shift
    shift_map = {by_node[x]: by_node[shift(x, 1)] for x in tree.nodes}
    return graph, shift_map


def same_intersection_pattern(
    t1: PullbackTree,
    labels1: Sequence[str] | None,
    t2: PullbackTree,
    labels2: Sequence[str] | None,
) -> bool:
    """Whether the label identity is a graph isomorphism that conjugates the shifts."""
    if t1.n != t2.n:
        raise OrderMismatch(f"trees of order {t1.n} and {t2.n}")
    g1, shift1 = _labelled(t1, labels1)
    g2, shift2 = _labelled(t2, labels2)
    if set(g1.nodes) != set(g2.nodes):
        return False
    if {frozenset(e) for e in g1.edges} != {frozenset(e) for e in g2.edges}:
        return False
    return shift1 == shift2
