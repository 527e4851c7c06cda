"""Shared test utilities: seeded random layout-tree generation."""
from __future__ import annotations

import random

from mathsearch.latex import FRAC, SQRT
from mathsearch.slt import Relation, SymbolLayoutTree, SymbolNode

LABELS = list("abcgxyz012") + ["+", "=", "alpha", "beta"]

WORDS = (
    "sum squared deviation variance estimator kernel matrix norm basis "
    "gradient descent convex bound entropy prior posterior sample field "
    "operator spectrum lattice graph flow tensor measure metric group"
).split()


def random_tree(rng: random.Random, max_symbols: int = 8, max_depth: int = 3) -> SymbolLayoutTree:
    budget = rng.randint(1, max_symbols)
    head, _used = _random_chain(rng, budget, max_depth - 1)
    return SymbolLayoutTree(head)


def _random_chain(rng: random.Random, budget: int, depth: int):
    head = tail = None
    used = 0
    while used < budget:
        node, u = _random_node(rng, budget - used, depth)
        used += u
        if head is None:
            head = node
        else:
            tail.children[Relation.NEXT] = node
        tail = node
        if rng.random() < 0.25:
            break
    return head, used


def _random_node(rng: random.Random, budget: int, depth: int):
    r = rng.random()
    if depth > 0 and budget >= 3 and r < 0.15:
        above_budget = rng.randint(1, budget - 2)
        above, ua = _random_chain(rng, above_budget, depth - 1)
        below, ub = _random_chain(rng, budget - 1 - ua, depth - 1)
        node = SymbolNode(FRAC, {Relation.ABOVE: above, Relation.BELOW: below})
        return node, 1 + ua + ub
    if depth > 0 and budget >= 2 and r < 0.25:
        within, uw = _random_chain(rng, budget - 1, depth - 1)
        return SymbolNode(SQRT, {Relation.WITHIN: within}), 1 + uw
    node = SymbolNode(rng.choice(LABELS))
    used = 1
    if depth > 0 and budget - used >= 1 and rng.random() < 0.3:
        sup, u = _random_chain(rng, min(2, budget - used), depth - 1)
        node.children[Relation.SUPER] = sup
        used += u
    if depth > 0 and budget - used >= 1 and rng.random() < 0.2:
        sub, u = _random_chain(rng, min(2, budget - used), depth - 1)
        node.children[Relation.SUB] = sub
        used += u
    return node, used


def random_words(rng: random.Random, n: int) -> list[str]:
    return [rng.choice(WORDS) for _ in range(n)]
