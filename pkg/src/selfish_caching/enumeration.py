"""Exhaustive enumeration of feasible strategy profiles, in lexicographic order."""

from __future__ import annotations

import itertools
from math import comb, prod

import numpy as np

from .errors import SearchLimitError
from .network import CachingNetwork

DEFAULT_LIMIT = 10**7


def node_strategies(net: CachingNetwork, s: int, cap: int | None = None) -> list:
    """Feasible item sets of node ``s`` as sorted tuples, in tuple order.

    With ``cap`` set, stops early once more than ``cap`` sets are found.
    """
    c = float(net.capacities[s])
    n = net.n_items
    out = []
    if net.equal_sizes:
        size = float(net.sizes[0]) if n else 1.0
        k_max = min(n, int(np.floor(c / size + 1e-9)))
        if cap is not None and _count_upto(n, k_max) > cap:
            return [None] * (cap + 1)
        for k in range(k_max + 1):
            out.extend(itertools.combinations(range(n), k))
    else:
        sizes = net.sizes

        def rec(start, used, chosen):
            out.append(tuple(chosen))
            if cap is not None and len(out) > cap:
                raise StopIteration
            for i in range(start, n):
                if used + sizes[i] <= c + 1e-9:
                    chosen.append(i)
                    rec(i + 1, used + sizes[i], chosen)
                    chosen.pop()

        try:
            rec(0, 0.0, [])
        except StopIteration:
            return out
    out.sort()
    return out


def _count_upto(n, k_max):
    return sum(comb(n, k) for k in range(k_max + 1))


def space_size(net: CachingNetwork, limit: int | None = None) -> int:
    """Number of feasible profiles (exact up to ``limit + 1``)."""
    total = 1
    for s in range(net.n_nodes):
        k = len(node_strategies(net, s, cap=limit))
        total *= k
        if limit is not None and total > limit:
            return total
    return total


class ProfileSpace:
    """Cartesian product of per-node strategy lists, node 0 most significant."""

    def __init__(self, net: CachingNetwork, limit: int | None = DEFAULT_LIMIT):
        self.net = net
        if limit is not None:
            size = space_size(net, limit)
            if size > limit:
                raise SearchLimitError(size, limit)
        self.strategies = [node_strategies(net, s) for s in range(net.n_nodes)]
        self.shape = tuple(len(st) for st in self.strategies)
        self.size = prod(self.shape)
        self._tables = []
        for st in self.strategies:
            t = np.zeros((len(st), net.n_items), dtype=bool)
            for k, items in enumerate(st):
                t[k, list(items)] = True
            self._tables.append(t)

    def batch(self, start: int, stop: int) -> np.ndarray:
        idx = np.unravel_index(np.arange(start, stop), self.shape)
        X = np.empty((stop - start, self.net.n_nodes, self.net.n_items), dtype=bool)
        for s, t in enumerate(self._tables):
            X[:, s, :] = t[idx[s]]
        return X

    def batches(self, chunk: int = 50_000):
        for start in range(0, self.size, chunk):
            stop = min(self.size, start + chunk)
            yield start, self.batch(start, stop)
