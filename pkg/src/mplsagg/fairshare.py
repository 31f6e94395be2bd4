"""Max-min fair rates by progressive filling.

Flows with identical link sets always receive identical max-min rates, so the
solver works on *classes* (a path plus a flow count). The engine keeps its
active flows in that form; :func:`fair_shares` groups arbitrary flows first.
"""

from __future__ import annotations

from typing import Hashable, Mapping, Sequence

import numpy as np

from .topology import ContractViolation

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure-python fallback
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


@njit(cache=True)
def water_fill(capacity, counts, links, lengths, rates, loads):
    """Fill ``rates`` (per flow, by class) and ``loads`` (per link).

    ``links[c, :lengths[c]]`` lists the links of class ``c``; classes with
    ``counts[c] <= 0`` are ignored and get rate 0. Each round saturates the
    links with the smallest fair share and freezes every class crossing them.
    """
    nlinks = capacity.shape[0]
    nclasses = counts.shape[0]
    rem = capacity.copy()
    users = np.zeros(nlinks)
    deg = np.zeros(nlinks + 1, dtype=np.int64)
    frozen = np.zeros(nclasses, dtype=np.bool_)
    for c in range(nclasses):
        rates[c] = 0.0
        if counts[c] > 0:
            for j in range(lengths[c]):
                l = links[c, j]
                users[l] += counts[c]
                deg[l + 1] += 1
        else:
            frozen[c] = True
    for l in range(nlinks):
        deg[l + 1] += deg[l]
    # classes crossing each link, CSR style
    member = np.empty(deg[nlinks], dtype=np.int64)
    fill = deg[:nlinks].copy()
    for c in range(nclasses):
        if counts[c] > 0:
            for j in range(lengths[c]):
                l = links[c, j]
                member[fill[l]] = c
                fill[l] += 1
    used = np.empty(nlinks, dtype=np.int64)
    nused = 0
    for l in range(nlinks):
        if users[l] > 0:
            used[nused] = l
            nused += 1
    while nused > 0:
        best = np.inf
        for i in range(nused):
            l = used[i]
            share = rem[l] / users[l]
            if share < best:
                best = share
        if best < 0.0:
            best = 0.0
        limit = best * (1.0 + 1e-12) + 1e-300
        for i in range(nused):
            l = used[i]
            if users[l] > 0 and rem[l] / users[l] <= limit:
                for k in range(deg[l], deg[l + 1]):
                    c = member[k]
                    if frozen[c]:
                        continue
                    frozen[c] = True
                    rates[c] = best
                    for j in range(lengths[c]):
                        m = links[c, j]
                        rem[m] -= counts[c] * best
                        users[m] -= counts[c]
                users[l] = 0.0
        k = 0
        for i in range(nused):
            l = used[i]
            if users[l] > 0.0:
                used[k] = l
                k += 1
        nused = k
    for l in range(nlinks):
        loads[l] = 0.0
    for c in range(nclasses):
        if counts[c] > 0:
            for j in range(lengths[c]):
                loads[links[c, j]] += counts[c] * rates[c]
    return loads


def fair_shares(flows: Mapping[Hashable, Sequence[Hashable]],
                capacity: Mapping[Hashable, float] | Sequence[float]) -> dict[Hashable, float]:
    """Max-min fair rate of every flow given its path and link capacities.

    ``capacity`` is either a sequence indexed by link number or a mapping from
    link key to capacity.
    """
    if isinstance(capacity, Mapping):
        keys = list(capacity)
        pos = {k: i for i, k in enumerate(keys)}
        cap = np.array([float(capacity[k]) for k in keys])
    else:
        cap = np.asarray(capacity, dtype=float)
        pos = {i: i for i in range(len(cap))}
    classes: dict[tuple, list] = {}
    for fid, path in flows.items():
        if not path:
            raise ContractViolation(f"flow {fid!r} has an empty path")
        try:
            idx = tuple(pos[l] for l in path)
        except (KeyError, TypeError):
            raise ContractViolation(f"flow {fid!r} uses an unknown link") from None
        if len(set(idx)) != len(idx):
            raise ContractViolation(f"flow {fid!r} path is not loop-free")
        classes.setdefault(idx, []).append(fid)
    if not classes:
        return {}
    paths = list(classes)
    width = max(len(p) for p in paths)
    links = np.zeros((len(paths), width), dtype=np.int64)
    lengths = np.zeros(len(paths), dtype=np.int64)
    counts = np.zeros(len(paths))
    for c, p in enumerate(paths):
        links[c, : len(p)] = p
        lengths[c] = len(p)
        counts[c] = len(classes[p])
    rates = np.zeros(len(paths))
    loads = np.zeros(len(cap))
    water_fill(cap, counts, links, lengths, rates, loads)
    return {fid: float(rates[c]) for c, p in enumerate(paths) for fid in classes[p]}
