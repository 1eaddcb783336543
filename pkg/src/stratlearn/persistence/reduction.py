"""Standard persistence by column reduction of a single filtration.

Kept independent of the rank-function engine so the two can be checked
against each other.
"""
from __future__ import annotations

import math
from typing import Sequence

from .diagrams import DiagramPoint, PersistenceDiagram


def filtration_order(dims: Sequence[int], births: Sequence[float]) -> list[int]:
    return sorted(range(len(dims)), key=lambda c: (births[c], dims[c], c))


def reduction_diagram(dims: Sequence[int], faces: Sequence[Sequence[int]],
                      births: Sequence[float], max_dim: int | None = None) -> PersistenceDiagram:
    """Persistence pairs of the sublevel filtration given by ``births``.

    Cells with infinite birth are left out. Zero-length pairs are dropped.
    """
    live = [c for c in range(len(dims)) if math.isfinite(births[c])]
    order = filtration_order([dims[c] for c in live], [births[c] for c in live])
    order = [live[k] for k in order]
    pos = {c: k for k, c in enumerate(order)}
    lows: dict[int, int] = {}
    paired: set[int] = set()
    pairs = []
    for c in order:
        col = 0
        for f in faces[c]:
            col ^= 1 << pos[f]
        while col:
            low = col.bit_length() - 1
            if low not in lows:
                break
            col ^= lows[low]
        if col:
            low = col.bit_length() - 1
            lows[low] = col
            b = order[low]
            paired.update((b, c))
            pairs.append((dims[b], births[b], births[c]))
    for c in order:
        if c not in paired:
            pairs.append((dims[c], births[c], math.inf))
    if max_dim is None:
        max_dim = max(dims, default=0)
    entries = [DiagramPoint(d, b, x) for d, b, x in pairs if x > b and d <= max_dim]
    return PersistenceDiagram(entries)
