"""Sparse exact linear algebra over the rationals.

Rows are sparse dicts {column index: coefficient}.  Everything is exact;
the reduced row echelon form is canonical, so results are deterministic
for a deterministic row order.
"""

from __future__ import annotations

from typing import Dict, Iterable, List


def rref(rows: Iterable[Dict[int, object]]) -> Dict[int, Dict[int, object]]:
    """Reduced row echelon form; returns {pivot column: normalized row}.

    Each returned row has coefficient 1 at its pivot column and support
    only on non-pivot columns elsewhere.
    """
    pivots: Dict[int, Dict[int, object]] = {}
    for row in rows:
        r = dict(row)
        while True:
            hit = None
            for c in r:
                if c in pivots:
                    hit = c
                    break
            if hit is None:
                break
            factor = r.pop(hit)
            for c2, v in pivots[hit].items():
                if c2 == hit:
                    continue
                nv = r.get(c2, 0) - factor * v
                if nv == 0:
                    r.pop(c2, None)
                else:
                    r[c2] = nv
        if not r:
            continue
        pc = min(r)
        inv = r[pc]
        r = {c: v / inv for c, v in r.items()}
        for prow in pivots.values():
            if pc in prow:
                f = prow.pop(pc)
                for c2, v in r.items():
                    if c2 == pc:
                        continue
                    nv = prow.get(c2, 0) - f * v
                    if nv == 0:
                        prow.pop(c2, None)
                    else:
                        prow[c2] = nv
        pivots[pc] = r
    return pivots


def nullspace(rows: Iterable[Dict[int, object]], ncols: int) -> List[Dict[int, object]]:
    """Basis of the solution space of the homogeneous system (sparse dicts).

    One basis vector per free column, with a 1 in that column; ordering
    follows ascending free-column index.
    """
    pivots = rref(rows)
    basis = []
    for free_col in range(ncols):
        if free_col in pivots:
            continue
        vec = {free_col: 1}
        for pc, prow in pivots.items():
            v = prow.get(free_col)
            if v is not None and v != 0:
                vec[pc] = -v
        basis.append(vec)
    return basis
