"""Pure-Python canonical labeling kernel.

A factor is encoded as ``(symcode, group, *idx)`` where the first ``group``
index slots are mutually symmetric.  Index codes below ``nfree`` are free
labels (kept verbatim); codes at or above ``nfree`` are dummies and get
renumbered ``nfree, nfree+1, ...`` in order of first appearance.

The result is the lexicographically least encoded factor sequence over all
factor orderings, symmetric-slot permutations and dummy renamings.  The search
advances one factor at a time and keeps only the branches that tie for the
least next factor, so it is exact and, for the small monomials we see, fast.
"""
from itertools import permutations


def _slot_perms(factor):
    group = factor[1]
    head = factor[2:2 + group]
    tail = factor[2 + group:]
    if group < 2:
        return [head + tail]
    return [p + tail for p in set(permutations(head))]


def canon_factors(factors, nfree):
    remaining = tuple(sorted(factors))
    states = {(remaining, frozenset()): (remaining, {})}
    out = []
    while remaining:
        best = None
        nxt = {}
        for rem, mapping in states.values():
            seen = set()
            for pos, fac in enumerate(rem):
                if fac in seen:
                    continue
                seen.add(fac)
                rest = rem[:pos] + rem[pos + 1:]
                for idx in _slot_perms(fac):
                    m2 = mapping
                    toks = []
                    fresh = nfree + len(mapping)
                    for c in idx:
                        if c < nfree:
                            toks.append(c)
                        elif c in m2:
                            toks.append(m2[c])
                        else:
                            if m2 is mapping:
                                m2 = dict(mapping)
                            m2[c] = fresh
                            toks.append(fresh)
                            fresh += 1
                    enc = (fac[0], fac[1], *toks)
                    if best is None or enc < best:
                        best = enc
                        nxt = {}
                    if enc == best:
                        key = (rest, frozenset(m2.items()))
                        if key not in nxt:
                            nxt[key] = (rest, m2)
        out.append(best)
        states = nxt
        remaining = next(iter(states.values()))[0]
    return tuple(out)
