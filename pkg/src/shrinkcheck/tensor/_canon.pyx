# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled canonical labeling kernel; same contract as ``_canon_py``."""
from itertools import permutations


cdef list _slot_perms(tuple factor):
    cdef int group = factor[1]
    cdef tuple head = factor[2:2 + group]
    cdef tuple tail = factor[2 + group:]
    if group < 2:
        return [head + tail]
    return [p + tail for p in set(permutations(head))]


cdef tuple _encode(tuple fac, tuple idx, dict mapping, int nfree, list out_map):
    cdef list toks = [fac[0], fac[1]]
    cdef dict m2 = mapping
    cdef int fresh = nfree + len(mapping)
    cdef bint copied = False
    cdef int c
    for c in idx:
        if c < nfree:
            toks.append(c)
        elif c in m2:
            toks.append(m2[c])
        else:
            if not copied:
                m2 = dict(mapping)
                copied = True
            m2[c] = fresh
            toks.append(fresh)
            fresh += 1
    out_map.append(m2)
    return tuple(toks)


def canon_factors(factors, int nfree):
    cdef tuple remaining = tuple(sorted(factors))
    cdef dict states = {(remaining, frozenset()): (remaining, {})}
    cdef list out = []
    cdef object best
    cdef dict nxt
    cdef tuple rem, rest, fac, enc, idx
    cdef dict mapping, m2
    cdef set seen
    cdef int pos
    cdef list holder
    while remaining:
        best = None
        nxt = {}
        for rem, mapping in states.values():
            seen = set()
            for pos in range(len(rem)):
                fac = rem[pos]
                if fac in seen:
                    continue
                seen.add(fac)
                rest = rem[:pos] + rem[pos + 1:]
                for idx in _slot_perms(fac):
                    holder = []
                    enc = _encode(fac, idx, mapping, nfree, holder)
                    m2 = holder[0]
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
