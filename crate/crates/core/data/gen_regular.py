#!/usr/bin/env python3
"""Generate a (3,6)-regular parity-check matrix by progressive edge growth.

Each variable node connects, one edge at a time, to the least-loaded check
that is farthest from it in the current graph (ties broken by a seeded RNG),
which keeps short cycles out. Writes alist to stdout.

usage: gen_regular.py N [SEED]
"""
import random
import sys

DV, DC = 3, 6


def reach(v, var_adj, chk_adj):
    """Checks reachable from variable v, by BFS depth; returns the set of
    checks seen and whether the search covered every reachable check."""
    seen_c = set(var_adj[v])
    seen_v = {v}
    frontier = list(var_adj[v])
    while frontier:
        nxt_v = []
        for c in frontier:
            for u in chk_adj[c]:
                if u not in seen_v:
                    seen_v.add(u)
                    nxt_v.append(u)
        nxt_c = []
        for u in nxt_v:
            for c in var_adj[u]:
                if c not in seen_c:
                    seen_c.add(c)
                    nxt_c.append(c)
        if not nxt_c:
            break
        frontier = nxt_c
        yield set(seen_c)
    yield set(seen_c)


def peg(n, seed):
    m = n * DV // DC
    rng = random.Random(seed)
    var_adj = [[] for _ in range(n)]
    chk_adj = [[] for _ in range(m)]
    for v in range(n):
        for k in range(DV):
            open_c = [c for c in range(m) if len(chk_adj[c]) < DC and c not in var_adj[v]]
            if k == 0:
                cands = open_c
            else:
                cands = open_c
                for seen in reach(v, var_adj, chk_adj):
                    far = [c for c in open_c if c not in seen]
                    if not far:
                        break
                    cands = far
            low = min(len(chk_adj[c]) for c in cands)
            best = [c for c in cands if len(chk_adj[c]) == low]
            c = rng.choice(best)
            var_adj[v].append(c)
            chk_adj[c].append(v)
    return var_adj, chk_adj


def alist(n, var_adj, chk_adj):
    out = [f"{n} {len(chk_adj)}", f"{DV} {DC}",
           " ".join(str(len(a)) for a in var_adj), " ".join(str(len(a)) for a in chk_adj)]
    out += [" ".join(str(c + 1) for c in sorted(a)) for a in var_adj]
    out += [" ".join(str(v + 1) for v in sorted(a)) for a in chk_adj]
    return "\n".join(out) + "\n"


if __name__ == "__main__":
    n = int(sys.argv[1])
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    va, ca = peg(n, seed)
    assert all(len(a) == DV for a in va) and all(len(a) == DC for a in ca)
    sys.stdout.write(alist(n, va, ca))
