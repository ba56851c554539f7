"""Independent reference implementations used as test oracles.

Everything here is written as plain straight-line Python (no calls into the
package internals) so it can disagree with the production code.
"""

import math


def brute_clustering(g) -> float:
    """Average local clustering by O(V^3) triple counting."""
    v = g.node_count
    adj = [[False] * v for _ in range(v)]
    for a in range(v):
        for b in g.neighbors(a):
            adj[a][int(b)] = True
    total = 0.0
    for a in range(v):
        nbrs = [u for u in range(v) if adj[a][u]]
        d = len(nbrs)
        if d < 2:
            continue
        links = 0
        for i in range(d):
            for j in range(i + 1, d):
                if adj[nbrs[i]][nbrs[j]]:
                    links += 1
        total += 2 * links / (d * (d - 1))
    return total / v


# --- straight-line re-implementation of the cycle-cost laws -----------------

_SCHEME_ROWS = {
    # scheme: (t_fa, t_n, t_gc, t_fc) as functions of (V, F, PE)
    "a": lambda v, f, pe: (min(pe, f), 1, 1, min(pe, f)),
    "b": lambda v, f, pe: (min(2, f), max(f // 2, 1), 1, min(2, f)),
    "c": lambda v, f, pe: (min(8, f), max(f // 2, 1), 1, min(8, f)),
    "d": lambda v, f, pe: (1, 1, 1, 1),
    "e": lambda v, f, pe: (min(18, f), max(f // 2, 1), 1, min(18, f)),
    "f": lambda v, f, pe: (1, min(18, v), 1, 1),
    "g": lambda v, f, pe: (min(18, f), 1, 1, min(85, f)),
    "h": lambda v, f, pe: (1, min(18, v), 1, min(85, f)),
}


def ref_resolve(scheme, v, f, pe):
    t_fa, t_n, t_gc, t_fc = _SCHEME_ROWS[scheme](v, f, pe)
    t_va = min(max(pe // (t_fa * t_n), 1), v)
    t_vc = min(max(pe // (t_gc * t_fc), 1), v)
    return {"t_va": t_va, "t_fa": t_fa, "t_n": t_n, "t_vc": t_vc, "t_gc": t_gc, "t_fc": t_fc}


def _node_cost(degree, f, t):
    work = degree if degree > 0 else 1
    return math.ceil(work / t["t_n"]) * math.ceil(f / t["t_fa"])


def ref_group_costs(degrees, f, t):
    costs = []
    v = len(degrees)
    i = 0
    while i < v:
        group = degrees[i : i + t["t_va"]]
        costs.append(max(_node_cost(d, f, t) for d in group))
        i += t["t_va"]
    return costs


def ref_aggregation(degrees, f, t):
    return sum(ref_group_costs(degrees, f, t))


def ref_combination(v, f, g_out, t):
    return math.ceil(v / t["t_vc"]) * math.ceil(f / t["t_fc"]) * math.ceil(g_out / t["t_gc"])


def ref_seq(degrees, f, g_out, t, accel):
    v = len(degrees)
    total = ref_aggregation(degrees, f, t) + ref_combination(v, f, g_out, t)
    words = v * f
    if words * accel.bytes_per_word > accel.global_buffer_bytes:
        total += 2 * math.ceil(words / accel.dram_words_per_cycle)
    return total


def ref_sp(degrees, f, g_out, t):
    v = len(degrees)
    total = 0
    i = 0
    while i < v:
        group = degrees[i : i + t["t_va"]]
        agg = max(_node_cost(d, f, t) for d in group)
        comb = math.ceil(len(group) / t["t_vc"]) * math.ceil(f / t["t_fc"]) * math.ceil(
            g_out / t["t_gc"]
        )
        total += agg + comb
        i += t["t_va"]
    return total


def ref_pp(degrees, f, g_out, scheme, accel):
    v = len(degrees)
    pe = accel.pe_count
    best = None
    for k in range(1, 8):
        budget_a = pe * k // 8
        budget_c = pe - budget_a
        if budget_a < 1 or budget_c < 1:
            continue
        ta = ref_resolve(scheme, v, f, budget_a)
        tc = ref_resolve(scheme, v, f, budget_c)
        if ta["t_fa"] * ta["t_n"] > budget_a or tc["t_gc"] * tc["t_fc"] > budget_c:
            continue
        agg = ref_group_costs(degrees, f, ta)
        comb = []
        i = 0
        while i < v:
            size = min(ta["t_va"], v - i)
            comb.append(
                math.ceil(size / tc["t_vc"])
                * math.ceil(f / tc["t_fc"])
                * math.ceil(g_out / tc["t_gc"])
            )
            i += ta["t_va"]
        span = 0
        for cut in range(len(agg)):
            cand = sum(agg[: cut + 1]) + sum(comb[cut:])
            span = max(span, cand)
        if best is None or span < best:
            best = span
    if best is None:
        return ref_seq(degrees, f, g_out, ref_resolve(scheme, v, f, pe), accel)
    return best


def ref_latency(degrees, f, g_out, scheme, inter_phase, accel):
    t = ref_resolve(scheme, len(degrees), f, accel.pe_count)
    if inter_phase == "seq":
        return ref_seq(degrees, f, g_out, t, accel)
    if inter_phase == "sp":
        return ref_sp(degrees, f, g_out, t)
    return ref_pp(degrees, f, g_out, scheme, accel)
