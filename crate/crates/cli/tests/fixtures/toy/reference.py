#!/usr/bin/env python3
"""Independent reference for the toy fixture.

Recomputes every pipeline artifact from the fixture inputs with plain
Python and writes them to expected/.  Communities are found by exhaustive
search over set partitions, and the script aborts if an optimum is not
unique, so the expected files do not depend on any heuristic.

Usage: python3 reference.py
"""

import hashlib
import json
import math
import os
import unicodedata
from collections import deque

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "expected")

# Mirrors citescope.toml.
DEPTH = 2
PAGE_SIZE = 2
RNG_SEED = 42
RESOLUTION = 1.0
THRESHOLD = 0.01
TOP_K = 5
INTER_CITATION_COMMUNITIES = 5

# Hand-assigned title languages.
LANGUAGES = {
    "The new science of cities": "en",
    "Cities and complexity": "en",
    "Les villes et la dynamique des systèmes urbains": "fr",
    "Urban scaling laws and the evolution of city systems": "en",
    "Dinámica de los sistemas de ciudades en América Latina": "es",
    "A theory of urban growth and city size distributions": "en",
    "Modelling the spatial interaction of cities": "en",
    "Die Entwicklung der europäischen Städtesysteme": "de",
    "Simulating urban transitions with agent based models": "en",
    "城市体系的演化与空间结构": "zh",
    "Evolução das redes urbanas no Brasil": "pt",
    "Hierarchy and diversity in national urban systems": "en",
}


def num(x):
    s = "%.10f" % x
    return "0.0000000000" if s == "-0.0000000000" else s


def rows(path):
    with open(path, encoding="utf-8") as f:
        lines = [l.rstrip("\n") for l in f if not l.startswith("#") and l.strip()]
    head = lines[0].split("\t")
    return [dict(zip(head, l.split("\t"))) for l in lines[1:]]


def norm_title(t):
    t = "".join(c for c in unicodedata.normalize("NFD", t) if not unicodedata.combining(c))
    t = "".join(c if c.isalnum() else " " for c in t.lower())
    return " ".join(t.split())


# ---------------------------------------------------------------- inputs

with open(os.path.join(HERE, "citescope.toml"), "rb") as f:
    HASH = hashlib.sha256(f.read()).hexdigest()
HEADER = "# config_hash=%s\n" % HASH

files = {}


def table(name, text):
    files[name] = HEADER + text


snap_nodes = {r["id"]: r for r in rows(os.path.join(HERE, "snapshot/nodes.tsv"))}
snap_edges = [(r["citing_id"], r["cited_id"]) for r in rows(os.path.join(HERE, "snapshot/edges.tsv"))]
citers_of = {i: sorted(u for u, v in snap_edges if v == i) for i in snap_nodes}

with open(os.path.join(HERE, "exclusions.txt"), encoding="utf-8") as f:
    excluded = {l.strip() for l in f if l.strip() and not l.startswith("#")}

records = []  # [raw_key, title, authors, year, doi, [tags]]
by_key = {}
for r in rows(os.path.join(HERE, "seeds.tsv")):
    if r["raw_key"] in excluded:
        continue
    key = (norm_title(r["title"]), r["year"])
    if key in by_key:
        tags = by_key[key][5]
        if r["chapter_tag"] not in tags:
            tags.append(r["chapter_tag"])
        continue
    rec = [r["raw_key"], r["title"], r["authors"], r["year"], r.get("doi", ""), [r["chapter_tag"]]]
    by_key[key] = rec
    records.append(rec)

text = "raw_key\tchapter_tag\ttitle\tauthors\tyear\tdoi\n"
for raw, title, authors, year, doi, tags in records:
    for tag in sorted(tags):
        text += "\t".join([raw, tag, title, authors, year, doi]) + "\n"
table("corpus.tsv", text)

# ---------------------------------------------------------------- crawl


def resolve(rec):
    doi = rec[4]
    if doi and "doi:" + doi in snap_nodes:
        return "doi:" + doi
    for i in sorted(snap_nodes):
        if norm_title(snap_nodes[i]["title"]) == norm_title(rec[1]) and snap_nodes[i]["year"] == rec[3]:
            return i
    return None


resolved = [(rec, resolve(rec)) for rec in records]
text = "raw_key\tchapter_tag\tpaper_id\n"
for rec, pid in resolved:
    for tag in sorted(rec[5]):
        text += "%s\t%s\t%s\n" % (rec[0], tag, pid or "")
seeds = sorted({pid for _, pid in resolved if pid})

depth = {s: 0 for s in seeds}
edges = set()
requests = 0
frontier = list(seeds)
for level in range(DEPTH):
    nxt = []
    for node in frontier:
        cs = citers_of[node]
        requests += max(1, math.ceil(len(cs) / PAGE_SIZE))
        for c in cs:
            edges.add((c, node))
            if c not in depth:
                depth[c] = level + 1
                nxt.append(c)
    frontier = nxt
net_nodes = sorted(depth)
net_edges = sorted(edges)
expanded = {n for n in net_nodes if depth[n] < DEPTH}
table("seeds.tsv", text)


def graph_tables(prefix, nodes, es, undirected=False):
    t = "id\ttitle\tyear\tdepth\tfully_resolved\n"
    for n in nodes:
        s = snap_nodes[n]
        t += "%s\t%s\t%s\t%d\t%s\n" % (n, s["title"], s["year"], depth[n], "true" if n in expanded else "false")
    table(prefix + "/nodes.tsv", t)
    t = "node_a\tnode_b\n" if undirected else "citing_id\tcited_id\n"
    t += "".join("%s\t%s\n" % e for e in es)
    table(prefix + "/edges.tsv", t)


def completeness(nodes, es):
    cited = {v for u, v in es if u in nodes and v in nodes}
    return 1.0 if not cited else sum(1 for v in cited if v in expanded) / len(cited)


graph_tables("network", net_nodes, net_edges)
files["crawl_stats.json"] = (
    "{\n"
    + ",\n".join(
        '  "%s": %s' % kv
        for kv in [
            ("references", len(records)),
            ("references_resolved", sum(1 for _, p in resolved if p)),
            ("seeds", len(seeds)),
            ("nodes", len(net_nodes)),
            ("edges", len(net_edges)),
            ("nodes_depth_0", sum(1 for n in net_nodes if depth[n] == 0)),
            ("nodes_depth_1", sum(1 for n in net_nodes if depth[n] == 1)),
            ("nodes_depth_2", sum(1 for n in net_nodes if depth[n] == 2)),
            ("requests_issued", requests),
            ("budget_exhausted", "false"),
            ("completeness", num(completeness(set(net_nodes), net_edges))),
        ]
    )
    + "\n}\n"
)

# ---------------------------------------------------------------- core


def weak_components(nodes, es):
    adj = {n: set() for n in nodes}
    for u, v in es:
        adj[u].add(v)
        adj[v].add(u)
    seen, comps = set(), []
    for n in nodes:
        if n in seen:
            continue
        comp, stack = set(), [n]
        while stack:
            x = stack.pop()
            if x not in comp:
                comp.add(x)
                stack.extend(adj[x] - comp)
        seen |= comp
        comps.append(comp)
    return comps


comps = sorted(weak_components(net_nodes, net_edges), key=len, reverse=True)
assert len(comps) == 1 or len(comps[0]) > len(comps[1]), "largest component is not unique"
lcc = comps[0]
comp_nodes = sorted(lcc)
comp_edges = [e for e in net_edges if e[0] in lcc and e[1] in lcc]
graph_tables("component", comp_nodes, comp_edges)

alive = set(comp_nodes)
while True:
    deg = {n: 0 for n in alive}
    for u, v in comp_edges:
        if u in alive and v in alive:
            deg[u] += 1
            deg[v] += 1
    low = {n for n in alive if deg[n] < 2}
    if not low:
        break
    alive -= low
core_nodes = sorted(alive)
core_edges = [e for e in comp_edges if e[0] in alive and e[1] in alive]
graph_tables("core", core_nodes, core_edges)

sym_edges = sorted({tuple(sorted(e)) for e in core_edges})
graph_tables("symmetric", core_nodes, sym_edges, undirected=True)

# ---------------------------------------------------------------- communities


def set_partitions(n):
    """Restricted growth strings of length n."""
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield list(a)
            return
        for v in range(m + 2):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    if n == 0:
        yield []
    else:
        yield from rec(1, 0)


def q_undirected(nodes, es, labels):
    m = len(es)
    k = {n: 0 for n in nodes}
    for u, v in es:
        k[u] += 1
        k[v] += 1
    q = 0.0
    for i in nodes:
        for j in nodes:
            if labels[i] != labels[j]:
                continue
            a = sum(1 for e in es if e == (i, j) or e == (j, i)) if i != j else 0
            q += a - RESOLUTION * k[i] * k[j] / (2 * m)
    return q / (2 * m)


def q_directed(nodes, es, labels):
    m = len(es)
    kout = {n: sum(1 for u, _ in es if u == n) for n in nodes}
    kin = {n: sum(1 for _, v in es if v == n) for n in nodes}
    q = 0.0
    for i in nodes:
        for j in nodes:
            if labels[i] == labels[j]:
                q += (1 if (i, j) in es else 0) - kout[i] * kin[j] / m
    return q / m


def canonical(nodes, labels):
    first, size = {}, {}
    for idx, n in enumerate(nodes):
        first.setdefault(labels[n], idx)
        size[labels[n]] = size.get(labels[n], 0) + 1
    order = sorted(first, key=lambda l: (-size[l], first[l]))
    rank = {l: r for r, l in enumerate(order)}
    return {n: rank[labels[n]] for n in nodes}


def best_partition(nodes, es):
    best, best_q, ties = None, -math.inf, 0
    for rgs in set_partitions(len(nodes)):
        labels = dict(zip(nodes, rgs))
        q = q_undirected(nodes, es, labels)
        if q > best_q + 1e-12:
            best, best_q, ties = labels, q, 1
        elif abs(q - best_q) <= 1e-12:
            ties += 1
    assert ties == 1, "modularity optimum of %s is not unique" % nodes
    return canonical(nodes, best), best_q


part, q_und = best_partition(core_nodes, sym_edges)
q_dir = q_directed(core_nodes, set(core_edges), part)
files["partition.tsv"] = (
    HEADER
    + "# resolution=%s rng_seed=%d\n" % ("%g" % RESOLUTION, RNG_SEED)
    + "node_id\tcommunity_label\n"
    + "".join("%s\t%d\n" % (n, part[n]) for n in core_nodes)
)

k_comm = max(part.values()) + 1
members = {l: [n for n in core_nodes if part[n] == l] for l in range(k_comm)}
degree = {n: sum(1 for e in core_edges if n in e) for n in core_nodes}
total = len(core_nodes)
order = sorted(range(k_comm), key=lambda l: (-len(members[l]), l))
main, cum = set(order), 0.0
for l in reversed(order):
    cum += len(members[l]) / total
    if cum >= THRESHOLD:
        break
    main.discard(l)
text = "label\tsize\trelative_size\tmain\ttop_members\n"
for l in order:
    top = sorted(members[l], key=lambda n: (-degree[n], core_nodes.index(n)))[:TOP_K]
    text += "%d\t%d\t%s\t%s\t%s\n" % (
        l,
        len(members[l]),
        num(len(members[l]) / total),
        "true" if l in main else "false",
        "; ".join("%s [%d]" % (n, degree[n]) for n in top),
    )
table("communities.tsv", text)
files["modularity.json"] = (
    "{\n"
    + ",\n".join(
        '  "%s": %s' % kv
        for kv in [
            ("communities", k_comm),
            ("main_communities", len(main)),
            ("directed_modularity", num(q_dir)),
            ("undirected_modularity", num(q_und)),
            ("resolution", num(RESOLUTION)),
            ("rng_seed", RNG_SEED),
            ("weighted", "false"),
        ]
    )
    + "\n}\n"
)

rows_sub = "community\tnode_id\tsub_community\n"
rows_sum = "community\tsize\tsub_communities\tmodularity\n"
for l in sorted(main):
    mem = members[l]
    es = [e for e in sym_edges if e[0] in mem and e[1] in mem]
    if es:
        sub, q = best_partition(mem, es)
        qs = num(q)
    else:
        sub, qs = {n: 0 for n in mem}, "NA"
    rows_sub += "".join("%d\t%s\t%d\n" % (l, n, sub[n]) for n in mem)
    rows_sum += "%d\t%d\t%d\t%s\n" % (l, len(mem), max(sub.values()) + 1, qs)
table("subcommunities.tsv", rows_sub)
table("subcommunities_summary.tsv", rows_sum)

# ---------------------------------------------------------------- metrics


def matrix(name, row_labels, col_labels, values):
    csv = "," + ",".join(col_labels) + "\n"
    long = "row\tcol\tvalue\n"
    for r, vals in zip(row_labels, values):
        csv += r + "," + ",".join(num(v) for v in vals) + "\n"
        long += "".join("%s\t%s\t%s\n" % (r, c, num(v)) for c, v in zip(col_labels, vals))
    table("metrics/%s.csv" % name, csv)
    table("metrics/%s_long.tsv" % name, long)


sizes = sorted((len(members[l]) for l in main), reverse=True)
if len(sizes) >= 2:
    n = len(sizes)
    xs = [math.log(r + 1) for r in range(n)]
    ys = [math.log(s) for s in sizes]
    mx, my = sum(xs) / n, sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    syy = sum((y - my) ** 2 for y in ys)
    b = sxy / sxx
    a = my - b * mx
    ssr = sum((y - a - b * x) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if syy == 0 else 1 - ssr / syy
    se = 0.0 if n == 2 else math.sqrt(ssr / (n - 2) / sxx)
    adj = r2 if n == 2 else 1 - (1 - r2) * (n - 1) / (n - 2)
    files["metrics/rank_size.json"] = (
        "{\n"
        + ",\n".join(
            '  "%s": %s' % kv
            for kv in [
                ("communities", n),
                ("exponent", num(b)),
                ("std_error", num(se)),
                ("intercept", num(a)),
                ("r2", num(r2)),
                ("adjusted_r2", num(adj)),
            ]
        )
        + "\n}\n"
    )

selected = list(range(min(INTER_CITATION_COMMUNITIES, k_comm)))
vals = []
for r in selected:
    out = [(u, v) for u, v in core_edges if part[u] == r]
    counts = [sum(1 for _, v in out if part[v] == c) for c in selected]
    counts.append(len(out) - sum(counts))
    vals.append([100.0 * c / len(out) for c in counts])
matrix("inter_citation", [str(l) for l in selected], [str(l) for l in selected] + ["Others"], vals)


def backward_closure(nodes, es, start):
    seen, queue = set(start), deque(start)
    while queue:
        x = queue.popleft()
        for u, v in es:
            if v == x and u in nodes and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


chapters = {}
for rec, pid in resolved:
    for tag in rec[5]:
        chapters.setdefault(tag, set())
        if pid:
            chapters[tag].add(pid)
text = "chapter\tseeds\tseeds_in_core\tnetwork_size\tnetwork_completeness\tcore_size\n"
core_sets = []
for tag in sorted(chapters):
    s = chapters[tag]
    net_sub = backward_closure(set(net_nodes), net_edges, [x for x in s if x in depth])
    in_core = [x for x in s if x in alive]
    core_sub = backward_closure(alive, core_edges, in_core)
    text += "%s\t%d\t%d\t%d\t%s\t%d\n" % (
        tag, len(s), len(in_core), len(net_sub), num(completeness(net_sub, net_edges)), len(core_sub)
    )
    if core_sub:
        core_sets.append((tag, core_sub))
table("metrics/chapter_subnetworks.tsv", text)

tags = [t for t, _ in core_sets]
matrix(
    "jaccard",
    tags,
    tags,
    [[2 * len(a & b) / (len(a) + len(b)) for _, b in core_sets] for _, a in core_sets],
)

comp_rows, comp_vals = [], []
for tag, sub in core_sets:
    counted = [n for n in sub if depth[n] == 1]
    if counted:
        comp_rows.append(tag)
        comp_vals.append([sum(1 for n in counted if part[n] == c) / len(counted) for c in range(k_comm)])
cols = [str(c) for c in range(k_comm)]
matrix("composition", comp_rows, cols, comp_vals)
z = [[0.0] * k_comm for _ in comp_rows]
for c in range(k_comm):
    col = [r[c] for r in comp_vals]
    mean = sum(col) / len(col)
    sd = math.sqrt(sum((x - mean) ** 2 for x in col) / len(col))
    for i, x in enumerate(col):
        z[i][c] = 0.0 if sd <= 1e-12 * max(abs(mean), 1) else (x - mean) / sd
matrix("composition_znorm", comp_rows, cols, z)
table(
    "metrics/herfindahl.tsv",
    "chapter\therfindahl\n" + "".join("%s\t%s\n" % (t, num(math.fsum(p * p for p in r))) for t, r in zip(comp_rows, comp_vals)),
)

langs = [LANGUAGES[snap_nodes[n]["title"]] for n in net_nodes]
table(
    "metrics/languages.tsv",
    "language\tshare\n" + "".join("%s\t%s\n" % (c, num(langs.count(c) / len(langs))) for c in sorted(set(langs))),
)

# ---------------------------------------------------------------- export


def xml_escape(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


g = '<?xml version="1.0" encoding="UTF-8"?>\n'
g += "<!-- config_hash=%s -->\n" % HASH
g += '<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n'
for key, typ in [("community", "int"), ("depth", "int"), ("fully_resolved", "boolean"), ("title", "string"), ("year", "int")]:
    g += '  <key id="%s" for="node" attr.name="%s" attr.type="%s"/>\n' % (key, key, typ)
g += '  <graph id="G" edgedefault="directed">\n'
for n in core_nodes:
    g += '    <node id="%s">\n' % xml_escape(n)
    for key, val in [
        ("community", part[n]),
        ("depth", depth[n]),
        ("fully_resolved", "true" if n in expanded else "false"),
        ("title", xml_escape(snap_nodes[n]["title"])),
        ("year", snap_nodes[n]["year"]),
    ]:
        g += '      <data key="%s">%s</data>\n' % (key, val)
    g += "    </node>\n"
for u, v in core_edges:
    g += '    <edge source="%s" target="%s"/>\n' % (xml_escape(u), xml_escape(v))
g += "  </graph>\n</graphml>\n"
files["export/network.graphml"] = g
files["export/nodes.tsv"] = files["core/nodes.tsv"]
files["export/edges.tsv"] = files["core/edges.tsv"]

for name, content in files.items():
    path = os.path.join(OUT, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(content)
print("wrote %d files to %s" % (len(files), OUT))
