#!/usr/bin/env python3
# Copyright 2026 The kgad Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Build a WN18RR-style triple file from raw WordNet data files.

Keeps the eleven WN18RR relation types between synsets, then takes a
deterministic connected subsample: entities are visited breadth-first from a
fixed root over the undirected graph, and the induced triples are collected
until the requested count is reached.

Usage: prepare_wordnet.py <wordnet dict dir> <out.tsv> [--triples 10000]

The dict directory is the one shipped in the npm package `wordnet-db`
(`npm pack wordnet-db`, WordNet 3.1).
"""

import argparse
import collections
import os

RELATIONS = {
    "@": "_hypernym",
    "@i": "_instance_hypernym",
    "+": "_derivationally_related_form",
    "^": "_also_see",
    "%m": "_member_meronym",
    "%p": "_has_part",
    ";c": "_synset_domain_topic_of",
    ";u": "_member_of_domain_usage",
    ";r": "_member_of_domain_region",
    "$": "_verb_group",
    "&": "_similar_to",
}

FILES = {"n": "data.noun", "v": "data.verb", "a": "data.adj", "r": "data.adv"}


def parse(dict_dir):
    names = {}
    edges = []
    for pos, fname in FILES.items():
        with open(os.path.join(dict_dir, fname), encoding="latin-1") as f:
            for line in f:
                if line.startswith("  "):
                    continue
                fields = line.split(" | ")[0].split()
                offset = fields[0]
                w_cnt = int(fields[3], 16)
                lemma = fields[4].lower()
                i = 4 + 2 * w_cnt
                p_cnt = int(fields[i])
                i += 1
                key = pos + offset
                names[key] = f"{lemma}.{pos}.{offset}"
                for _ in range(p_cnt):
                    sym, target, tpos = fields[i], fields[i + 1], fields[i + 2]
                    i += 4
                    rel = RELATIONS.get(sym)
                    if rel is None:
                        continue
                    tpos = "a" if tpos == "s" else tpos
                    edges.append((key, rel, tpos + target))
    return names, edges


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dict_dir")
    ap.add_argument("out")
    ap.add_argument("--triples", type=int, default=10000)
    ap.add_argument("--root", default="n00001740")
    args = ap.parse_args()

    names, edges = parse(args.dict_dir)
    edges = sorted(set(e for e in edges if e[0] != e[2]))
    adj = collections.defaultdict(list)
    for h, _, t in edges:
        adj[h].append(t)
        adj[t].append(h)
    for k in adj:
        adj[k] = sorted(set(adj[k]))

    # Breadth-first entity order; a triple becomes available once both ends are visited.
    by_entity = collections.defaultdict(list)
    for e in edges:
        by_entity[e[0]].append(e)
        by_entity[e[2]].append(e)
    visited = {args.root}
    queue = collections.deque([args.root])
    chosen = []
    seen = set()
    while queue and len(chosen) < args.triples:
        u = queue.popleft()
        for e in by_entity[u]:
            other = e[2] if e[0] == u else e[0]
            if other in visited and e not in seen:
                seen.add(e)
                chosen.append(e)
                if len(chosen) == args.triples:
                    break
        for v in adj[u]:
            if v not in visited:
                visited.add(v)
                queue.append(v)

    with open(args.out, "w", encoding="utf-8") as f:
        f.write(f"# WordNet 3.1, WN18RR relation set, BFS subsample from {names[args.root]}\n")
        for h, r, t in chosen:
            f.write(f"{names[h]}\t{r}\t{names[t]}\n")

    ents = {x for h, _, t in chosen for x in (h, t)}
    rels = collections.Counter(r for _, r, _ in chosen)
    print(f"full graph: {len(edges)} triples; wrote {len(chosen)} triples, "
          f"{len(ents)} entities, {len(rels)} relations")
    for r, c in rels.most_common():
        print(f"  {r}: {c}")


if __name__ == "__main__":
    main()
