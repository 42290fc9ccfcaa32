#!/usr/bin/env python3
"""Regenerates the bundled synthetic fixtures under fixtures/.

The output is deterministic (fixed seeds). Run from the repository root:

    python3 tools/generate_fixtures.py

Writes academic.json, movies.json, preference_corpus.json,
mock_completions.json, insight_suite.json and the per-fixture manifests. Manifests are produced
by a separate counting pass over the written files, not from generator state.
"""

import json
import random
from collections import Counter
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

FIRST = ["Ada", "Bruno", "Chen", "Dana", "Elif", "Farid", "Greta", "Hiro",
         "Ines", "Jonas", "Kira", "Liam", "Mara", "Nils", "Omar", "Priya",
         "Quinn", "Rosa", "Sven", "Tara"]
LAST = ["Novak", "Okafor", "Pereira", "Quist", "Ramos", "Sato", "Tanaka",
        "Ueda", "Varga", "Weber", "Xu", "Yilmaz", "Zhou", "Adler", "Berg"]
AFFILIATIONS = ["MIT", "ETH Zurich", "TU Wien", "KAIST", "Inria", "UC Davis"]
CONCEPTS = [
    ("Graph Layout", "visualization"), ("Edge Bundling", "visualization"),
    ("Knowledge Graphs", "semantics"), ("Ontologies", "semantics"),
    ("Clustering", "machine learning"), ("Embeddings", "machine learning"),
    ("Large Language Models", "machine learning"), ("User Studies", "hci"),
    ("Visual Analytics", "visualization"), ("Node Sampling", "graphs"),
    ("Force-Directed Layout", "visualization"), ("Path Analysis", "graphs"),
    ("Entity Linking", "semantics"), ("Question Answering", "nlp"),
    ("Topic Modeling", "nlp"), ("Interaction Design", "hci"),
    ("Scalability", "systems"), ("Graph Databases", "systems"),
    ("Dimensionality Reduction", "machine learning"), ("Evaluation", "hci"),
]
TITLE_HEADS = ["Scalable", "Interactive", "Robust", "Context-Aware",
               "Explainable", "Progressive", "Semantic", "Adaptive"]
VENUES = ["VIS", "EuroVis", "CHI", "KDD", "ISWC"]


def paper_label(i):
    letters = ""
    n = i
    while True:
        letters = chr(ord("A") + n % 26) + letters
        n = n // 26 - 1
        if n < 0:
            break
    return "Paper " + letters


def academic():
    rng = random.Random(20240517)
    nodes, edges = [], []
    authors = []
    used = set()
    while len(authors) < 60:
        name = f"{rng.choice(FIRST)} {rng.choice(LAST)}"
        if name in used:
            continue
        used.add(name)
        aid = f"author:{len(authors):03d}"
        authors.append(aid)
        nodes.append({
            "id": aid, "type": "Author", "label": name,
            "attributes": {
                "h_index": rng.randint(2, 60),
                "affiliation": rng.choice(AFFILIATIONS),
            },
        })
    concepts = []
    for i, (name, field) in enumerate(CONCEPTS):
        cid = f"concept:{i:03d}"
        concepts.append(cid)
        nodes.append({"id": cid, "type": "Concept", "label": name,
                      "attributes": {"field": field}})
    years = [2014] * 5 + [2015] * 6 + [2016] * 8 + [2017] * 7 + [2018] * 9 + [2019] * 5
    rng.shuffle(years)
    papers = []
    edge_no = 0

    def add_edge(src, dst, rel, attrs=None):
        nonlocal edge_no
        edges.append({"id": f"e{edge_no:04d}", "source": src, "target": dst,
                      "relation": rel, "attributes": attrs or {}})
        edge_no += 1

    for i in range(40):
        pid = f"paper:{i:03d}"
        papers.append(pid)
        picked = rng.sample(range(len(CONCEPTS)), rng.randint(1, 3))
        title = f"{rng.choice(TITLE_HEADS)} {CONCEPTS[picked[0]][0]}"
        if len(picked) > 1:
            title += f" for {CONCEPTS[picked[1]][0]}"
        nodes.append({
            "id": pid, "type": "Paper", "label": paper_label(i),
            "attributes": {"year": years[i], "title": title,
                           "venue": rng.choice(VENUES)},
        })
        for rank, a in enumerate(rng.sample(authors, rng.randint(1, 4))):
            add_edge(pid, a, "writtenBy",
                     {"author_role": "first-author" if rank == 0 else "co-author",
                      "position": rank + 1})
        for c in picked:
            add_edge(pid, concepts[c], "hasConcept")
    # every author writes at least one paper
    written = {e["target"] for e in edges if e["relation"] == "writtenBy"}
    for a in authors:
        if a not in written:
            add_edge(rng.choice(papers), a, "writtenBy",
                     {"author_role": "co-author", "position": 5})
    for i, pid in enumerate(papers):
        for _ in range(rng.randint(0, 2)):
            j = rng.randrange(len(papers))
            if j != i:
                add_edge(pid, papers[j], "cites")
    doc = {
        "meta": {
            "name": "academic",
            "attribute_kinds": {"Paper.year": "numeric", "Author.h_index": "numeric"},
            "aliases": {
                "Paper": ["publications", "articles"],
                "Paper.year": ["published in", "from year", "year"],
                "Author.h_index": ["h-index", "h index"],
                "Author.affiliation": ["affiliated with", "from"],
                "Concept.field": ["in the field of", "in field"],
            },
        },
        "nodes": nodes,
        "edges": edges,
    }
    return doc


def movies():
    rng = random.Random(1999)
    nodes, edges = [], []
    genres = ["drama", "comedy", "thriller", "sci-fi"]
    actors = [f"actor:{i:03d}" for i in range(24)]
    movies_ = [f"movie:{i:03d}" for i in range(18)]
    directors = [f"director:{i:03d}" for i in range(8)]
    for i, a in enumerate(actors):
        nodes.append({"id": a, "type": "Actor",
                      "label": f"{FIRST[i % 20]} {LAST[(i * 7) % 15]}",
                      "attributes": {"age": rng.randint(22, 70),
                                     "country": rng.choice(["US", "UK", "FR", "JP"])}})
    for i, m in enumerate(movies_):
        nodes.append({"id": m, "type": "Movie", "label": f"Movie {i + 1}",
                      "attributes": {"year": rng.randint(1995, 2022),
                                     "genre": rng.choice(genres),
                                     "rating": round(rng.uniform(4.0, 9.0), 1)}})
    for i, d in enumerate(directors):
        nodes.append({"id": d, "type": "Director",
                      "label": f"Director {LAST[(i * 3) % 15]}",
                      "attributes": {"nationality": rng.choice(["US", "UK", "FR", "JP"])}})
    n = 0
    for m in movies_:
        d = rng.choice(directors)
        edges.append({"id": f"m{n:04d}", "source": m, "target": d,
                      "relation": "directedBy", "attributes": {}})
        n += 1
        for a in rng.sample(actors, 3):
            edges.append({"id": f"m{n:04d}", "source": a, "target": m,
                          "relation": "actsIn",
                          "attributes": {"billing": rng.choice(["lead", "supporting"])}})
            n += 1
            edges.append({"id": f"m{n:04d}", "source": a, "target": d,
                          "relation": "workedWith", "attributes": {}})
            n += 1
    return {
        "meta": {
            "name": "movies",
            "aliases": {
                "Actor.age": ["above age", "aged", "over age"],
                "Movie.year": ["released in", "from year"],
                "Movie.genre": ["in genre", "of genre"],
                "Director.nationality": ["from country"],
            },
        },
        "nodes": nodes,
        "edges": edges,
    }


# (graph, question, expected four elements)
CORPUS = [
    ("academic", "Find papers published in 2018 and their authors", ("Paper", "year", "2018", ["Author"])),
    ("academic", "Find papers published in 2016 and their authors and concepts", ("Paper", "year", "2016", ["Author", "Concept"])),
    ("academic", "Show papers published in 2014, their concepts", ("Paper", "year", "2014", ["Concept"])),
    ("academic", "List papers with year 2019 and their authors", ("Paper", "year", "2019", ["Author"])),
    ("academic", "Show papers with venue VIS and their authors", ("Paper", "venue", "VIS", ["Author"])),
    ("academic", "Find papers with venue CHI and their concepts and authors", ("Paper", "venue", "CHI", ["Concept", "Author"])),
    ("academic", "Display papers where venue is KDD, their authors", ("Paper", "venue", "KDD", ["Author"])),
    ("academic", "Find papers where year is 2017 and their concepts", ("Paper", "year", "2017", ["Concept"])),
    ("academic", "Show publications published in 2015 and their authors", ("Paper", "year", "2015", ["Author"])),
    ("academic", "Find articles from year 2018 and their concepts", ("Paper", "year", "2018", ["Concept"])),
    ("academic", "Show papers published in 2,016 and their authors", ("Paper", "year", "2016", ["Author"])),
    ("academic", "Find papers with venue EuroVis", ("Paper", "venue", "EuroVis", [])),
    ("academic", "List papers published in 2019", ("Paper", "year", "2019", [])),
    ("academic", "Find authors affiliated with MIT and their papers", ("Author", "affiliation", "MIT", ["Paper"])),
    ("academic", "Show authors with affiliation ETH Zurich and their papers", ("Author", "affiliation", "ETH Zurich", ["Paper"])),
    ("academic", "Find authors with h-index 30 and their papers", ("Author", "h_index", "30", ["Paper"])),
    ("academic", "List authors where h index is 12, their papers", ("Author", "h_index", "12", ["Paper"])),
    ("academic", "Show authors affiliated with KAIST", ("Author", "affiliation", "KAIST", [])),
    ("academic", "Display authors with affiliation Inria and their papers", ("Author", "affiliation", "Inria", ["Paper"])),
    ("academic", "Find concepts in the field of visualization and their papers", ("Concept", "field", "visualization", ["Paper"])),
    ("academic", "Show concepts with field semantics and their papers", ("Concept", "field", "semantics", ["Paper"])),
    ("academic", "List concepts in field nlp, their papers", ("Concept", "field", "nlp", ["Paper"])),
    ("academic", "Find concepts where field is hci", ("Concept", "field", "hci", [])),
    ("academic", "Show papers with title Scalable Graph Layout and their authors", ("Paper", "title", "Scalable Graph Layout", ["Author"])),
    ("academic", "Find authors from TU Wien and their papers.", ("Author", "affiliation", "TU Wien", ["Paper"])),
    ("movies", "Show actors above age 40, their movies and the directors", ("Actor", "age", "40", ["Movie", "Director"])),
    ("movies", "Find actors aged 35 and their movies", ("Actor", "age", "35", ["Movie"])),
    ("movies", "List actors with country UK and their movies", ("Actor", "country", "UK", ["Movie"])),
    ("movies", "Show actors where country is JP, their directors", ("Actor", "country", "JP", ["Director"])),
    ("movies", "Find movies released in 2010 and their actors", ("Movie", "year", "2010", ["Actor"])),
    ("movies", "Show movies in genre drama and their directors and actors", ("Movie", "genre", "drama", ["Director", "Actor"])),
    ("movies", "List movies of genre comedy, their actors", ("Movie", "genre", "comedy", ["Actor"])),
    ("movies", "Find movies with rating 7.5 and their directors", ("Movie", "rating", "7.5", ["Director"])),
    ("movies", "Display movies from year 1999, their directors", ("Movie", "year", "1999", ["Director"])),
    ("movies", "Show directors from country FR and their movies", ("Director", "nationality", "FR", ["Movie"])),
    ("movies", "Find directors with nationality US, their movies and actors", ("Director", "nationality", "US", ["Movie", "Actor"])),
    ("movies", "List directors where nationality is JP", ("Director", "nationality", "JP", [])),
    ("movies", "Show actors over age 60 and their movies?", ("Actor", "age", "60", ["Movie"])),
    ("movies", "Find movies released in 2,001 and their actors", ("Movie", "year", "2001", ["Actor"])),
    ("movies", "Show movies with genre sci-fi, their actors and directors", ("Movie", "genre", "sci-fi", ["Actor", "Director"])),
]


EXTRA_INSIGHT_QUESTIONS = [
    ("academic", "Find papers published in 2017 and their authors"),
    ("academic", "Show papers published in 2019 and their concepts"),
    ("academic", "Find papers with venue ISWC and their authors"),
    ("academic", "List authors affiliated with UC Davis and their papers"),
    ("academic", "Show concepts in field machine learning and their papers"),
    ("academic", "Find papers published in 2015 and their concepts and authors"),
    ("movies", "Find movies released in 2005 and their directors"),
    ("movies", "Show actors with country US and their movies"),
    ("movies", "List movies in genre thriller and their actors"),
    ("movies", "Find directors from country UK and their movies"),
]

# Names no fixture contains; mock completions sprinkle them in to exercise the guardrail.
INVENTED = ["Dr. Imaginary Person", "Paper ZZZZ", "The Phantom Institute",
            "Movie 404", "Director Nobody"]


def insight_suite(docs):
    """50 questions with recorded insight completions.

    Most bullets quote real labels with real ids; about a third also quote an
    invented entity or cite an unknown id, and two completions are unusable so
    the deterministic fallback runs.
    """
    rng = random.Random(77)
    questions = [(g, q) for g, q, _ in CORPUS] + EXTRA_INSIGHT_QUESTIONS
    suite = []
    for i, (graph, question) in enumerate(questions):
        nodes = docs[graph]["nodes"]
        if i in (7, 31):
            completion = "I could not find anything notable here."
        else:
            bullets = []
            for _ in range(rng.randint(2, 4)):
                picks = rng.sample(nodes, rng.randint(1, 2))
                names = " and ".join(f'"{n["label"]}"' for n in picks)
                text = f"{names} stand out among the {picks[0]['type']} nodes shown."
                refs = [n["id"] for n in picks]
                if rng.random() < 0.35:
                    text += f' Their closest peer is "{rng.choice(INVENTED)}".'
                if rng.random() < 0.2:
                    refs.append(f"{picks[0]['type'].lower()}:999")
                if rng.random() < 0.5:
                    refs.append("cluster:0")
                bullets.append({"text": text, "refs": refs})
            completion = json.dumps({"bullets": bullets})
        suite.append({"graph": graph, "question": question, "completion": completion})
    return {"invented": INVENTED, "items": suite}


def count_manifest(path):
    doc = json.loads(path.read_text())
    node_types = Counter(n["type"] for n in doc["nodes"])
    by_id = {n["id"]: n["type"] for n in doc["nodes"]}
    triples = sorted({(by_id[e["source"]], by_id[e["target"]], e["relation"])
                      for e in doc["edges"]})
    return {
        "nodes": len(doc["nodes"]),
        "edges": len(doc["edges"]),
        "type_counts": dict(sorted(node_types.items())),
        "relation_kinds": [list(t) for t in triples],
    }


def main():
    OUT.mkdir(exist_ok=True)
    docs = {"academic": academic(), "movies": movies()}
    for name, doc in docs.items():
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
        (OUT / f"{name}.manifest.json").write_text(
            json.dumps(count_manifest(path), indent=1) + "\n")
    corpus = [{"graph": g, "question": q,
               "expected": {"interest_type": e[0], "attribute": e[1],
                            "attribute_value": e[2], "connected_types": e[3]}}
              for g, q, e in CORPUS]
    (OUT / "preference_corpus.json").write_text(json.dumps(corpus, indent=1) + "\n")
    # Recorded completions in the strict JSON contract, as a live model would
    # return them for the same questions.
    recordings = [{"task": "extract_preferences", "key": c["question"],
                   "completion": json.dumps(c["expected"])} for c in corpus]
    (OUT / "mock_completions.json").write_text(json.dumps(recordings, indent=1) + "\n")
    (OUT / "insight_suite.json").write_text(json.dumps(insight_suite(docs), indent=1) + "\n")


if __name__ == "__main__":
    main()
