"""Synthetic knowledge-graph worlds with planted relations.

``capital_world`` builds a US-geography graph where a state capital is the
city hosting the headquarters of agencies with jurisdiction over the state,
while the largest cities of each state are better connected overall.
``biomedical_world`` builds a SemMedDB-shaped graph of proteins, genes and
diseases with duplicated edges.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

STATES = [
    ("Alabama", "AL", "Montgomery"), ("Alaska", "AK", "Juneau"),
    ("Arizona", "AZ", "Phoenix"), ("Arkansas", "AR", "Little Rock"),
    ("California", "CA", "Sacramento"), ("Colorado", "CO", "Denver"),
    ("Connecticut", "CT", "Hartford"), ("Delaware", "DE", "Dover"),
    ("Florida", "FL", "Tallahassee"), ("Georgia", "GA", "Atlanta"),
    ("Hawaii", "HI", "Honolulu"), ("Idaho", "ID", "Boise"),
    ("Illinois", "IL", "Springfield"), ("Indiana", "IN", "Indianapolis"),
    ("Iowa", "IA", "Des Moines"), ("Kansas", "KS", "Topeka"),
    ("Kentucky", "KY", "Frankfort"), ("Louisiana", "LA", "Baton Rouge"),
    ("Maine", "ME", "Augusta"), ("Maryland", "MD", "Annapolis"),
    ("Massachusetts", "MA", "Boston"), ("Michigan", "MI", "Lansing"),
    ("Minnesota", "MN", "Saint Paul"), ("Mississippi", "MS", "Jackson"),
    ("Missouri", "MO", "Jefferson City"), ("Montana", "MT", "Helena"),
    ("Nebraska", "NE", "Lincoln"), ("Nevada", "NV", "Carson City"),
    ("New Hampshire", "NH", "Concord"), ("New Jersey", "NJ", "Trenton"),
    ("New Mexico", "NM", "Santa Fe"), ("New York", "NY", "Albany"),
    ("North Carolina", "NC", "Raleigh"), ("North Dakota", "ND", "Bismarck"),
    ("Ohio", "OH", "Columbus"), ("Oklahoma", "OK", "Oklahoma City"),
    ("Oregon", "OR", "Salem"), ("Pennsylvania", "PA", "Harrisburg"),
    ("Rhode Island", "RI", "Providence"), ("South Carolina", "SC", "Columbia"),
    ("South Dakota", "SD", "Pierre"), ("Tennessee", "TN", "Nashville"),
    ("Texas", "TX", "Austin"), ("Utah", "UT", "Salt Lake City"),
    ("Vermont", "VT", "Montpelier"), ("Virginia", "VA", "Richmond"),
    ("Washington", "WA", "Olympia"), ("West Virginia", "WV", "Charleston"),
    ("Wisconsin", "WI", "Madison"), ("Wyoming", "WY", "Cheyenne"),
]

LARGEST_CITIES = {"Illinois": ["Chicago", "Aurora", "Rockford", "Joliet"]}

DEPARTMENTS = ["Transportation", "Health", "Revenue", "Education"]

CITIES_PER_STATE = 4

CAPITAL_LABELS = ("city", "settlement")
LARGE_CITY_LABELS = ("city", "settlement", "populated place")
STATE_LABELS = ("state", "administrative region")
AGENCY_LABELS = ("state agency", "organisation")


@dataclass
class FixtureWorld:
    name: str
    predicate: str
    triples: List[Tuple[str, str, str]] = field(default_factory=list)
    labels: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    true_pairs: List[Tuple[str, str]] = field(default_factory=list)
    confounders: List[Tuple[str, str]] = field(default_factory=list)

    def edge(self, s, p, t, times=1):
        for _ in range(times):
            self.triples.append((s, p, t))

    def label(self, entity, labels):
        self.labels[entity] = tuple(labels)

    def edge_lines(self):
        return [f"{s}\t{p}\t{t}\n" for s, p, t in self.triples]

    def label_lines(self):
        return [f"{e}\t{','.join(labels)}\n" for e, labels in self.labels.items()]

    def write(self, out_dir, prefix=None):
        """Write ``<prefix>edges.tsv`` and ``<prefix>labels.tsv``; returns both paths."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        prefix = f"{prefix}_" if prefix else ""
        edges_path = out_dir / f"{prefix}edges.tsv"
        labels_path = out_dir / f"{prefix}labels.tsv"
        with edges_path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.write(f"# {self.name} world, target predicate {self.predicate}\n")
            handle.writelines(self.edge_lines())
        with labels_path.open("w", encoding="utf-8", newline="\n") as handle:
            handle.writelines(self.label_lines())
        return edges_path, labels_path


def _agency_name(state, dept):
    if state == "Illinois" and dept == "Transportation":
        return "IDOT"
    return f"{state} Department of {dept}"


def capital_world(states: int = 15, seed: int = 0) -> FixtureWorld:
    """CapitalOf world over the first ``states`` US states (alphabetical)."""
    if not 2 <= states <= len(STATES):
        raise ValueError(f"states must be between 2 and {len(STATES)}, got {states}")

    rng = np.random.default_rng(seed)
    world = FixtureWorld(name="capital", predicate="capitalOf")
    country = "United States"
    world.label(country, ["country"])

    for i, (state, _abbr, capital) in enumerate(STATES[:states]):
        world.label(state, STATE_LABELS)
        world.label(capital, CAPITAL_LABELS)
        world.edge(state, "isPartOf", country)
        world.edge(capital, "capitalOf", state)
        world.edge(capital, "isPartOf", state)
        world.true_pairs.append((capital, state))

        cities = LARGEST_CITIES.get(state) or [f"{state} Metro {j + 1}" for j in range(CITIES_PER_STATE)]
        for j, city in enumerate(cities):
            world.label(city, LARGE_CITY_LABELS)
            world.edge(city, "isPartOf", state)
            world.confounders.append((city, state))
        world.edge(state, "largestCity", cities[0])

        for dept in DEPARTMENTS[: 2 + i % 3]:
            agency = _agency_name(state, dept)
            world.label(agency, AGENCY_LABELS)
            world.edge(agency, "headquarter", capital)
            world.edge(agency, "jurisdiction", state)
            for e in range(8 + int(rng.integers(0, 5))):
                world.edge(f"{agency} employee {e + 1}", "employer", agency)

        # deathPlace persons are planted on capitals and largest cities alike
        places = [(capital, 2 + i % 3)] + [(c, 3 + (i + j) % 5) for j, c in enumerate(cities)]
        for place, count in places:
            for d in range(count):
                person = f"Person died in {place} #{d + 1}"
                world.label(person, ["person"])
                world.edge(person, "deathPlace", place)
                world.edge(person, "deathPlace", state)
            company = f"{place} Holdings"
            world.label(company, ["company", "organisation"])
            world.edge(company, "location", place)
            world.edge(company, "location", state)

        # unlabeled leaves inflate degree without adding paths to the state
        leaf_counts = [3] + [15 + 5 * (CITIES_PER_STATE - j) for j in range(len(cities))]
        for place, count in zip([capital] + cities, leaf_counts):
            for b in range(count + int(rng.integers(0, 3))):
                world.edge(f"Resident born in {place} #{b + 1}", "birthPlace", place)

    return world


def biomedical_world(proteins: int = 30, seed: int = 0) -> FixtureWorld:
    """aapp-causes-dsyn world with SemMedDB-style duplicate edges."""
    if proteins < 2:
        raise ValueError("proteins must be at least 2")

    rng = np.random.default_rng(seed)
    world = FixtureWorld(name="biomedical", predicate="causes")
    diseases = [f"Disease {d + 1}" for d in range(max(2, proteins // 2))]
    genes = [f"GENE{g + 1}" for g in range(proteins)]
    for d in diseases:
        world.label(d, ["dsyn"])
    for g in genes:
        world.label(g, ["gngm"])

    for p in range(proteins):
        protein = f"Protein {p + 1}"
        world.label(protein, ["aapp"])
        disease = diseases[p % len(diseases)]
        world.edge(protein, "causes", disease, times=1 + int(rng.integers(0, 3)))
        world.true_pairs.append((protein, disease))

        subtype = f"{disease} subtype {p + 1}"
        world.label(subtype, ["dsyn"])
        world.edge(protein, "associatedWith", subtype)
        world.edge(subtype, "isA", disease)

        gene = genes[p]
        world.edge(protein, "stimulates", gene, times=1 + int(rng.integers(0, 2)))
        world.edge(gene, "affects", disease, times=1 + int(rng.integers(0, 3)))

        for _ in range(2):
            other = f"Protein {int(rng.integers(0, proteins)) + 1}"
            if other != protein:
                world.edge(protein, "interactsWith", other)
        noise = diseases[int(rng.integers(0, len(diseases)))]
        world.edge(genes[int(rng.integers(0, len(genes)))], "affects", noise)

    return world
