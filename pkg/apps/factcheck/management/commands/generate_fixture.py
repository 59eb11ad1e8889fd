"""
Write the synthetic fixture worlds and their labeled test cases.

Outputs in OUT_DIR:
    capital_edges.tsv, capital_labels.tsv
    capital_testcase.tsv          true capitals + largest-city confounders (20/80)
    capital_random_testcase.tsv   true capitals + randomly matched capitals/states
    biomedical_edges.tsv, biomedical_labels.tsv, biomedical_testcase.tsv

Usage:
    python manage.py generate_fixture out/ --states 15 --seed 0
"""

from apps.factcheck.management.base import PipelineCommand
from apps.factcheck.services.sampling import (
    CONFOUNDER_LIST,
    RANDOM_MATCH,
    LabeledStatement,
    build_testcase,
    write_statements,
)
from apps.knowledge.exceptions import ConfigurationError, SamplingError
from apps.knowledge.synthetic import biomedical_world, capital_world


def _rows(world, labeled):
    return [LabeledStatement(s, world.predicate, o, label) for s, o, label in labeled]


class Command(PipelineCommand):
    help = "Generate the CapitalOf and biomedical fixture worlds with test cases."

    def add_arguments(self, parser):
        parser.add_argument("out_dir", type=str, help="Directory for the generated files")
        parser.add_argument("--states", type=int, default=15, help="Number of states (2-50, default 15)")
        parser.add_argument("--proteins", type=int, default=30, help="Proteins in the biomedical world")
        parser.add_argument("--ratio", type=float, default=0.2, help="True fraction of each test case")
        parser.add_argument("--seed", type=int, default=0, help="Random seed")

    def handle(self, *args, **options):
        self.guard(lambda: self._generate(options))

    def _generate(self, options):
        out_dir, seed, ratio = options["out_dir"], options["seed"], options["ratio"]
        try:
            capital = capital_world(states=options["states"], seed=seed)
            biomedical = biomedical_world(proteins=options["proteins"], seed=seed)
        except ValueError as exc:
            raise ConfigurationError(f"{exc}; cross validation needs at least two true statements") from exc

        for world in (capital, biomedical):
            edges, labels = world.write(out_dir, world.name)
            self.stdout.write(f"{world.name}: {len(world.triples)} triples -> {edges}, labels -> {labels}")

        confounder_case = build_testcase(
            capital.true_pairs, CONFOUNDER_LIST, ratio=ratio, confounders=capital.confounders, seed=seed
        )
        path = write_statements(_rows(capital, confounder_case), f"{out_dir}/capital_testcase.tsv")
        self.stdout.write(f"capital confounder test case: {len(confounder_case)} statements -> {path}")

        try:
            random_case = build_testcase(capital.true_pairs, RANDOM_MATCH, ratio=ratio, seed=seed)
        except SamplingError as exc:
            self.stdout.write(self.style.WARNING(f"Skipped random-match capital test case: {exc}"))
        else:
            path = write_statements(_rows(capital, random_case), f"{out_dir}/capital_random_testcase.tsv")
            self.stdout.write(f"capital random test case: {len(random_case)} statements -> {path}")

        bio_case = build_testcase(biomedical.true_pairs, RANDOM_MATCH, ratio=ratio, seed=seed)
        path = write_statements(_rows(biomedical, bio_case), f"{out_dir}/biomedical_testcase.tsv")
        self.stdout.write(f"biomedical test case: {len(bio_case)} statements -> {path}")

        self.stdout.write(self.style.SUCCESS(
            f"Planted {len(capital.true_pairs)} capitals and {len(biomedical.true_pairs)} causes pairs"
        ))
