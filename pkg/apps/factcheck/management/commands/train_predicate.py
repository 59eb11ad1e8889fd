"""
Train a fact-checking model for one predicate and print its definition.

Usage:
    python manage.py train_predicate graph.npz capitalOf --out capitalOf.model.json
    python manage.py train_predicate edges.tsv foundedBy --labels labels.tsv --positives pairs.tsv --out m.json
"""

from pathlib import Path

from apps.factcheck.management.base import PipelineCommand
from apps.factcheck.services.pipeline import train_predicate
from apps.factcheck.services.sampling import read_pairs, read_statements


def definition_lines(trained):
    lines = [f"Definition of {trained.model.predicate} ({len(trained.definition)} of {len(trained.ranked)} paths):"]
    for rank, ranked in enumerate(trained.definition, start=1):
        lines.append(f"  {rank}. {ranked.path.text}  importance={ranked.importance:.4f}")
    return lines


class Command(PipelineCommand):
    help = "Train the path-based logistic regression model for a predicate."
    run_kind = "train"
    config_flags = ("--k", "--delta-top", "--delta", "--theta", "--neg", "--seed", "--l2", "--threads", "--hub-cap")

    def add_arguments(self, parser):
        parser.add_argument("graph", type=str, help="Snapshot (.npz) or edge file")
        parser.add_argument("predicate", type=str, help="Predicate to learn, e.g. capitalOf")
        parser.add_argument("--labels", type=str, default=None, help="Label file when loading an edge file")
        parser.add_argument("--out", type=str, required=True, help="Model file to write")
        parser.add_argument("--positives", type=str, default=None,
                            help="subject<TAB>object pairs to use as T+ (required for unseen predicates)")
        parser.add_argument("--examples", type=str, default=None,
                            help="Labeled statement file supplying both T+ and T-")
        parser.add_argument("--definition-out", type=str, default=None, help="Write the definition report here")
        parser.add_argument("--matrix-out", type=str, default=None, help="Write the training matrix as CSV")
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        config = self.resolve_config(options)
        predicate = options["predicate"]

        def work():
            graph = self.open_graph(options["graph"], options["labels"])
            positives = read_pairs(options["positives"]) if options["positives"] else None
            examples = read_statements(options["examples"]) if options["examples"] else None
            trained = train_predicate(graph, predicate, config, positives=positives, examples=examples)

            path = trained.model.save(options["out"])
            lines = definition_lines(trained)
            for line in lines:
                self.stdout.write(line)
            if options["definition_out"]:
                out = Path(options["definition_out"])
                out.parent.mkdir(parents=True, exist_ok=True)
                out.write_text("\n".join(lines) + "\n", encoding="utf-8")
            if options["matrix_out"]:
                trained.matrix.write_csv(options["matrix_out"], graph.entity_names)
            self.stdout.write(self.style.SUCCESS(f"Model with {len(trained.model.columns)} paths written to {path}"))
            return {
                "positives": len(trained.training.positives),
                "negatives": len(trained.training.negatives),
                "columns": len(trained.model.columns),
                "definition": [r.path.text for r in trained.definition],
            }

        self.recorded(options, work, predicate)
