"""
Load an edge file (and optional label file), validate it and write a binary snapshot.

Usage:
    python manage.py ingest_graph data/edges.tsv --labels data/labels.tsv --out data/graph.npz
"""

from apps.factcheck.management.base import PipelineCommand
from apps.knowledge.snapshot import write_snapshot


class Command(PipelineCommand):
    help = "Ingest a triple file into a graph snapshot and print dataset statistics."
    run_kind = "ingest"

    def add_arguments(self, parser):
        parser.add_argument("edges", type=str, help="Edge file (subject<TAB>predicate<TAB>object) or .npz snapshot")
        parser.add_argument("--labels", type=str, default=None, help="Label file (entity<TAB>label1,label2)")
        parser.add_argument("--out", type=str, default=None, help="Snapshot path to write (.npz)")

    def handle(self, *args, **options):
        def work():
            graph = self.open_graph(options["edges"], options["labels"])
            stats = graph.statistics()
            for name, value in stats.as_rows():
                self.stdout.write(f"{name:<12} {value}")
            if options["out"]:
                path = write_snapshot(graph, options["out"])
                self.stdout.write(self.style.SUCCESS(f"Snapshot written to {path}"))
            return dict(stats.as_rows())

        self.recorded(options, work)
