"""
Explain a verdict: probability, the predicate definition and the concrete
paths instantiating each definition path for the statement.

Usage:
    python manage.py explain_statement capitalOf.model.json graph.npz Springfield Illinois [--json]
"""

import json

from apps.factcheck.management.base import PipelineCommand
from apps.factcheck.services.pipeline import explain_statement
from apps.factcheck.services.regression import FactCheckModel


class Command(PipelineCommand):
    help = "Explain the verdict for (subject, predicate, object) with path evidence."

    def add_arguments(self, parser):
        parser.add_argument("model", type=str, help="Model file written by train_predicate")
        parser.add_argument("graph", type=str, help="Snapshot (.npz) or edge file")
        parser.add_argument("subject", type=str)
        parser.add_argument("object", type=str)
        parser.add_argument("--labels", type=str, default=None, help="Label file when loading an edge file")
        parser.add_argument("--json", action="store_true", help="Emit the structured report as JSON")

    def handle(self, *args, **options):
        def work():
            model = FactCheckModel.load(options["model"])
            graph = self.open_graph(options["graph"], options["labels"])
            return explain_statement(model, graph, options["subject"], options["object"])

        report = self.guard(work)
        if options["json"]:
            self.stdout.write(json.dumps(report.as_dict(), indent=2, sort_keys=True))
        else:
            self.stdout.write(report.to_text())
