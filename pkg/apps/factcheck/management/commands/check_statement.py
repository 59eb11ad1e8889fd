"""
Score one statement with a trained model.

Usage:
    python manage.py check_statement capitalOf.model.json graph.npz Springfield Illinois
"""

from apps.factcheck.management.base import PipelineCommand
from apps.factcheck.services.pipeline import score_statement
from apps.factcheck.services.regression import FactCheckModel


class Command(PipelineCommand):
    help = "Print TRUE/FALSE and the model probability for (subject, predicate, object)."

    def add_arguments(self, parser):
        parser.add_argument("model", type=str, help="Model file written by train_predicate")
        parser.add_argument("graph", type=str, help="Snapshot (.npz) or edge file")
        parser.add_argument("subject", type=str)
        parser.add_argument("object", type=str)
        parser.add_argument("--labels", type=str, default=None, help="Label file when loading an edge file")

    def handle(self, *args, **options):
        def work():
            model = FactCheckModel.load(options["model"])
            graph = self.open_graph(options["graph"], options["labels"])
            stmt = graph.statement(options["subject"], model.predicate, options["object"])
            return score_statement(model, graph, stmt)

        probability = self.guard(work)
        verdict = "TRUE" if probability > 0.5 else "FALSE"
        style = self.style.SUCCESS if verdict == "TRUE" else self.style.WARNING
        self.stdout.write(style(f"{verdict} (p={probability:.2f})"))
