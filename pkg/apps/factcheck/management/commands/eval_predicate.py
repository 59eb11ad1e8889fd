"""
Cross-validate the path model (and optional baselines) on a labeled test case.

The report CSV holds one row per (method, ratio) and is byte-identical for a
fixed seed.  Wall-clock timing goes to the separate --timing-out file.

Usage:
    python manage.py eval_predicate graph.npz capital_testcase.tsv --methods predpath,pa,aa --out report.csv
    python manage.py eval_predicate graph.npz capital_testcase.tsv --ratio-sweep 0.1,0.3,0.5,0.7,0.9
    python manage.py eval_predicate graph.npz capital_testcase.tsv --delta-top-sweep 1,5,10,50,100
"""

from apps.factcheck.management.base import PipelineCommand
from apps.factcheck.services.evaluation import (
    METHODS,
    PREDPATH,
    evaluate,
    report_frame,
    subset_frame,
    subset_search,
    write_report,
    write_scores,
    write_subsets,
    write_timing,
)
from apps.factcheck.services.paths import FEATURE_MODES
from apps.factcheck.services.sampling import read_statements
from apps.knowledge.exceptions import ConfigurationError, EvaluationError


def parse_list(text, cast=str):
    return [cast(item.strip()) for item in text.split(",") if item.strip()]


def parse_ratios(text):
    try:
        return parse_list(text, float)
    except ValueError as exc:
        raise ConfigurationError(f"bad --ratio-sweep value: {exc}") from exc


def parse_tops(text):
    try:
        return parse_list(text, int)
    except ValueError as exc:
        raise ConfigurationError(f"bad --delta-top-sweep value: {exc}") from exc


def testcase_rows(graph, statements):
    predicates = sorted({s.predicate for s in statements})
    if len(predicates) != 1:
        raise EvaluationError(f"a test case must cover exactly one predicate, found {predicates or 'none'}")
    if any(s.label is None for s in statements):
        raise EvaluationError("every test-case statement needs a 0/1 label")
    rows = [(graph.entity_id(s.subject), graph.entity_id(s.object), s.label) for s in statements]
    return predicates[0], rows


class Command(PipelineCommand):
    help = "Evaluate fact-checking methods on a labeled test case with stratified k-fold AUROC."
    run_kind = "eval"
    default_methods = PREDPATH
    config_flags = ("--k", "--delta-top", "--delta", "--theta", "--seed", "--l2", "--threads", "--hub-cap", "--folds")

    def add_arguments(self, parser):
        parser.add_argument("graph", type=str, help="Snapshot (.npz) or edge file")
        parser.add_argument("testcase", type=str, help="subject<TAB>predicate<TAB>object<TAB>{0|1} file")
        parser.add_argument("--labels", type=str, default=None, help="Label file when loading an edge file")
        parser.add_argument("--methods", type=str, default=self.default_methods,
                            help=f"Comma-separated methods from {','.join(METHODS)}, or all")
        parser.add_argument("--ratio-sweep", type=str, default=None,
                            help="Comma-separated true fractions, e.g. 0.1,0.3,0.5,0.7,0.9")
        parser.add_argument("--delta-top-sweep", type=str, default=None,
                            help="Comma-separated top-N values; reports the best N per feature mode")
        parser.add_argument("--sweep-modes", type=str, default=",".join(FEATURE_MODES),
                            help="Feature modes searched by --delta-top-sweep")
        parser.add_argument("--out", type=str, default=None, help="Report CSV (default: standard output)")
        parser.add_argument("--timing-out", type=str, default=None, help="Per-method feature-generation timing CSV")
        parser.add_argument("--scores-out", type=str, default=None, help="Per-statement cross-validated scores CSV")
        self.add_config_arguments(parser)

    def handle(self, *args, **options):
        config = self.resolve_config(options)
        methods = parse_list(options["methods"])
        if methods == ["all"]:
            methods = list(METHODS)
        ratios = None
        if options["ratio_sweep"]:
            ratios = self.guard(lambda: parse_ratios(options["ratio_sweep"]))
        if options["delta_top_sweep"]:
            tops = self.guard(lambda: parse_tops(options["delta_top_sweep"]))
            if ratios or methods != [PREDPATH]:
                self.guard(self._reject_combined_sweep)
            self.recorded(options, lambda: self.run_subset_search(options, config, tops))
            return

        def work():
            graph = self.open_graph(options["graph"], options["labels"])
            predicate, rows = testcase_rows(graph, read_statements(options["testcase"]))
            reports = evaluate(graph, predicate, rows, methods, config, ratios=ratios)

            for report in reports:
                ratio = "" if report.ratio is None else f" ratio={report.ratio:g}"
                self.stdout.write(f"{report.method:<8}{ratio} AUROC={report.auroc:.4f} ({len(report.labels)} statements)")
            if options["out"]:
                write_report(reports, options["out"])
                self.stdout.write(self.style.SUCCESS(f"Report written to {options['out']}"))
            else:
                self.stdout.write(report_frame(reports).to_csv(index=False, lineterminator="\n"))
            if options["timing_out"]:
                write_timing(reports, options["timing_out"])
            if options["scores_out"]:
                write_scores(reports, graph.entity_names, options["scores_out"])
            return {
                "predicate": predicate,
                "results": [r.summary() for r in reports],
            }

        self.recorded(options, work)

    @staticmethod
    def _reject_combined_sweep():
        raise ConfigurationError("--delta-top-sweep evaluates the path model alone; drop --methods and --ratio-sweep")

    def run_subset_search(self, options, config, tops):
        graph = self.open_graph(options["graph"], options["labels"])
        predicate, rows = testcase_rows(graph, read_statements(options["testcase"]))
        scores = subset_search(graph, predicate, rows, config, tops, modes=parse_list(options["sweep_modes"]))

        for score in scores:
            marker = "  <- best" if score.best else ""
            self.stdout.write(
                f"{score.feature_mode:<9} top={score.delta_top:<5} AUROC={score.report.auroc:.4f}{marker}"
            )
        if options["out"]:
            write_subsets(scores, options["out"])
            self.stdout.write(self.style.SUCCESS(f"Report written to {options['out']}"))
        else:
            self.stdout.write(subset_frame(scores).to_csv(index=False, lineterminator="\n"))
        return {
            "predicate": predicate,
            "best": [
                {"feature_mode": s.feature_mode, "delta_top": s.delta_top, "auroc": round(s.report.auroc, 6)}
                for s in scores if s.best
            ],
        }
