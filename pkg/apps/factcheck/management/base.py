"""Shared plumbing for the pipeline management commands."""

import logging

from django.core.management.base import BaseCommand, CommandError

from apps.factcheck.models import PipelineRun
from apps.factcheck.services.error_handler import ErrorHandler
from apps.factcheck.services.paths import FEATURE_MODES
from apps.factcheck.services.pipeline import PipelineConfig, resolve_config
from apps.knowledge.exceptions import FactCheckError
from apps.knowledge.loaders import open_graph

logger = logging.getLogger(__name__)

# flag -> (PipelineConfig field, type, help)
CONFIG_FLAGS = {
    "--k": ("max_path_length", int, "Maximum path length (default 3)"),
    "--delta-top": ("delta_top", int, "Keep the N most informative paths (default 100)"),
    "--delta": ("delta", float, "Absolute importance threshold; overrides --delta-top"),
    "--theta": ("theta", float, "Prune paths whose count over false pairs reaches theta (default 15)"),
    "--neg": ("negatives", int, "Number of sampled negative pairs (default 4 per positive)"),
    "--seed": ("seed", int, "Random seed (default 0)"),
    "--l2": ("l2", float, "L2 regularization strength (default 1.0)"),
    "--threads": ("threads", int, "Worker threads (default FACTCHECK_THREADS or 1)"),
    "--hub-cap": ("hub_cap", int, "Truncate fan-out of nodes above this degree (breaks exhaustiveness)"),
    "--folds": ("folds", int, "Cross-validation folds (default 10)"),
}

SERIALIZABLE = (str, int, float, bool, type(None))
DJANGO_OPTIONS = {"verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks"}


class PipelineCommand(BaseCommand):
    """Base for commands that load a graph and record a PipelineRun."""

    run_kind = None
    config_flags = ()

    def add_config_arguments(self, parser):
        parser.add_argument("--config", type=str, default=None, help="JSON file with pipeline settings")
        parser.add_argument(
            "--feature-mode", dest="feature_mode", choices=FEATURE_MODES, default=None,
            help="anchored predicate paths (default) or full meta paths",
        )
        for flag in self.config_flags:
            field, kind, help_text = CONFIG_FLAGS[flag]
            parser.add_argument(flag, dest=field, type=kind, default=None, help=help_text)

    def resolve_config(self, options) -> PipelineConfig:
        keys = set(PipelineConfig.keys())
        overrides = {k: v for k, v in options.items() if k in keys}
        return self.guard(lambda: resolve_config(overrides, options.get("config")))

    def open_graph(self, path, labels=None):
        return self.guard(lambda: open_graph(path, labels))

    def guard(self, work, run=None):
        """Run ``work``; pipeline errors become a CommandError with a stable prefix."""
        try:
            return work()
        except CommandError as exc:
            if run is not None:
                ErrorHandler.log_error(run, exc.__cause__ or exc)
            raise
        except (FactCheckError, OSError) as exc:
            raise CommandError(ErrorHandler.log_error(run, exc)) from exc
        except Exception as exc:
            ErrorHandler.log_error(run, exc)
            raise

    def recorded(self, options, work, predicate=""):
        """Run ``work`` under a PipelineRun; returns its summary dict."""
        arguments = {
            k: v for k, v in options.items()
            if k not in DJANGO_OPTIONS and isinstance(v, SERIALIZABLE)
        }
        run = PipelineRun.start(self.run_kind, predicate, arguments)
        summary = self.guard(work, run)
        run.mark_completed(summary)
        return summary
