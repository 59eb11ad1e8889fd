"""
Error Handling Service for pipeline commands

Categorizes exceptions, formats the stable ``error[<category>]`` prefix and
records failures on the run history.
"""

import logging
import traceback

from apps.knowledge import exceptions as errors

logger = logging.getLogger(__name__)


class ErrorHandler:
    """Maps pipeline errors onto stable categories for scripting."""

    CATEGORIES = {
        'Input': (
            errors.GraphFormatError,
            errors.SnapshotFormatError,
            errors.UnknownEntityError,
            errors.UnknownPredicateError,
            errors.StatementError,
            errors.ConfigurationError,
            FileNotFoundError,
        ),
        'Sampling': (errors.SamplingError,),
        'Model': (
            errors.FeatureSelectionError,
            errors.ConvergenceError,
            errors.ModelFormatError,
        ),
        'Evaluation': (errors.EvaluationError,),
        'Graph': (errors.FactCheckError,),
    }

    @classmethod
    def categorize_error(cls, exception: Exception) -> str:
        """
        Categorize an exception.

        Returns:
            One of Input, Sampling, Model, Evaluation, Graph, System
        """
        for category, types in cls.CATEGORIES.items():
            if isinstance(exception, types):
                return category
        return 'System'

    @classmethod
    def message(cls, exception: Exception) -> str:
        return f"error[{cls.categorize_error(exception)}]: {exception}"

    @classmethod
    def log_error(cls, run, exception: Exception) -> str:
        """Mark ``run`` failed with the error category; returns the formatted message."""
        category = cls.categorize_error(exception)
        if category == 'System':
            logger.error("Unexpected failure: %s\n%s", exception, traceback.format_exc())
        if run is not None:
            run.mark_failed(category, str(exception))
        return cls.message(exception)

