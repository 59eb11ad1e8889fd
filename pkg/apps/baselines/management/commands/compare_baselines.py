"""
Evaluate the path model against every link-prediction baseline on one test case.

Usage:
    python manage.py compare_baselines graph.npz capital_testcase.tsv --out table.csv
"""

from apps.factcheck.management.commands.eval_predicate import Command as EvalCommand


class Command(EvalCommand):
    help = "AUROC table of the path model and the AA, PA, Katz, SP, PPR and SimRank baselines."
    run_kind = "baseline"
    default_methods = "all"
