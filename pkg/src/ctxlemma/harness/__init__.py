from .experiment import ExperimentSpec, ReportRow, SweepReport, run_experiment
from .report import emit_report
from .toy import ToyRules, ToySpec, generate_toy_corpus, write_toy_corpus

__all__ = [
    "ExperimentSpec", "ReportRow", "SweepReport", "ToyRules", "ToySpec", "emit_report",
    "generate_toy_corpus", "run_experiment", "write_toy_corpus",
]
