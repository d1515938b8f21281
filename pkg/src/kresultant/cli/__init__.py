from .checks import sharpness
from .config import ExperimentConfig, preset
from .main import main
from .report import ReportRow
from .runner import RunResult, run

__all__ = ["ExperimentConfig", "ReportRow", "RunResult", "main", "preset", "run", "sharpness"]
