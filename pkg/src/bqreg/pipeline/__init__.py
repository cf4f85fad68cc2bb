from .dgp import DgpConfig, DgpTruth, simulate_dgp
from .io import ColumnSchema, load_csv, write_chain_csv, write_csv
from .report import render_report
from .study import StudyConfig, StudyResult, run_study
from .transforms import apply_transforms
