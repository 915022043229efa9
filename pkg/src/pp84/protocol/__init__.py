"""The PP84 run engine, sessions, loss accounting and the BB84 baseline."""
from ..alphabet import Basis, EncodingOp, PrepState
from .batch import RunBatch, count_runs, simulate_runs
from .bb84 import Bb84Stats, run_bb84_baseline
from .losses import LossReport, loss_anomaly_test
from .records import (ControlBasis, DetectionOutcome, Mode, RunConfig, RunRecord,
                      SessionMode, detection_check)
from .run import run_single
from .session import QdcSummary, SessionResult, qdc_sessions, run_session

__all__ = ["Basis", "EncodingOp", "PrepState", "RunBatch", "count_runs", "simulate_runs",
           "Bb84Stats", "run_bb84_baseline", "LossReport", "loss_anomaly_test",
           "ControlBasis", "DetectionOutcome", "Mode", "RunConfig", "RunRecord", "SessionMode",
           "detection_check", "run_single", "QdcSummary", "SessionResult", "qdc_sessions",
           "run_session"]
