"""Event-driven EPON upstream simulator with OSMP-EO sleep and optional FDOS wake-ups."""

from .config import ConfigError, Predictor, Scheduler, SimConfig
from .engine import MetricsReport, RuntimeCapExceeded, Simulator, run
from .policy import grant_size, osmp_decide, predict_fill_ewma, predict_fill_oracle, schedule_wakeups
