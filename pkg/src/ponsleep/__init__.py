"""Wake-up scheduling for sleeping ONUs in a TDM-PON."""

from .model import (Assignment, AssignmentProblem, PowerProfile, SleepMode, DEFAULT_POWER,
                    f, f1, f2, jain_index)
from .windows import InfeasibleWindow, OnuScheduleState, WindowConfig, build_problem, window
from .transport import Mode, TransportInstance, solve_penalized, solve_strict
from .fdos import fdos, partition, lemma2_lower_bound, lemma3_upper_bound, approximation_ratio
from .oracle import exact_solve, check_lemma1

__version__ = "0.1.0"
