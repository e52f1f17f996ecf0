"""
Application Settings
Loads numerical defaults and tolerances from the environment
"""
import os
from typing import List

from dotenv import load_dotenv

load_dotenv(override=True)


def _floats(raw: str) -> List[float]:
    return [float(x) for x in raw.split(",") if x.strip()]


# Sampling grid (discretization of "for almost all xi")
GRID_NR = int(os.getenv("GRID_NR", "200"))
GRID_NDIR = int(os.getenv("GRID_NDIR", "64"))
GRID_R_MIN = float(os.getenv("GRID_R_MIN", "1e-3"))
GRID_R_MAX = float(os.getenv("GRID_R_MAX", "1e3"))
# Ball skipped around the origin for kernels discontinuous there
GRID_EXCLUSION_RADIUS = float(os.getenv("GRID_EXCLUSION_RADIUS", "1e-6"))
# verify_sigma re-checks on a grid with this many times the points
GRID_REFINE_FACTOR = int(os.getenv("GRID_REFINE_FACTOR", "4"))

# Tolerances
FEASIBILITY_TOL = float(os.getenv("FEASIBILITY_TOL", "1e-9"))
ELL_REL_TOL = float(os.getenv("ELL_REL_TOL", "1e-3"))
ELL_ABS_TOL = float(os.getenv("ELL_ABS_TOL", "1e-6"))
MORSE_AGREE_TOL = float(os.getenv("MORSE_AGREE_TOL", "1e-3"))
MORSE_REJECT_TOL = float(os.getenv("MORSE_REJECT_TOL", "1e-2"))

# Curve tracing near the origin
TRACE_T_MAX = float(os.getenv("TRACE_T_MAX", "0.3"))
TRACE_T_MIN = float(os.getenv("TRACE_T_MIN", "1e-4"))
TRACE_N = int(os.getenv("TRACE_N", "12"))
TRACE_RESIDUAL_TOL = float(os.getenv("TRACE_RESIDUAL_TOL", "1e-10"))
TRACE_BRACKET_EXPANSIONS = int(os.getenv("TRACE_BRACKET_EXPANSIONS", "8"))
TRACE_SLOPE_JUMP = float(os.getenv("TRACE_SLOPE_JUMP", "0.5"))

# Hypothesis validation
H5_STENCILS = _floats(os.getenv("H5_STENCILS", "1e-2,1e-3,1e-4"))
H5_REL_TOL = float(os.getenv("H5_REL_TOL", "0.05"))
BOUND_CAP = float(os.getenv("BOUND_CAP", "1e8"))

# Linear feasibility (exchange method + dense simplex)
LP_BATCH = int(os.getenv("LP_BATCH", "32"))
LP_MARGIN_SHIFT = float(os.getenv("LP_MARGIN_SHIFT", "1e-7"))
LP_MAX_PIVOTS = int(os.getenv("LP_MAX_PIVOTS", "20000"))

# Sweeps
SWEEP_WORKERS = int(os.getenv("SWEEP_WORKERS", "1"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").strip().upper()
# NOTE: empty means no log files, only stderr.
LOG_DIR = os.getenv("LOG_DIR", "").strip()
