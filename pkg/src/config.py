import os
import sys
from dotenv import load_dotenv

#-----------------------------
# :: Load ENV Loader
#-----------------------------

"""
Load a .env file variables
"""
load_dotenv()


#-----------------------------
# :: Env Reader Function
#-----------------------------

"""
Reads a positive integer from the environment, falling back to a default when the variable is unset.
"""

def _positive_int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        sys.exit(f"ERROR: {name} must be an integer, got '{raw}'")
    if value < 1:
        sys.exit(f"ERROR: {name} must be >= 1, got {value}")
    return value


#-----------------------------
# :: Load ENV Varibales
#-----------------------------

"""
Worker cap, logging level, default sensor geometry and the batching budget of the
frame kernels. Every value has a default so the tool runs without a .env file.
"""

AOCC_THREADS = _positive_int_env("AOCC_THREADS", os.cpu_count() or 1)
LOG_LEVEL = os.getenv("AOCC_LOG_LEVEL", "INFO").upper()
DEFAULT_SENSOR_WIDTH = _positive_int_env("AOCC_SENSOR_WIDTH", 346)
DEFAULT_SENSOR_HEIGHT = _positive_int_env("AOCC_SENSOR_HEIGHT", 260)
FRAME_CHUNK_PIXELS = _positive_int_env("AOCC_FRAME_CHUNK_PIXELS", 16_000_000)


#-----------------------------
# :: Env Variable Validation
#-----------------------------

"""
Rejects an unknown logging level up front instead of failing inside basicConfig.
"""

if LOG_LEVEL not in {"CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"}:
    sys.exit(f"ERROR: AOCC_LOG_LEVEL must be a logging level name, got '{LOG_LEVEL}'")
