import sys
import logging
from src.config import LOG_LEVEL
from src.cli import main


#-----------------------------
# ::  Logger Variable
#-----------------------------

"""
Logs go to stderr so CSV written to stdout stays clean.
"""

logging.basicConfig(
    level=LOG_LEVEL,
    stream=sys.stderr,
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)
logger = logging.getLogger(__name__)


#-----------------------------
# :: Run Main
#-----------------------------

"""
Runs one CLI command and exits with its status: 0 on success, 1 on data errors, 2 on
usage errors.
"""

if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
