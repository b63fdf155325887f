"""
Logging setup for the cubepaths command line.

Solver progress (coordinate choices, surgery routes, fallback searches,
persisted Unresolved instances) goes through module loggers under the
``cubepaths`` namespace. Records are written to stderr so that stdout
carries nothing but JSON results.
"""

import logging
import sys
from typing import Optional

from cubepaths.config import settings

LOG_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - "
    "%(filename)s:%(lineno)d - %(message)s"
)


def setup_logging(level: Optional[str] = None) -> None:
    """
    Route cubepaths records to stderr at the given level.

    Args:
        level: Level name; CUBEPATHS_LOG_LEVEL when omitted
    """
    level = (level or settings.log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )
    logging.getLogger("cubepaths").debug(f"Solver logging at level {level}")
