import os
import logging
from typing import Iterable
from tqdm import tqdm
from src.utils.helpers import LOGS_DATA

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def log_directory() -> str:
    """
    Folder for run logs: NUCLEATION_LOGS when set, logs/ otherwise
    """
    return os.environ.get("NUCLEATION_LOGS", LOGS_DATA)


def setup_logger(name: str, log_file: str, level: int | None = None) -> logging.Logger:
    """
    Logger writing to one file of the log directory; engines, experiments and
    the results database each keep their own file
    ---
    Args:
        name (str): name of logger, e.g. "graphical_engine"
        log_file (str): file name inside the log directory (".log" appended)
            or an absolute path
        level (int | None): logging level, default NUCLEATION_LOG_LEVEL or INFO
    Returns:
        logging.Logger: configured logger instance
    """
    if level is None:
        level = logging.getLevelName(os.environ.get("NUCLEATION_LOG_LEVEL", "INFO").upper())
        if not isinstance(level, int):
            level = logging.INFO
    if not os.path.isabs(log_file):
        if not log_file.endswith(".log"):
            log_file += ".log"
        log_file = os.path.join(log_directory(), log_file)
    os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)

    logger = logging.getLogger(name)
    logger.setLevel(level)
    # one handler per logger, even when called once per run
    if not logger.handlers:
        handler = logging.FileHandler(log_file)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def progress(items: Iterable, desc: str) -> Iterable:
    """
    Progress bar over experiment trials; NUCLEATION_PROGRESS=0 turns it off
    """
    enabled = os.environ.get("NUCLEATION_PROGRESS", "1") != "0"
    return tqdm(items, desc=desc, disable=not enabled, leave=False)
