"""
Logging utilities for the F4MS tools.

Provides a Tee class for dual output to console and log file, and a
LogManager that configures the standard logging tree: bracket-prefixed
messages on standard error and, when a log directory is given, a
timestamped log file that also receives everything printed to stdout.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional


SUCCESS = 25
logging.addLevelName(SUCCESS, "SUCCESS")

PREFIXES = {
    logging.DEBUG: "[.]",
    logging.INFO: "[*]",
    SUCCESS: "[+]",
    logging.WARNING: "[!]",
    logging.ERROR: "[!]",
    logging.CRITICAL: "[!]",
}


class Tee:
    """
    Write to multiple file-like objects simultaneously.

    Used to output to both console and log file at the same time.
    """

    def __init__(self, *files):
        self.files = files

    def write(self, obj):
        for f in self.files:
            f.write(obj)
            f.flush()

    def flush(self):
        for f in self.files:
            f.flush()

    def isatty(self):
        return False


class BracketFormatter(logging.Formatter):
    """Prefix each record with [*], [+], [!] or [.] by level."""

    def format(self, record: logging.LogRecord) -> str:
        prefix = PREFIXES.get(record.levelno, "[*]")
        return f"{prefix} {super().format(record)}"


def log_success(logger: logging.Logger, message: str, *args):
    logger.log(SUCCESS, message, *args)


class LogManager:
    """
    Manages logging to both console and file.

    Usage:
        log_manager = LogManager(log_dir, "f4ms_run", level=logging.INFO)
        # ... do stuff ...
        log_manager.cleanup()
    """

    def __init__(
        self,
        log_dir: Optional[Path] = None,
        prefix: str = "f4ms",
        level: int = logging.WARNING,
        stream=None,
    ):
        """
        Initialize logging to standard error and, optionally, a file.

        Args:
            log_dir: Directory to store log files (None for no file)
            prefix: Prefix for log filename
            level: Threshold for the console handler
            stream: Console stream (standard error by default)
        """
        self.root = logging.getLogger()
        self.handlers = []
        self.log_file = None
        self.log_file_handle = None
        self.original_stdout = None

        console = logging.StreamHandler(stream if stream is not None else sys.stderr)
        console.setLevel(level)
        console.setFormatter(BracketFormatter("%(message)s"))
        self.handlers.append(console)

        if log_dir is not None:
            self.log_dir = Path(log_dir)
            self.log_dir.mkdir(parents=True, exist_ok=True)

            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            self.log_file = self.log_dir / f"{prefix}_{timestamp}.log"

            self.log_file_handle = open(self.log_file, "w", encoding="utf-8")
            file_handler = logging.StreamHandler(self.log_file_handle)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(BracketFormatter("%(asctime)s %(name)s: %(message)s"))
            self.handlers.append(file_handler)

            self.original_stdout = sys.stdout
            sys.stdout = Tee(sys.stdout, self.log_file_handle)

        self.previous_level = self.root.level
        self.root.setLevel(min(h.level for h in self.handlers))
        for handler in self.handlers:
            self.root.addHandler(handler)

    def get_log_path(self) -> Optional[Path]:
        """Return the path to the current log file."""
        return self.log_file

    def cleanup(self):
        """Detach handlers, restore stdout and close the log file."""
        for handler in self.handlers:
            self.root.removeHandler(handler)
            handler.flush()
        self.handlers = []
        self.root.setLevel(self.previous_level)
        if self.original_stdout is not None:
            sys.stdout = self.original_stdout
            self.original_stdout = None
        if self.log_file_handle:
            self.log_file_handle.close()
            self.log_file_handle = None

    def __enter__(self) -> "LogManager":
        return self

    def __exit__(self, *exc):
        self.cleanup()


def verbosity_level(verbose: int) -> int:
    """Map a -v count to a console level: 0 WARNING, 1 INFO, 2+ DEBUG."""
    if verbose >= 2:
        return logging.DEBUG
    if verbose == 1:
        return logging.INFO
    return logging.WARNING
