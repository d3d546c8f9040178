#!/usr/bin/env python3
"""
Structured output utilities for lambertprime.
Log records are emitted as OpenTelemetry-shaped JSON lines on stderr, so that
stdout stays free for result tables.
"""
import json
import sys
import time
import logging
import traceback
from typing import Any, Iterable

import pandas as pd

from . import __version__


# OpenTelemetry severity mapping
SEVERITY_MAPPING = {
    logging.DEBUG: (1, 'DEBUG'),
    logging.INFO: (9, 'INFO'),
    logging.WARNING: (13, 'WARNING'),
    logging.ERROR: (17, 'ERROR'),
    logging.CRITICAL: (21, 'CRITICAL'),
}

LEVEL_NAMES = {text: level for level, (_, text) in SEVERITY_MAPPING.items()}

_min_severity = SEVERITY_MAPPING[logging.INFO][0]


def set_log_level(level: int | str) -> None:
    """
    Set the minimum level emitted by every StructuredLogger.

    Args:
        level: Python logging level or its name ('DEBUG', 'INFO', ...)
    """
    global _min_severity
    if isinstance(level, str):
        if level.upper() not in LEVEL_NAMES:
            raise ValueError(f"Unknown log level '{level}'. Use one of {sorted(LEVEL_NAMES)}")
        level = LEVEL_NAMES[level.upper()]
    _min_severity = SEVERITY_MAPPING[level][0]


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    # mpf, Decimal and friends keep their full digits as strings
    return str(value)


def emit_log(message: str, level: int = logging.INFO, **kwargs):
    """
    Emit a structured log message as JSON to stderr.

    Args:
        message: Log message
        level: Python logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        **kwargs: Additional attributes
    """
    severity_number, severity_text = SEVERITY_MAPPING.get(level, (0, 'UNKNOWN'))

    if severity_number < _min_severity:
        return

    timestamp_ns = int(time.time() * 1e9)

    log_data = {
        'type': 'log',
        'data': {
            'timestamp': timestamp_ns,
            'observed_timestamp': timestamp_ns,
            'severity_text': severity_text,
            'severity_number': severity_number,
            'body': message,
            'resource': {
                'service.name': 'lambertprime',
                'service.version': __version__
            },
            'attributes': _jsonable(kwargs)
        }
    }

    print(json.dumps(log_data), file=sys.stderr, flush=True)


def emit_result(kind: str, data: dict):
    """
    Emit a single result record as one JSON line on stdout.

    Args:
        kind: Result kind (e.g. 'fit', 'geo')
        data: Result payload; high-precision numbers are written as strings
    """
    print(json.dumps({'type': kind, 'data': _jsonable(data)}), flush=True)


def emit_rows(frame: pd.DataFrame, fmt: str = 'tsv', stream=None):
    """
    Write a result table to stdout.

    Args:
        frame: Rows to print. Cells are printed verbatim, so callers format
            high-precision values as fixed-point strings beforehand.
        fmt: One of 'tsv', 'csv', 'json-lines'
        stream: Output stream, stdout when omitted
    """
    stream = stream or sys.stdout
    if fmt == 'tsv':
        frame.to_csv(stream, sep='\t', index=False, lineterminator='\n')
    elif fmt == 'csv':
        frame.to_csv(stream, index=False, lineterminator='\n')
    elif fmt == 'json-lines':
        for record in frame.to_dict(orient='records'):
            stream.write(json.dumps(_jsonable(record)) + '\n')
    else:
        raise ValueError(f"Unknown output format '{fmt}'")
    stream.flush()


def emit_lines(lines: Iterable[str], stream=None):
    """Write preformatted text lines to stdout."""
    stream = stream or sys.stdout
    for line in lines:
        stream.write(line + '\n')
    stream.flush()


class StructuredLogger:
    """
    Logger that emits structured JSON logs to stderr.
    """

    def __init__(self, name: str = __name__):
        self.name = name

    def debug(self, message: str, **kwargs):
        """Log debug message"""
        emit_log(message, logging.DEBUG, logger_name=self.name, **kwargs)

    def info(self, message: str, **kwargs):
        """Log info message"""
        emit_log(message, logging.INFO, logger_name=self.name, **kwargs)

    def warning(self, message: str, **kwargs):
        """Log warning message"""
        emit_log(message, logging.WARNING, logger_name=self.name, **kwargs)

    def error(self, message: str, exc_info=False, **kwargs):
        """Log error message"""
        if exc_info:
            kwargs['exception.traceback'] = traceback.format_exc()
        emit_log(message, logging.ERROR, logger_name=self.name, **kwargs)

    def critical(self, message: str, **kwargs):
        """Log critical message"""
        emit_log(message, logging.CRITICAL, logger_name=self.name, **kwargs)


def get_logger(name: str = __name__) -> StructuredLogger:
    """
    Get a structured logger instance.

    Args:
        name: Logger name

    Returns:
        StructuredLogger instance
    """
    return StructuredLogger(name)
