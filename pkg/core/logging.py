"""
JSON-lines log formatting for machine-readable runs
"""
import json
import logging
from datetime import datetime, timezone
from typing import List, Optional, Tuple

# Attributes every LogRecord carries; anything else came in through `extra`
_RECORD_ATTRS = set(vars(logging.LogRecord('', 0, '', 0, '', (), None))) | {'message', 'asctime'}


class JsonLinesFormatter(logging.Formatter):
    """Formats each record as one JSON object per line"""

    def format(self, record: logging.LogRecord) -> str:
        payload = {
            'ts': datetime.fromtimestamp(record.created, tz=timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        for key, value in vars(record).items():
            if key not in _RECORD_ATTRS and not key.startswith('_'):
                payload[key] = value
        if record.exc_info:
            payload['exc'] = self.formatException(record.exc_info)
        return json.dumps(payload, sort_keys=True, default=str)


def use_json_lines(logger: logging.Logger = None) -> List[Tuple[logging.Handler, Optional[logging.Formatter]]]:
    """
    Switch every handler on the given (default: root) logger to JSON lines.

    Returns the previous (handler, formatter) pairs for restore_formatters.
    """
    logger = logger or logging.getLogger()
    formatter = JsonLinesFormatter()
    previous = [(handler, handler.formatter) for handler in logger.handlers]
    for handler in logger.handlers:
        handler.setFormatter(formatter)
    return previous


def restore_formatters(previous: List[Tuple[logging.Handler, Optional[logging.Formatter]]]) -> None:
    for handler, formatter in previous:
        handler.setFormatter(formatter)
