"""Cloud layer: persistence, the processing engine, alert rules and the
HTTP API that closes the provider-in-the-loop."""

from .alerts import Alert, count_upward_crossings, screen_crossing_alerts
from .engine import Engine

__all__ = ["Engine", "Alert", "screen_crossing_alerts", "count_upward_crossings"]
