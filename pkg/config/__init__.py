from .settings import Settings, settings
from .validation import ConfigReport, RiskConfig, RunConfig, format_errors, validate_config

__all__ = ["ConfigReport", "RiskConfig", "RunConfig", "Settings", "format_errors", "settings", "validate_config"]
