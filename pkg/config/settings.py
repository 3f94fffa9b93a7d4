"""
Runtime settings for qrmax.

Centralizes environment variable access with sensible defaults.
Use this module instead of direct os.getenv() calls for consistency.
"""
import os
from dataclasses import dataclass
from typing import Optional


@dataclass
class RuntimeSettings:
    """Parallelism settings."""
    threads: int

    @classmethod
    def from_env(cls) -> 'RuntimeSettings':
        default_threads = os.cpu_count() or 1
        threads = _parse_int(os.getenv('QRMAX_THREADS', str(default_threads)), default_threads)
        return cls(threads=max(1, threads))


@dataclass
class LoggingSettings:
    """Logging settings."""
    level: str

    @classmethod
    def from_env(cls) -> 'LoggingSettings':
        level = os.getenv('QRMAX_LOG_LEVEL', 'INFO').upper()
        if level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            level = 'INFO'
        return cls(level=level)


@dataclass
class OutputSettings:
    """Output location settings."""
    output_dir: str
    write_png_preview: bool

    @classmethod
    def from_env(cls) -> 'OutputSettings':
        return cls(
            output_dir=os.getenv('QRMAX_OUTPUT_DIR', 'outputs'),
            write_png_preview=_parse_bool(os.getenv('QRMAX_PNG_PREVIEW', 'true')),
        )


@dataclass
class Settings:
    """Main settings container."""
    runtime: RuntimeSettings
    logging: LoggingSettings
    output: OutputSettings

    @classmethod
    def load(cls) -> 'Settings':
        return cls(
            runtime=RuntimeSettings.from_env(),
            logging=LoggingSettings.from_env(),
            output=OutputSettings.from_env(),
        )


def _parse_int(value: str, default: int) -> int:
    """
    Parse integer from environment variable string.

    Args:
        value: String value to parse
        default: Default value if parsing fails

    Returns:
        Parsed integer or default
    """
    try:
        return int(value)
    except (ValueError, TypeError):
        return default


def _parse_bool(value: str) -> bool:
    """
    Parse boolean from environment variable string.

    Accepts: true, yes, 1, t, y (case-insensitive)
    """
    return str(value).lower() in ('true', 'yes', '1', 't', 'y')


# Global settings instance (lazy loaded)
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create global settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings.load()
    return _settings


def reload_settings() -> Settings:
    """Reload settings from environment."""
    global _settings
    _settings = Settings.load()
    return _settings


if __name__ == "__main__":
    settings = get_settings()
    print(f"Threads: {settings.runtime.threads}")
    print(f"Log level: {settings.logging.level}")
    print(f"Output dir: {settings.output.output_dir}")
