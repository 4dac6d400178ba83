from rich.console import Console

from borderflux.config.settings import Settings, get_settings

console = Console(stderr=True)

__all__ = ["Settings", "console", "get_settings"]
