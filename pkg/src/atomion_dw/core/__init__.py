__all__ = ["cache", "errors", "json_safety", "settings", "workers"]
