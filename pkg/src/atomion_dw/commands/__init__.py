__all__ = ["models", "config", "archive", "plots", "runner"]
