__all__ = ["pulses", "propagation", "protocols", "crab", "thermal"]
