__all__ = [
    "species_units",
    "harmonic",
    "qdt_numerov",
    "tracking",
    "static_spectrum",
    "twobody_spectrum",
    "floquet_micromotion",
]
