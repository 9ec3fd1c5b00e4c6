"""원자-이온 특성 스케일(R*, E*)과 내부 무차원 단위계.

내부 계산은 모두 무차원입니다:
- 길이 R*, 에너지 E*, ħ = 1, 시간 ħ/E*
- 이 단위에서 환산질량 μ = 1/2 이고 C4/x⁴ 항은 1/x⁴ 가 됩니다.
- 각진동수 ω = 2πf 는 ħω/E* = f/(E*/h) 로 변환됩니다.

단위 변환은 입출력 경계(config, CSV)에서만 수행합니다.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from scipy import constants as sc

from atomion_dw.core.errors import ConfigError, DomainError

logger = logging.getLogger(__name__)

HBAR = sc.hbar
H_PLANCK = sc.h
K_B = sc.k
AMU_KG = sc.physical_constants["atomic mass constant"][0]
ELECTRON_MASS_U = sc.physical_constants["electron mass in u"][0]
HARTREE_J = sc.physical_constants["Hartree energy"][0]
BOHR_M = sc.physical_constants["Bohr radius"][0]

# 중성 원자 동위원소 질량 (u). 이온 질량은 전자 하나를 뺀 값으로 계산합니다.
ISOTOPE_MASSES_U: dict[str, float] = {
    "Li6": 6.0151228874,
    "Li7": 7.0160034366,
    "Na23": 22.9897692820,
    "K40": 39.963998166,
    "Ca40": 39.962590863,
    "Rb87": 86.909180531,
    "Sr88": 87.9056125,
    "Cs133": 132.905451961,
    "Ba138": 137.905247,
    "Yb171": 170.9363315,
    "Yb174": 173.9388664,
}


def species_mass_u(name: str) -> float:
    """이름으로 질량(u)을 찾습니다. 'Yb171+' 처럼 '+' 가 붙으면 이온 질량."""
    key = (name or "").strip()
    charge = 0
    while key.endswith("+"):
        charge += 1
        key = key[:-1]
    if key not in ISOTOPE_MASSES_U:
        known = ", ".join(sorted(ISOTOPE_MASSES_U))
        raise DomainError(f"Unknown species {name!r} (known: {known})")
    return ISOTOPE_MASSES_U[key] - charge * ELECTRON_MASS_U


def _require_positive(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v) or v <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value!r}")
    return v


@dataclass(frozen=True)
class SpeciesPair:
    """원자/이온 쌍. 질량은 u, C4 는 원자 단위(E_h a0⁴)로 보관합니다."""

    atom_mass_u: float
    ion_mass_u: float
    c4_au: float
    atom: str = "atom"
    ion: str = "ion"

    def __post_init__(self) -> None:
        _require_positive("atom_mass", self.atom_mass_u)
        _require_positive("ion_mass", self.ion_mass_u)
        _require_positive("c4", self.c4_au)

    @classmethod
    def from_polarizability(
        cls,
        atom_mass_u: float,
        ion_mass_u: float,
        polarizability_au: float,
        *,
        atom: str = "atom",
        ion: str = "ion",
    ) -> "SpeciesPair":
        # 원자 단위에서 C4 = α/2
        alpha = _require_positive("polarizability", polarizability_au)
        return cls(atom_mass_u, ion_mass_u, 0.5 * alpha, atom=atom, ion=ion)

    @classmethod
    def from_r_star(
        cls,
        atom_mass_u: float,
        ion_mass_u: float,
        r_star_nm: float,
        *,
        atom: str = "atom",
        ion: str = "ion",
    ) -> "SpeciesPair":
        r_star = _require_positive("r_star", r_star_nm) * 1e-9
        m_a = _require_positive("atom_mass", atom_mass_u)
        m_i = _require_positive("ion_mass", ion_mass_u)
        mu_kg = m_a * m_i / (m_a + m_i) * AMU_KG
        c4_si = r_star**2 * HBAR**2 / (2.0 * mu_kg)
        return cls(m_a, m_i, c4_si / (HARTREE_J * BOHR_M**4), atom=atom, ion=ion)

    @classmethod
    def from_names(
        cls,
        atom: str,
        ion: str,
        *,
        c4_au: Optional[float] = None,
        polarizability_au: Optional[float] = None,
        r_star_nm: Optional[float] = None,
    ) -> "SpeciesPair":
        given = [v is not None for v in (c4_au, polarizability_au, r_star_nm)]
        if sum(given) != 1:
            raise ConfigError(
                "exactly one of c4_au | polarizability_au | r_star_nm is required"
            )
        m_a = species_mass_u(atom)
        m_i = species_mass_u(ion)
        if c4_au is not None:
            return cls(m_a, m_i, float(c4_au), atom=atom, ion=ion)
        if polarizability_au is not None:
            return cls.from_polarizability(
                m_a, m_i, float(polarizability_au), atom=atom, ion=ion
            )
        return cls.from_r_star(m_a, m_i, float(r_star_nm or 0.0), atom=atom, ion=ion)

    # --- derived ---------------------------------------------------------

    @property
    def total_mass_u(self) -> float:
        return self.atom_mass_u + self.ion_mass_u

    @property
    def reduced_mass_u(self) -> float:
        return self.atom_mass_u * self.ion_mass_u / self.total_mass_u

    @property
    def reduced_mass_kg(self) -> float:
        return self.reduced_mass_u * AMU_KG

    @property
    def c4_si(self) -> float:
        return self.c4_au * HARTREE_J * BOHR_M**4

    @property
    def r_star_m(self) -> float:
        return math.sqrt(2.0 * self.reduced_mass_kg * self.c4_si / HBAR**2)

    @property
    def e_star_j(self) -> float:
        return HBAR**2 / (2.0 * self.reduced_mass_kg * self.r_star_m**2)

    @property
    def atom_mass_factor(self) -> float:
        """sqrt(m_a/μ): 원자 좌표를 풀 때의 경계 위상 질량 인자."""
        return math.sqrt(self.atom_mass_u / self.reduced_mass_u)

    @property
    def label(self) -> str:
        return f"{self.atom}/{self.ion}"


@dataclass(frozen=True)
class CharacteristicScales:
    r_star_m: float
    e_star_j: float

    @property
    def r_star_nm(self) -> float:
        return self.r_star_m * 1e9

    @property
    def e_star_over_h_hz(self) -> float:
        return self.e_star_j / H_PLANCK


def characteristic_scales(pair: SpeciesPair) -> CharacteristicScales:
    return CharacteristicScales(r_star_m=pair.r_star_m, e_star_j=pair.e_star_j)


# 단위 접미사 -> (물리량 종류, SI 배율)
_SUFFIXES: dict[str, tuple[str, float]] = {
    "_m": ("length", 1.0),
    "_um": ("length", 1e-6),
    "_nm": ("length", 1e-9),
    "_rstar": ("length_rstar", 1.0),
    "_hz": ("frequency", 1.0),
    "_khz": ("frequency", 1e3),
    "_estar": ("energy_estar", 1.0),
    "_j": ("energy", 1.0),
    "_s": ("time", 1.0),
    "_ms": ("time", 1e-3),
    "_us": ("time", 1e-6),
    "_k": ("temperature", 1.0),
    "_uk": ("temperature", 1e-6),
    "_nk": ("temperature", 1e-9),
    "_rad": ("plain", 1.0),
    "_u": ("plain", 1.0),
    "_au": ("plain", 1.0),
}


def split_unit_suffix(key: str) -> tuple[str, str]:
    """'d_nm' -> ('d', '_nm'). 알려진 접미사가 없으면 ConfigError."""
    for suffix in sorted(_SUFFIXES, key=len, reverse=True):
        if key.endswith(suffix) and len(key) > len(suffix):
            return key[: -len(suffix)], suffix
    accepted = ", ".join(sorted(_SUFFIXES))
    raise ConfigError(f"{key!r} has no unit suffix (accepted: {accepted})")


@dataclass(frozen=True)
class UnitSystem:
    """SpeciesPair 로부터 정해지는 무차원 단위계."""

    length_unit_m: float
    energy_unit_j: float

    @classmethod
    def for_pair(cls, pair: SpeciesPair) -> "UnitSystem":
        return cls(length_unit_m=pair.r_star_m, energy_unit_j=pair.e_star_j)

    @property
    def time_unit_s(self) -> float:
        return HBAR / self.energy_unit_j

    @property
    def frequency_unit_hz(self) -> float:
        """E*/h. 각진동수 2πf 의 무차원 값은 f / (E*/h)."""
        return self.energy_unit_j / H_PLANCK

    # 개별 변환
    def length(self, meters: float) -> float:
        return meters / self.length_unit_m

    def length_si(self, value: float) -> float:
        return value * self.length_unit_m

    def angular_frequency(self, hz: float) -> float:
        return hz / self.frequency_unit_hz

    def angular_frequency_hz(self, value: float) -> float:
        return value * self.frequency_unit_hz

    def energy_hz(self, value: float) -> float:
        """무차원 에너지를 E/h [Hz] 로."""
        return value * self.frequency_unit_hz

    def time(self, seconds: float) -> float:
        return seconds / self.time_unit_s

    def time_si(self, value: float) -> float:
        return value * self.time_unit_s

    def temperature(self, kelvin: float) -> float:
        return K_B * kelvin / self.energy_unit_j

    def temperature_si(self, value: float) -> float:
        return value * self.energy_unit_j / K_B

    def to_dimensionless_value(self, key: str, value: float) -> tuple[str, float]:
        stem, suffix = split_unit_suffix(key)
        kind, scale = _SUFFIXES[suffix]
        v = float(value)
        if kind == "length":
            return stem, self.length(v * scale)
        if kind == "frequency":
            return stem, self.angular_frequency(v * scale)
        if kind == "energy":
            return stem, v * scale / self.energy_unit_j
        if kind == "time":
            return stem, self.time(v * scale)
        if kind == "temperature":
            return stem, self.temperature(v * scale)
        return stem, v

    def from_dimensionless_value(self, stem: str, suffix: str, value: float) -> float:
        if suffix not in _SUFFIXES:
            raise ConfigError(f"Unknown unit suffix {suffix!r} for {stem!r}")
        kind, scale = _SUFFIXES[suffix]
        v = float(value)
        if kind == "length":
            return self.length_si(v) / scale
        if kind == "frequency":
            return self.angular_frequency_hz(v) / scale
        if kind == "energy":
            return v * self.energy_unit_j / scale
        if kind == "time":
            return self.time_si(v) / scale
        if kind == "temperature":
            return self.temperature_si(v) / scale
        return v


@dataclass(frozen=True)
class DimensionlessProblem:
    """무차원 질량과 변환된 물리량 묶음."""

    pair: SpeciesPair
    units: UnitSystem
    quantities: Mapping[str, float] = field(default_factory=dict)

    @property
    def mu(self) -> float:
        return 0.5

    @property
    def m_a(self) -> float:
        return 0.5 * self.pair.atom_mass_u / self.pair.reduced_mass_u

    @property
    def m_i(self) -> float:
        return 0.5 * self.pair.ion_mass_u / self.pair.reduced_mass_u

    @property
    def total_mass(self) -> float:
        return self.m_a + self.m_i

    def __getitem__(self, stem: str) -> float:
        try:
            return self.quantities[stem]
        except KeyError as e:
            raise ConfigError(f"missing quantity {stem!r}") from e


def to_dimensionless(
    pair: SpeciesPair, physical: Optional[Mapping[str, Any]] = None
) -> DimensionlessProblem:
    """단위 접미사가 붙은 물리량을 무차원 값으로 변환합니다.

    - 키는 반드시 접미사를 가져야 합니다 (``d_nm``, ``omega_a_khz``...).
    - 주파수 키의 값 f 는 ω = 2πf 의 f 입니다.
    """
    units = UnitSystem.for_pair(pair)
    out: dict[str, float] = {}
    for key, value in (physical or {}).items():
        v = float(value)
        if not math.isfinite(v):
            raise DomainError(f"{key} must be finite, got {value!r}")
        stem, dimless = units.to_dimensionless_value(key, v)
        out[stem] = dimless
    return DimensionlessProblem(pair=pair, units=units, quantities=out)


def from_dimensionless(
    problem: DimensionlessProblem, suffixes: Mapping[str, str]
) -> dict[str, float]:
    """``{stem: suffix}`` 에 맞춰 물리 단위 키로 되돌립니다."""
    out: dict[str, float] = {}
    for stem, suffix in suffixes.items():
        out[f"{stem}{suffix}"] = problem.units.from_dimensionless_value(
            stem, suffix, problem[stem]
        )
    return out
