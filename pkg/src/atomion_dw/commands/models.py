"""실행 설정(TOML) 스키마.

물리량 키는 모두 단위 접미사를 가집니다 (``d_min_nm``, ``omega_a_khz``...).
주파수 키의 값은 f 이고 각진동수는 ω = 2πf 입니다.
접미사 없는 물리량 키(``omega_a = 1.8``)는 허용되는 접미사와 함께 거부됩니다.
"""

from __future__ import annotations

import math
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from atomion_dw.physics.floquet_micromotion import Q_STABILITY_LIMIT
from atomion_dw.physics.species_units import split_unit_suffix

Tier = Literal["acceptance", "paper"]

# 티어별 기본 기저 크기. 설정에 명시한 값이 항상 우선합니다.
TIER_DEFAULTS: dict[str, dict[str, int]] = {
    "acceptance": {
        "n_states": 40,
        "n_com": 40,
        "n_rel": 30,
        "l_max": 8,
        "n_max": 20,
        "floquet_levels": 60,
    },
    "paper": {
        "n_states": 53,
        "n_com": 69,
        "n_rel": 93,
        "l_max": 29,
        "n_max": 60,
        "floquet_levels": 2700,
    },
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    @classmethod
    def _reject_unitless_keys(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        stems: dict[str, list[str]] = {}
        for name in cls.model_fields:
            try:
                stem, suffix = split_unit_suffix(name)
            except ValueError:
                continue
            stems.setdefault(stem, []).append(suffix)
        for key in data:
            if key in stems and key not in cls.model_fields:
                accepted = ", ".join(f"{key}{s}" for s in stems[key])
                raise ValueError(f"{key!r} needs a unit suffix (use {accepted})")
        return data


class SpeciesSection(_Section):
    atom: Optional[str] = Field(default=None, description="원자 종 이름 (예: Rb87)")
    ion: Optional[str] = Field(default=None, description="이온 종 이름 (예: Yb171+)")
    atom_mass_u: Optional[float] = Field(default=None, description="원자 질량 [u]")
    ion_mass_u: Optional[float] = Field(default=None, description="이온 질량 [u]")
    c4_au: Optional[float] = Field(default=None, description="C4 [원자 단위]")
    polarizability_au: Optional[float] = Field(default=None, description="분극률 α [원자 단위]")
    r_star_nm: Optional[float] = Field(default=None, description="특성 길이 R* [nm]")

    @model_validator(mode="after")
    def _check(self) -> "SpeciesSection":
        if self.atom_mass_u is None and not self.atom:
            raise ValueError("species needs atom or atom_mass_u")
        if self.ion_mass_u is None and not self.ion:
            raise ValueError("species needs ion or ion_mass_u")
        given = [v is not None for v in (self.c4_au, self.polarizability_au, self.r_star_nm)]
        if sum(given) != 1:
            raise ValueError("exactly one of c4_au | polarizability_au | r_star_nm is required")
        for name in ("atom_mass_u", "ion_mass_u", "c4_au", "polarizability_au", "r_star_nm"):
            value = getattr(self, name)
            if value is not None and not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value!r}")
        return self


class TrapsSection(_Section):
    kind: Literal["harmonic", "paul"] = Field(default="harmonic", description="이온 트랩 종류")
    omega_a_khz: float = Field(description="원자 트랩 진동수 f_a [kHz] (ω_a = 2πf_a)")
    omega_i_khz: Optional[float] = Field(default=None, description="이온 secular 진동수 [kHz]")
    omega_perp_khz: Optional[float] = Field(default=None, description="3D 반지름 방향 원자 트랩 [kHz]")
    q: Optional[float] = Field(default=None, description="Paul 트랩 q 파라미터")
    a: float = Field(default=0.0, description="Paul 트랩 a 파라미터")
    drive_khz: Optional[float] = Field(default=None, description="RF 구동 진동수 Ω/2π [kHz]")

    @field_validator("omega_a_khz", "omega_i_khz", "omega_perp_khz", "drive_khz")
    @classmethod
    def _positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not (math.isfinite(v) and v > 0):
            raise ValueError(f"trap frequency must be > 0, got {v!r}")
        return v

    @field_validator("q")
    @classmethod
    def _stable_q(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not 0 < v < Q_STABILITY_LIMIT:
            raise ValueError(
                f"q={v!r} violates the Paul-trap stability bound 0 < q < {Q_STABILITY_LIMIT}"
            )
        return v

    @field_validator("a")
    @classmethod
    def _nonnegative_a(cls, v: float) -> float:
        if v < 0:
            raise ValueError(f"a must be >= 0, got {v!r}")
        return v

    @model_validator(mode="after")
    def _check(self) -> "TrapsSection":
        if self.kind == "paul":
            if self.q is None:
                raise ValueError("paul trap needs q")
            if self.drive_khz is None and self.omega_i_khz is None:
                raise ValueError("paul trap needs drive_khz or omega_i_khz")
        return self


class PhasesSection(_Section):
    phi_even_rad: float = Field(default=-math.pi / 4, description="1D 짝 단거리 위상 [rad]")
    phi_odd_rad: float = Field(default=math.pi / 4, description="1D 홀 단거리 위상 [rad]")
    phi_3d_rad: float = Field(default=math.pi / 4, description="3D 단거리 위상 [rad]")


class GridSection(_Section):
    points_per_wavelength: float = Field(default=20.0, description="파장당 최소 격자점 수")
    n_bound_keep: int = Field(default=2, description="유지할 분자(속박) 상태 수")
    interacting: bool = Field(default=True, description="False 면 C4 항 없이 조화진동자 극한")

    @field_validator("points_per_wavelength")
    @classmethod
    def _ppw(cls, v: float) -> float:
        if v < 10:
            raise ValueError(f"points_per_wavelength must be >= 10, got {v!r}")
        return v

    @field_validator("n_bound_keep")
    @classmethod
    def _nbk(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"n_bound_keep must be >= 0, got {v!r}")
        return v


class BasisSection(_Section):
    n_states: Optional[int] = Field(default=None, description="1D 정적 모형 parity 당 상태 수")
    n_com: Optional[int] = Field(default=None, description="질량중심 조화진동자 상태 수")
    n_rel: Optional[int] = Field(default=None, description="상대 좌표 상태 수")
    l_max: Optional[int] = Field(default=None, description="3D 최대 부분파")
    n_max: Optional[int] = Field(default=None, description="3D 부분파당 반지름 상태 수")
    n_levels: int = Field(default=40, description="스윕에서 추적할 준위 수")
    floquet_levels: Optional[int] = Field(default=None, description="Floquet 에 쓰는 고유상태 수")
    j_max: int = Field(default=2, description="Floquet class 범위 -j_max..j_max")
    n_window: int = Field(default=40, description="Floquet CSV 에 남길 준위 창")

    @field_validator("n_states", "n_com", "n_rel", "n_max", "floquet_levels", "n_levels")
    @classmethod
    def _at_least_one(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError(f"basis size must be >= 1, got {v!r}")
        return v

    @field_validator("j_max")
    @classmethod
    def _j_max(cls, v: int) -> int:
        if v < 2:
            raise ValueError(f"j_max must be >= 2 (at least five Floquet classes), got {v!r}")
        return v

    def resolved(self, tier: str) -> dict[str, int]:
        out = dict(TIER_DEFAULTS[tier])
        for key in out:
            value = getattr(self, key)
            if value is not None:
                out[key] = int(value)
        out.update(n_levels=self.n_levels, j_max=self.j_max, n_window=self.n_window)
        return out


class SweepSection(_Section):
    d_min_nm: Optional[float] = Field(default=None, description="스윕 최소 반간격 d [nm]")
    d_max_nm: Optional[float] = Field(default=None, description="스윕 최대 반간격 d [nm]")
    n_d: int = Field(default=41, description="d 점 개수 (d_min..d_max 로그 간격)")
    d_values_nm: Optional[list[float]] = Field(default=None, description="명시적 d 목록 [nm]")
    n_i_max: int = Field(default=1, description="이온 Fock 레이블/J 표의 최대 n_i")
    density_d_nm: list[float] = Field(default_factory=list, description="밀도 격자를 쓸 d [nm]")
    density_points: int = Field(default=81, description="밀도 격자 한 축의 점 수")
    density_extent_rstar: float = Field(default=8.0, description="밀도 격자 반폭 [R*]")
    coupling_d_nm: list[float] = Field(default_factory=list, description="micromotion 결합을 쓸 d [nm]")

    @model_validator(mode="after")
    def _check(self) -> "SweepSection":
        if self.d_values_nm is not None:
            if not self.d_values_nm or min(self.d_values_nm) <= 0:
                raise ValueError("d_values_nm must be a non-empty list of positive values")
            return self
        if self.d_min_nm is None or self.d_max_nm is None:
            return self
        if not 0 < self.d_min_nm <= self.d_max_nm:
            raise ValueError(
                f"need 0 < d_min_nm <= d_max_nm, got {self.d_min_nm!r}, {self.d_max_nm!r}"
            )
        if self.n_d < 1:
            raise ValueError(f"n_d must be >= 1, got {self.n_d!r}")
        return self

    def d_nm(self) -> list[float]:
        """스윕할 반간격 [nm]. 범위로 주면 로그 간격 (작은 d 쪽이 조밀)."""
        if self.d_values_nm is not None:
            return [float(d) for d in self.d_values_nm]
        if self.d_min_nm is None or self.d_max_nm is None:
            raise ValueError("sweep needs d_values_nm or d_min_nm/d_max_nm")
        if self.n_d == 1:
            return [float(self.d_max_nm)]
        grid = np.geomspace(self.d_min_nm, self.d_max_nm, self.n_d)
        return [float(d) for d in grid]


class ControlSection(_Section):
    total_time_ms: float = Field(default=2.38, description="프로토콜 총 시간 T [ms]")
    ramp_time_ms: Optional[float] = Field(default=None, description="램프 시간 [ms] (기본 T/4)")
    d_start_nm: float = Field(description="초기 반간격 [nm]")
    d_hold_nm: float = Field(description="유지 구간 반간격 [nm]")
    d_end_nm: Optional[float] = Field(default=None, description="최종 반간격 [nm] (기본 d_start)")
    d_floor_rstar: float = Field(default=1.5, description="허용 최소 반간격 [R*]")
    objective: Literal["tunnelling", "entanglement"] = Field(
        default="tunnelling", description="최적화 목적함수"
    )
    n_harmonics: int = Field(default=5, description="CRAB 조화 성분 수")
    max_evals: int = Field(default=2000, description="전체 목적함수 평가 예산")
    n_starts: int = Field(default=5, description="무작위 주파수 다중 시작 수")
    init_scale_rstar: float = Field(default=0.05, description="초기 simplex 크기 [R*]")
    n_steps: int = Field(default=2000, description="전개 기본 스텝 수")
    n_samples: int = Field(default=201, description="궤적 저장 시점 수")
    subspace_levels: Optional[int] = Field(default=None, description="축소 전개 공간 준위 수")
    subspace_samples: int = Field(default=8, description="축소 공간을 만들 d 표본 수")
    pulse_file: Optional[str] = Field(default=None, description="evolve/thermal 에 쓸 펄스 JSON")
    temperatures_nk: list[float] = Field(default_factory=list, description="F(T) 온도 [nK]")
    n_cut: int = Field(default=4, description="열적 가중치의 최대 n_i")

    @field_validator("total_time_ms", "d_start_nm", "d_hold_nm", "d_floor_rstar", "init_scale_rstar")
    @classmethod
    def _positive(cls, v: float) -> float:
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"value must be > 0, got {v!r}")
        return v

    @field_validator("temperatures_nk")
    @classmethod
    def _temperatures(cls, v: list[float]) -> list[float]:
        bad = [t for t in v if t < 0]
        if bad:
            raise ValueError(f"temperatures must be >= 0, got {bad!r}")
        return v

    @model_validator(mode="after")
    def _check(self) -> "ControlSection":
        if self.ramp_time_ms is not None and not 0 < self.ramp_time_ms <= 0.5 * self.total_time_ms:
            raise ValueError(
                f"ramp_time_ms must be in (0, total_time_ms/2], got {self.ramp_time_ms!r}"
            )
        if min(self.n_harmonics, self.n_starts, self.n_steps) < 1:
            raise ValueError("n_harmonics, n_starts and n_steps must be >= 1")
        if self.max_evals <= self.n_starts:
            raise ValueError(f"max_evals={self.max_evals!r} too small for {self.n_starts} starts")
        return self


class OutputSection(_Section):
    figures: list[str] = Field(default_factory=list, description="함께 만들 플롯 스크립트 id")
    cache: bool = Field(default=True, description="RadialBasis 캐시 사용 여부")


class RunConfig(BaseModel):
    """하나의 실행 설정. 섹션별 검증은 각 섹션 모델이 담당합니다."""

    model_config = ConfigDict(extra="forbid")

    seed: Optional[int] = Field(default=None, description="난수 시드 (u64)")
    tier: Optional[Tier] = Field(default=None, description="기본 기저 크기 티어")
    species: SpeciesSection = Field(description="원자/이온 종")
    traps: TrapsSection = Field(description="트랩 진동수")
    phases: PhasesSection = Field(default_factory=PhasesSection, description="단거리 위상")
    grid: GridSection = Field(default_factory=GridSection, description="Numerov 격자")
    basis: BasisSection = Field(default_factory=BasisSection, description="기저 크기")
    sweep: SweepSection = Field(default_factory=SweepSection, description="d 스윕")
    control: Optional[ControlSection] = Field(default=None, description="동역학/최적화")
    output: OutputSection = Field(default_factory=OutputSection, description="출력")

    @field_validator("seed")
    @classmethod
    def _u64(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and not 0 <= v < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {v!r}")
        return v
