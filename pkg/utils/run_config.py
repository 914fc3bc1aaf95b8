"""
Esquema del documento de configuración de una ejecución

El documento es JSON y se valida completo antes de cualquier cálculo; las
claves desconocidas se rechazan en todos los niveles.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import AppConfig
from models.errors import DomainError
from models.frequency import FrequencyProfile, PhysicalParams

logger = logging.getLogger(__name__)


class ConfigError(Exception):
    """Documento ilegible, mal formado o con valores inválidos"""

    category = "config_error"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ProfileSpec(_Strict):
    kind: Literal["constant", "piecewise_constant", "polynomial", "tabulated", "omega_squared_table"]
    params: Dict[str, Any]


class CurrentSpec(_Strict):
    """Corriente: muestras (t, valor) interpoladas en la malla más impulsos (t0, peso)"""

    samples: List[Tuple[float, float]] = Field(default_factory=list)
    impulses: List[Tuple[float, float]] = Field(default_factory=list)


class GreensSection(_Strict):
    representation: Literal["dirichlet_x", "momentum_p", "periodic"] = "dirichlet_x"
    channel: Literal["jj", "jk", "kj", "kk"] = "jj"
    points: int = Field(default=AppConfig.DEFAULT_GRID_POINTS, ge=2)
    times: Optional[List[float]] = None
    export: Literal["green", "fundamental"] = "green"


class AmplitudeSection(_Strict):
    representation: Literal["x", "p", "periodic"] = "x"
    start: float = 0.0
    end: float = 0.0
    j: CurrentSpec = Field(default_factory=CurrentSpec)
    k: CurrentSpec = Field(default_factory=CurrentSpec)


class FunctionSpec(_Strict):
    kind: Literal["polynomial", "gaussian", "tabulated"] = "polynomial"
    coefficients: List[float] = Field(default_factory=lambda: [1.0])
    a: float = 0.0
    b: float = 0.0
    ys: List[float] = Field(default_factory=list)
    fs: List[float] = Field(default_factory=list)


class CorrelatorSection(_Strict):
    times_x: List[float] = Field(default_factory=list)
    times_p: List[float] = Field(default_factory=list)
    functions: List[FunctionSpec]
    mode: Literal["fresnel", "euclidean"] = "fresnel"
    omega_ref: float = Field(default=1.0, gt=0)
    representation: Literal["dirichlet_x", "periodic"] = "dirichlet_x"
    start: float = 0.0
    end: float = 0.0

    @model_validator(mode="after")
    def _one_function_per_time(self):
        if len(self.functions) != len(self.times_x) + len(self.times_p):
            raise ValueError("se necesita una función por tiempo de inserción")
        return self


class DiagramsSection(_Strict):
    vertex: str = "x^4"


class ValidateSection(_Strict):
    preset: Literal["quick", "full"] = "quick"
    seed: int = 20240611


class RunConfig(_Strict):
    t_a: float
    t_b: float
    mass: float = 1.0
    hbar: float = 1.0
    profile: ProfileSpec
    n_steps: int = Field(default=AppConfig.DEFAULT_N_STEPS, ge=AppConfig.MIN_N_STEPS)
    greens: Optional[GreensSection] = None
    amplitude: Optional[AmplitudeSection] = None
    correlator: Optional[CorrelatorSection] = None
    diagrams: Optional[DiagramsSection] = None
    validate_: Optional[ValidateSection] = Field(default=None, alias="validate")

    @model_validator(mode="after")
    def _ordered_interval(self):
        if not self.t_a < self.t_b:
            raise ValueError(f"se requiere t_a < t_b, recibido [{self.t_a}, {self.t_b}]")
        return self

    def build_profile(self) -> FrequencyProfile:
        return FrequencyProfile.from_config(self.profile.kind, dict(self.profile.params), self.t_a, self.t_b)

    def build_params(self) -> PhysicalParams:
        return PhysicalParams(self.mass, self.hbar)


def parse_run_config(payload: Dict) -> Tuple[RunConfig, FrequencyProfile, PhysicalParams]:
    """
    Valida un documento ya decodificado y construye perfil y parámetros.

    Raises:
        ConfigError: si el esquema o los invariantes del perfil no se cumplen
    """
    try:
        config = RunConfig.model_validate(payload)
        profile = config.build_profile()
        params = config.build_params()
    except ValidationError as e:
        raise ConfigError(f"configuración inválida: {e.error_count()} errores\n{e}") from e
    except DomainError as e:
        raise ConfigError(f"configuración inválida: {e}") from e
    logger.debug("configuración: perfil %s en [%g, %g]", profile.kind, profile.t_a, profile.t_b)
    return config, profile, params


def load_run_config(path) -> Tuple[RunConfig, FrequencyProfile, PhysicalParams]:
    """Lee y valida el documento JSON de ``path``"""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"no se puede leer {path}: {e}") from e
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON inválido en {path}: {e}") from e
    if not isinstance(payload, dict):
        raise ConfigError("el documento debe ser un objeto JSON")
    return parse_run_config(payload)
