"""
Controlador: despacho de los subcomandos

Traduce un documento validado en llamadas a los modelos y entrega el
resultado a la vista. Todo se calcula antes de escribir, de modo que un
error no deja un archivo de salida a medias.
"""
import logging
from functools import cached_property
from typing import Dict, Optional

import numpy as np

from config import AppConfig
from controllers.validation_controller import ValidationController
from models.frequency import FrequencyProfile, PhysicalParams
from models.functional import CurrentPair, amplitude_p, amplitude_x, partition_functional
from models.fundamental import FundamentalPair, fundamental_table, solve_fundamental
from models.greens import GreensEvaluator, classical_path_x
from models.smearing import LocalFunction, build_distribution, expectation
from models.wick import OperatorWord, connected_census, disconnected_count, render_signature
from utils.run_config import (
    AmplitudeSection,
    ConfigError,
    DiagramsSection,
    FunctionSpec,
    GreensSection,
    RunConfig,
    ValidateSection,
)
from views import output_view

logger = logging.getLogger(__name__)

COMMANDS = ("greens", "amplitude", "correlator", "diagrams", "validate")


class RunController:
    """Ejecuta un subcomando sobre una configuración validada"""

    def __init__(
        self,
        config: RunConfig,
        profile: FrequencyProfile,
        params: PhysicalParams,
        out,
        mode: Optional[str] = None,
        threads: int = 1,
    ):
        self.config = config
        self.profile = profile
        self.params = params
        self.out = out
        self.mode = mode
        self.threads = threads
        self._handlers = {
            "greens": self.run_greens,
            "amplitude": self.run_amplitude,
            "correlator": self.run_correlator,
            "diagrams": self.run_diagrams,
            "validate": self.run_validate,
        }

    @cached_property
    def pair(self) -> FundamentalPair:
        return solve_fundamental(self.profile, self.config.n_steps)

    def dispatch(self, command: str) -> int:
        if command not in self._handlers:
            raise ConfigError(f"subcomando desconocido: {command!r}")
        logger.debug("subcomando %s, salida %s", command, self.out)
        return self._handlers[command]()

    def _currents(self, section: AmplitudeSection) -> CurrentPair:
        return CurrentPair.from_tables(
            self.pair,
            section.j.samples,
            section.k.samples,
            section.j.impulses,
            section.k.impulses,
        )

    def run_greens(self) -> int:
        section = self.config.greens or GreensSection()
        if section.export == "fundamental":
            output_view.write_csv(self.out, AppConfig.CSV_HEADER_FUNDAMENTAL, fundamental_table(self.pair))
            return AppConfig.EXIT_OK
        evaluator = GreensEvaluator(self.pair, section.representation)
        if section.times is not None:
            times = np.asarray(section.times, dtype=float)
        else:
            times = np.linspace(self.profile.t_a, self.profile.t_b, section.points)
        t, t2 = np.meshgrid(times, times, indexing="ij")
        values = np.asarray(evaluator.green(section.channel, t, t2))
        rows = np.column_stack((t.ravel(), t2.ravel(), values.ravel()))
        output_view.write_csv(self.out, AppConfig.CSV_HEADER_GREENS, rows)
        return AppConfig.EXIT_OK

    def run_amplitude(self) -> int:
        section = self.config.amplitude or AmplitudeSection()
        currents = self._currents(section)
        if section.representation == "x":
            value = amplitude_x(self.pair, section.start, section.end, currents, self.params)
        elif section.representation == "p":
            value = amplitude_p(self.pair, section.start, section.end, currents, self.params)
        else:
            value = partition_functional(self.pair, currents, self.params)
        payload = {"representation": section.representation, **value.to_dict()}
        output_view.write_json(self.out, payload)
        return AppConfig.EXIT_OK

    @staticmethod
    def _local_function(spec: FunctionSpec, argument: str) -> LocalFunction:
        if spec.kind == "polynomial":
            return LocalFunction.polynomial(spec.coefficients, argument)
        if spec.kind == "gaussian":
            return LocalFunction.gaussian(spec.a, spec.b, argument)
        return LocalFunction.tabulated(spec.ys, spec.fs, argument)

    def run_correlator(self) -> int:
        section = self.config.correlator
        if section is None:
            raise ConfigError("el subcomando correlator necesita la sección 'correlator'")
        mode = self.mode or section.mode
        evaluator = GreensEvaluator(self.pair, section.representation)
        path = None
        if section.representation == "dirichlet_x":
            path = classical_path_x(self.pair, section.start, section.end, self.params)
        dist = build_distribution(
            section.times_x, section.times_p, evaluator, path, self.params, section.omega_ref, mode
        )
        n = len(section.times_x)
        functions = [
            self._local_function(spec, "position" if i < n else "momentum")
            for i, spec in enumerate(section.functions)
        ]
        value = expectation(dist, functions)
        payload: Dict = {
            "value_re": value.real,
            "value_im": value.imag,
            "mode": mode,
            "det_crosscheck": dist.det_crosscheck,
            "n_positions": dist.n_positions,
            "n_momenta": dist.n_momenta,
        }
        output_view.write_json(self.out, payload)
        return AppConfig.EXIT_OK

    def run_diagrams(self) -> int:
        section = self.config.diagrams or DiagramsSection()
        word = OperatorWord.parse(section.vertex)
        census = connected_census(word)
        payload = {
            "vertex": section.vertex,
            "connected_total": sum(s.multiplicity for s in census),
            "disconnected": disconnected_count(word),
            "signatures": [
                {
                    "multiplicity": s.multiplicity,
                    "edges": list(s.edges),
                    "loops_v1": list(s.loops_v1),
                    "loops_v2": list(s.loops_v2),
                    "text": render_signature(s),
                }
                for s in census
            ],
        }
        output_view.write_json(self.out, payload)
        return AppConfig.EXIT_OK

    def run_validate(self) -> int:
        section = self.config.validate_ or ValidateSection()
        results = ValidationController(section.preset, section.seed, self.threads, self.config.n_steps).run()
        rows = [result.to_dict() for result in results]
        output_view.print_validation_summary(rows)
        output_view.write_json(self.out, {"preset": section.preset, "checks": rows})
        if all(row["passed"] for row in rows):
            return AppConfig.EXIT_OK
        return AppConfig.EXIT_COMPUTATION_ERROR
