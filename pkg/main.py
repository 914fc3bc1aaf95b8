#!/usr/bin/env python3
"""
Propagador armónico con frecuencia dependiente del tiempo
Línea de comandos: greens, amplitude, correlator, diagrams
"""

import argparse
import logging
import os
import sys

# Añadir el directorio actual al path para importar los módulos
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import AppConfig  # noqa: E402
from controllers.run_controller import COMMANDS, RunController  # noqa: E402
from models.errors import OscillatorError  # noqa: E402
from utils.run_config import ConfigError, load_run_config  # noqa: E402
from views import output_view  # noqa: E402

logger = logging.getLogger(__name__)

VISIBLE_COMMANDS = {
    "greens": "Funciones de Green en una malla (CSV)",
    "amplitude": "Amplitud con corrientes o funcional periódico (JSON)",
    "correlator": "Valor esperado por la fórmula de difuminado (JSON)",
    "diagrams": "Censo de diagramas conexos de segundo orden (JSON)",
}


class _ArgumentParser(argparse.ArgumentParser):
    """Los errores de argumentos son errores de configuración"""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="propagador", description="Oscilador armónico con Ω(t)")
    subparsers = parser.add_subparsers(dest="command", metavar="{" + ",".join(VISIBLE_COMMANDS) + "}")
    subparsers.required = True
    for command in COMMANDS:
        if command in VISIBLE_COMMANDS:
            sub = subparsers.add_parser(command, help=VISIBLE_COMMANDS[command])
        else:
            sub = subparsers.add_parser(command)
        sub.add_argument("--config", required=True, help="Documento JSON de la ejecución")
        sub.add_argument("--out", required=True, help="Archivo de salida, o - para la salida estándar")
        sub.add_argument("--threads", type=int, default=1, help="Hilos para la batería de comprobaciones")
        sub.add_argument("-v", "--verbose", action="store_true", help="Registro en nivel DEBUG")
        if command == "correlator":
            sub.add_argument(
                "--mode", choices=("fresnel", "euclidean"), default=None, help="Sustituye el modo del documento"
            )
    return parser


def run(argv) -> int:
    """Ejecuta un subcomando y devuelve el código de salida"""
    try:
        args = build_parser().parse_args(list(argv))
        logging.basicConfig(
            level=logging.DEBUG if args.verbose else logging.WARNING,
            format="%(levelname)s %(name)s: %(message)s",
        )
        if args.threads < 1:
            raise ConfigError("--threads debe ser un entero positivo")
        config, profile, params = load_run_config(args.config)
        controller = RunController(config, profile, params, args.out, getattr(args, "mode", None), args.threads)
        code = controller.dispatch(args.command)
    except ConfigError as e:
        output_view.print_config_error(str(e))
        return AppConfig.EXIT_CONFIG_ERROR
    except OscillatorError as e:
        output_view.print_computation_error(e.category, str(e))
        return AppConfig.EXIT_COMPUTATION_ERROR
    if code == AppConfig.EXIT_OK:
        output_view.print_success(args.out)
    return code


def main():
    """Función principal"""
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        print("\n¡Cálculo interrumpido por el usuario!", file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
