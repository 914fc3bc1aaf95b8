"""
Vista: escritura de resultados y mensajes de consola

Los resultados van a un único archivo por invocación (CSV para mallas, JSON
para resultados estructurados). Con ``-`` como destino se escriben en la
salida estándar, resaltados con Pygments si es una terminal.
"""
import csv
import io
import json
import sys
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence

import numpy as np
from pygments import highlight
from pygments.formatters import TerminalFormatter
from pygments.lexers import JsonLexer

from config import AppConfig

STDOUT_TARGET = "-"


def format_float(value) -> str:
    """Texto más corto que recupera el mismo double; igual que los floats de json"""
    return repr(float(value))


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"tipo no serializable: {type(value).__name__}")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return buffer.getvalue()


def render_json(payload: Mapping) -> str:
    return json.dumps(payload, indent=AppConfig.JSON_INDENT, ensure_ascii=False, default=_json_default) + "\n"


def _emit(target, text: str, lexer=None):
    if str(target) == STDOUT_TARGET:
        if lexer is not None and sys.stdout.isatty():
            text = highlight(text, lexer, TerminalFormatter())
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(target).write_text(text, encoding="utf-8")


def write_csv(target, header: Sequence[str], rows: Iterable[Sequence[float]]):
    _emit(target, render_csv(header, rows))


def write_json(target, payload: Mapping):
    _emit(target, render_json(payload), JsonLexer())


def render_validation_table(rows: List[Mapping]) -> str:
    """Tabla de texto con una línea por comprobación"""
    width = max((len(row["name"]) for row in rows), default=4)
    lines = []
    for row in rows:
        mark = "✅" if row["passed"] else "❌"
        value = "-" if row["value"] is None else f"{row['value']:.3e}"
        tolerance = "-" if row["tolerance"] is None else f"{row['tolerance']:.1e}"
        lines.append(f"{mark} {row['name']:<{width}}  {value:>10}  ≤ {tolerance:>7}  {row['detail']}")
    return "\n".join(lines)


def print_success(target):
    if str(target) != STDOUT_TARGET:
        print(f"{AppConfig.SUCCESS_MESSAGE} {target}", file=sys.stderr)


def print_config_error(message: str):
    print(f"{AppConfig.CONFIG_ERROR_MESSAGE} {message}", file=sys.stderr)


def print_computation_error(category: str, message: str):
    print(f"{AppConfig.COMPUTATION_ERROR_MESSAGE} {category}: {message}", file=sys.stderr)


def print_validation_summary(rows: List[Mapping]):
    print(render_validation_table(rows), file=sys.stderr)
    failed = [row["name"] for row in rows if not row["passed"]]
    if failed:
        print(f"{AppConfig.VALIDATION_FAILED_MESSAGE} {', '.join(failed)}", file=sys.stderr)
    else:
        print(AppConfig.VALIDATION_PASSED_MESSAGE, file=sys.stderr)
