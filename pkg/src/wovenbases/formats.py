"""Text file formats and the JSON report.

All complex numbers are written as ``[re, im]`` pairs.  Files are JSON laid
out one matrix row (or shelf) per line so fixtures diff cleanly.  NaN and
infinities are rejected on input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FormatError
from .sis import SpectrumSamples


def _reject_constant(name):
    raise FormatError(f"non-finite number {name} is not allowed")


def _load(text: str) -> dict:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise FormatError("top level must be an object")
    return data


def _count(data: dict, key: str, minimum: int = 0) -> int:
    v = data.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
        raise FormatError(f"field {key!r} must be an integer >= {minimum}")
    return v


def _pairs(items, what: str) -> np.ndarray:
    if not isinstance(items, list):
        raise FormatError(f"{what} must be a list of [re, im] pairs")
    out = np.empty(len(items), dtype=complex)
    for i, p in enumerate(items):
        if (
            not isinstance(p, list)
            or len(p) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p)
        ):
            raise FormatError(f"{what}[{i}] is not an [re, im] pair of numbers")
        out[i] = complex(p[0], p[1])
    return out


def _pair(z: complex) -> str:
    return json.dumps([float(z.real), float(z.imag)])


def complex_to_json(a) -> list:
    """Nested lists of ``[re, im]`` pairs mirroring the array shape."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [complex_to_json(x) for x in a]


# -- matrices ---------------------------------------------------------------


def parse_matrix(text: str) -> tuple[np.ndarray, str | None]:
    data = _load(text)
    n = _count(data, "n", 1)
    entries = _pairs(data.get("entries"), "entries")
    if len(entries) != n * n:
        raise FormatError(f"expected {n * n} entries for n={n}, found {len(entries)}")
    return entries.reshape(n, n), data.get("label")


def read_matrix(path) -> tuple[np.ndarray, str | None]:
    try:
        return parse_matrix(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def format_matrix(A, label: str | None = None) -> str:
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    rows = [", ".join(_pair(z) for z in row) for row in A]
    head = f'{{\n  "n": {n},\n'
    if label is not None:
        head += f'  "label": {json.dumps(label)},\n'
    return head + '  "entries": [\n    ' + ",\n    ".join(rows) + "\n  ]\n}\n"


def write_matrix(path, A, label: str | None = None):
    Path(path).write_text(format_matrix(A, label))


# -- sample vectors -----------------------------------------------------------


def parse_vector(text: str) -> np.ndarray:
    data = _load(text)
    n = _count(data, "n", 0)
    values = _pairs(data.get("values"), "values")
    if len(values) != n:
        raise FormatError(f"expected {n} values, found {len(values)}")
    return values


def read_vector(path) -> np.ndarray:
    try:
        return parse_vector(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def format_vector(x) -> str:
    x = np.asarray(x, dtype=complex)
    body = ",\n    ".join(_pair(z) for z in x)
    return f'{{\n  "n": {len(x)},\n  "values": [\n    {body}\n  ]\n}}\n'


def write_vector(path, x):
    Path(path).write_text(format_vector(x))


# -- spectra ------------------------------------------------------------------


def parse_spectrum(text: str) -> SpectrumSamples:
    data = _load(text)
    G = _count(data, "grid_size", 2)
    K = _count(data, "k_max", 0)
    shelves = data.get("shelves")
    if not isinstance(shelves, list) or len(shelves) != 2 * K + 1:
        raise FormatError(f"expected {2 * K + 1} shelves for k_max={K}")
    values = np.empty((2 * K + 1, G), dtype=complex)
    for i, shelf in enumerate(shelves):
        row = _pairs(shelf, f"shelves[{i}]")
        if len(row) != G:
            raise FormatError(f"shelf {i - K} has {len(row)} samples, expected {G}")
        values[i] = row
    return SpectrumSamples(G, K, values, data.get("label"))


def read_spectrum(path) -> SpectrumSamples:
    try:
        return parse_spectrum(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from None


def format_spectrum(s: SpectrumSamples) -> str:
    shelves = ",\n    ".join("[" + ", ".join(_pair(z) for z in row) + "]" for row in s.values)
    head = f'{{\n  "grid_size": {s.grid_size},\n  "k_max": {s.k_max},\n'
    if s.label is not None:
        head += f'  "label": {json.dumps(s.label)},\n'
    return head + '  "shelves": [\n    ' + shelves + "\n  ]\n}\n"


def write_spectrum(path, s: SpectrumSamples):
    Path(path).write_text(format_spectrum(s))


# -- reports ------------------------------------------------------------------


@dataclass
class Report:
    """Everything needed to reproduce a verdict.  ``timings`` is excluded
    from :meth:`payload`, which is deterministic for identical inputs."""

    command: list[str]
    config: dict
    result: dict
    exit_code: int = 0
    timings: dict = field(default_factory=dict)
    tool: str = "wovenbases"
    version: str = __version__

    def _body(self) -> dict:
        return {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "config": self.config,
            "result": self.result,
            "exit_code": self.exit_code,
        }

    def payload(self) -> str:
        return json.dumps(self._body(), sort_keys=True, indent=1, allow_nan=False)

    def to_json(self) -> str:
        body = self._body()
        body["timings"] = self.timings
        return json.dumps(body, sort_keys=True, indent=1, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Report:
        d = _load(text)
        try:
            return cls(
                command=d["command"],
                config=d["config"],
                result=d["result"],
                exit_code=d["exit_code"],
                timings=d.get("timings", {}),
                tool=d["tool"],
                version=d["version"],
            )
        except KeyError as exc:
            raise FormatError(f"report lacks field {exc}") from None
