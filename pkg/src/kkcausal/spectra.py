"""Frequency grids, sampled spectra, tail models and the spectrum CSV format."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator


class GridError(ValueError):
    pass


class SpectrumParseError(ValueError):
    """Malformed spectrum CSV; the message carries the offending line number."""


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    n_points: int

    def __post_init__(self):
        if not (math.isfinite(self.omega_min) and math.isfinite(self.omega_max)):
            raise GridError("grid bounds must be finite")
        if not self.omega_min < self.omega_max:
            raise GridError(f"need omega_min < omega_max, got {self.omega_min}, {self.omega_max}")
        if self.n_points < 16 or self.n_points % 2:
            raise GridError(f"n_points must be even and >= 16, got {self.n_points}")

    @classmethod
    def parse(cls, text: str) -> "FrequencyGrid":
        """Parse ``MIN:MAX:N``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise GridError(f"grid spec must look like MIN:MAX:N, got {text!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            n = int(parts[2])
        except ValueError:
            raise GridError(f"grid spec must look like MIN:MAX:N, got {text!r}") from None
        return cls(lo, hi, n)

    @property
    def spacing(self) -> float:
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def omegas(self) -> np.ndarray:
        return np.linspace(self.omega_min, self.omega_max, self.n_points)

    def __str__(self):
        return f"{self.omega_min:g}:{self.omega_max:g}:{self.n_points}"


@dataclass(frozen=True)
class TailModel:
    """Assumed behaviour of a spectrum component beyond the grid.

    ``order=None`` means no tail is modelled. Otherwise each side is modelled
    as ``c / |nu|**order`` with ``c`` fitted separately on the outermost
    ``fit_fraction`` of the samples.
    """

    order: Optional[float] = None
    fit_fraction: float = 0.05

    @classmethod
    def rational(cls, order: float = 1.0) -> "TailModel":
        if not order > 0:
            raise ValueError("tail order must be positive")
        return cls(order=float(order))

    @property
    def is_none(self) -> bool:
        return self.order is None

    def __str__(self):
        return "None" if self.order is None else f"Rational({self.order:g})"


NO_TAIL = TailModel()
RATIONAL_1 = TailModel.rational(1.0)


@dataclass(frozen=True)
class Spectrum:
    grid: FrequencyGrid
    values: np.ndarray
    tail_model: TailModel = field(default=RATIONAL_1)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n_points,):
            raise ValueError(f"expected {self.grid.n_points} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("spectrum values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    @property
    def omegas(self) -> np.ndarray:
        return self.grid.omegas


# ---------------------------------------------------------------------------
# CSV


def read_spectrum_csv(path, columns: Sequence[str] = ("omega", "re", "im")
                      ) -> tuple[np.ndarray, np.ndarray]:
    """Read ``omega`` and complex values from a headed CSV file.

    Lines starting with ``#`` are skipped. ``columns`` names the header
    fields holding frequency, real part and imaginary part, in that order.
    """
    if len(columns) != 3:
        raise SpectrumParseError("columns must name omega, real and imaginary fields")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SpectrumParseError(f"{path}: not valid UTF-8 ({exc})") from None
    rows = []
    header = None
    idx = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = next(csv.reader([stripped]))
        fields = [f.strip() for f in fields]
        if header is None:
            header = fields
            missing = [c for c in columns if c not in header]
            if missing:
                raise SpectrumParseError(
                    f"line {lineno}: header lacks column(s) {', '.join(missing)}")
            idx = [header.index(c) for c in columns]
            continue
        if len(fields) != len(header):
            raise SpectrumParseError(
                f"line {lineno}: expected {len(header)} fields, got {len(fields)}")
        try:
            vals = [float(fields[i]) for i in idx]
        except ValueError:
            raise SpectrumParseError(f"line {lineno}: non-numeric value in {line!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise SpectrumParseError(f"line {lineno}: non-finite value")
        if rows and vals[0] <= rows[-1][0]:
            raise SpectrumParseError(f"line {lineno}: omega not strictly increasing")
        rows.append(vals)
    if header is None:
        raise SpectrumParseError(f"{path}: empty file (no header)")
    if not rows:
        raise SpectrumParseError(f"{path}: no data rows")
    arr = np.asarray(rows)
    return arr[:, 0], arr[:, 1] + 1j * arr[:, 2]


def format_float(x: float) -> str:
    """12 significant digits in scientific notation; ``nan`` for missing values."""
    if x is None or not math.isfinite(x):
        return "nan"
    return f"{x:.11e}"


def atomic_write_text(path, text: str):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_columns_csv(path, columns: dict[str, np.ndarray]):
    buf = io.StringIO()
    names = list(columns)
    buf.write(",".join(names) + "\n")
    n = len(next(iter(columns.values())))
    for i in range(n):
        buf.write(",".join(format_float(float(columns[c][i])) for c in names) + "\n")
    atomic_write_text(path, buf.getvalue())


def write_spectrum_csv(path, spectrum: Spectrum):
    write_columns_csv(path, {"omega": spectrum.omegas, "re": spectrum.real,
                             "im": spectrum.imag})


def resample(omega: np.ndarray, values: np.ndarray, grid: FrequencyGrid) -> np.ndarray:
    """Shape-preserving (PCHIP) resampling of measured values onto ``grid``.

    The grid must lie within the data range; no extrapolation is done.
    """
    w = grid.omegas
    lo, hi = omega[0], omega[-1]
    span = hi - lo
    if w[0] < lo - 1e-12 * span or w[-1] > hi + 1e-12 * span:
        raise GridError(
            f"grid [{w[0]:g}, {w[-1]:g}] extends beyond the data range [{lo:g}, {hi:g}]")
    w = np.clip(w, lo, hi)
    re = PchipInterpolator(omega, values.real)(w)
    im = PchipInterpolator(omega, values.imag)(w)
    return re + 1j * im
