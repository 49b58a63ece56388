"""Uniform periodic grids, grid functions and central difference operators."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

MIN_CELLS = 16


class GridMismatchError(ValueError):
    pass


class NonFiniteFieldError(FloatingPointError):
    pass


@dataclass(frozen=True)
class Grid1D:
    """Periodic box ``[x_min, x_max)`` split into ``n`` equal cells."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)):
            raise ValueError("grid bounds must be finite")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if int(self.n) != self.n or self.n < MIN_CELLS:
            raise ValueError(f"n must be an integer >= {MIN_CELLS}, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        x = self.x_min + (np.arange(self.n) + 0.5) * self.dx
        x.flags.writeable = False
        return x

    def field(self, values) -> "Field":
        return Field(values, self)

    def sample(self, func) -> "Field":
        """Evaluate ``func`` at the cell centres."""
        return Field(func(self.x), self)


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), n)


class Field:
    """Immutable real grid function.

    Arithmetic with another ``Field`` is only allowed on an equal grid;
    scalars and plain arrays broadcast as usual.
    """

    __slots__ = ("values", "grid")
    __array_priority__ = 100

    def __init__(self, values, grid: Grid1D, check: bool = True):
        v = np.array(values, dtype=float)
        if v.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} values, got shape {v.shape}")
        if check and not np.all(np.isfinite(v)):
            raise NonFiniteFieldError("field contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grid", grid)

    def __setattr__(self, name, value):
        raise AttributeError("Field is immutable")

    def __reduce__(self):
        return Field, (np.array(self.values), self.grid, False)

    def __repr__(self):
        return f"Field(n={self.grid.n}, min={self.values.min():.6g}, max={self.values.max():.6g})"

    def __len__(self):
        return self.grid.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def _wrap(self, values):
        return Field(values, self.grid)

    def __add__(self, other):
        return self._wrap(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.values - self._other(other))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.values)

    def __mul__(self, other):
        return self._wrap(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.values / self._other(other))

    def __pow__(self, p):
        return self._wrap(self.values**p)

    def __neg__(self):
        return self._wrap(-self.values)

    def __abs__(self):
        return self._wrap(np.abs(self.values))

    def integral(self) -> float:
        """Midpoint rule over the periodic box."""
        return float(np.sum(self.values) * self.grid.dx)

    def inner(self, other: "Field") -> float:
        return float(np.dot(self.values, self._other(other)) * self.grid.dx)

    def norm(self, p: float = 2.0) -> float:
        if np.isinf(p):
            return float(np.max(np.abs(self.values)))
        return float((np.sum(np.abs(self.values) ** p) * self.grid.dx) ** (1.0 / p))

    def shifted(self, cells: int) -> "Field":
        """Periodic translation by a whole number of cells."""
        return self._wrap(np.roll(self.values, cells))


# Array-level stencils. These carry the periodic wrap through np.roll:
# roll(v, -1)[i] == v[i+1].


def d1(v: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * dx)


def d2(v: np.ndarray, dx: float) -> np.ndarray:
    return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / (dx * dx)


def d3(v: np.ndarray, dx: float) -> np.ndarray:
    return (
        np.roll(v, -2) - 2.0 * np.roll(v, -1) + 2.0 * np.roll(v, 1) - np.roll(v, 2)
    ) / (2.0 * dx**3)


def diff1(f: Field) -> Field:
    """Central first derivative ``(f[i+1] - f[i-1]) / 2dx``."""
    return f._wrap(d1(f.values, f.grid.dx))


def diff2(f: Field) -> Field:
    """Central second derivative ``(f[i+1] - 2f[i] + f[i-1]) / dx^2``."""
    return f._wrap(d2(f.values, f.grid.dx))


def diff3(f: Field) -> Field:
    """Central third derivative on the five-point stencil."""
    return f._wrap(d3(f.values, f.grid.dx))


def symbols(n: int, dx: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fourier symbols of ``d1``, ``d2``, ``d3`` for the ``rfft`` wavenumbers.

    Exact for the discrete stencils, so a transform-space propagator built
    from them reproduces the semi-discrete operators rather than the
    continuum ones.
    """
    theta = 2.0 * np.pi * np.fft.rfftfreq(n)
    s1 = 1j * np.sin(theta) / dx
    s2 = -4.0 * np.sin(theta / 2.0) ** 2 / dx**2
    s3 = 1j * (np.sin(2.0 * theta) - 2.0 * np.sin(theta)) / dx**3
    return s1, s2, s3


def boundary_ratio(values: np.ndarray, cells: int = 4) -> float:
    """Largest magnitude in the ``cells`` cells at each end relative to max|u|."""
    peak = np.max(np.abs(values))
    if peak == 0.0:
        return 0.0
    edge = max(np.max(np.abs(values[:cells])), np.max(np.abs(values[-cells:])))
    return float(edge / peak)
