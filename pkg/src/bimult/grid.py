"""Periodic torus grids, sampled functions and the discrete Fourier transform.

A torus of length ``L`` carries ``M`` samples per axis at the centered points
``x_n = (n - M/2) h`` with ``h = L/M``.  The frequency variable lives on the
points ``k/L`` with ``-M/2 <= k < M/2``, which is again a centered torus grid
of length ``M/L`` (see :meth:`TorusGrid.dual`).

Normalization
-------------
The transforms are Riemann sums of the continuum transforms::

    f_hat(k/L) = h^d   sum_x f(x) exp(-2 pi i x.k/L)
    f(x)       = L^-d  sum_k f_hat(k/L) exp(+2 pi i x.k/L)

so a band-limited function whose period is ``L`` has ``f_hat`` equal to its
continuum Fourier transform sampled at ``k/L``, and Parseval reads
``h^d sum |f|^2 = L^-d sum |f_hat|^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ContractError",
    "GridError",
    "TorusGrid",
    "SampledFunction",
    "dft_forward",
    "dft_inverse",
    "lp_norm",
    "tensor_square",
]

SPACE = "space"
FREQUENCY = "frequency"


class GridError(ValueError):
    """Invalid grid parameters or incompatible grids."""


class ContractError(ValueError):
    """A function was handed data on the wrong side of the transform."""


@dataclass(frozen=True)
class TorusGrid:
    """Uniform centered grid on the torus ``[-L/2, L/2)^dim``.

    Parameters
    ----------
    dim : int
        1 or 2.
    length : float
        Torus period ``L`` per axis.
    points : int
        Samples per axis ``M`` (even, at least 4).
    """

    dim: int
    length: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GridError(f"dim must be 1 or 2, got {self.dim}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise GridError(f"length must be positive, got {self.length}")
        if int(self.points) != self.points or self.points < 4 or self.points % 2:
            raise GridError(f"points must be an even integer >= 4, got {self.points}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "length", float(self.length))

    @property
    def spacing(self) -> float:
        return self.length / self.points

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    def coords(self) -> np.ndarray:
        """1D sample positions ``(n - M/2) h``."""
        return (np.arange(self.points) - self.points // 2) * self.spacing

    def freqs(self) -> np.ndarray:
        """1D frequencies ``k/L`` in the same centered order as the samples."""
        return (np.arange(self.points) - self.points // 2) / self.length

    def mesh(self) -> tuple:
        """Coordinate arrays broadcastable to :attr:`shape`."""
        x = self.coords()
        if self.dim == 1:
            return (x,)
        return (x[:, None], x[None, :])

    def dual(self) -> "TorusGrid":
        """The frequency grid, viewed as a torus of length ``M/L``."""
        return TorusGrid(self.dim, self.points / self.length, self.points)

    def with_dim(self, dim: int) -> "TorusGrid":
        return TorusGrid(dim, self.length, self.points)

    def compatible(self, other: "TorusGrid", rtol: float = 1e-12) -> bool:
        return (self.points == other.points
                and abs(self.length - other.length) <= rtol * self.length)


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples on a :class:`TorusGrid`.

    ``grid`` is always the spatial grid; ``side`` says whether ``values``
    are spatial samples or Fourier samples at ``k/L``.
    """

    grid: TorusGrid
    values: np.ndarray = field(repr=False)
    side: str = SPACE

    def __post_init__(self):
        if self.side not in (SPACE, FREQUENCY):
            raise ContractError(f"side must be 'space' or 'frequency', got {self.side!r}")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            if v.size == self.grid.points ** self.grid.dim:
                v = v.reshape(self.grid.shape)
            else:
                raise GridError(f"values of shape {v.shape} do not fit grid {self.grid.shape}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def coords(self) -> np.ndarray:
        return self.grid.coords() if self.side == SPACE else self.grid.freqs()

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.side)


def _require(f: SampledFunction, side: str) -> None:
    if f.side != side:
        raise ContractError(f"expected a {side}-side function, got {f.side}")


def _fwd(values: np.ndarray, h: float) -> np.ndarray:
    axes = tuple(range(values.ndim))
    out = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(values, axes=axes), axes=axes), axes=axes)
    return out * h ** values.ndim


def _inv(values: np.ndarray, h: float) -> np.ndarray:
    axes = tuple(range(values.ndim))
    out = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(values, axes=axes), axes=axes), axes=axes)
    return out / h ** values.ndim


def dft_forward(f: SampledFunction) -> SampledFunction:
    """Spatial samples to Fourier samples at ``k/L``."""
    _require(f, SPACE)
    return SampledFunction(f.grid, _fwd(f.values, f.grid.spacing), FREQUENCY)


def dft_inverse(F: SampledFunction) -> SampledFunction:
    """Exact inverse of :func:`dft_forward`."""
    _require(F, FREQUENCY)
    return SampledFunction(F.grid, _inv(F.values, F.grid.spacing), SPACE)


def lp_norm(f: SampledFunction, p: float) -> float:
    """Quadrature ``(h^d sum |f|^p)^(1/p)``; ``p = inf`` gives ``max |f|``."""
    _require(f, SPACE)
    return lp_norm_array(f.values, f.grid.spacing, p)


def lp_norm_array(values: np.ndarray, h: float, p: float) -> float:
    """:func:`lp_norm` on a raw array with cell size ``h`` per axis."""
    if p == np.inf:
        return float(np.max(np.abs(values))) if values.size else 0.0
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    a = np.abs(values)
    scale = a.max() if a.size else 0.0
    if scale == 0:
        return 0.0
    # rescale before powering so tiny or huge p stay finite
    s = np.sum((a / scale) ** p) * h ** values.ndim
    return float(scale * s ** (1.0 / p))


def tensor_square(f: SampledFunction) -> SampledFunction:
    """``F(x1, x2) = f(x1) f(x2)`` on the 2D version of a 1D grid."""
    if f.grid.dim != 1:
        raise GridError("tensor_square needs a 1D function")
    return SampledFunction(f.grid.with_dim(2), np.multiply.outer(f.values, f.values), f.side)
