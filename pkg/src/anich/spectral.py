"""Periodic Fourier spectral backbone: grids, fields, transforms, calculus.

Conventions
-----------
* 1D values have shape ``(n,)``.  2D values have shape ``(ny, nx)`` with y as
  the slow (outer) axis and x as the fast (inner) axis, so C-order raveling
  is y-major/x-minor.  This layout is also the on-disk snapshot order.
* Wavenumbers per dimension are the integer modes
  ``{0, 1, ..., n/2, -n/2+1, ..., -1}`` scaled by ``2*pi/length``.  The
  Nyquist mode (+n/2 slot) is zeroed in odd-order derivatives.
* Fourier coefficients are normalized so ``coeffs[0, ..., 0]`` is the field
  mean; ``from_spectral(to_spectral(u)) == u`` to roundoff.
* Quadrature is the uniform-grid mean times the domain volume, which is
  spectrally exact for resolved fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import GridMismatchError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic tensor grid in 1 or 2 dimensions.

    ``n`` and ``length`` are per-dimension tuples ordered (x,) or (x, y).
    Value arrays are indexed ``[ix]`` in 1D and ``[iy, ix]`` in 2D.
    """

    dim: int
    n: tuple[int, ...]
    length: tuple[float, ...]

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / m for L, m in zip(self.length, self.n))

    @property
    def npoints(self) -> int:
        return int(np.prod(self.n))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    @property
    def shape(self) -> tuple[int, ...]:
        # array shape: (nx,) in 1D, (ny, nx) in 2D
        return (self.n[0],) if self.dim == 1 else (self.n[1], self.n[0])

    def _axis(self, d: int) -> int:
        # spatial dimension d -> numpy axis (x is always the fastest axis)
        return self.dim - 1 - d

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """Per-dimension modes {0,..,n/2,-n/2+1,..,-1} * (2*pi/length)."""
        out = []
        for m, L in zip(self.n, self.length):
            modes = np.concatenate([np.arange(0, m // 2 + 1), np.arange(-m // 2 + 1, 0)])
            out.append(modes * (TWO_PI / L))
        return tuple(out)

    @cached_property
    def wavenumbers_odd(self) -> tuple[np.ndarray, ...]:
        """Wavenumbers with the Nyquist slot zeroed, for odd-order derivatives."""
        out = []
        for m, k in zip(self.n, self.wavenumbers):
            kz = k.copy()
            kz[m // 2] = 0.0
            out.append(kz)
        return tuple(out)

    @cached_property
    def k_meshes(self) -> tuple[np.ndarray, ...]:
        """Full wavenumber meshes broadcast to the value shape, ordered (kx, ky)."""
        if self.dim == 1:
            return (self.wavenumbers[0],)
        kx, ky = self.wavenumbers
        KX, KY = np.meshgrid(kx, ky, indexing="xy")
        return (KX, KY)

    @cached_property
    def ksq_mesh(self) -> np.ndarray:
        """|k|^2 on the value shape."""
        return sum(K * K for K in self.k_meshes)

    @cached_property
    def meshes(self) -> tuple[np.ndarray, ...]:
        """Coordinate meshes on the value shape, ordered (x, y)."""
        axes = [np.arange(m) * h for m, h in zip(self.n, self.spacing)]
        if self.dim == 1:
            return (axes[0],)
        X, Y = np.meshgrid(axes[0], axes[1], indexing="xy")
        return (X, Y)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean 2/3-rule mask on the coefficient array (True = keep)."""
        keep = np.ones(self.shape, dtype=bool)
        for d, m in enumerate(self.n):
            modes = np.concatenate([np.arange(0, m // 2 + 1), np.arange(-m // 2 + 1, 0)])
            cut = np.abs(modes) <= m // 3
            shape = [1] * self.dim
            shape[self._axis(d)] = m
            keep &= cut.reshape(shape)
        return keep


def build_grid(dim: int, n, length=TWO_PI) -> GridSpec:
    """Create a periodic grid; ``n`` and ``length`` may be scalars or tuples.

    Rejects dim outside {1, 2}, odd or too-small n, and non-positive length.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    ns = tuple(int(v) for v in (n if isinstance(n, (tuple, list)) else (n,) * dim))
    Ls = tuple(float(v) for v in (length if isinstance(length, (tuple, list)) else (length,) * dim))
    if len(ns) != dim or len(Ls) != dim:
        raise ValueError("n and length must match dim")
    for m in ns:
        if m % 2 != 0 or m < 8:
            raise ValueError(f"points per dimension must be even and >= 8, got {m}")
    for L in Ls:
        if not L > 0:
            raise ValueError(f"length must be positive, got {L}")
    return GridSpec(dim=dim, n=ns, length=Ls)


class Field:
    """Real grid function tied to a :class:`GridSpec`.

    Arithmetic is pointwise and requires identical grids.  Values are stored
    in the documented y-major/x-minor layout.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values

    @classmethod
    def full(cls, grid: GridSpec, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_func(cls, grid: GridSpec, fn: Callable) -> "Field":
        return cls(grid, np.asarray(fn(*grid.meshes), dtype=float))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.grid, self.values / self._other(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self):
        return f"Field(dim={self.grid.dim}, n={self.grid.n})"


@dataclass
class SpectralField:
    """Complex Fourier coefficients of a real field (mean in slot 0)."""

    grid: GridSpec
    coeffs: np.ndarray


def to_spectral(field: Field) -> SpectralField:
    return SpectralField(field.grid, np.fft.fftn(field.values) / field.grid.npoints)


def from_spectral(sf: SpectralField) -> Field:
    return Field(sf.grid, np.fft.ifftn(sf.coeffs * sf.grid.npoints).real)


def _check_same_grid(a: Field, b: Field):
    if a.grid != b.grid:
        raise GridMismatchError("fields live on different grids")


def diff(field: Field, order_per_dim) -> Field:
    """Spectral derivative with multi-index orders, one entry per dimension.

    Orders are given in (x, y) dimension order.  Exact for trigonometric
    polynomials resolvable on the grid; the Nyquist mode contributes zero to
    odd-order factors.
    """
    grid = field.grid
    if isinstance(order_per_dim, int):
        order_per_dim = (order_per_dim,)
    orders = tuple(int(o) for o in order_per_dim)
    if len(orders) != grid.dim:
        raise ValueError(f"need {grid.dim} orders, got {orders}")
    if any(o < 0 for o in orders):
        raise ValueError("derivative orders must be >= 0")
    if all(o == 0 for o in orders):
        return field.copy()
    coeffs = np.fft.fftn(field.values)
    for d, o in enumerate(orders):
        if o == 0:
            continue
        k = grid.wavenumbers_odd[d] if o % 2 else grid.wavenumbers[d]
        fac = (1j * k) ** o
        shape = [1] * grid.dim
        shape[grid._axis(d)] = grid.n[d]
        coeffs = coeffs * fac.reshape(shape)
    return Field(grid, np.fft.ifftn(coeffs).real)


def apply_symbol(field: Field, symbol) -> Field:
    """Multiply the spectrum by ``symbol`` evaluated on the wavevector meshes.

    ``symbol`` is either a callable of the per-dimension wavenumber meshes or
    a precomputed real array of the value shape.
    """
    sym = symbol(*field.grid.k_meshes) if callable(symbol) else symbol
    sym = np.broadcast_to(np.asarray(sym), field.grid.shape)
    coeffs = np.fft.fftn(field.values) * sym
    return Field(field.grid, np.fft.ifftn(coeffs).real)


def solve_diagonal(rhs: Field, symbol, zero_mode: str = "reject") -> Field:
    """Solve a constant-coefficient operator equation mode by mode.

    Divides each Fourier coefficient of ``rhs`` by ``symbol(k)``.  With
    ``zero_mode="reject"`` (default) a symbol smaller than 1e-300 in modulus
    at any mode is an error.  ``zero_mode="project"`` permits a singular
    k = 0 mode for mean-free right-hand sides: the solution mean is set to
    zero (the Poisson-type pseudo-inverse).
    """
    grid = rhs.grid
    sym = symbol(*grid.k_meshes) if callable(symbol) else symbol
    sym = np.broadcast_to(np.asarray(sym, dtype=float), grid.shape).copy()
    coeffs = np.fft.fftn(rhs.values)
    if zero_mode == "project":
        zero_idx = (0,) * grid.dim
        mean = coeffs[zero_idx] / grid.npoints
        rms = np.sqrt(np.mean(rhs.values**2))
        if abs(mean) > 1e-10 * max(rms, 1e-300):
            raise ValueError("projected solve needs a mean-free right-hand side")
        coeffs[zero_idx] = 0.0
        sym[zero_idx] = 1.0
    if np.min(np.abs(sym)) < 1e-300:
        raise ValueError("singular operator: |symbol| < 1e-300 at some mode")
    return Field(grid, np.fft.ifftn(coeffs / sym).real)


def gradient(field: Field) -> list[Field]:
    """All first derivatives, ordered (d/dx,) or (d/dx, d/dy)."""
    grid = field.grid
    coeffs = np.fft.fftn(field.values)
    out = []
    for d in range(grid.dim):
        k = grid.wavenumbers_odd[d]
        shape = [1] * grid.dim
        shape[grid._axis(d)] = grid.n[d]
        out.append(Field(grid, np.fft.ifftn(coeffs * (1j * k).reshape(shape)).real))
    return out


def divergence(components: Sequence[Field]) -> Field:
    grid = components[0].grid
    if len(components) != grid.dim:
        raise ValueError("need one component per dimension")
    total = np.zeros(grid.shape)
    for d, comp in enumerate(components):
        _check_same_grid(components[0], comp)
        k = grid.wavenumbers_odd[d]
        shape = [1] * grid.dim
        shape[grid._axis(d)] = grid.n[d]
        total = total + np.fft.ifftn(np.fft.fftn(comp.values) * (1j * k).reshape(shape)).real
    return Field(grid, total)


def laplacian(field: Field, power: int = 1) -> Field:
    """Apply the Laplacian ``power`` times ((-|k|^2)^power in Fourier space)."""
    return apply_symbol(field, (-field.grid.ksq_mesh) ** power)


def dealias_23(field: Field) -> Field:
    """Zero all modes outside the 2/3 rule (for quartic nonlinearities)."""
    coeffs = np.fft.fftn(field.values) * field.grid.dealias_mask
    return Field(field.grid, np.fft.ifftn(coeffs).real)


def integrate(field: Field) -> float:
    """Spectral quadrature: mean value times domain volume."""
    return float(field.values.mean() * field.grid.volume)


def inner(a: Field, b: Field) -> float:
    """L2 inner product under the grid quadrature."""
    _check_same_grid(a, b)
    return float((a.values * b.values).mean() * a.grid.volume)


def l2_norm(field: Field) -> float:
    return float(np.sqrt(max(inner(field, field), 0.0)))


def linf_norm(field: Field) -> float:
    return float(np.max(np.abs(field.values)))


def inv_grad_norm_sq(field: Field) -> float:
    """Squared H^-1-type seminorm: sum over k != 0 of |u_k|^2 / |k|^2, scaled
    to the grid quadrature.

    The argument must be mean-free to 1e-10 relative to its RMS (these are
    mass-conserving increments); otherwise a ValueError signals broken mass
    conservation upstream.
    """
    grid = field.grid
    coeffs = np.fft.fftn(field.values) / grid.npoints
    zero_idx = (0,) * grid.dim
    mean = coeffs[zero_idx].real
    rms = np.sqrt(np.mean(field.values**2))
    if abs(mean) > 1e-10 * max(rms, 1e-300):
        raise ValueError("inv_grad_norm_sq needs a mean-free field "
                         f"(mean={mean:.3e}, rms={rms:.3e})")
    ksq = grid.ksq_mesh.copy()
    ksq[zero_idx] = 1.0
    weight = np.abs(coeffs) ** 2 / ksq
    weight[zero_idx] = 0.0
    return float(weight.sum() * grid.volume)
