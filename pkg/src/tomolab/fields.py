"""Uniform-grid fields over tomographic and phase-space domains.

A :class:`Field` is an immutable array of complex samples on a tensor grid of
:class:`Axis` objects.  Differential operators along non-periodic axes are
spectral (FFT based) and assume the sampled function has decayed at the grid
edges; the periodic ``theta`` axis uses the periodic transform; ``mu`` and
``nu`` derivatives use local finite-difference stencils.
"""

from __future__ import annotations

import csv
import json
import struct
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache
from math import factorial

import numpy as np
from scipy.integrate import trapezoid

from .errors import ContractViolation, DomainError, GridMismatchError

__all__ = [
    "LABELS", "Axis", "Field", "x_axis", "theta_axis", "q_axis", "p_axis",
    "uniform_axis", "mu_axis", "nu_axis", "dual_axis", "spectral_dx", "spectral_inv_dx",
    "antiderivative_x", "spectral_dtheta", "fd_derivative", "fd_weights",
    "integrate_x", "integrate", "pointwise_mul", "tensor_product", "sup_norm", "l2_norm",
    "fd_matrix", "compare", "write_field", "read_field", "write_csv",
]

#: axis labels; the position in this tuple is the label byte of the file format
LABELS = ("X", "theta", "mu", "nu", "q", "p", "time", "eta", "z", "x", "xp")

TWO_PI = 2.0 * np.pi
MAGIC = b"TOMF1"


@dataclass(frozen=True)
class Axis:
    """A uniformly sampled coordinate ``start + step * arange(count)``.

    ``mode`` distinguishes the per-mode copies of an axis in multimode grids.
    """

    label: str
    start: float
    step: float
    count: int
    periodic: bool = False
    mode: int = 0

    def __post_init__(self):
        if self.label not in LABELS:
            raise DomainError(f"unknown axis label {self.label!r}")
        if not self.step > 0:
            raise DomainError("axis step must be positive")
        if self.count < 4:
            raise DomainError("axis needs at least 4 samples")
        if self.periodic and abs(self.step * self.count - TWO_PI) > 1e-12:
            raise DomainError("a periodic axis must span exactly 2*pi")
        if not 0 <= self.mode < 16:
            raise DomainError("mode index must lie in [0, 16)")

    @property
    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)

    @property
    def name(self) -> str:
        """Coordinate name: the label, suffixed by the mode for modes > 0."""
        return self.label if self.mode == 0 else f"{self.label}{self.mode}"

    @property
    def length(self) -> float:
        return self.step * self.count

    def same_grid(self, other: "Axis", rtol: float = 1e-12) -> bool:
        return (self.label == other.label and self.mode == other.mode
                and self.count == other.count and self.periodic == other.periodic
                and abs(self.start - other.start) <= rtol * max(1.0, abs(self.start))
                and abs(self.step - other.step) <= rtol * self.step)


def uniform_axis(label, lo, hi, count, mode=0):
    """Half-open axis covering ``[lo, hi)`` with ``count`` samples."""
    return Axis(label, float(lo), (hi - lo) / count, int(count), False, mode)


def x_axis(count=256, half_width=8.0, mode=0, label="X"):
    return uniform_axis(label, -half_width, half_width, count, mode)


def q_axis(count=256, half_width=8.0, mode=0):
    return uniform_axis("q", -half_width, half_width, count, mode)


def p_axis(count=256, half_width=8.0, mode=0):
    return uniform_axis("p", -half_width, half_width, count, mode)


def theta_axis(count=64, mode=0):
    return Axis("theta", 0.0, TWO_PI / count, int(count), True, mode)


def mu_axis(count=97, lo=0.35, step=0.00625, mode=0):
    return Axis("mu", lo, step, int(count), False, mode)


def nu_axis(count=97, lo=0.35, step=0.00625, mode=0):
    return Axis("nu", lo, step, int(count), False, mode)


def dual_axis(axis: Axis, label="eta") -> Axis:
    """Fourier-dual axis of a symmetric spectral axis, centred on zero."""
    n = axis.count
    step = TWO_PI / (n * axis.step)
    return Axis(label, -(n // 2) * step, step, n, False, axis.mode)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples on a tensor grid.  Treat instances as values."""

    axes: tuple
    values: np.ndarray
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        axes = tuple(self.axes)
        vals = np.array(self.values, dtype=np.complex128)
        shape = tuple(a.count for a in axes)
        if vals.shape != shape:
            if vals.size != int(np.prod(shape)):
                raise DomainError(
                    f"values have {vals.size} samples, axes need {int(np.prod(shape))}")
            vals = vals.reshape(shape)
        keys = [(a.label, a.mode) for a in axes]
        if len(set(keys)) != len(keys):
            raise DomainError("duplicate axis in field")
        vals.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "metadata", dict(self.metadata))

    # -- structure -------------------------------------------------------
    @property
    def shape(self):
        return self.values.shape

    @property
    def rank(self):
        return len(self.axes)

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def axis_index(self, label, mode=0) -> int:
        for i, a in enumerate(self.axes):
            if a.label == label and a.mode == mode:
                return i
        raise DomainError(f"field has no axis {label!r} (mode {mode})")

    def axis(self, label, mode=0) -> Axis:
        return self.axes[self.axis_index(label, mode)]

    def has_axis(self, label, mode=0) -> bool:
        return any(a.label == label and a.mode == mode for a in self.axes)

    @property
    def modes(self):
        return sorted({a.mode for a in self.axes})

    def coord(self, label, mode=0) -> np.ndarray:
        """Coordinate values of one axis shaped to broadcast against ``values``."""
        i = self.axis_index(label, mode)
        shape = [1] * self.rank
        shape[i] = self.axes[i].count
        return self.axes[i].values.reshape(shape)

    def coords(self) -> dict:
        return {a.name: self.coord(a.label, a.mode) for a in self.axes}

    def same_grid(self, other: "Field") -> bool:
        return (self.rank == other.rank
                and all(a.same_grid(b) for a, b in zip(self.axes, other.axes)))

    def with_values(self, values, **metadata) -> "Field":
        meta = dict(self.metadata)
        meta.update(metadata)
        return Field(self.axes, values, meta)

    def tagged(self, **metadata) -> "Field":
        return self.with_values(self.values, **metadata)

    # -- linear algebra ----------------------------------------------------
    def _other_values(self, other):
        if isinstance(other, Field):
            if not self.same_grid(other):
                raise GridMismatchError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.axes, self.values + self._other_values(other), self.metadata)

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.axes, self.values - self._other_values(other), self.metadata)

    def __rsub__(self, other):
        return Field(self.axes, self._other_values(other) - self.values, self.metadata)

    def __neg__(self):
        return Field(self.axes, -self.values, self.metadata)

    def __mul__(self, other):
        return Field(self.axes, self.values * self._other_values(other), self.metadata)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.axes, self.values / self._other_values(other), self.metadata)

    def __repr__(self):
        ax = ", ".join(f"{a.name}[{a.count}]" for a in self.axes)
        return f"Field({ax})"


# ---------------------------------------------------------------------------
# spectral operators
# ---------------------------------------------------------------------------

def _spectral_axis(f: Field, label, mode):
    i = f.axis_index(label, mode)
    ax = f.axes[i]
    if ax.periodic:
        raise ContractViolation(
            f"axis {ax.name!r} is periodic; use spectral_dtheta")
    if ax.count & (ax.count - 1):
        raise DomainError("spectral axes need a power-of-two sample count")
    return i, ax


def _wavenumbers(ax: Axis, ndim, i):
    k = TWO_PI * np.fft.fftfreq(ax.count, ax.step)
    shape = [1] * ndim
    shape[i] = ax.count
    return k.reshape(shape)


def _apply_multiplier(values, i, mult):
    return np.fft.ifft(np.fft.fft(values, axis=i) * mult, axis=i)


def spectral_dx(f: Field, axis="X", mode=0, order=1) -> Field:
    """Spectral derivative of order ``order`` along a non-periodic axis.

    For odd orders the Nyquist mode is dropped so that real input gives real
    output.
    """
    i, ax = _spectral_axis(f, axis, mode)
    k = _wavenumbers(ax, f.rank, i)
    mult = (1j * k) ** order
    if order % 2:
        mult = np.where(np.abs(k) == np.abs(k).max(), 0.0, mult)
    return f.with_values(_apply_multiplier(f.values, i, mult))


def spectral_inv_dx(f: Field, axis="X", mode=0) -> Field:
    """Plane-wave inverse of d/dX: mode ``k`` is divided by ``ik``.

    The ``k = 0`` mode is set to zero, so ``spectral_dx`` of the result is
    ``f`` minus its grid mean.
    """
    i, ax = _spectral_axis(f, axis, mode)
    k = _wavenumbers(ax, f.rank, i)
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = np.where(k == 0, 0.0, 1.0 / (1j * k))
    return f.with_values(_apply_multiplier(f.values, i, mult))


def antiderivative_x(f: Field, axis="X", mode=0, order=1) -> Field:
    """Antiderivative that vanishes at the lower grid edge.

    This is the integral from minus infinity for fields decayed at the edges.
    The mean is integrated exactly as a linear ramp, so inputs with nonzero
    integral are handled, and a decaying input whose integral is zero gives a
    decaying output.  ``order=2`` uses
    ``int (X - s) g(s) ds = X G1[g] - G1[X g]``, which avoids spectrally
    integrating a non-decaying first antiderivative.
    """
    if order == 2:
        xs = f.coord(axis, mode)
        first = antiderivative_x(f, axis, mode)
        moment = antiderivative_x(f.with_values(f.values * xs), axis, mode)
        return f.with_values(xs * first.values - moment.values)
    if order != 1:
        raise DomainError("antiderivative_x supports order 1 or 2")
    i, ax = _spectral_axis(f, axis, mode)
    mean = f.values.mean(axis=i, keepdims=True)
    k = _wavenumbers(ax, f.rank, i)
    with np.errstate(divide="ignore", invalid="ignore"):
        mult = np.where(k == 0, 0.0, 1.0 / (1j * k))
    periodic_part = _apply_multiplier(f.values - mean, i, mult)
    periodic_part = periodic_part - np.take(periodic_part, [0], axis=i)
    shape = [1] * f.rank
    shape[i] = ax.count
    ramp = (ax.step * np.arange(ax.count)).reshape(shape)
    return f.with_values(periodic_part + mean * ramp)


def spectral_dtheta(f: Field, mode=0, order=1) -> Field:
    """Periodic spectral derivative along the ``theta`` axis of ``mode``."""
    try:
        i = f.axis_index("theta", mode)
    except DomainError:
        raise DomainError("field has no periodic theta axis") from None
    ax = f.axes[i]
    if not ax.periodic:
        raise DomainError("theta axis is not periodic")
    k = _wavenumbers(ax, f.rank, i)
    mult = (1j * k) ** order
    if order % 2 and ax.count % 2 == 0:
        mult = np.where(np.abs(k) == np.abs(k).max(), 0.0, mult)
    return f.with_values(_apply_multiplier(f.values, i, mult))


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------

def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at 0.

    ``offsets`` are stencil positions in units of the grid step.  Solves the
    moment conditions directly; fine for the short stencils used here.
    """
    s = np.asarray(offsets, dtype=float)
    n = len(s)
    if order >= n:
        raise DomainError("stencil too short for the derivative order")
    a = np.vander(s, n, increasing=True).T
    b = np.zeros(n)
    b[order] = factorial(order)
    return np.linalg.solve(a, b)


@lru_cache(maxsize=64)
def fd_matrix(count, order=1, accuracy=4, boundary_extra=2):
    """Dense differentiation matrix (unit step) for :func:`fd_derivative`.

    Rows whose central stencil would leave the grid use a shifted stencil
    with ``boundary_extra`` more points, which keeps the one-sided error
    constant close to the interior one.
    """
    width = accuracy + order + (1 if (accuracy + order) % 2 == 0 else 0)
    width = min(width, count)
    half = width // 2
    wide = min(width + boundary_extra, count)
    mat = np.zeros((count, count))
    for j in range(count):
        if half <= j < count - half:
            lo, w = j - half, width
        else:
            w = wide
            lo = min(max(j - w // 2, 0), count - w)
        offs = np.arange(lo, lo + w) - j
        mat[j, lo:lo + w] = fd_weights(offs, order)
    mat.flags.writeable = False
    return mat


def fd_derivative(f: Field, axis, mode=0, order=1, accuracy=4) -> Field:
    """Finite-difference derivative along ``axis``.

    Central stencils of formal order ``accuracy`` in the interior, shifted
    stencils with two extra points near the edges (see :func:`fd_matrix`).
    """
    i = f.axis_index(axis, mode)
    ax = f.axes[i]
    mat = fd_matrix(ax.count, order, accuracy) / ax.step ** order
    out = np.tensordot(mat, np.moveaxis(f.values, i, 0), axes=(1, 0))
    return f.with_values(np.moveaxis(out, 0, i))


# ---------------------------------------------------------------------------
# quadrature and pointwise products
# ---------------------------------------------------------------------------

def integrate_x(f: Field, axis="X", mode=0) -> Field:
    """Trapezoidal integral along ``axis``; the result drops that axis."""
    i = f.axis_index(axis, mode)
    ax = f.axes[i]
    vals = trapezoid(f.values, dx=ax.step, axis=i)
    axes = f.axes[:i] + f.axes[i + 1:]
    if not axes:
        return complex(vals)
    return Field(axes, vals, f.metadata)


def integrate(f: Field, axes=None) -> complex:
    """Integral over the listed axes (all by default); periodic axes by rectangle rule."""
    vals = f.values
    weight = 1.0
    for i, ax in enumerate(f.axes):
        if axes is not None and ax.label not in axes and ax.name not in axes:
            continue
        weight *= ax.step
    if axes is None:
        return complex(vals.sum() * weight)
    idx = tuple(i for i, ax in enumerate(f.axes)
                if ax.label in axes or ax.name in axes)
    return vals.sum(axis=idx) * weight


def pointwise_mul(f: Field, g) -> Field:
    """Multiply by ``g`` evaluated at the grid nodes.

    ``g`` is a callable receiving the coordinate arrays as keyword arguments
    named after the axes (``X``, ``theta``, ``X1`` ...), or an array
    broadcastable to the field shape.
    """
    if callable(g):
        g = g(**f.coords())
    return f.with_values(f.values * np.broadcast_to(g, f.shape))


def tensor_product(f: Field, g: Field) -> Field:
    """Outer product ``f(x) g(y)`` of fields over distinct modes.

    The modes of ``g`` are shifted past the highest mode of ``f``, so two
    single-mode tomograms become one two-mode tomogram.
    """
    shift = max(f.modes) + 1
    axes = f.axes + tuple(replace(a, mode=a.mode + shift) for a in g.axes)
    meta = {k: v for k, v in f.metadata.items() if g.metadata.get(k) == v}
    return Field(axes, np.multiply.outer(f.values, g.values), meta)


def _weights(f: Field):
    return float(np.prod([a.step for a in f.axes]))


def sup_norm(f) -> float:
    vals = f.values if isinstance(f, Field) else np.asarray(f)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def l2_norm(f: Field) -> float:
    """Grid-weighted L2 norm ``sqrt(sum |f|^2 * prod(step))``."""
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * _weights(f)))


def compare(a: Field, b: Field) -> dict:
    """Sup-norm and grid-weighted L2 distance between two fields on one grid."""
    if not a.same_grid(b):
        raise GridMismatchError("cannot compare fields on different grids")
    d = a - b
    return {"sup": sup_norm(d), "l2": l2_norm(d)}


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def write_field(path, f: Field) -> None:
    """Write the binary ``TOMF1`` layout (little endian).

    magic, u8 rank, then per axis: u8 label byte (low nibble = label index,
    high nibble = mode), f64 start, f64 step, u64 count, u8 periodic flag;
    then values row-major as (re, im) f64 pairs; then u64 length + UTF-8 JSON
    metadata.
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<B", f.rank))
        for a in f.axes:
            code = LABELS.index(a.label) | (a.mode << 4)
            fh.write(struct.pack("<BddQB", code, a.start, a.step, a.count,
                                 int(a.periodic)))
        fh.write(np.ascontiguousarray(f.values, dtype="<c16").tobytes())
        meta = json.dumps(f.metadata, sort_keys=True, default=str).encode()
        fh.write(struct.pack("<Q", len(meta)))
        fh.write(meta)


def read_field(path) -> Field:
    with open(path, "rb") as fh:
        if fh.read(5) != MAGIC:
            raise DomainError(f"{path}: not a TOMF1 field file")
        (rank,) = struct.unpack("<B", fh.read(1))
        axes = []
        for _ in range(rank):
            code, start, step, count, per = struct.unpack("<BddQB", fh.read(26))
            axes.append(Axis(LABELS[code & 0x0F], start, step, int(count),
                             bool(per), code >> 4))
        n = int(np.prod([a.count for a in axes]))
        vals = np.frombuffer(fh.read(16 * n), dtype="<c16").copy()
        meta = {}
        tail = fh.read(8)
        if len(tail) == 8:
            (size,) = struct.unpack("<Q", tail)
            meta = json.loads(fh.read(size).decode())
    return Field(tuple(axes), vals.reshape([a.count for a in axes]), meta)


def write_csv(path, f: Field) -> None:
    """One row per node: coordinates, then real and imaginary value."""
    grids = np.meshgrid(*[a.values for a in f.axes], indexing="ij")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([a.name for a in f.axes] + ["re", "im"])
        cols = [g.ravel() for g in grids] + [f.values.real.ravel(), f.values.imag.ravel()]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
