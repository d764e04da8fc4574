"""Spatial-side operators on finite tori (Z_L)^d.

Fields carry complex scalars or n x n complex matrices per site.  Averages
and Laplacians act by periodic shifts, multipliers act through the DFT, and
the two routes are kept independent so they can check each other.  The side
L is chosen by callers so that 2t < L for every sphere radius exercised,
which makes the periodic computation agree exactly with the infinite
lattice for compactly supported inputs.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    CapExceeded,
    DomainError,
    EmptySphere,
    IndivisibleSide,
    InfeasibleScale,
    NonHermitianInput,
    OddSide,
)
from .lattice import SphereSpec, enumerate_sphere, representation_count
from .symbols import reduce_to_torus

__all__ = [
    "MAX_SITES",
    "TorusField",
    "DyadicRange",
    "dft",
    "idft",
    "frequency_grid",
    "apply_multiplier",
    "spherical_average",
    "discrete_laplacian",
    "dyadic_maximal",
    "sign_flip_modulation",
    "periodized_multiplier_apply",
    "sampled_kernel_apply",
    "inverse_kernel",
    "save_field",
    "load_field",
    "export_scalar_csv",
]

MAX_SITES = 1 << 26

_HEADER = struct.Struct("<4I")  # d, L, kind (0 scalar / 1 matrix), fiber size


@dataclass(frozen=True)
class TorusField:
    """A complex field on (Z_L)^d, scalar- or matrix-valued.

    values has shape (L,)*d for scalars and (L,)*d + (n, n) for matrices;
    the dimension d is stored explicitly to disambiguate the two layouts.
    """

    d: int
    values: np.ndarray

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim not in (self.d, self.d + 2):
            raise DomainError(f"array rank {v.ndim} does not fit d={self.d}")
        side = v.shape[0]
        if any(s != side for s in v.shape[: self.d]):
            raise DomainError("all torus axes must share the same side")
        if v.ndim == self.d + 2 and v.shape[-1] != v.shape[-2]:
            raise DomainError("matrix fibers must be square")
        if side**self.d > MAX_SITES:
            raise InfeasibleScale(f"{side}^{self.d} sites exceeds the {MAX_SITES} budget")

    @property
    def side(self) -> int:
        return self.values.shape[0]

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == self.d + 2

    @property
    def fiber(self) -> int:
        return self.values.shape[-1] if self.is_matrix else 1

    @staticmethod
    def scalar(values: np.ndarray) -> "TorusField":
        values = np.asarray(values, dtype=complex)
        return TorusField(values.ndim, values)

    @staticmethod
    def matrix(d: int, values: np.ndarray) -> "TorusField":
        return TorusField(d, np.asarray(values, dtype=complex))

    def require_hermitian(self, tol: float = 1e-12) -> None:
        if not self.is_matrix:
            if np.abs(self.values.imag).max(initial=0.0) > tol:
                raise NonHermitianInput("scalar field has non-real values")
            return
        swap = np.conj(np.swapaxes(self.values, -1, -2))
        dev = np.abs(self.values - swap).max(initial=0.0)
        if dev > tol:
            raise NonHermitianInput(f"Hermitian deviation {dev:.3e} above {tol:.1e}")


@dataclass(frozen=True)
class DyadicRange:
    """Dyadic scale exponents m; the scales are t = 2^m, so lam = 4^m."""

    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.exponents:
            raise DomainError("need at least one scale")
        if any(m < 0 for m in self.exponents):
            raise DomainError("exponents must be >= 0")
        ordered = tuple(sorted(set(self.exponents)))
        object.__setattr__(self, "exponents", ordered)

    def scales(self) -> tuple[int, ...]:
        return tuple(2**m for m in self.exponents)

    def check_side(self, side: int) -> None:
        if 2 * max(self.scales()) >= side:
            raise DomainError(
                f"largest sphere diameter {2 * max(self.scales())} does not fit inside side {side}"
            )


def dft(f: TorusField) -> TorusField:
    """f_hat(k) = sum_x f(x) e^(-2 pi i <x, k>/L) over the torus axes."""
    axes = tuple(range(f.d))
    return TorusField(f.d, np.fft.fftn(f.values, axes=axes))


def idft(f: TorusField) -> TorusField:
    """Inverse of dft (carries the L^-d normalization)."""
    axes = tuple(range(f.d))
    return TorusField(f.d, np.fft.ifftn(f.values, axes=axes))


def frequency_grid(d: int, side: int) -> np.ndarray:
    """Array of shape (side,)*d + (d,): each DFT frequency k/L reduced to [-1/2, 1/2)^d."""
    axis = reduce_to_torus(np.arange(side) / side)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack(mesh, axis=-1)


def apply_multiplier(f: TorusField, symbol: Callable[[np.ndarray], complex]) -> TorusField:
    """idft(symbol(k/L) * f_hat): the convolution operator attached to a symbol.

    ``symbol`` is called once per frequency with the reduced coordinate
    vector; for Z^d-periodic symbols this realizes the same operator as the
    corresponding lattice convolution.
    """
    grid = frequency_grid(f.d, f.side)
    flat = grid.reshape(-1, f.d)
    mult = np.fromiter((symbol(xi) for xi in flat), dtype=complex, count=flat.shape[0])
    mult = mult.reshape(grid.shape[:-1])
    if f.is_matrix:
        mult = mult[..., np.newaxis, np.newaxis]
    spectrum = dft(f)
    return idft(TorusField(f.d, mult * spectrum.values))


def _sphere_points(spec: SphereSpec, cap: int) -> list[tuple[int, ...]]:
    if representation_count(spec) == 0:
        raise EmptySphere(f"no lattice points with |x|^2 = {spec.lam} in Z^{spec.d}")
    return enumerate_sphere(spec, cap)


def spherical_average(f: TorusField, spec: SphereSpec, cap: int = 2_000_000) -> TorusField:
    """Mean of f(x - y) over the lattice sphere |y|^2 = lam, with wraparound."""
    if spec.d != f.d:
        raise DomainError(f"sphere dimension {spec.d} != field dimension {f.d}")
    points = _sphere_points(spec, cap)
    axes = tuple(range(f.d))
    acc = np.zeros_like(f.values)
    for y in points:
        acc += np.roll(f.values, shift=y, axis=axes)
    return TorusField(f.d, acc / len(points))


def discrete_laplacian(f: TorusField, k: int) -> TorusField:
    """f/2 - (f(. + e_k) + f(. - e_k))/4 along coordinate k (1-based).

    On the Fourier side this multiplies by sin^2(pi k_j / L).
    """
    if not 1 <= k <= f.d:
        raise DomainError(f"coordinate index must be in 1..{f.d}, got {k}")
    axis = k - 1
    up = np.roll(f.values, -1, axis=axis)
    down = np.roll(f.values, 1, axis=axis)
    return TorusField(f.d, 0.5 * f.values - 0.25 * (up + down))


def dyadic_maximal(f: TorusField, scales: DyadicRange, cap: int = 2_000_000) -> TorusField:
    """Pointwise max of |average at t| over t = 2^m in the range (scalar fields)."""
    if f.is_matrix:
        raise DomainError("the pointwise maximal function is scalar-only")
    scales.check_side(f.side)
    out = None
    for t in scales.scales():
        avg = spherical_average(f, SphereSpec(f.d, t * t), cap=cap)
        mag = np.abs(avg.values)
        out = mag if out is None else np.maximum(out, mag)
    return TorusField(f.d, out.astype(complex))


def sign_flip_modulation(f: TorusField) -> TorusField:
    """(-1)^(sum_j x_j) f(x); shifts the spectrum by the half-frequency (L/2) 1."""
    if f.side % 2:
        raise OddSide(f"side {f.side} is odd; the half-shift is not a lattice frequency")
    idx = np.indices(f.values.shape[: f.d]).sum(axis=0)
    signs = np.where(idx % 2 == 0, 1.0, -1.0)
    if f.is_matrix:
        signs = signs[..., np.newaxis, np.newaxis]
    return TorusField(f.d, signs * f.values)


def periodized_multiplier_apply(
    f: TorusField, q: int, base_symbol: Callable[[np.ndarray], complex]
) -> TorusField:
    """Apply the (1/q)-periodization of a symbol supported in q^-1 Q.

    At each frequency the translated copies have disjoint supports, so the
    periodized value is the base symbol at xi - [[q xi]]/q.
    """
    if q < 1 or f.side % q:
        raise IndivisibleSide(f"q = {q} must divide the side {f.side}")

    def periodized(xi: np.ndarray) -> complex:
        return base_symbol(xi - np.floor(q * xi + 0.5) / q)

    return apply_multiplier(f, periodized)


def sampled_kernel_apply(
    f: TorusField, q: int, kernel: Callable[[np.ndarray], float]
) -> TorusField:
    """Convolve with the kernel that is q^d * kernel on q Z^d and 0 elsewhere.

    Computed spatially by shifting f through the coarse sublattice, so it is
    an independent route to the periodized multiplier.
    """
    if q < 1 or f.side % q:
        raise IndivisibleSide(f"q = {q} must divide the side {f.side}")
    coarse = f.side // q
    axes = tuple(range(f.d))
    acc = np.zeros_like(f.values)
    scale = float(q) ** f.d
    for idx in np.ndindex(*([coarse] * f.d)):
        shift = tuple(q * i for i in idx)
        weight = scale * float(kernel(np.asarray(shift, dtype=np.int64)))
        if weight != 0.0:
            acc += weight * np.roll(f.values, shift=shift, axis=axes)
    return TorusField(f.d, acc)


def inverse_kernel(
    d: int, side: int, symbol: Callable[[np.ndarray], complex]
) -> Callable[[np.ndarray], float]:
    """Spatial kernel of a symbol sampled on the (Z_L)^d frequency grid.

    K(y) = L^-d sum_k symbol(k/L) e^(2 pi i <k, y>/L); intended for real
    symmetric symbols, whose kernels are real.
    """
    grid = frequency_grid(d, side)
    flat = grid.reshape(-1, d)
    sampled = np.fromiter((symbol(xi) for xi in flat), dtype=complex, count=flat.shape[0])
    table = np.fft.ifftn(sampled.reshape((side,) * d)).real

    def kernel(y: np.ndarray) -> float:
        return float(table[tuple(np.mod(np.asarray(y, dtype=np.int64), side))])

    return kernel


def save_field(f: TorusField, path: str) -> None:
    """Flat binary layout: header (d, L, kind, n) then row-major complex doubles."""
    kind = 1 if f.is_matrix else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(f.d, f.side, kind, f.fiber))
        fh.write(np.ascontiguousarray(f.values, dtype="<c16").tobytes())


def load_field(path: str) -> TorusField:
    with open(path, "rb") as fh:
        d, side, kind, fiber = _HEADER.unpack(fh.read(_HEADER.size))
        raw = np.frombuffer(fh.read(), dtype="<c16")
    shape = (side,) * d + ((fiber, fiber) if kind else ())
    expected = math.prod(shape)
    if raw.size != expected:
        raise DomainError(f"payload holds {raw.size} values, header implies {expected}")
    return TorusField(d, raw.reshape(shape).astype(complex))


def export_scalar_csv(f: TorusField, path: str) -> None:
    """One row per site: the d coordinates, then real and imaginary parts."""
    if f.is_matrix:
        raise DomainError("CSV export is scalar-only")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(f.d)] + ["re", "im"])
        for idx in np.ndindex(*f.values.shape):
            val = complex(f.values[idx])
            writer.writerow(list(idx) + [repr(val.real), repr(val.imag)])
