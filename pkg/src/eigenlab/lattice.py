"""Trigonometric polynomials on the torus T^n and their norms.

A function on ``[0, 2pi]^n`` is stored by its finitely many nonzero Fourier
coefficients with respect to the orthonormal system

    e_j(tau) = (2 pi)**(-n/2) * exp(i j . tau),   j in Z^n,

which are the eigenfunctions of the Laplacian (eigenvalue ``-|j|**2``).
Modes are always kept in the canonical order: ``|j|**2`` first, then
lexicographic in ``j``.  Every summation in this module runs in that order.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import fft as sfft

from .or_functions import ORFunction

__all__ = [
    "BALL_VOLUME",
    "FourierField",
    "NormSpec",
    "modes_in_ball",
    "weyl_count_ratio",
    "synthesize_member",
    "hoermander_norm",
    "partial_sum",
    "differentiate",
    "evaluate_on_grid",
    "measure_norm",
    "write_field_csv",
    "read_field_csv",
]

BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

# per-dimension caps on the support radius (keeps mode counts near 6e4)
MAX_RADIUS = {1: 128, 2: 64, 3: 24}


def _canonical_order(modes: np.ndarray) -> np.ndarray:
    """Permutation sorting modes by squared norm, then lexicographically."""
    norm2 = np.sum(modes.astype(np.int64) ** 2, axis=1)
    keys = [modes[:, k] for k in range(modes.shape[1] - 1, -1, -1)] + [norm2]
    return np.lexsort(keys)


def modes_in_ball(n: int, lam: float) -> np.ndarray:
    """All ``j`` in ``Z^n`` with ``|j| <= lam``, as an ``(N, n)`` int array in
    canonical order."""
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    k = int(math.floor(lam))
    axis = np.arange(-k, k + 1)
    grid = np.stack(np.meshgrid(*([axis] * n), indexing="ij"), axis=-1).reshape(-1, n)
    norm2 = np.sum(grid * grid, axis=1)
    inside = grid[norm2 <= lam * lam]
    return inside[_canonical_order(inside)]


def weyl_count_ratio(n: int, lam: float) -> float:
    """Lattice count in the ball of radius ``lam`` over the ball volume."""
    if lam < 1:
        raise ValueError("lam must be at least 1")
    return len(modes_in_ball(n, lam)) / (BALL_VOLUME[n] * lam ** n)


class FourierField:
    """Finitely supported Fourier coefficients of a function on ``T^n``.

    Instances are immutable; arithmetic returns new fields.  Explicit zero
    coefficients are dropped so that the stored modes are exactly the
    support.

    Parameters
    ----------
    n : int
        Torus dimension, 1 to 3.
    modes : array_like of int, shape (N, n)
    coeffs : array_like of complex, shape (N,)
    support_radius : float, optional
        A radius ``R`` with every stored ``|j| <= R``.  Defaults to the
        largest stored norm.
    """

    __slots__ = ("n", "modes", "coeffs", "support_radius")

    def __init__(self, n: int, modes, coeffs, support_radius: float | None = None):
        if n not in (1, 2, 3):
            raise ValueError("n must be 1, 2 or 3")
        modes = np.asarray(modes, dtype=np.int64).reshape(-1, n)
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        if modes.shape[0] != coeffs.shape[0]:
            raise ValueError("modes and coeffs differ in length")
        keep = coeffs != 0
        modes, coeffs = modes[keep], coeffs[keep]
        order = _canonical_order(modes)
        modes, coeffs = modes[order], coeffs[order]
        if len(modes) > 1 and np.any(np.all(modes[1:] == modes[:-1], axis=1)):
            raise ValueError("duplicate modes")
        max_norm = float(np.sqrt(np.max(np.sum(modes ** 2, axis=1), initial=0)))
        if support_radius is None:
            support_radius = max_norm
        elif max_norm > support_radius * (1 + 1e-12):
            raise ValueError("a stored mode lies outside support_radius")
        modes.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "support_radius", float(support_radius))

    def __setattr__(self, name, value):
        raise AttributeError("FourierField is immutable")

    @classmethod
    def from_dict(cls, n: int, coeffs: dict, support_radius: float | None = None) -> "FourierField":
        """Build from ``{j: c}`` with ``j`` an int (n=1) or a tuple."""
        modes = [tuple(np.atleast_1d(j)) for j in coeffs]
        return cls(n, modes, list(coeffs.values()), support_radius)

    @classmethod
    def zero(cls, n: int, support_radius: float = 0.0) -> "FourierField":
        return cls(n, np.zeros((0, n), dtype=np.int64), [], support_radius)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __repr__(self) -> str:
        return f"FourierField(n={self.n}, modes={len(self)}, support_radius={self.support_radius:g})"

    @property
    def norms(self) -> np.ndarray:
        """Euclidean norms ``|j|`` of the stored modes."""
        return np.sqrt(np.sum(self.modes.astype(float) ** 2, axis=1))

    def as_dict(self) -> dict:
        return {tuple(int(x) for x in j): complex(c) for j, c in zip(self.modes, self.coeffs)}

    def _combine(self, other: "FourierField", sign: float) -> "FourierField":
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        modes = np.concatenate([self.modes, other.modes])
        coeffs = np.concatenate([self.coeffs, sign * other.coeffs])
        uniq, inv = np.unique(modes, axis=0, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=complex)
        np.add.at(summed, inv.reshape(-1), coeffs)
        return FourierField(self.n, uniq, summed, max(self.support_radius, other.support_radius))

    def __add__(self, other: "FourierField") -> "FourierField":
        return self._combine(other, 1.0)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return self._combine(other, -1.0)

    def __mul__(self, scalar) -> "FourierField":
        return FourierField(self.n, self.modes, self.coeffs * scalar, self.support_radius)

    __rmul__ = __mul__

    def restrict(self, mask) -> "FourierField":
        """Keep only the stored modes selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        return FourierField(self.n, self.modes[mask], self.coeffs[mask], self.support_radius)


def synthesize_member(
    alpha: ORFunction,
    n: int,
    epsilon: float,
    support_radius: float,
    seed: int | None,
) -> FourierField:
    """A trigonometric polynomial with finite Hormander norm uniformly in R.

    ``c_j = alpha(max(|j|, 1))**-1 * (1 + |j|)**-(n/2 + epsilon) * u_j`` where
    ``u_j = exp(2 pi i U_j)`` with ``U_j`` uniform from
    ``numpy.random.default_rng(seed)`` drawn in canonical mode order.  With
    ``seed=None`` all ``u_j`` are 1.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if support_radius < 0:
        raise ValueError("support_radius must be nonnegative")
    if support_radius > MAX_RADIUS[n]:
        raise ValueError(f"support_radius above the cap {MAX_RADIUS[n]} for n={n}")
    modes = modes_in_ball(n, support_radius)
    r = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
    mag = np.exp(-alpha.log(np.maximum(r, 1.0))) * (1.0 + r) ** (-(n / 2 + epsilon))
    if seed is None:
        phase = np.ones(len(modes), dtype=complex)
    else:
        u = np.random.default_rng(seed).random(len(modes))
        phase = np.exp(2j * np.pi * u)
    return FourierField(n, modes, mag * phase, support_radius)


def _hoermander_weights(f: FourierField, alpha: ORFunction) -> np.ndarray:
    r = f.norms
    w = np.ones_like(r)
    nz = r > 0
    w[nz] = alpha(r[nz])
    return w


def hoermander_norm(f: FourierField, alpha: ORFunction) -> float:
    """``(|c_0|**2 + sum_{j != 0} alpha(|j|)**2 |c_j|**2) ** 0.5``."""
    w = _hoermander_weights(f, alpha)
    return float(np.sqrt(np.sum((w * np.abs(f.coeffs)) ** 2)))


def partial_sum(f: FourierField, lam: float) -> FourierField:
    """The spectral partial sum over modes with ``|j| <= lam``."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    norm2 = np.sum(f.modes * f.modes, axis=1)
    return f.restrict(norm2 <= lam * lam)


def differentiate(f: FourierField, rho) -> FourierField:
    """Apply ``d^rho``: multiply ``c_j`` by ``prod_k (i j_k)**rho_k``."""
    rho = np.atleast_1d(np.asarray(rho, dtype=np.int64))
    if rho.shape != (f.n,) or np.any(rho < 0):
        raise ValueError("rho must be a nonnegative multi-index of length n")
    mult = np.ones(len(f), dtype=complex)
    for k in range(f.n):
        if rho[k]:
            mult = mult * (1j * f.modes[:, k]) ** int(rho[k])
    return FourierField(f.n, f.modes, f.coeffs * mult, f.support_radius)


def _min_grid(f: FourierField) -> float:
    return 2.0 * f.support_radius + 1.0


def evaluate_on_grid(
    f: FourierField, grid_per_axis: int, method: Literal["fft", "direct"] = "fft"
) -> np.ndarray:
    """Samples of ``f`` at ``tau_k = 2 pi k / grid_per_axis`` on every axis.

    ``method="direct"`` sums the exponentials explicitly; it is the
    independent check on the FFT path and only meant for small grids.
    """
    G = int(grid_per_axis)
    if G < _min_grid(f):
        raise ValueError(
            f"grid_per_axis={G} aliases: need at least 2*support_radius+1 = {_min_grid(f):g}"
        )
    n = f.n
    scale = (2.0 * np.pi) ** (-n / 2)
    if method == "direct":
        tau = 2.0 * np.pi * np.arange(G) / G
        factors = [np.exp(1j * np.outer(f.modes[:, k], tau)) for k in range(n)]
        letters = "abc"[:n]
        spec = "j," + ",".join(f"j{a}" for a in letters) + "->" + letters
        return scale * np.einsum(spec, f.coeffs, *factors)
    if method != "fft":
        raise ValueError(f"unknown method {method!r}")
    arr = np.zeros((G,) * n, dtype=complex)
    idx = tuple(np.mod(f.modes[:, k], G) for k in range(n))
    arr[idx] = f.coeffs
    return scale * (G ** n) * sfft.ifftn(arr)


@dataclass(frozen=True)
class NormSpec:
    """Which norm to measure and how finely.

    ``kind`` is one of ``"L2"``, ``"Lp"``, ``"Cl"``, ``"Hoermander"``.  For
    ``Lp`` and ``Cl``, ``ell`` selects the derivative order of the norm
    ``sum_{k <= ell} max_{|rho| = k} ||d^rho f||``.  ``grid_per_axis=None``
    picks the smallest FFT-friendly size satisfying the oversampling rule.
    """

    kind: Literal["L2", "Lp", "Cl", "Hoermander"] = "L2"
    p: float = 2.0
    ell: int = 0
    alpha: ORFunction | None = None
    grid_per_axis: int | None = None
    oversample: int = 8

    def __post_init__(self):
        if self.kind not in ("L2", "Lp", "Cl", "Hoermander"):
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "Lp" and not self.p >= 1:
            raise ValueError("Lp needs p >= 1")
        if self.kind == "Hoermander" and self.alpha is None:
            raise ValueError("Hoermander norm needs alpha")
        if self.ell < 0:
            raise ValueError("ell must be nonnegative")
        if self.oversample < 2:
            raise ValueError("oversample must be at least 2")

    def grid_for(self, f: FourierField) -> int:
        need = self.oversample * _min_grid(f)
        if self.grid_per_axis is None:
            return sfft.next_fast_len(int(math.ceil(need)))
        if self.grid_per_axis < need:
            raise ValueError(
                f"grid_per_axis={self.grid_per_axis} below oversample*(2R+1) = {need:g}"
            )
        return int(self.grid_per_axis)


def _multi_indices(n: int, order: int):
    for rho in itertools.product(range(order + 1), repeat=n):
        if sum(rho) == order:
            yield rho


def measure_norm(f: FourierField, spec: NormSpec) -> float:
    """Norm of ``f`` per ``spec``.

    L2 is Parseval on the coefficients.  Lp is the rectangle rule
    ``((2pi)**n / G**n * sum |f|**p) ** (1/p)`` on the uniform grid, which
    is exact for even integer ``p`` once the grid resolves ``|f|**p``.  Cl
    takes grid maxima.
    """
    if spec.kind == "L2":
        return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2)))
    if spec.kind == "Hoermander":
        return hoermander_norm(f, spec.alpha)
    G = spec.grid_for(f)
    if len(f) == 0:
        return 0.0
    total = 0.0
    for order in range(spec.ell + 1):
        best = 0.0
        for rho in _multi_indices(f.n, order):
            g = differentiate(f, rho) if order else f
            if len(g) == 0:
                continue
            vals = np.abs(evaluate_on_grid(g, G))
            if spec.kind == "Lp":
                cell = (2.0 * np.pi / G) ** f.n
                val = float((cell * np.sum(vals ** spec.p)) ** (1.0 / spec.p))
            else:
                val = float(np.max(vals))
            best = max(best, val)
        total += best
    return total


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def write_field_csv(f: FourierField, path_or_buf) -> None:
    """CSV with header ``j1,...,jn,re,im`` in canonical mode order.

    Floats are written as shortest round-trip decimals, so reading back is
    bit-exact.
    """
    header = [f"j{k + 1}" for k in range(f.n)] + ["re", "im"]
    rows = [
        [str(int(x)) for x in j] + [repr(float(c.real)), repr(float(c.imag))]
        for j, c in zip(f.modes, f.coeffs)
    ]
    if isinstance(path_or_buf, io.TextIOBase):
        _write_rows(path_or_buf, header, rows)
    else:
        with open(path_or_buf, "w", newline="") as fh:
            _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def read_field_csv(path_or_buf, support_radius: float | None = None) -> FourierField:
    if isinstance(path_or_buf, io.TextIOBase):
        rows = list(csv.reader(path_or_buf))
    else:
        with open(path_or_buf, newline="") as fh:
            rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    n = len(header) - 2
    if header != [f"j{k + 1}" for k in range(n)] + ["re", "im"]:
        raise ValueError(f"unexpected field CSV header {header}")
    modes = np.array([[int(x) for x in r[:n]] for r in body], dtype=np.int64).reshape(-1, n)
    coeffs = np.array([complex(float(r[n]), float(r[n + 1])) for r in body], dtype=complex)
    return FourierField(n, modes, coeffs, support_radius)
