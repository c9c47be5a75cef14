"""A finite-dimensional normal operator on a space with two norms.

The operator ``L`` is diagonal in the standard basis ``e_1..e_M`` of
``H = l^2(C^M)`` with eigenvalues ``lambda_j``.  The second norm is the
weighted ``l^q`` norm ``||x||_N = (sum_j (w_j |x_j|)**q) ** (1/q)`` (a max for
``q = inf``).  In this setting every quantity in the two-norm error estimate

    ||f - P_U f||_N <= ||R||_{H->N} ||g||_H sup_{j not in U} |eta(lambda_j)| r(U),

with ``f = (omega eta)(L) g``, ``R = omega(L)`` and
``r(U) = ||(I - P_U) g||_H / ||g||_H``, is computable in closed form.

Index sets ``U`` are collections of 0-based positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "DiagonalModel",
    "SymbolPair",
    "MasterEstimate",
    "operator_norm_R",
    "truncation_residual",
    "master_estimate_check",
    "eta_tail_sup",
    "exact_tail_operator_norm",
    "net_convergence_trace",
    "random_case",
    "dump_case",
    "load_case",
]

_REL_SLACK = 1e-9


@dataclass(frozen=True)
class DiagonalModel:
    eigenvalues: np.ndarray
    weights: np.ndarray
    q: float = 2.0

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=complex).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if lam.size < 1:
            raise ValueError("the model needs at least one eigenvalue")
        if w.shape != lam.shape:
            raise ValueError("one weight per eigenvalue")
        if np.any(~(w > 0)):
            raise ValueError("weights must be positive")
        if not self.q >= 1:
            raise ValueError("q must lie in [1, inf]")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "q", float(self.q))

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def n_norm(self, x) -> float:
        """The second norm ``||x||_N``."""
        a = self.weights * np.abs(np.asarray(x))
        if math.isinf(self.q):
            return float(np.max(a, initial=0.0))
        return float(np.sum(a ** self.q) ** (1.0 / self.q))

    def symbols(self, omega, eta) -> "SymbolPair":
        """Build a SymbolPair from per-position arrays or from callables of
        the eigenvalue; positions sharing an eigenvalue must agree."""
        om = _sample(omega, self.eigenvalues)
        et = _sample(eta, self.eigenvalues)
        _, first, inv = np.unique(self.eigenvalues, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        for vals, name in ((om, "omega"), (et, "eta")):
            if np.any(vals[first][inv] != vals):
                raise ValueError(f"{name} differs across a repeated eigenvalue")
        return SymbolPair(om, et)

    def complement(self, upsilon) -> np.ndarray:
        """Boolean mask of positions not in ``upsilon``."""
        mask = np.ones(self.dim, dtype=bool)
        mask[_index_array(upsilon, self.dim)] = False
        return mask


def _sample(fn_or_vals, lam: np.ndarray) -> np.ndarray:
    if callable(fn_or_vals):
        return np.asarray([fn_or_vals(x) for x in lam], dtype=complex)
    vals = np.asarray(fn_or_vals, dtype=complex).reshape(-1)
    if vals.shape != lam.shape:
        raise ValueError("one symbol value per eigenvalue")
    return vals


def _index_array(upsilon, dim: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(i) for i in upsilon)), dtype=np.int64)
    if idx.size and (idx[0] < 0 or idx[-1] >= dim):
        raise IndexError("index set outside 0..M-1")
    return idx


@dataclass(frozen=True)
class SymbolPair:
    """Values of ``omega`` and ``eta`` at each eigenvalue position."""

    omega: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=complex).reshape(-1)
        et = np.asarray(self.eta, dtype=complex).reshape(-1)
        if om.shape != et.shape:
            raise ValueError("omega and eta must have equal length")
        if np.any(om == 0) or np.any(et == 0):
            raise ValueError("omega and eta must not vanish")
        if not (np.all(np.isfinite(om)) and np.all(np.isfinite(et))):
            raise ValueError("omega and eta must be bounded")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "eta", et)


@dataclass(frozen=True)
class MasterEstimate:
    lhs: float
    rhs: float
    passed: bool


def operator_norm_R(model: DiagonalModel, symbols: SymbolPair) -> float:
    """Norm of ``omega(L)`` from ``l^2`` into the weighted ``l^q``.

    For ``q >= 2`` this is ``max_j w_j |omega_j|``; for ``q < 2`` Holder
    gives the ``l^r`` norm of ``w |omega|`` with ``1/r = 1/q - 1/2``, and the
    bound is attained.
    """
    d = model.weights * np.abs(symbols.omega)
    if model.q >= 2:
        return float(np.max(d))
    r = 1.0 / (1.0 / model.q - 0.5)
    return float(np.sum(d ** r) ** (1.0 / r))


def truncation_residual(model: DiagonalModel, g, upsilon) -> float:
    """``||(I - P_U) g|| / ||g||`` in ``l^2``."""
    g = np.asarray(g, dtype=complex)
    total = np.linalg.norm(g)
    if total == 0:
        raise DomainError("g must be nonzero")
    return float(np.linalg.norm(g[model.complement(upsilon)]) / total)


def eta_tail_sup(model: DiagonalModel, symbols: SymbolPair, upsilon) -> float:
    """``sup_{j not in U} |eta_j|``, zero for an empty complement."""
    return float(np.max(np.abs(symbols.eta[model.complement(upsilon)]), initial=0.0))


def exact_tail_operator_norm(model: DiagonalModel, symbols: SymbolPair, upsilon) -> float:
    """Spectral norm of the dense matrix ``eta(L) (I - P_U)``, via SVD."""
    keep = model.complement(upsilon).astype(float)
    mat = np.diag(symbols.eta * keep)
    return float(np.linalg.norm(mat, 2))


def master_estimate_check(
    model: DiagonalModel, symbols: SymbolPair, g, upsilon
) -> MasterEstimate:
    """Evaluate both sides of the two-norm error estimate exactly.

    ``lhs = ||f - P_U f||_N`` with ``f = (omega eta)(L) g``; ``rhs`` is the
    product ``||R|| ||g|| sup|eta| r(U)``.  Passes iff
    ``lhs <= rhs * (1 + 1e-9)``.
    """
    g = np.asarray(g, dtype=complex)
    if np.linalg.norm(g) == 0:
        raise DomainError("g must be nonzero")
    comp = model.complement(upsilon)
    f = symbols.omega * symbols.eta * g
    tail = np.where(comp, f, 0.0)
    lhs = model.n_norm(tail)
    rhs = (
        operator_norm_R(model, symbols)
        * float(np.linalg.norm(g))
        * eta_tail_sup(model, symbols, upsilon)
        * truncation_residual(model, g, upsilon)
    )
    return MasterEstimate(lhs, rhs, bool(lhs <= rhs * (1 + _REL_SLACK)))


def net_convergence_trace(model: DiagonalModel, g, chain: Sequence[Iterable[int]]) -> list[float]:
    """Residuals ``r(U_k)`` along a strictly increasing chain of index sets."""
    sets = [frozenset(int(i) for i in u) for u in chain]
    for a, b in zip(sets, sets[1:]):
        if not a < b:
            raise ValueError("chain must be strictly increasing under inclusion")
    return [truncation_residual(model, g, u) for u in sets]


# --------------------------------------------------------------------------
# random configurations and replay blocks
# --------------------------------------------------------------------------


def _unit_annulus(rng: np.random.Generator, size: int, lo: float = 0.05) -> np.ndarray:
    mod = rng.uniform(lo, 1.0, size)
    return mod * np.exp(2j * np.pi * rng.random(size))


def random_case(
    rng: np.random.Generator, max_dim: int = 64, q_choices=(1.2, 2.0, 3.0, math.inf)
) -> tuple[DiagonalModel, SymbolPair, np.ndarray, np.ndarray]:
    """A random (model, symbols, g, U) with repeated eigenvalues mixed in.

    ``omega`` and ``eta`` are drawn per distinct eigenvalue, so they are
    automatically consistent on repeats.  ``U`` is empty, full or a random
    subset with probabilities 0.1, 0.1, 0.8.
    """
    M = int(rng.integers(1, max_dim + 1))
    distinct = int(rng.integers(1, M + 1))
    pool = rng.normal(size=distinct) + 1j * rng.normal(size=distinct)
    label = rng.integers(0, distinct, M)
    lam = pool[label]
    w = rng.uniform(0.1, 3.0, M)
    q = float(q_choices[int(rng.integers(len(q_choices)))])
    om = _unit_annulus(rng, distinct)[label]
    et = _unit_annulus(rng, distinct)[label]
    g = rng.normal(size=M) + 1j * rng.normal(size=M)
    u = rng.random()
    if u < 0.1:
        ups = np.array([], dtype=np.int64)
    elif u < 0.2:
        ups = np.arange(M)
    else:
        ups = np.flatnonzero(rng.random(M) < rng.random())
    return DiagonalModel(lam, w, q), SymbolPair(om, et), g, ups


def dump_case(model: DiagonalModel, symbols: SymbolPair, g, upsilon) -> str:
    """Plain-text replay block.

    Two comment lines carry ``q`` and the index set; then one line per
    position: ``lambda_re,lambda_im,w,omega_re,omega_im,eta_re,eta_im,g_re,g_im``.
    """
    g = np.asarray(g, dtype=complex)
    lines = [
        f"# q={model.q!r}",
        "# upsilon=" + ",".join(str(i) for i in _index_array(upsilon, model.dim)),
    ]
    for lam, w, om, et, gj in zip(model.eigenvalues, model.weights, symbols.omega, symbols.eta, g):
        vals = (lam.real, lam.imag, w, om.real, om.imag, et.real, et.imag, gj.real, gj.imag)
        lines.append(",".join(repr(float(v)) for v in vals))
    return "\n".join(lines) + "\n"


def load_case(text: str) -> tuple[DiagonalModel, SymbolPair, np.ndarray, np.ndarray]:
    q = 2.0
    ups: list[int] = []
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("# q="):
            q = float(line[4:])
        elif line.startswith("# upsilon="):
            ups = [int(x) for x in line[10:].split(",") if x]
        elif not line.startswith("#"):
            rows.append([float(x) for x in line.split(",")])
    a = np.array(rows, dtype=float).reshape(-1, 9)
    model = DiagonalModel(a[:, 0] + 1j * a[:, 1], a[:, 2], q)
    symbols = SymbolPair(a[:, 3] + 1j * a[:, 4], a[:, 5] + 1j * a[:, 6])
    return model, symbols, a[:, 7] + 1j * a[:, 8], np.array(ups, dtype=np.int64)
