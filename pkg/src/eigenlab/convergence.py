"""Truncation experiments on the torus and unconditional-convergence stress.

Spectral cutoffs are stated for an operator of order ``m`` whose eigenvalue
on ``e_j`` has modulus ``|j|**m``.  Cutting at ``lambda`` therefore keeps the
modes with ``|j| <= lambda**(1/m)`` and the predicted error rate is
``h(lambda**(1/m))``.

The constant in front of ``h`` is never assumed.  ``truncation_curve`` reports
``ratio = err / (||f||_{H,alpha} h)`` and ``verify_decay`` only asks that the
ratio stays bounded along the schedule.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import unitary_group

from .errors import HypothesisError
from .lattice import (
    FourierField,
    NormSpec,
    _hoermander_weights,
    hoermander_norm,
    measure_norm,
    modes_in_ball,
    partial_sum,
)
from .or_functions import (
    DecayWeight,
    ORFunction,
    PowerLog,
    classify_embedding,
    decay_weight_h,
    ratio_weight,
)

__all__ = [
    "TruncationTable",
    "StressReport",
    "DecayVerdict",
    "default_schedule",
    "rate_weight",
    "truncation_curve",
    "verify_decay",
    "prefix_errors",
    "rearrangement_stress",
    "eigenspace_rotation_stress",
    "absolute_sum_check",
]

SLOPE_GATE = 0.05
DISPERSION_GATE = 3.0
_REL_SLACK = 1e-9


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass(frozen=True)
class TruncationTable:
    """One row per cutoff ``lambda``; columns as in the CSV header.

    ``bound = c_free * ||f||_{H,alpha} * h(lambda**(1/m))`` with ``c_free``
    the largest ratio seen over the schedule.
    """

    lambdas: np.ndarray
    err_target: np.ndarray
    err_l2: np.ndarray
    bound: np.ndarray
    ratio: np.ndarray
    m: float
    spec: NormSpec
    alpha_desc: str
    c_free: float

    COLUMNS = ("lambda", "err_target", "err_l2", "bound", "ratio")

    def __len__(self) -> int:
        return len(self.lambdas)

    def rows(self):
        return zip(self.lambdas, self.err_target, self.err_l2, self.bound, self.ratio)

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        lines += [",".join(_fmt(v) for v in row) for row in self.rows()]
        return "\n".join(lines) + "\n"

    @staticmethod
    def read_csv(text: str) -> np.ndarray:
        """Parse the CSV body into an ``(rows, 5)`` float array."""
        return np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)


@dataclass(frozen=True)
class StressReport:
    trials: int
    worst_prefix_ratio: float
    bound_violations: int
    final_residual: float
    prefixes_checked: int = 0

    def to_text(self) -> str:
        return "".join(
            f"{k}={_fmt(v) if isinstance(v, float) else v}\n"
            for k, v in (
                ("trials", self.trials),
                ("worst_prefix_ratio", self.worst_prefix_ratio),
                ("bound_violations", self.bound_violations),
                ("final_residual", self.final_residual),
                ("prefixes_checked", self.prefixes_checked),
            )
        )


@dataclass(frozen=True)
class DecayVerdict:
    passed: bool
    slope: float
    sup_ratio: float

    def __bool__(self) -> bool:
        return self.passed


def default_schedule(support_radius: float, m: float = 1.0) -> list[float]:
    """Geometric cutoffs ``4 * 2**(k/2)`` while the kept radius stays at or
    below half the support radius."""
    out = []
    k = 0
    while True:
        lam = 4.0 * 2.0 ** (k / 2)
        if lam ** (1.0 / m) > support_radius / 2:
            return out
        out.append(lam)
        k += 1


def rate_weight(
    alpha: ORFunction, spec: NormSpec, n: int, beta: ORFunction | None = None
) -> DecayWeight:
    """The rate ``h`` matching ``spec``, after checking the hypotheses.

    Lp (p > 2) uses ``t**(ell + n/2 - n/p) / alpha``; L2 uses ``t**ell / alpha``.
    Cl needs a factorisation ``alpha = beta / h`` with ``h = beta / alpha``
    decreasing and the embedding integral of ``beta`` finite.

    Raises
    ------
    HypothesisError
        Naming the hypothesis that fails.
    """
    if spec.kind == "Lp" and spec.p > 2:
        h = decay_weight_h(alpha, spec.ell, n, spec.p)
    elif spec.kind == "L2" or (spec.kind == "Lp" and spec.p == 2):
        h = ratio_weight(alpha, PowerLog(float(spec.ell)))
    elif spec.kind == "Lp":
        raise HypothesisError("mean-convergence rate needs p >= 2")
    elif spec.kind == "Cl":
        if beta is None:
            raise HypothesisError("C^l rate needs a factor beta with alpha = beta / h")
        verdict = classify_embedding(beta, spec.ell, n)
        if verdict.verdict != "Convergent":
            raise HypothesisError(
                f"embedding integral of beta is {verdict.verdict}, not Convergent"
            )
        h = ratio_weight(alpha, beta)
    else:
        raise HypothesisError(f"no decay rate is known for the {spec.kind} norm")
    if not h.monotone:
        raise HypothesisError("h = weight ratio is not decreasing to zero")
    return h


def _l2_tail(f: FourierField, radius: float) -> float:
    r2 = np.sum(f.modes * f.modes, axis=1)
    tail = np.abs(f.coeffs[r2 > radius * radius]) ** 2
    return float(np.sqrt(np.sum(tail[::-1])))


def truncation_curve(
    f: FourierField,
    alpha: ORFunction,
    spec: NormSpec,
    m: float,
    lambda_schedule: Sequence[float] | None = None,
    beta: ORFunction | None = None,
) -> TruncationTable:
    """Measure ``||f - S_lambda f||`` along a schedule of spectral cutoffs.

    Parameters
    ----------
    f : FourierField
    alpha : ORFunction
        Smoothness weight of the Hormander norm.
    spec : NormSpec
        Target norm; ``L2``, ``Lp`` with ``p >= 2`` or ``Cl``.
    m : float
        Operator order; the kept radius is ``lambda**(1/m)``.
    lambda_schedule : sequence of float, optional
        Strictly increasing cutoffs; defaults to :func:`default_schedule`.
    beta : ORFunction, optional
        Required for ``Cl``: the factor with ``alpha = beta / h``.

    Returns
    -------
    TruncationTable
    """
    if not m > 0:
        raise ValueError("operator order m must be positive")
    lams = np.asarray(
        default_schedule(f.support_radius, m) if lambda_schedule is None else lambda_schedule,
        dtype=float,
    )
    if lams.size == 0:
        raise ValueError("empty schedule")
    if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
        raise ValueError("schedule must be positive and strictly increasing")
    h = rate_weight(alpha, spec, f.n, beta)
    norm_h = hoermander_norm(f, alpha)

    radii = lams ** (1.0 / m)
    err_t = np.array([measure_norm(f - partial_sum(f, r), spec) for r in radii])
    err_2 = np.array([_l2_tail(f, r) for r in radii])
    scale = norm_h * h(np.maximum(radii, 1.0))
    ratio = np.divide(err_t, scale, out=np.zeros_like(err_t), where=scale > 0)
    c_free = float(np.max(ratio))
    return TruncationTable(
        lams, err_t, err_2, c_free * scale, ratio, float(m), spec, alpha.describe(), c_free
    )


def verify_decay(table: TruncationTable) -> DecayVerdict:
    """Boundedness gates on the ratio column.

    Fits ``log ratio`` against ``log lambda`` by least squares over the rows
    with nonzero error.  Passes iff the slope is at most 0.05 and the largest
    ratio is at most three times the median.

    Raises
    ------
    ValueError
        Fewer than four rows with nonzero error.
    """
    keep = np.asarray(table.err_target) > 0
    if np.count_nonzero(keep) < 4:
        raise ValueError("verify_decay needs at least 4 rows with nonzero error")
    x = np.log(np.asarray(table.lambdas)[keep])
    y = np.log(np.asarray(table.ratio)[keep])
    slope = float(np.polyfit(x, y, 1)[0])
    r = np.asarray(table.ratio)[keep]
    sup = float(np.max(r))
    passed = slope <= SLOPE_GATE and sup <= DISPERSION_GATE * float(np.median(r))
    return DecayVerdict(bool(passed), slope, sup)


# --------------------------------------------------------------------------
# rearrangements
# --------------------------------------------------------------------------


def prefix_errors(
    f: FourierField, order: np.ndarray, spec: NormSpec, prefixes: Sequence[int] | None = None
) -> np.ndarray:
    """``||f - sum_{i < k} c_{order[i]} e_{order[i]}||`` for each prefix length ``k``.

    ``order`` permutes the stored modes.  L2 uses suffix sums of ``|c|**2``
    accumulated from the far end; other norms rebuild the remainder field.
    ``prefixes`` defaults to every ``k`` in ``0..len(f)``.
    """
    order = np.asarray(order, dtype=np.int64)
    N = len(f)
    if sorted(order.tolist()) != list(range(N)):
        raise ValueError("order must be a permutation of the stored modes")
    ks = np.arange(N + 1) if prefixes is None else np.asarray(prefixes, dtype=np.int64)
    if spec.kind == "L2":
        sq = np.abs(f.coeffs[order]) ** 2
        suffix = np.concatenate([np.cumsum(sq[::-1])[::-1], [0.0]])
        return np.sqrt(suffix[ks])
    out = np.empty(len(ks))
    for i, k in enumerate(ks):
        mask = np.ones(N, dtype=bool)
        mask[order[:k]] = False
        out[i] = measure_norm(f.restrict(mask), spec)
    return out


def _factorisation(f: FourierField, alpha: ORFunction, h: DecayWeight):
    """``c = omega * eta * g`` with ``g = a c`` (Hormander weights ``a``),
    ``eta_j = h(max(|j|, 1))`` and ``omega = 1 / (a eta)``."""
    a = _hoermander_weights(f, alpha)
    eta = h(np.maximum(f.norms, 1.0))
    g = a * f.coeffs
    omega = 1.0 / (a * eta)
    return g, eta, omega


def _suffix_max(x: np.ndarray) -> np.ndarray:
    """``out[k] = max(x[k:])`` with ``out[len(x)] = 0``."""
    return np.concatenate([np.maximum.accumulate(x[::-1])[::-1], [0.0]])


def _suffix_l2(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.concatenate([np.cumsum((np.abs(x) ** 2)[::-1])[::-1], [0.0]]))


def _ball_order(f: FourierField) -> np.ndarray:
    # stored modes are already in canonical order, which is ball-shaped
    return np.arange(len(f))


def rearrangement_stress(
    f: FourierField,
    spec: NormSpec,
    alpha: ORFunction,
    m: float,
    trials: int,
    seed: int,
    beta: ORFunction | None = None,
    max_prefixes: int = 64,
) -> StressReport:
    """Check the index-set form of the error bound along random orderings.

    For a prefix ``U`` of a permutation the bound is

        ||f - P_U f|| <= C * ||g_{not U}|| * sup_{j not in U} |eta_j|,

    using the factorisation ``c = omega eta g`` above.  In L2 the constant
    ``C`` is the exact ``max |omega|`` and the bound is a theorem.  In other
    norms ``C`` is the largest ratio seen over ball-shaped prefixes, which
    makes the check a test of the bound's shape only.  Non-L2 trials use at
    most ``max_prefixes`` evenly spaced prefixes per ordering.

    Each trial draws its permutation from ``default_rng((seed, trial))``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    N = len(f)
    if N == 0:
        return StressReport(trials, 0.0, 0, 0.0, 0)
    h = rate_weight(alpha, spec, f.n, beta)
    g, eta, omega = _factorisation(f, alpha, h)

    if spec.kind == "L2":
        C = float(np.max(np.abs(omega)))
        ks = None
    else:
        ks = np.unique(np.linspace(0, N, min(max_prefixes, N + 1)).round().astype(np.int64))
        ref = _ball_order(f)
        shape = (_suffix_l2(g[ref]) * _suffix_max(eta[ref]))[ks]
        err = prefix_errors(f, ref, spec, ks)
        C = float(np.max(err[shape > 0] / shape[shape > 0], initial=0.0))

    worst, violations, final, checked = 0.0, 0, 0.0, 0
    for trial in range(trials):
        order = np.random.default_rng((seed, trial)).permutation(N)
        err = prefix_errors(f, order, spec, ks)
        shape = _suffix_l2(g[order]) * _suffix_max(eta[order])
        if ks is not None:
            shape = shape[ks]
        bound = C * shape
        violations += int(np.count_nonzero(err > bound * (1 + _REL_SLACK)))
        pos = bound > 0
        if np.any(pos):
            worst = max(worst, float(np.max(err[pos] / bound[pos])))
        final = max(final, float(err[-1]))
        checked += len(err)
    return StressReport(trials, worst, violations, final, checked)


# --------------------------------------------------------------------------
# eigenspace rotations and absolute convergence
# --------------------------------------------------------------------------


def eigenspace_rotation_stress(f: FourierField, seed: int) -> float:
    """Largest coefficient change of any eigenspace projection under a random
    unitary change of basis inside that eigenspace.

    Levels are the sets ``{j : |j|**2 = mu}`` for ``|j| <= support_radius``,
    including modes where ``f`` vanishes.  Level ``mu`` uses the unitary
    ``scipy.stats.unitary_group`` draws from ``default_rng((seed, mu))``.
    One-dimensional levels contribute exactly 0.
    """
    modes = modes_in_ball(f.n, f.support_radius)
    lookup = {tuple(j): c for j, c in zip(f.modes.tolist(), f.coeffs)}
    coeffs = np.array([lookup.get(tuple(j), 0.0) for j in modes.tolist()], dtype=complex)
    mu = np.sum(modes * modes, axis=1)
    starts = np.flatnonzero(np.r_[True, mu[1:] != mu[:-1]])
    stops = np.r_[starts[1:], len(mu)]
    worst = 0.0
    for a, b in zip(starts, stops):
        d = b - a
        if d < 2:
            continue
        U = unitary_group.rvs(d, random_state=np.random.default_rng((seed, int(mu[a]))))
        c = coeffs[a:b]
        projected = U @ (U.conj().T @ c)
        worst = max(worst, float(np.max(np.abs(projected - c))))
    return worst


@dataclass(frozen=True)
class AbsoluteSum:
    lhs: float
    rhs: float
    passed: bool


def absolute_sum_check(
    f: FourierField, alpha: ORFunction, n: int, ell: int = 0
) -> AbsoluteSum:
    """Cauchy-Schwarz bound on the coefficient sum.

    ``sum |c_j| <= ||f||_{H,alpha} * (1 + sum_{0 < |j| <= R} alpha(|j|)**-2) ** 0.5``
    with the sum over every lattice point of the support ball.

    Raises
    ------
    HypothesisError
        The embedding integral of ``alpha`` is not Convergent.
    """
    if n != f.n:
        raise ValueError("n does not match the field dimension")
    verdict = classify_embedding(alpha, ell, n).verdict
    if verdict != "Convergent":
        raise HypothesisError(f"embedding integral of alpha is {verdict}, not Convergent")
    lhs = float(np.sum(np.abs(f.coeffs)))
    modes = modes_in_ball(n, f.support_radius)
    r = np.sqrt(np.sum(modes.astype(float) ** 2, axis=1))
    r = r[r > 0]
    factor = math.sqrt(1.0 + float(np.sum(np.exp(-2.0 * alpha.log(r)))))
    rhs = hoermander_norm(f, alpha) * factor
    return AbsoluteSum(lhs, rhs, bool(lhs <= rhs * (1 + 1e-12)))
