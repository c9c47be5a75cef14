"""O-regularly varying weights and the quantities derived from them.

A weight ``alpha: [1, inf) -> (0, inf)`` is O-regularly varying when it admits
the representation

    alpha(t) = exp(beta(t) + integral_1^t gamma(tau) / tau dtau)

with bounded ``beta`` and ``gamma``.  Three concrete families are provided:

``PowerLog``
    ``t**s * L1(t)**s1 * L2(t)**s2 * ...`` with iterated logarithms, evaluated
    in closed form.
``OscillatingGamma``
    ``gamma`` alternates between two levels ``r < s`` on multiplicatively
    growing intervals, which separates the lower and upper Matuszewska
    indices.
``ExplicitRepresentation``
    ``beta`` and ``gamma`` piecewise constant on a knot grid, so that the
    integral above is a finite sum of log-ratios.

Every weight exposes ``log(t)`` as its primary evaluation; ``alpha(t)`` is
``exp(alpha.log(t))``.  Working in log space keeps ratios such as
``t**sigma / alpha(t)`` finite far beyond the range of float64 powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import DomainError

__all__ = [
    "ORFunction",
    "PowerLog",
    "OscillatingGamma",
    "ExplicitRepresentation",
    "IndexEstimate",
    "ORBoundCheck",
    "EmbeddingVerdict",
    "DecayWeight",
    "evaluate",
    "estimate_indices",
    "check_or_bounds",
    "classify_embedding",
    "decay_weight_h",
    "ratio_weight",
    "or_from_params",
]

# exp(exp(exp(1))) is already ~3.8e6; a fourth level overflows float64.
_MAX_LOG_DEPTH = 3


def _check_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    # written as a negation so that NaN is rejected as well
    if np.any(~(arr >= 1.0)):
        raise DomainError("OR weights are defined on [1, inf); got t < 1")
    return arr


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_list(xs) -> str:
    return ",".join(_fmt(x) for x in xs)


class ORFunction:
    """Base class for O-regularly varying weights."""

    kind: str = "abstract"

    def log(self, t):
        """Return ``log(alpha(t))``; raises DomainError for ``t < 1``."""
        raise NotImplementedError

    def __call__(self, t):
        return np.exp(self.log(t))

    def params(self) -> dict[str, str]:
        """Plain-text parameters, the inverse of :func:`or_from_params`."""
        raise NotImplementedError

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.params().items() if k != "kind")
        return f"{self.kind}({inner})"


def evaluate(alpha: ORFunction, t):
    """Evaluate ``alpha`` at ``t >= 1``.  Same as ``alpha(t)``."""
    return alpha(t)


# --------------------------------------------------------------------------
# PowerLog
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerLog(ORFunction):
    """``t**s * prod_i L_i(t)**logexp[i]`` with ``L_1 = log(t + log_shift)``
    and ``L_{i+1} = log(L_i)``.

    Below the crossover ``t0`` the function is frozen at ``alpha(t0)``.  When
    ``t0`` is not given it is 1 if every iterated logarithm is already
    positive at ``t = 1`` (for example ``log(t + 1)``), and otherwise the
    smallest point at which every iterated logarithm reaches 1.
    """

    s: float
    logexp: tuple[float, ...] = ()
    log_shift: float = 0.0
    t0: float | None = None
    kind: str = field(default="power_log", init=False, repr=False)

    def __post_init__(self):
        exps = tuple(float(e) for e in np.atleast_1d(np.asarray(self.logexp, dtype=float)))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "logexp", exps)
        object.__setattr__(self, "log_shift", float(self.log_shift))
        if self.log_shift < 0:
            raise ValueError("log_shift must be nonnegative")
        if self.depth > _MAX_LOG_DEPTH:
            raise ValueError(f"at most {_MAX_LOG_DEPTH} iterated logarithms are supported")
        if self.t0 is None:
            object.__setattr__(self, "t0", self._default_t0())
        else:
            t0 = float(self.t0)
            if t0 < 1:
                raise ValueError("t0 must be >= 1")
            if self.depth and np.any(self._iterated_logs(np.array([t0]))[:, 0] <= 0):
                raise ValueError("every iterated logarithm must be positive at t0")
            object.__setattr__(self, "t0", t0)

    @property
    def depth(self) -> int:
        """Index of the deepest logarithm carrying a nonzero exponent."""
        nz = [i for i, e in enumerate(self.logexp) if e != 0.0]
        return nz[-1] + 1 if nz else 0

    def _iterated_logs(self, t: np.ndarray) -> np.ndarray:
        out = np.empty((self.depth,) + t.shape)
        cur = t + self.log_shift
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(self.depth):
                cur = np.log(cur)
                out[i] = cur
        return out

    def _default_t0(self) -> float:
        if self.depth == 0:
            return 1.0
        if np.all(self._iterated_logs(np.array([1.0]))[:, 0] > 0):
            return 1.0
        level = 1.0
        for _ in range(self.depth):
            level = math.exp(level)
        return max(1.0, level - self.log_shift)

    def log(self, t):
        t = _check_t(t)
        te = np.maximum(t, self.t0)
        out = self.s * np.log(te)
        if self.depth:
            logs = self._iterated_logs(te)
            for e, L in zip(self.logexp, logs):
                if e != 0.0:
                    out = out + e * np.log(L)
        return out[()] if out.ndim == 0 else out

    def params(self) -> dict[str, str]:
        p = {"kind": self.kind, "s": _fmt(self.s)}
        if self.logexp:
            p["logexp"] = _fmt_list(self.logexp)
        if self.log_shift:
            p["log_shift"] = _fmt(self.log_shift)
        if self.t0 != self._default_t0():
            p["t0"] = _fmt(self.t0)
        return p


# --------------------------------------------------------------------------
# OscillatingGamma
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class OscillatingGamma(ORFunction):
    """``gamma = r`` on ``[P_{2j-1}, P_{2j}]`` and ``s`` elsewhere, where
    ``P_k = theta_1 * ... * theta_k``.

    The multiplier sequence is ``theta_1 = 1`` and
    ``theta_k = theta_base**(k + theta_shift)`` for ``k >= 2``; with
    ``theta_shift=-1`` this is ``2**(k-1)``, with ``theta_shift=0`` it is
    ``1, 4, 8, 16, ...``.  ``beta`` is the constant ``beta_const``.
    """

    r: float
    s: float
    theta_base: float = 2.0
    theta_shift: float = 0.0
    beta_const: float = 1.0
    kind: str = field(default="oscillating_gamma", init=False, repr=False)

    def __post_init__(self):
        for name in ("r", "s", "theta_base", "theta_shift", "beta_const"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.r < self.s:
            raise ValueError("OscillatingGamma requires r < s")
        if not self.theta_base > 1:
            raise ValueError("theta_base must exceed 1")
        if not self.theta_shift > -2:
            raise ValueError("theta_shift must exceed -2 so that theta_2 > theta_1 = 1")

    def theta(self, k: int) -> float:
        if k < 1:
            raise ValueError("theta is indexed from 1")
        return 1.0 if k == 1 else self.theta_base ** (k + self.theta_shift)

    def breakpoints(self, log_t_max: float) -> tuple[np.ndarray, np.ndarray]:
        """Log-breakpoints ``log P_k`` covering ``[0, log_t_max]`` and the
        integral of ``gamma(tau)/tau`` from 1 up to each of them."""
        log_base = math.log(self.theta_base)
        logp = [0.0]
        k = 1
        while logp[-1] <= log_t_max:
            k += 1
            logp.append(logp[-1] + (k + self.theta_shift) * log_base)
        logp = np.array(logp)
        # piece k (1-based) spans [P_k, P_{k+1}]; odd pieces carry r
        levels = np.where(np.arange(1, logp.size) % 2 == 1, self.r, self.s)
        cum = np.concatenate([[0.0], np.cumsum(levels * np.diff(logp))])
        return logp, cum

    def gamma(self, t):
        lt = np.log(_check_t(t))
        logp, _ = self.breakpoints(float(np.max(lt, initial=0.0)))
        piece = np.searchsorted(logp, lt, side="right")
        return np.where(piece % 2 == 1, self.r, self.s)

    def log(self, t):
        lt = np.log(_check_t(t))
        logp, cum = self.breakpoints(float(np.max(lt, initial=0.0)))
        out = self.beta_const + np.interp(lt, logp, cum)
        return out[()] if np.ndim(out) == 0 else out

    def params(self) -> dict[str, str]:
        return {
            "kind": self.kind,
            "r": _fmt(self.r),
            "s": _fmt(self.s),
            "theta_base": _fmt(self.theta_base),
            "theta_shift": _fmt(self.theta_shift),
            "beta_const": _fmt(self.beta_const),
        }


# --------------------------------------------------------------------------
# ExplicitRepresentation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitRepresentation(ORFunction):
    """``beta`` and ``gamma`` piecewise constant on ``[knots[i], knots[i+1])``.

    ``knots[0]`` must be 1; the last piece extends to infinity.  Scalars are
    accepted for ``beta`` and ``gamma`` and broadcast over the knots.
    """

    knots: tuple[float, ...]
    beta: tuple[float, ...]
    gamma: tuple[float, ...]
    kind: str = field(default="explicit", init=False, repr=False)

    def __post_init__(self):
        knots = np.atleast_1d(np.asarray(self.knots, dtype=float))
        beta = np.broadcast_to(np.asarray(self.beta, dtype=float), knots.shape)
        gamma = np.broadcast_to(np.asarray(self.gamma, dtype=float), knots.shape)
        if knots[0] != 1.0:
            raise ValueError("the first knot must be 1")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if not (np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise ValueError("beta and gamma must be bounded")
        object.__setattr__(self, "knots", tuple(knots.tolist()))
        object.__setattr__(self, "beta", tuple(beta.tolist()))
        object.__setattr__(self, "gamma", tuple(gamma.tolist()))

    @classmethod
    def on_log_grid(cls, t_end: float, beta, gamma) -> "ExplicitRepresentation":
        """Knots log-spaced on ``[1, t_end]``, one per value in ``gamma``."""
        size = np.size(gamma)
        return cls(tuple(np.geomspace(1.0, t_end, size + 1)[:-1]) if size > 1 else (1.0,),
                   beta, gamma)

    def bounds(self) -> tuple[float, float, float]:
        """``(sup|beta|, inf gamma, sup gamma)``."""
        return (max(abs(b) for b in self.beta), min(self.gamma), max(self.gamma))

    def log(self, t):
        t = _check_t(t)
        knots = np.asarray(self.knots)
        lk = np.log(knots)
        gamma = np.asarray(self.gamma)
        cum = np.concatenate([[0.0], np.cumsum(gamma[:-1] * np.diff(lk))])
        idx = np.searchsorted(knots, t, side="right") - 1
        out = np.asarray(self.beta)[idx] + cum[idx] + gamma[idx] * (np.log(t) - lk[idx])
        return out[()] if np.ndim(out) == 0 else out

    def params(self) -> dict[str, str]:
        return {
            "kind": self.kind,
            "knots": _fmt_list(self.knots),
            "beta": _fmt_list(self.beta),
            "gamma": _fmt_list(self.gamma),
        }


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def or_from_params(params: dict[str, str]) -> ORFunction:
    """Build an ORFunction from its plain-text parameters.

    >>> or_from_params({"kind": "power_log", "s": "0.75"})(16.0)
    8.0
    """
    p = dict(params)
    kind = p.pop("kind", None)
    allowed = {
        "power_log": {"s", "logexp", "log_shift", "t0"},
        "oscillating_gamma": {"r", "s", "theta_base", "theta_shift", "beta_const"},
        "explicit": {"knots", "beta", "gamma"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown OR kind {kind!r}")
    unknown = set(p) - allowed[kind]
    if unknown:
        raise ValueError(f"unknown keys for {kind}: {sorted(unknown)}")
    if kind == "power_log":
        return PowerLog(
            s=float(p["s"]),
            logexp=_floats(p.get("logexp", "")),
            log_shift=float(p.get("log_shift", 0.0)),
            t0=float(p["t0"]) if "t0" in p else None,
        )
    if kind == "oscillating_gamma":
        return OscillatingGamma(**{k: float(v) for k, v in p.items()})
    return ExplicitRepresentation(_floats(p["knots"]), _floats(p["beta"]), _floats(p["gamma"]))


# --------------------------------------------------------------------------
# Matuszewska indices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexEstimate:
    s_lo: float
    s_hi: float
    t_range: tuple[float, float]
    lambda_range: tuple[float, float]
    residual: float


def _default_lambda_grid(t_max: float) -> np.ndarray:
    return np.geomspace(max(2.0, t_max ** 0.125), t_max ** 0.25, 10)


def _fit_slope(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope (with intercept) and the max absolute residual."""
    if x.size == 1:
        slope = float(y[0] / x[0])
        return slope, 0.0
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(coef[0]), float(np.max(np.abs(A @ coef - y)))


def estimate_indices(
    alpha: ORFunction,
    t_max: float = 1e6,
    lambda_grid=None,
    t_grid_size: int = 2048,
) -> IndexEstimate:
    """Estimate the lower and upper Matuszewska indices of ``alpha``.

    For each ``lam`` the extremal log-ratios ``max_t`` and ``min_t`` of
    ``log alpha(lam*t) - log alpha(t)`` are taken over a log-spaced grid of
    ``t`` in ``[1, t_max/lam]``; the indices are the least-squares slopes of
    these envelopes against ``log lam``.  The default grid is ten log-spaced
    values in ``[max(2, t_max**0.125), t_max**0.25]``; starting away from
    ``lam = 2`` damps the bias from slowly varying factors.

    The two slopes are fitted separately.  When the window of ``lam`` is long
    compared with the scale on which ``gamma`` oscillates, both envelopes
    approach the mean rate and the estimates may even cross; pass a short
    explicit ``lambda_grid`` for such weights.
    """
    if t_max < 100:
        raise ValueError("t_max must be at least 100")
    lam = _default_lambda_grid(t_max) if lambda_grid is None else np.asarray(lambda_grid, dtype=float)
    lam = np.atleast_1d(lam)
    if lam.size == 0 or t_grid_size < 1:
        raise ValueError("lambda_grid and the t grid must be nonempty")
    if np.any(lam <= 1) or np.any(lam > math.sqrt(t_max) * (1 + 1e-12)):
        raise ValueError("lambda_grid values must lie in (1, sqrt(t_max)]")

    log_tmax = math.log(t_max)
    hi = np.empty(lam.size)
    lo = np.empty(lam.size)
    for i, lm in enumerate(lam):
        log_lam = math.log(lm)
        t = np.exp(np.linspace(0.0, log_tmax - log_lam, t_grid_size))
        d = alpha.log(np.minimum(lm * t, t_max)) - alpha.log(t)
        hi[i] = d.max()
        lo[i] = d.min()

    x = np.log(lam)
    s_hi, res_hi = _fit_slope(x, hi)
    s_lo, res_lo = _fit_slope(x, lo)
    return IndexEstimate(
        s_lo=s_lo,
        s_hi=s_hi,
        t_range=(1.0, float(t_max)),
        lambda_range=(float(lam.min()), float(lam.max())),
        residual=max(res_hi, res_lo),
    )


@dataclass(frozen=True)
class ORBoundCheck:
    holds: bool
    violation: dict | None = None

    def __bool__(self) -> bool:
        return self.holds


def check_or_bounds(
    alpha: ORFunction,
    s0: float,
    c0: float,
    s1: float,
    c1: float,
    t_max: float = 1e5,
    grid_size: int = 64,
) -> ORBoundCheck:
    """Scan ``c0*lam**s0 <= alpha(lam*t)/alpha(t) <= c1*lam**s1`` on a log grid.

    Pairs are visited with ``lam`` ascending in the outer loop, so the first
    reported violation is at the smallest offending ``lam``.
    """
    if not (c0 > 0 and c1 > 0):
        raise ValueError("c0 and c1 must be positive")
    if s0 > s1:
        raise ValueError("s0 must not exceed s1")
    grid = np.geomspace(1.0, t_max, grid_size)
    for lm in grid:
        t = grid[grid * lm <= t_max * (1 + 1e-12)]
        if t.size == 0:
            continue
        log_ratio = alpha.log(np.minimum(lm * t, t_max)) - alpha.log(t)
        lower = math.log(c0) + s0 * math.log(lm)
        upper = math.log(c1) + s1 * math.log(lm)
        tol = 1e-12 * (1.0 + np.abs(log_ratio))
        bad = np.flatnonzero((log_ratio < lower - tol) | (log_ratio > upper + tol))
        if bad.size:
            k = bad[0]
            return ORBoundCheck(
                False,
                {
                    "t": float(t[k]),
                    "lambda": float(lm),
                    "ratio": float(np.exp(log_ratio[k])),
                    "lower": c0 * lm ** s0,
                    "upper": c1 * lm ** s1,
                },
            )
    return ORBoundCheck(True, None)


# --------------------------------------------------------------------------
# Embedding integral
# --------------------------------------------------------------------------

Verdict = Literal["Convergent", "Divergent", "Indeterminate"]
Method = Literal["IndexRule", "NumericTail", "ClosedForm"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
_WINDOW_RATIO_THRESHOLD = 0.95
_WINDOW_COUNT = 5


@dataclass(frozen=True)
class EmbeddingVerdict:
    verdict: Verdict
    partial_integral: float
    method: Method


def _window_integrals(alpha: ORFunction, ell: int, n: int, t_max: float) -> np.ndarray:
    """Integrals of ``t**(2 ell + n - 1) / alpha(t)**2`` over ``[2**k, 2**(k+1)]``
    for every dyadic window inside ``[1, t_max]``, then the leftover piece."""
    power = 2 * ell + n
    edges = [0.0]
    k_max = int(math.floor(math.log2(t_max)))
    edges += [k * math.log(2.0) for k in range(1, k_max + 1)]
    if math.log(t_max) > edges[-1] + 1e-12:
        edges.append(math.log(t_max))
    edges = np.array(edges)
    a, b = edges[:-1, None], edges[1:, None]
    # integrate in u = log t so the integrand is exp(power*u - 2 log alpha)
    u = 0.5 * (b - a) * _GL_NODES[None, :] + 0.5 * (a + b)
    vals = np.exp(power * u - 2.0 * alpha.log(np.exp(u)))
    return 0.5 * (b[:, 0] - a[:, 0]) * (vals @ _GL_WEIGHTS)


def _powerlog_closed_form(alpha: PowerLog, ell: int, n: int) -> Verdict:
    crit = ell + n / 2
    if not math.isclose(alpha.s, crit, rel_tol=0.0, abs_tol=1e-12):
        return "Convergent" if alpha.s > crit else "Divergent"
    # dt / (t L1**b1 L2**b2 ...): the first exponent differing from 1 decides
    for e in alpha.logexp[: alpha.depth]:
        b = 2.0 * e
        if not math.isclose(b, 1.0, rel_tol=0.0, abs_tol=1e-12):
            return "Convergent" if b > 1.0 else "Divergent"
    return "Divergent"


def classify_embedding(
    alpha: ORFunction, ell: int, n: int, t_max: float = 1e12
) -> EmbeddingVerdict:
    """Decide whether ``int_1^inf t**(2 ell + n - 1) / alpha(t)**2 dt`` is finite.

    PowerLog weights are decided in closed form.  Otherwise estimated indices
    settle clear cases (``s_lo > ell + n/2`` or ``s_hi < ell + n/2``); the
    remaining cases fall back on the ratio of consecutive dyadic window
    contributions over the last five windows.
    """
    if t_max < 1e3:
        raise ValueError("t_max must be at least 1e3")
    if ell < 0 or n < 1:
        raise ValueError("need ell >= 0 and n >= 1")
    windows = _window_integrals(alpha, ell, n, t_max)
    partial = float(np.sum(windows))

    if isinstance(alpha, PowerLog):
        return EmbeddingVerdict(_powerlog_closed_form(alpha, ell, n), partial, "ClosedForm")

    crit = ell + n / 2
    est = estimate_indices(alpha, t_max=t_max)
    if est.s_lo > crit:
        return EmbeddingVerdict("Convergent", partial, "IndexRule")
    if est.s_hi < crit:
        return EmbeddingVerdict("Divergent", partial, "IndexRule")

    full = windows[: int(math.floor(math.log2(t_max)))]
    ratios = full[1:] / full[:-1]
    tail = ratios[-_WINDOW_COUNT:]
    if np.all(tail < _WINDOW_RATIO_THRESHOLD):
        verdict: Verdict = "Convergent"
    elif np.all(tail >= 1.0):
        verdict = "Divergent"
    else:
        verdict = "Indeterminate"
    return EmbeddingVerdict(verdict, partial, "NumericTail")


# --------------------------------------------------------------------------
# Decay weight
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayWeight:
    """``h(t) = numerator(t) / alpha(t)`` together with its sampled shape check.

    ``monotone`` is true iff ``h`` is nonincreasing on 4096 log-spaced points
    of ``[1, t_max]`` and ``h(t_max) < h(1) / 10``.
    """

    numerator: ORFunction
    alpha: ORFunction
    t_max: float
    monotone: bool

    def log(self, t):
        return self.numerator.log(t) - self.alpha.log(t)

    def __call__(self, t):
        return np.exp(self.log(t))


def _sampled_decay_flag(log_h: Callable, t_max: float, samples: int = 4096) -> bool:
    t = np.exp(np.linspace(0.0, math.log(t_max), samples))
    lh = log_h(t)
    nonincreasing = bool(np.all(np.diff(lh) <= 1e-12 * np.maximum(1.0, np.abs(lh[1:]))))
    vanishing = bool(lh[-1] < lh[0] - math.log(10.0))
    return nonincreasing and vanishing


def _weight(numerator: ORFunction, alpha: ORFunction, t_max: float) -> DecayWeight:
    h = DecayWeight(numerator, alpha, t_max, False)
    object.__setattr__(h, "monotone", _sampled_decay_flag(h.log, t_max))
    return h


def decay_weight_h(
    alpha: ORFunction, ell: int, n: int, p: float, t_max: float = 1e300
) -> DecayWeight:
    """``h(t) = t**(ell + n/2 - n/p) / alpha(t)``, the rate in the L_p bound.

    ``t_max`` defaults to 1e300 because logarithmic rates need an enormous
    range before ``h`` drops by a factor of ten.
    """
    if not p > 2:
        raise ValueError("the mean-convergence rate needs p > 2")
    return _weight(PowerLog(ell + n / 2 - n / p), alpha, t_max)


def ratio_weight(alpha: ORFunction, beta: ORFunction, t_max: float = 1e300) -> DecayWeight:
    """``h = beta / alpha`` for a factorisation ``alpha = beta / h``."""
    return _weight(beta, alpha, t_max)
