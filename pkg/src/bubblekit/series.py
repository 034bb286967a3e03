"""Discrete-time pricing identities: deflators, decomposition, transversality.

Given a sampled price/dividend path with a declared tail model, this module
derives the implied state-price deflators from the no-arbitrage recursion

    q_t * P_t = q_{t+1} * (P_{t+1} + D_{t+1}),    q_0 = 1,

splits the date-0 price into fundamental value (present value of dividends)
plus bubble component (the limit of the deflated price), and checks the
transversality condition.  Deflators are stored and accumulated in the log
domain so horizons up to 10^6 periods neither underflow nor overflow.

All objects are immutable and all operations are pure functions; paths and
results can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .characterization import Classification, Verdict, montrucchio_discrete
from .errors import (
    EmptyEnsembleError,
    HorizonMismatchError,
    InconsistentClassificationError,
    OutOfRangeError,
    TailUnsupportedError,
    ValidationError,
    ZeroDenominatorError,
    ZeroInitialPriceError,
)
from .numerics import compensated_cumsum, compensated_sum, safe_log
from .tails import (
    ConstantLevels,
    DeclaredConvergent,
    GeometricYield,
    PowerYield,
    TailClass,
    TailModel,
    ZeroDividends,
    classify_tail,
    geometric_tail_log_sum,
    power_tail_log_sum,
)

__all__ = [
    "EPS_BUBBLE",
    "DEFAULT_TOL",
    "DiscretePath",
    "Deflators",
    "Decomposition",
    "implied_deflators",
    "no_arbitrage_residuals",
    "check_no_arbitrage",
    "partial_value",
    "fundamental_value",
    "bubble_component",
    "tvc_holds",
    "decompose",
    "ensemble_decompose",
    "reroot",
]

# bubble threshold, relative to P_0: |B_0| at or below this resolves to
# no-bubble (with a boundary flag); chosen well above accumulated rounding
EPS_BUBBLE = 1e-9

# default relative tolerance for the no-arbitrage recursion check
DEFAULT_TOL = 1e-9


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DiscretePath:
    """Sampled price/dividend path under the ex-dividend convention.

    ``prices`` holds P_0..P_T; ``dividends`` holds D_1..D_T (no dividend
    at t = 0).  A length-(T+1) dividends array with a leading zero is also
    accepted.  ``tail`` declares how the dividend yield behaves beyond the
    sampled horizon; operations that need it refuse to run when it is
    missing.
    """

    prices: np.ndarray
    dividends: np.ndarray
    tail: TailModel | None = None

    def __post_init__(self):
        prices = _frozen_array(self.prices, "prices")
        if prices.size < 2:
            raise ValidationError("path needs at least two price samples (T_max >= 1)")
        dividends = np.asarray(self.dividends, dtype=np.float64)
        if dividends.ndim != 1:
            raise ValidationError("dividends must be one-dimensional")
        if dividends.size == prices.size - 1:
            dividends = np.concatenate(([0.0], dividends))
        elif dividends.size == prices.size:
            if dividends[0] != 0.0:
                raise ValidationError("no dividend at t = 0 (ex-dividend convention)")
            dividends = dividends.copy()
        else:
            raise ValidationError(
                f"dividends length {dividends.size} does not match "
                f"{prices.size} price samples (expect T_max or T_max + 1 entries)"
            )
        if not np.all(np.isfinite(prices)) or not np.all(np.isfinite(dividends)):
            raise ValidationError("prices and dividends must be finite")
        if np.any(prices < 0):
            raise ValidationError("negative price")
        if np.any(dividends < 0):
            raise ValidationError("negative dividend")
        if np.any(prices[1:] + dividends[1:] <= 0):
            t = int(np.nonzero(prices[1:] + dividends[1:] <= 0)[0][0]) + 1
            raise ValidationError(
                f"P_t + D_t must be positive for t >= 1 (violated at t = {t})"
            )
        dividends.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dividends", dividends)

    @property
    def horizon(self) -> int:
        """T_max: the last sampled date."""
        return self.prices.size - 1

    def with_tail(self, tail: TailModel | None) -> DiscretePath:
        """Copy of this path with a different (or cleared) declared tail."""
        return replace(self, tail=tail)


@dataclass(frozen=True)
class Deflators:
    """Implied state prices in the log domain, normalized to q_0 = 1.

    ``log_q[t]`` may be -inf when an interior zero price drives every
    later state price to zero; it is never NaN or +inf for a valid path.
    """

    log_q: np.ndarray

    def __post_init__(self):
        log_q = _frozen_array(self.log_q, "log_q")
        if log_q.size < 2:
            raise ValidationError("need deflators for at least t = 0, 1")
        if log_q[0] != 0.0:
            raise ValidationError("deflators must be normalized to q_0 = 1")
        if np.any(np.isnan(log_q)) or np.any(log_q == np.inf):
            raise ValidationError("log deflators must not be NaN or +inf")
        object.__setattr__(self, "log_q", log_q)

    @property
    def horizon(self) -> int:
        return self.log_q.size - 1

    @property
    def q(self) -> np.ndarray:
        """Linear-domain state prices (may underflow to 0 for display)."""
        return np.exp(self.log_q)


@dataclass(frozen=True)
class Decomposition:
    """price = fundamental + bubble, with verdict and diagnostics."""

    price: float
    fundamental: float
    bubble: float
    verdict: Classification
    diagnostics: Mapping[str, Any]


def _check_same_horizon(path: DiscretePath, deflators: Deflators) -> None:
    if path.horizon != deflators.horizon:
        raise HorizonMismatchError(
            f"path horizon {path.horizon} != deflator horizon {deflators.horizon}"
        )


def implied_deflators(path: DiscretePath) -> Deflators:
    """Deflators pinned by the no-arbitrage recursion, accumulated in logs.

    log q_{t+1} = log q_t + log(P_t / (P_{t+1} + D_{t+1})), with q_0 = 1.
    An interior zero price sends every later log q to -inf (those dates
    are worth nothing at date 0), which downstream sums handle as exact
    zero contributions.
    """
    prices = path.prices
    if prices[0] == 0.0:
        raise ZeroInitialPriceError("P_0 = 0: log deflators are undefined")
    denom = prices[1:] + path.dividends[1:]
    if np.any(denom == 0.0):
        t = int(np.nonzero(denom == 0.0)[0][0]) + 1
        raise ZeroDenominatorError(f"P_{t} + D_{t} = 0: recursion cannot advance")
    with np.errstate(divide="ignore"):
        increments = np.log(prices[:-1] / denom)
    log_q = np.concatenate(([0.0], compensated_cumsum(increments)))
    return Deflators(log_q)


def no_arbitrage_residuals(path: DiscretePath, deflators: Deflators) -> np.ndarray:
    """Per-step relative residuals of the no-arbitrage recursion.

    residual[t] = |q_{t+1}(P_{t+1}+D_{t+1}) - q_t P_t| / (q_t P_t),
    computed scale-free in the log domain so it stays meaningful where
    linear-domain deflators underflow.
    """
    _check_same_horizon(path, deflators)
    with np.errstate(divide="ignore"):
        lhs = deflators.log_q[:-1] + np.log(path.prices[:-1])
        rhs = deflators.log_q[1:] + np.log(path.prices[1:] + path.dividends[1:])
    # -inf on both sides means both values are exactly zero: no violation
    both_zero = np.isneginf(lhs) & np.isneginf(rhs)
    with np.errstate(invalid="ignore"):
        delta = rhs - lhs
        residuals = np.abs(np.expm1(delta))
    residuals[both_zero] = 0.0
    return residuals


def check_no_arbitrage(
    path: DiscretePath, deflators: Deflators, tol: float = DEFAULT_TOL
) -> bool:
    """True iff the recursion holds at every step within relative ``tol``."""
    return bool(np.all(no_arbitrage_residuals(path, deflators) <= tol))


def partial_value(path: DiscretePath, deflators: Deflators, T: int) -> float:
    """Present value of the first T dividends: sum_{t=1..T} q_t D_t.

    Terms are formed as exp(log q_t + log D_t) (immune to intermediate
    overflow, exact zeros for zero dividends) and combined with
    compensated summation.
    """
    _check_same_horizon(path, deflators)
    if not 1 <= T <= path.horizon:
        raise OutOfRangeError(f"T = {T} outside [1, {path.horizon}]")
    with np.errstate(divide="ignore"):
        log_terms = deflators.log_q[1 : T + 1] + np.log(path.dividends[1 : T + 1])
    return compensated_sum(np.exp(log_terms))


def _log_deflated_terminal(path: DiscretePath, deflators: Deflators) -> float:
    """log(q_T * P_T) at the sampled horizon (-inf when the value is 0)."""
    return float(deflators.log_q[-1]) + safe_log(float(path.prices[-1]))


def fundamental_value(path: DiscretePath, deflators: Deflators) -> float:
    """Present value of all dividends: sampled part plus declared tail.

    Divergent-yield tails certify a zero bubble, so the fundamental is
    P_0 exactly.  Convergent tails add their analytic remainder to the
    sampled present value:

    * zero tail dividends contribute nothing;
    * geometric / fast power decay leaves the deflated-price limit
      q_T P_T * exp(-sum of remaining log(1 + y_t)), and the fundamental
      is P_0 minus that limit;
    * a declared-convergent tail supplies its present value directly.
    """
    if path.tail is None:
        raise ValidationError(
            "path has no declared tail model; declare one before valuation"
        )
    _check_same_horizon(path, deflators)
    price0 = float(path.prices[0])
    if classify_tail(path.tail) is TailClass.DIVERGENT:
        return price0

    tail = path.tail
    horizon = path.horizon
    if isinstance(tail, (ZeroDividends, ConstantLevels)):
        # convergent ConstantLevels has zero tail dividend by classification
        return partial_value(path, deflators, horizon)
    if isinstance(tail, DeclaredConvergent):
        return partial_value(path, deflators, horizon) + tail.tail_sum
    if isinstance(tail, GeometricYield):
        decay = geometric_tail_log_sum(tail.coeff, tail.ratio, horizon + 1)
    elif isinstance(tail, PowerYield):
        decay = power_tail_log_sum(tail.coeff, tail.exponent, horizon + 1)
    else:
        raise TailUnsupportedError(
            f"no present-value rule for tail model {tail!r}"
        )
    limit = np.exp(_log_deflated_terminal(path, deflators) - decay)
    return max(price0 - float(limit), 0.0)


def bubble_component(path: DiscretePath, deflators: Deflators) -> float:
    """Bubble B_0 = lim q_T P_T, evaluated exactly as P_0 - fundamental."""
    return float(path.prices[0]) - fundamental_value(path, deflators)


def tvc_holds(path: DiscretePath, deflators: Deflators) -> bool:
    """Transversality condition: the deflated price limit vanishes.

    True iff the bubble component is zero within EPS_BUBBLE * P_0.
    """
    threshold = EPS_BUBBLE * float(path.prices[0])
    return bubble_component(path, deflators) <= threshold


def _checkpoints(horizon: int) -> tuple[int, ...]:
    picks = {max(1, horizon // 4), max(1, horizon // 2), horizon}
    return tuple(sorted(picks))


def decompose(path: DiscretePath) -> Decomposition:
    """Full decomposition with cross-checked verdict and diagnostics.

    Runs the deflator construction, the present-value split, and (when
    prices are strictly positive) the independent dividend-yield
    classifier; raises InconsistentClassificationError if the two routes
    disagree.  Ties at the verdict boundary resolve to no-bubble with a
    ``boundary`` diagnostic flag.
    """
    deflators = implied_deflators(path)
    price0 = float(path.prices[0])
    fundamental = fundamental_value(path, deflators)
    bubble = price0 - fundamental
    threshold = EPS_BUBBLE * price0

    if bubble < -threshold:
        raise ValidationError(
            "declared tail present value exceeds the price net of sampled "
            f"dividends (bubble = {bubble!r} < 0); the declaration is "
            "inconsistent with the path"
        )
    boundary = bubble != 0.0 and abs(bubble) <= threshold
    bubble = max(bubble, 0.0)
    verdict = (
        Classification.BUBBLE if bubble > threshold else Classification.NO_BUBBLE
    )

    classifier: Verdict | None = None
    if np.all(path.prices > 0):
        classifier = montrucchio_discrete(path)
        if classifier.classification is not verdict:
            raise InconsistentClassificationError(
                f"present-value route says {verdict.value} "
                f"(bubble = {bubble!r}, threshold = {threshold!r}) but the "
                f"yield criterion says {classifier.classification.value}: "
                f"{classifier.rationale}"
            )

    horizon = path.horizon
    partials = tuple(
        (T, partial_value(path, deflators, T)) for T in _checkpoints(horizon)
    )
    sampled_value = partials[-1][1]
    diagnostics: dict[str, Any] = {
        "partial_values": partials,
        "tail_contribution": fundamental - sampled_value,
        "deflated_terminal_price": float(
            np.exp(_log_deflated_terminal(path, deflators))
        ),
        "no_arbitrage_residual_max": float(
            np.max(no_arbitrage_residuals(path, deflators))
        ),
        "boundary": boundary,
        "classifier": None
        if classifier is None
        else {
            "classification": classifier.classification.value,
            "tail_class": classifier.tail_class.value,
            "partial_sum": classifier.partial_sum,
            "rationale": classifier.rationale,
        },
    }
    return Decomposition(
        price=price0,
        fundamental=fundamental,
        bubble=bubble,
        verdict=verdict,
        diagnostics=diagnostics,
    )


def ensemble_decompose(decompositions: Sequence[Decomposition]) -> Decomposition:
    """Aggregate decompositions across assets (e.g. firms) by summation.

    The aggregate bubble is the sum of member bubbles, so it is zero
    exactly when every member bubble is zero; the verdict threshold is
    EPS_BUBBLE relative to the aggregate price.
    """
    if not decompositions:
        raise EmptyEnsembleError("cannot aggregate an empty ensemble")
    price = compensated_sum(d.price for d in decompositions)
    fundamental = compensated_sum(d.fundamental for d in decompositions)
    bubble = compensated_sum(d.bubble for d in decompositions)
    threshold = EPS_BUBBLE * price
    verdict = (
        Classification.BUBBLE if bubble > threshold else Classification.NO_BUBBLE
    )
    diagnostics: dict[str, Any] = {
        "members": len(decompositions),
        "boundary": bubble != 0.0 and abs(bubble) <= threshold,
        "member_bubble_max": max(d.bubble for d in decompositions),
    }
    return Decomposition(price, fundamental, bubble, verdict, diagnostics)


def reroot(path: DiscretePath, t: int) -> DiscretePath:
    """Path re-rooted at date t, for decompositions at later dates.

    Prices and dividends from t onward are kept (the date-t dividend is
    dropped: it is the new ex-dividend date 0) and deflation restarts at
    q_t = 1, so decompose(reroot(path, t)) is the date-t decomposition.
    """
    if not 0 <= t < path.horizon:
        raise OutOfRangeError(f"re-root date {t} outside [0, {path.horizon - 1}]")
    return DiscretePath(
        prices=path.prices[t:],
        dividends=path.dividends[t + 1 :],
        tail=path.tail,
    )
