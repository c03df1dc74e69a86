"""
Cox proportional-hazards regression with an L1 penalty.

The smooth part is the Breslow negative log partial likelihood. The penalized
fit minimizes (1/n)·NLL(β) + λ·Σ|β_g| over the penalized coefficients with
cyclic coordinate descent along a decreasing λ path, and λ is picked by
cross-validated partial-likelihood deviance.
"""
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import ConfigError, ModelFileError, SurvivalDataError
from core.utils import dump_json_file, load_json_file

from .schemas import validate_model_file
from .tables import FeatureTable, SurvivalRecord, align, record_arrays

logger = logging.getLogger(__name__)

DEFAULT_N_LAMBDA = 30
DEFAULT_LAMBDA_RATIO = 0.01
DEFAULT_MAX_SWEEPS = 10_000
DEFAULT_TOLERANCE = 1e-7
MAX_HALVINGS = 40


class RiskSets:
    """Breslow risk-set bookkeeping for one cohort, subjects sorted by descending time"""

    def __init__(self, times, events):
        times = np.asarray(times, dtype=np.float64)
        events = np.asarray(events, dtype=bool)
        self.order = np.argsort(-times, kind='stable')
        self.times = times[self.order]
        self.events = events[self.order]
        self.n = len(times)
        self.n_events = int(self.events.sum())
        if self.n:
            ends = np.flatnonzero(np.r_[self.times[1:] != self.times[:-1], True])
            tie_end = ends[np.searchsorted(ends, np.arange(self.n))]
        else:
            tie_end = np.empty(0, dtype=np.intp)
        # last sorted index sharing each event's time: cumulative sums there cover its risk set
        self.event_ends = tie_end[self.events]

    def sort(self, X: np.ndarray) -> np.ndarray:
        return X[self.order]

    def _weights(self, eta):
        shift = eta.max()
        return np.exp(eta - shift), shift

    def log_likelihood(self, eta: np.ndarray) -> float:
        """Log partial likelihood for a sorted linear predictor"""
        if not self.n_events:
            return 0.0
        w, shift = self._weights(eta)
        log_s0 = np.log(np.cumsum(w)[self.event_ends]) + shift
        return float(eta[self.events].sum() - log_s0.sum())

    def gradient(self, X: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Score vector of the log partial likelihood; X sorted"""
        w, _ = self._weights(eta)
        s0 = np.cumsum(w)[self.event_ends]
        s1 = np.cumsum(w[:, None] * X, axis=0)[self.event_ends]
        return X[self.events].sum(axis=0) - (s1 / s0[:, None]).sum(axis=0)

    def information(self, X: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Observed information (negative Hessian of the log partial likelihood)"""
        w, _ = self._weights(eta)
        s0 = np.cumsum(w)[self.event_ends]
        s1 = np.cumsum(w[:, None] * X, axis=0)[self.event_ends]
        s2 = np.cumsum(w[:, None, None] * X[:, :, None] * X[:, None, :], axis=0)[self.event_ends]
        mean = s1 / s0[:, None]
        return (s2 / s0[:, None, None]).sum(axis=0) - mean.T @ mean


def cox_objective(beta, X, records: Sequence[SurvivalRecord]) -> Tuple[float, np.ndarray]:
    """
    Negative log partial likelihood (Breslow ties) and its gradient.

    Raises:
        SurvivalDataError: no events in the cohort
    """
    times, events = record_arrays(records)
    if not events.any():
        raise SurvivalDataError("all subjects are censored")
    risk_sets = RiskSets(times, events)
    X = risk_sets.sort(np.asarray(X, dtype=np.float64).reshape(len(records), -1))
    eta = X @ np.asarray(beta, dtype=np.float64)
    return -risk_sets.log_likelihood(eta), -risk_sets.gradient(X, eta)


@dataclass
class NewtonFit:
    beta: np.ndarray
    covariance: np.ndarray
    log_likelihood: float
    iterations: int
    converged: bool


def newton_cox(X, times, events, max_iter: int = 100, tol: float = 1e-12) -> NewtonFit:
    """Unpenalized Cox fit by Newton-Raphson with step halving"""
    risk_sets = RiskSets(times, events)
    if not risk_sets.n_events:
        raise SurvivalDataError("all subjects are censored")
    X = risk_sets.sort(np.asarray(X, dtype=np.float64).reshape(risk_sets.n, -1))
    beta = np.zeros(X.shape[1])
    ll = risk_sets.log_likelihood(X @ beta)
    converged = False
    iteration = 0
    for iteration in range(1, max_iter + 1):
        eta = X @ beta
        try:
            delta = np.linalg.solve(risk_sets.information(X, eta), risk_sets.gradient(X, eta))
        except np.linalg.LinAlgError as e:
            raise SurvivalDataError(f"singular information matrix: {e}") from e
        step = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = beta + step * delta
            candidate_ll = risk_sets.log_likelihood(X @ candidate)
            if candidate_ll >= ll - 1e-12:
                break
            step *= 0.5
        beta, ll = candidate, candidate_ll
        if np.max(np.abs(step * delta), initial=0.0) < tol:
            converged = True
            break
    if not converged:
        logger.warning(f"Newton-Raphson stopped after {max_iter} iterations without converging")
    information = risk_sets.information(X, X @ beta)
    try:
        covariance = np.linalg.inv(information)
    except np.linalg.LinAlgError as e:
        raise SurvivalDataError(f"singular information matrix: {e}") from e
    return NewtonFit(beta, covariance, ll, iteration, converged)


def soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


@dataclass
class DescentResult:
    beta: np.ndarray
    sweeps: int
    converged: bool
    history: List[float] = field(default_factory=list)


class CoordinateDescent:
    """
    Cyclic coordinate descent for (1/n)·NLL(β) + λ·Σ_{penalized}|β_g|.

    Each coordinate takes a soft-thresholded Newton step on its one-dimensional
    quadratic model, halved until the penalized objective does not increase.
    Sweeps alternate between the active set and full passes; the fit stops
    when a full pass moves no coefficient by more than tol.
    """

    def __init__(self, X, times, events, penalized: Optional[Sequence[bool]] = None,
                 max_sweeps: int = DEFAULT_MAX_SWEEPS, tol: float = DEFAULT_TOLERANCE):
        self.risk_sets = RiskSets(times, events)
        if not self.risk_sets.n_events:
            raise SurvivalDataError("all subjects are censored")
        self.X = self.risk_sets.sort(np.asarray(X, dtype=np.float64).reshape(self.risk_sets.n, -1))
        self.n, self.p = self.X.shape
        self.penalized = np.ones(self.p, dtype=bool) if penalized is None else np.asarray(penalized, dtype=bool)
        self.max_sweeps = max_sweeps
        self.tol = tol

    def log_likelihood(self, beta) -> float:
        return self.risk_sets.log_likelihood(self.X @ beta)

    def penalty(self, beta, lam: float) -> float:
        l1 = float(np.abs(beta[self.penalized]).sum())
        return lam * l1 if l1 > 0 else 0.0

    def objective(self, beta, lam: float) -> float:
        return -self.log_likelihood(beta) / self.n + self.penalty(beta, lam)

    def smooth_gradient(self, beta) -> np.ndarray:
        """Gradient of (1/n)·NLL"""
        return -self.risk_sets.gradient(self.X, self.X @ beta) / self.n

    def lambda_max(self, beta) -> float:
        """Smallest λ at which every penalized coefficient stays zero, given the unpenalized fit beta"""
        if not self.penalized.any():
            return 0.0
        return float(np.max(np.abs(self.smooth_gradient(beta)[self.penalized])))

    def _update(self, j: int, beta: np.ndarray, eta: np.ndarray, lam: float, value: float):
        rs = self.risk_sets
        xj = self.X[:, j]
        w = np.exp(eta - eta.max())
        s0 = np.cumsum(w)[rs.event_ends]
        mean = np.cumsum(w * xj)[rs.event_ends] / s0
        second = np.cumsum(w * xj * xj)[rs.event_ends] / s0
        grad = -(xj[rs.events].sum() - mean.sum()) / self.n
        hess = (second - mean * mean).sum() / self.n
        if hess <= 1e-15:
            return eta, value, 0.0
        old = beta[j]
        threshold = lam / hess if self.penalized[j] else 0.0
        new = soft_threshold(old - grad / hess, threshold)
        if new == old:
            return eta, value, 0.0
        step = new - old
        for _ in range(MAX_HALVINGS):
            candidate = old + step
            candidate_eta = eta + (candidate - old) * xj
            beta[j] = candidate
            candidate_value = -rs.log_likelihood(candidate_eta) / self.n + self.penalty(beta, lam)
            if candidate_value <= value:
                return candidate_eta, candidate_value, abs(candidate - old)
            step *= 0.5
        beta[j] = old
        return eta, value, 0.0

    def fit(self, lam: float, beta0: Optional[np.ndarray] = None) -> DescentResult:
        beta = np.zeros(self.p) if beta0 is None else np.array(beta0, dtype=np.float64)
        eta = self.X @ beta
        value = self.objective(beta, lam)
        history = [value]
        everything = np.arange(self.p)
        full_pass = True
        for sweep in range(1, self.max_sweeps + 1):
            if full_pass:
                coords = everything
            else:
                coords = np.flatnonzero((beta != 0) | ~self.penalized)
            max_change = 0.0
            for j in coords:
                eta, value, change = self._update(int(j), beta, eta, lam, value)
                max_change = max(max_change, change)
            history.append(value)
            logger.debug(f"lambda={lam:.3g} sweep={sweep} objective={value:.12g} max_change={max_change:.3g}")
            if max_change < self.tol:
                if full_pass:
                    return DescentResult(beta, sweep, True, history)
                full_pass = True
            else:
                full_pass = False
        logger.warning(f"coordinate descent hit {self.max_sweeps} sweeps at lambda={lam:.3g}")
        return DescentResult(beta, self.max_sweeps, False, history)

    def path(self, lambdas: Sequence[float], beta0: Optional[np.ndarray] = None) -> List[DescentResult]:
        """Warm-started fits along lambdas (expected in decreasing order)"""
        results = []
        beta = beta0
        for lam in lambdas:
            result = self.fit(lam, beta)
            results.append(result)
            beta = result.beta
        return results


def lambda_path(lambda_max: float, n_lambda: int = DEFAULT_N_LAMBDA,
                ratio: float = DEFAULT_LAMBDA_RATIO) -> np.ndarray:
    """Log-spaced grid from lambda_max down to lambda_max·ratio"""
    if n_lambda < 1 or not 0 < ratio < 1:
        raise ConfigError(f"invalid lambda path: n_lambda={n_lambda}, ratio={ratio}")
    if lambda_max <= 0:
        return np.zeros(1)
    return np.geomspace(lambda_max, lambda_max * ratio, n_lambda)


def stratified_folds(events, k: int, seed: int) -> np.ndarray:
    """Fold index per subject; events and censored subjects are dealt round-robin after a seeded shuffle"""
    events = np.asarray(events, dtype=bool)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(events), dtype=np.intp)
    offset = 0
    for group in (np.flatnonzero(events), np.flatnonzero(~events)):
        shuffled = rng.permutation(group)
        folds[shuffled] = (np.arange(len(shuffled)) + offset) % k
        offset += len(shuffled)
    return folds


@dataclass
class Standardization:
    names: List[str]
    median: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, table: FeatureTable) -> Tuple['Standardization', List[str]]:
        """Training medians and z-score parameters; returns the kept columns and the dropped names"""
        values = table.values
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            median = np.nanmedian(values, axis=0)
        keep, dropped = [], []
        for j, name in enumerate(table.names):
            column = np.where(np.isnan(values[:, j]), median[j], values[:, j])
            if np.isnan(median[j]) or np.ptp(column) == 0:
                dropped.append(name)
            else:
                keep.append(j)
        filled = np.where(np.isnan(values[:, keep]), median[keep], values[:, keep])
        return cls(
            [table.names[j] for j in keep],
            median[keep],
            filled.mean(axis=0),
            filled.std(axis=0),
        ), dropped

    def transform(self, table: FeatureTable) -> np.ndarray:
        values = table.select(self.names).values
        values = np.where(np.isnan(values), self.median, values)
        return (values - self.mean) / self.std


@dataclass
class SelectedFeature:
    name: str
    coef: float
    mean: float
    std: float
    median: float
    penalized: bool = True

    @property
    def original_coef(self) -> float:
        """Coefficient per raw feature unit"""
        return self.coef / self.std


@dataclass
class CvCurve:
    lambdas: np.ndarray
    deviance: np.ndarray
    chosen: int


@dataclass
class CoxModel:
    """
    Fitted risk model: Risc = Σ coef_g · (x_g − mean_g) / std_g.

    coef is on the standardized scale; missing inputs are replaced by the
    training median before standardizing.
    """
    selected: List[SelectedFeature]
    lambda_: float
    threshold: Optional[float] = None
    seed: int = 0
    family: str = 'rdepth'
    cv: Optional[CvCurve] = None

    def __post_init__(self):
        for f in self.selected:
            if not (math.isfinite(f.coef) and f.std > 0):
                raise ModelFileError(f"invalid coefficient or scale for {f.name}")

    @property
    def names(self) -> List[str]:
        return [f.name for f in self.selected]

    @property
    def is_empty(self) -> bool:
        return not self.selected

    def to_dict(self) -> Dict:
        return {
            'features': [
                {'name': f.name, 'coef': f.coef, 'mean': f.mean, 'std': f.std,
                 'median': f.median, 'penalized': f.penalized}
                for f in self.selected
            ],
            'lambda': self.lambda_,
            'threshold': self.threshold,
            'seed': self.seed,
            'family': self.family,
        }

    @classmethod
    def from_dict(cls, data) -> 'CoxModel':
        if not isinstance(data, dict):
            raise ModelFileError("model file must hold a JSON object")
        is_valid, validated, error = validate_model_file(data)
        if not is_valid:
            raise ModelFileError(f"invalid model file: {error}")
        return cls(
            [SelectedFeature(**f.model_dump()) for f in validated.features],
            validated.lambda_,
            validated.threshold,
            validated.seed,
            validated.family,
        )

    def save(self, path) -> None:
        dump_json_file(self.to_dict(), Path(path))

    @classmethod
    def load(cls, path) -> 'CoxModel':
        try:
            data = load_json_file(path)
        except ConfigError as e:
            raise ModelFileError(str(e)) from e
        return cls.from_dict(data)


def _cross_validate(Z, times, events, penalized, lambdas, folds, seed, max_sweeps, tol) -> CvCurve:
    """Verweij-van Houwelingen cross-validated deviance over the λ grid"""
    fold_of = stratified_folds(events, folds, seed)
    full = CoordinateDescent(Z, times, events, penalized, max_sweeps, tol)
    cvl = np.zeros(len(lambdas))
    for k in range(folds):
        train = fold_of != k
        solver = CoordinateDescent(Z[train], times[train], events[train], penalized, max_sweeps, tol)
        for i, result in enumerate(solver.path(lambdas)):
            cvl[i] += full.log_likelihood(result.beta) - solver.log_likelihood(result.beta)
    deviance = -2.0 * cvl
    chosen = int(np.argmin(deviance))
    return CvCurve(np.asarray(lambdas), deviance, chosen)


def fit_lasso_cox(table: FeatureTable, records: Sequence[SurvivalRecord],
                  lambda_grid: Optional[Sequence[float]] = None, folds: int = 5, seed: int = 0,
                  unpenalized: Sequence[str] = (), n_lambda: int = DEFAULT_N_LAMBDA,
                  lambda_ratio: float = DEFAULT_LAMBDA_RATIO, max_sweeps: int = DEFAULT_MAX_SWEEPS,
                  tol: float = DEFAULT_TOLERANCE, family: str = 'rdepth') -> CoxModel:
    """
    Fit a LASSO-penalized Cox model.

    Features are median-imputed and z-scored on the training rows; constant
    columns are dropped. Without lambda_grid a log-spaced path from λ_max is
    used. A grid with a single value is fitted directly, otherwise λ is chosen
    by k-fold cross-validated deviance (folds stratified by event, seeded).

    Raises:
        SurvivalDataError: fewer than 2 events or no usable feature columns
        ConfigError: bad fold count or lambda grid
    """
    table, records = align(table, records, min_subjects=2)
    times, events = record_arrays(records)
    if events.sum() < 2:
        raise SurvivalDataError(f"need at least 2 events, found {int(events.sum())}")
    unknown = [u for u in unpenalized if u not in table.names]
    if unknown:
        raise ConfigError(f"unpenalized columns not in table: {unknown}")

    standardization, dropped = Standardization.fit(table)
    for name in dropped:
        logger.warning(f"dropping constant feature {name}")
    if not standardization.names:
        raise SurvivalDataError("no non-constant feature columns to fit")
    Z = standardization.transform(table)
    penalized = np.array([name not in unpenalized for name in standardization.names])
    solver = CoordinateDescent(Z, times, events, penalized, max_sweeps, tol)

    start = solver.fit(math.inf).beta if (~penalized).any() else np.zeros(len(penalized))
    if lambda_grid is None:
        lambdas = lambda_path(solver.lambda_max(start), n_lambda, lambda_ratio)
    else:
        lambdas = np.sort(np.asarray(lambda_grid, dtype=np.float64))[::-1]
        if lambdas.size == 0 or np.isnan(lambdas).any() or (lambdas < 0).any():
            raise ConfigError(f"lambda grid must hold non-negative values, got {list(lambda_grid)}")

    cv = None
    if len(lambdas) > 1:
        if not 2 <= folds <= len(records):
            raise ConfigError(f"folds must be between 2 and {len(records)}, got {folds}")
        cv = _cross_validate(Z, times, events, penalized, lambdas, folds, seed, max_sweeps, tol)
        chosen = cv.chosen
    else:
        chosen = 0
    lam = float(lambdas[chosen])
    logger.info(f"lambda={lam:.6g} chosen from {len(lambdas)} candidates")

    beta = solver.path(lambdas[:chosen + 1], start)[-1].beta
    selected = [
        SelectedFeature(name, float(beta[j]), float(standardization.mean[j]), float(standardization.std[j]),
                        float(standardization.median[j]), bool(penalized[j]))
        for j, name in enumerate(standardization.names) if beta[j] != 0
    ]
    logger.info(f"{len(selected)} of {len(standardization.names)} features selected")
    return CoxModel(selected, lam, seed=seed, family=family, cv=cv)


def risk_score(model: CoxModel, features: Mapping[str, float]) -> float:
    """
    Σ coef_g · standardized feature value; missing values take the training median

    Raises:
        ModelFileError: a model feature is absent from the input
    """
    total = 0.0
    for f in model.selected:
        if f.name not in features:
            raise ModelFileError(f"model feature {f.name!r} not present in input features")
        value = features[f.name]
        if value is None or math.isnan(value):
            value = f.median
        total += f.coef * (value - f.mean) / f.std
    return total


def risk_scores(model: CoxModel, table: FeatureTable) -> np.ndarray:
    """risk_score for every row of a table"""
    if model.is_empty:
        return np.zeros(len(table.subjects))
    missing = [n for n in model.names if n not in table.names]
    if missing:
        raise ModelFileError(f"model features not present in table: {missing[:5]}")
    values = table.select(model.names).values
    median = np.array([f.median for f in model.selected])
    mean = np.array([f.mean for f in model.selected])
    std = np.array([f.std for f in model.selected])
    coef = np.array([f.coef for f in model.selected])
    values = np.where(np.isnan(values), median, values)
    return ((values - mean) / std) @ coef
