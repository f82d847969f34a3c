"""Online one-step-ahead utilization forecasting with uncertainty.

Three predictor kinds share a streaming facade:
  oracle -- returns the true next-tick usage with zero variance
  gp     -- GP regression over history-pattern inputs with an exponential
            or squared-exponential kernel, limited to the N latest patterns
  ari    -- pure autoregressive model with optional first differencing,
            order selected by AIC, fitted by ordinary least squares

Each stream models one component's one resource dimension. Values are
normalized by the component's reservation before modeling and denormalized
on the way out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Hyperparameter grid for GP evidence maximization (on normalized data).
GP_SIGNAL_GRID = (0.05, 0.25, 1.0)
GP_LENGTH_GRID = (0.1, 0.5, 2.0, 8.0)
GP_NOISE_GRID = (1e-4, 1e-2, 1e-1)
GP_RESELECT_EVERY = 30

ARI_MAX_P = 3
ARI_WINDOW = 120
ARI_MIN_OBS = 5
VARIANCE_FLOOR = 1e-12

JITTER_START = 1e-8
JITTER_LIMIT = 1e-2


class SingularKernelError(Exception):
    """Kernel system stayed singular after jitter escalation."""


@dataclass(frozen=True)
class PredictiveDistribution:
    mean: float
    variance: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "variance", float(self.variance))
        if not (math.isfinite(self.mean) and math.isfinite(self.variance)):
            raise ValueError("mean and variance must be finite")
        if self.variance < 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)


# --- kernels ------------------------------------------------------------------

def kernel_eval(kind: str, a, b, signal_variance: float, lengthscale: float) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"pattern dimension mismatch: {a.shape} vs {b.shape}")
    d = float(np.linalg.norm(a - b))
    if kind == "exponential":
        return signal_variance * math.exp(-d / lengthscale)
    if kind == "rbf":
        return signal_variance * math.exp(-(d * d) / (2 * lengthscale ** 2))
    raise ValueError(f"unknown kernel kind {kind!r}")


def _kernel_matrix(kind: str, A: np.ndarray, B: np.ndarray,
                   signal_variance: float, lengthscale: float) -> np.ndarray:
    d2 = np.maximum(
        (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T, 0.0
    )
    if kind == "exponential":
        return signal_variance * np.exp(-np.sqrt(d2) / lengthscale)
    if kind == "rbf":
        return signal_variance * np.exp(-d2 / (2 * lengthscale ** 2))
    raise ValueError(f"unknown kernel kind {kind!r}")


def _solve_with_jitter(K: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Cholesky solve of K x = rhs with escalating jitter on the diagonal."""
    n = K.shape[0]
    trace = float(np.trace(K))
    scale = trace if trace > 0 else 1.0
    jitter = 0.0
    while True:
        try:
            L = np.linalg.cholesky(K + jitter * scale * np.eye(n))
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10
            if jitter > JITTER_LIMIT:
                raise SingularKernelError(
                    "kernel matrix singular after jitter escalation "
                    "(degenerate duplicated patterns?)"
                )
            continue
        y = np.linalg.solve(L, rhs)
        return np.linalg.solve(L.T, y)


# --- GP model -----------------------------------------------------------------

@dataclass
class GPModel:
    """A fitted window of history patterns and targets with kernel params.

    Pattern rows are [x_t, y_{t-h}, ..., y_{t-1}] of length h+1, where x_t is
    the recorded time normalized to [0, 1] over the retained window.
    """

    h: int
    n_max: int
    kernel: str
    signal_variance: float
    lengthscale: float
    noise_variance: float
    X: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))
    y: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        for name, v in (("signal_variance", self.signal_variance),
                        ("lengthscale", self.lengthscale),
                        ("noise_variance", self.noise_variance)):
            if v <= 0:
                raise ValueError(f"{name} must be > 0, got {v}")


def gp_posterior(model: GPModel, query: np.ndarray) -> PredictiveDistribution:
    """Posterior mean and variance at one query pattern."""
    X, y = model.X, model.y
    if X.shape[0] < 1:
        raise ValueError("gp_posterior requires at least one retained pattern")
    query = np.asarray(query, dtype=float)
    if query.shape != (X.shape[1],):
        raise ValueError(f"query length {query.shape} != pattern length "
                         f"{(X.shape[1],)}")
    K = _kernel_matrix(model.kernel, X, X, model.signal_variance,
                       model.lengthscale)
    K[np.diag_indices_from(K)] += model.noise_variance
    kx = _kernel_matrix(model.kernel, query[None, :], X,
                        model.signal_variance, model.lengthscale)[0]
    sol = _solve_with_jitter(K, np.column_stack([y, kx]))
    mean = float(kx @ sol[:, 0])
    variance = model.signal_variance - float(kx @ sol[:, 1])
    variance = min(max(variance, 0.0), model.signal_variance)
    return PredictiveDistribution(mean=mean, variance=variance)


def gp_log_marginal_likelihood(X: np.ndarray, y: np.ndarray, kernel: str,
                               signal_variance: float, lengthscale: float,
                               noise_variance: float) -> float:
    n = X.shape[0]
    K = _kernel_matrix(kernel, X, X, signal_variance, lengthscale)
    K[np.diag_indices_from(K)] += noise_variance
    trace = float(np.trace(K))
    jitter = 0.0
    while True:
        try:
            L = np.linalg.cholesky(K + jitter * trace * np.eye(n))
            break
        except np.linalg.LinAlgError:
            jitter = JITTER_START if jitter == 0.0 else jitter * 10
            if jitter > JITTER_LIMIT:
                raise SingularKernelError("LML: kernel matrix singular")
    alpha = np.linalg.solve(L.T, np.linalg.solve(L, y))
    logdet = 2.0 * float(np.log(np.diag(L)).sum())
    return float(-0.5 * y @ alpha - 0.5 * logdet - 0.5 * n * math.log(2 * math.pi))


GP_GRID = tuple((sf2, ls, nv)
                for sf2 in GP_SIGNAL_GRID
                for ls in GP_LENGTH_GRID
                for nv in GP_NOISE_GRID)


def _grid_lmls(X: np.ndarray, y: np.ndarray, kernel: str) -> np.ndarray:
    """Log marginal likelihood at every grid point, -inf where singular.

    Fast path evaluates the whole grid with one stacked jitter-free Cholesky;
    if any grid point needs jitter escalation it falls back to the per-point
    routine for all points (rare in practice).
    """
    n = X.shape[0]
    d2 = np.maximum(
        (X * X).sum(1)[:, None] + (X * X).sum(1)[None, :] - 2.0 * X @ X.T, 0.0
    )
    Ks = np.empty((len(GP_GRID), n, n))
    for i, (sf2, ls, nv) in enumerate(GP_GRID):
        if kernel == "exponential":
            K = sf2 * np.exp(-np.sqrt(d2) / ls)
        else:
            K = sf2 * np.exp(-d2 / (2 * ls ** 2))
        K[np.diag_indices(n)] += nv
        Ks[i] = K
    try:
        L = np.linalg.cholesky(Ks)
    except np.linalg.LinAlgError:
        lmls = np.full(len(GP_GRID), -np.inf)
        for i, (sf2, ls, nv) in enumerate(GP_GRID):
            try:
                lmls[i] = gp_log_marginal_likelihood(X, y, kernel, sf2, ls, nv)
            except SingularKernelError:
                pass
        return lmls
    alpha = np.linalg.solve(
        np.transpose(L, (0, 2, 1)), np.linalg.solve(L, np.broadcast_to(
            y[:, None], (len(GP_GRID), n, 1)).copy())
    )[:, :, 0]
    logdet = 2.0 * np.log(np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)
    return (-0.5 * (alpha @ y) - 0.5 * logdet
            - 0.5 * n * math.log(2 * math.pi))


def gp_select_hyperparams(X: np.ndarray, y: np.ndarray,
                          kernel: str) -> tuple[float, float, float]:
    """Grid-search evidence maximization; ties keep the first grid point."""
    if X.shape[0] < 2:
        raise ValueError("hyperparameter selection needs >= 2 observations")
    lmls = np.nan_to_num(_grid_lmls(X, y, kernel), nan=-np.inf)
    if not np.any(np.isfinite(lmls)):
        raise SingularKernelError("all hyperparameter grid points singular")
    return GP_GRID[int(np.argmax(lmls))]


# --- ARI model ----------------------------------------------------------------

@dataclass(frozen=True)
class ARModel:
    p: int
    d: int
    coefficients: tuple[float, ...]
    intercept: float
    residual_variance: float
    fitted_on: int

    def __post_init__(self) -> None:
        if not 0 <= self.p <= ARI_MAX_P:
            raise ValueError(f"p must be in [0, {ARI_MAX_P}]")
        if self.d not in (0, 1):
            raise ValueError("d must be 0 or 1")
        if len(self.coefficients) != self.p:
            raise ValueError("need exactly p coefficients")
        if self.residual_variance < 0:
            raise ValueError("residual_variance must be >= 0")


def _ols_ar(z: np.ndarray, p: int) -> tuple[np.ndarray, float, int] | None:
    """OLS fit of AR(p) with intercept on series z; None if degenerate."""
    n_eff = len(z) - p
    if n_eff < p + 2:
        return None
    ycol = z[p:]
    cols = [np.ones(n_eff)]
    for i in range(1, p + 1):
        cols.append(z[p - i:len(z) - i])
    A = np.column_stack(cols)
    coef, _, rank, _ = np.linalg.lstsq(A, ycol, rcond=None)
    if rank < A.shape[1]:
        return None
    resid = ycol - A @ coef
    sse = float(resid @ resid)
    return coef, sse, n_eff


def ari_fit(series) -> ARModel:
    """Fit AR(p) on the d-times-differenced series for every (p, d) in the
    grid {0..3} x {0, 1} and return the minimum-AIC model.

    AIC = n_eff * ln(sigma2_hat) + 2(p + d + 1), with sigma2_hat = SSE/n_eff.
    Ties keep the earlier candidate in (p asc, d asc) order.
    """
    y = np.asarray(series, dtype=float)
    if len(y) < ARI_MIN_OBS:
        raise ValueError(f"series too short: {len(y)} < {ARI_MIN_OBS}")
    best: ARModel | None = None
    best_aic = math.inf
    for p in range(ARI_MAX_P + 1):
        for d in (0, 1):
            z = np.diff(y, n=d) if d else y
            fit = _ols_ar(z, p)
            if fit is None:
                continue
            coef, sse, n_eff = fit
            sigma2 = max(sse / n_eff, VARIANCE_FLOOR)
            aic = n_eff * math.log(sigma2) + 2 * (p + d + 1)
            if aic < best_aic:
                best_aic = aic
                resvar = max(sse / max(n_eff - p - 1, 1), VARIANCE_FLOOR)
                best = ARModel(
                    p=p, d=d, coefficients=tuple(float(c) for c in coef[1:]),
                    intercept=float(coef[0]), residual_variance=resvar,
                    fitted_on=len(y),
                )
    if best is None:
        # Constant / degenerate series: mean model on the raw series.
        resvar = max(float(np.var(y, ddof=1)) if len(y) > 1 else 0.0,
                     VARIANCE_FLOOR)
        best = ARModel(p=0, d=0, coefficients=(), intercept=float(np.mean(y)),
                       residual_variance=resvar, fitted_on=len(y))
    return best


def ari_forecast(model: ARModel, history) -> PredictiveDistribution:
    """One-step-ahead forecast; variance is the residual variance (k = 1)."""
    y = np.asarray(history, dtype=float)
    need = model.p + model.d
    if len(y) < need:
        raise ValueError(f"need {need} trailing observations, got {len(y)}")
    z = np.diff(y, n=model.d) if model.d else y
    zhat = model.intercept
    for i, phi in enumerate(model.coefficients, start=1):
        zhat += phi * z[-i]
    mean = float(y[-1] + zhat) if model.d else float(zhat)
    return PredictiveDistribution(mean=mean, variance=model.residual_variance)


# --- streaming facade ---------------------------------------------------------

@dataclass(frozen=True)
class ForecasterKind:
    tag: str                      # oracle | gp | ari
    kernel: str = "exponential"   # gp only
    h: int = 10
    n_max: int = 10

    def __post_init__(self) -> None:
        if self.tag not in ("oracle", "gp", "ari"):
            raise ValueError(f"unknown forecaster tag {self.tag!r}")
        if self.kernel not in ("exponential", "rbf"):
            raise ValueError(f"unknown kernel {self.kernel!r}")


class Forecaster:
    """Streaming one-step-ahead predictor for one component-resource stream.

    Before warm-up (h+1 observations for gp, 5 for ari) predict() returns
    (reservation, 0): full reservation with no uncertainty, i.e. no shaping
    signal. The oracle kind reads the ground-truth series directly and is
    warm from the start.
    """

    def __init__(self, kind: ForecasterKind, reservation: float,
                 oracle_series=None) -> None:
        if reservation <= 0:
            raise ValueError("reservation must be > 0")
        self.kind = kind
        self.reservation = reservation
        self._times: list[int] = []
        self._values: list[float] = []       # normalized by reservation
        self._oracle_series = oracle_series  # sequence of raw values
        self._hyper: tuple[float, float, float] | None = None
        self._n_observed = 0
        if kind.tag == "oracle" and oracle_series is None:
            raise ValueError("oracle forecaster needs the ground-truth series")

    def observe(self, t: int, value: float) -> None:
        if self._times and t <= self._times[-1]:
            raise ValueError(
                f"non-monotone timestamp: {t} after {self._times[-1]}"
            )
        self._times.append(t)
        self._values.append(value / self.reservation)
        self._n_observed += 1
        limit = self.kind.h + self.kind.n_max
        if self.kind.tag == "gp" and len(self._values) > limit:
            del self._times[:-limit]
            del self._values[:-limit]
        elif self.kind.tag == "ari" and len(self._values) > ARI_WINDOW:
            del self._times[:-ARI_WINDOW]
            del self._values[:-ARI_WINDOW]

    def predict(self) -> PredictiveDistribution:
        if self.kind.tag == "oracle":
            idx = min(self._n_observed, len(self._oracle_series) - 1)
            return PredictiveDistribution(
                mean=float(self._oracle_series[idx]), variance=0.0
            )
        if self.kind.tag == "ari":
            if len(self._values) < ARI_MIN_OBS:
                return PredictiveDistribution(self.reservation, 0.0)
            model = ari_fit(self._values)
            pred = ari_forecast(model, self._values)
            return PredictiveDistribution(
                mean=pred.mean * self.reservation,
                variance=pred.variance * self.reservation ** 2,
            )
        # gp
        if len(self._values) < self.kind.h + 1:
            return PredictiveDistribution(self.reservation, 0.0)
        X, y, query = self._design()
        if self._reselect_due() and X.shape[0] >= 2:
            self._hyper = gp_select_hyperparams(X, y, self.kind.kernel)
        sf2, ls, nv = self._hyper if self._hyper else (0.25, 0.5, 1e-2)
        model = GPModel(h=self.kind.h, n_max=self.kind.n_max,
                        kernel=self.kind.kernel, signal_variance=sf2,
                        lengthscale=ls, noise_variance=nv, X=X, y=y)
        pred = gp_posterior(model, query)
        return PredictiveDistribution(
            mean=pred.mean * self.reservation,
            variance=pred.variance * self.reservation ** 2,
        )

    def _window_t0(self) -> int:
        h = self.kind.h
        n_patterns = min(self.kind.n_max, len(self._values) - h)
        return self._times[len(self._values) - n_patterns - h]

    def _design(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pattern matrix, targets, and the one-step-ahead query pattern."""
        h, n_max = self.kind.h, self.kind.n_max
        vals = self._values
        n_patterns = min(n_max, len(vals) - h)
        t0 = self._window_t0()
        step = self._times[-1] - self._times[-2] if len(self._times) > 1 else 1
        span = max(self._times[-1] + step - t0, 1)
        tail = np.asarray(vals[-(n_patterns + h):], dtype=float)
        times = np.asarray(self._times[-n_patterns:], dtype=float)
        X = np.empty((n_patterns, h + 1))
        X[:, 0] = (times - t0) / span
        X[:, 1:] = tail[np.arange(n_patterns)[:, None] + np.arange(h)]
        y = tail[h:]
        t_query = self._times[-1] + step
        query = np.empty(h + 1)
        query[0] = (t_query - t0) / span
        query[1:] = tail[-h:]
        return X, y, query

    def _reselect_due(self) -> bool:
        return self._hyper is None or self._n_observed % GP_RESELECT_EVERY == 0


def _stacked_kernel(kind: str, d2: np.ndarray, sf2: np.ndarray,
                    ls: np.ndarray) -> np.ndarray:
    """Kernel over stacked squared-distance matrices with per-slice params."""
    sf2 = sf2[:, None, None]
    ls = ls[:, None, None]
    if kind == "exponential":
        return sf2 * np.exp(-np.sqrt(d2) / ls)
    return sf2 * np.exp(-d2 / (2 * ls ** 2))


def _pairwise_d2(X: np.ndarray) -> np.ndarray:
    sq = (X * X).sum(-1)
    return np.maximum(sq[..., :, None] + sq[..., None, :]
                      - 2.0 * X @ np.swapaxes(X, -1, -2), 0.0)


def batch_predict(forecasters: list[Forecaster]) -> list[PredictiveDistribution]:
    """Predict for many streams at once.

    Matches per-forecaster predict() output (same kernels, jitter base,
    hyperparameter schedule); warm gp streams of equal shape share stacked
    linear-algebra calls, everything else falls through to predict().
    """
    out: list[PredictiveDistribution | None] = [None] * len(forecasters)
    groups: dict[tuple[str, int, int], list[int]] = {}
    designs: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
    for i, f in enumerate(forecasters):
        if f.kind.tag != "gp" or len(f._values) < f.kind.h + 1:
            out[i] = f.predict()
            continue
        X, y, query = f._design()
        designs[i] = (X, y, query)
        groups.setdefault((f.kind.kernel, X.shape[0], X.shape[1]),
                          []).append(i)

    for (kernel, n, _), idxs in groups.items():
        # Hyperparameter re-selection for the streams that are due.
        due = [i for i in idxs
               if forecasters[i]._reselect_due() and n >= 2]
        if due:
            Xs = np.stack([designs[i][0] for i in due])
            d2s = _pairwise_d2(Xs)
            lmls = np.full((len(due), len(GP_GRID)), -np.inf)
            try:
                for g, (sf2, ls, nv) in enumerate(GP_GRID):
                    Ks = _stacked_kernel(kernel, d2s,
                                         np.full(len(due), sf2),
                                         np.full(len(due), ls))
                    idx = np.arange(n)
                    Ks[:, idx, idx] += nv
                    L = np.linalg.cholesky(Ks)
                    ys = np.stack([designs[i][1] for i in due])[:, :, None]
                    alpha = np.linalg.solve(np.transpose(L, (0, 2, 1)),
                                            np.linalg.solve(L, ys))[:, :, 0]
                    logdet = 2.0 * np.log(
                        np.diagonal(L, axis1=1, axis2=2)).sum(axis=1)
                    lmls[:, g] = (-0.5 * (alpha * ys[:, :, 0]).sum(axis=1)
                                  - 0.5 * logdet
                                  - 0.5 * n * math.log(2 * math.pi))
                lmls = np.nan_to_num(lmls, nan=-np.inf)
                for row, i in enumerate(due):
                    if np.any(np.isfinite(lmls[row])):
                        forecasters[i]._hyper = GP_GRID[
                            int(np.argmax(lmls[row]))]
                    else:
                        raise SingularKernelError(
                            "all hyperparameter grid points singular")
            except np.linalg.LinAlgError:
                for i in due:
                    forecasters[i]._hyper = gp_select_hyperparams(
                        designs[i][0], designs[i][1], kernel)

        hypers = np.array([forecasters[i]._hyper or (0.25, 0.5, 1e-2)
                           for i in idxs])
        Xs = np.stack([designs[i][0] for i in idxs])
        ys = np.stack([designs[i][1] for i in idxs])
        qs = np.stack([designs[i][2] for i in idxs])
        sf2, ls, nv = hypers[:, 0], hypers[:, 1], hypers[:, 2]
        try:
            Ks = _stacked_kernel(kernel, _pairwise_d2(Xs), sf2, ls)
            idx = np.arange(n)
            Ks[:, idx, idx] += nv[:, None]
            # Cross-covariances between each query and its patterns.
            diff = Xs - qs[:, None, :]
            d2q = np.maximum((diff * diff).sum(-1), 0.0)
            if kernel == "exponential":
                kx = sf2[:, None] * np.exp(-np.sqrt(d2q) / ls[:, None])
            else:
                kx = sf2[:, None] * np.exp(-d2q / (2 * ls[:, None] ** 2))
            L = np.linalg.cholesky(Ks)
            rhs = np.concatenate([ys[:, :, None], kx[:, :, None]], axis=2)
            sol = np.linalg.solve(np.transpose(L, (0, 2, 1)),
                                  np.linalg.solve(L, rhs))
            means = np.einsum("sn,sn->s", kx, sol[:, :, 0])
            variances = np.clip(sf2 - np.einsum("sn,sn->s", kx, sol[:, :, 1]),
                                0.0, sf2)
            for s, i in enumerate(idxs):
                r = forecasters[i].reservation
                out[i] = PredictiveDistribution(
                    mean=float(means[s]) * r,
                    variance=float(variances[s]) * r * r,
                )
        except np.linalg.LinAlgError:
            for i in idxs:
                out[i] = forecasters[i].predict()
    return out


# --- forecaster evaluation ----------------------------------------------------

def evaluate_forecasters(series_map: dict[int, "np.ndarray"],
                         reservations: dict[int, float],
                         kinds: list[ForecasterKind]) -> list[dict]:
    """One-step-ahead error study over a corpus of raw value series.

    For every (kind, series), replays the series through a fresh forecaster,
    records |predicted - actual| / reservation for each post-warm-up step, and
    summarizes per series. Returns rows with keys
    kind, kernel, h, series_id, q1, median, q3, mean, max.
    """
    if not series_map:
        raise ValueError("corpus must be non-empty")
    rows = []
    for kind in kinds:
        for sid in sorted(series_map):
            values = np.asarray(series_map[sid], dtype=float)
            reservation = reservations[sid]
            fc = Forecaster(kind, reservation,
                            oracle_series=values if kind.tag == "oracle" else None)
            errors = []
            warmup = 0 if kind.tag == "oracle" else (
                ARI_MIN_OBS if kind.tag == "ari" else kind.h + 1
            )
            for i, v in enumerate(values[:-1]):
                fc.observe(i * 60, float(v))
                if i + 1 < warmup:
                    continue
                pred = fc.predict()
                errors.append(abs(pred.mean - values[i + 1]) / reservation)
            if not errors:
                continue
            e = np.array(errors)
            rows.append({
                "kind": kind.tag,
                "kernel": kind.kernel if kind.tag == "gp" else "",
                "h": kind.h if kind.tag == "gp" else 0,
                "series_id": sid,
                "q1": float(np.percentile(e, 25)),
                "median": float(np.percentile(e, 50)),
                "q3": float(np.percentile(e, 75)),
                "mean": float(e.mean()),
                "max": float(e.max()),
            })
    return rows
