"""
Jump-size densities and the truncated power law

    P(x) ~ (x + x0)^-beta * exp(-x / kappa),  x > 0

fitted by maximum likelihood with a numerically normalised density.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.special import gammaln

from borderflux.config import get_settings
from borderflux.config.logging import get_logger
from borderflux.exceptions import FitFailureError, ValidationError
from borderflux.geo.models import PartitionScheme

log = get_logger(__name__)

MIN_FIT_SAMPLES = 100
GRID_POINTS = 20
GRID_BETA = (0.5, 3.0)
GRID_KAPPA_KM = (1.0, 1e4)
GRID_DELTA_R0_KM = (0.01, 100.0)
MAX_REFINE_ITERATIONS = 10_000
QUAD_EPSREL = 1e-10


@dataclass(frozen=True)
class PdfEstimate:
    bin_edges: np.ndarray
    densities: np.ndarray
    n_samples: int

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.densities * np.diff(self.bin_edges) * self.n_samples)

    @property
    def centers(self) -> np.ndarray:
        """Geometric bin centres."""
        return np.sqrt(self.bin_edges[:-1] * self.bin_edges[1:])


@dataclass(frozen=True)
class PowerLawFit:
    delta_r0: float
    beta: float
    kappa: float
    log_likelihood: float
    n_samples: int
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "delta_r0_km": self.delta_r0,
            "beta": self.beta,
            "kappa_km": self.kappa,
            "log_likelihood": self.log_likelihood,
            "n": self.n_samples,
        }


class Attribution(str, Enum):
    """Which endpoint's region a displacement is credited to."""

    ORIGIN = "origin"
    DESTINATION = "destination"
    BOTH = "both"


@dataclass(frozen=True)
class RegionFits:
    """Per-region fits plus regions skipped for size or failed to converge."""

    fits: dict[str, PowerLawFit]
    skipped: dict[str, int] = field(default_factory=dict)
    failed: dict[str, str] = field(default_factory=dict)
    attribution: Attribution = Attribution.ORIGIN

    @property
    def beta_std(self) -> Optional[float]:
        betas = [f.beta for f in self.fits.values()]
        if len(betas) < 2:
            return None
        return float(np.std(betas, ddof=1))


def _positive(samples: Iterable[float]) -> np.ndarray:
    x = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples)
    x = x.astype(float)
    return x[np.isfinite(x) & (x > 0)]


def estimate_pdf(samples: Sequence[float], bins_per_decade: int = 10) -> PdfEstimate:
    """Histogram density over log-spaced bins spanning the sample range."""
    if bins_per_decade < 1:
        raise ValidationError("bins_per_decade must be >= 1")
    x = _positive(samples)
    if len(x) == 0:
        raise ValidationError("no positive samples to estimate a density from")

    lo, hi = float(x.min()), float(x.max())
    n_bins = max(1, int(np.ceil(bins_per_decade * np.log10(hi / lo) - 1e-9)))
    edges = lo * 10.0 ** (np.arange(n_bins + 1) / bins_per_decade)
    edges[-1] = max(edges[-1], hi)
    counts, _ = np.histogram(x, bins=edges)
    densities = counts / (len(x) * np.diff(edges))
    return PdfEstimate(bin_edges=edges, densities=densities, n_samples=len(x))


def log_normalization(delta_r0: float, beta: float, kappa: float) -> float:
    """Log of the integral of (x + x0)^-beta * exp(-x/kappa) over (0, inf).

    With a = x0/kappa and x + x0 = kappa * e^v the integral becomes
    kappa^(1-beta) * e^a * int_{ln a}^inf exp((1-beta) v - e^v) dv. The peak
    of the integrand is factored out before quadrature.
    """
    if kappa <= 0 or beta <= 0 or delta_r0 < 0:
        return np.inf
    if delta_r0 == 0:
        if beta >= 1:
            return np.inf
        # pure gamma kernel
        return float((1 - beta) * np.log(kappa) + gammaln(1 - beta))

    a = delta_r0 / kappa
    v_lo = np.log(a)
    v_peak = v_lo
    if beta < 1:
        v_peak = max(v_lo, np.log(1 - beta))
    g = (1 - beta) * v_peak - np.exp(v_peak)
    v_hi = np.log(a + 1000.0)

    def integrand(v: float) -> float:
        return math.exp((1 - beta) * v - math.exp(v) - g)

    points = [v_peak] if v_lo < v_peak < v_hi else None
    value, _ = integrate.quad(
        integrand, v_lo, v_hi, epsabs=0.0, epsrel=QUAD_EPSREL, limit=200, points=points
    )
    return float((1 - beta) * np.log(kappa) + a + g + np.log(value))


def log_likelihood(
    samples: Sequence[float], delta_r0: float, beta: float, kappa: float
) -> float:
    """Total log-likelihood of positive samples under the normalised law."""
    x = _positive(samples)
    ln_z = log_normalization(delta_r0, beta, kappa)
    return float(-(beta * np.log(x + delta_r0).sum() + x.sum() / kappa + len(x) * ln_z))


def coarse_grid_search(x: np.ndarray) -> tuple[tuple[float, float, float], float]:
    """Best (x0, beta, kappa) on the coarse log grid by mean negative log-likelihood."""
    betas = np.geomspace(*GRID_BETA, GRID_POINTS)
    kappas = np.geomspace(*GRID_KAPPA_KM, GRID_POINTS)
    offsets = np.geomspace(*GRID_DELTA_R0_KM, GRID_POINTS)
    mean_x = x.mean()

    best = (np.inf, None)
    for x0 in offsets:
        mean_log = np.log(x + x0).mean()
        for beta in betas:
            for kappa in kappas:
                nll = beta * mean_log + mean_x / kappa
                nll += log_normalization(x0, beta, kappa)
                if nll < best[0]:
                    best = (nll, (float(x0), float(beta), float(kappa)))
    return best[1], best[0]


def fit_truncated_power_law(samples: Sequence[float]) -> PowerLawFit:
    """Maximum-likelihood (delta_r0, beta, kappa) for positive jump sizes.

    A coarse log-spaced grid search is refined by a bounded Nelder-Mead simplex
    over (ln x0, beta, ln kappa). The result is never worse than the best grid
    point.

    Raises:
        ValidationError: fewer than 100 positive samples.
        FitFailureError: the simplex did not converge within 10^4 iterations;
            ``best`` carries the best parameters found.
    """
    x = _positive(samples)
    if len(x) < MIN_FIT_SAMPLES:
        raise ValidationError(
            f"at least {MIN_FIT_SAMPLES} positive samples required, got {len(x)}"
        )
    n = len(x)
    mean_x = x.mean()

    def objective(theta: np.ndarray) -> float:
        x0, beta, kappa = np.exp(theta[0]), theta[1], np.exp(theta[2])
        value = beta * np.log(x + x0).mean() + mean_x / kappa
        value += log_normalization(x0, beta, kappa)
        return float(value) if np.isfinite(value) else 1e300

    (g_x0, g_beta, g_kappa), grid_nll = coarse_grid_search(x)
    log_lo, log_hi = np.log(x.min()), np.log(x.max())
    bounds = [
        (log_lo - 20.0, log_hi + 10.0),
        (1e-6, 20.0),
        (log_lo - 10.0, log_hi + 20.0),
    ]
    theta = np.array([np.log(g_x0), g_beta, np.log(g_kappa)])
    theta = np.clip(theta, [b[0] for b in bounds], [b[1] for b in bounds])

    options = {
        "xatol": 1e-8,
        "fatol": 1e-11,
        "maxiter": MAX_REFINE_ITERATIONS,
        "maxfev": 4 * MAX_REFINE_ITERATIONS,
    }
    iterations = 0
    result = None
    # restart once from the converged point
    for _ in range(2):
        result = optimize.minimize(
            objective, theta, method="Nelder-Mead", bounds=bounds, options=options
        )
        iterations += int(result.nit)
        theta = result.x

    best_theta, best_nll = result.x, float(result.fun)
    if best_nll > grid_nll:
        best_theta = np.array([np.log(g_x0), g_beta, np.log(g_kappa)])
        best_nll = grid_nll

    fit = PowerLawFit(
        delta_r0=float(np.exp(best_theta[0])),
        beta=float(best_theta[1]),
        kappa=float(np.exp(best_theta[2])),
        log_likelihood=float(-n * best_nll),
        n_samples=n,
        iterations=iterations,
    )
    if not result.success:
        raise FitFailureError(
            f"power-law refinement did not converge in {MAX_REFINE_ITERATIONS} "
            f"iterations: {result.message}",
            best=fit,
        )
    log.debug(
        "power_law_fitted",
        n=n,
        beta=fit.beta,
        kappa=fit.kappa,
        delta_r0=fit.delta_r0,
        iterations=iterations,
    )
    return fit


def _power_segment(u: np.ndarray, lo: float, hi: float, beta: float) -> np.ndarray:
    """Inverse CDF of y^-beta on (lo, hi]."""
    s = 1.0 - beta
    if abs(s) < 1e-6 and lo > 0:
        return lo * (hi / lo) ** u
    return (lo**s + u * (hi**s - lo**s)) ** (1.0 / s)


def _power_mass(lo: float, hi: float, beta: float) -> float:
    if hi <= lo:
        return 0.0
    s = 1.0 - beta
    if abs(s) < 1e-6 and lo > 0:
        return float(np.log(hi / lo))
    return float((hi**s - lo**s) / s)


def sample_truncated_power_law(
    rng: np.random.Generator, n: int, delta_r0: float, beta: float, kappa: float
) -> np.ndarray:
    """Exact rejection sampler for the truncated power law.

    Works on y = x + delta_r0 with the envelope y^-beta below
    c = max(delta_r0, kappa) and c^-beta * exp(-(y - delta_r0)/kappa) above
    it, so the acceptance rate stays bounded for every beta > 0.
    """
    if kappa <= 0 or beta <= 0 or delta_r0 < 0:
        raise ValidationError("need kappa > 0, beta > 0, delta_r0 >= 0")
    if delta_r0 == 0 and beta >= 1:
        raise ValidationError("delta_r0 = 0 needs beta < 1 for a normalisable law")

    c = max(delta_r0, kappa)
    body = _power_mass(delta_r0, c, beta)
    tail = c ** (-beta) * kappa * np.exp(-(c - delta_r0) / kappa)
    p_body = body / (body + tail)

    out = np.empty(0)
    while len(out) < n:
        batch = max(2 * (n - len(out)), 64)
        u = rng.random(batch)
        in_body = rng.random(batch) < p_body
        y = np.empty(batch)
        k = int(in_body.sum())
        y[in_body] = _power_segment(rng.random(k), delta_r0, c, beta)
        y[~in_body] = c + rng.exponential(kappa, batch - k)
        accept = np.where(
            in_body,
            u < np.exp(-(y - delta_r0) / kappa),
            u < (c / y) ** beta,
        )
        x = y - delta_r0
        out = np.concatenate([out, x[accept & (x > 0)]])
    return out[:n]


def per_region_fits(
    displacements: Iterable,
    scheme: PartitionScheme,
    attribution: Attribution = Attribution.ORIGIN,
    min_samples: int = MIN_FIT_SAMPLES,
) -> RegionFits:
    """Fit the law separately per region; small regions are skipped and reported."""
    attribution = Attribution(attribution)
    samples: dict[str, list[float]] = {label: [] for label in scheme.labels}
    for d in displacements:
        regions = {
            Attribution.ORIGIN: (scheme[d.origin],),
            Attribution.DESTINATION: (scheme[d.destination],),
            Attribution.BOTH: tuple({scheme[d.origin], scheme[d.destination]}),
        }[attribution]
        for region in regions:
            samples[region].append(d.distance)

    eligible = [r for r in scheme.labels if len(samples[r]) >= min_samples]
    skipped = {r: len(samples[r]) for r in scheme.labels if r not in eligible}

    def fit(region: str):
        try:
            return region, fit_truncated_power_law(samples[region]), None
        except FitFailureError as e:
            return region, None, str(e)

    with ThreadPoolExecutor(max_workers=get_settings().threads) as pool:
        results = list(pool.map(fit, eligible))

    fits = {r: f for r, f, _ in results if f is not None}
    failed = {r: msg for r, _, msg in results if msg is not None}
    for region, count in skipped.items():
        log.info("region_fit_skipped", region=region, n=count, minimum=min_samples)
    return RegionFits(
        fits=fits, skipped=skipped, failed=failed, attribution=attribution
    )
