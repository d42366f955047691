"""Scans over alpha: boundary intercepts, Fisher information, family comparisons."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from scipy.special import loggamma

from .exact_arith import as_rational
from .moments import MomentFamily, MomentTable, beta_product_params
from .reconstruct import (DensityEstimate, cdf, density_curve, eval_density, eval_derivative,
                          legendre_coeffs, reconstruct_family)
from .sepprob import sep_prob

__all__ = [
    "FisherComparison",
    "FisherConfig",
    "FisherEstimate",
    "ProductBetaDensity",
    "ScanResult",
    "boundary_point",
    "fisher_compare",
    "fisher_info",
    "fisher_step_errors",
    "intercept_scan",
    "joint_correlation",
    "log_linear_fit",
]


@dataclass
class ScanResult:
    family: MomentFamily
    alphas: list[Fraction]
    N_moments: int
    point: Fraction
    intercepts: list
    derivatives: list
    cumulatives: list | None
    log_intercepts: list
    precision_bits: int | None = None

    def rows(self):
        cum = self.cumulatives or [None] * len(self.alphas)
        return list(zip(self.alphas, self.intercepts, self.derivatives, cum, self.log_intercepts))


def boundary_point(family) -> Fraction | None:
    """x = 0 for the partial-transpose families; the determinant families have no interior boundary."""
    family = MomentFamily.parse(family)
    if family in (MomentFamily.PT_HS, MomentFamily.BALANCED_HS):
        return Fraction(0)
    return None


def _scan_one(family, alpha, N, point, precision):
    series = reconstruct_family(family, alpha, N)
    est = DensityEstimate(series, precision)
    value = eval_density(est, point)
    deriv = eval_derivative(est, point)
    cum = cdf(est, point, series.interval.b)
    return value, deriv, cum


def intercept_scan(family, alphas: Sequence, N: int, point=None, *,
                   precision: int | None = None, workers: int = 1) -> ScanResult:
    """Density, derivative and upper-tail mass at ``point`` for every alpha.

    ``point`` defaults to the separability boundary x = 0 and must be given
    for the determinant families. Results come back in grid order whatever
    the worker count.
    """
    family = MomentFamily.parse(family)
    alphas = [as_rational(a) for a in alphas]
    if any(a <= 0 for a in alphas):
        raise ValueError("every alpha must be positive")
    if point is None:
        point = boundary_point(family)
        if point is None:
            raise ValueError(f"{family.value} has no interior boundary; pass point explicitly")
    point = as_rational(point)
    if not family.support.contains(point):
        raise ValueError(f"point {point} outside the support {family.support}")

    jobs = [(family, a, N, point, precision) for a in alphas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scan_one, *zip(*jobs)))
    else:
        results = [_scan_one(*j) for j in jobs]

    intercepts = [r[0] for r in results]
    logs = []
    for v in intercepts:
        with gmpy2.context(precision=v.precision):
            logs.append(gmpy2.log(v) if v > 0 else None)
    return ScanResult(family, alphas, N, point, intercepts, [r[1] for r in results],
                      [r[2] for r in results], logs, precision)


def log_linear_fit(scan: ScanResult) -> tuple[float, float]:
    """Least-squares (intercept, slope) of log p_alpha(point) against alpha."""
    pts = [(float(a), float(l)) for a, l in zip(scan.alphas, scan.log_intercepts) if l is not None]
    if len(pts) < 2:
        raise ValueError("need at least two positive intercepts")
    x, y = np.array(pts).T
    slope, icpt = np.polyfit(x, y, 1)
    return float(icpt), float(slope)


def joint_correlation(scan: ScanResult) -> float | None:
    """Correlation of log intercepts with log separability probabilities over the scan grid."""
    pairs = []
    for a, l in zip(scan.alphas, scan.log_intercepts):
        if l is None:
            continue
        p = sep_prob(a, Fraction(1, 10**15))
        pairs.append((float(l), math.log(float(p.partial_sum))))
    if len(pairs) < 2:
        return None
    x, y = np.array(pairs).T
    return float(np.corrcoef(x, y)[0, 1])


class ProductBetaDensity:
    """Exact density of X = scale * prod Y_i, Y_i ~ Beta(a_i, b_i - a_i) independent.

    Z = log(X / scale) has characteristic function
    prod Gamma(a_i + iw) Gamma(b_i) / (Gamma(a_i) Gamma(b_i + iw)), inverted
    here by FFT on a uniform grid t_k = -k dt, k = 0..M-1.
    """

    def __init__(self, family, alpha, *, grid_size: int = 2**17, span: float | None = None):
        self.family = MomentFamily.parse(family)
        self.alpha = as_rational(alpha)
        self.scale, self.pairs = beta_product_params(self.family, self.alpha)
        a_min = float(min(a for a, _ in self.pairs))
        # density of Z decays like exp(a_min t) as t -> -oo; the FFT wraps at -span
        self.span = span if span is not None else max(60.0 / a_min, 40.0)
        self.grid_size = grid_size
        self._grid = None

    def logspace(self) -> tuple[np.ndarray, np.ndarray]:
        """(t, f_Z(t)) on the FFT grid."""
        if self._grid is None:
            M, T = self.grid_size, self.span
            w = 2 * np.pi * np.fft.fftfreq(M, d=T / M)
            lphi = np.zeros(M, dtype=complex)
            for a, b in self.pairs:
                a, b = float(a), float(b)
                lphi += loggamma(a + 1j * w) - loggamma(a) - loggamma(b + 1j * w) + loggamma(b)
            f = np.real(np.fft.ifft(np.exp(lphi))) * M / T
            t = -np.arange(M) * (T / M)
            self._grid = (t, f)
        return self._grid

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t, f = self.logspace()
        z = np.log(x / float(self.scale))
        # t is decreasing; interpolate on the reversed grid
        return np.interp(z, t[::-1], f[::-1]) / x


@dataclass(frozen=True)
class FisherConfig:
    h: Fraction = Fraction(1, 100)
    nodes: int = 200
    edge_margin: float = 1e-3
    clamp_epsilon: float = 1e-12
    n_moments: int = 100
    max_nonpositive_fraction: float = 0.5
    density: str = "legendre"
    mellin_grid: int = 2**17

    def __post_init__(self):
        object.__setattr__(self, "h", as_rational(self.h))
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.nodes < 2:
            raise ValueError("need at least two quadrature nodes")
        if not 0 <= self.edge_margin < 0.5:
            raise ValueError("edge_margin must be in [0, 0.5)")
        if self.clamp_epsilon <= 0:
            raise ValueError("clamp_epsilon must be positive")
        if self.density not in ("legendre", "mellin"):
            raise ValueError(f"unknown density source {self.density!r}")


@dataclass(frozen=True)
class FisherEstimate:
    family: MomentFamily
    alpha: Fraction
    h: Fraction
    N_moments: int
    quadrature_nodes: int
    clamp_epsilon: float
    value: float
    density: str = "legendre"
    edge_margin: float = 1e-3
    nonpositive_fraction: float = 0.0


def _clamped_score(p, pp, pm, h, eps):
    p, pp, pm = (np.maximum(v, eps) for v in (p, pp, pm))
    return p, (np.log(pp) - np.log(pm)) / (2 * h)


def _fisher_legendre(family, alpha, cfg: FisherConfig, tables):
    h = cfg.h
    if tables is None:
        series = [reconstruct_family(family, alpha + d, cfg.n_moments) for d in (-h, 0, h)]
    else:
        if len(tables) != 3:
            raise ValueError("tables must hold the moment tables at alpha-h, alpha, alpha+h")
        series = [legendre_coeffs(t, min(cfg.n_moments, t.order)) if isinstance(t, MomentTable)
                  else t for t in tables]
    iv = family.support
    lo, hi, w = float(iv.a), float(iv.b), float(iv.width)
    lo, hi = lo + cfg.edge_margin * w, hi - cfg.edge_margin * w
    t, wt = np.polynomial.legendre.leggauss(cfg.nodes)
    x = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    wq = 0.5 * (hi - lo) * wt
    pm, p, pp = (density_curve(s, x) for s in series)
    bad = float(np.mean(np.concatenate([pm, p, pp]) <= 0))
    if bad > cfg.max_nonpositive_fraction:
        raise ValueError(f"density estimate nonpositive at {bad:.0%} of nodes; "
                         f"{cfg.n_moments} moments are too few")
    p, score = _clamped_score(p, pp, pm, float(h), cfg.clamp_epsilon)
    return float(np.sum(wq * p * score**2)), bad


def _fisher_mellin(family, alpha, cfg: FisherConfig):
    h = cfg.h
    dens = [ProductBetaDensity(family, alpha + d, grid_size=cfg.mellin_grid) for d in (-h, 0, h)]
    span = max(d.span for d in dens)
    for d in dens:
        d.span = span
    (t, pm), (_, p), (_, pp) = (d.logspace() for d in dens)
    dt = t[0] - t[1]
    # Fisher information is invariant under the change of variable x -> log x
    bad = float(np.mean(p <= 0))
    p, score = _clamped_score(p, pp, pm, float(h), cfg.clamp_epsilon)
    keep = p > cfg.clamp_epsilon
    return float(np.sum(p[keep] * score[keep] ** 2) * dt), bad


def fisher_info(family, alpha, config: FisherConfig | None = None, *,
                tables=None) -> FisherEstimate:
    """I(alpha) = int p_alpha (d/dalpha log p_alpha)^2 dx by central differences in alpha.

    ``density="legendre"`` reconstructs p from ``n_moments`` moments and
    integrates with Gauss-Legendre over the support shrunk by ``edge_margin``
    at each end. ``density="mellin"`` uses the exact product-of-Betas density
    (determinant families only) and integrates in log x.
    """
    family = MomentFamily.parse(family)
    alpha = as_rational(alpha)
    cfg = config or FisherConfig()
    if alpha - cfg.h <= 0:
        raise ValueError(f"alpha - h must be positive (alpha={alpha}, h={cfg.h})")
    if cfg.density == "mellin":
        if tables is not None:
            raise ValueError("explicit moment tables only apply to the legendre density")
        value, bad = _fisher_mellin(family, alpha, cfg)
    else:
        value, bad = _fisher_legendre(family, alpha, cfg, tables)
    return FisherEstimate(family, alpha, cfg.h, cfg.n_moments, cfg.nodes, cfg.clamp_epsilon,
                          value, cfg.density, cfg.edge_margin, bad)


def fisher_step_errors(family, alpha, config: FisherConfig | None = None, halvings: int = 2):
    """Estimates at h, h/2, ..., and the successive differences |I(h) - I(h/2)|, ..."""
    cfg = config or FisherConfig()
    values = []
    for j in range(halvings + 1):
        c = replace(cfg, h=cfg.h / 2**j)
        values.append(fisher_info(family, alpha, c).value)
    return values, [abs(values[j] - values[j + 1]) for j in range(halvings)]


@dataclass
class FisherComparison:
    alphas: list[Fraction]
    pt: list[FisherEstimate]
    det: list[FisherEstimate]
    correlation: float | None
    config: FisherConfig = field(default_factory=FisherConfig)


def fisher_compare(alphas: Sequence, N_p: int = 245, N_q: int = 100,
                   config: FisherConfig | None = None) -> FisherComparison:
    """Fisher information of the partial-transpose family against the HS determinant family."""
    cfg = config or FisherConfig()
    alphas = [as_rational(a) for a in alphas]
    pt = [fisher_info(MomentFamily.PT_HS, a, replace(cfg, n_moments=N_p, density="legendre"))
          for a in alphas]
    det = [fisher_info(MomentFamily.DET_HS, a, replace(cfg, n_moments=N_q)) for a in alphas]
    corr = None
    if len(alphas) >= 2:
        x = np.array([e.value for e in pt])
        y = np.array([e.value for e in det])
        if np.std(x) > 0 and np.std(y) > 0:
            corr = float(np.corrcoef(x, y)[0, 1])
    return FisherComparison(alphas, pt, det, corr, cfg)
