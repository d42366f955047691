"""Monte Carlo ground truth from random two-qubit / two-rebit density matrices.

States are drawn from the Hilbert-Schmidt (flat) measure as
rho = G G^dagger / tr(G G^dagger), with G a 4 x K Ginibre matrix: K = 4 over
the complex numbers, K = 5 over the reals (the induced measure has density
proportional to det(rho)^((beta (K - 4 + 1) / 2) - 1), which is flat only for
those K).

Samples are generated in fixed-size chunks. Chunk ``i`` draws from its own
Philox stream keyed by (seed, i), and per-chunk sums are reduced in chunk
order, so the output depends only on (seed, n_samples, chunk_size).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .exact_arith import BigFloat, to_bigfloat

__all__ = [
    "DensityMatrix",
    "SampleStats",
    "det_pair",
    "det_pt_samples",
    "empirical_cdf_distance",
    "partial_transpose",
    "run_mc",
    "sample_hs",
    "sample_hs_batch",
]

FIELDS = {"real": (1, 5), "complex": (2, 4)}  # beta, Ginibre columns
FIELD_ALPHA = {"real": Fraction(1, 2), "complex": Fraction(1)}
PT_SUPPORT = (-1 / 16, 1 / 256)
STAT_NAMES = ("pt", "det", "balanced")


def _check_field(field_name: str) -> str:
    if field_name == "quaternion":
        raise NotImplementedError("quaternionic sampling is not provided")
    if field_name not in FIELDS:
        raise ValueError(f"unknown field {field_name!r}; expected 'real' or 'complex'")
    return field_name


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    field: str

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.shape != (4, 4):
            raise ValueError("density matrices here are 4 x 4")
        if not np.allclose(m, m.conj().T, atol=1e-12):
            raise ValueError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > 1e-12:
            raise ValueError("trace differs from 1")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("matrix is not positive semidefinite")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries).real)


def _ginibre(field_name: str, n: int, rng: np.random.Generator) -> np.ndarray:
    _, cols = FIELDS[field_name]
    g = rng.standard_normal((n, 4, cols))
    if field_name == "complex":
        g = g + 1j * rng.standard_normal((n, 4, cols))
    return g


def sample_hs_batch(field_name: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Hilbert-Schmidt distributed 4 x 4 density matrices, shape (n, 4, 4)."""
    field_name = _check_field(field_name)
    g = _ginibre(field_name, n, rng)
    rho = g @ np.conj(np.swapaxes(g, -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    return rho / tr[:, None, None]


def sample_hs(field_name: str, rng: np.random.Generator) -> DensityMatrix:
    return DensityMatrix(sample_hs_batch(field_name, 1, rng)[0], field_name)


def partial_transpose(rho, subsystem: str = "B") -> np.ndarray:
    """Transpose on one qubit: rho[(i,j),(k,l)] -> rho[(i,l),(k,j)] for subsystem B.

    Works on a single matrix, a DensityMatrix, or a stack (..., 4, 4).
    """
    m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)
    lead = m.shape[:-2]
    t = m.reshape(lead + (2, 2, 2, 2))
    n = len(lead)
    axes = list(range(n))
    if subsystem == "B":
        axes += [n, n + 3, n + 2, n + 1]
    elif subsystem == "A":
        axes += [n + 2, n + 1, n, n + 3]
    else:
        raise ValueError("subsystem must be 'A' or 'B'")
    return t.transpose(axes).reshape(lead + (4, 4))


def det_pair(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(det rho, det rho^PT) for a stack of matrices, as real float64 arrays."""
    return np.linalg.det(rho).real, np.linalg.det(partial_transpose(rho)).real


@dataclass
class SampleStats:
    field: str
    n_samples: int
    seed: int
    chunk_size: int
    moment_orders: tuple[int, ...]
    # name -> list of (order, mean, standard error)
    moments: dict
    sep_count: int
    sep_fraction: BigFloat
    sep_stderr: float
    histogram_edges: list
    histogram_counts: list
    config: dict = field(default_factory=dict)

    @property
    def empirical_moments_pt(self):
        return self.moments["pt"]

    @property
    def empirical_moments_det(self):
        return self.moments["det"]

    @property
    def empirical_moments_balanced(self):
        return self.moments["balanced"]

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "alpha": str(FIELD_ALPHA[self.field]),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "chunk_size": self.chunk_size,
            "moment_orders": list(self.moment_orders),
            "moments": {k: [{"order": n, "mean": m, "stderr": s} for n, m, s in v]
                        for k, v in self.moments.items()},
            "sep_count": self.sep_count,
            "sep_fraction": format(float(self.sep_fraction), ".10f"),
            "sep_stderr": self.sep_stderr,
            "histogram": {"edges": self.histogram_edges, "counts": self.histogram_counts},
        }


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def _chunks(n_samples: int, chunk_size: int):
    start = index = 0
    while start < n_samples:
        n = min(chunk_size, n_samples - start)
        yield index, n
        start += n
        index += 1


def det_pt_samples(field_name: str, n_samples: int, seed: int, chunk_size: int = 100_000
                   ) -> np.ndarray:
    """The raw det(rho^PT) values run_mc would see for the same arguments."""
    field_name = _check_field(field_name)
    out = [det_pair(sample_hs_batch(field_name, n, _chunk_rng(seed, i)))[1]
           for i, n in _chunks(n_samples, chunk_size)]
    return np.concatenate(out)


def _chunk(args):
    field_name, seed, index, n, orders, edges = args
    rho = sample_hs_batch(field_name, n, _chunk_rng(seed, index))
    d, dpt = det_pair(rho)
    values = {"pt": dpt, "det": d, "balanced": d * dpt}
    sums = {}
    for name, v in values.items():
        sums[name] = [(math.fsum(v**k), math.fsum(v ** (2 * k))) for k in orders]
    counts, _ = np.histogram(np.clip(dpt, edges[0], edges[-1]), bins=edges)
    return sums, int(np.count_nonzero(dpt >= 0)), counts, float(d.min()), float(d.max()), \
        float(dpt.min()), float(dpt.max())


def run_mc(field_name: str, n_samples: int, seed: int, moment_orders=(1, 2, 3), *,
           workers: int = 1, chunk_size: int = 100_000, bins: int = 200) -> SampleStats:
    """Empirical determinant moments, separable fraction and a det(rho^PT) histogram.

    A state counts as separable when det(rho^PT) >= 0; for two qubits the
    partial transpose has at most one negative eigenvalue, so this is the
    Peres-Horodecki test.
    """
    field_name = _check_field(field_name)
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    orders = tuple(int(k) for k in moment_orders)
    if any(k < 1 for k in orders):
        raise ValueError("moment orders start at 1")
    edges = np.linspace(PT_SUPPORT[0], PT_SUPPORT[1], bins + 1)
    jobs = [(field_name, seed, i, n, orders, edges) for i, n in _chunks(n_samples, chunk_size)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk, jobs))
    else:
        parts = [_chunk(j) for j in jobs]

    n = n_samples
    moments = {}
    for name in STAT_NAMES:
        rows = []
        for j, k in enumerate(orders):
            s1 = math.fsum(p[0][name][j][0] for p in parts)
            s2 = math.fsum(p[0][name][j][1] for p in parts)
            mean = s1 / n
            var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
            rows.append((k, mean, math.sqrt(var / n)))
        moments[name] = rows
    sep_count = sum(p[1] for p in parts)
    sep = sep_count / n
    counts = np.sum([p[2] for p in parts], axis=0)
    return SampleStats(
        field=field_name, n_samples=n, seed=seed, chunk_size=chunk_size, moment_orders=orders,
        moments=moments, sep_count=sep_count,
        sep_fraction=to_bigfloat(Fraction(sep_count, n), 128), sep_stderr=math.sqrt(sep * (1 - sep) / n),
        histogram_edges=[float(e) for e in edges], histogram_counts=[int(c) for c in counts],
        config={"det_range": [min(p[3] for p in parts), max(p[4] for p in parts)],
                "det_pt_range": [min(p[5] for p in parts), max(p[6] for p in parts)]},
    )


def empirical_cdf_distance(samples: np.ndarray, cdf_values, points) -> float:
    """sup over ``points`` of |F_empirical(x) - F_model(x)|."""
    s = np.sort(np.asarray(samples))
    emp = np.searchsorted(s, np.asarray(points, dtype=float), side="right") / len(s)
    return float(np.max(np.abs(emp - np.asarray(cdf_values, dtype=float))))
