"""
Torus simulator for 2-D isotropic Gaussian fields and critical-point extraction.

Fields are sampled exactly (in distribution) by circulant embedding: the torus
covariance kernel diagonalizes in the Fourier basis, so coloring white noise
with the root spectrum gives a stationary periodic field.  Critical points of
the sampled field are located on a periodic bicubic-spline surrogate whose
gradient and Hessian are analytic, which keeps Morse counting consistent: on
the torus, minima - saddles + maxima must come out to zero every time.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .rice import _chunk_rng

__all__ = [
    "GridSpec",
    "FieldRealization",
    "CriticalPoint",
    "PairTable",
    "EmbeddingError",
    "sample_field",
    "find_critical_points",
    "euler_characteristic",
    "pair_statistics",
]

FIELD_STREAM = 31


class EmbeddingError(RuntimeError):
    """The circulant spectrum stayed negative after extent doubling."""


@dataclass(frozen=True)
class GridSpec:
    """Square periodic grid: n cells per axis at physical spacing h."""

    n: int
    spacing: float

    @property
    def extent(self):
        return self.n * self.spacing


@dataclass(frozen=True)
class FieldRealization:
    values: np.ndarray
    spacing: float
    extent: float
    seed: int
    model_name: str
    periodic: bool = True

    @property
    def n(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class CriticalPoint:
    position: np.ndarray      # physical coordinates in [0, extent)^2
    value: float
    grad_norm: float
    hessian: np.ndarray
    index: int


@dataclass(frozen=True)
class PairTable:
    """Index composition of close critical-point pairs."""

    eps: float
    n_points: int
    n_pairs: int
    counts: dict = field(default_factory=dict)  # sorted index pair -> count
    pairs: tuple = ()

    @property
    def frac_max_saddle(self):
        if self.n_pairs == 0:
            return float("nan")
        return self.counts.get((1, 2), 0) / self.n_pairs

    @property
    def frac_opposite_det(self):
        """Pairs whose Hessian determinants have opposite signs.

        In 2-D the determinant sign is positive exactly for indices 0 and 2,
        so opposite signs means exactly one member is a saddle.
        """
        if self.n_pairs == 0:
            return float("nan")
        opp = sum(
            cnt for (i, j), cnt in self.counts.items() if (i == 1) != (j == 1)
        )
        return opp / self.n_pairs


def _torus_kernel(model, grid):
    """Min-image covariance kernel on the torus."""
    n, h = grid.n, grid.spacing
    ax = np.arange(n) * h
    ax = np.minimum(ax, grid.extent - ax)
    d2 = ax[:, None] ** 2 + ax[None, :] ** 2
    rho = np.vectorize(model.rho, otypes=[float])
    return rho(d2)


def sample_field(model, grid, seed=0):
    """Exact stationary sample of the field on the periodic grid.

    The circulant spectrum (the DFT of the min-image kernel) must be
    nonnegative; if it is not, the extent is doubled (same spacing) up to two
    times and the result cropped, losing exact periodicity, before giving up.
    """
    if model.n_dim != 2:
        raise ValueError("the simulator supports N=2 fields")
    if grid.extent < 8.0 * model.correlation_length:
        raise ValueError(
            f"grid extent {grid.extent:g} is below 8 correlation lengths "
            f"({8 * model.correlation_length:g})"
        )
    rng = _chunk_rng(seed, FIELD_STREAM, 0)
    work = grid
    for attempt in range(3):
        kernel = _torus_kernel(model, work)
        spectrum = np.fft.fft2(kernel).real
        floor = -1e-8 * spectrum.max()
        if spectrum.min() >= floor:
            spectrum = np.clip(spectrum, 0.0, None)
            m = work.n
            noise = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
            coloured = np.fft.ifft2(np.sqrt(spectrum) * noise).real * m
            values = coloured[: grid.n, : grid.n]
            return FieldRealization(
                values=values,
                spacing=grid.spacing,
                extent=grid.extent,
                seed=int(seed),
                model_name=model.name,
                periodic=(attempt == 0),
            )
        work = GridSpec(n=work.n * 2, spacing=work.spacing)
    raise EmbeddingError(
        "circulant spectrum stayed negative after two extent doublings"
    )


# ---------------------------------------------------------------------------
# periodic bicubic interpolation with analytic derivatives
# ---------------------------------------------------------------------------

def _bspline_weights(frac, order):
    """Cubic B-spline basis (or its derivative) at offsets -1, 0, 1, 2.

    ``frac`` is the fractional position in the cell; returns the four tap
    weights for the value (order 0), first, or second derivative.
    """
    t = frac[..., None] - np.array([-1.0, 0.0, 1.0, 2.0])
    a = np.abs(t)
    s = np.sign(t)
    if order == 0:
        return np.where(
            a < 1.0,
            (4.0 - 6.0 * a ** 2 + 3.0 * a ** 3) / 6.0,
            np.where(a < 2.0, (2.0 - a) ** 3 / 6.0, 0.0),
        )
    if order == 1:
        return np.where(
            a < 1.0,
            s * (-12.0 * a + 9.0 * a ** 2) / 6.0,
            np.where(a < 2.0, s * -3.0 * (2.0 - a) ** 2 / 6.0, 0.0),
        )
    if order == 2:
        return np.where(
            a < 1.0,
            (-12.0 + 18.0 * a) / 6.0,
            np.where(a < 2.0, (2.0 - a), 0.0),
        )
    raise ValueError("order must be 0, 1, or 2")


class FieldSurface:
    """Smooth periodic surrogate of a sampled field.

    Interpolates the grid values with a periodic bicubic B-spline, giving a
    twice continuously differentiable surface whose gradient and Hessian are
    exact derivatives of the surrogate (all in physical units).
    """

    def __init__(self, realization):
        values = realization.values
        n = values.shape[0]
        freqs = 2.0 * math.pi * np.fft.fftfreq(n)
        gain = (4.0 + 2.0 * np.cos(freqs)) / 6.0
        self.coeffs = np.fft.ifft2(np.fft.fft2(values) / np.outer(gain, gain)).real
        self.n = n
        self.h = realization.spacing
        self.scale = float(np.sqrt(np.mean(values ** 2)))

    def _tap(self, pts_grid, dx, dy):
        base = np.floor(pts_grid).astype(np.int64)
        frac = pts_grid - base
        wx = _bspline_weights(frac[:, 0], dx)
        wy = _bspline_weights(frac[:, 1], dy)
        offs = np.array([-1, 0, 1, 2])
        ix = (base[:, 0, None] + offs[None, :]) % self.n
        iy = (base[:, 1, None] + offs[None, :]) % self.n
        patch = self.coeffs[ix[:, :, None], iy[:, None, :]]
        return np.einsum("pa,pb,pab->p", wx, wy, patch) / self.h ** (dx + dy)

    def value(self, pts):
        return self._tap(np.atleast_2d(pts) / self.h, 0, 0)

    def gradient(self, pts):
        pg = np.atleast_2d(pts) / self.h
        return np.stack([self._tap(pg, 1, 0), self._tap(pg, 0, 1)], axis=-1)

    def hessian(self, pts):
        pg = np.atleast_2d(pts) / self.h
        hxx = self._tap(pg, 2, 0)
        hxy = self._tap(pg, 1, 1)
        hyy = self._tap(pg, 0, 2)
        out = np.empty((pg.shape[0], 2, 2))
        out[:, 0, 0] = hxx
        out[:, 0, 1] = out[:, 1, 0] = hxy
        out[:, 1, 1] = hyy
        return out


def _candidate_cells(surface, value_floor=None):
    """Cells whose corner gradients change sign in both components.

    ``value_floor`` restricts the search to cells whose best corner value
    clears the floor, which makes high-threshold sweeps cheap; the floor
    carries a one-unit margin relative to the requested threshold upstream.
    """
    n, h = surface.n, surface.h
    nodes = np.stack(
        np.meshgrid(np.arange(n) * h, np.arange(n) * h, indexing="ij"), axis=-1
    ).reshape(-1, 2)
    grad = surface.gradient(nodes).reshape(n, n, 2)

    def corner_stack(comp):
        return np.stack(
            [comp, np.roll(comp, -1, 0), np.roll(comp, -1, 1),
             np.roll(np.roll(comp, -1, 0), -1, 1)],
            axis=0,
        )

    flips = []
    for c in range(2):
        corners = corner_stack(grad[:, :, c])
        flips.append((corners.min(axis=0) <= 0.0) & (corners.max(axis=0) >= 0.0))
    mask = flips[0] & flips[1]
    if value_floor is not None and np.isfinite(value_floor):
        vals = surface.value(nodes).reshape(n, n)
        mask &= corner_stack(vals).max(axis=0) > value_floor
    return np.argwhere(mask)


def find_critical_points(realization, u_thr=-math.inf, max_iter=40,
                         grad_tol_factor=1e-8):
    """Locate, refine, classify, and threshold the critical points.

    Newton iterations on the interpolated gradient start from the centers of
    the candidate cells; converged points are deduplicated on the torus at
    half a grid spacing and filtered by field value.  Returns the points and
    a diagnostics dict (candidate cells, divergent starts).
    """
    surface = FieldSurface(realization)
    n, h = surface.n, surface.h
    extent = realization.extent
    floor = None if not np.isfinite(u_thr) else u_thr - 1.0
    cells = _candidate_cells(surface, value_floor=floor)
    diagnostics = {"cells_flagged": int(cells.shape[0]), "diverged": 0}
    if cells.shape[0] == 0:
        return [], diagnostics

    pts = (cells + 0.5) * h
    start = pts.copy()
    alive = np.ones(pts.shape[0], dtype=bool)
    for _ in range(max_iter):
        if not alive.any():
            break
        g = surface.gradient(pts[alive])
        hess = surface.hessian(pts[alive])
        det = hess[:, 0, 0] * hess[:, 1, 1] - hess[:, 0, 1] ** 2
        ok = np.abs(det) > 1e-300
        step = np.zeros_like(g)
        step[ok, 0] = (hess[ok, 1, 1] * g[ok, 0] - hess[ok, 0, 1] * g[ok, 1]) / det[ok]
        step[ok, 1] = (hess[ok, 0, 0] * g[ok, 1] - hess[ok, 0, 1] * g[ok, 0]) / det[ok]
        norm = np.linalg.norm(step, axis=1)
        cap = 1.5 * h
        big = norm > cap
        step[big] *= (cap / norm[big])[:, None]
        pts[alive] -= step
        # kill walkers that left a 2.5-cell ball around their start or hit a
        # singular Hessian
        drift = pts[alive] - start[alive]
        drift -= extent * np.round(drift / extent)
        bad = (~ok) | (np.linalg.norm(drift, axis=1) > 2.5 * h)
        idx_alive = np.where(alive)[0]
        alive[idx_alive[bad]] = False
    diagnostics["diverged"] += int((~alive).sum())

    pts = np.mod(pts[alive], extent)
    if pts.shape[0] == 0:
        return [], diagnostics
    g = surface.gradient(pts)
    gnorm = np.linalg.norm(g, axis=1)
    tol = grad_tol_factor * max(surface.scale, 1e-12)
    keep = gnorm < tol
    pts, gnorm = pts[keep], gnorm[keep]

    # Torus-aware dedup.  Walkers that found the same root agree to Newton
    # tolerance (~1e-10 h); genuinely distinct critical points must be kept
    # even when much closer than a cell, since tightly paired points are the
    # statistic of interest downstream.
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts, gnorm = pts[order], gnorm[order]
    dedup_radius = 1e-3 * h
    selected = []
    for i in range(pts.shape[0]):
        dup = False
        for j in selected:
            d = pts[i] - pts[j]
            d -= extent * np.round(d / extent)
            if np.linalg.norm(d) < dedup_radius:
                dup = True
                break
        if not dup:
            selected.append(i)
    pts, gnorm = pts[selected], gnorm[selected]

    vals = surface.value(pts)
    hess = surface.hessian(pts)
    out = []
    for i in range(pts.shape[0]):
        if vals[i] <= u_thr:
            continue
        eigs = np.linalg.eigvalsh(hess[i])
        tol_idx = 1e-10 * max(np.linalg.norm(hess[i]), 1e-300)
        out.append(
            CriticalPoint(
                position=pts[i].copy(),
                value=float(vals[i]),
                grad_norm=float(gnorm[i]),
                hessian=hess[i].copy(),
                index=int((eigs < -tol_idx).sum()),
            )
        )
    return out, diagnostics


def euler_characteristic(points):
    """Morse alternating sum #minima - #saddles + #maxima."""
    return sum((-1) ** p.index for p in points)


def pair_statistics(points, eps, extent):
    """Index composition of unordered pairs closer than ``eps`` on the torus."""
    pts = np.array([p.position for p in points]) if points else np.empty((0, 2))
    counts = {}
    pairs = []
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = pts[i] - pts[j]
            d -= extent * np.round(d / extent)
            dist = float(np.linalg.norm(d))
            if dist < eps:
                key = tuple(sorted((points[i].index, points[j].index)))
                counts[key] = counts.get(key, 0) + 1
                pairs.append((points[i].index, points[j].index, dist))
    return PairTable(
        eps=float(eps),
        n_points=len(points),
        n_pairs=len(pairs),
        counts=counts,
        pairs=tuple(pairs),
    )
