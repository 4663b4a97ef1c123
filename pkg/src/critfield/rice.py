"""
Monte Carlo estimators for critical-point densities by Hessian index.

The density of critical points above a threshold near a conditioned critical
point reduces to a Gaussian expectation over the conditional covariance: draw
y ~ N(0, I_L), map through a factor of Sigma(r), weight by |det| of the
rebuilt Hessian, and restrict by index and by both field values exceeding the
threshold.  All reported ratios are self-normalized on a common sample, so
the closed-form prefactor cancels exactly.

Sampling is deterministic: a root seed plus a named stream and a fixed chunk
plan define counter-based substreams, so identical seeds reproduce identical
estimates regardless of how chunks are scheduled.  High thresholds use a
mean-shift importance proposal centered at the closest point of the feasible
region, which keeps the effective sample size usable out to thresholds where
plain sampling would see no hits at all.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, owens_t

from .covariance import _g22_origin, conditional_covariance, sigma_expansion
from .spectral import ordered_eigendecomposition
from .symmetric import matriculate, matriculate_batch

__all__ = [
    "RiceEstimate",
    "ProjectionDiag",
    "InsufficientSamplesError",
    "hessian_index",
    "projection_point",
    "rice_density_mc",
    "rice_density_quadrature",
    "index_ratio_mc",
    "sign_ratio",
    "psi_ratio",
    "maxima_share",
    "mean_critical_density",
]

CHUNK = 1 << 17  # samples per counter-based substream; fixed, scheduler-independent

STREAMS = {
    "density": 11,
    "ratio": 12,
    "psi": 13,
    "share": 14,
    "unconditional": 15,
    "generic": 19,
}


class InsufficientSamplesError(RuntimeError):
    """A ratio denominator collected no mass."""


@dataclass(frozen=True)
class RiceEstimate:
    """Monte Carlo estimate with its provenance."""

    value: float
    stderr: float
    n: int
    seed: int
    k: object            # index, tuple of indices, or a tag like "+", "psi"
    r: float
    u_threshold: float
    n_degenerate: int = 0
    wall_ms: float = 0.0
    extras: dict = field(default_factory=dict, repr=False)

    def to_dict(self, op, params=None):
        rec = {
            "schema": 1,
            "op": op,
            "params": dict(params or {}),
            "value": self.value,
            "stderr": self.stderr,
            "n": self.n,
            "seed": self.seed,
            "wall_ms": self.wall_ms,
        }
        rec["params"].setdefault("r", self.r)
        rec["params"].setdefault("u", self.u_threshold)
        rec["params"].setdefault("k", str(self.k))
        return rec


@dataclass(frozen=True)
class ProjectionDiag:
    """Closest feasible point of the two-threshold region and its Hessian."""

    r: float
    u_threshold: float
    y_hat: np.ndarray
    which: str                 # "face-a", "face-b", or "edge"
    hessian_eigs: np.ndarray

    @property
    def negative_count(self):
        tol = 1e-10 * max(np.abs(self.hessian_eigs).max(), 1.0)
        return int((self.hessian_eigs < -tol).sum())


def hessian_index(mat, tol_factor=1e-10):
    """Number of negative eigenvalues; flags near-singular input.

    Returns (index, degenerate).  Degeneracy (an eigenvalue within
    ``tol_factor`` times the Frobenius norm of zero) is flagged rather than
    raised: it has probability zero under the sampled laws.
    """
    mat = np.asarray(mat, dtype=float)
    eigs = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    tol = tol_factor * max(float(np.linalg.norm(mat)), 1e-300)
    return int((eigs < -tol).sum()), bool((np.abs(eigs) <= tol).any())


def _batch_index(hessians, tol_factor=1e-10):
    """Vectorized index + degeneracy flags for a (m, N, N) batch."""
    eigs = np.linalg.eigvalsh(hessians)
    tol = tol_factor * np.maximum(
        np.sqrt((hessians ** 2).sum(axis=(1, 2))), 1e-300
    )
    idx = (eigs < -tol[:, None]).sum(axis=1)
    degen = (np.abs(eigs) <= tol[:, None]).any(axis=1)
    return idx, degen


# ---------------------------------------------------------------------------
# factors, shifts, and the closed-form prefactor
# ---------------------------------------------------------------------------

def _factor_matrix(model, r, u_dir, which):
    """A factor M with M M^T = Sigma(r u).

    "sqrt" is the symmetric nonnegative square root (continuous in r);
    "eig" is P Lambda^{1/2} from the ordered eigendecomposition.  The two
    differ by an orthogonal right factor, so the induced laws agree.
    """
    sigma = conditional_covariance(model, r, u_dir).sigma
    lam, vec = ordered_eigendecomposition(sigma)
    lam = np.clip(lam, 0.0, None)
    if which == "eig":
        return vec * np.sqrt(lam)[None, :], sigma
    if which == "sqrt":
        return (vec * np.sqrt(lam)[None, :]) @ vec.T, sigma
    raise ValueError(f"unknown factor {which!r} (expected 'sqrt' or 'eig')")


def _projection_from(sigma, factor, u_thr):
    """Projection of the origin onto {y: rows L-1, L of factor both >= u_thr}."""
    L = sigma.shape[0]
    a = sigma[L - 2, L - 2]
    b = sigma[L - 2, L - 1]
    row_a, row_b = factor[L - 2], factor[L - 1]
    cand = []
    if a > 0:
        y = (u_thr / a) * row_a
        cand.append(("face-a", y, float(row_b @ y)))
        y = (u_thr / a) * row_b
        cand.append(("face-b", y, float(row_a @ y)))
    if a + b > 0 and abs(a - b) > 1e-14 * max(abs(a), 1.0):
        y = (u_thr / (a + b)) * (row_a + row_b)
        cand.append(("edge", y, u_thr))
    feas = [
        (np.linalg.norm(y), which, y)
        for which, y, other in cand
        if other >= u_thr - 1e-12 * max(abs(u_thr), 1.0)
    ]
    if not feas:
        raise InsufficientSamplesError("no feasible projection candidate")
    feas.sort(key=lambda t: t[0])
    _, which, y = feas[0]
    return which, y


def projection_point(model, r, u_thr, u_dir=None):
    """Closest point of the two-threshold region in whitened coordinates.

    Uses the symmetric nonnegative square root of Sigma(r) (Sigma0 at r=0)
    and reports which face or edge realizes the minimum together with the
    eigenvalues of the Hessian rebuilt at that point; at least N-1 of them
    are negative whenever the paired-conditioning inequality holds.
    """
    if not u_thr > 0:
        raise ValueError("the projection is defined for positive thresholds")
    if r == 0:
        sigma, _ = sigma_expansion(model, u_dir)
    else:
        sigma = conditional_covariance(model, r, u_dir).sigma
    lam, vec = np.linalg.eigh(sigma)
    root = (vec * np.sqrt(np.clip(lam, 0.0, None))[None, :]) @ vec.T
    which, y_hat = _projection_from(sigma, root, u_thr)
    hess = matriculate(root @ y_hat, model.n_dim)
    return ProjectionDiag(
        r=float(r),
        u_threshold=float(u_thr),
        y_hat=y_hat,
        which=which,
        hessian_eigs=np.linalg.eigvalsh(hess),
    )


def _prefactor(model, r, u_dir, u_thr):
    """Phibar(u)^{-1} p_grad(0)^{-1} p_t(0,0): converts the Gaussian
    expectation into the conditioned critical-point density."""
    n = model.n_dim
    if u_dir is None:
        u_dir = model.axis_direction()
    t = r * np.asarray(u_dir, dtype=float)
    x = r * r
    d1 = model.d1
    cross = -2.0 * model.rho_d1(x) * np.eye(n) - 4.0 * model.rho_d2(x) * np.outer(t, t)
    v22 = np.block([[-2.0 * d1 * np.eye(n), cross], [cross, -2.0 * d1 * np.eye(n)]])
    sign, logdet = np.linalg.slogdet(v22)
    if sign <= 0:
        raise InsufficientSamplesError("gradient covariance is not positive definite")
    p_t00 = math.exp(-0.5 * logdet) / (2.0 * math.pi) ** n
    p_grad0 = (-4.0 * math.pi * d1) ** (-n / 2.0)
    survival = float(ndtr(-u_thr))
    return p_t00 / (p_grad0 * survival)


def _resolve_shift(model, r, u_thr, sigma, factor, shift):
    if isinstance(shift, np.ndarray):
        return shift
    if shift == "none" or (shift == "auto" and u_thr < 2.0):
        return None
    if shift == "auto":
        _, y = _projection_from(sigma, factor, u_thr)
        return y
    raise ValueError(f"unknown shift policy {shift!r}")


# ---------------------------------------------------------------------------
# core accumulation
# ---------------------------------------------------------------------------

def _chunk_rng(seed, stream, chunk):
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(chunk)))
    return np.random.Generator(np.random.Philox(ss))

def _accumulate(model, factor, u_thr, n, seed, stream, shift, antithetic,
                num_sel=None, den_sel=None):
    """One pass over the sample plan.

    ``antithetic`` selects the pairing of each drawn innovation y':
    "negate" pairs y' with -y' (the |det| part is even, so the symmetric
    component of the integrand cancels); "flip" pairs y' with the reflection
    negating the kernel coordinates, which swaps the two determinant-sign
    classes in the r -> 0 limit and all but removes the shared noise from
    sign ratios.  Returns per-index |det|-mass buckets (plus a degenerate
    bucket) and, when ``num_sel``/``den_sel`` are given, pair-level first and
    second moments for delta-method error bars.
    """
    n_dim = model.n_dim
    m = model.vech_dim
    L = m + 2
    if antithetic is True:
        antithetic = "negate"
    half_plan = antithetic in ("negate", "flip")
    n = int(n)
    if half_plan and n % 2:
        n += 1
    rank0 = L - n_dim - 1
    buckets = np.zeros(n_dim + 2)  # index 0..N, then degenerate mass
    counts = np.zeros(n_dim + 2, dtype=np.int64)
    s_a = s_b = s_aa = s_bb = s_ab = 0.0
    n_units = 0
    want_query = num_sel is not None
    num_mask = np.zeros(n_dim + 1, dtype=bool)
    den_mask = np.zeros(n_dim + 1, dtype=bool)
    if want_query:
        num_mask[list(num_sel)] = True
        if den_sel is not None:
            den_mask[list(den_sel)] = True

    done = 0
    chunk_id = 0
    while done < n:
        take = min(CHUNK, n - done)
        rng = _chunk_rng(seed, stream, chunk_id)
        if half_plan:
            innov = rng.standard_normal((take // 2, L))
            partner = -innov
            if antithetic == "flip":
                partner = innov.copy()
                partner[:, rank0:] *= -1.0
            ys = np.concatenate([innov, partner], axis=0)
        else:
            ys = rng.standard_normal((take, L))
        if shift is not None:
            logw = -(ys @ shift) - 0.5 * float(shift @ shift)
            w = np.exp(logw)
            ys = ys + shift
        else:
            w = np.ones(ys.shape[0])
        vals = ys @ factor.T
        hess = matriculate_batch(vals[:, :m], n_dim)
        dets = np.linalg.det(hess)
        idx, degen = _batch_index(hess)
        live = (vals[:, m] > u_thr) & (vals[:, m + 1] > u_thr)
        mass = w * np.abs(dets) * live
        for k in range(n_dim + 1):
            pick = (idx == k) & ~degen
            buckets[k] += mass[pick].sum()
            counts[k] += int((pick & live).sum())
        buckets[-1] += mass[degen].sum()
        counts[-1] += int((degen & live).sum())

        if want_query:
            a = np.where(num_mask[idx] & ~degen, mass, 0.0)
            b = np.where(den_mask[idx] & ~degen, mass, 0.0)
            if half_plan:
                half = take // 2
                a = a[:half] + a[half:]
                b = b[:half] + b[half:]
            s_a += a.sum()
            s_b += b.sum()
            s_aa += (a * a).sum()
            s_bb += (b * b).sum()
            s_ab += (a * b).sum()
            n_units += a.shape[0]
        done += take
        chunk_id += 1

    return {
        "buckets": buckets,
        "counts": counts,
        "n": n,
        "sum_a": s_a,
        "sum_b": s_b,
        "sum_aa": s_aa,
        "sum_bb": s_bb,
        "sum_ab": s_ab,
        "n_units": n_units,
    }


def rice_density_mc(model, r, u_thr, k=None, n=200_000, seed=0, u_dir=None,
                    factor="sqrt", antithetic="negate", shift="auto"):
    """Density of conditioned critical points with index ``k`` above ``u_thr``.

    ``k=None`` places no index restriction.  The value carries the full
    closed-form prefactor; only the absolute level depends on it, every
    ratio estimator cancels it.
    """
    if n <= 0:
        raise ValueError("need a positive sample count")
    t0 = time.perf_counter()
    if antithetic == "flip":
        factor = "eig"
    mat, sigma = _factor_matrix(model, r, u_dir, factor)
    shift_vec = _resolve_shift(model, r, u_thr, sigma, mat, shift)
    sel = tuple(range(model.n_dim + 1)) if k is None else (int(k),)
    if k is not None and not (0 <= k <= model.n_dim):
        est_zero = RiceEstimate(0.0, 0.0, int(n), int(seed), k, float(r), float(u_thr))
        return est_zero
    acc = _accumulate(model, mat, u_thr, n, seed, STREAMS["density"], shift_vec,
                      antithetic, num_sel=sel, den_sel=())
    pref = _prefactor(model, r, u_dir, u_thr)
    n_eff = acc["n"]
    n_units = acc["n_units"]
    mean_unit = acc["sum_a"] / n_eff
    var_unit = max(acc["sum_aa"] / n_units - (acc["sum_a"] / n_units) ** 2, 0.0)
    stderr = pref * math.sqrt(var_unit / n_units) * (n_units / n_eff)
    raw = float(np.sum(acc["buckets"][list(sel)]))
    return RiceEstimate(
        value=pref * raw / n_eff,
        stderr=stderr,
        n=n_eff,
        seed=int(seed),
        k=k,
        r=float(r),
        u_threshold=float(u_thr),
        n_degenerate=int(acc["counts"][-1]),
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extras={"raw_sum": raw, "bucket_sums": acc["buckets"][: model.n_dim + 1].copy(),
                "prefactor": pref, "mean_unit": mean_unit},
    )


def index_ratio_mc(model, r, u_thr, num_indices, den_indices, n=2_000_000, seed=0,
                   u_dir=None, factor="sqrt", antithetic="negate", shift="auto",
                   stream="ratio"):
    """Self-normalized ratio of |det|-masses over two disjoint index classes.

    Numerator and denominator share every sample, so the prefactor and the
    overall normalization cancel exactly; the error bar is the delta-method
    standard error at the antithetic-pair level.  ``antithetic="flip"``
    (which forces the eigen-factor so the kernel coordinates are the last
    N+1) pairs each sample with its class-swapping reflection and resolves
    the small systematic deviation of sign ratios far below plain-sampling
    noise.
    """
    t0 = time.perf_counter()
    if antithetic == "flip":
        factor = "eig"
    mat, sigma = _factor_matrix(model, r, u_dir, factor)
    shift_vec = _resolve_shift(model, r, u_thr, sigma, mat, shift)
    acc = _accumulate(model, mat, u_thr, n, seed, STREAMS[stream], shift_vec,
                      antithetic, num_sel=tuple(num_indices), den_sel=tuple(den_indices))
    # first moments from the per-index buckets, so complementary class
    # selections partition the denominator mass exactly
    num_sum = float(np.sum(acc["buckets"][list(num_indices)]))
    den_sum = float(np.sum(acc["buckets"][list(den_indices)]))
    if den_sum <= 0.0:
        raise InsufficientSamplesError(
            f"denominator saw no mass at r={r}, u={u_thr} with n={acc['n']}"
        )
    ratio = num_sum / den_sum
    var = acc["sum_aa"] - 2.0 * ratio * acc["sum_ab"] + ratio * ratio * acc["sum_bb"]
    stderr = math.sqrt(max(var, 0.0)) / den_sum
    return RiceEstimate(
        value=ratio,
        stderr=stderr,
        n=acc["n"],
        seed=int(seed),
        k=(tuple(num_indices), tuple(den_indices)),
        r=float(r),
        u_threshold=float(u_thr),
        n_degenerate=int(acc["counts"][-1]),
        wall_ms=(time.perf_counter() - t0) * 1e3,
        extras={"num_sum": num_sum, "den_sum": den_sum,
                "bucket_sums": acc["buckets"][: model.n_dim + 1].copy()},
    )


def sign_ratio(model, r, u_thr, n=2_000_000, seed=0, **kw):
    """Positive-determinant to negative-determinant mass ratio (limit 1).

    The determinant sign is (-1)^index, so the classes are the even and odd
    indices.
    """
    evens = tuple(k for k in range(model.n_dim + 1) if k % 2 == 0)
    odds = tuple(k for k in range(model.n_dim + 1) if k % 2 == 1)
    est = index_ratio_mc(model, r, u_thr, evens, odds, n=n, seed=seed,
                         stream="ratio", **kw)
    return RiceEstimate(**{**est.__dict__, "k": "+/-"})


def psi_ratio(model, r, u_thr, n=2_000_000, seed=0, **kw):
    """Mass of indices <= N-2 relative to the top two indices (limit 0 as u grows)."""
    n_dim = model.n_dim
    est = index_ratio_mc(model, r, u_thr, tuple(range(n_dim - 1)),
                         (n_dim - 1, n_dim), n=n, seed=seed, stream="psi", **kw)
    return RiceEstimate(**{**est.__dict__, "k": "psi"})


def maxima_share(model, r, u_thr, n=2_000_000, seed=0, **kw):
    """Share of local maxima among the top two index classes (limit 1/2)."""
    n_dim = model.n_dim
    est = index_ratio_mc(model, r, u_thr, (n_dim,), (n_dim - 1, n_dim),
                         n=n, seed=seed, stream="share", **kw)
    return RiceEstimate(**{**est.__dict__, "k": "share"})


def mean_critical_density(model, k=None, n=500_000, seed=0):
    """Unconditional density (per unit volume) of index-k critical points.

    The gradient and the Hessian at a point are independent, so the density
    is the gradient density at zero times E|det| restricted to the index
    class, with the Hessian drawn from its stationary law.
    """
    t0 = time.perf_counter()
    n_dim = model.n_dim
    g22 = _g22_origin(model.d2, n_dim)
    lam, vec = np.linalg.eigh(g22)
    root = vec * np.sqrt(np.clip(lam, 0.0, None))[None, :]
    p_grad0 = (-4.0 * math.pi * model.d1) ** (-n_dim / 2.0)
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_id = 0
    m = g22.shape[0]
    while done < n:
        take = min(CHUNK, n - done)
        rng = _chunk_rng(seed, STREAMS["unconditional"], chunk_id)
        xs = rng.standard_normal((take, m)) @ root.T
        hess = matriculate_batch(xs, n_dim)
        dets = np.abs(np.linalg.det(hess))
        if k is not None:
            idx, degen = _batch_index(hess)
            dets = np.where((idx == k) & ~degen, dets, 0.0)
        total += dets.sum()
        total_sq += (dets ** 2).sum()
        done += take
        chunk_id += 1
    mean = total / n
    var = max(total_sq / n - mean ** 2, 0.0)
    return RiceEstimate(
        value=p_grad0 * mean,
        stderr=p_grad0 * math.sqrt(var / n),
        n=int(n),
        seed=int(seed),
        k=k,
        r=0.0,
        u_threshold=-math.inf,
        wall_ms=(time.perf_counter() - t0) * 1e3,
    )


# ---------------------------------------------------------------------------
# deterministic quadrature oracle (N = 2)
# ---------------------------------------------------------------------------

def _bvn_cdf(h, k, rho):
    """P(Z1 <= h, Z2 <= k) for standard bivariate normal, via Owen's T."""
    h = np.asarray(h, dtype=float)
    k = np.asarray(k, dtype=float)
    h = np.where(h == 0.0, 1e-13, h)
    k = np.where(k == 0.0, 1e-13, k)
    denom = math.sqrt(max(1.0 - rho * rho, 1e-300))
    ah = (k - rho * h) / (h * denom)
    ak = (h - rho * k) / (k * denom)
    out = 0.5 * (ndtr(h) + ndtr(k)) - owens_t(h, ah) - owens_t(k, ak)
    out = out - np.where(h * k < 0.0, 0.5, 0.0)
    return np.clip(out, 0.0, 1.0)


def _bvn_survival(lo1, lo2, rho):
    """P(Z1 > lo1, Z2 > lo2) = Phi2(-lo1, -lo2, rho)."""
    return _bvn_cdf(-np.asarray(lo1), -np.asarray(lo2), rho)


def _definite_region_integral(sign, sigma, u_thr, n_rad=80, n_t=48):
    """Integral of |det| * P(x,z > u | hessian) over the definite cone.

    Parametrizes {sign*M positive definite} by the diagonal magnitudes and
    the normalized off-diagonal t in (-1, 1); the integrand is smooth there.
    """
    from numpy.polynomial.legendre import leggauss

    sh = sigma[:3, :3]
    cx = sigma[:3, 3:]
    sc = sigma[3:, 3:]
    shi = np.linalg.inv(sh)
    gmat = cx.T @ shi
    s2 = sc - cx.T @ shi @ cx
    sd1, sd2 = math.sqrt(s2[0, 0]), math.sqrt(s2[1, 1])
    eta = s2[0, 1] / (sd1 * sd2)
    det_sh = np.linalg.det(sh)
    norm3 = 1.0 / math.sqrt((2.0 * math.pi) ** 3 * det_sh)

    xg, wg = leggauss(n_rad)
    # map (0,1) -> (0, inf) with a rational transform scaled to the block
    xi = 0.5 * (xg + 1.0)
    wxi = 0.5 * wg
    sa = 3.0 * math.sqrt(sh[0, 0])
    sc_ = 3.0 * math.sqrt(sh[2, 2])
    a_nodes = sa * xi / (1.0 - xi)
    a_w = wxi * sa / (1.0 - xi) ** 2
    c_nodes = sc_ * xi / (1.0 - xi)
    c_w = wxi * sc_ / (1.0 - xi) ** 2
    tg, tw = leggauss(n_t)

    A, C, T = np.meshgrid(a_nodes, c_nodes, tg, indexing="ij")
    WA, WC, WT = np.meshgrid(a_w, c_w, tw, indexing="ij")
    sq = np.sqrt(A * C)
    x1 = sign * A
    x3 = sign * C
    x2 = T * sq
    det = A * C * (1.0 - T * T)
    pts = np.stack([x1, x2, x3], axis=-1).reshape(-1, 3)
    quad = np.einsum("si,ij,sj->s", pts, shi, pts)
    dens = norm3 * np.exp(-0.5 * quad)
    mu = pts @ gmat.T
    surv = _bvn_survival((u_thr - mu[:, 0]) / sd1, (u_thr - mu[:, 1]) / sd2, eta)
    vals = det.reshape(-1) * dens * surv * sq.reshape(-1)
    return float((vals * (WA * WC * WT).reshape(-1)).sum())


def _total_integral(sigma, u_thr, n_gh=40):
    """Integral of |det| * P(x,z > u | hessian) with no index restriction."""
    from numpy.polynomial.hermite_e import hermegauss

    sh = sigma[:3, :3]
    cx = sigma[:3, 3:]
    sc = sigma[3:, 3:]
    shi = np.linalg.inv(sh)
    gmat = cx.T @ shi
    s2 = sc - cx.T @ shi @ cx
    sd1, sd2 = math.sqrt(s2[0, 0]), math.sqrt(s2[1, 1])
    eta = s2[0, 1] / (sd1 * sd2)
    chol = np.linalg.cholesky(sh)
    nodes, weights = hermegauss(n_gh)
    weights = weights / math.sqrt(2.0 * math.pi)
    W1, W2, W3 = np.meshgrid(nodes, nodes, nodes, indexing="ij")
    ww = (
        np.meshgrid(weights, weights, weights, indexing="ij")[0]
        * np.meshgrid(weights, weights, weights, indexing="ij")[1]
        * np.meshgrid(weights, weights, weights, indexing="ij")[2]
    )
    w = np.stack([W1, W2, W3], axis=-1).reshape(-1, 3)
    pts = w @ chol.T
    det = np.abs(pts[:, 0] * pts[:, 2] - pts[:, 1] ** 2)
    mu = pts @ gmat.T
    surv = _bvn_survival((u_thr - mu[:, 0]) / sd1, (u_thr - mu[:, 1]) / sd2, eta)
    return float((det * surv * ww.reshape(-1)).sum())


def rice_density_quadrature(model, r, u_thr, k, n_rad=80, n_t=48, n_gh=40):
    """Deterministic tensor-quadrature oracle for the N=2 density.

    Definite index classes (0 and 2) integrate over an exact parametrization
    of the positive/negative-definite cone; the saddle class comes from the
    unrestricted integral minus the definite ones.  Shares nothing with the
    Monte Carlo path except the conditional covariance itself.
    """
    if model.n_dim != 2:
        raise ValueError("the quadrature oracle is implemented for N=2 only")
    sigma = conditional_covariance(model, r).sigma
    pref = _prefactor(model, r, None, u_thr)
    if k == 2:
        raw = _definite_region_integral(-1.0, sigma, u_thr, n_rad, n_t)
    elif k == 0:
        raw = _definite_region_integral(+1.0, sigma, u_thr, n_rad, n_t)
    elif k == 1:
        raw = (
            _total_integral(sigma, u_thr, n_gh)
            - _definite_region_integral(-1.0, sigma, u_thr, n_rad, n_t)
            - _definite_region_integral(+1.0, sigma, u_thr, n_rad, n_t)
        )
    elif k is None:
        raw = _total_integral(sigma, u_thr, n_gh)
    else:
        raise ValueError("k must be one of 0, 1, 2, or None")
    return RiceEstimate(
        value=pref * raw,
        stderr=0.0,
        n=n_rad * n_rad * n_t if k in (0, 2) else n_gh ** 3,
        seed=0,
        k=k,
        r=float(r),
        u_threshold=float(u_thr),
    )
