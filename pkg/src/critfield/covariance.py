"""
Exact covariance machinery for the conditioned second-order structure.

The central object is the L x L covariance matrix Sigma(t), L = N(N+1)/2 + 2,
of (vech Hessian at t, field at t, field at 0) given that the gradient
vanishes at both t and 0.  It is assembled in closed form from the radial
profile's derivatives, and independently by a generic Schur complement of the
full joint covariance with all derivatives of rho taken by finite
differences; the two routes cross-check each other.  The r -> 0 expansion
Sigma = Sigma0 + Sigma2 r^2 + o(r^2) is also provided in closed form.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .models import RadialModel
from .symmetric import matriculate, vech_indices, vech_len

__all__ = [
    "CondCov",
    "SingularConditioningError",
    "cov_partials",
    "conditional_covariance",
    "conditional_covariance_oracle",
    "sigma_expansion",
    "QualReport",
    "ConditionCheck",
    "check_qualified",
]


class SingularConditioningError(RuntimeError):
    """Conditioning on the two gradients is numerically singular."""


@dataclass(frozen=True)
class CondCov:
    """Conditional covariance Sigma(r u) with its provenance.

    ``sigma`` is ordered as (vech Hessian at ru, X(ru), X(0)); the last two
    rows/columns are the field values at the two points.
    """

    n_dim: int
    L: int
    sigma: np.ndarray
    t_norm: float
    direction: np.ndarray

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.sigma)

    def is_positive_semidefinite(self, tol_factor=1e-10):
        """Nonnegative spectrum up to a trace-relative floor (floating-point Schur)."""
        eigs = self.eigenvalues()
        return bool(eigs.min() >= -tol_factor * max(self.sigma.trace(), 1.0))


# ---------------------------------------------------------------------------
# partial derivatives of the covariance function R(t) = rho(||t||^2)
# ---------------------------------------------------------------------------

def _central_stencil(k, npts):
    """Offsets and weights of the symmetric npts-point stencil for d^k/dh^k."""
    half = npts // 2
    offs = np.arange(-half, half + 1)
    vand = np.vander(offs, npts, increasing=True).T.astype(float)
    rhs = np.zeros(npts)
    rhs[k] = math.factorial(k)
    return offs, np.linalg.solve(vand, rhs)


def fd_derivative(f, x, k, base_step=None, n_points=9, n_levels=7):
    """k-th derivative of f at x >= 0 by finite differences in x.

    The stencil is shifted to stay inside [0, inf); a ladder of shrinking
    steps is evaluated and the rung with the best successive agreement is
    returned.  Adequate for low orders; the conditional-covariance oracle
    uses the boundary-free scheme in :class:`_RadialDerivativesFD` instead.
    """
    if base_step is None:
        base_step = 0.08 * max(1.0, abs(x))
    half = n_points // 2
    estimates = []
    h = base_step
    offs0, _ = _central_stencil(k, n_points)
    for _ in range(n_levels):
        shift = min(half, int(math.floor(x / h + 1e-12)))
        nodes = x + h * (offs0 + (half - shift))
        vand = np.vander(nodes - x, n_points, increasing=True).T
        rhs = np.zeros(n_points)
        rhs[k] = math.factorial(k)
        w = np.linalg.solve(vand, rhs)
        estimates.append(float(np.dot(w, [f(v) for v in nodes])))
        h /= 1.8
    diffs = np.abs(np.diff(estimates))
    return estimates[int(np.argmin(diffs)) + 1]


def _ladder_1d(g, center, k, eta0, npts, nlev, shrink, nrich=1):
    """Derivative of g (defined on all of R) at ``center`` via a step ladder
    with Richardson acceleration and best-agreement selection."""
    offs, w = _central_stencil(k, npts)
    p = npts - k
    p = p if p % 2 == 0 else p + 1
    ests = []
    for i in range(nlev):
        h = eta0 / shrink ** i
        ests.append(float(np.dot(w, [g(center + o * h) for o in offs])) / h ** k)
    ests = np.array(ests)
    for _ in range(nrich):
        ests = (ests[1:] * shrink ** p - ests[:-1]) / (shrink ** p - 1)
        p += 2
    return ests[int(np.argmin(np.abs(np.diff(ests)))) + 1]


def _neville_to_zero(xs, fs):
    """Polynomial extrapolation of samples (x_j, f_j) to x = 0."""
    vals = list(fs)
    n = len(vals)
    for m in range(1, n):
        vals = [
            (xs[i + m] * vals[i] - xs[i] * vals[i + 1]) / (xs[i + m] - xs[i])
            for i in range(n - m)
        ]
    return vals[0]


class _RadialDerivativesFD:
    """rho', rho'', rho''' from values of rho alone, without boundary stencils.

    Works on the isotropic embedding T(t) = rho(||t||^2), which is smooth on
    all of R^3 regardless of the model dimension, so every stencil is
    central.  Specific low-order shapes isolate each radial derivative with
    at most one inverse power of the evaluation radius:

      d/dt1 T            at (s,0,0) = 2 s rho'(s^2)
      d^2/dt1^2 d/dt2 T  at (0,s,0) = 4 s rho''(s^2)
      d^3/dt1^3 T        at (s,0,0) = 12 s rho''(s^2) + 8 s^3 rho'''(s^2)

    At x = 0 the first two come from pure/mixed even stencils at the origin
    (2 rho'(0) and 4 rho''(0) respectively); the third is extrapolated.
    """

    def __init__(self, rho):
        self._rho = rho
        self._cache = {}

    def __call__(self, x, k):
        key = (round(float(x), 15), k)
        if key not in self._cache:
            self._cache[key] = self._compute(float(x), k)
        return self._cache[key]

    def _compute(self, x, k):
        rho = self._rho
        if k == 0:
            return float(rho(x))
        if k == 4:
            raise ValueError("fourth radial derivative not provided by the FD oracle")
        if k > 4:
            raise ValueError(f"derivative order {k} not available")
        if x <= 0.0:
            return self._origin(k)
        s = math.sqrt(x)
        if k == 1:
            val = _ladder_1d(lambda a: rho(a * a), s, 1, 0.3, 9, 8, 1.5)
            return val / (2.0 * s)
        if k == 2:
            shrink = 1.25
            ests = np.array(
                [_ladder_eval_mixed(rho, s, 0.3 / shrink ** i) for i in range(16)]
            )
            p = 8
            for _ in range(2):
                ests = (ests[1:] * shrink ** p - ests[:-1]) / (shrink ** p - 1)
                p += 2
            best = int(np.argmin(np.abs(np.diff(ests)))) + 1
            return ests[best] / (4.0 * s)
        # k == 3: dense ladder; the Schur complement amplifies this entry by
        # ~1/r near the origin, so it carries the tightest budget.
        r111 = _ladder_1d(lambda a: rho(a * a), s, 3, 0.3, 9, 22, 1.15, nrich=3)
        return (r111 - 12.0 * s * self(x, 2)) / (8.0 * x * s)

    def _origin(self, k):
        rho = self._rho
        if k == 1:
            return _ladder_1d(lambda a: rho(a * a), 0.0, 2, 0.35, 9, 9, 1.5) / 2.0
        if k == 2:
            offs, w = _central_stencil(2, 13)
            ests = []
            shrink = 1.3
            for i in range(12):
                h = 0.5 / shrink ** i
                tot = 0.0
                for a in range(13):
                    for b in range(13):
                        ww = w[a] * w[b]
                        if ww != 0.0:
                            tot += ww * rho((offs[a] * h) ** 2 + (offs[b] * h) ** 2)
                ests.append(tot / h ** 4)
            ests = np.array(ests)
            p = 12
            for _ in range(3):
                ests = (ests[1:] * shrink ** p - ests[:-1]) / (shrink ** p - 1)
                p += 2
            return ests[int(np.argmin(np.abs(np.diff(ests)))) + 1] / 4.0
        # k == 3: extrapolate samples of rho''' along a shrinking radius
        ws = [0.4 / 1.35 ** j for j in range(8)]
        return _neville_to_zero([w * w for w in ws], [self(w * w, 3) for w in ws])


def _ladder_eval_mixed(rho, s, h):
    """d^2/da^2 d/db of rho(a^2 + b^2) at (0, s) for a single step h."""
    offs2, w2 = _central_stencil(2, 9)
    offs1, w1 = _central_stencil(1, 9)
    tot = 0.0
    for ia, wa in zip(offs2, w2):
        for ib, wb in zip(offs1, w1):
            ww = wa * wb
            if ww != 0.0:
                tot += ww * rho((ia * h) ** 2 + (s + ib * h) ** 2)
    return tot / h ** 3


def _analytic_rho_derivs(model):
    """rho^{(k)} evaluator backed by the model's closures (k <= 3)."""
    funcs = (model.rho, model.rho_d1, model.rho_d2, model.rho_d3)

    def rder(x, k):
        if k <= 3:
            return float(funcs[k](x))
        if k == 4:
            # The model carries three derivative closures; the fourth is the
            # first derivative of the last one, taken numerically.
            return fd_derivative(model.rho_d3, x, 1)
        raise ValueError(f"derivative order {k} not available")

    return rder


def _partial(rder, t, idx):
    """R_{i_1 ... i_k}(t) for 0-based direction indices, order <= 4."""
    t = np.asarray(t, dtype=float)
    x = float(t @ t)
    k = len(idx)
    if k == 0:
        return rder(x, 0)
    if k == 1:
        return 2.0 * t[idx[0]] * rder(x, 1)
    if k == 2:
        i, j = idx
        return 2.0 * rder(x, 1) * (i == j) + 4.0 * t[i] * t[j] * rder(x, 2)
    if k == 3:
        i, j, l = idx
        lin = t[l] * (i == j) + t[i] * (j == l) + t[j] * (i == l)
        out = 4.0 * lin * rder(x, 2) if lin != 0.0 else 0.0
        cub = t[i] * t[j] * t[l]
        if cub != 0.0:
            out += 8.0 * cub * rder(x, 3)
        return out
    if k == 4:
        i, j, l, m = idx
        dd = (i == j) * (l == m) + (j == l) * (i == m) + (i == l) * (j == m)
        tt = (
            t[l] * t[m] * (i == j)
            + t[i] * t[m] * (j == l)
            + t[j] * t[m] * (i == l)
            + t[j] * t[l] * (i == m)
            + t[i] * t[l] * (j == m)
            + t[i] * t[j] * (l == m)
        )
        out = 4.0 * dd * rder(x, 2) if dd != 0 else 0.0
        if tt != 0.0:
            out += 8.0 * tt * rder(x, 3)
        quart = t[i] * t[j] * t[l] * t[m]
        if quart != 0.0:
            out += 16.0 * quart * rder(x, 4)
        return out
    raise ValueError(f"unsupported order {k}")


def cov_partials(model, t, multi_index):
    """Partial derivative R_{i_1 ... i_k}(t) of R(t) = rho(||t||^2).

    ``multi_index`` holds 1-based direction indices; orders up to 4 are
    supported (order 4 away from the origin differentiates the third
    derivative closure numerically once).  The order-6 value at the origin
    with all six indices equal is also available: it equals 120 rho'''(0),
    i.e. minus the variance of the third axial derivative of the field.
    """
    t = np.asarray(t, dtype=float)
    if t.shape != (model.n_dim,):
        raise ValueError(f"t must have shape ({model.n_dim},)")
    idx = tuple(int(i) - 1 for i in multi_index)
    if any(i < 0 or i >= model.n_dim for i in idx):
        raise ValueError(f"direction indices out of range 1..{model.n_dim}")
    if len(idx) == 6:
        if len(set(idx)) == 1 and not t.any():
            return 120.0 * model.d3
        raise ValueError("order-6 partials only at t=0 with all indices equal")
    if len(idx) > 4:
        raise ValueError(f"unsupported order {len(idx)}")
    return _partial(_analytic_rho_derivs(model), t, idx)


# ---------------------------------------------------------------------------
# closed-form conditional covariance
# ---------------------------------------------------------------------------

def _resolve_direction(model, u):
    if u is None:
        return model.axis_direction()
    u = np.asarray(u, dtype=float)
    if u.shape != (model.n_dim,):
        raise ValueError(f"direction must have shape ({model.n_dim},)")
    nrm = np.linalg.norm(u)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector, got norm {nrm}")
    return u


def _g21_matrix(rder, t, n_dim):
    """Third-order block: rows over vech positions, columns over directions."""
    rows, cols = vech_indices(n_dim)
    x = float(t @ t)
    p2, p3 = rder(x, 2), rder(x, 3)
    out = np.empty((len(rows), n_dim))
    for a, (i, j) in enumerate(zip(rows.tolist(), cols.tolist())):
        for k in range(n_dim):
            lin = t[k] * (i == j) + t[i] * (j == k) + t[j] * (i == k)
            out[a, k] = 4.0 * lin * p2 + 8.0 * t[i] * t[j] * t[k] * p3
    return out


def _g22_origin(d2, n_dim):
    rows, cols = vech_indices(n_dim)
    m = len(rows)
    out = np.empty((m, m))
    for a in range(m):
        i1, j1 = int(rows[a]), int(cols[a])
        for b in range(m):
            i2, j2 = int(rows[b]), int(cols[b])
            dd = (
                (i1 == j1) * (i2 == j2)
                + (i2 == j1) * (i1 == j2)
                + (i1 == i2) * (j1 == j2)
            )
            out[a, b] = 4.0 * d2 * dd
    return out


def conditional_covariance(model, r, u=None):
    """Sigma(r u) assembled from the closed-form blocks.

    Raises :class:`SingularConditioningError` when the gradient-gradient
    block cannot be inverted (1 - k1^2 <= 0 or 1 - k*^2 <= 0), which the
    qualification conditions rule out inside the validity radius.
    """
    if not r > 0:
        raise ValueError("r must be positive; use sigma_expansion for the r=0 limit")
    u = _resolve_direction(model, u)
    n, m = model.n_dim, model.vech_dim
    L = m + 2
    t = r * u
    x = r * r
    d10 = model.d1
    p0, p1, p2 = model.rho(x), model.rho_d1(x), model.rho_d2(x)

    # One-sided factorizations 1 - k^2 = (1 - k)(1 + k) with the differences
    # evaluated through the stable increment closure; the naive forms lose
    # most of their precision once r^2 approaches machine epsilon scale.
    k1 = p1 / d10
    k2 = 2.0 * p2 / d10
    kstar = k1 + k2 * x
    one_minus_k1 = -model.d1_increment(x) / d10
    one_minus_kstar = one_minus_k1 - k2 * x
    q1 = one_minus_k1 * (1.0 + k1)          # 1 - k1^2
    qstar = one_minus_kstar * (1.0 + kstar)  # 1 - k*^2
    if q1 <= 0.0 or qstar <= 0.0:
        raise SingularConditioningError(
            f"gradient conditioning singular at r={r}: 1-k1^2={q1:.3e}, 1-k*^2={qstar:.3e}"
        )
    k4 = k2 * (k1 + kstar) / qstar
    k5 = k2 * (1.0 + k1 * kstar) / qstar
    cfac = 1.0 / (2.0 * d10 * q1)

    rder = _analytic_rho_derivs(model)
    g21 = _g21_matrix(rder, t, n)
    g21t = g21 @ t

    rows, cols = vech_indices(n)
    g20_0 = 2.0 * d10 * (rows == cols).astype(float)
    g20_t = 2.0 * p1 * (rows == cols) + 4.0 * t[rows] * t[cols] * p2

    sigma = np.empty((L, L))
    sigma[:m, :m] = (
        _g22_origin(model.d2, n)
        + cfac * (g21 @ g21.T)
        + cfac * k4 * np.outer(g21t, g21t)
    )
    side_a = g20_0 + 2.0 * p1 * cfac * (1.0 + k4 * x) * g21t
    side_b = g20_t + 2.0 * p1 * cfac * (k1 + k5 * x) * g21t
    sigma[:m, m] = side_a
    sigma[m, :m] = side_a
    sigma[:m, m + 1] = side_b
    sigma[m + 1, :m] = side_b
    sigma[m, m] = sigma[m + 1, m + 1] = 1.0 + cfac * 4.0 * p1 * p1 * x * (1.0 + k4 * x)
    sigma[m, m + 1] = sigma[m + 1, m] = p0 + cfac * 4.0 * p1 * p1 * x * (k1 + k5 * x)

    asym = np.abs(sigma - sigma.T).max()
    if asym > 1e-12 * max(np.abs(sigma).max(), 1.0):
        raise AssertionError(f"assembled covariance asymmetric by {asym}")
    sigma = 0.5 * (sigma + sigma.T)
    return CondCov(n_dim=n, L=L, sigma=sigma, t_norm=r, direction=u)


def conditional_covariance_oracle(model, r, u=None):
    """Independent route to Sigma(r u): joint covariance + generic Schur.

    The joint covariance of (vech Hessian at t, X(t), X(0), grad X(t),
    grad X(0)) is filled from partial derivatives of R computed by finite
    differences of rho alone, then conditioned on the two gradients by a
    generic Schur complement.  None of the k-coefficients of the closed form
    are used.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    u = _resolve_direction(model, u)
    n, m = model.n_dim, model.vech_dim
    L = m + 2
    t = r * u
    rder = _RadialDerivativesFD(model.rho)

    # Component labels: (multi-index, at-point), at-point in {1: t, 0: origin}.
    rows_h, cols_h = vech_indices(n)
    comps = [((int(i), int(j)), 1) for i, j in zip(rows_h, cols_h)]
    comps += [((), 1), ((), 0)]
    comps += [((k,), 1) for k in range(n)]
    comps += [((k,), 0) for k in range(n)]
    dim = L + 2 * n

    # Memoize on (sorted multi-index, separation) since R's partials are
    # symmetric in their indices.
    cache = {}

    def entry(a_idx, a_pt, b_idx, b_pt):
        sep = a_pt - b_pt  # 1: t, 0: coincident, -1: -t
        key = (tuple(sorted(a_idx + b_idx)), abs(sep))
        if key not in cache:
            arg = t if sep != 0 else np.zeros(n)
            cache[key] = _partial(rder, arg, key[0])
        val = cache[key]
        if sep < 0:
            val *= (-1.0) ** (len(a_idx) + len(b_idx))
        return (-1.0) ** len(b_idx) * val

    joint = np.empty((dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            (ai, ap), (bi, bp) = comps[a], comps[b]
            joint[a, b] = joint[b, a] = entry(ai, ap, bi, bp)

    v11 = joint[:L, :L]
    v12 = joint[:L, L:]
    v22 = joint[L:, L:]
    sv = np.linalg.svd(v22, compute_uv=False)
    if sv.min() <= 1e-14 * sv.max():
        raise SingularConditioningError(
            f"gradient block numerically singular at r={r} (cond={sv.max() / sv.min():.2e})"
        )
    sigma = v11 - v12 @ np.linalg.solve(v22, v12.T)
    sigma = 0.5 * (sigma + sigma.T)
    return CondCov(n_dim=n, L=L, sigma=sigma, t_norm=r, direction=u)


def sigma_expansion(model, u=None):
    """Closed-form coefficients (Sigma0, Sigma2) of Sigma(ru) = Sigma0 + Sigma2 r^2 + o(r^2)."""
    u = _resolve_direction(model, u)
    n, m = model.n_dim, model.vech_dim
    L = m + 2
    d1, d2 = model.d1, model.d2
    alpha, beta = model.alpha, model.beta
    ap = d2                       # alpha'
    bp = d1 * model.d3 / d2       # beta'

    rows, cols = vech_indices(n)
    s0 = np.zeros((L, L))
    s2 = np.zeros((L, L))
    for a in range(m):
        i1, j1 = int(rows[a]), int(cols[a])
        u1, v1 = float(u[i1]), float(u[j1])
        for b in range(m):
            i2, j2 = int(rows[b]), int(cols[b])
            u2, v2 = float(u[i2]), float(u[j2])
            s0[a, b] = 4.0 * d2 * (
                (i2 == j1) * (i1 == j2)
                + (i1 == i2) * (j1 == j2)
                - (j1 == j2) * u1 * u2
                - (i1 == j2) * v1 * u2
                - (i2 == j1) * u1 * v2
                - (i1 == i2) * v1 * v2
                + 2.0 * u1 * v1 * u2 * v2
            ) + (8.0 / 3.0) * d2 * ((i1 == j1) - u1 * v1) * ((i2 == j2) - u2 * v2)
            s2[a, b] = (
                (2.0 * alpha - 14.0 * beta / 9.0) * (i1 == j1) * (i2 == j2)
                + (4.0 * alpha - 52.0 * beta / 9.0)
                * ((i2 == j2) * u1 * v1 + (i1 == j1) * u2 * v2)
                + (2.0 * alpha - 6.0 * beta)
                * (
                    (j1 == j2) * u1 * u2
                    + (i1 == j2) * v1 * u2
                    + (i2 == j1) * u1 * v2
                    + (i1 == i2) * v1 * v2
                )
                + (64.0 / 9.0) * beta * u1 * v1 * u2 * v2
            )
        side0 = (4.0 / 3.0) * d1 * ((i1 == j1) - u1 * v1)
        side2 = (ap / 3.0 - bp / 9.0) * (i1 == j1) + (2.0 * ap / 3.0 - 14.0 * bp / 9.0) * u1 * v1
        for col in (m, m + 1):
            s0[a, col] = s0[col, a] = side0
            s2[a, col] = s2[col, a] = side2
    corner0 = 1.0 - d1 * d1 / (3.0 * d2)
    corner2 = -d1 / 6.0 + (5.0 / 18.0) * d1 * d1 * model.d3 / (d2 * d2)
    s0[m:, m:] = corner0
    s2[m:, m:] = corner2
    return s0, s2


# ---------------------------------------------------------------------------
# qualification report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionCheck:
    name: str
    passed: bool
    value: float
    detail: str = ""


@dataclass(frozen=True)
class QualReport:
    model_name: str
    n_dim: int
    checks: tuple = field(default_factory=tuple)

    @property
    def overall_pass(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return {
            "model": self.model_name,
            "N": self.n_dim,
            "overall_pass": self.overall_pass,
            "checks": [
                {"name": c.name, "passed": c.passed, "value": c.value, "detail": c.detail}
                for c in self.checks
            ],
        }


def check_qualified(model, n_grid=256, probe_radii=(0.25, 0.5, 1.0)):
    """Evaluate the regularity conditions on the profile and report each one.

    Scalar inequalities are checked on a grid of ``n_grid`` log-spaced points
    in (0, delta^2].  The joint non-degeneracy condition has no closed form
    for general profiles; it is probed through the smallest eigenvalue of the
    assembled joint covariance at a few radii.
    """
    checks = []
    d1, d2, d3 = model.d1, model.d2, model.d3
    r0 = float(model.rho(0.0))
    checks.append(ConditionCheck("unit_variance", abs(r0 - 1.0) <= 1e-9, r0, "rho(0)"))
    checks.append(ConditionCheck("d1_negative", d1 < 0.0, d1, "rho'(0)"))
    checks.append(ConditionCheck("d2_positive", d2 > 0.0, d2, "rho''(0)"))
    checks.append(ConditionCheck("d3_negative", d3 < 0.0, d3, "rho'''(0)"))

    alpha, beta = model.alpha, model.beta
    margin = alpha - 5.0 * beta / 3.0
    checks.append(
        ConditionCheck(
            "deriv_cauchy_schwarz", margin > 0.0, margin, "alpha - 5 beta / 3"
        )
    )
    n = model.n_dim
    ratio = d2 / d1 ** 2 - n / (n + 2.0)
    checks.append(
        ConditionCheck(
            "curvature_ratio", ratio > 0.0, ratio, "rho''(0)/rho'(0)^2 - N/(N+2)"
        )
    )

    delta2 = model.validity_radius ** 2
    grid = np.geomspace(1e-8 * delta2, delta2, n_grid)
    p1 = np.array([model.rho_d1(x) for x in grid])
    p2 = np.array([model.rho_d2(x) for x in grid])
    grad_margin = float((-d1 - np.abs(p1)).min())
    checks.append(
        ConditionCheck(
            "gradient_bound", grad_margin > 0.0, grad_margin,
            "min over (0, delta^2] of -rho'(0) - |rho'(x)|",
        )
    )
    gc2_quad = float((d1 * d1 - (p1 * p1 + 2.0 * p1 * p2 * grid + 4.0 * p2 * p2 * grid * grid)).min())
    gc2_sign = float((-p1).min())
    gc2_margin = min(gc2_quad, gc2_sign)
    checks.append(
        ConditionCheck(
            "paired_conditioning", gc2_margin > 0.0, gc2_margin,
            "min margin of rho'(x)<0 and quadratic gradient bound (both points)",
        )
    )

    # Fourth-derivative increment |R_4(0) - R_4(t)| <= C ||t|| on shrinking t,
    # as a numeric smoothness proxy; the increment is actually O(||t||^2) for
    # smooth profiles, so the ratio to ||t|| must stay bounded.
    u0 = model.axis_direction()
    patterns = [(1, 1, 1, 1), (1, 1, 2, 2), (1, 2, 1, 2), (n, n, n, n)]
    base = {p: cov_partials(model, np.zeros(n), p) for p in patterns}
    ratios = []
    for k in range(1, 9):
        tk = model.validity_radius * 0.5 ** k
        diff = max(abs(cov_partials(model, tk * u0, p) - base[p]) for p in patterns)
        ratios.append(diff / tk)
    bound = max(1.0, 2.0 * ratios[0])
    checks.append(
        ConditionCheck(
            "fourth_increment", max(ratios) <= bound, max(ratios),
            "max over shrinking t of |R4(0)-R4(t)|/||t||",
        )
    )

    # Joint non-degeneracy probe: smallest eigenvalue of the conditioned
    # covariance at sampled radii, relative to its trace.
    worst = np.inf
    ok = True
    for frac in probe_radii:
        r = frac * model.validity_radius
        try:
            cc = conditional_covariance(model, r, u0)
        except SingularConditioningError:
            ok = False
            worst = -np.inf
            break
        rel = cc.eigenvalues().min() / max(cc.sigma.trace(), 1.0)
        worst = min(worst, rel)
    ok = ok and worst > 1e-12
    checks.append(
        ConditionCheck(
            "joint_nondegenerate", bool(ok), float(worst),
            "min relative eigenvalue of Sigma(r) at sampled radii",
        )
    )
    return QualReport(model_name=model.name, n_dim=model.n_dim, checks=tuple(checks))
