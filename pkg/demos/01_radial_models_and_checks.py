"""
Radial covariance models and their regularity report.

A field model is four closures: the radial profile rho (a function of the
squared distance) and its first three derivatives.  Everything downstream is
driven by the values of those derivatives at zero, so the first thing to do
with any profile is run the qualification report: derivative signs, the
moment inequality linking the first and third derivatives, the curvature
ratio bound, and grid checks of the gradient-correlation inequalities.
"""

import numpy as np

from critfield import cauchy_model, check_qualified, gaussian_model
from critfield.models import RadialModel, rescale

print("=== built-in families ===")
for model in (gaussian_model(2), gaussian_model(3, a=2.0), cauchy_model(2, ell=1.0, nu=2.0)):
    print(f"\n{model.name}  (N={model.n_dim})")
    print(f"  rho'(0) = {model.d1:+.3f}   rho''(0) = {model.d2:+.3f}   "
          f"rho'''(0) = {model.d3:+.3f}")
    print(f"  correlation length = {model.correlation_length:.4f}")
    report = check_qualified(model)
    for check in report.checks:
        flag = "ok " if check.passed else "FAIL"
        print(f"  [{flag}] {check.name:22s} value={check.value:+.4e}  ({check.detail})")
    print(f"  overall: {'qualified' if report.overall_pass else 'rejected'}")

print("\n=== a profile that fails the curvature bound ===")
# pin rho''(0) exactly at the lower bound N/(N+2) * rho'(0)^2: the strict
# inequality fails and the report names the condition
n = 2
d1, d3 = -1.0, -2.0
d2 = n / (n + 2.0)
boundary = RadialModel(
    n_dim=n,
    rho=lambda x: 1.0 + d1 * x + d2 * x ** 2 / 2 + d3 * x ** 3 / 6,
    rho_d1=lambda x: d1 + d2 * x + d3 * x ** 2 / 2,
    rho_d2=lambda x: d2 + d3 * x,
    rho_d3=lambda x: d3,
    validity_radius=0.3,
    name="curvature-boundary",
)
report = check_qualified(boundary)
print(f"failed conditions: {report.failed()}")

print("\n=== rescaling ===")
# squeezing the argument multiplies the k-th derivative by C^k
model = gaussian_model(3)
scaled = rescale(model, 4.0)
print(f"{model.name}: rho''(0) = {model.d2}")
print(f"{scaled.name}: rho''(0) = {scaled.d2}  (x 4^2)")
