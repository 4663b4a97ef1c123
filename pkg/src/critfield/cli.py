"""
Batch front door: model configuration, command dispatch, sweep orchestration.

Configuration comes from an optional JSON file plus flag overrides (flags
win).  Every artifact embeds the fully resolved configuration and the root
seed.  Exit codes: 0 success, 2 configuration/validation failure, 3
numerical-contract failure (a verification miss or a conditioning error).
"""

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import io as cfio
from .covariance import (SingularConditioningError, check_qualified,
                         conditional_covariance, conditional_covariance_oracle,
                         sigma_expansion)
from .fieldsim import (EmbeddingError, GridSpec, euler_characteristic,
                       find_critical_points, pair_statistics, sample_field)
from .models import model_from_spec
from .rice import (InsufficientSamplesError, maxima_share, psi_ratio,
                   sign_ratio)
from .spectral import (EigenpathError, EigenvalueCollisionError, eigenpath,
                       limit_polynomial, spectrum_sigma0)

COMMANDS = ("check", "sigma", "spectrum", "hpoly", "ratio", "psi", "share",
            "simulate", "report")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str = ""
    model_family: str = "gaussian"
    model_params: dict = field(default_factory=dict)
    n_dim: int = 2
    scale: float = 1.0
    r_list: tuple = (0.1,)
    u_list: tuple = (1.0,)
    mc_n: int = 2_000_000
    seed: int = 0
    shards: int = 1
    sim_grid: int = 128
    sim_spacing: float = 11.3 / 128
    sim_realizations: int = 200
    sim_eps: float = 0.5        # in correlation lengths
    out_dir: str = "."
    out_format: str = "json"
    verify: bool = False
    tol: float = 1e-8
    n_poly_samples: int = 10_000

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.r_list:
            raise ConfigError("r list must be nonempty")
        if not self.u_list:
            raise ConfigError("u list must be nonempty")
        if self.mc_n < 1:
            raise ConfigError("mc.n must be positive")
        if self.out_format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.n_dim < 2:
            raise ConfigError("N must be >= 2")
        return self

    def build_model(self):
        return model_from_spec(
            self.model_family, self.n_dim, scale=self.scale, **self.model_params
        )

    def to_dict(self):
        return asdict(self)

    def to_file_dict(self):
        """The config-file representation; feeding it back reproduces the run."""
        return {
            "schema": 1,
            "command": self.command,
            "model": {
                "family": self.model_family,
                "params": dict(self.model_params),
                "N": self.n_dim,
                "scale": self.scale,
            },
            "r": list(self.r_list),
            "u": list(self.u_list),
            "mc": {"n": self.mc_n, "seed": self.seed, "shards": self.shards},
            "sim": {
                "grid": self.sim_grid,
                "spacing": self.sim_spacing,
                "realizations": self.sim_realizations,
                "eps": self.sim_eps,
            },
            "output": {"path": self.out_dir, "format": self.out_format},
            "verify": self.verify,
            "tol": self.tol,
        }


def _parse_model(spec):
    """'gaussian:a=1' or 'cauchy:ell=1,nu=2' -> (family, params)."""
    family, _, rest = spec.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not key or not val:
                raise ConfigError(f"malformed model parameter {item!r}")
            params[key.strip()] = float(val)
    return family.strip().lower(), params


def _parse_floats(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"malformed list {text!r}") from exc


def load_config(path):
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    model = raw.get("model", {})
    if "model" in raw and not isinstance(model, dict):
        raise ConfigError("config 'model' must be an object")
    if "model" in raw and "family" not in model:
        raise ConfigError("config model requires a 'family'")
    mc = raw.get("mc", {})
    sim = raw.get("sim", {})
    out = raw.get("output", {})
    return RunConfig(
        command=raw.get("command", ""),
        model_family=model.get("family", "gaussian"),
        model_params=dict(model.get("params", {})),
        n_dim=int(model.get("N", 2)),
        scale=float(model.get("scale", 1.0)),
        r_list=tuple(raw.get("r", (0.1,))),
        u_list=tuple(raw.get("u", (1.0,))),
        mc_n=int(mc.get("n", 2_000_000)),
        seed=int(mc.get("seed", 0)),
        shards=int(mc.get("shards", 1)),
        sim_grid=int(sim.get("grid", 128)),
        sim_spacing=float(sim.get("spacing", 11.3 / 128)),
        sim_realizations=int(sim.get("realizations", 200)),
        sim_eps=float(sim.get("eps", 0.5)),
        out_dir=out.get("path", "."),
        out_format=out.get("format", "json"),
        verify=bool(raw.get("verify", False)),
        tol=float(raw.get("tol", 1e-8)),
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="critfield",
        description="Critical-point pair structure of isotropic Gaussian fields",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--model", help="family:key=val,... e.g. gaussian:a=1")
    parser.add_argument("--N", type=int, help="field dimension")
    parser.add_argument("--scale", type=float, help="argument rescale factor")
    parser.add_argument("--r", help="comma-separated radii")
    parser.add_argument("--u", help="comma-separated thresholds")
    parser.add_argument("--n", type=int, help="Monte Carlo sample budget")
    parser.add_argument("--seed", type=int, help="root seed (default 0)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--format", choices=("json", "csv"), help="table format")
    parser.add_argument("--verify", action="store_true",
                        help="sigma: cross-check against the independent oracle")
    parser.add_argument("--tol", type=float, help="verification tolerance")
    parser.add_argument("--grid", type=int, help="simulate: cells per axis")
    parser.add_argument("--spacing", type=float, help="simulate: grid spacing")
    parser.add_argument("--realizations", type=int, help="simulate: realizations")
    parser.add_argument("--eps", type=float,
                        help="simulate: pair radius in correlation lengths")
    return parser


def resolve_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = replace(cfg, command=args.command)
    if args.model:
        family, params = _parse_model(args.model)
        cfg = replace(cfg, model_family=family, model_params=params)
    if args.N is not None:
        cfg = replace(cfg, n_dim=args.N)
    if args.scale is not None:
        cfg = replace(cfg, scale=args.scale)
    if args.r:
        cfg = replace(cfg, r_list=_parse_floats(args.r))
    if args.u:
        cfg = replace(cfg, u_list=_parse_floats(args.u))
    if args.n is not None:
        cfg = replace(cfg, mc_n=args.n)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    if args.format:
        cfg = replace(cfg, out_format=args.format)
    if args.verify:
        cfg = replace(cfg, verify=True)
    if args.tol is not None:
        cfg = replace(cfg, tol=args.tol)
    if args.grid is not None:
        cfg = replace(cfg, sim_grid=args.grid)
    if args.spacing is not None:
        cfg = replace(cfg, sim_spacing=args.spacing)
    if args.realizations is not None:
        cfg = replace(cfg, sim_realizations=args.realizations)
    if args.eps is not None:
        cfg = replace(cfg, sim_eps=args.eps)
    return cfg.validate()


def _artifact(cfg, payload):
    payload = dict(payload)
    payload.setdefault("schema", cfio.SCHEMA)
    payload["config"] = cfg.to_file_dict()
    payload["seed"] = cfg.seed
    return payload


def _emit_table(cfg, name, header, rows):
    base = Path(cfg.out_dir) / name
    if cfg.out_format == "csv":
        cfio.write_csv(base.with_suffix(".csv"), header, rows)
    return base


def cmd_check(cfg):
    model = cfg.build_model()
    report = check_qualified(model)
    path = cfio.write_json(Path(cfg.out_dir) / "check.json",
                           _artifact(cfg, report.to_dict()))
    status = "PASS" if report.overall_pass else "FAIL: " + ", ".join(report.failed())
    print(f"check {model.name} N={model.n_dim}: {status} -> {path}")
    return 0


def cmd_sigma(cfg):
    model = cfg.build_model()
    s0, s2 = sigma_expansion(model)
    records = {
        "sigma0": cfio.matrix_record(s0, model.n_dim, r=0.0),
        "sigma2": cfio.matrix_record(s2, model.n_dim, r=0.0),
        "sigma_r": [],
        "verify": [],
    }
    worst = 0.0
    worst_loc = None
    for r in cfg.r_list:
        cc = conditional_covariance(model, r)
        records["sigma_r"].append(
            cfio.matrix_record(cc.sigma, model.n_dim, r=r, u=cc.direction)
        )
        if cfg.verify:
            oracle = conditional_covariance_oracle(model, r)
            diff = np.abs(cc.sigma - oracle.sigma)
            loc = np.unravel_index(diff.argmax(), diff.shape)
            records["verify"].append(
                {"r": r, "max_abs": float(diff.max()),
                 "at": [int(loc[0]), int(loc[1])]}
            )
            if diff.max() > worst:
                worst = float(diff.max())
                worst_loc = (r, loc)
    path = cfio.write_json(Path(cfg.out_dir) / "sigma.json", _artifact(cfg, records))
    if cfg.verify:
        print(f"sigma verify: max |closed - oracle| = {worst:.3e} at {worst_loc}")
        if worst > cfg.tol:
            print(f"sigma verify FAILED tolerance {cfg.tol:g}", file=sys.stderr)
            return 3
    print(f"sigma: wrote {path}")
    return 0


def cmd_spectrum(cfg):
    model = cfg.build_model()
    cat = spectrum_sigma0(model)
    expansion = eigenpath(model)
    payload = {"catalogue": cat.to_dict(), "expansion": expansion.to_dict()}
    path = cfio.write_json(Path(cfg.out_dir) / "spectrum.json", _artifact(cfg, payload))
    rows = [(v, mult) for v, mult in cat.entries]
    _emit_table(cfg, "spectrum", ("value", "multiplicity"), rows)
    print(f"spectrum: {len(cat.entries)} distinct eigenvalues -> {path}")
    return 0


def cmd_hpoly(cfg):
    model = cfg.build_model()
    expansion = eigenpath(model)
    poly = limit_polynomial(model, expansion=expansion)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(cfg.seed)))
    ys = rng.standard_normal((cfg.n_poly_samples, poly.L))
    vals = poly.evaluate(ys)
    resid = float(np.max(np.abs(vals + poly.evaluate(poly.flip(ys)))
                         / (1.0 + np.abs(vals))))
    coeffs = {"+".join(map(str, key)): c for key, c in poly.coefficients().items()}
    payload = {"coefficients": coeffs, "antisymmetry_residual": resid,
               "n_samples": cfg.n_poly_samples}
    path = cfio.write_json(Path(cfg.out_dir) / "hpoly.json", _artifact(cfg, payload))
    print(f"hpoly: {len(coeffs)} monomials, antisymmetry residual {resid:.2e} -> {path}")
    return 0


def _sweep(cfg, name, estimator, points):
    rows = []
    records = []
    for label, args in points:
        est = estimator(*args)
        rows.append((label, est.value, est.stderr, est.n))
        records.append(est.to_dict(name, {"sweep": label}))
        print(f"{name} {label}: {est.value:.6f} +- {est.stderr:.6f} (n={est.n})")
    cfio.write_json(Path(cfg.out_dir) / f"{name}.json",
                    _artifact(cfg, {"results": records}))
    _emit_table(cfg, name, ("point", "value", "stderr", "n"), rows)
    return 0


def cmd_ratio(cfg):
    model = cfg.build_model()
    u = cfg.u_list[0]
    return _sweep(
        cfg, "ratio",
        lambda r: sign_ratio(model, r, u, n=cfg.mc_n, seed=cfg.seed),
        [(f"r={r:g}", (r,)) for r in cfg.r_list],
    )


def cmd_psi(cfg):
    model = cfg.build_model()
    r = cfg.r_list[0]
    return _sweep(
        cfg, "psi",
        lambda u: psi_ratio(model, r, u, n=cfg.mc_n, seed=cfg.seed),
        [(f"u={u:g}", (u,)) for u in cfg.u_list],
    )


def cmd_share(cfg):
    model = cfg.build_model()
    r = cfg.r_list[0]
    return _sweep(
        cfg, "share",
        lambda u: maxima_share(model, r, u, n=cfg.mc_n, seed=cfg.seed),
        [(f"u={u:g}", (u,)) for u in cfg.u_list],
    )


def cmd_simulate(cfg):
    model = cfg.build_model()
    grid = GridSpec(n=cfg.sim_grid, spacing=cfg.sim_spacing)
    u_thr = cfg.u_list[0]
    eps = cfg.sim_eps * model.correlation_length
    euler_failures = 0
    pair_counts = {}
    n_pairs = 0
    n_points = 0
    point_rows = []
    out = Path(cfg.out_dir)
    for k in range(cfg.sim_realizations):
        seed = cfg.seed + k
        realization = sample_field(model, grid, seed=seed)
        if k == 0:
            cfio.save_field(realization, out / "field_000")
        points, _ = find_critical_points(realization)
        if euler_characteristic(points) != 0:
            euler_failures += 1
        above = [p for p in points if p.value > u_thr]
        n_points += len(above)
        table = pair_statistics(above, eps, realization.extent)
        n_pairs += table.n_pairs
        for key, cnt in table.counts.items():
            pair_counts[key] = pair_counts.get(key, 0) + cnt
        if k == 0:
            for p in points:
                point_rows.append(
                    (p.position[0], p.position[1], p.value, p.index, p.grad_norm)
                )
    cfio.write_csv(out / "critical_points.csv",
                   ("x", "y", "value", "index", "grad_norm"), point_rows)
    pair_rows = [(f"{i}-{j}", cnt) for (i, j), cnt in sorted(pair_counts.items())]
    cfio.write_csv(out / "pairs.csv", ("index_pair", "count"), pair_rows)
    opp = sum(c for (i, j), c in pair_counts.items() if (i == 1) != (j == 1))
    payload = {
        "realizations": cfg.sim_realizations,
        "euler_failures": euler_failures,
        "points_above_threshold": n_points,
        "pairs_within_eps": n_pairs,
        "pair_counts": {f"{i}-{j}": c for (i, j), c in pair_counts.items()},
        "opposite_det_fraction": (opp / n_pairs) if n_pairs else None,
        "threshold": u_thr,
        "eps_physical": eps,
    }
    path = cfio.write_json(out / "simulate.json", _artifact(cfg, payload))
    print(
        f"simulate: {cfg.sim_realizations} realizations, euler failures "
        f"{euler_failures}, pairs {n_pairs} -> {path}"
    )
    return 0


def cmd_report(cfg):
    out = Path(cfg.out_dir)
    rows = []
    for path in sorted(out.glob("*.json")):
        if path.name == "report.json":
            continue
        with open(path) as fh:
            data = json.load(fh)
        if "results" in data:
            for rec in data["results"]:
                rows.append((path.stem, rec["params"].get("sweep", ""),
                             rec["value"], rec["stderr"], rec["n"]))
        elif "overall_pass" in data:
            rows.append((path.stem, "overall_pass", int(data["overall_pass"]), 0, 0))
        elif "opposite_det_fraction" in data:
            rows.append((path.stem, "opposite_det_fraction",
                         data["opposite_det_fraction"] or math.nan, 0,
                         data["realizations"]))
    cfio.write_csv(out / "report.csv", ("artifact", "point", "value", "stderr", "n"), rows)
    cfio.write_json(out / "report.json", _artifact(cfg, {"rows": rows}))
    print(f"report: merged {len(rows)} rows from {out}")
    return 0


DISPATCH = {
    "check": cmd_check,
    "sigma": cmd_sigma,
    "spectrum": cmd_spectrum,
    "hpoly": cmd_hpoly,
    "ratio": cmd_ratio,
    "psi": cmd_psi,
    "share": cmd_share,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def run(config):
    """Dispatch a validated configuration; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        code = DISPATCH[config.command](config)
    except (SingularConditioningError, EigenvalueCollisionError, EigenpathError,
            InsufficientSamplesError, EmbeddingError) as exc:
        print(f"numerical contract failure: {exc}", file=sys.stderr)
        return 3
    if code == 0:
        print(f"done in {time.perf_counter() - t0:.2f}s")
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = resolve_config(args)
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
