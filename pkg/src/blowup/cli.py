"""Command-line front end: profile sweeps, constructions, verification runs.

Every subcommand reads a JSON config, writes a bundle of CSV/JSON/plot-data
files into the output directory, and finishes with a manifest listing each
file with its content hash and generating command line.  Outputs are
deterministic functions of (config, seed): re-running reproduces the
bundle byte for byte.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import assembly, conformal, glue, odecore, verify
from .dimension import Dimension
from .odecore import DEFAULT_TOL

_CONFIG_KEYS = {
    "delaunay": {"n", "T_grid", "periods"},
    "glue": {"n", "T_grid", "D", "m", "eps_grid"},
    "construct": {"n", "eps", "count", "growth", "xi0", "xi_factor",
                  "direction", "m", "measure_budget"},
    "verify": {"n", "suites", "D", "m", "beta", "alpha_grid", "pairs",
               "h_grid"},
    "report": set(),
}


class ConfigError(ValueError):
    pass


def _real(x) -> float:
    """Accept JSON numbers or decimal strings."""
    if isinstance(x, bool):
        raise ConfigError(f"expected a real number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(x)
        except ValueError:
            raise ConfigError(f"not a decimal number: {x!r}") from None
    raise ConfigError(f"expected a real number, got {x!r}")


def _real_list(xs) -> list[float]:
    if not isinstance(xs, list) or not xs:
        raise ConfigError("grids must be non-empty lists")
    return [_real(x) for x in xs]


def load_config(path: str, command: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    allowed = _CONFIG_KEYS[command]
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(
            f"unknown config keys for '{command}': {sorted(unknown)}; "
            f"allowed: {sorted(allowed)}")
    return doc


def _fmt(x: float) -> str:
    return repr(float(x))


class Bundle:
    """Collects output files and writes the closing manifest."""

    def __init__(self, out_dir: str, command_line: str, seed: int):
        self.dir = Path(out_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.command_line = command_line
        self.seed = seed
        self.files: list[str] = []

    def _record(self, name: str, text: str):
        (self.dir / name).write_text(text, encoding="utf-8", newline="\n")
        self.files.append(name)

    def write_csv(self, name: str, header: list[str], rows: list[list]):
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(c) if isinstance(c, float) else str(c)
                                  for c in row))
        self._record(name, "\n".join(lines) + "\n")

    def write_json(self, name: str, doc: dict):
        doc = dict(doc)
        doc.setdefault("seed", self.seed)
        self._record(name, json.dumps(doc, indent=2, sort_keys=True) + "\n")

    def write_series(self, name: str, header: str, x, y):
        lines = [f"# {header}"]
        for xi, yi in zip(np.asarray(x).tolist(), np.asarray(y).tolist()):
            lines.append(f"{_fmt(xi)} {_fmt(yi)}")
        self._record(name, "\n".join(lines) + "\n")

    def close(self) -> Path:
        entries = []
        for name in sorted(self.files):
            digest = hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
            entries.append({"file": name, "sha256": digest,
                            "command": self.command_line})
        manifest = {"seed": self.seed, "files": entries}
        path = self.dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8", newline="\n")
        return path


def _canonical_cmdline(command: str, args) -> str:
    parts = [f"blowup {command}"]
    if args.config:
        parts.append(f"--config {Path(args.config).name}")
    parts.append(f"--seed {args.seed}")
    parts.append(f"--tol {_fmt(args.tol)}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_delaunay(cfg: dict, bundle: Bundle, tol: float) -> int:
    dim = Dimension(int(cfg.get("n", 3)))
    t_grid = _real_list(cfg.get("T_grid", []))
    periods = int(cfg.get("periods", 10))
    rows, errors = [], []
    fit_points = []
    for T in t_grid:
        try:
            prof = odecore.solve_by_period(dim, T, tol)
            span = periods * prof.T
            traj = odecore.integrate(
                dim, odecore.CylState(t=0.0, v=prof.vmax, vprime=0.0),
                (0.0, span), tol)
            drift = traj.energy_drift()
            rows.append([dim.n, float(T), prof.eta, math.log(prof.eta), drift])
            fit_points.append((T, prof.eta))
        except Exception as exc:  # keep sweeping; record the row failure
            errors.append({"T": _fmt(T), "error": str(exc)})
    bundle.write_csv("delaunay.csv", ["n", "T", "eta", "ln_eta", "H_drift"], rows)
    summary = {"n": dim.n, "rows": len(rows), "errors": errors}
    if len(fit_points) >= 3:
        fit = odecore.fit_neck_period_law(dim, [p[0] for p in fit_points], tol)
        summary["fit"] = {"slope": _fmt(fit.slope),
                          "intercept": _fmt(fit.intercept),
                          "expected_slope": _fmt(-(dim.n - 2) / 4.0),
                          "max_residual": _fmt(fit.residual)}
    bundle.write_json("delaunay_summary.json", summary)
    return 0 if rows else 1


def cmd_glue(cfg: dict, bundle: Bundle, tol: float) -> int:
    dim = Dimension(int(cfg.get("n", 3)))
    t_grid = _real_list(cfg.get("T_grid", []))
    D = _real(cfg.get("D", 3.0))
    m = int(cfg.get("m", 2))
    rows, errors = [], []
    last = None
    for T in t_grid:
        try:
            prof = odecore.solve_by_period(dim, T, tol)
            kprof = glue.compute_K(glue.splice(prof, D, m))
            eta2 = prof.eta**2
            rows.append([dim.n, float(T), prof.eta, kprof.sup_deviation,
                         kprof.sup_deviation / eta2,
                         kprof.lipschitz_estimate,
                         kprof.lipschitz_estimate / eta2,
                         kprof.min_k])
            last = kprof
        except Exception as exc:
            errors.append({"T": _fmt(T), "error": str(exc)})
    bundle.write_csv("glue.csv",
                     ["n", "T", "eta", "sup_dev", "sup_dev_over_eta2",
                      "lip", "lip_over_eta2", "min_K"], rows)
    if last is not None:
        t = np.linspace(-2.0, (m - 1) * last.mod.T + 2.0, 4001)
        bundle.write_series("profile.dat", "t v_spliced", t, last.mod.v(t))
        bundle.write_series("coefficient.dat", "t K", t, last.k(t))
    bundle.write_json("glue_summary.json",
                      {"n": dim.n, "D": _fmt(D), "m": m,
                       "rows": len(rows), "errors": errors})
    return 0 if rows else 1


def cmd_construct(cfg: dict, bundle: Bundle, tol: float) -> int:
    dim = Dimension(int(cfg.get("n", 3)))
    eps = _real(cfg.get("eps", 0.1))
    count = int(cfg.get("count", 1))
    growth = _real(cfg.get("growth", 10.0))
    budget = _real(cfg.get("measure_budget", 1.0))
    direction = cfg.get("direction")
    if direction is not None:
        direction = _real_list(direction)
    sol = assembly.plan_stages(
        dim, eps, count, growth,
        xi0=_real(cfg.get("xi0", 8.0)),
        xi_factor=_real(cfg.get("xi_factor", 2.0)),
        direction=direction, m=int(cfg.get("m", 2)), tol=tol)
    bundle._record("plan.json", sol.to_json())
    diag = assembly.blowup_diagnostic(sol)
    rows = [[i, 1.0 / s.xi_norm, s.T, s.kprof.sup_deviation, s.volume, d]
            for i, (s, (_, d)) in enumerate(zip(sol.stages, diag))]
    bundle.write_csv("stages.csv",
                     ["stage", "center_radius", "T", "sup_dev", "volume",
                      "diagnostic"], rows)
    # trace along the ray through the stage centers
    if sol.stages:
        e = sol.stages[0].xi / sol.stages[0].xi_norm
        radii = np.geomspace(1.0 / (4.0 * sol.stages[-1].xi_norm),
                             2.0 / sol.stages[0].xi_norm, 2001)
        us = [sol.eval_u(-r * e) for r in radii]
        ks = [sol.eval_K(-r * e) for r in radii]
        bundle.write_series("trace_u.dat", "r u_b", radii, us)
        bundle.write_series("trace_K.dat", "r K", radii, ks)
    ok = (sol.infeasible_note is None and len(sol.stages) == count
          and sol.total_measure <= budget)
    bundle.write_json("construct_summary.json", {
        "n": dim.n, "eps": _fmt(eps), "stages": len(sol.stages),
        "total_measure": _fmt(sol.total_measure),
        "measure_budget": _fmt(budget),
        "infeasible_note": sol.infeasible_note,
        "pass": bool(ok)})
    return 0 if ok else 1


def cmd_verify(cfg: dict, bundle: Bundle, tol: float, seed: int) -> int:
    dim = Dimension(int(cfg.get("n", 5)))
    suites = cfg.get("suites", ["residual", "lipschitz", "holder", "critical"])
    D = _real(cfg.get("D", 3.0))
    m = int(cfg.get("m", 2))
    pairs = int(cfg.get("pairs", 100000))
    results = {}
    ok = True

    if "residual" in suites:
        h = _real_list(cfg.get("h_grid", [1e-2, 5e-3, 2.5e-3]))
        rep = verify.cylindrical_residual(
            lambda t: odecore.canonical_v(dim, t),
            lambda t: np.ones_like(np.asarray(t, dtype=float)),
            (-5.0, 5.0), h, dim)
        results["residual_canonical"] = {
            "order": _fmt(rep.order), "pass": rep.converged,
            "max_residuals": [_fmt(r) for r in rep.max_residuals]}
        ok &= rep.converged

    kprof = None
    if "lipschitz" in suites or "holder" in suites:
        try:
            kprof = verify.scan_T_for_lipschitz(dim, D, m, tol)
        except verify.DimensionRestrictionError as exc:
            results["lipschitz"] = {"refused": str(exc), "pass": False}
            ok = False
    if kprof is not None and "lipschitz" in suites:
        rep = verify.lipschitz_extension_check(dim, kprof, pairs, seed)
        results["lipschitz"] = {
            "T": _fmt(rep.T), "max_ratio": _fmt(rep.max_ratio),
            "predicate": _fmt(rep.predicate),
            "worst_pair": [_fmt(rep.worst_pair[0]), _fmt(rep.worst_pair[1])],
            "pass": rep.passed}
        ok &= rep.passed
    if kprof is not None and "holder" in suites:
        C = max(verify.lipschitz_predicate(kprof), 1e-300)
        hres = {}
        for alpha in _real_list(cfg.get("alpha_grid", [0.25, 0.5, 1.0])):
            rep = verify.holder_check(kprof, alpha, C, seed=seed)
            hres[_fmt(alpha)] = {"max_ratio": _fmt(rep.max_ratio),
                                 "bound": _fmt(rep.bound),
                                 "pass": rep.passed}
            ok &= rep.passed
        results["holder"] = hres

    if "critical" in suites:
        beta = _real(cfg.get("beta", 0.25))
        try:
            rep = verify.critical_order_check(dim, beta, D, m, tol)
            results["critical_order"] = {
                "beta": _fmt(beta), "T": _fmt(rep.T),
                "max_ratio": _fmt(rep.max_ratio), "pass": rep.passed}
            ok &= rep.passed
        except ValueError as exc:
            results["critical_order"] = {"refused": str(exc), "pass": False}
            ok = False

    bundle.write_json("verify_summary.json",
                      {"n": dim.n, "results": results, "pass": bool(ok)})
    return 0 if ok else 1


def cmd_report(bundle: Bundle, out_dir: str) -> int:
    """Aggregate the pass/fail state of every summary already in out_dir."""
    out = Path(out_dir)
    entries = {}
    ok = True
    for path in sorted(out.glob("*_summary.json")):
        doc = json.loads(path.read_text(encoding="utf-8"))
        passed = doc.get("pass")
        entries[path.name] = passed
        if passed is False:
            ok = False
    bundle.write_json("report.json", {"summaries": entries, "pass": bool(ok)})
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blowup",
        description="Construct and verify blow-up solutions of the "
                    "critical-exponent equation.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in [
            ("delaunay", "periodic-profile sweep: neck sizes and energy drift"),
            ("glue", "splice sweep: coefficient deviation and Lipschitz tables"),
            ("construct", "plan and evaluate a multi-stage blow-up solution"),
            ("verify", "residual, Lipschitz, Hölder and critical-order suites"),
            ("report", "aggregate summaries from previous runs")]:
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="sampling seed")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="integration tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            cfg = {}
        elif args.config is None:
            raise ConfigError(f"'{args.command}' requires --config")
        else:
            cfg = load_config(args.config, args.command)
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bundle = Bundle(args.out, _canonical_cmdline(args.command, args), args.seed)
    try:
        if args.command == "delaunay":
            code = cmd_delaunay(cfg, bundle, args.tol)
        elif args.command == "glue":
            code = cmd_glue(cfg, bundle, args.tol)
        elif args.command == "construct":
            code = cmd_construct(cfg, bundle, args.tol)
        elif args.command == "verify":
            code = cmd_verify(cfg, bundle, args.tol, args.seed)
        else:
            code = cmd_report(bundle, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    bundle.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
