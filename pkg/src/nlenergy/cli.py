"""nlenergy command-line entry point.

Precedence for every parameter: command-line flag > config file > built-in default.
Exit status: 0 on pass or success, 1 on a failed verdict or solver stall, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .audit import audit_assumptions
from .energy import QuadratureConfig, total_energy
from .errors import NonlocalError
from .grid import Domain, GridFunction, constant, layer_tanh, psi_aux, ramp, sample_profile
from .kernels import make_kernel
from .minimize import MinimizeConfig, minimize
from .potentials import make_potential

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Run:
    """Typed accessors over the parsed blocks and the output directory."""

    def __init__(self, rc: cfgmod.RunConfig):
        self.rc = rc
        self.b = rc.blocks
        self.out = Path(self.b["run"]["out"])
        self.seed = self.b["run"]["seed"]
        self.threads = max(1, self.b["run"]["threads"])

    def write(self, name: str, text: str) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text)

    def kernel(self):
        kb = self.b["kernel"]
        return make_kernel(kb["family"], kb["n"], kb["s"], kb["p"])

    def potential(self):
        return make_potential(self.b["potential"]["family"])

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(**self.b["quadrature"])

    def solver(self, h: float, n: int) -> MinimizeConfig:
        sb = self.b["solver"]
        return MinimizeConfig(max_iters=sb["max_iters"], grad_tol=sb["grad_tol"], step0=sb["step0"],
                              backtrack_factor=sb["backtrack_factor"], armijo_c=sb["armijo_c"],
                              box_bounds=(-1.0, 1.0) if sb["box"] else None)

    def omega(self, n: int) -> np.ndarray:
        a = math.radians(self.b["domain"]["angle_deg"])
        return np.array([math.cos(a)]) if n == 1 else np.array([math.cos(a), math.sin(a)])

    def state(self) -> GridFunction:
        """Initial state / exterior datum from the [domain] block."""
        db = self.b["domain"]
        if db["profile"] == "grid":
            if not db["input"]:
                raise cfgmod.ConfigError("profile = grid needs an input file", None, "domain.input")
            return GridFunction.load(db["input"])
        n = self.b["kernel"]["n"]
        R = db["R"]
        h = db["h"] if db["h"] is not None else R / 32.0
        box = db["R_box"] if db["R_box"] is not None else 2.0 * R
        dom = Domain(n, R, box, h)
        prof = {"ramp": lambda: ramp(self.omega(n)),
                "layer_tanh": lambda: layer_tanh(self.omega(n), db["width"]),
                "constant": lambda: constant(db["value"]),
                "psi_aux": lambda: psi_aux(R)}[db["profile"]]()
        return sample_profile(dom, prof)


# -- commands ----------------------------------------------------------------------------

def cmd_audit(run: Run) -> tuple:
    rep = audit_assumptions(run.kernel(), run.b["experiment"]["sample_count"], run.seed)
    run.write("audit.txt", rep.to_text())
    ok = sum(it.passed for it in rep.assumption_items())
    return rep.passed, f"audit {rep.family}: {ok}/{len(rep.assumption_items())} assumption items"


def cmd_energy(run: Run) -> tuple:
    u = run.state()
    e = total_energy(u, run.kernel(), run.potential(), run.quadrature(), run.threads)
    run.write("energy.csv", e.CSV_HEADER + "\n" + e.csv_row() + "\n")
    return True, f"energy total={e.total:.17g}"


def _minimize(run: Run):
    u0 = run.state()
    k = run.kernel()
    res = minimize(u0, k, run.potential(), run.solver(u0.domain.h, k.n), run.quadrature(), run.threads)
    run.write("trace.csv", res.trace_csv())
    run.write("minimizer.txt", res.u.to_text())
    e = res.energy
    run.write("energy.csv", e.CSV_HEADER + "\n" + e.csv_row() + "\n")
    return res


def cmd_minimize(run: Run) -> tuple:
    res = _minimize(run)
    run.write("verdict.txt", f"status: {res.status}\nenergy: {res.energy.total:.17g}\n"
                             f"iterations: {len(res.trace) - 1}\n")
    return res.converged, f"minimize {res.status} energy={res.energy.total:.17g}"


def _radii(run: Run):
    R = run.b["experiment"]["R_list"]
    if R is None:
        raise cfgmod.ConfigError("R_list is required", None, "experiment.R_list")
    return R


def _emit_report(run: Run, rep, stem: str) -> None:
    run.write(f"{stem}.csv", rep.to_csv())
    run.write(f"{stem}_curve.txt", rep.curve())
    run.write(f"{stem}_verdict.txt", rep.verdict_text())


def cmd_scaling(run: Run) -> tuple:
    from .experiments.scaling import scaling_experiment
    eb = run.b["experiment"]
    R = _radii(run)
    sb = run.b["solver"]
    cfg = None
    if sb["grad_tol"] is not None or sb["max_iters"] != 5000:
        cfg = run.solver(1.0, run.b["kernel"]["n"])
    rep = scaling_experiment(run.kernel(), run.potential(), R, eb["data_rule"], eb["h_divisions"],
                             eb["box_factor"], cfg, run.quadrature(),
                             0.15 if eb["tol"] is None else eb["tol"], run.threads)
    _emit_report(run, rep, "scaling")
    return rep.verdict == "pass", f"scaling fitted={rep.fitted_exponent:.6f} predicted={rep.predicted_exponent:g} {rep.verdict}"


def cmd_perturb(run: Run) -> tuple:
    from .experiments.perturbation import perturbation_experiment
    R = _radii(run)
    db = run.b["domain"]
    h = db["h"] if db["h"] is not None else 1.0 / 16.0
    q = run.quadrature()
    rep = perturbation_experiment(run.kernel(), run.potential(), R, h=h,
                                  box_factor=run.b["experiment"]["box_factor"], q=q)
    _emit_report(run, rep, "perturb")
    return rep.verdict == "pass", f"perturb slope={rep.fitted_exponent:.6f} {rep.verdict}"


def cmd_symmetry(run: Run) -> tuple:
    from .experiments.symmetry import symmetry_diagnostic
    eb, db = run.b["experiment"], run.b["domain"]
    if db["profile"] == "grid":
        u, status = run.state(), "loaded"
    else:
        res = _minimize(run)
        u, status = res.u, res.status
    r = symmetry_diagnostic(u)
    lines = ["projection,value"] + [f"{a:.17g},{b:.17g}" for a, b in r.profile]
    run.write("profile.csv", "\n".join(lines) + "\n")
    got = math.degrees(r.angle)
    ok = r.residual < eb["residual_threshold"]
    text = [f"status: {status}", f"direction_deg: {got:.17g}", f"residual: {r.residual:.17g}",
            f"residual_threshold: {eb['residual_threshold']:.17g}"]
    if db["profile"] in ("ramp", "layer_tanh", "grid"):     # angle_deg is the expected direction
        want = db["angle_deg"] % 180.0
        err = abs(got - want) % 180.0
        err = min(err, 180.0 - err)
        ok = ok and err <= eb["angle_tolerance_deg"]
        text.append(f"direction_error_deg: {err:.17g}")
    ok = ok and status in ("converged", "loaded")
    text.append(f"verdict: {'pass' if ok else 'fail'}")
    run.write("symmetry.txt", "\n".join(text) + "\n")
    return ok, f"symmetry residual={r.residual:.6g} direction={got:.4f}deg {'pass' if ok else 'fail'}"


def cmd_checks(run: Run) -> tuple:
    from .experiments.suites import (appendix_inequality_suite, convexity_suite, gradient_check,
                                     submodularity_suite)
    from .kernels import mean_curvature, p_laplacian
    eb, n, s = run.b["experiment"], run.b["kernel"]["n"], run.b["kernel"]["s"]
    pot = run.potential()
    seed = run.seed
    suites = []
    kernels = [p_laplacian(n, s, p) for p in (1.5, 2.0, 3.0)] + [mean_curvature(n, s)]
    for k in kernels:
        suites.append(convexity_suite(k, eb["sample_count"], seed))
    q = QuadratureConfig(tail_policy="quadrature_1d", backend="direct")
    for k in kernels:
        suites.append(submodularity_suite(k, pot, eb["pairs"], seed, q=q))
    for k in (p_laplacian(n, s, 2.0), mean_curvature(n, s)):
        suites.append(gradient_check(k, pot, eb["nodes"], seed))
    suites.append(appendix_inequality_suite(50, seed, n, s, 2.0))
    run.write("checks.txt", "".join(sv.to_text() for sv in suites))
    passed = sum(sv.passed for sv in suites)
    return passed == len(suites), f"checks {passed}/{len(suites)} suites pass"


COMMANDS = {"audit": cmd_audit, "energy": cmd_energy, "minimize": cmd_minimize,
            "scaling": cmd_scaling, "perturb": cmd_perturb, "symmetry": cmd_symmetry,
            "checks": cmd_checks}


def run(rc: cfgmod.RunConfig) -> int:
    ok, summary = COMMANDS[rc.command](Run(rc))
    print(f"{'PASS' if ok else 'FAIL'} {summary}")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlenergy", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?", choices=cfgmod.COMMANDS,
                    help="command; may instead be given as run.command in the config")
    ap.add_argument("--config", help="configuration file ([block] key = value)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", help="random seed")
    ap.add_argument("--threads", help="worker cap")
    for flag in cfgmod.OVERRIDES:
        ap.add_argument(f"--{flag}", dest=f"ov_{flag}", metavar="VALUE")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        blocks = cfgmod.load(args.config)
        for key in ("out", "seed", "threads"):
            val = getattr(args, key)
            if val is not None:
                try:
                    blocks["run"][key] = cfgmod.SCHEMA["run"][key][0](val)
                except ValueError as exc:
                    raise cfgmod.ConfigError(f"bad value {val!r}: {exc}", None, f"run.{key}") from None
        overrides = {flag: getattr(args, f"ov_{flag}") for flag in cfgmod.OVERRIDES}
        blocks = cfgmod.apply_overrides(blocks, overrides)
        command = args.command or blocks["run"]["command"]
        if command is None:
            raise cfgmod.ConfigError("no command given", None, "run.command")
        blocks["run"]["command"] = command
        return run(cfgmod.RunConfig(command, blocks))
    except (NonlocalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
