"""``hhl-nopost`` command line: experiments and condition checks.

Sweeps write ``<command>.csv`` plus ``<command>.manifest.json`` into
``--out``; without ``--out`` the CSV goes to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, circuit, estimator, families, kernels, numkit, spectral
from .errors import CTooLarge, EncodingOverflow, HHLError, NotPositiveDefinite

log = logging.getLogger("hhl_nopost")

TOY_A = np.array([[1.5, 0.5], [0.5, 1.5]], dtype=np.complex128)
COMMANDS = ("solve", "theta-sweep", "r-sweep", "shots-sweep", "std-sweep", "check-condition")
# LinearAngle reproduces the fixed-angle circuit; it is the only mode valid at r=2
DEFAULT_MODE = {"r-sweep": "linear", "std-sweep": "linear"}


# problem loading


def load_observable(path, n_sys: int):
    """JSON matrix, or Pauli text (one term per line). Single Pauli terms stay PauliStrings."""
    if path is None:
        return families.uniform_string("X", n_sys)
    p = Path(path)
    if p.suffix.lower() == ".json":
        return numkit.load_matrix(p)
    poly = families.load_pauli_polynomial(p)
    if len(poly.terms) == 1:
        return poly.terms[0]
    return poly.matrix()


def observable_matrix(M) -> np.ndarray:
    return M.matrix() if isinstance(M, families.PauliString) else numkit.as_matrix(M)


def load_problem(args):
    A = numkit.load_matrix(args.matrix_a) if args.matrix_a else TOY_A.copy()
    n = A.shape[0]
    n_sys = int(round(math.log2(n))) if n > 0 else 0
    if 2**n_sys != n:
        n_sys = None
    if args.matrix_m:
        M = load_observable(args.matrix_m, n_sys or 1)
    else:
        M = families.uniform_string("X", n_sys) if n_sys else None
    b = numkit.load_vector(args.vector_b) if args.vector_b else None
    return A, M, b, n_sys


def theta_grid(points: int, random: bool, seed: int) -> np.ndarray:
    if random:
        return np.sort(np.random.default_rng(seed).uniform(0.0, 2.0 * math.pi, points))
    return np.arange(points) * (2.0 * math.pi / points)


def theta_state(theta: float) -> np.ndarray:
    return np.array([math.cos(theta / 2.0), math.sin(theta / 2.0)], dtype=np.complex128)


def circuit_spec(args, n_sys: int, r: int | None = None, mode: str | None = None) -> circuit.CircuitSpec:
    return circuit.CircuitSpec(
        n_clock=args.n_clock,
        n_sys=n_sys,
        r=r if r is not None else args.r,
        t0=args.t0,
        rotation_mode=mode or args.mode or DEFAULT_MODE.get(args.command, "arcsin"),
        C=args.c,
    )


# statevector evaluation


def evaluate_point(A, M, b, spec: circuit.CircuitSpec, built=None) -> dict:
    """Exact quantities for one input vector via the gate-level circuit."""
    Mm = observable_matrix(M)
    state = circuit.run_hhl_circuit(spec, A, b, built)
    br = circuit.extract_branches(state)
    x = spectral.classical_solution(A, b)
    x_hat = x / np.linalg.norm(x)
    Mb = spectral.expectation(Mm, b)
    M1 = spectral.expectation(Mm, br.x1_norm) if br.p1 > 0 else None
    M0 = spectral.expectation(Mm, br.x0_norm) if br.p0 > 0 else 0.0
    recon = spectral.reconstruct_x1_expectation(Mb, M0, br.p0, br.p1) if br.p1 > 0 else None
    fid = abs(np.vdot(x_hat, br.x1_norm)) ** 2 if br.p1 > 0 else None
    return {
        "M_classical": spectral.expectation(Mm, x_hat),
        "M_b": Mb,
        "M_x0": M0,
        "M_x1": M1,
        "M_reconstructed_from_x0": recon,
        "p0": br.p0,
        "p1": br.p1,
        "fidelity": fid,
        "clock_residual": br.clock_residual,
    }


def _theta_row(job):
    A, M, theta, spec = job
    pt = evaluate_point(A, M, theta_state(theta), spec)
    return [theta, pt["M_classical"], pt["M_x1"], pt["M_reconstructed_from_x0"], pt["p1"]]


def _r_row(job):
    A, M, thetas, spec = job
    try:
        built = circuit.build_hhl_circuit(spec, A)
    except CTooLarge:
        return [spec.r, None, None, None]
    pts = [evaluate_point(A, M, theta_state(t), spec, built) for t in thetas]
    return [
        spec.r,
        float(np.mean([p["p1"] for p in pts])),
        float(np.mean([1.0 - p["fidelity"] for p in pts])),
        float(np.mean([abs(p["M_x1"] - p["M_classical"]) for p in pts])),
    ]


def _sampling_row(job):
    """(p1_rel_std, std_direct, std_recon, mean_direct, mean_recon) over trials."""
    A, M, b, spec, n_shots, trials, seed = job
    try:
        state = circuit.run_hhl_circuit(spec, A, b)
    except CTooLarge:
        return [None] * 5
    plan = estimator.SamplingPlan(n_shots, seed, trials)
    results = [estimator.sampling_trial(state, b, M, plan.for_trial(i)) for i in range(trials)]

    def stats(vals):
        vals = np.array([v for v in vals if v is not None], dtype=float)
        if vals.size < 2:
            return None, None
        return float(vals.mean()), float(vals.std(ddof=1))

    p1_mean, p1_std = stats([r.p1.mean for r in results])
    d_mean, d_std = stats([r.direct.mean if r.direct else None for r in results])
    r_mean, r_std = stats([r.reconstructed.mean if r.reconstructed else None for r in results])
    rel = p1_std / p1_mean if p1_mean else None
    return [rel, d_std, r_std, d_mean, r_mean]


def _map(fn, jobs, workers: int):
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


# commands


def _require_2level(A, M, n_sys):
    if A.shape[0] != 2:
        raise SystemExit("theta sweeps need a 2x2 matrix A")
    return M if M is not None else families.uniform_string("X", 1)


def cmd_theta_sweep(args):
    A, M, _, n_sys = load_problem(args)
    M = _require_2level(A, M, n_sys)
    spec = circuit_spec(args, 1)
    thetas = theta_grid(args.theta_points, args.random_theta, args.seed)
    rows = _map(_theta_row, [(A, M, t, spec) for t in thetas], args.workers)
    header = ["theta", "M_classical", "M_x1", "M_reconstructed_from_x0", "p1"]
    return header, sorted(rows, key=lambda r: r[0])


def cmd_r_sweep(args):
    A, M, _, n_sys = load_problem(args)
    M = _require_2level(A, M, n_sys)
    thetas = theta_grid(args.theta_points, args.random_theta, args.seed)
    jobs = [(A, M, thetas, circuit_spec(args, 1, r=r)) for r in range(args.r_min, args.r_max + 1)]
    rows = _map(_r_row, jobs, args.workers)
    return ["r", "p1", "fidelity_error", "observable_error"], sorted(rows, key=lambda r: r[0])


def _sampling_setup(args):
    A, M, b, n_sys = load_problem(args)
    if n_sys is None:
        raise SystemExit("sampling needs a power-of-two dimension")
    if M is None or not isinstance(M, families.PauliString):
        raise SystemExit("sampling needs a single Pauli-string observable")
    if b is None:
        b = np.zeros(A.shape[0], dtype=np.complex128)
        if A.shape[0] == 2:
            b = theta_state(args.theta)
        else:
            b[0] = 1.0
    return A, M, b, n_sys


SAMPLING_COLUMNS = ["p1_rel_std", "std_M_direct", "std_M_reconstructed", "mean_M_direct", "mean_M_reconstructed"]


def cmd_std_sweep(args):
    A, M, b, n_sys = _sampling_setup(args)
    shots = args.shots or 10**5
    jobs = [
        (A, M, b, circuit_spec(args, n_sys, r=r), shots, args.trials, args.seed)
        for r in range(args.r_min, args.r_max + 1)
    ]
    rows = [[job[3].r] + row for job, row in zip(jobs, _map(_sampling_row, jobs, args.workers))]
    return ["r"] + SAMPLING_COLUMNS, rows


def cmd_shots_sweep(args):
    A, M, b, n_sys = _sampling_setup(args)
    shot_list = args.shots_list or [10**3, 10**4, 10**5, 10**6]
    spec = circuit_spec(args, n_sys)
    jobs = [(A, M, b, spec, n, args.trials, args.seed) for n in shot_list]
    rows = [[job[4]] + row for job, row in zip(jobs, _map(_sampling_row, jobs, args.workers))]
    return ["n_shots"] + SAMPLING_COLUMNS, sorted(rows, key=lambda r: r[0])


def _probe_vector(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def cmd_check_condition(args) -> dict:
    A, M, b, _ = load_problem(args)
    if M is None:
        raise SystemExit("check-condition needs --matrix-m for non power-of-two dimensions")
    Mm = observable_matrix(M)
    rep = families.postselection_free_check(A, Mm, args.tol)
    out = {"norm_inner": rep.norm_inner, "norm_double": rep.norm_double, "is_free": rep.is_free}
    b = b if b is not None else _probe_vector(A.shape[0], args.seed)
    try:
        lam_min = numkit.eigh(A).values[0]
        C = args.c if args.c is not None else min(spectral.rotation_constant(args.r), lam_min)
        prob = spectral.SpectralProblem(A, b, C)
    except (NotPositiveDefinite, CTooLarge) as exc:
        out["identity"] = f"skipped: {exc}"
        return out
    rel = spectral.check_relation_unnormalized(prob, Mm)
    out["C"] = C
    out["K_term"] = rel.k_term
    br = spectral.hhl_branches(prob)
    lhs = spectral.expectation(Mm, br.x0_unnorm)
    out["identity_residual"] = abs(lhs - spectral.expectation(Mm, b) + spectral.expectation(Mm, br.x1_unnorm))
    return out


def cmd_solve(args) -> dict:
    A, M, b, n_sys = load_problem(args)
    if b is None:
        b = np.zeros(A.shape[0], dtype=np.complex128)
        b[0] = 1.0
    if M is None:
        raise SystemExit("solve needs --matrix-m for non power-of-two dimensions")
    Mm = observable_matrix(M)
    x = spectral.classical_solution(A, b)
    out = {"x_classical": [[z.real, z.imag] for z in x]}
    try:
        if n_sys is None:
            raise EncodingOverflow("dimension is not a power of two")
        pt = evaluate_point(A, M, b, circuit_spec(args, n_sys))
        out["engine"] = "circuit"
    except (EncodingOverflow, CTooLarge) as exc:
        # fall back to the exact eigenbasis model
        log.info("circuit unavailable (%s); using spectral model", exc)
        C = args.c if args.c is not None else spectral.rotation_constant(args.r)
        prob = spectral.SpectralProblem(A, b, C)
        br = spectral.hhl_branches(prob)
        Mb = spectral.expectation(Mm, b)
        M0 = spectral.expectation(Mm, br.x0_norm) if br.p0 > 0 else 0.0
        pt = {
            "M_classical": spectral.expectation(Mm, x / np.linalg.norm(x)),
            "M_b": Mb,
            "M_x0": M0,
            "M_x1": spectral.expectation(Mm, br.x1_norm),
            "M_reconstructed_from_x0": spectral.reconstruct_x1_expectation(Mb, M0, br.p0, br.p1),
            "p0": br.p0,
            "p1": br.p1,
        }
        out["engine"] = "spectral"
    out.update(pt)
    rep = families.postselection_free_check(A, Mm, args.tol)
    out["is_free"] = rep.is_free
    return out


TABLE_COMMANDS = {
    "theta-sweep": cmd_theta_sweep,
    "r-sweep": cmd_r_sweep,
    "shots-sweep": cmd_shots_sweep,
    "std-sweep": cmd_std_sweep,
}
REPORT_COMMANDS = {"solve": cmd_solve, "check-condition": cmd_check_condition}


# output


def _cell(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return v


def write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])


def manifest(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    return {"tool": "hhl-nopost", "version": __version__, "kernel_backend": kernels.BACKEND, "config": cfg}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hhl-nopost", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--r", type=int, default=4, help="rotation parameter, C = 2*pi/2**r (default 4)")
    p.add_argument("--c", type=float, default=None, help="rotation constant; overrides --r in arcsin mode")
    p.add_argument("--n-clock", type=int, default=2)
    p.add_argument("--t0", type=float, default=2.0 * math.pi)
    p.add_argument("--mode", choices=["linear", "arcsin"], default=None,
                   help="ancilla rotation (default: linear for r-sweep/std-sweep, arcsin otherwise)")
    p.add_argument("--shots", type=int, default=None, help="shots per trial (std-sweep default 1e5)")
    p.add_argument("--shots-list", type=lambda s: [int(float(x)) for x in s.split(",")], default=None,
                   help="comma-separated shot counts for shots-sweep")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta", type=float, default=0.0, help="input angle for sampling commands")
    p.add_argument("--theta-points", type=int, default=100)
    p.add_argument("--random-theta", action="store_true", help="uniform random angles instead of a grid")
    p.add_argument("--r-min", type=int, default=2)
    p.add_argument("--r-max", type=int, default=None, help="default 7 for r-sweep, 6 for std-sweep")
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance of the condition check")
    p.add_argument("--matrix-a", type=Path)
    p.add_argument("--matrix-m", type=Path)
    p.add_argument("--vector-b", type=Path)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.r_max is None:
        args.r_max = 6 if args.command == "std-sweep" else 7
    stem = args.command.replace("-", "_")
    try:
        if args.command in TABLE_COMMANDS:
            header, rows = TABLE_COMMANDS[args.command](args)
            if args.out is None:
                write_csv(sys.stdout, header, rows)
            else:
                args.out.mkdir(parents=True, exist_ok=True)
                with open(args.out / f"{stem}.csv", "w", newline="") as fh:
                    write_csv(fh, header, rows)
        else:
            report = REPORT_COMMANDS[args.command](args)
            text = json.dumps(report, indent=2, default=str)
            print(text)
            if args.out is not None:
                args.out.mkdir(parents=True, exist_ok=True)
                (args.out / f"{stem}.json").write_text(text + "\n")
    except HHLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out is not None:
        (args.out / f"{stem}.manifest.json").write_text(json.dumps(manifest(args), indent=2, default=str) + "\n")
        log.info("wrote %s", args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
