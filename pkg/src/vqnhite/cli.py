"""Command-line entry point: ``vqnhite {evolve,benchmark,plot,verify}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bench, verify
from .errors import VQNHITEError
from .hybrid import TARGET_MODES, vqnhite_evolve
from .pauli import build_heisenberg, load_hamiltonian_config
from .statevector import AnsatzCircuit
from .trace import FidelityTrace
from .vite import vite_evolve

log = logging.getLogger("vqnhite")

EXIT_FAILURES = 3


def parse_fields(text: str) -> tuple[tuple[float, ...] | None, int]:
    """``"0.3,-0.1,..."`` is an explicit vector; a bare integer is an RNG seed."""
    text = text.strip()
    try:
        return None, int(text)
    except ValueError:
        pass
    try:
        return tuple(float(v) for v in text.split(",") if v.strip()), 0
    except ValueError:
        raise argparse.ArgumentTypeError(f"--fields expects a comma-separated list or an integer seed, got {text!r}")


def _run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-qubits", type=int, default=6)
    p.add_argument("--j", type=float, default=-1.0, help="exchange coupling J")
    p.add_argument("--fields", type=parse_fields, default=(None, 0), help="csv field vector or integer seed")
    p.add_argument("--resample-fields", action="store_true", help="draw new fields for every sample")
    p.add_argument("--ansatz", choices=bench.LAYOUTS, default="nn")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--dbeta", type=float, default=0.1)
    p.add_argument("--beta-max", type=float, default=6.0)
    p.add_argument("--method", choices=bench.METHODS, default="both")
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--init-iters", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--ridge", type=float, default=bench.RunConfig.ridge)
    p.add_argument("--mode", choices=("exact", "hadamard"), default="exact")
    p.add_argument("--shots", type=int, default=0, help="0 = exact expectations")
    p.add_argument("--target-mode", choices=TARGET_MODES, default="exact")


def config_from_args(args) -> bench.RunConfig:
    if getattr(args, "config", None):
        return bench.RunConfig.from_json(Path(args.config).read_text())
    fields, field_seed = args.fields
    return bench.RunConfig(
        n_qubits=args.n_qubits,
        J=args.j,
        fields=fields,
        field_seed=field_seed,
        resample_fields=args.resample_fields,
        layout=args.ansatz,
        depth=args.depth,
        dbeta=args.dbeta,
        beta_max=args.beta_max,
        samples=args.samples,
        method=args.method,
        init_iters=args.init_iters,
        lr=args.lr,
        ridge=args.ridge,
        mode=args.mode,
        shots=args.shots,
        seed=args.seed,
        target_mode=args.target_mode,
    )


def cmd_evolve(args) -> int:
    cfg = config_from_args(args)
    if args.hamiltonian:
        H = load_hamiltonian_config(args.hamiltonian)
        if H.n_qubits != cfg.n_qubits:
            cfg = bench.RunConfig(**{**cfg.to_dict(), "n_qubits": H.n_qubits, "fields": None})
    else:
        H = build_heisenberg(cfg.n_qubits, cfg.J, list(bench.fields_for(cfg, 0)))
    ansatz = AnsatzCircuit.build(cfg.n_qubits, cfg.layout, cfg.depth)
    trace = FidelityTrace()
    if "vite" in cfg.methods():
        trace.extend(vite_evolve(cfg.evolution(), ansatz, H))
    if "vqnhite" in cfg.methods():
        seed = bench.sample_nn_seed(cfg, 0)
        trace.extend(vqnhite_evolve(cfg.evolution(), ansatz, H, seed, cfg.init_iters, cfg.lr, cfg.target_mode))
    text = bench._csv_text(bench.DATA_HEADER, trace.records)
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_benchmark(args) -> int:
    cfg = config_from_args(args)
    log.info("running %d samples (%s, %s ansatz, n=%d)", cfg.samples, cfg.method, cfg.layout, cfg.n_qubits)
    result = bench.run_benchmark(cfg, workers=args.workers)
    paths = bench.write_outputs(result, args.out)
    for kind, path in paths.items():
        log.info("wrote %s %s", kind, path)
    if args.plot:
        bench.emit_plot(result.trace, args.plot)
        log.info("wrote plot %s", args.plot)
    for row in bench.summarize(result.trace):
        beta, method, count, mean_f, se_f = row[:5]
        if any(abs(beta - b) < 1e-9 for b in (2.0, 4.0, 6.0)):
            print(f"beta={beta:g} {method:8s} n={count} fidelity={mean_f:.5f} +- {se_f:.5f}")
    if result.failures:
        log.warning("%d run(s) failed (%.1f%%)", len(result.failures), 100 * result.failure_fraction)
    if not result.ok:
        log.error("failure fraction exceeds %.0f%%", 100 * bench.MAX_FAILURE_FRACTION)
        return EXIT_FAILURES
    return 0


def cmd_plot(args) -> int:
    trace = bench.read_data(args.data)
    bench.emit_plot(trace, args.out, title=args.title)
    log.info("wrote %s", args.out)
    return 0


def cmd_verify(args) -> int:
    return 0 if verify.run_suites(args.suite or None) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vqnhite", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="single VITE/VQNHITE trajectory as CSV")
    _run_args(p)
    p.add_argument("--hamiltonian", help="INI file with a [hamiltonian] section (overrides --j/--fields)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_evolve, config=None)

    p = sub.add_parser("benchmark", help="seeded fidelity sweep with summary statistics")
    _run_args(p)
    p.add_argument("--config", help="JSON run config (overrides run flags)")
    p.add_argument("--out", default="results/fidelity.csv")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plot", help="also write an SVG plot here")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("plot", help="SVG plot from a benchmark data CSV")
    p.add_argument("data")
    p.add_argument("--out", default="fidelity.svg")
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("verify", help="oracle self-checks")
    p.add_argument("--suite", action="append", choices=sorted(verify.SUITES))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (VQNHITEError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
