"""Seeded VITE vs VQNHITE fidelity sweeps persisted as CSV, with static plots."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .errors import DegeneracyError, DivergenceError, SingularSystemError
from .hybrid import TARGET_MODES, vqnhite_evolve
from .pauli import build_heisenberg, sample_fields
from .statevector import AnsatzCircuit
from .trace import FidelityTrace, TraceRecord
from .vite import MODES, EvolutionConfig, vite_evolve

METHODS = ("vite", "vqnhite", "both")
LAYOUTS = ("nn", "all")
DATA_HEADER = ("beta", "method", "sample", "fidelity", "energy")
SUMMARY_HEADER = ("beta", "method", "count", "mean_fidelity", "se_fidelity", "mean_energy", "se_energy")
MAX_FAILURE_FRACTION = 0.10
_RECOVERABLE = (DivergenceError, SingularSystemError, DegeneracyError)

__all__ = ["RunConfig", "BenchmarkResult", "sample_fields", "run_benchmark", "summarize", "write_outputs", "emit_plot"]


@dataclass(frozen=True)
class RunConfig:
    n_qubits: int = 6
    J: float = -1.0
    fields: tuple[float, ...] | None = None  # explicit vector; otherwise drawn from field_seed
    field_seed: int = 0
    resample_fields: bool = False  # draw a new field vector for every sample
    layout: str = "nn"
    depth: int = 2
    dbeta: float = 0.1
    beta_max: float = 6.0
    samples: int = 20
    method: str = "both"
    init_iters: int = 50
    lr: float = 0.1
    ridge: float = 1e-4
    mode: str = "exact"
    shots: int = 0
    seed: int = 0
    target_mode: str = "exact"

    def __post_init__(self):
        if self.fields is not None:
            object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))
            if len(self.fields) != self.n_qubits:
                raise ValueError(f"expected {self.n_qubits} fields, got {len(self.fields)}")
            if self.resample_fields:
                raise ValueError("explicit fields cannot be resampled")
        checks = [
            (self.n_qubits >= 1, "n_qubits must be >= 1"),
            (self.layout in LAYOUTS, f"layout must be one of {LAYOUTS}"),
            (self.depth >= 0, "depth must be >= 0"),
            (self.samples >= 1, "samples must be >= 1"),
            (self.method in METHODS, f"method must be one of {METHODS}"),
            (self.init_iters >= 0, "init_iters must be >= 0"),
            (self.lr > 0, "lr must be positive"),
            (self.mode in MODES, f"mode must be one of {MODES}"),
            (self.shots >= 0, "shots must be >= 0"),
            (self.target_mode in TARGET_MODES, f"target_mode must be one of {TARGET_MODES}"),
            (self.seed >= 0 and self.field_seed >= 0, "seeds must be non-negative"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        self.evolution()  # validates dbeta, beta_max, ridge

    def evolution(self) -> EvolutionConfig:
        return EvolutionConfig(self.dbeta, self.beta_max, self.ridge, self.mode, self.shots, self.seed)

    def methods(self) -> tuple[str, ...]:
        return ("vite", "vqnhite") if self.method == "both" else (self.method,)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fields"] = None if self.fields is None else list(self.fields)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        return cls.from_dict(json.loads(text))


def _derive(master: int, *keys: int) -> int:
    return int(np.random.SeedSequence([master, *keys]).generate_state(1)[0])


def sample_nn_seed(cfg: RunConfig, sample: int) -> int:
    return _derive(cfg.seed, 1, sample)


def fields_for(cfg: RunConfig, sample: int) -> np.ndarray:
    if cfg.fields is not None:
        return np.array(cfg.fields)
    if cfg.resample_fields:
        return sample_fields(_derive(cfg.field_seed, 2, sample), cfg.n_qubits)
    return sample_fields(cfg.field_seed, cfg.n_qubits)


@dataclass
class BenchmarkResult:
    config: RunConfig
    trace: FidelityTrace
    failures: list[dict]

    @property
    def failure_fraction(self) -> float:
        return len(self.failures) / (self.config.samples * len(self.config.methods()))

    @property
    def ok(self) -> bool:
        return self.failure_fraction <= MAX_FAILURE_FRACTION


def _vite_shared(cfg: RunConfig) -> bool:
    """VITE has no per-sample randomness unless fields or shot noise vary."""
    return not cfg.resample_fields and cfg.shots == 0


def _run_sample(cfg: RunConfig, sample: int, with_vite: bool) -> tuple[list[TraceRecord], list[dict]]:
    H = build_heisenberg(cfg.n_qubits, cfg.J, list(fields_for(cfg, sample)))
    ansatz = AnsatzCircuit.build(cfg.n_qubits, cfg.layout, cfg.depth)
    evo = cfg.evolution()
    records: list[TraceRecord] = []
    failures: list[dict] = []
    if with_vite:
        vcfg = evo if cfg.shots == 0 else EvolutionConfig(**{**evo.to_dict(), "seed": _derive(cfg.seed, 3, sample)})
        try:
            records += vite_evolve(vcfg, ansatz, H, sample=sample).records
        except _RECOVERABLE as exc:
            failures.append({"method": "vite", "sample": sample, "error": str(exc)})
    if "vqnhite" in cfg.methods():
        qcfg = evo if cfg.shots == 0 else EvolutionConfig(**{**evo.to_dict(), "seed": _derive(cfg.seed, 4, sample)})
        try:
            trace = vqnhite_evolve(
                qcfg, ansatz, H, sample_nn_seed(cfg, sample), cfg.init_iters, cfg.lr, cfg.target_mode, sample=sample
            )
            records += trace.records
        except _RECOVERABLE as exc:
            failures.append({"method": "vqnhite", "sample": sample, "error": str(exc)})
    return records, failures


def run_benchmark(cfg: RunConfig, workers: int = 1) -> BenchmarkResult:
    """Run every sample (in a process pool if ``workers > 1``) and merge in sample order."""
    shared = "vite" in cfg.methods() and _vite_shared(cfg)
    per_sample_vite = "vite" in cfg.methods() and not shared
    samples = range(cfg.samples)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_sample, [cfg] * cfg.samples, samples, [per_sample_vite] * cfg.samples))
    else:
        results = [_run_sample(cfg, s, per_sample_vite) for s in samples]

    shared_records: list[TraceRecord] = []
    failures: list[dict] = []
    if shared:
        recs, fails = _run_sample(RunConfig(**{**cfg.to_dict(), "method": "vite"}), 0, True)
        shared_records = recs
        if fails:
            failures += [{**f, "sample": s} for s in samples for f in fails]

    trace = FidelityTrace(metadata={"config": cfg.to_dict()})
    for s, (recs, fails) in zip(samples, results):
        trace.records += [r._replace(sample=s) for r in shared_records]
        trace.records += recs
        failures += fails
    trace.records.sort(key=lambda r: (r.method, r.sample, r.beta))
    return BenchmarkResult(cfg, trace, failures)


def summarize(trace: FidelityTrace) -> list[tuple]:
    """Per ``(beta, method)`` mean and standard error of fidelity and energy."""
    groups: dict[tuple[float, str], list[TraceRecord]] = {}
    for r in trace.records:
        groups.setdefault((r.beta, r.method), []).append(r)
    rows = []
    for (beta, method), recs in sorted(groups.items()):
        fid = np.array([r.fidelity for r in recs])
        en = np.array([r.energy for r in recs])
        k = len(recs)
        se = (lambda v: float(np.std(v, ddof=1) / math.sqrt(k)) if k > 1 else 0.0)
        rows.append((beta, method, k, float(fid.mean()), se(fid), float(en.mean()), se(en)))
    return rows


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g") if x != 0 else "0"
    return str(x)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def output_paths(out: str | Path) -> dict[str, Path]:
    out = Path(out)
    return {
        "data": out,
        "summary": out.with_name(out.stem + "_summary.csv"),
        "config": out.with_name(out.stem + "_config.json"),
    }


def write_outputs(result: BenchmarkResult, out: str | Path) -> dict[str, Path]:
    """Data CSV, per-beta summary CSV, and a JSON sidecar with config, seeds and failures."""
    from . import __version__

    paths = output_paths(out)
    paths["data"].parent.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    paths["data"].write_text(_csv_text(DATA_HEADER, result.trace.records))
    paths["summary"].write_text(_csv_text(SUMMARY_HEADER, summarize(result.trace)))
    meta = {
        "config": cfg.to_dict(),
        "version": __version__,
        "fields": {str(s): [float(h) for h in fields_for(cfg, s)] for s in range(cfg.samples)}
        if cfg.resample_fields
        else [float(h) for h in fields_for(cfg, 0)],
        "nn_seeds": [sample_nn_seed(cfg, s) for s in range(cfg.samples)],
        "failures": result.failures,
        "failure_fraction": result.failure_fraction,
    }
    paths["config"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return paths


def read_data(path: str | Path) -> FidelityTrace:
    trace = FidelityTrace()
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != DATA_HEADER:
            raise ValueError(f"{path} is not a benchmark data file")
        for row in reader:
            trace.add(float(row["beta"]), row["method"], int(row["sample"]), float(row["fidelity"]), float(row["energy"]))
    return trace


LABELS = {"vite": "VITE", "vqnhite": "VQNHITE"}
STYLES = {"vite": dict(color="tab:orange", marker="s"), "vqnhite": dict(color="tab:blue", marker="o")}


def emit_plot(trace: FidelityTrace | str | Path, out: str | Path, title: str | None = None) -> Path:
    """Mean fidelity with standard-error bars against beta, one series per method (SVG).

    ``trace`` may be a :class:`FidelityTrace` or the path of a benchmark data CSV.
    """
    if not isinstance(trace, FidelityTrace):
        trace = read_data(trace)
    if not trace.records:
        raise ValueError("cannot plot an empty trace")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "vqnhite"
    rows = summarize(trace)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method in sorted({r[1] for r in rows}):
        sel = [r for r in rows if r[1] == method]
        ax.errorbar(
            [r[0] for r in sel],
            [r[3] for r in sel],
            yerr=[r[4] for r in sel],
            label=LABELS.get(method, method),
            markersize=3,
            linewidth=1,
            capsize=1.5,
            **STYLES.get(method, {}),
        )
    betas = [r[0] for r in rows]
    lo = min(r[3] - r[4] for r in rows)
    ax.set_xlim(0, max(betas) * 1.02)
    ax.set_ylim(lo - 0.02 * max(1 - lo, 1e-3), 1 + 0.02 * max(1 - lo, 1e-3))
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel("Fidelity")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out
