"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE <id> PASS|FAIL`` line (visible even
without ``-s``) and then asserts at the stated tolerance.
"""

import math
import time

import numpy as np
import pytest

from vqnhite import hadamard, verify
from vqnhite.bench import RunConfig, output_paths, run_benchmark, summarize, write_outputs
from vqnhite.pauli import build_heisenberg, sample_fields

pytestmark = pytest.mark.slow


def report(capsys, crit: str, passed: bool, detail: str) -> None:
    with capsys.disabled():
        print(f"\nACCEPTANCE {crit} {'PASS' if passed else 'FAIL'}: {detail}")


def directional(layout: str):
    cfg = RunConfig(n_qubits=6, layout=layout, J=-1.0, field_seed=0, dbeta=0.1, beta_max=6.0, samples=20)
    res = run_benchmark(cfg)
    table = {(round(r[0], 9), r[1]): r for r in summarize(res.trace)}
    ok, parts = not res.failures, []
    for beta in (2.0, 4.0, 6.0):
        v, q = table[(beta, "vite")], table[(beta, "vqnhite")]
        ok &= q[3] >= v[3]
        parts.append(f"b={beta:g} vite {v[3]:.4f}+-{v[4]:.4f} vqnhite {q[3]:.4f}+-{q[4]:.4f}")
    v, q = table[(6.0, "vite")], table[(6.0, "vqnhite")]
    se = math.hypot(v[4], q[4])
    gap = q[3] - v[3]
    ok &= gap > se
    parts.append(f"gap(6)={gap:.4f} se={se:.4f} failures={len(res.failures)}")
    return ok, "; ".join(parts)


def test_c1_nearest_neighbor_directional(capsys):
    ok, detail = directional("nn")
    report(capsys, "1", ok, detail)
    assert ok


def test_c2_all_to_all_directional(capsys):
    ok, detail = directional("all")
    report(capsys, "2", ok, detail)
    assert ok


def test_c3_oracle_equivalence(capsys):
    t0 = time.perf_counter()
    checks = verify.suite_oracles()
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < 60
    report(capsys, "3", ok, ", ".join(f"{c.name}={c.value:.2e}" for c in checks) + f", {elapsed:.1f}s")
    assert ok


def test_c4_gradients(capsys):
    checks = verify.suite_gradients(n_instances=50, tol=1e-5)
    ok = all(c.passed for c in checks)
    report(capsys, "4", ok, ", ".join(f"{c.name}={c.value:.2e}" for c in checks) + " (50 instances)")
    assert ok


def test_c5_hadamard_paths(capsys):
    errs = verify.hadamard_exact_errors()
    exact_ok = set(errs) == set(hadamard.APPENDIX_KINDS) and max(errs.values()) <= 1e-10
    cov = verify.hadamard_shot_coverage(trials=200, shots=100_000, k=5.0)
    ok = exact_ok and cov >= 0.99
    report(capsys, "5", ok, f"max exact error {max(errs.values()):.2e}, 5-SE coverage {cov:.3f} over 200 trials")
    assert ok


def test_c6_taylor_scaling(capsys):
    H = build_heisenberg(2, -1.0, sample_fields(0, 2))
    ratio = verify.taylor_ratio(H, 0.1)
    ok = abs(ratio - 8) <= 0.2 * 8
    report(capsys, "6", ok, f"halving ratio {ratio:.3f} (exponent {math.log2(ratio):.3f})")
    assert ok


def test_c7_euler_linear(capsys):
    H, ansatz = verify.euler_instance()
    F_ref, d = verify.euler_deficits(H, ansatz, (0.1, 0.05))
    ratio = float(d[0] / d[1])
    ok = abs(ratio - 2) <= 0.3 * 2
    report(capsys, "7", ok, f"deficits {d[0]:.3e} -> {d[1]:.3e}, ratio {ratio:.3f}, continuum F={F_ref:.4f}")
    assert ok


def test_c8_exact_oracle_physics(capsys):
    rows = verify.ground_state_rows(n=6, J=-1.0, instances=20, beta=6.0)
    eligible = [r for r in rows if r.overlap > 0.05]
    bad = [r for r in eligible if r.fidelity < 0.99]
    wick = max(r.wick for r in rows)
    ok = bool(eligible) and not bad and wick <= 1e-6
    worst = min(eligible, key=lambda r: r.fidelity)
    report(
        capsys,
        "8",
        ok,
        f"{len(eligible) - len(bad)}/{len(eligible)} eligible instances reach F>=0.99 "
        f"(worst F={worst.fidelity:.4f}, gap={worst.gap:.4f}); wick residual {wick:.1e}",
    )
    assert eligible and wick <= 1e-6
    for r in eligible:
        assert r.fidelity >= 0.99, f"field seed {r.field_seed}: F={r.fidelity:.4f}, overlap={r.overlap:.3f}, gap={r.gap:.4f}"


def test_c9_determinism(capsys, tmp_path):
    cfg = RunConfig(n_qubits=4, samples=3, beta_max=2.0)
    a = write_outputs(run_benchmark(cfg), tmp_path / "a" / "fidelity.csv")
    b = write_outputs(run_benchmark(cfg), tmp_path / "b" / "fidelity.csv")
    same = {k: a[k].read_bytes() == b[k].read_bytes() for k in output_paths("x.csv")}
    ok = all(same.values())
    report(capsys, "9", ok, ", ".join(f"{k} {'identical' if v else 'differs'}" for k, v in same.items()))
    assert ok
