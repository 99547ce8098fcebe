"""Per-beta records produced by the evolution engines."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


class TraceRecord(NamedTuple):
    beta: float
    method: str
    sample: int
    fidelity: float
    energy: float


@dataclass
class FidelityTrace:
    records: list[TraceRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)

    def add(self, beta: float, method: str, sample: int, fidelity: float, energy: float) -> None:
        self.records.append(TraceRecord(float(beta), method, int(sample), float(fidelity), float(energy)))

    def extend(self, other: FidelityTrace) -> None:
        self.records.extend(other.records)

    def betas(self) -> np.ndarray:
        return np.array([r.beta for r in self.records])

    def fidelities(self) -> np.ndarray:
        return np.array([r.fidelity for r in self.records])

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])

    def select(self, method: str | None = None, sample: int | None = None) -> FidelityTrace:
        recs = [
            r
            for r in self.records
            if (method is None or r.method == method) and (sample is None or r.sample == sample)
        ]
        return FidelityTrace(recs, dict(self.metadata))

    def at(self, beta: float, method: str | None = None) -> list[TraceRecord]:
        return [
            r for r in self.records if math.isclose(r.beta, beta, abs_tol=1e-9) and (method is None or r.method == method)
        ]


def beta_grid(dbeta: float, beta_max: float) -> np.ndarray:
    """``dbeta * (1 .. ceil(beta_max / dbeta))``."""
    if dbeta <= 0 or beta_max < dbeta:
        raise ValueError("need 0 < dbeta <= beta_max")
    n = math.ceil(beta_max / dbeta - 1e-9)
    return np.round(dbeta * np.arange(1, n + 1), 12)
