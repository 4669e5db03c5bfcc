"""Random admissible configurations for property sweeps.

Distribution (fixed, documented so sweeps are reproducible from a seed):

* rates: log-uniform on [0.01, 1], sorted, consecutive relative gap >= 5 %
* gains: log-uniform on [0.01, 1]
* T uniform on [1, 50], lam uniform on [10, 1000]
* Fp uniform on [-5, 0], Phip uniform on [0, 10]
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import ChainPlant


@dataclass(frozen=True)
class Case:
    plant: ChainPlant
    lam: float
    T: float
    Fp: float
    Phip: float

    @property
    def xi(self) -> float:
        return self.Fp

    @property
    def eta(self) -> float:
        return self.lam * self.Phip


def random_plant(rng: np.random.Generator, lo=0.01, hi=1.0, min_gap=0.05) -> ChainPlant:
    while True:
        a = np.sort(10.0 ** rng.uniform(np.log10(lo), np.log10(hi), 3))
        if np.all(np.diff(a) / a[1:] >= min_gap):
            break
    g = 10.0 ** rng.uniform(np.log10(lo), np.log10(hi), 2)
    return ChainPlant(tuple(a), tuple(g))


def random_case(rng: np.random.Generator) -> Case:
    plant = random_plant(rng)
    return Case(
        plant=plant,
        lam=float(rng.uniform(10.0, 1000.0)),
        T=float(rng.uniform(1.0, 50.0)),
        Fp=float(rng.uniform(-5.0, 0.0)),
        Phip=float(rng.uniform(0.0, 10.0)),
    )
