"""JSON run configuration shared by all CLI subcommands."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .model import Modulation, validate
from .numerics import ChainPlant
from .poincare import CycleSpec

BUNDLED = "atracurium.json"


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    a: list[float]
    g: list[float]
    lam: float
    T: float
    kind: str = "affine"
    Fp: float = 0.0
    Phip: float = 0.0
    bounds: dict = field(default_factory=lambda: {"F1": None, "F2": None, "Phi1": None, "Phi2": None})
    x0: list[float] | None = None  # None: start on the fixed point
    perturbation: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    horizon: dict = field(default_factory=lambda: {"firings": 200})
    sample_step: float | None = None
    Fp_range: list[float] = field(default_factory=lambda: [-2.0, 0.0])
    Phip_range: list[float] = field(default_factory=lambda: [0.0, 6.0])
    n_f: int = 61
    n_p: int = 61
    directory: str | None = None
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])

    @classmethod
    def from_dict(cls, d: dict) -> "Config":
        try:
            plant, cycle = d["plant"], d["cycle"]
            mod = d.get("modulation", {})
            sim = d.get("sim", {})
            sweep = d.get("sweep", {})
            out = d.get("output", {})
            base = cls(a=[float(v) for v in plant["a"]], g=[float(v) for v in plant["g"]],
                       lam=float(cycle["lambda"]), T=float(cycle["T"]))
            slopes = mod.get("slopes", {})
            cfg = cls(
                a=base.a,
                g=base.g,
                lam=base.lam,
                T=base.T,
                kind=mod.get("kind", base.kind),
                Fp=float(slopes.get("Fp", 0.0)),
                Phip=float(slopes.get("Phip", 0.0)),
                bounds={**base.bounds, **mod.get("bounds", {})},
                x0=sim.get("x0"),
                perturbation=list(sim.get("perturbation", base.perturbation)),
                horizon=dict(sim.get("horizon", base.horizon)),
                sample_step=sim.get("sample_step"),
                Fp_range=list(sweep.get("Fp_range", base.Fp_range)),
                Phip_range=list(sweep.get("Phip_range", base.Phip_range)),
                n_f=int(sweep.get("n_f", base.n_f)),
                n_p=int(sweep.get("n_p", base.n_p)),
                directory=out.get("directory"),
                formats=list(out.get("formats", base.formats)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc!r}") from exc
        cfg.check()
        return cfg

    def to_dict(self) -> dict:
        return {
            "plant": {"a": list(self.a), "g": list(self.g)},
            "cycle": {"lambda": self.lam, "T": self.T},
            "modulation": {
                "kind": self.kind,
                "slopes": {"Fp": self.Fp, "Phip": self.Phip},
                "bounds": dict(self.bounds),
            },
            "sim": {
                "x0": self.x0,
                "perturbation": list(self.perturbation),
                "horizon": dict(self.horizon),
                "sample_step": self.sample_step,
            },
            "sweep": {
                "Fp_range": list(self.Fp_range),
                "Phip_range": list(self.Phip_range),
                "n_f": self.n_f,
                "n_p": self.n_p,
            },
            "output": {"directory": self.directory, "formats": list(self.formats)},
        }

    def check(self) -> None:
        """Raise ConfigError on the first violated invariant."""
        try:
            plant = self.plant
            spec = self.cycle
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.Fp > 0 or self.Phip < 0:
            raise ConfigError(f"slopes must satisfy Fp <= 0 <= Phip, got ({self.Fp}, {self.Phip})")
        if spec.lam > 0:
            problems = validate(self.modulation(y0=1.0))
            if problems:
                raise ConfigError("; ".join(problems))
        if set(self.horizon) - {"firings", "time"} or len(self.horizon) != 1:
            raise ConfigError('sim.horizon must be {"firings": N} or {"time": t}')
        if "firings" in self.horizon and int(self.horizon["firings"]) < 0:
            raise ConfigError("sim.horizon.firings must be nonnegative")
        if "time" in self.horizon and float(self.horizon["time"]) < 0:
            raise ConfigError("sim.horizon.time must be nonnegative")
        if self.sample_step is not None and self.sample_step <= 0:
            raise ConfigError("sim.sample_step must be positive")
        if self.x0 is not None and (len(self.x0) != 3 or min(self.x0) < 0):
            raise ConfigError("sim.x0 must be three nonnegative numbers or null")
        if len(self.perturbation) != 3:
            raise ConfigError("sim.perturbation must have three entries")
        f_lo, f_hi = self.Fp_range
        p_lo, p_hi = self.Phip_range
        if not (f_lo <= f_hi <= 0 <= p_lo <= p_hi):
            raise ConfigError("sweep ranges must satisfy Fp_lo <= Fp_hi <= 0 <= Phip_lo <= Phip_hi")
        if self.n_f < 1 or self.n_p < 1:
            raise ConfigError("sweep grid must be nonempty")
        if not plant.ordered:
            raise ConfigError(f"stability analysis needs a1 < a2 < a3, got {plant.rates}")

    @property
    def plant(self) -> ChainPlant:
        return ChainPlant(tuple(self.a), tuple(self.g))

    @property
    def cycle(self) -> CycleSpec:
        return CycleSpec(self.lam, self.T)

    def modulation(self, y0: float) -> Modulation:
        if self.kind == "constant":
            return Modulation.constant(self.lam, self.T, y0=y0)
        return Modulation.anchored(y0, self.lam, self.T, self.Fp, self.Phip,
                                   bounds=self.bounds, kind=self.kind)


def load_config(path=None) -> Config:
    if path is None:
        text = resources.files("igo.data").joinpath(BUNDLED).read_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return Config.from_dict(data)
