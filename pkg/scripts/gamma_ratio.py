"""Coupled estimate of psi_gamma / psi_0 against the reflection factor.

Both probabilities are read off the same paths, so the ratio's noise comes
only from paths that ruin under gamma but not without reflection.
"""

from dataclasses import dataclass

from _common import dump, parse_config

from fbmruin.asymptotics import Constants, Intermediate
from fbmruin.montecarlo import gamma_ratio_ladder
from fbmruin.reflection import ModelParams


@dataclass(frozen=True)
class Config:
    hurst: float = 0.5
    drift: float = 1.0
    gamma: float = 0.5
    s0: float = 0.5
    u_values: tuple = (1.0, 1.5, 2.0, 2.5)
    replications: tuple = (200_000, 1_000_000, 1_500_000, 3_000_000)
    grid_n: int = 1024
    seed: int = 7
    pickands: float = 0.0
    piterbarg: float = 0.0

    @classmethod
    def quick(cls):
        return cls(u_values=(1.0, 1.5), replications=(20_000, 50_000), grid_n=256)


def run(cfg: Config):
    consts = Constants(cfg.pickands or None, cfg.piterbarg or None)
    params = ModelParams(cfg.hurst, cfg.drift, cfg.gamma)
    reps = [int(r) for r in cfg.replications]
    rep = gamma_ratio_ladder(params, list(cfg.u_values), Intermediate(cfg.s0), cfg.grid_n, reps, cfg.seed, consts)
    print("    u     hits_0   ratio    +-se    target")
    for r in rep.rows:
        print(f"{r['u']:5.2f}  {r['hits_0']:8d}  {r['ratio']:.4f}  {r['ratio_se']:.4f}  {r['asymptotic_ratio']:.4f}")
    return rep.to_dict()


if __name__ == "__main__":
    cfg, out = parse_config(Config, __doc__)
    dump(run(cfg), cfg, out)
