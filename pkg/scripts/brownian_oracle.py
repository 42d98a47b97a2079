"""Brownian sanity ladder: MC ruin probability against exp(-2cu) and the asymptotic.

At H = 1/2, gamma = 0 the infinite-horizon ruin probability is exactly
exp(-2cu), so this separates simulation error (grid bias, MC noise) from the
asymptotic's own (1+o(1)) error.  Each u is run at two resolutions to expose
the downward bias of grid maxima.
"""

from dataclasses import dataclass

from _common import dump, parse_config

from fbmruin.asymptotics import Long
from fbmruin.montecarlo import compare_mc_vs_asymptotic
from fbmruin.reflection import ModelParams


@dataclass(frozen=True)
class Config:
    drift: float = 1.0
    u_values: tuple = (0.5, 1.0, 1.5)
    grid_n: int = 1 << 14
    replications: int = 50_000
    seed: int = 1

    @classmethod
    def quick(cls):
        return cls(grid_n=1 << 11, replications=5_000)


def run(cfg: Config):
    params = ModelParams(0.5, cfg.drift)
    reports = {}
    for n in (cfg.grid_n, 2 * cfg.grid_n):
        rep = compare_mc_vs_asymptotic(params, list(cfg.u_values), Long(), n, cfg.replications, cfg.seed)
        reports[n] = rep.to_dict()
        print(f"n = {n}")
        print("    u      mc     exact   mc/exact  asymptotic  mc/asym")
        for r in rep.rows:
            print(f"{r['u']:5.2f}  {r['mc']:.4f}  {r['exact']:.4f}   {r['ratio_exact']:.4f}    {r['asymptotic']:.4f}   "
                  f"{r['ratio']:.4f}")
    return reports


if __name__ == "__main__":
    cfg, out = parse_config(Config, __doc__)
    dump(run(cfg), cfg, out)
