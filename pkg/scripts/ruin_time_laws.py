"""KS distance of scaled conditional ruin times and losses to their limit laws.

Long horizon: (tau - t0 u)/A(u) against N(0,1) (x = +inf, proxy horizon).
Short horizon (fixed T_u): H u^2 (T_u - tau)/T_u^{2H+1} against Exp(1).
Losses: overshoot times the loss scaling against Exp(1).
"""

from dataclasses import dataclass

from _common import dump, parse_config

from fbmruin.asymptotics import Long, Short
from fbmruin.montecarlo import (
    ExperimentSpec,
    ks_statistic,
    sample_conditional_losses,
    sample_conditional_ruin_times,
)
from fbmruin.reflection import ModelParams


@dataclass(frozen=True)
class Config:
    hurst: float = 0.5
    drift: float = 1.0
    gamma: float = 0.3
    u_values: tuple = (1.0, 1.5, 2.0, 2.5)
    long_grid_n: int = 4096
    long_replications: int = 300_000
    short_horizon: float = 0.5
    short_grid_n: int = 256
    short_replications: tuple = (200_000, 1_000_000, 4_000_000, 20_000_000)
    seed: int = 11

    @classmethod
    def quick(cls):
        return cls(u_values=(1.0, 1.5), long_grid_n=1024, long_replications=20_000,
                   short_replications=(20_000, 100_000))


def run(cfg: Config):
    params = ModelParams(cfg.hurst, cfg.drift, cfg.gamma)
    rows = []
    short_reps = [int(r) for r in cfg.short_replications]
    for u, n_short in zip(cfg.u_values, short_reps):
        long_spec = ExperimentSpec.build(params, u, Long(), cfg.long_grid_n, cfg.long_replications, cfg.seed)
        times = sample_conditional_ruin_times(long_spec)
        losses = sample_conditional_losses(long_spec)
        short_spec = ExperimentSpec.build(params, u, Short(cfg.short_horizon, 0.0), cfg.short_grid_n, n_short,
                                          cfg.seed + 1)
        short_times = sample_conditional_ruin_times(short_spec)
        row = {"u": u, "long_hits": len(times.values), "long_time_ks": ks_statistic(times),
               "long_loss_ks": ks_statistic(losses), "short_hits": len(short_times.values),
               "short_time_ks": ks_statistic(short_times)}
        rows.append(row)
        print(" ".join(f"{k}={v:.4g}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
    return rows


if __name__ == "__main__":
    cfg, out = parse_config(Config, __doc__)
    dump(run(cfg), cfg, out)
