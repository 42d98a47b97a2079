"""Numerical certification of the variance landscape of the normalised field.

Runs the f_d negativity sweep, the corner-maximiser search at random
parameters, the local expansion residuals, and dumps one landscape CSV.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from _common import dump, parse_config

from fbmruin.field import (
    FieldParams,
    certify_slope_negativity,
    correlation_residuals,
    expansion_residuals,
    locate_variance_max,
    write_landscape_csv,
)


@dataclass(frozen=True)
class Config:
    s_points: int = 1000
    random_sets: int = 200
    resolution: int = 300
    landscape: str = "landscape.csv"
    seed: int = 0

    @classmethod
    def quick(cls):
        return cls(s_points=100, random_sets=10, resolution=100)


def run(cfg: Config):
    sweep = certify_slope_negativity(np.round(np.arange(0.1, 0.91, 0.1), 2), np.round(np.arange(0.05, 0.951, 0.05), 2),
                                     [0.1, 0.3, 0.5, 0.7, 0.9, 0.99], cfg.s_points)
    print(f"f_d sweep: {'PASS' if sweep.passed else 'FAIL'} max={sweep.max_value:.3e} at {sweep.argmax}")
    rng = np.random.default_rng(cfg.seed)
    failures = []
    for _ in range(cfg.random_sets):
        fp = FieldParams.from_fraction(rng.uniform(0.05, 0.95), rng.uniform(0, 0.95), rng.uniform(0, 0.99))
        if not locate_variance_max(fp, cfg.resolution).passed:
            failures.append((fp.params.hurst, fp.params.gamma, fp.d))
    print(f"corner maximiser: {cfg.random_sets - len(failures)}/{cfg.random_sets}")
    residuals = {}
    for h in (0.25, 0.5, 0.75):
        fp = FieldParams.from_fraction(h, 0.4, 0.5)
        residuals[h] = {"sigma": expansion_residuals(fp), "correlation": correlation_residuals(fp)}
        print(f"H={h}: sigma ratios {np.round(residuals[h]['sigma']['ratios'], 5)}")
    write_landscape_csv(FieldParams.from_fraction(0.3, 0.5, 0.8), Path(cfg.landscape), 100)
    return {"sweep": sweep.to_dict(), "maximiser_failures": failures, "residuals": residuals}


if __name__ == "__main__":
    cfg, out = parse_config(Config, __doc__)
    dump(run(cfg), cfg, out)
