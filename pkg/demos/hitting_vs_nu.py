"""E^x[exp(-tau)] for the unit ball against nu(x), stable alpha = 1."""

from jumpdecay import decay, mc
from jumpdecay.levy import LevyModel


def main(paths=20_000):
    m = LevyModel.stable(1.0)
    cfg = mc.PathConfig(epsilon=0.1, dt=0.005, horizon=8.0, n_paths=paths, seed=3)
    est = mc.laplace_hitting(m, cfg, (4.0, 8.0, 16.0, 32.0), 1.0, 1.0)
    ov = decay.hitting_overlay(est, m)
    for row in ov["rows"]:
        print(f"x={row['x']:5.1f}  E[e^-tau]={row['value']:.5f} +- {row['ci_halfwidth']:.5f}  ratio to nu={row['ratio']:.3f}")
    print(f"C={ov['C']:.3f} spread={ov['spread']:.3f} ({ov['stability']}), log-slope {ov['log_ratio_slope']:+.3f}")


if __name__ == "__main__":
    main()
