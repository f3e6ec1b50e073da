"""Ground-state tails of a square well under three jump laws.

Prints lambda0, the phi/nu spread on a window and the fitted tail for each.
"""
from jumpdecay import decay, spectral
from jumpdecay.levy import Exponential, LevyModel, SubExponential

CASES = [
    ("stable alpha=1", LevyModel.stable(1.0), (128.0, 2**15), (20.0, 60.0), "power"),
    ("stretched exp", LevyModel(profile=SubExponential(1.0, 1.0, 0.5, 0.0)), (128.0, 2**15), (20.0, 60.0),
     "stretched-exp"),
    # light tail: the field hits round-off near |x| = 24, so a smaller box
    ("exp, delta=2", LevyModel(profile=Exponential(1.0, 1.0, 2.0)), (64.0, 2**13), (8.0, 20.0), "exp"),
]


def main():
    V = spectral.Well(2.0, 1.0)
    for name, model, (L, N), win, fam in CASES:
        g = spectral.Grid1D(L, N)
        res = spectral.ground_state(model, V, g)
        rep = decay.decay_report(res.phi0, model, g, win, res.lambda0, family=fam)
        fit = rep.fit
        shape = f"p={fit['power']:.3f}" if fam == "power" else f"c={fit['rate']:.3f} beta={fit['beta'] or 1.0:.3f}"
        print(f"{name:16s} lambda0={res.lambda0:+.5f} spread={rep.ratio_stats['spread']:.3g} "
              f"{shape} regime={rep.regime['regime']}")


if __name__ == "__main__":
    main()
