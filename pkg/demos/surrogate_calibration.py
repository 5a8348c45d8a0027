"""Fit linear stochastic surrogates to the four cubic-model regimes and compare densities.

Run: python3 demos/surrogate_calibration.py   (about 10 s)
"""

from uqkit import calibrate
from uqkit import dynamics as dy


def main(seed=11):
    grid = dy.TimeGrid.from_horizon(5000.0, 0.005)
    print(f"{'regime':16s} {'a':>6} {'f':>7} {'sigma':>6} {'kl':>6} {'skew':>6} {'kurt':>6}")
    for i, (name, params) in enumerate(dy.CUBIC_REGIMES.items()):
        x = dy.simulate_cubic(params, 0.0, grid, seed + i)
        res = calibrate.calibrate_ou(x, grid.dt, max_lag=20.0)
        rep = calibrate.validate_surrogate(x, res, grid.dt, seed=100 + i)
        st = rep.truth_stats
        print(f"{name:16s} {res.a:6.3f} {res.f:7.3f} {res.sigma:6.3f} {rep.kl:6.3f} {st.skewness:6.2f} {st.kurtosis:6.2f}")


if __name__ == "__main__":
    main()
