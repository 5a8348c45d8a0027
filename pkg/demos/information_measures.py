"""Entropy and relative entropy of a few densities, with and without sampling error.

Run: python3 demos/information_measures.py
"""

import numpy as np

from uqkit import info, prob
from uqkit.errors import DivergenceError
from uqkit.prob import GammaDist, GaussianDist


def main():
    print("Shannon entropy, grid vs closed form")
    for dist in (GaussianDist(0, 0.25), GaussianDist(0, 4.0), GammaDist(2.0, 1.0), GammaDist(9.0, 0.5)):
        if isinstance(dist, GaussianDist):
            sd = np.sqrt(dist.cov[0, 0])
            grid = prob.tabulate(dist, -12 * sd, 24 * sd / 4000, 4001)
        else:
            top = dist.mean + 12 * np.sqrt(dist.variance)
            grid = prob.tabulate(dist, 0.0, top / 20000, 20001)
        print(f"  {dist!r:45s} {info.shannon_entropy_grid(grid):.6f} {info.shannon_entropy(dist):.6f}")

    p, q = GaussianDist(0.0, 1.0), GaussianDist(0.5, 1.0)
    kl = info.relative_entropy_gaussian(p, q)
    print(f"\nKL(N(0,1) || N(0.5,1)) = {kl.total:.4f} (signal {kl.signal:.4f}, dispersion {kl.dispersion:.4f})")

    sp = prob.estimate_pdf(prob.sample(p, 10_000, seed=1), -10, 0.01, 2001)
    sq = prob.estimate_pdf(prob.sample(q, 10_000, seed=2), -10, 0.01, 2001)
    try:
        print("sampled, raw:", info.relative_entropy_grid(sp, sq))
    except DivergenceError as exc:
        print("sampled, raw: diverges:", exc)
    clipped = info.relative_entropy_grid(prob.clip_normalize(sp), prob.clip_normalize(sq))
    print(f"sampled, clipped at 1e-5: {clipped:.4f}")


if __name__ == "__main__":
    main()
