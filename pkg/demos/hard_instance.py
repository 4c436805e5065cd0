"""Can the learner tell two adjacent hard instances apart?

S_b and S_b' differ only in the sign of one bump, and their TV distance is
0.9 * eps / k. A learner run at accuracy below that gap should land closer
to the distribution that generated its samples.

    python demos/hard_instance.py [trials]
"""

import sys

from polydensity import learn_piecewise_poly, make_hard_instance, make_rng, tv_distance_pp
from polydensity.zoo import hard_instance_pp

k, eps = 4, 0.1
trials = int(sys.argv[1]) if len(sys.argv) > 1 else 3

wins = 0
for seed in range(trials):
    b = make_rng(seed).choice([-1, 1], k)
    flipped = b.copy()
    flipped[seed % k] *= -1
    target = make_hard_instance(k, eps, b)
    h = learn_piecewise_poly(target.sampler, 2 * k, 0, 0.15, make_rng(1000 + seed), domain=target.domain, m=100_000)
    near = tv_distance_pp(h, target.pp)
    far = tv_distance_pp(h, hard_instance_pp(k, eps, flipped))
    wins += near < far
    print(f"seed {seed}: tv to S_b {near:.4f}, to S_b' {far:.4f}")
print(f"distinguished {wins}/{trials}; gap between the two targets {0.9 * eps / k:.4f}")
