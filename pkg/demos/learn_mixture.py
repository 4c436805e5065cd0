"""Learn a two-component Gaussian mixture with piecewise linear hypotheses.

The mixture is not piecewise polynomial, so the learner is run semi-agnostically:
we ask for t pieces of degree d and watch how the TV error moves as t grows.

    python demos/learn_mixture.py
"""

import time

from polydensity import learn_mixture, make_rng, make_target, tv_distance_density

target = make_target(
    "gaussian_mixture",
    {"components": [[0.6, -0.4, 0.15], [0.4, 0.35, 0.2]]},
)

print(f"{'t':>3} {'d':>3} {'pieces':>7} {'tv':>8} {'seconds':>8}")
for t, d in [(1, 1), (2, 1), (3, 1)]:
    start = time.perf_counter()
    h = learn_mixture(target.sampler, 1, t, d, 0.2, make_rng(0), domain=target.domain)
    tv = tv_distance_density(h, target)
    print(f"{t:>3} {d:>3} {h.num_pieces:>7} {tv:>8.4f} {time.perf_counter() - start:>8.1f}")
