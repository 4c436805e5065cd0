"""Structural approximations: log-concave slicing and the 3-piece Gaussian.

Shows how the piece count of the log-concave decomposition grows as eps
shrinks, and how close a single Taylor piece gets to the standard normal.

    python demos/structure.py
"""

from polydensity import approximate_gaussian, decompose_log_concave, make_target, tv_distance_density

half_normal = make_target("truncated_gaussian", {"sigma": 1.0}, (0.0, None))
for eps in (0.1, 0.04, 0.01):
    h = decompose_log_concave(half_normal, eps)
    print(f"half-normal eps={eps:<5} pieces={h.num_pieces:<3} tv={tv_distance_density(h, half_normal):.4f}")

normal = make_target("truncated_gaussian", {"sigma": 1.0}, None)
for eps in (1e-2, 1e-3, 1e-4):
    h = approximate_gaussian(0.0, 1.0, eps)
    print(f"normal eps={eps:<7} degree={h.degree:<3} tv={tv_distance_density(h, normal):.2e}")
