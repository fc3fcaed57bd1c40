"""Weighted vs flat optimization of the constrained BNH problem.

Runs the full loop twice from the same seed, once with the flat EHVI
weight and once with the exponential preference for small f1, and shows
how the preference steers the sampled front.  Budgets are reduced from
the package defaults (10 init + 20 iterations, 1000 particles) to keep
the demo around a minute; raise them to reproduce the full study.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ewhi import (
    ExponentialPreferenceWeight,
    OptimizationRun,
    UniformBoxWeight,
    bnh,
    run,
)
from ewhi.pareto import BoundingBox

box = BoundingBox([0.0, 0.0], [150.0, 60.0])


def optimize(weight, seed=5):
    opt = OptimizationRun(problem=bnh(), weight=weight, n_init=10,
                          n_iterations=12, m_x=400, m_y=400, seed=seed)
    run(opt)
    return opt


flat = optimize(UniformBoxWeight(box=box))
pref = optimize(ExponentialPreferenceWeight())

for name, opt in [("flat", flat), ("low-f1 preference", pref)]:
    front = opt.pareto.front
    frac = np.mean(front[:, 0] < 50.0)
    print(f"{name:18s} front size {len(front):2d}, "
          f"fraction of front with f1 < 50: {frac:.2f}")

fig, axes = plt.subplots(1, 2, figsize=(11, 4), sharex=True, sharey=True)
for ax, (name, opt) in zip(axes, [("flat (EHVI)", flat),
                                  ("low-f1 preference", pref)]):
    F = opt.F
    ax.scatter(F[:10, 0], F[:10, 1], s=20, color="0.6", label="initial design")
    ax.scatter(F[10:, 0], F[10:, 1], s=20, color="tab:blue", label="selected")
    front = opt.pareto.front
    order = np.argsort(front[:, 0])
    ax.plot(front[order, 0], front[order, 1], "r.-", label="front")
    ax.axvline(50.0, color="k", lw=0.6, ls=":")
    ax.set_title(name)
    ax.set_xlabel("f1")
axes[0].set_ylabel("f2")
axes[0].legend()
plt.tight_layout()
plt.savefig("bnh_weighted_optimization.png", dpi=120)
print("wrote bnh_weighted_optimization.png")
