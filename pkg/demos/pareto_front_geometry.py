"""Pareto bookkeeping on a cloud of random objective vectors.

Builds the non-dominated front incrementally, shows membership tests for
the dominated region, and checks the exact complement volume against a
Monte Carlo estimate.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ewhi import BoundingBox, ParetoState, box_complement_volume_2d, dominates

rng = np.random.default_rng(0)

# a cloud of observations; minimization in both coordinates
Y = rng.uniform(10.0, 90.0, size=(40, 2))
state = ParetoState.from_observations(Y)
print("observations:", len(Y))
print("front size:  ", len(state.front))
print("front (sorted by first objective):")
for y in state.front[np.argsort(state.front[:, 0])]:
    print(f"  ({y[0]:7.2f}, {y[1]:7.2f})")

# strict domination: a front point never dominates itself
y0 = state.front[0]
print("front point dominates itself:", dominates(y0, y0))
print("front point in dominated region:", bool(state.is_dominated(y0[None])[0]))

# exact area of box minus dominated region, checked by Monte Carlo
box = BoundingBox([0.0, 0.0], [100.0, 100.0])
exact = box_complement_volume_2d(state, box)
draws = rng.uniform(box.lower, box.upper, size=(200_000, 2))
mc = box.volume * np.mean(~state.is_dominated(draws))
print(f"complement volume: exact {exact:.1f}, monte carlo {mc:.1f}")

# picture: dominated region shaded behind the observations
g1, g2 = np.meshgrid(np.linspace(0, 100, 300), np.linspace(0, 100, 300))
mask = state.is_dominated(np.column_stack([g1.ravel(), g2.ravel()]))
plt.figure(figsize=(5, 4))
plt.contourf(g1, g2, mask.reshape(g1.shape), levels=[0.5, 1.5], colors=["0.85"])
plt.scatter(Y[:, 0], Y[:, 1], s=12, label="observations")
plt.scatter(state.front[:, 0], state.front[:, 1], s=40, marker="x",
            color="red", label="front")
plt.xlabel("f1")
plt.ylabel("f2")
plt.legend()
plt.tight_layout()
plt.savefig("pareto_front_geometry.png", dpi=120)
print("wrote pareto_front_geometry.png")
