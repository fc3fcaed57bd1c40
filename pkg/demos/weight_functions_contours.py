"""The three preference weights over the objective box [0,150]x[0,60].

Evaluates the exponential low-f1 preference, the bi-Gaussian preference,
and the flat EHVI weight on a grid; prints their masses over the box and
saves a contour figure.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ewhi import (
    ExponentialPreferenceWeight,
    GaussianMixtureWeight,
    UniformBoxWeight,
)
from ewhi.pareto import BoundingBox

box = BoundingBox([0.0, 0.0], [150.0, 60.0])
weights = {
    "uniform (EHVI)": UniformBoxWeight(box=box),
    "exponential low-f1": ExponentialPreferenceWeight(),
    "bi-Gaussian": GaussianMixtureWeight(),
}

# midpoint quadrature of each weight over the box
n1, n2 = 600, 240
e1 = np.linspace(0.0, 150.0, n1 + 1)
e2 = np.linspace(0.0, 60.0, n2 + 1)
c1 = 0.5 * (e1[:-1] + e1[1:])
c2 = 0.5 * (e2[:-1] + e2[1:])
G1, G2 = np.meshgrid(c1, c2)
pts = np.column_stack([G1.ravel(), G2.ravel()])
cell = (150.0 / n1) * (60.0 / n2)

fig, axes = plt.subplots(1, 3, figsize=(13, 3.2), sharey=True)
for ax, (name, w) in zip(axes, weights.items()):
    vals = np.exp(w.log_weight(pts))
    mass = vals.sum() * cell
    print(f"{name:20s} mass over box = {mass:.6g}")
    ax.contourf(G1, G2, vals.reshape(G1.shape), levels=12)
    ax.set_title(name)
    ax.set_xlabel("f1")
axes[0].set_ylabel("f2")

# the exponential weight integrates to (1 - e^-10)/150: its density in f1
# is truncated at 150 while f2 is flat, so mass is below 1 by design
rate = 1.0 / 15.0
print("exponential analytic  =", (1.0 - np.exp(-150.0 * rate)) / 150.0)

plt.tight_layout()
plt.savefig("weight_functions_contours.png", dpi=120)
print("wrote weight_functions_contours.png")
