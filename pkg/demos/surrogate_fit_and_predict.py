"""Gaussian-process surrogate on one objective of the BNH problem.

Fits the anisotropic Matern model to a Latin hypercube sample, verifies
that the predictor interpolates the data, and plots mean and two-sigma
band along a slice of the input space.
"""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ewhi import bnh, fit, predict_batch
from ewhi.optimize import latin_hypercube, scale_to_bounds

rng = np.random.default_rng(1)
problem = bnh()

# sample the first objective on a space-filling design
U = latin_hypercube(20, 2, rng)
X = scale_to_bounds(U, problem.bounds)
F, _ = problem.evaluate_batch(X)
y = F[:, 0]

model = fit(X, y, rng=rng)
print("lengthscales:   ", np.round(model.params.lengthscales, 3))
print("signal variance:", round(model.params.signal_variance, 2))
print("mean constant:  ", round(model.mean_constant, 2))

# kriging interpolates: predictions at the data reproduce the data
mean_at_data, sd_at_data = predict_batch(model, X)
print("max |pred - y| at data:", np.max(np.abs(mean_at_data - y)))
print("max sd at data:        ", np.max(sd_at_data))

# slice x2 = 1.5, sweep x1
x1 = np.linspace(0.0, 5.0, 200)
Xs = np.column_stack([x1, np.full_like(x1, 1.5)])
mean, sd = predict_batch(model, Xs)
truth, _ = problem.evaluate_batch(Xs)

plt.figure(figsize=(6, 4))
plt.fill_between(x1, mean - 2 * sd, mean + 2 * sd, alpha=0.25,
                 label="two-sigma band")
plt.plot(x1, mean, label="kriging mean")
plt.plot(x1, truth[:, 0], "--", label="true f1")
near = np.abs(X[:, 1] - 1.5) < 0.5
plt.scatter(X[near, 0], y[near], s=25, color="k", label="nearby data")
plt.xlabel("x1 (slice x2 = 1.5)")
plt.ylabel("f1")
plt.legend()
plt.tight_layout()
plt.savefig("surrogate_fit_and_predict.png", dpi=120)
print("wrote surrogate_fit_and_predict.png")
