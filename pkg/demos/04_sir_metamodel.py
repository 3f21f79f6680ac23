"""
A metamodel of the discrete SIR simulator
=========================================

Three networks predict the next (s, i, r); a softmax keeps the prediction a valid
set of fractions. Training uses true states as inputs, testing rolls the model
forward on its own outputs with infection rates it never saw.
"""
import numpy as np

from polymnn import baselines, metamodel, sir
from polymnn.dataset import Dataset
from polymnn.experiments import BaselineStep
from polymnn.trainer import TrainConfig

s0 = sir.SirState(0.99, 0.01, 0.0)
print("one step:", sir.step(s0, 0.1, 0.05))

train_sims = sir.generate(500, "TRAIN", 60, seed=0)
test_sims = sir.generate(100, "TEST", 60, seed=1)
print("train beta range", train_sims.beta.min(), train_sims.beta.max())
print("test beta range ", test_sims.beta.min(), test_sims.beta.max())

L = 2
meta = metamodel.build_metamodel("CCP", L, rng=0)
print("CCP metamodel, order", meta.order, "parameters", meta.param_count)
meta, hist = metamodel.train_teacher_forced(meta, train_sims, TrainConfig(epochs=5, seed=0))
print("validation RRSE by epoch", np.round(hist.val_rrse, 3))

# per-compartment linear regressions as a reference step model
X, Y = train_sims.pairs(L)
X, Y = X.reshape(-1, 5), Y.reshape(-1, 3)
lr = BaselineStep([baselines.fit_linear_regression(Dataset(X, Y[:, c])) for c in range(3)], L)

for label, model in (("CCP", meta), ("LR", lr), ("exact", metamodel.OracleStep(L))):
    rep = metamodel.evaluate_rollout(model, test_sims)
    print(f"{label:6s} test rollout RRSE {rep.rrse:.4g}  MAE {rep.mae:.3g}")

# One rollout next to the truth: the softmax keeps the three fractions summing to one.
truth = test_sims.modeled(L)[0]
pred = metamodel.rollout(meta, sir.SirState(*truth[0]), test_sims.beta[0], test_sims.gamma[0], len(truth) - 1)
for k in range(0, len(pred), 6):
    print(k + 1, np.round(truth[k + 1], 3), np.round(pred[k], 3), round(float(pred[k].sum()), 12))

# With a few hundred simulations and five epochs the rollout is still far off on
# the unseen rate range; the desk sweep trains on 5,000 simulations.
