"""
Calibrated but not congruent
============================

A model that ignores its input can still pass a calibration check. Here
``Y | X ~ N(3 X, 1)`` and the "marginal" model predicts ``N(0, 10)``
everywhere, which is the true marginal of ``Y``. Its PIT values are
uniform, so the ECE is near zero, yet the conditional error is large.
"""

import numpy as np

from congruence import build_model_sample, calibration_report, cce_eval, default_config
from congruence.synthgen import gen_marginal_flaw

data, congruent, marginal = gen_marginal_flaw(n=2000, alpha=3.0, seed=0)
gt = data.sample_set

# the default configuration: cubic polynomial input kernel, RBF output
# kernel whose bandwidth comes from the label variance, lambda = 0.1
config = default_config(gt)

for model in (congruent, marginal):
    cal = calibration_report(model.dists, data.ys)
    # one Monte Carlo draw per input forms the model's sample set
    model_sample = build_model_sample(embeddings=data.xs, dists=model.dists, ell=1, seed=1)
    report = cce_eval(gt, model_sample, config)
    print(f"{model.name:>10}: ECE = {cal.ece:.4f}   mean CCE = {report.mean:.4f}   NLL = {cal.mean_nll:.3f}")

###############################################################################
# CCE is a function of the input, so it also shows *where* the marginal model
# fails: far from ``x = 0`` its mean is off by ``3 |x|``.

queries = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
model_sample = build_model_sample(embeddings=data.xs, dists=marginal.dists, seed=1)
for q, v in zip(queries[:, 0], cce_eval(gt, model_sample, config, queries).values):
    print(f"x = {q:+.1f}  CCE = {v:.3f}")
