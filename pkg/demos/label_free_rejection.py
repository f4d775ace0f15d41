"""
Withholding predictions without labels
======================================

CCE can be evaluated at inputs that have no label: fit the ground-truth
embedding on a labelled validation split and query it at test inputs. Here
a Gaussian model is wrong on two input intervals (a shifted mean on one, an
overconfident variance on the other). Rejecting the test inputs with the
largest CCE removes those regions first and lowers the test NLL.
"""

import numpy as np

from congruence import KernelSpec, build_model_sample, cce_eval, point_predictions, reject_sweep
from congruence.cce import default_config
from congruence.synthgen import gen_reject_dgp, reject_model

val = gen_reject_dgp(2000, seed=1)
test = gen_reject_dgp(2000, seed=2)
val_model, test_model = reject_model(val.xs), reject_model(test.xs)

config = default_config(val.sample_set, kernel_x=KernelSpec.rbf(0.5))
model_sample = build_model_sample(embeddings=val.xs, dists=val_model.dists, seed=3)

# label-free: the test labels are never used to compute CCE
scores = cce_eval(val.sample_set, model_sample, config, queries=test.xs).values

thresholds = np.quantile(scores, [0.25, 0.5, 0.75, 1.0])
sweep = reject_sweep(scores, point_predictions(test_model.dists), test_model.dists, test.ys, thresholds)
for tau, frac, mae, nll in zip(sweep.thresholds, sweep.retained_fraction, sweep.mae, sweep.nll):
    print(f"tau = {tau:.3f}  kept {frac:5.1%}  MAE = {mae:.3f}  NLL = {nll:.3f}")
