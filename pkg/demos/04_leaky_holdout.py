# %% [markdown]
# # A holdout set does not help if selection already saw it
#
# The data are split in half.  Genes are picked either on all 60 samples
# (leaky) or on the training half only (clean).  In both cases the SVM is
# trained on the training half and scored on the test half.

# %%
import numpy as np

from selbias import leaky_holdout, synth_null

rates = np.array([
    leaky_holdout(synth_null(60, 1000, (30, 30), seed=s), holdout_fraction=0.5, d=8, seed=s)
    for s in range(10)
])
for s, (leaky, clean) in enumerate(rates):
    print(f"seed {s}: leaky {leaky:.3f}  clean {clean:.3f}")
print("means:", rates.mean(axis=0).round(3))
