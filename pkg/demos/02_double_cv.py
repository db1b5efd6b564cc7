# %% [markdown]
# # Choosing the subset size without bias
#
# Picking the d with the smallest external CV error and then reporting
# that error is a second source of optimism.  Double CV (nested CV) chooses
# d inside each outer training fold and scores only the outer test block.

# %%
import numpy as np

from selbias import derive_seed, double_cv, external_cv, make_folds, rfe_schedule, synth_null

schedule = rfe_schedule(1000)
mins, doubles = [], []
for s in range(5):
    data = synth_null(40, 1000, (20, 20), seed=derive_seed(s, 0))
    mins.append(external_cv(data, make_folds(data, 10, seed=s), schedule).best_rate)
    result = double_cv(data, 10, schedule, seed=s)
    doubles.append(result.estimate)
    print(f"seed {s}: min_d external {mins[-1]:.3f}  double CV {result.estimate:.3f}  "
          f"inner choices {result.inner_choices}")

# %%
print(f"mean min_d external {np.mean(mins):.3f}, mean double CV {np.mean(doubles):.3f}")

# %% [markdown]
# The inner choices of d vary from fold to fold.  That variation is exactly
# what the min-over-d number hides.
