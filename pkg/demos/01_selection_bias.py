# %% [markdown]
# # Selection bias in cross-validation
#
# Labels here are pure noise, so no rule can beat 50% error.  We run
# SVM-RFE and estimate its error with 10-fold CV in two ways:
#
# * internal: genes chosen once on all samples, only the classifier is refit
# * external: gene selection is redone inside every training fold

# %%
from selbias import external_cv, internal_cv_table, make_folds, rfe_schedule, select_best_size, synth_null

data = synth_null(40, 1000, (20, 20), seed=7)
folds = make_folds(data, K=10, seed=7)
schedule = rfe_schedule(data.p)
print("sizes visited:", schedule.sizes)

# %%
internal = internal_cv_table(data, folds, schedule)
external = external_cv(data, folds, schedule)

print(f"{'d':>5} {'internal':>9} {'external':>9}")
for d in reversed(schedule.sizes):
    print(f"{d:>5} {internal.rate(d):>9.3f} {external.rate(d):>9.3f}")

# %% [markdown]
# The internal column drops to zero for small subsets.  With 1000 noise
# genes and 40 samples, there are always a few genes that separate the
# classes perfectly by chance.  The external column stays near 0.5.

# %%
d = select_best_size(internal)
print(f"internally best d = {d}: internal {internal.rate(d):.3f}, external {external.rate(d):.3f}")
print(f"min over d of external = {external.best_rate:.3f}  (still optimistic, see 02_double_cv.py)")
