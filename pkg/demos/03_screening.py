# %% [markdown]
# # Prefiltering genes with a t-test
#
# A common shortcut is to keep the top G genes by two-sample t-statistic
# before running RFE.  If that screen sees all the samples, the bias comes
# back even when RFE itself is cross-validated.

# %%
from selbias import make_folds, rfe_schedule, screened_external_cv, screened_internal_cv, select_best_size, synth_null, t_screen

data = synth_null(40, 1000, (20, 20), seed=3)
folds = make_folds(data, 10, seed=3)
G = 50

top = t_screen(data, G)
print("five largest |t| on pure noise:", [round(s, 2) for s in top.scores[:5]])

# %%
schedule = rfe_schedule(G)
leaky = screened_internal_cv(data, G, folds, schedule)
clean = screened_external_cv(data, G, folds, schedule)
for d in reversed(schedule.sizes):
    print(f"d={d:>3}  screen on all samples {leaky.rate(d):.3f}  screen per fold {clean.rate(d):.3f}")

d = select_best_size(leaky)
print(f"at d={d}: {leaky.rate(d):.3f} versus {clean.rate(d):.3f}")
