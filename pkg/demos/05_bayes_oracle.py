# %% [markdown]
# # Checking a classifier against the Bayes rule
#
# With two Gaussian classes the optimal error is known in closed form.
# We compare it with Monte-Carlo rates of the Bayes rule itself and of an
# SVM trained on finite samples.

# %%
import numpy as np

from selbias import SyntheticSpec, bayes_rule, conditional_rates, optimal_error, overall_error, svm_trainer, unconditional_rates

spec = SyntheticSpec(means=np.array([[1.0, 0.0], [-1.0, 0.0]]), variance=1.0, priors=(0.5, 0.5))
print(f"separation {spec.separation:.2f}, optimal error {optimal_error(spec):.4f}")

# %%
bayes = conditional_rates(bayes_rule(spec), spec, mc_samples=50_000, seed=1)
print("Bayes rule rates\n", bayes.rates.round(4))
print(f"overall {overall_error(bayes, spec.priors):.4f}")

# %%
for n in (20, 100, 500):
    svm = unconditional_rates(svm_trainer(), spec, n, reps=10, seed=2)
    print(f"SVM trained on n={n:>3}: overall error {overall_error(svm, spec.priors):.4f}")

# %% [markdown]
# Unequal priors shift the Bayes boundary toward the rarer class.

# %%
skewed = SyntheticSpec(spec.means, 1.0, priors=(0.8, 0.2))
print(f"priors (0.8, 0.2): optimal error {optimal_error(skewed):.4f}")
