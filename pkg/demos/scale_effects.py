"""Dispersion effects: a signal that lives only in the scale tree.

Two groups share the same latent location but differ in latent spread.
A plain cumulative (proportional odds) model is blind to this; the scale
tree picks it up as a split with gamma != 0.  The sign convention: a
positive increment means larger spread, i.e. responses pushed toward the
extreme categories.

    python3 demos/scale_effects.py
"""

import numpy as np

import lstree as ls


def category_shares(y, k, mask):
    return np.bincount(y[mask], minlength=k + 1)[1:] / np.sum(mask)


def main():
    spec = ls.SimSpec(
        n=2500,
        thresholds=(-1.5, -0.5, 0.5, 1.5),
        location="0",
        scale="exp(0.9 * I(x1 <= 0))",
        covariates=("x1:uniform:2", "x2:uniform:2"),
        seed=5,
    )
    data = ls.simulate_dataset(spec)

    left = data.x[:, 0] <= 0
    print("empirical category shares (same location, different spread)")
    print(f"  x1 <= 0: {np.round(category_shares(data.y, data.k, left), 3)}")
    print(f"  x1 >  0: {np.round(category_shares(data.y, data.k, ~left), 3)}")
    print("note the extra mass in the extreme categories for x1 <= 0\n")

    options = ls.BuildOptions(n_permutations=800, seed=3, min_node_size=25)
    model, report = ls.build(data, options)

    for s in report.steps:
        print(
            f"step {s.step}: {s.component} on {s.variable_name} <= {s.threshold:g}, "
            f"LR = {s.lr_stat:.2f}, p = {s.p_value:.4f} -> {s.decision}"
        )
    print()

    gammas = [s for s in model.structure.scale_splits if s.variable == 0]
    if gammas:
        print(f"recovered scale increment gamma = {gammas[0].increment:+.3f} "
              f"(generator used +0.9)")
    print(f"location tree splits: {len(model.structure.location_splits)} (expected 0)")

    # the same contrast through fitted probabilities
    probs, _, _ = ls.predict(model, np.array([[-0.5, 0.0], [0.5, 0.0]]))
    print("\nfitted category probabilities")
    print(f"  x1 = -0.5 (wide):   {np.round(probs[0], 3)}")
    print(f"  x1 = +0.5 (narrow): {np.round(probs[1], 3)}")


if __name__ == "__main__":
    main()
