"""Game evaluations to reach the stopping rule: SIM-Shapley against restart KernelSHAP."""

import argparse

import numpy as np

from simshap import (
    EstimatorConfig,
    MarginalImputer,
    PredictiveModel,
    kernel_shap,
    loss_game_local,
    sim_shapley,
    stable_sim_shapley,
)


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--d", type=int, default=16)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.025)
    p.add_argument("--game-seed", type=int, default=1111)
    args = p.parse_args()

    rng = np.random.default_rng(args.game_seed)
    model = PredictiveModel("linear", rng.normal(size=args.d), 0.5)
    background = rng.normal(size=(32, args.d))
    x = rng.normal(size=args.d)
    y = float(model.predict(x[None, :])[0] + rng.normal())
    game = loss_game_local(model, MarginalImputer(background), x, y)

    runners = {
        "sim": sim_shapley,
        "stable-sim": stable_sim_shapley,
        "kernelshap": lambda g, c: kernel_shap(g, c, restarts=True),
    }
    print("method,median_evaluations,median_iterations,median_millis")
    for name, run in runners.items():
        reps = [run(game, EstimatorConfig(seed=s, epsilon=args.epsilon))
                for s in range(args.seeds)]
        print(f"{name},{np.median([r.evaluations for r in reps]):.0f},"
              f"{np.median([r.iterations for r in reps]):.0f},"
              f"{np.median([r.millis for r in reps]):.1f}")


if __name__ == "__main__":
    main()
