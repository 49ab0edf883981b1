"""Write the small datasets used by the README examples and CLI tests."""

import argparse
from pathlib import Path

import numpy as np

from simshap.io import write_table_game

WORKED_GAME = [0, 1, 2, 4, 3, 5, 6, 9]  # index order: bit i <-> feature i


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--outdir", default=str(Path(__file__).resolve().parents[1] / "data"))
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    write_table_game(out / "worked_game.txt", WORKED_GAME, 3)

    rng = np.random.default_rng(args.seed)
    n, d = 400, 6
    X = rng.normal(size=(n, d))
    w = np.array([2.0, -1.0, 0.5, 0.0, 1.5, -0.25])
    y = X @ w + 0.1 * rng.normal(size=n)
    header = ",".join([f"f{i}" for i in range(d)] + ["target"])
    np.savetxt(out / "toy_regression.csv", np.column_stack([X, y]), delimiter=",",
               header=header, comments="", fmt="%.6f")

    logits = X @ w
    labels = (rng.random(n) < 1 / (1 + np.exp(-logits))).astype(int)
    np.savetxt(out / "toy_classification.csv", np.column_stack([X, labels]), delimiter=",",
               header=header, comments="", fmt=["%.6f"] * d + ["%d"])


if __name__ == "__main__":
    main()
