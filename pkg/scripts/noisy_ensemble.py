"""Majority vote over weak, label-corrupted learners: accuracy vs ensemble size."""
import argparse

import numpy as np

from ensemble_projection.analysis import RELABEL_MODES, NoiseSimConfig, ensemble_noise_simulation
from ensemble_projection.synth import BlobSpec, make_blobs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise", type=float, nargs="+", default=[0.0, 0.4, 0.8])
    ap.add_argument("--t-grid", type=int, nargs="+", default=[1, 10, 100, 500])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--relabel", choices=RELABEL_MODES, default="any")
    args = ap.parse_args()

    print("R      " + "  ".join(f"T={t:<4d}" for t in args.t_grid))
    for R in args.noise:
        acc = []
        for s in range(args.seeds):
            d = make_blobs(BlobSpec(4, 100, 10, 10.0, 2.0, seed=s))
            cfg = NoiseSimConfig(R, max(args.t_grid), seed=s, relabel=args.relabel)
            acc.append(ensemble_noise_simulation(d, cfg, args.t_grid).accuracy)
        print(f"{R:<5g}  " + "  ".join(f"{a:.3f} " for a in np.mean(acc, axis=0)))


if __name__ == "__main__":
    main()
