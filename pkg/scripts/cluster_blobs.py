"""k-means purity on raw vs EP features for overlapping blobs, averaged over seeds."""
import argparse

import numpy as np

from ensemble_projection import ensemble
from ensemble_projection.clustering import kmeans, purity
from ensemble_projection.geometry import normalize_rows
from ensemble_projection.sampling import DESK_PARAMS, EPParams, derive_seed
from ensemble_projection.synth import BlobSpec, make_blobs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--classes", type=int, default=5)
    ap.add_argument("--dims", type=int, default=10)
    ap.add_argument("--std", type=float, default=4.0)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--ep-normalize", choices=("none", "l2"), default="none")
    args = ap.parse_args()

    d = make_blobs(BlobSpec(args.classes, 50, args.dims, 10.0, args.std, seed=0))
    raw, ep = [], []
    for s in range(args.seeds):
        ks = derive_seed(0, s)
        raw.append(purity(kmeans(d.features, args.classes, seed=ks).assignments, d.labels))
        model = ensemble.fit(d.without_labels(), EPParams(seed=s, **DESK_PARAMS))
        F = normalize_rows(ensemble.project_all(model, d.features), args.ep_normalize)
        ep.append(purity(kmeans(F, args.classes, seed=ks).assignments, d.labels))
        print(f"seed {s}: raw {raw[-1]:.3f}  ep {ep[-1]:.3f}")
    print(f"mean: raw {np.mean(raw):.3f}  ep {np.mean(ep):.3f}")


if __name__ == "__main__":
    main()
