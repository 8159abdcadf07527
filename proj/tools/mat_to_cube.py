#!/usr/bin/env python3
"""Convert a MATLAB rows x cols x bands array into a cube (header .json + f32 .bin, band-sequential).

    python3 tools/mat_to_cube.py Indian_pines.mat indian_pines.json [--key indian_pines] [--global]

Values are min-max scaled to [0, 1] per band unless --global is given.
"""

import argparse
import json
import sys

import numpy as np
from scipy.io import loadmat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("mat")
    ap.add_argument("out", help="output header path; the .bin goes next to it")
    ap.add_argument("--key", help="variable name inside the .mat (default: the only 3-D array)")
    ap.add_argument("--global", dest="global_scale", action="store_true", help="scale with one min/max")
    args = ap.parse_args()

    mat = loadmat(args.mat)
    if args.key:
        a = mat[args.key]
    else:
        arrays = [v for k, v in mat.items() if not k.startswith("__") and getattr(v, "ndim", 0) == 3]
        if len(arrays) != 1:
            sys.exit("expected exactly one 3-D array, pass --key")
        a = arrays[0]

    a = np.asarray(a, dtype=np.float64)
    if args.global_scale:
        lo, hi = a.min(), a.max()
    else:
        lo, hi = a.min(axis=(0, 1), keepdims=True), a.max(axis=(0, 1), keepdims=True)
    span = np.where(hi > lo, hi - lo, 1.0)
    a = (a - lo) / span

    rows, cols, bands = a.shape
    stem = args.out[:-5] if args.out.endswith(".json") else args.out
    with open(stem + ".json", "w") as f:
        json.dump({"dims": [rows, cols, bands], "dtype": "f32", "order": "bsq"}, f)
        f.write("\n")
    # band-sequential: band, then row, then column
    np.ascontiguousarray(a.transpose(2, 0, 1)).astype("<f4").tofile(stem + ".bin")


if __name__ == "__main__":
    main()
