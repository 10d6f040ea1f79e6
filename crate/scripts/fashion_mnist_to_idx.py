#!/usr/bin/env python3
"""Convert the `fashion-mnist` npm package (per-class JSON pixel arrays) into
gzipped IDX files (idx3 images, idx1 labels).

Usage:
    npm pack fashion-mnist && tar xzf fashion-mnist-*.tgz
    python3 scripts/fashion_mnist_to_idx.py package/src/clothes data --subset 10000 --seed 7
"""
import argparse
import gzip
import json
import random
import struct
from pathlib import Path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("clothes_dir", type=Path)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--subset", type=int, default=0, help="random subset size (0 = all)")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--prefix", default="fashion")
    args = ap.parse_args()

    samples = []
    for label in range(10):
        with open(args.clothes_dir / f"{label}.json") as f:
            for img in json.load(f)["data"]:
                # the package carries a couple of empty placeholder rows
                if not img:
                    continue
                if len(img) != 784:
                    raise SystemExit(f"class {label}: image of length {len(img)}")
                samples.append((bytes(img), label))

    if args.subset:
        rng = random.Random(args.seed)
        samples = rng.sample(samples, args.subset)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    n = len(samples)
    img_path = args.out_dir / f"{args.prefix}-images-idx3-ubyte.gz"
    lbl_path = args.out_dir / f"{args.prefix}-labels-idx1-ubyte.gz"
    with gzip.GzipFile(img_path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img, _ in samples:
            f.write(img)
    with gzip.GzipFile(lbl_path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(lbl for _, lbl in samples))
    print(f"wrote {n} images to {img_path}")


if __name__ == "__main__":
    main()
