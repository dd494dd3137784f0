#!/usr/bin/env python3
# Copyright 2026 The zonotrain Authors
# SPDX-License-Identifier: Apache-2.0
"""Build MNIST IDX files from the digit subset shipped in the `mnist` npm package.

The package holds roughly 1000 samples per digit as JSON. The last
`--test-per-class` samples of each digit form the test split; the rest form
the training split. Both splits are shuffled with a fixed seed.
"""

import argparse
import json
import pathlib
import shutil
import struct
import subprocess
import tarfile
import tempfile

import numpy as np

PIXELS = 28 * 28


def fetch_package(workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(["npm", "pack", "mnist@1.1.0", "--silent"], cwd=workdir, check=True)
    archive = next(workdir.glob("mnist-*.tgz"))
    with tarfile.open(archive) as tar:
        tar.extractall(workdir)
    return workdir / "package" / "src" / "digits"


def load_digits(digits_dir: pathlib.Path):
    images, labels = [], []
    for digit in range(10):
        data = json.loads((digits_dir / f"{digit}.json").read_text())["data"]
        arr = np.asarray(data, dtype=np.float64).reshape(-1, PIXELS)
        images.append(arr)
        labels.append(np.full(arr.shape[0], digit, dtype=np.uint8))
    return images, labels


def write_idx(path_images, path_labels, images, labels):
    pixels = np.clip(np.rint(images * 255.0), 0, 255).astype(np.uint8)
    with open(path_images, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(labels), 28, 28))
        f.write(pixels.tobytes())
    with open(path_labels, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--digits-dir", type=pathlib.Path,
                        help="directory with 0.json .. 9.json (fetched with npm when omitted)")
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/mnist"))
    parser.add_argument("--test-per-class", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    tmp = None
    digits_dir = args.digits_dir
    if digits_dir is None:
        tmp = pathlib.Path(tempfile.mkdtemp())
        digits_dir = fetch_package(tmp)

    images, labels = load_digits(digits_dir)
    k = args.test_per_class
    train_x = np.concatenate([x[:-k] for x in images])
    train_y = np.concatenate([y[:-k] for y in labels])
    test_x = np.concatenate([x[-k:] for x in images])
    test_y = np.concatenate([y[-k:] for y in labels])

    rng = np.random.RandomState(args.seed)
    p = rng.permutation(len(train_y))
    q = rng.permutation(len(test_y))

    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(args.out / "train-images-idx3-ubyte", args.out / "train-labels-idx1-ubyte",
              train_x[p], train_y[p])
    write_idx(args.out / "t10k-images-idx3-ubyte", args.out / "t10k-labels-idx1-ubyte",
              test_x[q], test_y[q])
    print(f"train: {len(train_y)} samples, test: {len(test_y)} samples -> {args.out}")

    if tmp is not None:
        shutil.rmtree(tmp)


if __name__ == "__main__":
    main()
