#!/usr/bin/env python3
"""Rebuild the bundled datasets in data/ from redistributable Python wheels.

breast-cancer-wisconsin.data
    Rebuilt from the MASS ``biopsy`` table shipped in the ``rdatasets`` wheel,
    written back in the original UCI layout (no header, id first, class 2/4,
    '?' for missing bare-nuclei cells).

heart-disease.csv
    Cleveland subset from the ``scikit-lego`` wheel (sklego/data/hearts.zip).
    ``thal`` is recoded to the UCI numeric codes (normal=3, fixed=6,
    reversible=7); the two rows holding stray values are written as '?'.

Usage: python scripts/fetch_datasets.py [--out data]
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import zipfile

import pandas as pd


def download_wheel(spec: str, dest: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:", "-d", str(dest), spec],
        check=True,
    )
    return next(dest.glob("*.whl"))


def breast_cancer(out: pathlib.Path, tmp: pathlib.Path) -> None:
    whl = download_wheel("rdatasets==0.2.10", tmp / "rdatasets")
    with zipfile.ZipFile(whl) as z:
        df = pd.read_pickle(io.BytesIO(z.read("rdatasets/_data/MASS/biopsy.pkl.compress")), compression="xz")
    lines = []
    for r in df.itertuples(index=False):
        values = [str(r.ID)]
        for i in range(1, 10):
            v = getattr(r, f"V{i}")
            values.append("?" if pd.isna(v) else str(int(v)))
        values.append("2" if r._11 == "benign" else "4")
        lines.append(",".join(values))
    (out / "breast-cancer-wisconsin.data").write_text("\n".join(lines) + "\n")


def heart(out: pathlib.Path, tmp: pathlib.Path) -> None:
    whl = download_wheel("scikit-lego==0.9.10", tmp / "sklego")
    with zipfile.ZipFile(whl) as z:
        inner = zipfile.ZipFile(io.BytesIO(z.read("sklego/data/hearts.zip")))
        df = pd.read_csv(inner.open("heart.csv"))
    codes = {"normal": "3", "fixed": "6", "reversible": "7"}
    df["thal"] = df["thal"].map(lambda v: codes.get(v, "?"))
    df.to_csv(out / "heart-disease.csv", index=False)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path(__file__).resolve().parent.parent / "data")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as d:
        tmp = pathlib.Path(d)
        breast_cancer(args.out, tmp)
        heart(args.out, tmp)
    return 0


if __name__ == "__main__":
    sys.exit(main())
