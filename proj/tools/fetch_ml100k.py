#!/usr/bin/env python3
"""Download MovieLens-100k into data/ml-100k (u.data, u.item).

Tries the GroupLens archive first. When that is unreachable, the copy bundled
in the RecBole wheel is used and u.item is rebuilt from its atomic item file
(title, year and genre flags; dates and URLs are left empty).

The MovieLens license forbids redistribution, so data/ is not tracked.
"""

import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
RECBOLE_SPEC = "recbole==1.2.1"
GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical", "Mystery",
    "Romance", "Sci-Fi", "Thriller", "War", "Western",
]


def from_grouplens(out: pathlib.Path) -> bool:
    try:
        with urllib.request.urlopen(GROUPLENS_URL, timeout=30) as resp:
            blob = resp.read()
    except OSError as exc:
        print(f"grouplens unavailable: {exc}", file=sys.stderr)
        return False
    with zipfile.ZipFile(io.BytesIO(blob)) as zf:
        for name in ("u.data", "u.item"):
            (out / name).write_bytes(zf.read(f"ml-100k/{name}"))
    return True


def recbole_wheel(attempts: int) -> pathlib.Path:
    tmp = pathlib.Path(tempfile.mkdtemp(prefix="ml100k-"))
    for i in range(attempts):
        cmd = [sys.executable, "-m", "pip", "download", "--no-deps", "--only-binary=:all:",
               "-d", str(tmp), RECBOLE_SPEC]
        if subprocess.run(cmd, check=False).returncode == 0:
            return next(tmp.glob("recbole-*.whl"))
        print(f"pip download failed (attempt {i + 1}/{attempts})", file=sys.stderr)
    raise SystemExit("could not download the RecBole wheel")


def from_recbole(out: pathlib.Path, wheel: pathlib.Path) -> None:
    with zipfile.ZipFile(wheel) as zf:
        inter = zf.read("recbole/dataset_example/ml-100k/ml-100k.inter").decode("utf-8")
        items = zf.read("recbole/dataset_example/ml-100k/ml-100k.item").decode("latin-1")

    rows = inter.splitlines()[1:]
    with open(out / "u.data", "w", newline="\n") as f:
        for line in rows:
            user, item, rating, ts = line.split("\t")
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")

    with open(out / "u.item", "w", encoding="latin-1", newline="\n") as f:
        for line in items.splitlines()[1:]:
            item_id, title, year, classes = (line.split("\t") + [""] * 4)[:4]
            present = set(classes.split()) or {"unknown"}
            flags = "|".join("1" if g in present else "0" for g in GENRES)
            name = f"{title} ({year})" if year else title
            f.write(f"{item_id}|{name}||||{flags}\n")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "ml-100k"))
    parser.add_argument("--wheel", help="use an already downloaded RecBole wheel")
    parser.add_argument("--attempts", type=int, default=5)
    parser.add_argument("--skip-grouplens", action="store_true")
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.wheel:
        from_recbole(out, pathlib.Path(args.wheel))
    elif args.skip_grouplens or not from_grouplens(out):
        from_recbole(out, recbole_wheel(args.attempts))

    n = sum(1 for _ in open(out / "u.data"))
    print(f"{out / 'u.data'}: {n} ratings")
    return 0 if n == 100000 else 1


if __name__ == "__main__":
    sys.exit(main())
