#!/usr/bin/env python3
"""Writes the greyscale test corpus used by the acceptance suite.

Images come from scikit-image's bundled data set, so no download is needed.
"""
import argparse
import pathlib

import numpy as np
from skimage import color, data, transform


def depth_map():
    # Stereo disparity of the motorcycle scene; occluded pixels are inf.
    disp = np.load(pathlib.Path(data.__file__).parent / "motorcycle_disp.npz")["arr_0"]
    disp = np.where(np.isfinite(disp), disp, np.nan)
    lo, hi = np.nanmin(disp), np.nanmax(disp)
    filled = np.nan_to_num(disp, nan=lo)
    return (filled - lo) / (hi - lo)


SOURCES = {
    "cameraman": lambda: data.camera() / 255.0,
    "astronaut": lambda: color.rgb2gray(data.astronaut()),
    "moon": lambda: data.moon() / 255.0,
    "motorcycle_depth": depth_map,
}


def square_crop(img):
    h, w = img.shape
    s = min(h, w)
    y, x = (h - s) // 2, (w - s) // 2
    return img[y : y + s, x : x + s]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=256)
    parser.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/corpus"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, load in SOURCES.items():
        img = transform.resize(square_crop(load()), (args.size, args.size), anti_aliasing=True)
        pixels = np.clip(np.rint(img * 255.0), 0, 255).astype(np.uint8)
        path = args.out / f"{name}.pgm"
        with open(path, "wb") as f:
            f.write(b"P5\n%d %d\n255\n" % (args.size, args.size))
            f.write(pixels.tobytes())
        print(path)


if __name__ == "__main__":
    main()
