#!/usr/bin/env python3
"""Render absolute-stability region SVGs for the shipped methods.

Writes one self-contained SVG per method into the output directory
(default ./stability_out): rasters for the one-step methods, rasters with
boundary-locus overlays for the multistep families.
"""
import argparse
import pathlib
import sys

from odekit.cli import raster_svg
from odekit.driver import stability_object
from odekit.stability import boundary_locus, raster_multistep, raster_one_step

ONE_STEP = ["euler", "heun", "rk3", "rk4", "ieuler", "trap", "trbdf2", "gauss2"]
MULTISTEP = ["ab2", "ab3", "ab4", "am2", "am3", "bdf2", "bdf3", "bdf4"]

BOXES = {
    "euler": (-3, 1, -2, 2), "heun": (-3, 1, -2, 2), "rk3": (-4, 1, -3, 3),
    "rk4": (-4, 1, -3.5, 3.5), "ieuler": (-2, 4, -3, 3), "trap": (-3, 3, -3, 3),
    "trbdf2": (-4, 8, -6, 6), "gauss2": (-6, 6, -6, 6),
    "ab2": (-1.5, 0.5, -1, 1), "ab3": (-1, 0.5, -1, 1), "ab4": (-1, 0.5, -1, 1),
    "am2": (-7, 1, -4, 4), "am3": (-4, 1, -3, 3),
    "bdf2": (-2, 6, -4, 4), "bdf3": (-4, 10, -7, 7), "bdf4": (-4, 14, -10, 10),
}


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out-dir", default="stability_out")
    parser.add_argument("--resolution", type=int, default=120)
    args = parser.parse_args()
    out_dir = pathlib.Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    n = args.resolution
    for name in ONE_STEP:
        _, r_func = stability_object(name)
        raster = raster_one_step(r_func, BOXES[name], n, n)
        path = out_dir / f"{name}.svg"
        path.write_text(raster_svg(raster))
        print(f"wrote {path}")
    for name in MULTISTEP:
        _, method = stability_object(name)
        raster = raster_multistep(method, BOXES[name], n, n)
        locus = boundary_locus(method, 512)
        path = out_dir / f"{name}.svg"
        path.write_text(raster_svg(raster, locus))
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
