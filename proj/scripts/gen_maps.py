#!/usr/bin/env python3
"""Regenerates the demo maps under scenarios/maps/ as binary (P5) PGMs.

The planner treats dark pixels (gray <= occupied_threshold) as obstacles and
maps raster row 0 to world y = 0.
"""

import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios" / "maps"


def write_pgm(path: pathlib.Path, img: np.ndarray) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    path.write_bytes(header + img.astype(np.uint8).tobytes())
    print(f"wrote {path} ({img.shape[1]}x{img.shape[0]})")


def open_30x30() -> np.ndarray:
    """30 x 30 m at 0.2 m/cell: boundary walls plus seeded blocks."""
    img = np.full((150, 150), 255, np.uint8)
    img[0, :] = img[-1, :] = 0
    img[:, 0] = img[:, -1] = 0
    rng = np.random.default_rng(7)
    for _ in range(16):
        x0, y0 = rng.integers(10, 130, 2)
        w, h = rng.integers(4, 18, 2)
        img[y0 : min(149, y0 + h), x0 : min(149, x0 + w)] = 0
    return img


def corridor_cut() -> np.ndarray:
    """12 x 6 m corridor at 0.1 m/cell with a cut jutting into it."""
    img = np.full((60, 120), 255, np.uint8)
    img[0, :] = img[-1, :] = 0
    img[:, 0] = img[:, -1] = 0
    img[0:26, 58:63] = 0
    return img


def via_room() -> np.ndarray:
    """8 x 8 m empty room at 0.1 m/cell."""
    return np.full((80, 80), 255, np.uint8)


def sim_room() -> np.ndarray:
    """10 x 10 m empty room at 0.1 m/cell for the replanning demo."""
    return np.full((100, 100), 255, np.uint8)


def main() -> None:
    write_pgm(OUT / "open_30x30.pgm", open_30x30())
    write_pgm(OUT / "corridor_cut.pgm", corridor_cut())
    write_pgm(OUT / "via_room.pgm", via_room())
    write_pgm(OUT / "sim_room.pgm", sim_room())


if __name__ == "__main__":
    main()
