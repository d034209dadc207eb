"""Regenerate the bundled 90-cell scenario grid with calibrated censoring
bounds. Slow (one calibration per model x effect x rate combination)."""
from proprisk.simulate import build_default_grid, default_grid_path, save_grid


def main():
    grid = build_default_grid()
    path = default_grid_path()
    save_grid(grid, path)
    print(f"wrote {len(grid)} scenarios to {path}")


if __name__ == "__main__":
    main()
