"""Regenerate the packaged calibration fixture."""
import argparse
import time

from latticeharm import verify


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=verify.CALIBRATION_SEED)
    ap.add_argument("--safety", type=float, default=verify.DEFAULT_SAFETY)
    ap.add_argument("--scale", type=float, default=verify.CALIBRATION_SCALE)
    ap.add_argument("--out", default=str(verify.FIXTURE_PATH))
    args = ap.parse_args()
    t0 = time.time()
    fx = verify.calibrate_all(seed=args.seed, safety=args.safety, size_scale=args.scale)
    verify.save_fixtures(fx, args.out)
    print(f"{len(fx['entries'])} constants written to {args.out} in {time.time() - t0:.1f}s")


if __name__ == "__main__":
    main()
