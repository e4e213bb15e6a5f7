"""Print fitted against predicted log-log slopes for heat kernel norms and mass residuals."""
import numpy as np

from latticeharm.heat import (decay_slope_fit, geometric_grid, mass_slope_fit,
                              predicted_decay_slope, predicted_mass_slope)
from latticeharm.lattice import LatticeSequence


def main():
    print("kernel norms ||G_t||_r, t in [16, 4096]")
    print(f"{'N':>2} {'r':>5} {'fitted':>9} {'predicted':>9}")
    for dim, r in ((1, 2.0), (1, np.inf), (2, 2.0), (2, np.inf), (3, 2.0)):
        tmax = 4096 if dim < 3 else 1024
        slope, _ = decay_slope_fit(dim, r, geometric_grid(16, tmax))
        print(f"{dim:2d} {r:5} {slope:9.4f} {predicted_decay_slope(dim, r):9.4f}")

    f = LatticeSequence(np.array([0, 0, 1.0, -1.0, 2.0]))
    print("\nmass residual ||W_t f - M G_t||_p / ||f||_q, N = 1, t in [64, 8192]")
    print(f"{'p':>5} {'q':>4} {'fitted':>9} {'bound':>9}")
    for p, q in ((np.inf, 1.0), (2.0, 1.0), (1.0, 1.0), (2.0, 2.0)):
        slope, _ = mass_slope_fit(f, p, q, geometric_grid(64, 8192))
        print(f"{p:5} {q:4} {slope:9.4f} {predicted_mass_slope(1, p, q):9.4f}")


if __name__ == "__main__":
    main()
