"""Cross-check the Poisson kernel: time-integral route against Gauss-Laguerre, and mass accounting."""
import numpy as np

from latticeharm.subordination import poisson_kernel, poisson_kernel_laguerre


def main():
    print(f"{'t':>7} {'N':>2} {'R':>5} {'1 - window - tail':>18}")
    for t in (1e-3, 0.1, 1.0, 10.0):
        for dim, R in ((1, 2048), (2, 64)):
            Q = poisson_kernel(t, dim, R)
            print(f"{t:7g} {dim:2d} {R:5d} {1 - Q.values.total() - Q.tail_mass:18.3e}")
    print("\nlarge-t agreement with the Gauss-Laguerre rule (N = 1, R = 6)")
    for t in (5.0, 10.0, 20.0):
        a = poisson_kernel(t, 1, 6).values.values
        b = poisson_kernel_laguerre(t, 1, 6, 64, 0.0).values
        print(f"t = {t:5g}: max relative difference {np.max(np.abs(a - b) / a):.2e}")


if __name__ == "__main__":
    main()
