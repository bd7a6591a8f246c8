"""Exact discretized-bath simulation against perturbative Gamma, as the bath is refined.

Prints relative gaps |Gamma_sim - Gamma_pert| / Gamma_pert for
  * the spin-boson model (eps=2, Delta=2, theta=pi/2), n_max=2, M = 4, 6, 8 modes on (0, 40];
  * the rotating-wave decay model in the single-excitation sector, M = 15 ... 120 on (0, 100];
  * pure dephasing with the factorized solver, M = 10 ... 80 on (0, 40].
"""

import argparse
import math

from qzeno import SpectralDensity, StatePrep, SystemParams
from qzeno.bathsim import compare_to_perturbative, discretize
from qzeno.decay import GENERAL, POPULATION_DECAY, PURE_DEPHASING, ModelSpec


def table(title, model, modes, omega_max, taus, n_max=2):
    print(f"\n{title}")
    print("M".rjust(5) + "  " + "".join(f"tau={t:<7g}" for t in taus))
    for m in modes:
        rep = compare_to_perturbative(model, discretize(model.bath, m, omega_max), taus, n_max=n_max)
        print(f"{m:5d}  " + "".join(f"{g:<11.4f}" for g in rep.gaps))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--G", type=float, default=0.01)
    ap.add_argument("--max-modes", type=int, default=8, help="largest M for the full spin-boson run")
    args = ap.parse_args()
    bath = SpectralDensity(args.G, 1.0, 10.0)
    x = StatePrep.qubit(math.pi / 2, 0.0)
    z = StatePrep.qubit(0.0, 0.0)
    table("spin-boson, full truncated Fock space",
          ModelSpec(GENERAL, SystemParams(2.0, 2.0), x, bath),
          range(4, args.max_modes + 1, 2), 40.0, [0.1, 0.3, 0.5])
    table("rotating-wave decay, single-excitation sector",
          ModelSpec(POPULATION_DECAY, SystemParams(2.0, 0.0), z, bath),
          [15, 30, 60, 120], 100.0, [0.1, 0.5, 1.0, 2.0])
    table("pure dephasing, factorized modes",
          ModelSpec(PURE_DEPHASING, SystemParams(2.0, 0.0), x, bath),
          [10, 20, 40, 80], 40.0, [0.2, 0.8, 1.4, 2.0])


if __name__ == "__main__":
    main()
