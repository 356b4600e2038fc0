#!/usr/bin/env python3
"""Write synthetic_alloys.csv: 101 fictitious R-T binary alloys.

Element properties are rounded handbook values; 4f and 3d quantum numbers come
from Hund's rules. Unit-cell volumes, interatomic radii and the Tc target are
invented from smooth formulas plus seeded noise, so the file only exercises the
pipeline and says nothing about real Curie temperatures.

    python3 make_synthetic_alloys.py [output.csv]
"""

import csv
import math
import random
import sys

# symbol: (Z, covalent radius A, first ionization eV, Pauling electronegativity, 4f electrons)
RARE_EARTHS = {
    "Y": (39, 1.90, 6.22, 1.22, 0),
    "La": (57, 2.07, 5.58, 1.10, 0),
    "Ce": (58, 2.04, 5.54, 1.12, 1),
    "Pr": (59, 2.03, 5.47, 1.13, 2),
    "Nd": (60, 2.01, 5.53, 1.14, 3),
    "Sm": (62, 1.98, 5.64, 1.17, 5),
    "Gd": (64, 1.96, 6.15, 1.20, 7),
    "Tb": (65, 1.94, 5.86, 1.20, 8),
    "Dy": (66, 1.92, 5.94, 1.22, 9),
    "Ho": (67, 1.92, 6.02, 1.23, 10),
    "Er": (68, 1.89, 6.11, 1.24, 11),
    "Tm": (69, 1.90, 6.18, 1.25, 12),
}

# symbol: (Z, covalent radius A, first ionization eV, Pauling electronegativity, 3d electrons, Tc scale K)
TRANSITION_METALS = {
    "Mn": (25, 1.39, 7.43, 1.55, 5, 420.0),
    "Fe": (26, 1.32, 7.90, 1.83, 6, 700.0),
    "Co": (27, 1.26, 7.88, 1.88, 7, 1100.0),
    "Ni": (28, 1.24, 7.64, 1.91, 8, 250.0),
}

# (T atoms, R atoms) per formula unit
STOICHIOMETRIES = [(2, 1), (3, 1), (7, 2), (5, 1), (17, 2), (23, 6), (13, 1), (12, 1)]

DESCRIPTORS = [
    "Z_R", "Z_T", "r_covR", "r_covT", "IP_R", "IP_T", "chi_R", "chi_T",
    "S_3d", "S_4f", "L_3d", "L_4f", "J_3d", "J_4f", "J_4f_gj", "J_4f_1mgj",
    "C_T", "C_R", "r_RR", "r_TT", "r_TR",
]


def hund(n, shell_l):
    """(S, L, J) of n electrons in a shell with orbital number shell_l."""
    slots = 2 * shell_l + 1
    if n == 0 or n == 2 * slots:
        return 0.0, 0.0, 0.0
    ups = min(n, slots)
    downs = n - ups
    s = 0.5 * (ups - downs)
    ml = list(range(shell_l, -shell_l - 1, -1))
    l = abs(sum(ml[:ups]) + sum(ml[:downs]))
    j = abs(l - s) if n < slots else l + s
    return s, float(l), j


def lande(s, l, j):
    if j == 0:
        return 0.0
    return 1.5 + (s * (s + 1) - l * (l + 1)) / (2 * j * (j + 1))


def alloy(t_sym, r_sym, n_t, n_r, rng):
    z_r, rc_r, ip_r, chi_r, n4f = RARE_EARTHS[r_sym]
    z_t, rc_t, ip_t, chi_t, n3d, scale = TRANSITION_METALS[t_sym]
    s4, l4, j4 = hund(n4f, 3)
    s3, l3, j3 = hund(n3d, 2)
    gj = lande(s4, l4, j4)

    # Packing-fraction volume per formula unit with a little structural scatter.
    volume = (n_t * rc_t ** 3 + n_r * rc_r ** 3) * 4.0 * math.pi / 3.0 / 0.70
    volume *= 1.0 + rng.gauss(0.0, 0.01)
    c_t = n_t / volume
    c_r = n_r / volume
    r_rr = 2.0 * rc_r * (1.0 + 0.15 * n_t / (n_t + n_r)) * (1.0 + rng.gauss(0.0, 0.005))
    r_tt = 2.0 * rc_t * (1.0 + rng.gauss(0.0, 0.005))
    r_tr = 0.5 * (r_rr + r_tt) * 0.98

    # Tc: transition-metal exchange grows with T content; 4f spin adds a de Gennes term.
    fraction_t = n_t / (n_t + n_r)
    de_gennes = (gj - 1.0) ** 2 * j4 * (j4 + 1.0)
    tc = scale * fraction_t ** 3 + 18.0 * de_gennes * (1.0 - fraction_t) + 40.0
    tc *= 1.0 + rng.gauss(0.0, 0.04)

    row = {
        "Z_R": z_r, "Z_T": z_t, "r_covR": rc_r, "r_covT": rc_t,
        "IP_R": ip_r, "IP_T": ip_t, "chi_R": chi_r, "chi_T": chi_t,
        "S_3d": s3, "S_4f": s4, "L_3d": l3, "L_4f": l4, "J_3d": j3, "J_4f": j4,
        "J_4f_gj": j4 * gj, "J_4f_1mgj": j4 * (1.0 - gj),
        "C_T": round(c_t, 6), "C_R": round(c_r, 6),
        "r_RR": round(r_rr, 4), "r_TT": round(r_tt, 4), "r_TR": round(r_tr, 4),
    }
    name = f"{t_sym}{n_t if n_t > 1 else ''}{r_sym}{n_r if n_r > 1 else ''}"
    return name, row, round(tc, 1)


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "synthetic_alloys.csv"
    rng = random.Random(20180101)
    combos = [(t, r, nt, nr) for t in TRANSITION_METALS for r in RARE_EARTHS for nt, nr in STOICHIOMETRIES]
    rng.shuffle(combos)
    chosen = sorted(combos[:101], key=lambda c: (c[0], c[2] / c[3], RARE_EARTHS[c[1]][0]))
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id"] + DESCRIPTORS + ["Tc"])
        for t, r, nt, nr in chosen:
            name, row, tc = alloy(t, r, nt, nr, rng)
            w.writerow([name] + [repr(float(row[k])) for k in DESCRIPTORS] + [repr(tc)])


if __name__ == "__main__":
    main()
