"""Independent reference values for the C++ test suites.

Computed from first principles with the default configuration numbers; the
printed constants are copied into the tests. Run: python3 derive.py
"""

import math

# Default configuration (config/default.json).
MEAN0 = [-4.5, 0.5, 1.4, 2.35]
SIGMA0 = [0.5, 0.065, 0.065, 0.065]
K = 3.5
EDGE_K = 7.0
COEFF = [1.96578, 0.001, 2.53227, 2.30676]
EXPO = 0.7
PE_SCALE = 10000.0
RET = [0.005, 0.005, 0.010, 0.020]
TAU = 1.0
REFS = [-1.23875, 0.95, 1.875]
DAC = 0.025

GIB = 1 << 30
CHANNELS, DIES, PLANES, PAGE = 16, 8, 4, 16 * 1024
CH_BW, HOST_BW = 1.2 * GIB, 8.0 * GIB
T_R, T_PROG = 60.0, 600.0
T_OV, T_PH = 10.0, 30.0
E_PRE, E_PH, E_DIS, E_PROG = 1.50, 0.51, 0.99, 45.0


def phi(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def dists(pe, hours):
    out = []
    for s in range(4):
        sigma = SIGMA0[s] * (1.0 + COEFF[s] * (pe / PE_SCALE) ** EXPO)
        shift = RET[s] * math.log(1.0 + hours / TAU)
        mean = MEAN0[s] + (shift if s == 0 else -shift)
        out.append((mean, sigma))
    return out


def steps(v, ref, mode):
    x = (v - ref) / DAC
    if mode == "up":
        return math.ceil(x - 1e-12)
    if mode == "down":
        return math.floor(x + 1e-12)
    return math.floor(x + 0.5)


def valley(lo, hi):
    m0, s0 = MEAN0[lo], SIGMA0[lo]
    m1, s1 = MEAN0[hi], SIGMA0[hi]
    return 0.5 * ((m0 + K * s0) + (m1 - K * s1))


ABOVE_L3 = MEAN0[3] + EDGE_K * SIGMA0[3] + DAC
BELOW_L0 = MEAN0[0] - (EDGE_K * SIGMA0[0] + DAC)


def clamp(o, width=8):
    lo, hi = -(1 << (width - 1)), (1 << (width - 1)) - 1
    return min(max(o, lo), hi)


def plans(width=8):
    v01, v12, v23 = valley(0, 1), valley(1, 2), valley(2, 3)
    up3 = steps(ABOVE_L3, REFS[2], "up")
    return {
        "and": ("LSB", [0, clamp(steps(v01, REFS[1], "n"), width), 0]),
        "or": ("MSB", [clamp(steps(v12, REFS[0], "n"), width), 0, 0]),
        "xnor": ("SBR", [clamp(steps(v12, REFS[0], "n"), width), 0, clamp(up3, width)], [0, 0, 0]),
        "not": ("MSB", [clamp(steps(v23, REFS[0], "n"), width), 0, clamp(up3, width)]),
        "nand": ("MSB", [clamp(steps(BELOW_L0, REFS[0], "down"), width), 0,
                         clamp(steps(v01, REFS[2], "n"), width)]),
    }


def timelines():
    d = DIES
    t_dma = PLANES * PAGE / CH_BW * 1e6
    stripe = CHANNELS * DIES * PLANES * PAGE
    t_ext = stripe / d / HOST_BW * 1e6
    osc = T_R + t_dma + 2 * d * t_ext
    isc = T_R + (d * (2 - 1) + 1) * t_dma + d * t_ext
    ifc = T_R + t_dma + d * t_ext
    ifc_na = 2 * T_R + T_PROG + T_R + t_dma + d * t_ext
    return t_dma, t_ext, osc, isc, ifc, ifc_na


def rber_and(pe, hours):
    ds = dists(pe, hours)
    t = REFS[1] + plans()["and"][1][1] * DAC
    p0 = 1.0 - phi((t - ds[0][0]) / ds[0][1])
    p1 = phi((t - ds[1][0]) / ds[1][1])
    return 100.0 * 0.25 * (p0 + p1)


def rber_nand_direct():
    m, s = MEAN0[0], SIGMA0[0]
    r0 = REFS[0] + plans()["nand"][1][0] * DAC
    return 100.0 * 0.25 * phi((r0 - m) / s)


def chain(k, aligned, nonaligned, t_op):
    t_dma, t_ext, *_ = timelines()
    d = DIES
    osc = T_R + t_dma + k * d * t_ext
    isc = T_R + (d * (k - 1) + 1) * t_dma + d * t_ext
    mc = aligned * t_op + nonaligned * (2 * T_R + T_PROG + t_op) + t_dma + d * t_ext
    return osc, isc, mc


def main():
    for name, p in plans().items():
        print("plan", name, p)
    print("plan nand width10", plans(10)["nand"])
    t_dma, t_ext, osc, isc, ifc, ifc_na = timelines()
    print(f"t_dma {t_dma!r} t_ext {t_ext!r}")
    print(f"osc {osc!r} isc {isc!r} ifc {ifc!r} ifc_na {ifc_na!r}")
    lat = {n: T_OV + ph * T_PH for n, ph in (("and", 1), ("or", 2), ("xnor", 4))}
    print("read latency", lat)
    e = {n: (E_PRE + ph * E_PH + E_DIS) / 16 for n, ph in (("and", 1), ("or", 2), ("xnor", 4))}
    print("energy per KiB", e, "ratio", e["xnor"] / e["and"])
    print(f"rber and 1500/0 {rber_and(1500, 0)!r}")
    print(f"rber and 1500/24 {rber_and(1500, 24)!r}")
    print(f"rber nand direct fresh {rber_nand_direct()!r}")
    o, i, m = chain(3, 2, 0, T_OV + T_PH)
    print(f"segmentation speedup osc {o / m!r} isc {i / m!r}")
    o, i, m = chain(2, 1, 0, T_OV + 4 * T_PH)
    print(f"encryption speedup osc {o / m!r} isc {i / m!r}")
    o, i, m = chain(30, 1, 28, T_OV + T_PH)
    print(f"bitmap 1 month speedup osc {o / m!r} isc {i / m!r}")
    stripe = CHANNELS * DIES * PLANES * PAGE
    print(f"segmentation stripes at 10000 images {10000 * 800 * 600 * 4 / 8 / stripe!r}")
    print(f"bitmap stripes {8e8 / 8 / stripe!r}")
    print(f"fresh L0 sigma at 1500 {dists(1500, 0)[0][1]!r}")
    print(f"L3 mean after 24h {dists(0, 24)[3][0]!r}")


if __name__ == "__main__":
    main()
