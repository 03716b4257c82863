"""High-precision reference evaluation of the KTP dispersion and phase mismatch.

Coefficients are typed in here independently of the package data file so a
transcription slip in either place shows up as a test failure.
"""

from mpmath import mp, mpf, pi, sqrt

mp.dps = 30

SELLMEIER = {
    "y": (mpf("2.19229"), mpf("0.83547"), mpf("0.04970"), mpf("-0.01621")),
    "z": (mpf("2.25411"), mpf("1.06543"), mpf("0.05486"), mpf("-0.02140")),
}
N1 = {
    "y": [mpf("6.2897e-6"), mpf("6.3061e-6"), mpf("-6.0629e-6"), mpf("2.6486e-6")],
    "z": [mpf("9.9587e-6"), mpf("9.9228e-6"), mpf("-8.9603e-6"), mpf("4.1010e-6")],
}
N2 = {
    "y": [mpf("-0.14445e-8"), mpf("2.2244e-8"), mpf("-3.5770e-8"), mpf("1.3470e-8")],
    "z": [mpf("-1.1882e-8"), mpf("10.459e-8"), mpf("-9.8136e-8"), mpf("3.1481e-8")],
}
AXES = {"type0": ("z", "z", "z"), "type2": ("y", "z", "y")}


def n_sellmeier(axis, lam_um):
    a, b, c, d = SELLMEIER[axis]
    lam = mpf(lam_um)
    return sqrt(a + b / (1 - c / lam**2) + d * lam**2)


def dn(axis, lam_um, t):
    lam, dt = mpf(lam_um), mpf(t) - 25
    n1 = sum(c / lam**m for m, c in enumerate(N1[axis]))
    n2 = sum(c / lam**m for m, c in enumerate(N2[axis]))
    return n1 * dt + n2 * dt**2


def n(axis, lam_um, t):
    return n_sellmeier(axis, lam_um) + dn(axis, lam_um, t)


def k(axis, lam_nm, t):
    lam = mpf(lam_nm) / 1000
    return 2 * pi * n(axis, lam, t) / lam


def period(t, p0="9.96", alpha="6.7e-6", beta="11e-9"):
    dt = mpf(t) - 25
    return mpf(p0) * (1 + mpf(alpha) * dt + mpf(beta) * dt**2)


def mismatch(kind, m, kwg, pump, signal, t):
    pa, sa, ia = AXES[kind]
    pump, signal = mpf(pump), mpf(signal)
    idler = 1 / (1 / pump - 1 / signal)
    return (k(pa, pump, t) - k(sa, signal, t) - k(ia, idler, t)
            - m * 2 * pi / period(t) - mpf(kwg))
