#!/usr/bin/env python3
"""Offline reference table for Bessel evaluations (50 significant digits).

Writes one record per line: kind nu x re im, %.17e formatting.
Run: python3 gen_bessel_table.py > ../data/bessel_table.txt
"""
import mpmath as mp

mp.mp.dps = 50

ORDERS = ["0", "1/3", "1/2", "1", "3/2", "2", "5/2", "7/2", "5", "7", "10",
          "33.25", "50", "100", "3.7", "0.9995"]
XS = ["1e-8", "1e-5", "1e-3", "0.01", "0.1", "0.5", "1", "2", "3.14159", "5",
      "10", "12.5", "20", "30", "55", "100", "300", "1000"]
NEG = ["-1/2", "-1/3", "-3/2", "-0.25"]


def val(kind, nu, x):
    if kind == "J":
        return mp.besselj(nu, x)
    if kind == "Y":
        return mp.bessely(nu, x)
    if kind == "I":
        return mp.besseli(nu, x)
    if kind == "H1":
        return mp.hankel1(nu, x)
    if kind == "H2":
        return mp.hankel2(nu, x)
    raise ValueError(kind)


def emit(kind, nu, x):
    # evaluate at the exact binary64 inputs the C++ side will read back
    nu = mp.mpf(float(nu))
    x = mp.mpf(float(x))
    v = mp.mpc(val(kind, nu, x))
    if abs(v) > mp.mpf("1e290") or (abs(v) < mp.mpf("1e-290") and v != 0):
        return
    print("%s %.17e %.17e %.17e %.17e" % (kind, float(nu), float(x),
                                          float(v.real), float(v.imag)))


def main():
    for s in ORDERS:
        nu = mp.mpf(mp.fraction(*map(int, s.split("/")))) if "/" in s else mp.mpf(s)
        for xs in XS:
            x = mp.mpf(xs)
            for kind in ("J", "Y"):
                emit(kind, nu, x)
            if float(x) <= 100:
                emit("I", nu, x)
            if xs in ("0.1", "1", "10", "100"):
                emit("H1", nu, x)
                emit("H2", nu, x)
    for s in NEG:
        p, q = (s.split("/") + ["1"])[:2]
        nu = mp.mpf(p) / mp.mpf(q)
        for xs in ("0.1", "1", "2", "10"):
            x = mp.mpf(xs)
            for kind in ("J", "Y", "H1"):
                emit(kind, nu, x)


if __name__ == "__main__":
    main()
