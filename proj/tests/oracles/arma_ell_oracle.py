#!/usr/bin/env python3
"""High-precision reference values for the closed-form ARMA-type kernel.

ell(u) = q e^{pu} (1 - 2q(p-q) / ((2p-q)^2 e^{2(p-q)u} - q^2))

Evaluated with mpmath at 60 significant digits directly from the formula, with
no rearrangement. Output: tests/data/arma_ell_oracle.csv (p,q,u,ell).
"""
import itertools
import pathlib

import mpmath as mp

mp.mp.dps = 60


def ell(p, q, u):
    p, q, u = mp.mpf(p), mp.mpf(q), mp.mpf(u)
    den = (2 * p - q) ** 2 * mp.exp(2 * (p - q) * u) - q ** 2
    return q * mp.exp(p * u) * (1 - 2 * q * (p - q) / den)


def grid():
    pts = []
    # Moderate regime: 4 x 4 x 4 = 64 points.
    ps = ["0.5", "1", "2", "5"]
    qs = ["-3", "-0.5", "0.25", "0.45"]
    us = ["0", "0.001", "0.37", "3"]
    for p, q, u in itertools.product(ps, qs, us):
        pts.append((p, q, u))
    # q close to p: denominator cancellation at small u (12 points).
    for p, q in [("1", "0.999999"), ("2", "1.9999"), ("0.3", "0.29999999")]:
        for u in ["0", "1e-6", "0.5", "10"]:
            pts.append((p, q, u))
    # Near-overflow: p*u in [600, 709], e^{2(p-q)u} may overflow double (24 points).
    for p, q in [("1", "0.5"), ("2", "1"), ("10", "-2"), ("3", "2.9")]:
        for pu in ["600", "650", "690", "700", "705", "708"]:
            pts.append((p, q, str(mp.mpf(pu) / mp.mpf(p))))
    assert len(pts) == 100, len(pts)
    return pts


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "arma_ell_oracle.csv"
    lines = ["p,q,u,ell"]
    for p, q, u in grid():
        # Evaluate at the exact binary64 inputs the C++ side will parse.
        pf, qf, uf = float(p), float(q), float(mp.mpf(u))
        v = ell(pf, qf, uf)
        lines.append(f"{pf!r},{qf!r},{uf!r},{mp.nstr(v, 25)}")
    out.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} rows to {out}")


if __name__ == "__main__":
    main()
