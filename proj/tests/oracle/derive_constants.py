"""Independent reference values frozen into the C++ tests.

Closed forms are evaluated with mpmath at 30 digits; eigenvalues come from
scipy's sparse Lanczos solver on independently assembled finite-difference
matrices. Run:  python3 tests/oracle/derive_constants.py
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from mpmath import mp, mpf, sqrt

mp.dps = 30


def harmonic_lambda(A, B):
    return sqrt(mpf(A) * (1 + mpf(B) ** 2)) - 1


def speeds(lam, B, c):
    lam, B, c = mpf(lam), mpf(B), mpf(c)
    q = 1 + B * B
    root = sqrt(-4 * lam / q - B * B * c * c / q**2)
    drift = B * B * c / q
    wxp, wxm = drift + root, drift - root
    return dict(wxp=wxp, wxm=wxm, wyp=B * wxp - B * c, wym=B * wxm - B * c,
                c_star=2 * sqrt(-lam), c_star_star=2 * sqrt(-lam * q / (B * B)))


def dirichlet_1d(n, h):
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def confined_lambda(A, B, eps, R, h):
    """-Laplacian - r on [-R,R] x [-(B+1)R, (B+1)R], Dirichlet, 5-point."""
    xs = np.arange(-R + h, R - h / 2, h)
    Ry = (B + 1) * R
    ys = np.arange(-Ry + h, Ry - h / 2, h)
    L = sp.kronsum(dirichlet_1d(len(ys), h), dirichlet_1d(len(xs), h), format="csr")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    r = 1 - A * (Y - B * X) ** 2 - eps * X**2
    H = L - sp.diags(np.maximum(r, -50).ravel())
    val = sla.eigsh(H, k=1, sigma=-2.0, which="LM", return_eigenvectors=False)
    return float(val[0])


def oned_lambda(profile, D, R, h):
    zs = np.arange(-R + h, R - h / 2, h)
    H = D * dirichlet_1d(len(zs), h) - sp.diags(profile(zs))
    return float(sla.eigsh(H, k=1, sigma=-2.0, which="LM", return_eigenvectors=False)[0])


if __name__ == "__main__":
    lam = harmonic_lambda(0.25, 1)
    print("lambda_inf(A=.25,B=1) =", mp.nstr(lam, 16))
    print("lambda_inf(A=1,B=1)   =", mp.nstr(harmonic_lambda(1, 1), 16))
    s = speeds(lam, 1, 0.5)
    for k, v in s.items():
        print(f"{k:12s}(c=0.5)    =", mp.nstr(v, 16))
    print("width c=0.5           =", mp.nstr(s["wxp"] - s["wxm"], 16))
    print("width via c**         =", mp.nstr(sqrt(s["c_star_star"] ** 2 - mpf(0.25)), 16))
    print("omega c=0             =", mp.nstr(2 * sqrt(-lam / 2), 16))
    print("1D rbar=1-z^2, D=2    =", oned_lambda(lambda z: 1 - z**2, 2.0, 12.0, 0.02))
    print("1D rbar=1-z^2/4, D=2  =", oned_lambda(lambda z: 1 - 0.25 * z**2, 2.0, 12.0, 0.02))
    for eps in (0.1, 0.01, 0.001):
        R = 12.0 if eps >= 0.01 else 24.0
        print(f"confined eps={eps:<6} h=.2 =", confined_lambda(0.25, 1.0, eps, R, 0.2))
    # Logistic ODE with r=1, k*H, n0 uniform: N' = N (r - k N) for the column mass.
    r, kN0, t = 1.0, 0.1, 2.0
    print("logistic N(2)/N(0), r=1, kN0=.1 =", r * np.exp(r * t) / (r + kN0 * (np.exp(r * t) - 1)))
