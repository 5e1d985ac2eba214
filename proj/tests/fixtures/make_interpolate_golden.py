"""Regenerates interpolate_example.csv with numpy/scipy, independently of the C++ code.

    python3 make_interpolate_golden.py > interpolate_example.csv

Rows are emitted kind by kind. A Euclidean row is dropped when the
interpolated matrix is not SPD and an E(p) row when some d_i^p crosses zero,
matching the command-line tool.
"""

import numpy as np
from scipy.linalg import expm, logm, sqrtm

S1 = np.array([[4.0, 1.0], [1.0, 100.0]])
S2 = np.array([[100.0, 19.0], [19.0, 4.0]])
PS = [-1.0, 0.0, 1.0, 2.0]
TS = [-0.5 + 2.0 * k / 200 for k in range(201)]


def stats(s):
    d = np.sqrt(np.diag(s))
    rho = s[0, 1] / (d[0] * d[1])
    w, v = np.linalg.eigh(s)
    angle = np.arctan2(v[1, 1], v[0, 1])
    if angle <= -np.pi / 2:
        angle += np.pi
    if angle > np.pi / 2:
        angle -= np.pi
    return [rho, np.linalg.det(s), np.trace(s), np.sqrt(w[1]), np.sqrt(w[0]), angle]


def spd(s):
    w = np.linalg.eigvalsh(s)
    return w.max() > 0 and w.min() > 1e-12 * w.max()


def euclidean(t):
    s = (1 - t) * S1 + t * S2
    return s if spd(s) else None


def log_euclidean(t):
    return expm((1 - t) * logm(S1) + t * logm(S2)).real


def affine_invariant(t):
    r = sqrtm(S1).real
    ri = np.linalg.inv(r)
    return r @ expm(t * logm(ri @ S2 @ ri)).real @ r


def product(p):
    d1, d2 = np.sqrt(np.diag(S1)), np.sqrt(np.diag(S2))
    r1 = S1[0, 1] / (d1[0] * d1[1])
    r2 = S2[0, 1] / (d2[0] * d2[1])

    def at(t):
        if p == 0:
            d = np.exp((1 - t) * np.log(d1) + t * np.log(d2))
        else:
            base = d1**p + t * (d2**p - d1**p)
            if np.any(base <= 0):
                return None
            d = base ** (1 / p)
        rho = np.tanh(t * (np.arctanh(r2) - np.arctanh(r1)) + np.arctanh(r1))
        c = np.array([[1.0, rho], [rho, 1.0]])
        return np.diag(d) @ c @ np.diag(d)

    return at


def fmt(x):
    return repr(float(x))


def main():
    kinds = [("euclidean", euclidean), ("log_euclidean", log_euclidean),
             ("affine_invariant", affine_invariant)]
    kinds += [("E(%g)xQA" % p, product(p)) for p in PS]
    print("t,kind,rho,det,trace,axis1_len,axis2_len,axis_angle")
    for name, curve in kinds:
        for t in TS:
            s = curve(t)
            if s is None:
                continue
            print(",".join([fmt(t), name] + [fmt(v) for v in stats(s)]))


if __name__ == "__main__":
    main()
