#!/usr/bin/env python3
"""Generate symmetric volume cubature data for the SBP operator families.

Each rule is built from S3-symmetric orbits in barycentric coordinates and
solved for exactness with a nonlinear least-squares fit. The output files are
consumed by the C++ loader, which re-validates every invariant at load time.
"""
import json
import math
import sys
from itertools import permutations
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

VERTS = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
AREA = 2.0


def monomial_integral(a, b):
    # integral of xi^a eta^b over the reference triangle via the unit simplex
    total = 0.0
    for i in range(a + 1):
        for j in range(b + 1):
            c = math.comb(a, i) * math.comb(b, j) * 2**i * 2**j * (-1) ** (a - i) * (-1) ** (b - j)
            total += c * math.factorial(i) * math.factorial(j) / math.factorial(i + j + 2)
    return 4.0 * total


def bary_to_ref(l):
    return l[0] * VERTS[0] + l[1] * VERTS[1] + l[2] * VERTS[2]


def orbit(kind, params):
    if kind == "c":
        pts = [(1 / 3, 1 / 3, 1 / 3)]
    elif kind == "3":
        a = params[0]
        pts = [(a, a, 1 - 2 * a), (a, 1 - 2 * a, a), (1 - 2 * a, a, a)]
    elif kind == "6":
        a, b = params
        pts = sorted(set(permutations((a, b, 1 - a - b))))
    else:
        raise ValueError(kind)
    return [bary_to_ref(p) for p in pts]


class Rule:
    """Orbit layout: list of (kind, fixed_params or None, n_free_params)."""

    def __init__(self, layout):
        self.layout = layout

    def nfree(self):
        n = 0
        for kind, fixed, nf in self.layout:
            n += nf + 1  # free position params plus one weight
        return n

    def unpack(self, x):
        pts, wts, k = [], [], 0
        for kind, fixed, nf in self.layout:
            params = list(fixed) if fixed is not None else []
            params += list(x[k:k + nf])
            k += nf
            w = x[k]
            k += 1
            o = orbit(kind, params)
            pts += o
            wts += [w] * len(o)
        return np.array(pts), np.array(wts)


def residual(x, rule, q):
    pts, wts = rule.unpack(x)
    res = []
    for a in range(q + 1):
        for b in range(q + 1 - a):
            res.append((wts * pts[:, 0] ** a * pts[:, 1] ** b).sum() - monomial_integral(a, b))
    return np.array(res)


def inside(pts, tol=-1e-14):
    xi, eta = pts[:, 0], pts[:, 1]
    return np.all(xi >= -1 + tol) and np.all(eta >= -1 + tol) and np.all(xi + eta <= 0 - tol)


def solve(rule, q, seed, tries=4000, interior=True, exhaustive=False):
    # exhaustive: scan every start and keep the largest smallest weight (for solution families)
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(tries):
        x0 = []
        for kind, fixed, nf in rule.layout:
            if kind == "3":
                x0 += list(rng.uniform(0.02, 0.48, nf))
            elif kind == "6":
                a = rng.uniform(0.01, 0.5)
                b = rng.uniform(0.01, 1 - a - 0.01)
                x0 += [a, b][:nf]
            x0.append(rng.uniform(0.01, 0.5))
        sol = least_squares(residual, np.array(x0), args=(rule, q), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        r = np.abs(residual(sol.x, rule, q)).max()
        pts, wts = rule.unpack(sol.x)
        if r < 1e-14 and wts.min() > 0:
            strict = inside(pts, 1e-8) if interior else inside(pts)
            if strict and (best is None or wts.min() > best[1].min()):
                best = (pts, wts, sol.x)
                if wts.min() > 0.005 and not exhaustive:
                    break
    if best is None:
        raise RuntimeError("no rule found")
    return best


def lg(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def lgl_interior(n):
    # interior Legendre-Gauss-Lobatto points for n total points
    c = np.zeros(n)
    c[-1] = 1
    return np.sort(np.polynomial.legendre.Legendre(c).deriv().roots().real)


def proriol(pts, p):
    from scipy.special import eval_jacobi
    xi, eta = pts[:, 0], pts[:, 1]
    cols = []
    for i in range(p + 1):
        for j in range(p + 1 - i):
            with np.errstate(divide="ignore", invalid="ignore"):
                a = np.where(np.abs(1 - eta) > 1e-14, 2 * (1 + xi) / (1 - eta) - 1, -1.0)
            cols.append(math.sqrt(2) * eval_jacobi(i, 0, 0, a) * eval_jacobi(j, 2 * i + 1, 0, eta) * (1 - eta) ** i)
    return np.array(cols).T


def write(family, p, pts, wts, q, collocation=None):
    x1d, w1d = lg(p + 1)
    out = {
        "family": family,
        "p": p,
        "volume_degree": q,
        "volume_nodes": [[float(a), float(b)] for a, b in pts],
        "volume_weights": [float(w) for w in wts],
        "facet_quadrature": {"nodes_1d": [float(v) for v in x1d], "weights_1d": [float(v) for v in w1d]},
    }
    if collocation is not None:
        out["diag_e_collocation"] = collocation
    path = Path(__file__).parent / f"{family}_p{p}.json"
    path.write_text(json.dumps(out, indent=1) + "\n")
    V = proriol(pts, p)
    print(f"{family} p={p}: n_p={len(pts)} min w={wts.min():.3e} rank={np.linalg.matrix_rank(V)}/{V.shape[1]} cond={np.linalg.cond(V):.2e}")


def facet_point(f, s):
    # facets: f1 v2->v3, f2 v3->v1, f3 v1->v2; s in [-1,1]
    a, b = [(1, 2), (2, 0), (0, 1)][f]
    return VERTS[a] + 0.5 * (1 + s) * (VERTS[b] - VERTS[a])


def omega():
    layouts = {
        1: [("3", (1.0 / 6.0,), 0)],  # every orbit is exact here; take the degree-2 position
        2: [("3", None, 1), ("3", None, 1)],
        3: [("c", None, 0), ("3", None, 1), ("6", None, 2)],
        4: [("3", None, 1), ("3", None, 1), ("3", None, 1), ("6", None, 2)],
    }
    for p, lay in layouts.items():
        q = 2 * p - 1
        rule = Rule(lay)
        for seed in range(50):
            # p = 2 leaves a one-parameter family of rules
            pts, wts, _ = solve(rule, q, seed, exhaustive=(p == 2))
            if np.linalg.matrix_rank(proriol(pts, p)) == len(pts):
                break
        write("omega", p, pts, wts, q)


def gamma():
    for p in (1, 2, 3, 4):
        q = 2 * p - 1
        ts = lgl_interior(p + 1)  # only used to count edge pairs
        lay = [("3", (0.0,), 0)]  # vertices
        if p % 2 == 0:
            lay.append(("3", (0.5,), 0))  # edge midpoints
        for _ in ts[ts > 1e-12]:
            lay.append(("6", (0.0,), 1))  # symmetric edge pair, position free
        if p == 2:
            lay.append(("c", None, 0))
        if p == 3:
            lay.append(("3", None, 1))
        if p == 4:
            lay += [("3", None, 1), ("3", None, 1)]
        rule = Rule(lay)
        pts, wts, _ = solve(rule, q, 0, interior=False)
        write("gamma", p, pts, wts, q)


def diage():
    # interior orbits per degree; facet nodes are the Legendre-Gauss points of every facet
    layouts = {1: "c", 2: "c", 3: "6", 4: "c33"}
    for p, layname in layouts.items():
        diage_rule(p, layname, 2 * p - 1)


def max_min_weights(C, rhs):
    # exact weights; when the moment system leaves freedom, maximize the smallest weight
    w = np.linalg.lstsq(C, rhs, rcond=None)[0]
    if np.linalg.matrix_rank(C) == C.shape[1]:
        return w
    from scipy.optimize import linprog
    n = C.shape[1]
    cost = np.zeros(n + 1)
    cost[-1] = -1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])  # t - w_i <= 0
    A_eq = np.hstack([C, np.zeros((C.shape[0], 1))])
    sol = linprog(cost, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=rhs, bounds=[(None, None)] * (n + 1))
    return sol.x[:n] if sol.success else w


def diage_rule(p, layname, q):
    x1d, _ = lg(p + 1)
    facet_pts = np.array([facet_point(f, s) for f in range(3) for s in x1d])
    classes = sorted(set(round(abs(s), 14) for s in x1d))
    cls_of = [classes.index(round(abs(s), 14)) for f in range(3) for s in x1d]
    mons = [(a, b) for a in range(q + 1) for b in range(q + 1 - a)]
    rhs = np.array([monomial_integral(a, b) for a, b in mons])
    npar = sum({"c": 0, "3": 1, "6": 2}[c] for c in layname)

    def columns(params):
        # weights enter linearly: one moment column per facet class and per interior orbit
        cols, orbits, k = [], [], 0
        for c in range(len(classes)):
            P = facet_pts[[i for i, ci in enumerate(cls_of) if ci == c]]
            cols.append([(P[:, 0] ** a * P[:, 1] ** b).sum() for a, b in mons])
        for ch in layname:
            n = {"c": 0, "3": 1, "6": 2}[ch]
            o = np.array(orbit(ch, list(params[k:k + n])))
            k += n
            orbits.append(o)
            cols.append([(o[:, 0] ** a * o[:, 1] ** b).sum() for a, b in mons])
        return np.array(cols).T, orbits

    def res(params):
        C, _ = columns(params)
        w = np.linalg.lstsq(C, rhs, rcond=None)[0]
        return C @ w - rhs

    rng = np.random.default_rng(0)
    best = None
    for _ in range(500 if npar else 1):
        x = rng.uniform(0.01, 0.49, npar)
        if npar:
            x = least_squares(res, x, xtol=1e-15, ftol=1e-15, gtol=1e-15).x
        if np.abs(res(x)).max() > 1e-13:
            continue
        C, orbits = columns(x)
        w = max_min_weights(C, rhs)
        if w.min() <= 0 or not inside(np.vstack(orbits), 1e-8):
            continue
        if best is None or w.min() > best[0]:
            best = (w.min(), x, w, orbits)
    if best is None:
        raise RuntimeError(f"diage p={p}")
    _, _, w, orbits = best
    pts = np.vstack([facet_pts] + orbits)
    wts = np.concatenate([[w[c] for c in cls_of]] + [[w[len(classes) + i]] * len(o) for i, o in enumerate(orbits)])
    coll = [[f + 1, j + 1, f * (p + 1) + j + 1] for f in range(3) for j in range(p + 1)]
    write("diage", p, pts, wts, q, coll)


if __name__ == "__main__":
    which = sys.argv[1:] or ["omega", "gamma", "diage"]
    for w in which:
        globals()[w]()
