"""Independent symbolic oracles (sympy) for metric geometry."""
from __future__ import annotations

import numpy as np
import sympy as sp


class SymbolicMetric:
    """Christoffels, Ricci, scalar curvature and Cotton tensor of a symbolic metric."""

    def __init__(self, g: sp.Matrix, coords):
        self.g, self.x = sp.Matrix(g), list(coords)
        n = len(self.x)
        ginv = sp.simplify(self.g.inv())
        self.n = n
        self.gamma = [[[sp.simplify(sum(ginv[a, l] * (sp.diff(self.g[l, b], self.x[c])
                                                      + sp.diff(self.g[l, c], self.x[b])
                                                      - sp.diff(self.g[b, c], self.x[l]))
                                        for l in range(n)) / 2)
                        for c in range(n)] for b in range(n)] for a in range(n)]
        G = self.gamma

        def riem(a, b, c, d):
            return (sp.diff(G[a][d][b], self.x[c]) - sp.diff(G[a][c][b], self.x[d])
                    + sum(G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b] for e in range(n)))

        self.ricci = sp.Matrix(n, n, lambda b, d: sp.simplify(sum(riem(c, b, c, d) for c in range(n))))
        self.scalar = sp.simplify(sum(ginv[b, d] * self.ricci[b, d] for b in range(n) for d in range(n)))

    def cotton(self):
        n, R, G, g = self.n, self.ricci, self.gamma, self.g

        def cov(i, j, k):  # nabla_k R_ij
            return (sp.diff(R[i, j], self.x[k]) - sum(G[l][k][i] * R[l, j] for l in range(n))
                    - sum(G[l][k][j] * R[i, l] for l in range(n)))

        return [[[sp.simplify(cov(i, j, k) - cov(i, k, j)
                              - sp.Rational(1, 4) * (g[i, j] * sp.diff(self.scalar, self.x[k])
                                                     - g[i, k] * sp.diff(self.scalar, self.x[j])))
                  for k in range(n)] for j in range(n)] for i in range(n)]

    def evaluate(self, expr_nested, points: np.ndarray) -> np.ndarray:
        f = sp.lambdify(self.x, expr_nested, "numpy")
        args = [points[..., i] for i in range(self.n)]
        out = np.asarray(f(*args), dtype=float) if not isinstance(expr_nested, list) else None
        if out is None:
            arr = sp.Array(expr_nested)
            flat = [sp.lambdify(self.x, e, "numpy")(*args) for e in arr.reshape(len(arr)).tolist()]
            out = np.stack([np.broadcast_to(np.asarray(v, float), points.shape[:-1]) for v in flat], -1)
            out = out.reshape(points.shape[:-1] + arr.shape)
        return np.broadcast_to(out, points.shape[:-1] + out.shape[len(points.shape) - 1:])
