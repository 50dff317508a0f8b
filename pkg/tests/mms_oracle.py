"""Manufactured fields in the moving film domain, mapped to the strip with sympy.

Used by the transform / pressure tests as an oracle that is independent of the
term-by-term assembly in filmcascade.transform.
"""

import numpy as np
import sympy as sp

x, y, t, Y = sp.symbols("x y t Y", real=True)


def build(delta, eps, R, W, alpha):
    d, e = sp.nsimplify(delta), sp.nsimplify(eps)
    A = sp.Rational(3, 10) + t / 10
    B = sp.Rational(1, 5) - t ** 2 / 20
    eta = A * sp.cos(2 * sp.pi * x) + B * sp.sin(2 * sp.pi * x)
    m1 = 1 / (1 + (d * (1 - y) * y) ** 4)
    eta_t = eta * m1                                   # extension of a single mode
    Psi = Y ** 2 * (sp.Rational(1, 2) * sp.cos(2 * sp.pi * x)
                    + sp.Rational(1, 4) * sp.sin(2 * sp.pi * x + t)) * (1 + Y / 3)
    up = sp.diff(Psi, Y)
    vp = -sp.diff(Psi, x)
    pp = sp.cos(2 * sp.pi * x) * (1 + Y ** 2) * (1 + t) + sp.sin(2 * sp.pi * x) * Y / 2
    ub = 2 * Y - Y ** 2
    Rs = sp.nsimplify(R)
    # physical residual of the perturbation momentum equation
    grad = lambda f: (d * sp.diff(f, x), sp.diff(f, Y))
    lap = lambda f: d ** 2 * sp.diff(f, x, 2) + sp.diff(f, Y, 2)
    uvec = (up, d * vp)
    res = []
    for c in range(2):
        uc = uvec[c]
        Uc = ub if c == 0 else 0
        adv1 = (ub + e * up) * grad(uc)[0] + e * d * vp * grad(uc)[1]
        adv2 = up * grad(Uc)[0] + d * vp * grad(Uc)[1] if c == 0 else 0
        r = d * sp.diff(uc, t) + adv1 + adv2 + (2 / Rs) * grad(pp)[c] - lap(uc) / Rs
        res.append(r)
    Ymap = y * (1 + e * eta_t)
    sub = lambda f: f.subs(Y, Ymap)
    J = 1 + e * sp.diff(y * eta_t, y)
    u_s = J * sub(up)
    v_s = sub(vp) - y * e * sp.diff(eta_t, x) * sub(up)
    p_s = sub(pp)
    res_s = [sub(r) for r in res]
    # physical stress balance on the surface Y = 1 + eps eta
    def Dsym(i, j):
        gi = grad(uvec[j] * e + (ub if j == 0 else 0))[i]
        gj = grad(uvec[i] * e + (ub if i == 0 else 0))[j]
        return (gi + gj) / 2
    nvec = (-e * d * sp.diff(eta, x), 1)
    tvec = (1, e * d * sp.diff(eta, x))
    Sn = [sum(Dsym(i, j) * nvec[j] for j in range(2)) for i in range(2)]
    tang = sum(Sn[i] * tvec[i] for i in range(2))
    nn = sum(Sn[i] * nvec[i] for i in range(2))
    n2 = 1 + (e * d * sp.diff(eta, x)) ** 2
    surf = lambda f: f.subs(Y, 1 + e * eta)
    tang_s = surf(tang)
    # normal balance written as p - (normal viscous stress)/(eps |n|^2) - forcing
    sa = sp.sin(sp.nsimplify(alpha)) if not isinstance(alpha, float) else sp.Float(np.sin(alpha), 30)
    ta = sp.Float(np.tan(alpha), 30)
    Ws = sp.nsimplify(W)
    forcing = -eta / ta + d ** 2 * Ws / sa * sp.diff(eta, x, 2) / n2 ** sp.Rational(3, 2)
    normal_s = surf(pp - nn / (e * n2) + forcing)
    # physical pressure source: (2/R) lap p = -eps^{-1} tr(grad(eps u + U)^T)^2
    G = [[grad(uvec[j] * e + (ub if j == 0 else 0))[i] for j in range(2)] for i in range(2)]
    trsq = sum(G[i][j] * G[j][i] for i in range(2) for j in range(2))
    fsrc = -trsq / e
    fsrc_s = sub(fsrc)
    return dict(eta=eta, eta_t=sp.diff(eta, t), u=u_s, v=v_s, p=p_s, u_t=sp.diff(u_s, t),
                v_t=sp.diff(v_s, t), res=res_s, tang=tang_s, normal=normal_s, J=J,
                eta_tilde=eta_t, fsrc=fsrc_s)


def evaluate(expr, X, Yg, tval):
    f = sp.lambdify((x, y, t), expr, "numpy")
    out = f(X, Yg, tval)
    return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(X, Yg).shape).copy()
