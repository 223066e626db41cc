#!/usr/bin/env python3
"""Emit C++ bodies (value, gradient, Hessian, bilaplacian) for the built-in
smooth manufactured solutions, via sympy common-subexpression elimination.

Run from the repo root:  python3 scripts/gen_case_derivs.py
The output is pasted into include/hho2d/cases.hpp.
"""
import sympy as sp

x, y = sp.symbols("x y")


def emit(name, u):
    ux, uy = sp.diff(u, x), sp.diff(u, y)
    uxx, uxy, uyy = sp.diff(u, x, 2), sp.diff(ux, y), sp.diff(u, y, 2)
    lap = uxx + uyy
    bilap = sp.diff(lap, x, 2) + sp.diff(lap, y, 2)
    exprs = [u, ux, uy, uxx, uxy, uyy, bilap]
    repl, reduced = sp.cse(exprs, optimizations="basic")
    print(f"// ---- {name} ----")
    print("inline FieldSample %s_fields(double x, double y) {" % name)
    for sym, e in repl:
        print(f"  const double {sym} = {sp.ccode(e)};")
    names = ["u", "ux", "uy", "uxx", "uxy", "uyy", "bilap"]
    print("  FieldSample s;")
    for n, e in zip(names, reduced):
        print(f"  s.{n} = {sp.ccode(e)};")
    print("  return s;")
    print("}\n")


u_square = sp.sin(sp.pi * x) ** 2 * sp.sin(sp.pi * y) ** 2 + sp.exp(
    -((x - sp.Rational(1, 2)) ** 2) - (y - sp.Rational(1, 2)) ** 2
)
u_annulus = (1 + sp.sin(sp.pi * (x**2 + y**2 - 1))) * sp.exp(-(x**2) - y**2)

emit("smooth_square", u_square)
emit("smooth_annulus", u_annulus)

# numerical spot check of the generated bilaplacian against mpmath finite
# differences at a few points
import mpmath as mp

for name, u in [("smooth_square", u_square), ("smooth_annulus", u_annulus)]:
    f = sp.lambdify((x, y), u, "mpmath")
    bil = sp.diff(u, x, 4) + 2 * sp.diff(u, x, 2, y, 2) + sp.diff(u, y, 4)
    fb = sp.lambdify((x, y), bil, "mpmath")
    pt = (mp.mpf("0.3"), mp.mpf("0.7"))
    mp.mp.dps = 40
    num = (
        mp.diff(f, pt, (4, 0))
        + 2 * mp.diff(f, pt, (2, 2))
        + mp.diff(f, pt, (0, 4))
    )
    rel = abs(num - fb(*pt)) / abs(fb(*pt))
    print(f"// check {name}: bilap rel diff at (0.3,0.7) = {mp.nstr(rel, 3)}")
