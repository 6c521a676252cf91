"""Relative Weyl gap of the raster spectrum at several grid spacings."""
import argparse

from qelab.billiard import MushroomParams
from qelab.grid import lowest_eigenvalues, rasterize, weyl_deficit

ap = argparse.ArgumentParser(description=__doc__)
ap.add_argument("--hs", type=float, nargs="+", default=[0.04, 0.02, 0.01])
ap.add_argument("--lam", type=float, nargs="+", default=[10.0, 15.0])
ap.add_argument("--N", type=int, default=200)
a = ap.parse_args()

P = MushroomParams(1.0, 2.0, 1.0)
print("h,lambda,count,weyl_main,relative_gap")
for h in a.hs:
    s = lowest_eigenvalues(rasterize(P, h), a.N, seed=0)
    for lam in a.lam:
        if lam * h >= 0.3:
            continue
        r = weyl_deficit(s, P, lam)
        print(f"{h!r},{lam!r},{r.N_count},{r.weyl_main!r},{r.relative_gap!r}")
