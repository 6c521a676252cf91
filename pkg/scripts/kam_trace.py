"""Error trace of the circle KAM iteration for a few perturbation sizes."""
import sys

from qelab.circle_kam import GOLDEN, CircleMap, contraction_exponent, kam_iterate

eps_list = [float(x) for x in sys.argv[1:]] or [1e-4, 1e-3, 1e-2]
print("eps0,iteration,eps,defect,exponent")
for e0 in eps_list:
    r = kam_iterate(CircleMap.standard(GOLDEN, e0), max_iter=8, target=1e-12)
    p = contraction_exponent(r.trace.eps)
    for i, (e, d) in enumerate(zip(r.trace.eps, r.trace.defect)):
        print(f"{e0!r},{i},{e!r},{d!r},{p!r}")
