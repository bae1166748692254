# ## Adapted frames and normal curvatures
#
# Along an immersion f: R^n -> R^m we build orthonormal frame fields graded
# by derivative order, then differentiate them along the tangent directions.
# The Gram matrix of the normal parts of those derivatives gives the
# curvature matrix of each order.

import numpy as np

from osculant.curvature import adapted_frame_fields, analyze
from osculant.immersion import Immersion, eval_jet

# ### Helix: curvature and torsion
#
# For (a cos t, a sin t, b t) the classical values are
# kappa = a / (a^2 + b^2) and tau = b / (a^2 + b^2).

a, b = 2.0, 1.0
helix = Immersion.from_strings([f"{a}*cos(u1)", f"{a}*sin(u1)", f"{b}*u1"], 1, name="helix")
rep = analyze(helix, [0.0], 2)
for lv in rep.levels:
    print(lv.order, lv.rank_k, lv.curvatures, lv.sqrt_curvatures)

kappa, tau = a / (a * a + b * b), b / (a * a + b * b)
print(kappa, tau)

# The order-1 normal vector is the principal normal.

rep.levels[0].normal_vectors[:, 0]

# ### The frame behind it

jets = eval_jet(helix, [0.0], 3)
frame, base = adapted_frame_fields(jets, max_order=2)
print(frame.level_of)
print(base.tangent.T)
print(base.coeffs_c)

# Each field keeps Taylor data of lower order the deeper its level.

[f.order for f in frame.frame]

# ### A sphere patch
#
# Every point of the unit sphere is umbilic with shape operator I, so the
# single order-1 curvature is the sum of squares of both principal
# curvatures, 2.

sphere = Immersion.from_strings(["cos(u1)*cos(u2)", "cos(u1)*sin(u2)", "sin(u1)"], 2, name="sphere")
for point in ([0.3, 0.2], [-1.0, 2.5]):
    print(point, analyze(sphere, point, 2).levels[0].curvatures)

# ### Osculating flag of a torus

torus = Immersion.from_strings(["(2 + cos(u2))*cos(u1)", "(2 + cos(u2))*sin(u1)", "sin(u2)"], 2)
rep = analyze(torus, [0.3, 0.5], 2)
rep.dims, rep.oracle_dims, rep.flag.stop_reason

np.round(rep.levels[0].matrix_P, 6)
