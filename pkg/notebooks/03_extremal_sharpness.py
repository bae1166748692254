# ## The rank bound is sharp
#
# The rank of the order-r curvature matrix of an n-dimensional immersion
# never exceeds C(n + r, r + 1).  Putting every monomial of degree 2 .. r+1
# on its own ambient axis attains that bound at the origin.

import math

from osculant.curvature import analyze, curvature_bound, oracle_flag_dims
from osculant.immersion import extremal_example, save_spec

print(save_spec(extremal_example(2, 2), [0.0, 0.0], 2))

# ### Ranks against the bound

rows = []
for n, r in [(1, 1), (1, 3), (2, 1), (2, 2), (3, 2), (2, 3)]:
    im = extremal_example(n, r)
    rep = analyze(im, [0.0] * n, r)
    bounds = [curvature_bound(n, d) for d in range(1, r + 1)]
    rows.append((n, r, im.dim_ambient, rep.ranks, bounds, rep.dims))

for row in rows:
    print("n=%d r=%d m=%-3d ranks=%-14s bounds=%-14s dims=%s" % (row[0], row[1], row[2], row[3], row[4], row[5]))

# ### Same dimensions from raw derivatives
#
# The osculating space of order r is also spanned by the partial
# derivatives of order <= r + 1.  That path shares no code with the frame
# recursion.

oracle_flag_dims(extremal_example(2, 2), [0.0, 0.0], 2)

# ### Other nonzero coefficients give the same ranks

im = extremal_example(2, 2, coefficients=[0.5, -3.0, 2.0, 1.0, 1.0, -1.0, 7.0])
analyze(im, [0.0, 0.0], 2).ranks

# ### Away from the origin the structure changes
#
# The monomials are no longer independent in the same way, so the ranks
# need not reach the bound.  Both paths still agree.

rep = analyze(extremal_example(2, 2), [0.3, -0.2], 2)
rep.ranks, rep.dims, rep.oracle_dims

# ### The naive bounds are much weaker

for n in (2, 3):
    print(n, [curvature_bound(n, r) for r in (1, 2, 3)], [n ** (r + 1) for r in (1, 2, 3)])

math.comb(5, 3)
