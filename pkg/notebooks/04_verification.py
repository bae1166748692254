# ## Checking the invariants in bulk
#
# A seeded corpus of random polynomial immersions exercises the rank bound,
# agreement with the derivative oracle, eigen-span equality, symmetry of the
# second fundamental form, and independence from the choice of tangent
# frame.

import numpy as np

from osculant.curvature import analyze, verify_frame_invariance
from osculant.immersion import gallery, random_corpus
from osculant.suite import format_table, run_suite

# ### The gallery

results = run_suite(gallery(), rotations=3)
print(format_table(results))

# ### Random immersions

cases = random_corpus(40, seed=7)
results = run_suite(cases)
print(format_table(results).splitlines()[-1])

worst = {k: max(r.residuals[k] for r in results) for k in results[0].residuals}
worst

# Rank histogram per order.

from collections import Counter

Counter(tuple(r.ranks) for r in results).most_common(8)

# ### Frame invariance by hand
#
# Rotating the parameter domain changes the coordinate tangent vectors but
# not the geometry.

im, point, R = next(c for c in gallery() if c[0].name == "torus")
base = analyze(im, point, R)
residuals = [verify_frame_invariance(im, point, R, seed, report=base) for seed in range(10)]
np.max(residuals)

# ### What a tolerance abuse looks like

from osculant.linalg import RankTolerance

bad = run_suite(gallery(), tol=RankTolerance(0.5))
print(format_table(bad).splitlines()[-1])
