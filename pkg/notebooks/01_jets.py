# ## Truncated Taylor series in several variables
#
# A jet stores every partial derivative of a function up to some order,
# divided by alpha!, in graded-lex order.  Arithmetic on jets is the engine
# behind all curvature computations.

import math

import numpy as np

from osculant.jet import (
    jet_div,
    jet_elementary,
    jet_extract_derivative,
    jet_sqrt,
    jet_truncate,
    jet_variable,
    multi_indices,
)

# ### Seeding variables

n, R = 2, 3
u1 = jet_variable(0, 0.5, n, R)
u2 = jet_variable(1, -0.25, n, R)
print(multi_indices(n, 2))
print(u1.coeffs)

# ### A product and a quotient

f = u1 * u1 * u2 + jet_elementary(u1, "sin")
g = jet_div(f, 1.0 + u2 * u2)
print(g.shape, len(g.coeffs))

# Derivatives come out as alpha! times the stored coefficient.

for alpha in [(1, 0), (0, 1), (2, 0), (1, 1), (2, 1)]:
    print(alpha, jet_extract_derivative(f, alpha))

# Compare d^2 f / du1 du2 = 2 u1 with the closed form.

print(jet_extract_derivative(f, (1, 1)), 2 * 0.5)

# ### Finite differences as a sanity check


def f_plain(x, y):
    return x * x * y + math.sin(x)


h = 1e-4
fd = (f_plain(0.5 + h, -0.25) - f_plain(0.5 - h, -0.25)) / (2 * h)
print(fd, jet_extract_derivative(f, (1, 0)))

# ### Square roots and truncation

r = jet_sqrt(1.0 + u1 * u1)
print(np.abs((r * r).coeffs - (1.0 + u1 * u1).coeffs).max())
print(jet_truncate(r, 1).coeffs)

# ### Vector-valued jets
#
# Stacking component jets gives a jet of shape (m,), the form in which
# immersions are evaluated.

from osculant.immersion import Immersion, eval_jet

torus = Immersion.from_strings(["(2 + cos(u2))*cos(u1)", "(2 + cos(u2))*sin(u1)", "sin(u2)"], 2)
J = eval_jet(torus, [0.3, 0.5], 3)
J.shape, J.coeffs.shape

jet_extract_derivative(J, (1, 1))
