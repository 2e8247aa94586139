# %% [markdown]
# # Renyi divergences on the sphere and on finite sets

# %%
import math

import numpy as np

from abcsketch.divergence import (CapUniform, VonMisesFisher, conditional_divergence_suite,
                                  equator_tail_experiment, exact_divergence,
                                  random_bipartite_pair, renyi_mc)
from abcsketch.rng import Rng

center = np.zeros(16)
center[0] = 1.0

# %% [markdown]
# Uniform on a cap of measure 1/4: every order gives ln 4.

# %%
cap = CapUniform.with_measure(center, 0.25)
for alpha in (1.0, 2.0, 4.0, math.inf):
    print(alpha, round(exact_divergence(cap, alpha), 6))
print(renyi_mc(cap, 2.0, 100_000, Rng(1)))

# %% [markdown]
# A von Mises-Fisher density has divergences increasing in the order.

# %%
vmf = VonMisesFisher(center, 3.0)
print([round(exact_divergence(vmf, a), 4) for a in (0.5, 1, 2, 4, 8)])

# %% [markdown]
# Restricting to a random equator and renormalizing barely moves the divergence.

# %%
rep = equator_tail_experiment(vmf, 2.0, 0.3, 50, Rng(2), samples=5000)
print(rep.tail_fraction, np.mean([r.mass for r in rep.records]))

# %% [markdown]
# Conditional divergence bounds, checked by enumeration on a 4 x 4 table.

# %%
f, g = random_bipartite_pair(4, 4, Rng(3))
rep = conditional_divergence_suite(f, g, 2.0, 2.0)
print(rep.checks, rep.ok)
