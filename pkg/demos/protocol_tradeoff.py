# %% [markdown]
# # Three players, one message each
#
# Charlie names the net member closest to c, Bob sends sign bits of B w
# against shared Gaussian directions, Alice decides.  Larger k means a
# bigger net, more bits from Charlie, fewer from Bob.

# %%
from abcsketch.linalg import exact_bilinear, make_promise_instance, sample_haar_orthogonal, sample_unit_vector
from abcsketch.protocol import run_protocol_approx, run_protocol_decision, tradeoff_sweep
from abcsketch.rng import Rng

# %%
inst = make_promise_instance(64, 1, Rng(3))
decision, tr = run_protocol_decision(inst, 3, Rng(4))
print(decision, tr.totals, tr.notes)

# %%
for row in tradeoff_sweep(64, [1, 2, 3, 4], 20, Rng(5)):
    print(row)

# %% [markdown]
# Without the promise the same transcript shape estimates a^T B c itself.

# %%
gen = Rng(6).generator()
a, c = sample_unit_vector(128, gen), sample_unit_vector(128, gen)
B = sample_haar_orthogonal(128, gen)
est, tr = run_protocol_approx(a, B, c, 0.25, 4, Rng(7), net_cap=1 << 16)
print(round(est, 3), round(exact_bilinear(a, B, c), 3), tr.totals)
