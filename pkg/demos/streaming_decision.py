# %% [markdown]
# # Deciding the sign of a^T B c in one pass
#
# A promise instance has unit c, orthogonal B and unit a with a = +-B c.
# The streamer sees c, then B row by row, then a, and keeps only the largest
# coordinates of c plus an AMS bank.

# %%
import numpy as np

from abcsketch.linalg import make_promise_instance
from abcsketch.rng import Rng
from abcsketch.sketch import naive_bilinear_samples, streaming_abc_decide

# %%
inst = make_promise_instance(1024, -1, Rng(1))
decision, report = streaming_abc_decide(inst.stream(), capacity_factor=1, rng=Rng(2))
print("label", inst.label, "decision", decision)
print("\n".join(report.lines()))

# %% [markdown]
# Space grows slowly: the bank size depends on alpha, the heavy part on sqrt(n).

# %%
for n in (256, 1024, 4096):
    _, rep = streaming_abc_decide(make_promise_instance(n, 1, Rng(n)).stream(), rng=Rng(0))
    print(n, rep.stored_reals, round(rep.stored_reals / (np.sqrt(n) * np.log2(n)), 2))

# %% [markdown]
# The naive estimator (v.a)(v^T B w)(w.c) is unbiased but its variance is about n.

# %%
for n in (32, 64, 128):
    inst = make_promise_instance(n, 1, Rng(7, n))
    s = naive_bilinear_samples(inst.a, inst.B, inst.c, 20_000, Rng(8, n))
    print(n, round(s.mean(), 3), round(s.var() / n, 3))
