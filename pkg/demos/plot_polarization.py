"""
Polarization of erasure channels
================================

Exact Bhattacharyya profiles for erasure channels, and how thresholding
them splits the synthetic channels into the four index sets used for
secure coding.
"""

# %%
# A pair of erasure channels
# --------------------------
# One butterfly turns two erasure channels into a worse and a better one.
# The erasure mass is conserved.
import numpy as np

from securepolar import ErasureProfile, PartitionConfig, evolve_bec, partition_block

print(evolve_bec([0.4, 0.5]).z)  # [0.7, 0.2]

# %%
# Longer blocks
# -------------
# With more stages the profile piles up near 0 and 1.  The threshold
# ``delta_N = 2**-(N**beta)`` decides what counts as "close enough".
for n in (6, 10, 14):
    N = 2**n
    z = evolve_bec(ErasureProfile.stationary(0.4, N)).z
    frac = [np.mean(z <= d) for d in (1e-3, 1e-6, 1e-9)]
    print(f"N=2^{n:<2d} mean(z)={z.mean():.6f}  fraction below 1e-3/1e-6/1e-9: "
          + " ".join(f"{f:.3f}" for f in frac))

# %%
# Non-stationary blocks
# ---------------------
# Each channel use may have its own erasure probability; the evolution is
# still exact and still conserves the mean.
rng = np.random.default_rng(0)
eps = rng.choice([0.4, 0.5], size=2**12)
z = evolve_bec(eps).z
print(f"mean eps {eps.mean():.6f}  mean z {z.mean():.6f}")

# %%
# The four-way split
# ------------------
# Main channel erasure 0.1, wiretap erasure 0.4.  ``I`` (reliable for Bob,
# noisy for Eve) carries secrets; ``R`` is reliable for both; ``F`` and ``B``
# are unreliable for Bob.
for beta in (0.18, 0.30):
    for n in (10, 14, 18):
        N = 2**n
        p = partition_block(
            evolve_bec(ErasureProfile.stationary(0.1, N)),
            evolve_bec(ErasureProfile.stationary(0.4, N)),
            PartitionConfig(beta, N),
        )
        sizes = {k: v / N for k, v in p.sizes().items()}
        print(f"beta={beta} N=2^{n}: " + "  ".join(f"{k}={v:.4f}" for k, v in sizes.items()))
# |I|/N creeps towards 0.4 - 0.1 = 0.3; a larger beta is stricter and slower.
