"""
One-time-pad chaining
=====================

Blocks chained so that the secure bits of each block pad the message of
the next.  The encoder learns which bits were secure only after a block is
over, from delayed channel-state information.
"""

# %%
# Setup
# -----
# Main channel erasure 0.1; the eavesdropper's erasure is 0.4 or 0.5,
# picked fresh for every block.
import numpy as np

from securepolar import (
    AdversaryPolicy,
    SchemeConfig,
    UncertaintySet,
    eve_attack,
    experimental_ber,
    run_trials,
)

uset = UncertaintySet(states=(0.4, 0.5), main_eps=0.1)
cfg = SchemeConfig(N=2**12, T=3, beta=0.25, uset=uset, seed=1, policy=AdversaryPolicy(seed=1))

# %%
# One run
# -------
# Each transcript holds the realized state, the partition disclosed after
# the block, and Bob's decryption.
runs, csi = run_trials(cfg, trials=1)
for tr in runs[0]:
    bits = 0 if tr.message is None else tr.message.size
    errs = 0 if tr.decrypted is None else int(np.count_nonzero(tr.decrypted != tr.message))
    print(f"block {tr.t}: state {tr.state.tag}, message bits {bits}, Bob errors {errs}")
print("premature CSI requests:", csi[0].premature_accesses)

# %%
# Many runs, and Eve
# ------------------
# Eve knows the code, every partition and the public frozen zeros, and
# runs the same decoder on her own observations.
runs, _ = run_trials(cfg, trials=200)
eve_attack(runs, cfg.scheme, seed=1)
print(f"Bob BER {experimental_ber(runs, 'bob').pooled:.4f}")
print(f"Eve BER {experimental_ber(runs, 'eve').pooled:.4f}")

# %%
# Larger blocks help Bob
# ----------------------
for n in (8, 10, 12):
    c = SchemeConfig(N=2**n, T=3, beta=0.25, uset=uset, seed=1, policy=AdversaryPolicy(seed=1))
    r, _ = run_trials(c, trials=200)
    print(f"N=2^{n}: Bob BER {experimental_ber(r, 'bob').pooled:.4f}")
