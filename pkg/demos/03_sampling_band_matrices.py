# # Sampling block Toeplitz band matrices
#
# An EnsembleSpec fixes everything: N, block order m, bandwidth schedule,
# symmetry class, entry law and seed.  Each block A_s is drawn from its own
# counter-based stream, so the matrix is a pure function of its EnsembleSpec.

# In[1]:

import numpy as np

from bandtoeplitz import EnsembleSpec, build_matrix, sample_block_family

# In[2]:

spec = EnsembleSpec(N=6, m=2, bandwidth={"kind": "Fixed", "param": 2}, distribution="Rademacher", seed=7)
print(spec.b, spec.size, spec.half_bandwidth, spec.fingerprint())

# The raw matrix has block (i, j) equal to A_{i-j}, with A_{-s} = A_s^T:

# In[3]:

raw = build_matrix(spec, "Raw").dense()
print(raw.astype(int))
blocks = sample_block_family(spec)
print(np.array_equal(raw[2:4, 0:2], blocks[1]), np.array_equal(raw[0:2, 2:4], blocks[1].T))

# Power-law schedules resolve b_N = ceil(N^alpha):

# In[4]:

sched = EnsembleSpec(N=400, m=2, bandwidth={"kind": "PowerLaw", "param": 0.7})
print(sched.b, sched.bandwidth.almost_sure)

# Storage is the lower band only: (half_bandwidth + 1) x mN.

# In[5]:

mat = build_matrix(sched)
print(mat.band.shape, mat.scale, mat.trace())
