# # Band eigensolver
#
# The band path chases Givens bulges to reduce the band to tridiagonal form
# in O(n h) memory, then runs implicit QL with a Wilkinson shift.  The dense
# path uses Householder reflections and the same QL finish.

# In[1]:

import time

import numpy as np

from bandtoeplitz import EnsembleSpec, build_matrix, eigenvalues_band, eigenvalues_dense, spectrum

# In[2]:

spec = EnsembleSpec(N=1000, m=2, bandwidth={"kind": "PowerLaw", "param": 0.5}, distribution="Gaussian", seed=1)
mat = build_matrix(spec)
print(mat.size, mat.half_bandwidth)

# The first call loads the compiled kernels; warm up before timing.

# In[3]:

eigenvalues_band(build_matrix(spec.replace(N=4)).band)
eigenvalues_dense(np.eye(3))
t = time.perf_counter()
band = eigenvalues_band(mat.band)
t_band = time.perf_counter() - t
t = time.perf_counter()
dense = eigenvalues_dense(mat.dense())
t_dense = time.perf_counter() - t
print("max gap vs dense", np.max(np.abs(band - dense)))
print("max gap vs numpy", np.max(np.abs(band - np.linalg.eigvalsh(mat.dense()))))
print(f"band {t_band:.3f} s, dense {t_dense:.3f} s")

# spectrum() also checks the trace and Frobenius identities:

# In[4]:

sample = spectrum(mat)
print(sample.diagnostics)
