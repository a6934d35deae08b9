# # Limiting densities
#
# The eigenvalue density of a block Toeplitz band matrix with m x m blocks
# tends to the one-point density of an m x m GUE matrix (rescaled to unit
# variance).  At m = 1 that is the standard normal; as m grows it turns into
# the semicircle on [-2, 2].

# In[1]:

import numpy as np

from bandtoeplitz import DensityModel, gue_density, wave_function

# The building blocks are oscillator wave functions, evaluated with a
# normalized recurrence so nothing overflows even at degree 200.

# In[2]:

print(wave_function(0, 0.0), (2 * np.pi) ** -0.25)
print(wave_function(200, 25.0))

# f_1 is the standard normal density:

# In[3]:

x = np.array([0.0, 1.0, 2.0])
print(gue_density(1, x))
print(np.exp(-x**2 / 2) / np.sqrt(2 * np.pi))

# Large m approaches the semicircle density sqrt(4 - x^2) / (2 pi).

# In[4]:

x = np.linspace(-1.5, 1.5, 7)
for m in (1, 4, 16, 64):
    print(m, np.round(gue_density(m, x), 4))
print("semicircle", np.round(np.sqrt(4 - x**2) / (2 * np.pi), 4))

# A DensityModel bundles pdf, cdf and moments.  The cdf is cached on a grid;
# moments come from Gauss-Legendre quadrature.

# In[5]:

model = DensityModel(2)
print("mass", model.total_mass)
print("cdf(0), cdf(1)", model.cdf(0.0), model.cdf(1.0))
print("moments 2, 4, 6", [round(model.moment(k), 12) for k in (2, 4, 6)])
