# # Pair partitions and exact moments
#
# Even moments of f_m are sums over pairings pi of [2k] of m^(g(pi) - k - 1),
# where g(pi) counts the orbits of gamma_0 o pi.  The non-crossing pairings
# are exactly the ones with g = k + 1, which is why the m -> infinity limit
# gives Catalan numbers.

# In[1]:

from bandtoeplitz import PairPartition, TraceWord, gue_moment, mixed_trace_gue, orbit_count
from bandtoeplitz.pairings import catalan_limit_check, genus_profile, goe_moment

# In[2]:

for pairs in [((1, 2), (3, 4)), ((1, 4), (2, 3)), ((1, 3), (2, 4))]:
    pi = PairPartition(pairs)
    print(pi, "orbits", orbit_count(pi), "non-crossing", pi.is_noncrossing())

# How the 105 pairings of [8] split by orbit count:

# In[3]:

print(genus_profile(4))
print([catalan_limit_check(2 * k) for k in range(1, 9)])

# Exact moments as fractions:

# In[4]:

for m in (1, 2, 3, 10):
    print(m, gue_moment(m, 4), gue_moment(m, 6))

# Products of traces: the word (nu_1, ..., nu_r) stands for
# prod_i (tr H^i)^nu_i.

# In[5]:

for word in ["2", "0,1", "0,0,0,1", "2,1"]:
    print(word, [mixed_trace_gue(m, TraceWord.parse(word)) for m in (1, 2, 3)])

# The symmetric-block class has its own exact moments (GOE):

# In[6]:

print([goe_moment(2, n) for n in (2, 4, 6)])
