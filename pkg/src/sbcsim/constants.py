"""Physical constants shared by every module.

CODATA values, fixed here so the whole package agrees on the same numbers
(quoted to six significant figures in the comments).
"""

HBAR = 1.054571817e-34  # reduced Planck constant, J*s      (1.05457e-34)
KB = 1.380649e-23       # Boltzmann constant, J/K           (1.38065e-23, exact)
AMU = 1.66053906660e-27  # atomic mass constant, kg          (1.66054e-27)
C_LIGHT = 299792458.0   # speed of light in vacuum, m/s     (2.99792e8, exact)
