"""modhilb: desk-scale numerics for monomially modulated discrete Hilbert transforms.

Subpackages:

- farey     exact rational and Diophantine machinery
- weyl      complete and incomplete Weyl/Gauss sums and their identities
- osc       bump families, oscillatory quadrature, stationary phase
- spectral  finite-signal engine: DFT multipliers, the maximal operator,
            TT* kernels, variation and oscillation functionals
- circle    circle-method approximants and error-decay harnesses
- bench     CLI experiment harness with reproducible reports
"""

__version__ = "0.1.0"
