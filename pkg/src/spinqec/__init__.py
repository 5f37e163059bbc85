"""Stabilizer-code decoding through disordered multi-spin Ising models.

Modules: gf2 (packed linear algebra), codes (stabilizer/CSS families),
wegner (exact partition and correlation values), decoder (ML decoding and
threshold scans), montecarlo (Metropolis estimators), analysis (defect free
energies, tensions, bounds, transition points), cli (batch driver).
"""

__version__ = "0.1.0"
