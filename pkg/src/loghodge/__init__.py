"""Exact mod-p verification of log de Rham / Higgs decompositions on
truncated local models.

Layers, bottom up:

- fplin: dense exact linear algebra over F_p (rref, rank, kernels, subspaces).
- trunc_ring: truncated polynomial rings F_p[t]/(t^cap per variable) and the
  downstairs/upstairs pair joined by the Frobenius u -> t^p.
- complexes: based cochain complexes, cohomology, filtrations, E1 pages.
- modcx: Higgs / flat modules, their de Rham and Higgs complexes,
  intersection subcomplexes, filtrations, residues, triangularity.
- cartier: the inverse Cartier transform, Frobenius push-forward complex,
  its splitting, the phi chain maps for arbitrary lifting data and the
  Cech-style comparison machinery.
- flows: one-periodic witnesses, adaptedness, E1 degeneration and
  intersection cohomology at the dimension level.
- generate: seeded random instances (commuting nilpotent families).
- cli: scenario files, verification suites, JSON reports.
"""

from .fplin import FieldSpec, PrimeMatrix, Subspace
from .trunc_ring import Ring, RingElement, RingPair
from .complexes import (BasedComplex, FilteredComplex, cohomology,
                        cohomology_dim, e1_page, gr_abutment, is_degenerate,
                        verify_subcomplex)
from .modcx import (Filtration, FlatModule, HiggsModule, deRham_complex,
                    fil_image_exchange, higgs_complex, intersection_complex,
                    residue_stratum, special_triangular_check)
from .cartier import (CechDatum, LiftingDatum, cartier_map, homotopy_defect,
                      inverse_cartier, phi, pushforward_complex,
                      verify_chain_map)
from .flows import (adaptedness_check, build_one_periodic,
                    e1_degeneration_check, intersection_cohomology,
                    residue_classification)

__version__ = "0.1.0"
