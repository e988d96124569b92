"""Reducibility of invertible tuples over concrete commutative Banach
algebras: decisions with machine-verifiable witnesses."""

from .algebra import (CIRCLE, GRID, PRODUCT, AlgebraElement, AlgebraInstance,
                      TupleOverA, default_tol, exp_element, log_element,
                      make_instance)
from .certify import (make_certificate, obstruction_certificate, verify,
                      witness_from_certificate)
from .errors import (BanachReduceError, HoleConditionViolated, InvalidWitness,
                     LogObstruction, NotInvertible, NotInvertibleTuple,
                     PathLeavesInvertibleSet, ResolutionError, ScopeError)
from .matrices import (ExpProduct, MatrixOverA, conjugate_exp_product,
                       determinant, log_near_identity, log_unipotent, mat_exp,
                       so_log, verify_exp_product)
from .raster import RasterDomain
from .reduce import (ExpEquivalenceWitness, ExpReducibilityWitness,
                     Irreducible, NotPrincipal, PrincipalWitness,
                     ReductionWitness, Rejected, RowExtension, bezout,
                     exp_class_path, exp_reduce_pair_bsr1, extend_row,
                     permute_principal_witness, perturb_transfer,
                     principal_from_exp_reducible, reduce_to_principal,
                     reduce_tuple, verify_exp_reducibility,
                     zero_free_extension)
from .topology import (HoleReport, b1_falsify, complement_components,
                       default_band_eps, hole_condition, hole_windings,
                       phase_unwrap_log, sublevel_zero_set, tietze_extend,
                       winding_number)

__version__ = "0.1.0"
