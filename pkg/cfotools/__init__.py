from cfotools.mesh import Mesh
from cfotools.mesh import build_uniform
from cfotools.mesh import build_perturbed
from cfotools.mesh import edge_orientation
from cfotools.mesh import mark_boundary
from cfotools.quadrature import segment_rule
from cfotools.quadrature import triangle_rule
from cfotools.sparse_linear import from_triplets
from cfotools.sparse_linear import matvec
from cfotools.sparse_linear import solve_symmetric_indefinite
from cfotools.problem import ProblemSpec
from cfotools.assembly import weak_divergence
from cfotools.assembly import j2_functional
from cfotools.assembly import assemble_system
from cfotools.assembly import solve_cfo
from cfotools.assembly import naive_flux
from cfotools.assembly import conservation_defect
from cfotools.analysis import error_l2
from cfotools.analysis import error_h1
from cfotools.analysis import flux_error
from cfotools.analysis import lambda_norm
from cfotools.analysis import discrete_h1_norm
from cfotools.analysis import build_inf_sup_flux
from cfotools.analysis import convergence_study
from cfotools.analysis import fitted_order
from cfotools.cases import test_case
from cfotools.twophase import permeability
from cfotools.twophase import fractional_flow
from cfotools.twophase import mobility
from cfotools.twophase import pressure_solve
from cfotools.twophase import transport_step
from cfotools.twophase import run_simulation

__version__ = '0.1.0'
