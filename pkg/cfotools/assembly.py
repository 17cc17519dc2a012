''' Flux Assembly Module

This module contains functions to assemble and solve the saddle-point
system of the conservative flux optimization scheme: P1 nodal values u and
one normal flux q per edge minimize

    J(v, p) = sum_T tau_T h_T sum_{e in dT} int_e |p + (alpha grad v + beta v) . n_e|^2 ds

subject to the elementwise conservation constraint
sum_{e in dT} |e| s(T, e) p_e = int_T f, enforced with one Lagrange
multiplier per element.
'''

from collections import namedtuple
import logging
import warnings

import numpy as np
import scipy.sparse

from cfotools import mesh as meshlib
from cfotools import quadrature
from cfotools import sparse_linear
from cfotools.problem import AssemblyError


log = logging.getLogger(__name__)

SPD_TOLERANCE = 1e-12
CONSERVATION_TOLERANCE = 1e-9

# lambda is reported as the KKT multiplier of [[K, B^T], [B, 0]] divided by 4
MULTIPLIER_SCALE = 0.25


DofMap = namedtuple('DofMap', ['free_nodes', 'dirichlet_nodes', 'dirichlet_values',
                               'free_edges', 'pinned_edges', 'n_elements'])
DofMap.__doc__ = '''
Ordering of the unknown vector [u at free nodes | q at free edges | lambda].
'''

CfoSolution = namedtuple('CfoSolution', ['u', 'q', 'lam', 'dofs'])
CfoSolution.__doc__ = '''
Solved scheme.

u: nodal values, Dirichlet nodes included
q: normal flux per edge along n_e, zero on pinned (Neumann) edges
lam: Lagrange multiplier per element, scaled by MULTIPLIER_SCALE
dofs: DofMap of the system that produced it
'''


def dof_count(dofs):
    return len(dofs.free_nodes) + len(dofs.free_edges) + dofs.n_elements


def _check_spd(a, where):
    asym = np.abs(a[..., 0, 1] - a[..., 1, 0])
    scale = np.maximum(np.abs(a).max(axis=(-1, -2)), 1.0)
    if np.any(asym > SPD_TOLERANCE * scale):
        raise AssemblyError('alpha is not symmetric at some {} point'.format(where))
    half_trace = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
    radius = np.hypot(0.5 * (a[..., 0, 0] - a[..., 1, 1]), a[..., 0, 1])
    smallest = half_trace - radius
    if not np.all(smallest > SPD_TOLERANCE):
        bad = np.unravel_index(np.argmin(smallest), smallest.shape)
        raise AssemblyError('alpha is not positive definite at {} point {} '
                            '(smallest eigenvalue {:.3e})'.format(where, bad, smallest[bad]))


def flux_coefficients(mesh, problem, order=quadrature.ASSEMBLY_EDGE_ORDER, check=True):
    '''
    Coefficients of the nodal values in the one-sided flux trace.

    For every element T, local edge k and edge quadrature point x, returns
    c_i = (alpha grad phi_i) . n_e + (beta . n_e) phi_i(x) for the three
    vertices of T, with alpha and beta evaluated on T's side.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
    order: int, default 3
        Edge rule order.
    check: bool, default True
        Verify alpha is SPD at every point.

    Returns
    -------
    (coef, weights, points, tags)
        coef: (n_elements, 3, n_q, 3); weights: (n_elements, 3, n_q) edge
        quadrature weights (summing to |e|); points: (n_elements, 3, n_q, 2);
        tags: (n_elements, 3, n_q) region tags.
    '''
    rule = quadrature.segment_rule(order)
    points, weights, basis = quadrature.map_edge_rule(mesh, rule)
    tags = np.broadcast_to(problem.tags(mesh)[:, None, None], weights.shape)
    x = points[..., 0]
    y = points[..., 1]

    a = problem.evaluate_alpha(x, y, tags)
    if check:
        _check_spd(a, 'edge quadrature')
    normal = mesh.edge_normal[mesh.elem_edges]
    a_normal = np.einsum('tkqab,tka->tkqb', a, normal)
    coef = np.einsum('tkqb,tib->tkqi', a_normal, mesh.grad_basis)

    if problem.beta is not None:
        beta_normal = np.einsum('tkqa,tka->tkq', problem.evaluate_beta(x, y, tags), normal)
        coef = coef + beta_normal[..., None] * basis[None]
    return coef, weights, points, tags


def _functional_weights(mesh, problem, weights):
    tau = problem.weights(mesh)
    return (tau * mesh.diameter)[:, None, None] * weights


def local_matrices(mesh, problem, order=quadrature.ASSEMBLY_EDGE_ORDER):
    '''
    Element matrices of the flux-mismatch form.

    Returns
    -------
    numpy array (n_elements, 6, 6)
        Rows and columns ordered [u0, u1, u2, q_e0, q_e1, q_e2]; exactly
        symmetric.
    '''
    coef, weights, _, _ = flux_coefficients(mesh, problem, order)
    w = _functional_weights(mesh, problem, weights)
    n_q = coef.shape[2]
    full = np.zeros(coef.shape[:3] + (6,))
    full[..., :3] = coef
    full[..., 3:] = np.eye(3)[None, :, None, :] * np.ones((1, 1, n_q, 1))
    K = np.einsum('tkq,tkqi,tkqj->tij', w, full, full)
    return 0.5 * (K + np.swapaxes(K, 1, 2))


def divergence_matrix(mesh):
    '''
    Weak divergence scaled by element area.

    Returns
    -------
    scipy.sparse.csr_matrix (n_elements, n_edges)
        Entry (T, e) = |e| s(T, e).
    '''
    rows = np.repeat(np.arange(mesh.n_elements), 3)
    cols = mesh.elem_edges.ravel()
    vals = (mesh.edge_length[mesh.elem_edges] * mesh.elem_signs).ravel()
    return sparse_linear.from_triplets(mesh.n_elements, rows, cols, vals, n_cols=mesh.n_edges)


def element_sources(mesh, problem, degree=quadrature.SOURCE_TRIANGLE_DEGREE):
    '''int_T f dx for every element'''
    points, weights, _ = quadrature.map_triangle_rule(mesh, quadrature.triangle_rule(degree))
    tags = np.broadcast_to(problem.tags(mesh)[:, None], weights.shape)
    f = np.asarray(problem.source(points[..., 0], points[..., 1], tags), dtype=float)
    return np.sum(weights * f, axis=1)


def weak_divergence(mesh, q, T=None):
    '''
    Discrete weak divergence of an edge flux.

    Parameters
    ----------
    mesh: Mesh
    q: array (n_edges,)
        Normal flux along n_e per edge.
    T: int, optional
        Element index. All elements when omitted.

    Returns
    -------
    float or numpy array (n_elements,)
        (1/|T|) sum_{e in dT} |e| s(T, e) q_e
    '''
    q = np.asarray(q, dtype=float)
    if q.shape != (mesh.n_edges,):
        raise ValueError('expected {} edge values, got shape {}'.format(mesh.n_edges, q.shape))
    if T is None:
        net = np.sum(mesh.edge_length[mesh.elem_edges] * mesh.elem_signs * q[mesh.elem_edges], axis=1)
        return net / mesh.area
    edges = mesh.elem_edges[T]
    net = np.sum(mesh.edge_length[edges] * mesh.elem_signs[T] * q[edges])
    return float(net / mesh.area[T])


def j2_functional(mesh, problem, v, p, order=quadrature.ASSEMBLY_EDGE_ORDER):
    '''
    Flux-mismatch functional without the 1/2 factor.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
    v: array (n_nodes,)
    p: array (n_edges,)

    Returns
    -------
    float
        sum_T tau_T h_T sum_{e in dT} int_e |p_e + (alpha grad v + beta v) . n_e|^2 ds,
        with one-sided coefficient traces.
    '''
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    if v.shape != (mesh.n_nodes,) or p.shape != (mesh.n_edges,):
        raise ValueError('expected {} nodal and {} edge values'.format(mesh.n_nodes, mesh.n_edges))
    coef, weights, _, _ = flux_coefficients(mesh, problem, order, check=False)
    mismatch = np.einsum('tkqi,ti->tkq', coef, v[mesh.triangles]) + p[mesh.elem_edges][:, :, None]
    w = _functional_weights(mesh, problem, weights)
    return float(np.sum(w * mismatch ** 2))


def build_dofs(mesh, problem):
    '''
    Classify unknowns of a mesh already tagged by the problem.

    Raises AssemblyError for unclassified or doubly classified boundary edges.
    '''
    if np.any(mesh.edge_tags == meshlib.CONFLICT):
        e = int(np.flatnonzero(mesh.edge_tags == meshlib.CONFLICT)[0])
        raise AssemblyError('boundary edge {} is both Dirichlet and Neumann'.format(e))
    if np.any(mesh.edge_tags == meshlib.UNCLASSIFIED):
        e = int(np.flatnonzero(mesh.edge_tags == meshlib.UNCLASSIFIED)[0])
        raise AssemblyError('boundary edge {} at {} is not classified'
                            .format(e, tuple(mesh.edge_midpoint[e])))

    is_dirichlet = mesh.node_tags == meshlib.DIRICHLET
    dirichlet_nodes = np.flatnonzero(is_dirichlet)
    g = np.asarray(problem.dirichlet_g(mesh.nodes[dirichlet_nodes, 0],
                                       mesh.nodes[dirichlet_nodes, 1]), dtype=float)
    is_pinned = mesh.edge_tags == meshlib.NEUMANN
    return DofMap(free_nodes=np.flatnonzero(~is_dirichlet),
                  dirichlet_nodes=dirichlet_nodes,
                  dirichlet_values=np.broadcast_to(g, dirichlet_nodes.shape).copy(),
                  free_edges=np.flatnonzero(~is_pinned),
                  pinned_edges=np.flatnonzero(is_pinned),
                  n_elements=mesh.n_elements)


def assemble_system(mesh, problem, edge_order=quadrature.ASSEMBLY_EDGE_ORDER,
                    source_degree=quadrature.SOURCE_TRIANGLE_DEGREE):
    '''
    Assemble the symmetric saddle-point system.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
        Boundary predicates of the problem tag the mesh.
    edge_order: int, default 3
        Edge rule for the flux-mismatch form.
    source_degree: int, default 4
        Triangle rule for int_T f.

    Returns
    -------
    (matrix, rhs, dofs)
        matrix: scipy.sparse.csr_matrix, [[K_ff, B^T], [B, 0]] with
        B = [0 | B_f] zero on the free nodal columns;
        rhs: [-K_fD g | int_T f]; dofs: DofMap.
    '''
    mesh = problem.mark(mesh)
    dofs = build_dofs(mesh, problem)
    n_nodes = mesh.n_nodes
    n_total = n_nodes + mesh.n_edges

    K_loc = local_matrices(mesh, problem, edge_order)
    local_dofs = np.hstack([mesh.triangles, n_nodes + mesh.elem_edges])
    rows = np.repeat(local_dofs[:, :, None], 6, axis=2)
    cols = np.repeat(local_dofs[:, None, :], 6, axis=1)
    K = sparse_linear.from_triplets(n_total, rows, cols, K_loc)

    free = np.concatenate([dofs.free_nodes, n_nodes + dofs.free_edges])
    K_ff = K[free][:, free]
    K_fd = K[free][:, dofs.dirichlet_nodes]
    B_f = divergence_matrix(mesh)[:, dofs.free_edges]
    # lambda couples to the flux unknowns only
    B = scipy.sparse.hstack([scipy.sparse.csr_matrix((mesh.n_elements, len(dofs.free_nodes))), B_f],
                            format='csr')

    matrix = scipy.sparse.bmat([[K_ff, B.T], [B, None]], format='csr')
    rhs = np.concatenate([-K_fd.dot(dofs.dirichlet_values), element_sources(mesh, problem, source_degree)])
    log.debug('assembled %s on %r: %d unknowns, %d nonzeros',
              problem.name or 'problem', mesh, matrix.shape[0], matrix.nnz)
    return matrix, rhs, dofs


def conservation_defect(mesh, problem, flux, degree=quadrature.SOURCE_TRIANGLE_DEGREE):
    '''
    Elementwise mass balance sum_{e in dT} |e| s(T, e) flux - int_T f.

    Parameters
    ----------
    flux: array (n_edges,) or (n_elements, 3)
        A single normal flux per edge, or one value per (element, local
        edge) pair as returned by naive_flux.
    '''
    flux = np.asarray(flux, dtype=float)
    if flux.shape == (mesh.n_edges,):
        flux = flux[mesh.elem_edges]
    elif flux.shape != (mesh.n_elements, 3):
        raise ValueError('flux must have shape ({},) or ({}, 3)'.format(mesh.n_edges, mesh.n_elements))
    net = np.sum(mesh.edge_length[mesh.elem_edges] * mesh.elem_signs * flux, axis=1)
    return net - element_sources(mesh, problem, degree)


def solve_cfo(mesh, problem, edge_order=quadrature.ASSEMBLY_EDGE_ORDER,
              source_degree=quadrature.SOURCE_TRIANGLE_DEGREE, **solver_kwargs):
    '''
    Solve the conservative flux optimization scheme.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
    edge_order, source_degree: int
        See assemble_system.
    solver_kwargs:
        Passed on to sparse_linear.solve_symmetric_indefinite.

    Returns
    -------
    CfoSolution
    '''
    matrix, rhs, dofs = assemble_system(mesh, problem, edge_order, source_degree)
    x = sparse_linear.solve_symmetric_indefinite(matrix, rhs, **solver_kwargs)

    n_u = len(dofs.free_nodes)
    n_q = len(dofs.free_edges)
    u = np.zeros(mesh.n_nodes)
    u[dofs.free_nodes] = x[:n_u]
    u[dofs.dirichlet_nodes] = dofs.dirichlet_values
    q = np.zeros(mesh.n_edges)
    q[dofs.free_edges] = x[n_u:n_u + n_q]
    lam = MULTIPLIER_SCALE * x[n_u + n_q:]

    sources = rhs[n_u + n_q:]
    defect = np.abs(divergence_matrix(mesh).dot(q) - sources).max()
    bound = CONSERVATION_TOLERANCE * (1.0 + np.abs(sources).max())
    log.debug('conservation defect %.3e (bound %.3e)', defect, bound)
    if defect > bound:
        warnings.warn('local conservation defect {:.3e} exceeds {:.3e}'.format(defect, bound))
    return CfoSolution(u, q, lam, dofs)


def naive_flux(mesh, problem, u, order=quadrature.ASSEMBLY_EDGE_ORDER):
    '''
    One-sided flux of a nodal field.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
    u: array (n_nodes,)

    Returns
    -------
    numpy array (n_elements, 3)
        Edge mean of -(alpha grad u + beta u) . n_e taken from element T on
        its local edge k.
    '''
    u = np.asarray(u, dtype=float)
    if u.shape != (mesh.n_nodes,):
        raise ValueError('expected {} nodal values, got shape {}'.format(mesh.n_nodes, u.shape))
    coef, weights, _, _ = flux_coefficients(mesh, problem, order, check=False)
    trace = np.einsum('tkqi,ti->tkq', coef, u[mesh.triangles])
    return -np.sum(weights * trace, axis=2) / mesh.edge_length[mesh.elem_edges]


def average_flux(mesh, flux):
    '''
    Edge average of a per-(element, local edge) flux.

    Boundary edges take their single one-sided value.
    '''
    flux = np.asarray(flux, dtype=float)
    total = np.bincount(mesh.elem_edges.ravel(), weights=flux.ravel(), minlength=mesh.n_edges)
    count = np.bincount(mesh.elem_edges.ravel(), minlength=mesh.n_edges)
    return total / count
