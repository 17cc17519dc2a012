''' Analysis Module

This module contains error norms, residual metrics and convergence studies
for solutions of the flux optimization scheme, together with the discrete
norms used to check the inf-sup flux construction.
'''

from collections import namedtuple
from concurrent.futures import ThreadPoolExecutor
import logging
import warnings

import numpy as np
import pandas as pd
import statsmodels.api as sm

from cfotools import assembly
from cfotools import mesh as meshlib
from cfotools import quadrature
from cfotools.cases import test_case, scale_problem  # noqa: F401
from cfotools.problem import ProblemSpec


log = logging.getLogger(__name__)

# errors below this value are treated as rounding noise when computing orders
ROUNDING_FLOOR = 1e-11

TABLE_COLUMNS = ['h', 'l2', 'l2_order', 'h1', 'h1_order', 'residual', 'residual_order',
                 'flux', 'flux_order', 'lambda', 'lambda_order']
ERROR_COLUMNS = ['l2', 'h1', 'residual', 'flux', 'lambda']


ErrorReport = namedtuple('ErrorReport', ['h', 'l2', 'h1', 'residual', 'flux', 'lam',
                                         'l2_rel', 'h1_rel', 'flux_rel'])
ErrorReport.__doc__ = '''
Errors of one solved level.

h: mesh size, the cell side of the mesh
l2, h1: ||u_h - u||_0 and ||grad(u_h - u)||_0
residual: square root of the flux-mismatch functional
flux: |||q - q_h|||_0
lam: ||lambda_h||_0
l2_rel, h1_rel, flux_rel: the same divided by ||u||_0, ||grad u||_0, |||q|||_0
'''


def _require_exact(problem):
    if problem.exact is None:
        raise ValueError('problem {!r} has no exact solution'.format(problem.name))
    return problem.exact


def _element_points(mesh, problem, degree):
    points, weights, barycentric = quadrature.map_triangle_rule(mesh, quadrature.triangle_rule(degree))
    tags = np.broadcast_to(problem.tags(mesh)[:, None], weights.shape)
    return points[..., 0], points[..., 1], tags, weights, barycentric


def interpolate(mesh, problem):
    '''Nodal interpolant of the exact solution'''
    exact = _require_exact(problem)
    return np.asarray(exact.u(mesh.nodes[:, 0], mesh.nodes[:, 1], None), dtype=float)


def error_l2(mesh, u_h, problem, degree=quadrature.ERROR_TRIANGLE_DEGREE):
    '''
    L2 norm of u_h - u.

    Parameters
    ----------
    mesh: Mesh
    u_h: array (n_nodes,)
        P1 nodal values; pass zeros to get ||u||_0.
    problem: ProblemSpec
        Supplies the exact solution, evaluated with element region tags.
    degree: int, default 5

    Returns
    -------
    float
    '''
    exact = _require_exact(problem)
    x, y, tags, weights, barycentric = _element_points(mesh, problem, degree)
    approx = np.einsum('qk,tk->tq', barycentric, np.asarray(u_h, dtype=float)[mesh.triangles])
    diff = approx - exact.u(x, y, tags)
    return float(np.sqrt(np.sum(weights * diff ** 2)))


def error_h1(mesh, u_h, problem, degree=quadrature.ERROR_TRIANGLE_DEGREE):
    '''
    Gradient seminorm ||grad(u_h - u)||_0.

    grad u_h is constant on each element.
    '''
    exact = _require_exact(problem)
    x, y, tags, weights, _ = _element_points(mesh, problem, degree)
    grad_h = np.einsum('tk,tkd->td', np.asarray(u_h, dtype=float)[mesh.triangles], mesh.grad_basis)
    diff = grad_h[:, None, :] - exact.grad(x, y, tags)
    return float(np.sqrt(np.sum(weights * np.sum(diff ** 2, axis=-1))))


def flux_error(mesh, q_h, problem, order=quadrature.ERROR_EDGE_ORDER):
    '''
    Edge flux error |||q - q_h|||_0.

    |||m|||_0^2 = sum_T sum_{e in dT} h_e int_e m^2 ds, so interior edges are
    counted once from each adjacent element, each time with the exact flux
    -(alpha grad u + beta u) . n_e taken from that element's side.

    Parameters
    ----------
    mesh: Mesh
    q_h: array (n_edges,)
        Pass zeros to get |||q|||_0.
    problem: ProblemSpec
    order: int, default 5
        Edge rule order.

    Returns
    -------
    float
    '''
    _require_exact(problem)
    points, weights, _ = quadrature.map_edge_rule(mesh, quadrature.segment_rule(order))
    tags = np.broadcast_to(problem.tags(mesh)[:, None, None], weights.shape)
    normal = mesh.edge_normal[mesh.elem_edges][:, :, None, :]
    exact = problem.exact_flux(points[..., 0], points[..., 1], tags, normal)
    diff = exact - np.asarray(q_h, dtype=float)[mesh.elem_edges][:, :, None]
    h_e = mesh.edge_length[mesh.elem_edges][:, :, None]
    return float(np.sqrt(np.sum(h_e * weights * diff ** 2)))


def lambda_norm(mesh, lam):
    '''(sum_T |T| lambda_T^2)^(1/2)'''
    lam = np.asarray(lam, dtype=float)
    return float(np.sqrt(np.sum(mesh.area * lam ** 2)))


def residual_norm(mesh, problem, u_h, q_h):
    '''Square root of the flux-mismatch functional at (u_h, q_h)'''
    return float(np.sqrt(assembly.j2_functional(mesh, problem, u_h, q_h)))


def edge_jumps(mesh, sigma):
    '''
    Jump of an elementwise constant across every edge.

    [[sigma]]_e = sigma_L - sigma_R with L, R ordered as in edge_elems; on a
    boundary edge it is s(T, e) sigma_T.
    '''
    sigma = np.asarray(sigma, dtype=float)
    if sigma.shape != (mesh.n_elements,):
        raise ValueError('expected {} element values, got shape {}'.format(mesh.n_elements, sigma.shape))
    first = mesh.edge_signs[:, 0] * sigma[mesh.edge_elems[:, 0]]
    second = np.where(mesh.edge_elems[:, 1] >= 0,
                      mesh.edge_signs[:, 1] * sigma[np.maximum(mesh.edge_elems[:, 1], 0)], 0.0)
    return first + second


def discrete_h1_norm(mesh, sigma):
    '''(sum_e [[sigma]]_e^2)^(1/2)'''
    return float(np.sqrt(np.sum(edge_jumps(mesh, sigma) ** 2)))


def build_inf_sup_flux(mesh, sigma):
    '''
    Edge flux p_e = [[sigma]]_e / h_e.

    Its weak divergence tested against sigma equals the squared discrete H1
    norm of sigma.
    '''
    return edge_jumps(mesh, sigma) / mesh.edge_length


def edge_flux_norm(mesh, p):
    '''(sum_e h_e int_e p^2 ds)^(1/2) for edgewise constant p, each edge once'''
    p = np.asarray(p, dtype=float)
    return float(np.sqrt(np.sum(mesh.edge_length ** 2 * p ** 2)))


def _relative(error, norm):
    return error / norm if norm > 0 else np.nan


def error_report(mesh, problem, solution, h=None):
    '''
    All error metrics of a solved level.

    Parameters
    ----------
    mesh: Mesh
    problem: ProblemSpec
    solution: CfoSolution
    h: float, optional
        Reported mesh size, defaults to mesh.h.

    Returns
    -------
    ErrorReport
    '''
    h = mesh.h if h is None else h
    zero_u = np.zeros(mesh.n_nodes)
    zero_q = np.zeros(mesh.n_edges)
    l2 = error_l2(mesh, solution.u, problem)
    h1 = error_h1(mesh, solution.u, problem)
    flux = flux_error(mesh, solution.q, problem)
    return ErrorReport(h=h, l2=l2, h1=h1,
                       residual=residual_norm(mesh, problem, solution.u, solution.q),
                       flux=flux,
                       lam=lambda_norm(mesh, solution.lam),
                       l2_rel=_relative(l2, error_l2(mesh, zero_u, problem)),
                       h1_rel=_relative(h1, error_h1(mesh, zero_u, problem)),
                       flux_rel=_relative(flux, flux_error(mesh, zero_q, problem)))


def check_levels(levels):
    '''Levels must be positive integers, each twice the previous one'''
    levels = [int(n) for n in levels]
    if not levels:
        raise ValueError('at least one mesh level is required')
    if any(n < 1 for n in levels):
        raise ValueError('mesh levels must be positive, got {}'.format(levels))
    for coarse, fine in zip(levels[:-1], levels[1:]):
        if fine != 2 * coarse:
            raise ValueError('mesh levels must strictly double, got {} after {}'.format(fine, coarse))
    return levels


def build_mesh(domain, n, family='uniform', magnitude=0.2, seed=0):
    '''Mesh of the given family on a rectangle'''
    if family == 'uniform':
        return meshlib.build_uniform(domain, n)
    if family == 'perturbed':
        return meshlib.build_perturbed(domain, n, magnitude, seed)
    raise ValueError('unknown mesh family {!r}'.format(family))


def solve_level(problem, n, family='uniform', magnitude=0.2, seed=0):
    '''Solve one level and report its errors with h the cell side of the mesh'''
    mesh = build_mesh(problem.domain, n, family, magnitude, seed)
    solution = assembly.solve_cfo(mesh, problem)
    report = error_report(mesh, problem, solution)
    log.info('%s n=%d: l2=%.3e h1=%.3e residual=%.3e', problem.name, n,
             report.l2, report.h1, report.residual)
    return report


def _orders(errors, label):
    errors = np.asarray(errors, dtype=float)
    orders = np.full(len(errors), np.nan)
    for i in range(1, len(errors)):
        prev, cur = errors[i - 1], errors[i]
        if prev <= ROUNDING_FLOOR or cur <= ROUNDING_FLOOR:
            warnings.warn('{} errors at rounding level ({:.2e}, {:.2e}); order left undefined'
                          .format(label, prev, cur))
            continue
        orders[i] = np.log2(prev / cur)
    return orders


def convergence_table(reports, levels, relative=False):
    '''
    Assemble error reports into a convergence table.

    Returns
    -------
    pandas.DataFrame
        Columns TABLE_COLUMNS, index the subdivision counts n. Order columns
        hold log2(e(h) / e(h/2)) and are NaN on the first row.
    '''
    if relative:
        errors = {'l2': [r.l2_rel for r in reports],
                  'h1': [r.h1_rel for r in reports],
                  'flux': [r.flux_rel for r in reports]}
    else:
        errors = {'l2': [r.l2 for r in reports],
                  'h1': [r.h1 for r in reports],
                  'flux': [r.flux for r in reports]}
    errors['residual'] = [r.residual for r in reports]
    errors['lambda'] = [r.lam for r in reports]

    table = pd.DataFrame(index=pd.Index(levels, name='n'), columns=TABLE_COLUMNS, dtype=float)
    table['h'] = [r.h for r in reports]
    for column in ERROR_COLUMNS:
        table[column] = errors[column]
        table[column + '_order'] = _orders(errors[column], column)
    return table


def convergence_study(case, levels, family='uniform', relative=False, magnitude=0.2,
                      seed=0, workers=None):
    '''
    Errors and observed orders over a sequence of halving mesh sizes.

    Parameters
    ----------
    case: int or ProblemSpec
        Catalog id (see test_case) or a problem with an exact solution.
    levels: list of int
        Subdivision counts, each twice the previous one.
    family: str, default 'uniform'
        'uniform' or 'perturbed'.
    relative: bool, default False
        Report l2, h1 and flux errors relative to the norms of the exact
        solution and flux.
    magnitude, seed:
        Perturbation parameters of the 'perturbed' family.
    workers: int, optional
        Solve levels concurrently on this many threads.

    Returns
    -------
    pandas.DataFrame
        See convergence_table.
    '''
    problem = case if isinstance(case, ProblemSpec) else test_case(case)
    levels = check_levels(levels)

    def run(n):
        return solve_level(problem, n, family, magnitude, seed)

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run, levels))
    else:
        reports = [run(n) for n in levels]
    return convergence_table(reports, levels, relative)


def fitted_order(table, column, confidence_level=95.0):
    '''
    Least-squares convergence order over all rows of a table.

    Parameters
    ----------
    table: pandas.DataFrame
        Output of convergence_study.
    column: str
        One of 'l2', 'h1', 'residual', 'flux', 'lambda'.
    confidence_level: float, default 95
        Size of the returned confidence interval, in percent.

    Returns
    -------
    (order, confidence interval, calc_info)
        order is the slope of log(error) against log(h); calc_info holds the
        fitted intercept and the statsmodels results object.
    '''
    if column not in ERROR_COLUMNS:
        raise ValueError('unknown error column {!r}'.format(column))
    df = pd.DataFrame({'log_h': np.log(table['h'].astype(float)),
                       'log_error': np.log(table[column].astype(float))})
    df = df.replace([np.inf, -np.inf], np.nan).dropna()
    if len(df) < 2:
        raise ValueError('at least two levels with positive {} errors are required'.format(column))
    df = sm.add_constant(df, has_constant='add')
    results = sm.OLS(endog=df.log_error, exog=df.loc[:, ['const', 'log_h']]).fit()
    intercept, order = results.params
    if len(df) > 2:
        ci = tuple(results.conf_int(alpha=1 - confidence_level / 100.0).loc['log_h'])
    else:
        ci = (order, order)
    calc_info = {
        'intercept': intercept,
        'ols_result': results,
    }
    return order, ci, calc_info
