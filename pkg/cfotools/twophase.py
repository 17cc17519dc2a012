''' Two-Phase Flow Module

This module contains an operator-split simulator for incompressible
two-phase flow on the unit square: a flux optimization pressure solve with
frozen saturation gives conservative edge fluxes, which drive an explicit
upwind update of the elementwise saturation.

Water enters through x = 0 (p = 1, S = 1) and leaves through x = 1 (p = 0);
y = 0 and y = 1 are closed.
'''

from collections import namedtuple
import logging

import numpy as np

from cfotools import assembly
from cfotools import mesh as meshlib
from cfotools.problem import ProblemSpec


log = logging.getLogger(__name__)

UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))

# bound on the derivative of fractional_flow over [0, 1] (max is about 2.455)
FRACTIONAL_FLOW_LIPSCHITZ = 2.5
CLAMP_TOLERANCE = 1e-9
BOUNDARY_TOLERANCE = 1e-12


class CFLError(ValueError):
    '''Time step too large for the explicit upwind update'''

    def __init__(self, element, dt, suggested_dt):
        self.element = element
        self.dt = dt
        self.suggested_dt = suggested_dt
        super(CFLError, self).__init__(
            'CFL condition violated on element {} with dt={:g}; use dt <= {:.3e}'
            .format(element, dt, suggested_dt))


class SaturationBoundsError(ArithmeticError):
    pass


SaturationState = namedtuple('SaturationState', ['S', 't', 'v'])
SaturationState.__doc__ = '''
Saturation per element at time t, with the edge fluxes v (along n_e) of the
latest pressure solve.
'''


def permeability(x, y):
    '''
    High-contrast heterogeneous permeability on the unit square.

    kappa = 1 / ((0.25 - 0.999 (x - x^2) sin(11.2 pi x))
                 (0.25 - 0.999 (y - y^2) sin(5.2 pi y)))
    '''
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    den_x = 0.25 - 0.999 * (x - x ** 2) * np.sin(11.2 * np.pi * x)
    den_y = 0.25 - 0.999 * (y - y ** 2) * np.sin(5.2 * np.pi * y)
    if np.any(den_x <= 0) or np.any(den_y <= 0):
        raise ValueError('permeability denominator is not positive')
    return 1.0 / (den_x * den_y)


def unit_permeability(x, y):
    return np.ones(np.broadcast(np.asarray(x), np.asarray(y)).shape)


def fractional_flow(S):
    '''f(S) = S^2 / (S^2 + (1 - S)^2 / 5)'''
    S = np.asarray(S, dtype=float)
    return S ** 2 / mobility(S)


def mobility(S):
    '''Total mobility S^2 + (1 - S)^2 / 5'''
    S = np.asarray(S, dtype=float)
    return S ** 2 + (1 - S) ** 2 / 5.0


def unit_mobility(S):
    return np.ones_like(np.asarray(S, dtype=float))


PERMEABILITY_MODELS = {
    'heterogeneous': permeability,
    'unit': unit_permeability,
}

MOBILITY_MODELS = {
    'total': mobility,
    'unit': unit_mobility,
}


def _on_line(value, target):
    return np.abs(np.asarray(value) - target) <= BOUNDARY_TOLERANCE


def inflow_edges(mesh):
    '''Boundary edges on the left side x = x0'''
    x0 = mesh.nodes[:, 0].min()
    return mesh.boundary_edge & _on_line(mesh.edge_midpoint[:, 0], x0)


def pressure_problem(mesh, S, permeability=permeability, mobility=mobility):
    '''
    ProblemSpec of the pressure equation with frozen saturation.

    alpha = mobility(S_T) * permeability(x, y) * I on element T, p = 1 - x on
    the left and right sides, zero flux on the bottom and top.
    '''
    S = np.asarray(S, dtype=float)
    if S.shape != (mesh.n_elements,):
        raise ValueError('expected {} saturations, got shape {}'.format(mesh.n_elements, S.shape))
    (x0, x1), (y0, y1) = ((mesh.nodes[:, 0].min(), mesh.nodes[:, 0].max()),
                          (mesh.nodes[:, 1].min(), mesh.nodes[:, 1].max()))
    element_mobility = np.asarray(mobility(S), dtype=float)

    def alpha(x, y, tag):
        scale = element_mobility[tag] * permeability(x, y)
        return scale[..., None, None] * np.eye(2)

    def source(x, y, tag):
        return np.zeros(np.shape(x))

    def g(x, y):
        return (x1 - np.asarray(x)) / (x1 - x0)

    def dirichlet(x, y):
        return _on_line(x, x0) | _on_line(x, x1)

    def neumann(x, y):
        return _on_line(y, y0) | _on_line(y, y1)

    return ProblemSpec(((x0, x1), (y0, y1)), alpha, source, g, dirichlet=dirichlet,
                       neumann=neumann, element_tags=np.arange(mesh.n_elements),
                       name='pressure')


def pressure_solve(mesh, S, permeability=permeability, mobility=mobility):
    '''
    Darcy flux per edge for a frozen saturation field.

    Parameters
    ----------
    mesh: Mesh
    S: array (n_elements,)
    permeability: callable (x, y) -> array, default heterogeneous
    mobility: callable S -> array, default total mobility

    Returns
    -------
    numpy array (n_edges,)
        v . n_e per edge, locally conservative and zero on closed sides.
    '''
    problem = pressure_problem(mesh, S, permeability, mobility)
    return assembly.solve_cfo(mesh, problem).q


def upwind_fluxes(mesh, S, v, inflow=None, inflow_saturation=1.0, flow=fractional_flow):
    '''
    Fractional-flow weighted flux |e| v_e f(S_up) along n_e for every edge.

    On interior edges S_up is the saturation of the element v_e flows out
    of. On boundary inflow edges S_up is inflow_saturation for edges in
    inflow and the interior value elsewhere.
    '''
    if inflow is None:
        inflow = inflow_edges(mesh)
    left = mesh.edge_elems[:, 0]
    right = mesh.edge_elems[:, 1]
    interior = right >= 0
    S_left = S[left]
    S_right = S[np.where(interior, right, left)]

    S_up = np.where(v >= 0, S_left, S_right)
    # boundary edges: outflow when s(T, e) v_e >= 0
    entering = ~interior & (mesh.edge_signs[:, 0] * v < 0) & inflow
    S_up = np.where(entering, inflow_saturation, S_up)
    return mesh.edge_length * v * flow(S_up)


def net_outflow(mesh, fluxes):
    '''sum_{e in dT} s(T, e) F_e per element'''
    out = np.zeros(mesh.n_elements)
    for slot in (0, 1):
        present = mesh.edge_elems[:, slot] >= 0
        out += np.bincount(mesh.edge_elems[present, slot],
                           weights=mesh.edge_signs[present, slot] * fluxes[present],
                           minlength=mesh.n_elements)
    return out


def cfl_limit(mesh, v, lipschitz=FRACTIONAL_FLOW_LIPSCHITZ):
    '''Largest stable dt per element, inf where nothing flows out'''
    outflow = np.clip(mesh.elem_signs * v[mesh.elem_edges], 0, None) * mesh.edge_length[mesh.elem_edges]
    rate = lipschitz * outflow.sum(axis=1) / mesh.area
    with np.errstate(divide='ignore'):
        return np.where(rate > 0, 1.0 / rate, np.inf)


def _enforce_bounds(S):
    low = S.min()
    high = S.max()
    if low < -CLAMP_TOLERANCE or high > 1 + CLAMP_TOLERANCE:
        bad = int(np.argmin(S)) if low < -CLAMP_TOLERANCE else int(np.argmax(S))
        raise SaturationBoundsError('saturation {:.6g} on element {} is outside [0, 1]'
                                    .format(S[bad], bad))
    return np.clip(S, 0.0, 1.0)


def transport_step(mesh, state, dt, inflow=None, inflow_saturation=1.0,
                   lipschitz=FRACTIONAL_FLOW_LIPSCHITZ):
    '''
    Explicit upwind saturation update.

    S_T <- S_T - dt / |T| sum_{e in dT} s(T, e) |e| v_e f(S_up)

    Parameters
    ----------
    mesh: Mesh
    state: SaturationState
    dt: float
    inflow: bool array (n_edges,), optional
        Boundary edges where water enters with inflow_saturation; defaults
        to the left side.
    inflow_saturation: float, default 1
    lipschitz: float, default 2.5
        Bound on f' used by the CFL guard.

    Returns
    -------
    SaturationState
        At time state.t + dt with the same fluxes.
    '''
    if dt <= 0:
        raise ValueError('time step must be positive, got {}'.format(dt))
    v = np.asarray(state.v, dtype=float)
    S = np.asarray(state.S, dtype=float)

    limit = cfl_limit(mesh, v, lipschitz)
    worst = int(np.argmin(limit))
    if dt > limit[worst]:
        raise CFLError(worst, dt, float(limit.min()))

    fluxes = upwind_fluxes(mesh, S, v, inflow, inflow_saturation)
    S_new = S - dt / mesh.area * net_outflow(mesh, fluxes)
    return SaturationState(_enforce_bounds(S_new), state.t + dt, v)


def boundary_outflux(mesh, S, v, inflow=None, inflow_saturation=1.0):
    '''Net fractional flux leaving the domain (negative when water enters)'''
    fluxes = upwind_fluxes(mesh, S, v, inflow, inflow_saturation)
    bnd = mesh.boundary_edge
    return float(np.sum(mesh.edge_signs[bnd, 0] * fluxes[bnd]))


def mass_balance_residual(mesh, before, after, inflow=None, inflow_saturation=1.0):
    '''
    Relative mismatch of one transport step's global water balance.

    |sum_T |T| (S_after - S_before) + dt * outflux| divided by
    dt * (|inflow| + |outflow|), with the boundary fluxes evaluated on the
    state before the step.
    '''
    dt = after.t - before.t
    fluxes = upwind_fluxes(mesh, np.asarray(before.S), np.asarray(before.v), inflow, inflow_saturation)
    bnd = mesh.boundary_edge
    outward = mesh.edge_signs[bnd, 0] * fluxes[bnd]
    change = np.sum(mesh.area * (np.asarray(after.S) - np.asarray(before.S)))
    scale = dt * np.sum(np.abs(outward))
    if scale == 0:
        return float(abs(change))
    return float(abs(change + dt * outward.sum()) / scale)


def _rows(mesh, S):
    n = mesh.n
    if n is None or mesh.n_elements != 2 * n * n:
        raise ValueError('row diagnostics require a mesh from build_uniform')
    # build_uniform orders elements by cell row, cell column, lower/upper
    return np.asarray(S, dtype=float).reshape(n, n, 2)


def front_y_deviation(mesh, S):
    '''max over elements of |S - S of the same element in the bottom row|'''
    rows = _rows(mesh, S)
    return float(np.abs(rows - rows[:1]).max())


def front_is_monotone(mesh, S, tol=1e-12):
    '''True when S does not increase in x along any row of elements'''
    rows = _rows(mesh, S)
    # upper triangle of a cell lies left of its lower triangle
    chain = np.stack([rows[:, :, 1], rows[:, :, 0]], axis=2).reshape(mesh.n, -1)
    return bool(np.all(np.diff(chain, axis=1) <= tol))


class TwoPhaseConfig(object):
    '''
    Two-phase run parameters.

    Parameters
    ----------
    n: int
        Cells per side of the uniform mesh of the unit square.
    dt: float
        Time step.
    t_end: float
        Final time; 0 gives the initial state only.
    pressure_update_interval: int, default 1
        Transport steps between pressure solves. A value larger than the
        number of steps freezes the initial pressure field.
    output_times: sequence of float, optional
        Snapshot times, rounded up to whole steps; defaults to (t_end,).
    permeability: str, default 'heterogeneous'
        Key of PERMEABILITY_MODELS.
    mobility: str, default 'total'
        Key of MOBILITY_MODELS.
    '''

    def __init__(self, n, dt, t_end, pressure_update_interval=1, output_times=None,
                 permeability='heterogeneous', mobility='total'):
        if int(n) != n or n < 1:
            raise ValueError('n must be a positive integer, got {}'.format(n))
        if not dt > 0:
            raise ValueError('dt must be positive, got {}'.format(dt))
        if t_end < 0 or (t_end > 0 and t_end < dt):
            raise ValueError('t_end must be 0 or at least dt, got {}'.format(t_end))
        if int(pressure_update_interval) != pressure_update_interval or pressure_update_interval < 1:
            raise ValueError('pressure_update_interval must be an integer >= 1')
        if permeability not in PERMEABILITY_MODELS:
            raise ValueError('unknown permeability model {!r}'.format(permeability))
        if mobility not in MOBILITY_MODELS:
            raise ValueError('unknown mobility model {!r}'.format(mobility))
        output_times = (t_end,) if output_times is None else tuple(float(t) for t in output_times)
        if any(t < 0 or t > t_end for t in output_times):
            raise ValueError('output times must lie in [0, t_end]')

        self.n = int(n)
        self.dt = float(dt)
        self.t_end = float(t_end)
        self.pressure_update_interval = int(pressure_update_interval)
        self.output_times = output_times
        self.permeability = permeability
        self.mobility = mobility

    def __repr__(self):
        return ('TwoPhaseConfig(n={}, dt={:g}, t_end={:g}, pressure_update_interval={})'
                .format(self.n, self.dt, self.t_end, self.pressure_update_interval))

    @property
    def n_steps(self):
        return int(np.ceil(self.t_end / self.dt - 1e-9))

    def output_steps(self):
        steps = [min(self.n_steps, int(np.ceil(t / self.dt - 1e-9))) for t in self.output_times]
        return sorted(set(steps))


def run_simulation(config, mesh=None, callback=None):
    '''
    Operator-split two-phase simulation from S = 0.

    Parameters
    ----------
    config: TwoPhaseConfig
    mesh: Mesh, optional
        Defaults to build_uniform on the unit square with config.n cells.
    callback: callable (step, before, after), optional
        Called after every transport step.

    Returns
    -------
    list of SaturationState
        One snapshot per distinct output step, in time order.
    '''
    if mesh is None:
        mesh = meshlib.build_uniform(UNIT_SQUARE, config.n)
    perm = PERMEABILITY_MODELS[config.permeability]
    mob = MOBILITY_MODELS[config.mobility]
    inflow = inflow_edges(mesh)

    S = np.zeros(mesh.n_elements)
    state = SaturationState(S, 0.0, pressure_solve(mesh, S, perm, mob))
    outputs = config.output_steps()
    snapshots = []
    if 0 in outputs:
        snapshots.append(state)

    n_steps = config.n_steps
    for step in range(1, n_steps + 1):
        if step > 1 and (step - 1) % config.pressure_update_interval == 0:
            state = state._replace(v=pressure_solve(mesh, state.S, perm, mob))
        t_next = config.t_end if step == n_steps else step * config.dt
        before = state
        state = transport_step(mesh, state, t_next - state.t, inflow)
        if callback is not None:
            callback(step, before, state)
        if step in outputs:
            snapshots.append(state)
            log.info('snapshot at t=%g: mean saturation %.6f', state.t, state.S.mean())
    return snapshots
