''' Test Cases Module

This module contains the catalog of manufactured elliptic problems used by
convergence studies. Each problem is returned as a ProblemSpec with an exact
solution attached.
'''

import numpy as np

from cfotools.problem import ProblemSpec, ExactSolution, diagonal_alpha, identity_alpha


UNIT_SQUARE = ((0.0, 1.0), (0.0, 1.0))
CENTERED_SQUARE = ((-1.0, 1.0), (-1.0, 1.0))

# quadrant values (alpha_x, alpha_y, amplitude), lower-left first and then
# counterclockwise; normal flux products alpha_x * amplitude and
# alpha_y * amplitude agree across both axes
QUADRANT_COEFFICIENTS = np.array([
    [100.0, 10.0, 0.1],
    [1.0, 0.1, 10.0],
    [1000.0, 100.0, 0.01],
    [0.1, 0.01, 100.0],
])


def _with_boundary_datum(u):
    def g(x, y):
        return u(x, y, None)
    return g


def smooth_coefficients():
    '''alpha = I on (0, 1)^2 with u = cos(pi x) cos(pi y)'''
    pi = np.pi

    def u(x, y, tag=None):
        return np.cos(pi * x) * np.cos(pi * y)

    def grad(x, y, tag=None):
        return np.stack([-pi * np.sin(pi * x) * np.cos(pi * y),
                         -pi * np.cos(pi * x) * np.sin(pi * y)], axis=-1)

    def f(x, y, tag=None):
        return 2 * pi ** 2 * u(x, y)

    return ProblemSpec(UNIT_SQUARE, identity_alpha, f, _with_boundary_datum(u),
                       exact=ExactSolution(u, grad), name='smooth coefficients')


def holder_coefficients():
    '''
    Non-smooth Hoelder continuous diffusion on (-1, 1)^2.

    alpha = [[1 + |x|, c], [c, 1 + |y|]] with c = |x|^(1/3) |y|^(1/3) / 2
    and u = cos(pi x) cos(pi y). f = -div(alpha grad u) is evaluated from the
    closed-form derivative; the cube-root terms are singular on the axes,
    where their contribution is set to zero.
    '''
    pi = np.pi

    def coupling(x, y):
        return 0.5 * np.cbrt(np.abs(x)) * np.cbrt(np.abs(y))

    def alpha(x, y, tag=None):
        a = diagonal_alpha(1 + np.abs(x), 1 + np.abs(y))
        c = coupling(x, y)
        a[..., 0, 1] = c
        a[..., 1, 0] = c
        return a

    def u(x, y, tag=None):
        return np.cos(pi * x) * np.cos(pi * y)

    def grad(x, y, tag=None):
        return np.stack([-pi * np.sin(pi * x) * np.cos(pi * y),
                         -pi * np.cos(pi * x) * np.sin(pi * y)], axis=-1)

    def f(x, y, tag=None):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ux = -pi * np.sin(pi * x) * np.cos(pi * y)
        uy = -pi * np.cos(pi * x) * np.sin(pi * y)
        uxx = -pi ** 2 * u(x, y)
        uyy = uxx
        uxy = pi ** 2 * np.sin(pi * x) * np.sin(pi * y)
        c = coupling(x, y)
        with np.errstate(divide='ignore', invalid='ignore'):
            cx = np.where(x != 0, c / (3 * x), 0.0)
            cy = np.where(y != 0, c / (3 * y), 0.0)
        div = (np.sign(x) * ux + (1 + np.abs(x)) * uxx + cx * uy + c * uxy
               + cy * ux + c * uxy + np.sign(y) * uy + (1 + np.abs(y)) * uyy)
        return -div

    return ProblemSpec(CENTERED_SQUARE, alpha, f, _with_boundary_datum(u),
                       exact=ExactSolution(u, grad), name='hoelder coefficients')


def _half_plane(x, y):
    return (np.asarray(x) >= 0.5).astype(np.int64)


def discontinuous_coefficients():
    '''
    Diffusion jumping across x = 1/2 on (0, 1)^2.

    alpha = I for x < 1/2 and [[10, 3], [3, 1]] otherwise, with a piecewise
    quadratic exact solution whose value and normal flux are continuous at the
    interface. f = 4 on the left, -5.6 on the right.
    '''
    right_alpha = np.array([[10.0, 3.0], [3.0, 1.0]])

    def side(x, y, tag):
        if tag is None:
            return _half_plane(x, y)
        return np.broadcast_to(tag, np.shape(x))

    def alpha(x, y, tag):
        right = side(x, y, tag) == 1
        a = identity_alpha(x, y, tag)
        a[right] = right_alpha
        return a

    def u(x, y, tag=None):
        left = 1 - 2 * y ** 2 + 4 * x * y + 6 * x + 2 * y
        right = -2 * y ** 2 + 1.6 * x * y - 0.6 * x + 3.2 * y + 4.3
        return np.where(side(x, y, tag) == 1, right, left)

    def grad(x, y, tag=None):
        left = np.stack([4 * y + 6, -4 * y + 4 * x + 2], axis=-1)
        right = np.stack([1.6 * y - 0.6, -4 * y + 1.6 * x + 3.2], axis=-1)
        return np.where((side(x, y, tag) == 1)[..., None], right, left)

    def f(x, y, tag=None):
        return np.where(side(x, y, tag) == 1, -5.6, 4.0)

    return ProblemSpec(UNIT_SQUARE, alpha, f, _with_boundary_datum(u),
                       exact=ExactSolution(u, grad), region=_half_plane,
                       name='discontinuous coefficients')


def quadrant_index(x, y):
    '''0..3 for the quadrants lower-left, lower-right, upper-right, upper-left'''
    right = np.asarray(x) >= 0
    upper = np.asarray(y) >= 0
    return np.where(upper, np.where(right, 2, 3), np.where(right, 1, 0)).astype(np.int64)


def four_quadrant_coefficients():
    '''
    Anisotropic diffusion constant on each quadrant of (-1, 1)^2.

    u = a_i sin(2 pi x) sin(2 pi y) on quadrant i with diagonal alpha
    (ax_i, ay_i); see QUADRANT_COEFFICIENTS.
    '''
    two_pi = 2 * np.pi

    def params(x, y, tag):
        q = quadrant_index(x, y) if tag is None else np.broadcast_to(tag, np.shape(x))
        return np.moveaxis(QUADRANT_COEFFICIENTS[q], -1, 0)

    def alpha(x, y, tag):
        ax, ay, _ = params(x, y, tag)
        return diagonal_alpha(ax, ay)

    def u(x, y, tag=None):
        _, _, amp = params(x, y, tag)
        return amp * np.sin(two_pi * x) * np.sin(two_pi * y)

    def grad(x, y, tag=None):
        _, _, amp = params(x, y, tag)
        return np.stack([amp * two_pi * np.cos(two_pi * x) * np.sin(two_pi * y),
                         amp * two_pi * np.sin(two_pi * x) * np.cos(two_pi * y)], axis=-1)

    def f(x, y, tag=None):
        ax, ay, amp = params(x, y, tag)
        return two_pi ** 2 * amp * (ax + ay) * np.sin(two_pi * x) * np.sin(two_pi * y)

    return ProblemSpec(CENTERED_SQUARE, alpha, f, _with_boundary_datum(u),
                       exact=ExactSolution(u, grad), region=quadrant_index,
                       name='four quadrant coefficients')


def convection():
    '''alpha = I, beta = (1, 0) on (0, 1)^2 with u = x(1 - x) y(1 - y)'''

    def beta(x, y, tag=None):
        out = np.zeros(np.shape(x) + (2,))
        out[..., 0] = 1.0
        return out

    def u(x, y, tag=None):
        return x * (1 - x) * y * (1 - y)

    def grad(x, y, tag=None):
        return np.stack([(1 - 2 * x) * y * (1 - y), x * (1 - x) * (1 - 2 * y)], axis=-1)

    def f(x, y, tag=None):
        return 2 * y * (1 - y) + 2 * x * (1 - x) - (1 - 2 * x) * y * (1 - y)

    return ProblemSpec(UNIT_SQUARE, identity_alpha, f, _with_boundary_datum(u),
                       beta=beta, exact=ExactSolution(u, grad), name='convection')


CASES = {
    1: smooth_coefficients,
    2: holder_coefficients,
    3: discontinuous_coefficients,
    4: four_quadrant_coefficients,
    5: convection,
}


def test_case(case_id):
    '''
    Built-in problem by number.

    Parameters
    ----------
    case_id: int
        1 smooth, 2 Hoelder continuous, 3 discontinuous across x = 1/2,
        4 four quadrants, 5 convection.

    Returns
    -------
    ProblemSpec
    '''
    try:
        factory = CASES[int(case_id)]
    except (KeyError, ValueError, TypeError):
        raise ValueError('unknown test case {!r}, expected one of {}'
                         .format(case_id, sorted(CASES)))
    return factory()


# keep pytest from collecting the catalog accessor
test_case.__test__ = False


def scale_problem(problem, factor):
    '''
    Problem with f, g and the exact solution multiplied by factor.

    The coefficients and boundary partition are shared with the original.
    '''
    factor = float(factor)
    source = problem.source
    g = problem.dirichlet_g
    exact = problem.exact

    def scaled_source(x, y, tag):
        return factor * np.asarray(source(x, y, tag))

    def scaled_g(x, y):
        return factor * np.asarray(g(x, y))

    scaled_exact = None
    if exact is not None:
        scaled_exact = ExactSolution(lambda x, y, tag: factor * np.asarray(exact.u(x, y, tag)),
                                     lambda x, y, tag: factor * np.asarray(exact.grad(x, y, tag)))
    return ProblemSpec(problem.domain, problem.alpha, scaled_source, scaled_g,
                       dirichlet=problem.dirichlet, neumann=problem.neumann,
                       beta=problem.beta, exact=scaled_exact, region=problem.region,
                       element_tags=problem.element_tags, weight=problem.weight,
                       name='{} x {:g}'.format(problem.name, factor))
