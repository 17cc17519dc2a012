''' Quadrature Module

Gauss rules on the unit segment [0, 1] and on the reference triangle
{(x, y): x, y >= 0, x + y <= 1}, plus helpers mapping them onto mesh
elements and edges.
'''

from collections import namedtuple

import numpy as np


QuadRule = namedtuple('QuadRule', ['points', 'weights', 'degree'])

# default rules used by assembly and error norms
ASSEMBLY_EDGE_ORDER = 3
SOURCE_TRIANGLE_DEGREE = 4
ERROR_TRIANGLE_DEGREE = 5
ERROR_EDGE_ORDER = 5

_SQRT15 = np.sqrt(15.0)


def _frozen_rule(points, weights, degree):
    points = np.array(points, dtype=float)
    weights = np.array(weights, dtype=float)
    points.setflags(write=False)
    weights.setflags(write=False)
    return QuadRule(points, weights, degree)


def segment_rule(order):
    '''
    Gauss-Legendre rule on [0, 1].

    Parameters
    ----------
    order: int
        Number of points, one of 2, 3 or 5.

    Returns
    -------
    QuadRule
        points of shape (order,), weights summing to 1, degree 2*order - 1.
    '''
    if order not in (2, 3, 5):
        raise ValueError('unsupported segment rule order {}'.format(order))
    x, w = np.polynomial.legendre.leggauss(order)
    return _frozen_rule(0.5 * (x + 1.0), 0.5 * w, 2 * order - 1)


def triangle_rule(degree):
    '''
    Symmetric Gauss rule on the reference triangle.

    Parameters
    ----------
    degree: int
        Polynomial degree integrated exactly, one of 2 (3 points),
        4 (6 points) or 5 (7 points).

    Returns
    -------
    QuadRule
        points of shape (n, 2), weights summing to 1/2.
    '''
    if degree == 2:
        points = [[1.0 / 6, 1.0 / 6], [2.0 / 3, 1.0 / 6], [1.0 / 6, 2.0 / 3]]
        weights = [1.0 / 6] * 3
    elif degree == 4:
        a = 0.44594849091596488632
        b = 0.09157621350977074346
        wa = 0.22338158967801146570 / 2
        wb = 0.10995174365532186764 / 2
        points = [[a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
                  [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]]
        weights = [wa] * 3 + [wb] * 3
    elif degree == 5:
        a = (6.0 - _SQRT15) / 21.0
        b = (6.0 + _SQRT15) / 21.0
        wa = (155.0 - _SQRT15) / 2400.0
        wb = (155.0 + _SQRT15) / 2400.0
        points = [[1.0 / 3, 1.0 / 3],
                  [a, a], [1 - 2 * a, a], [a, 1 - 2 * a],
                  [b, b], [1 - 2 * b, b], [b, 1 - 2 * b]]
        weights = [9.0 / 80] + [wa] * 3 + [wb] * 3
    else:
        raise ValueError('unsupported triangle rule degree {}'.format(degree))
    return _frozen_rule(points, weights, degree)


def map_triangle_rule(mesh, rule):
    '''
    Physical quadrature points and weights on every element.

    Returns
    -------
    (points, weights, barycentric)
        points: (n_elements, n_q, 2); weights: (n_elements, n_q) summing to
        the element area; barycentric: (n_q, 3) values of the three P1
        basis functions at the reference points.
    '''
    xi = rule.points[:, 0]
    eta = rule.points[:, 1]
    barycentric = np.column_stack([1.0 - xi - eta, xi, eta])
    vertices = mesh.nodes[mesh.triangles]
    points = np.einsum('qk,tkd->tqd', barycentric, vertices)
    weights = 2.0 * mesh.area[:, None] * rule.weights[None, :]
    return points, weights, barycentric


def map_edge_rule(mesh, rule):
    '''
    Quadrature points on every (element, local edge) pair.

    Local edge k runs from vertex k to vertex k+1, so the basis function of
    vertex k equals 1 - t and that of vertex k+1 equals t at parameter t.

    Returns
    -------
    (points, weights, basis)
        points: (n_elements, 3, n_q, 2); weights: (n_elements, 3, n_q)
        summing to the edge length; basis: (3, n_q, 3) values of the element's
        P1 basis functions at the points of local edge k.
    '''
    t = rule.points
    vertices = mesh.nodes[mesh.triangles]
    start = vertices
    end = np.roll(vertices, -1, axis=1)
    points = start[:, :, None, :] + t[None, None, :, None] * (end - start)[:, :, None, :]
    length = mesh.edge_length[mesh.elem_edges]
    weights = length[:, :, None] * rule.weights[None, None, :]

    basis = np.zeros((3, len(t), 3))
    for k in range(3):
        basis[k, :, k] = 1.0 - t
        basis[k, :, (k + 1) % 3] = t
    return points, weights, basis


def integrate_elements(mesh, func, rule):
    '''Integral of func(x, y, element_index) over each element'''
    points, weights, _ = map_triangle_rule(mesh, rule)
    elem = np.broadcast_to(np.arange(mesh.n_elements)[:, None], weights.shape)
    values = func(points[..., 0], points[..., 1], elem)
    return np.sum(weights * values, axis=1)
