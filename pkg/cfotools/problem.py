''' Problem Module

This module contains the description of a convection-diffusion problem
-div(alpha grad u + beta u) = f with Dirichlet and zero-flux boundary parts.

Every coefficient field is called as ``field(x, y, tag)`` where ``x`` and
``y`` are arrays of equal shape and ``tag`` is an integer array of the same
shape holding the region tag of the element the points belong to. Fields that
jump across element boundaries use the tag instead of the coordinates to
decide which side they are evaluated on.
'''

from collections import namedtuple

import numpy as np

from cfotools import mesh as meshlib


ExactSolution = namedtuple('ExactSolution', ['u', 'grad'])
ExactSolution.__doc__ = '''
Exact solution of a problem.

u: callable (x, y, tag) -> array
grad: callable (x, y, tag) -> array (..., 2)
'''


class AssemblyError(ValueError):
    pass


def everywhere(x, y):
    return np.ones(np.shape(x), dtype=bool)


def identity_alpha(x, y, tag):
    return np.broadcast_to(np.eye(2), np.shape(x) + (2, 2)).copy()


def diagonal_alpha(ax, ay):
    '''2x2 diagonal tensor field from two scalar arrays of equal shape'''
    ax = np.asarray(ax, dtype=float)
    ay = np.broadcast_to(np.asarray(ay, dtype=float), ax.shape)
    out = np.zeros(ax.shape + (2, 2))
    out[..., 0, 0] = ax
    out[..., 1, 1] = ay
    return out


class ProblemSpec(object):
    '''
    Convection-diffusion problem data.

    Parameters
    ----------
    domain: ((x0, x1), (y0, y1))
        Rectangle the problem is posed on.
    alpha: callable (x, y, tag) -> array (..., 2, 2)
        Symmetric positive-definite diffusion tensor.
    source: callable (x, y, tag) -> array
        Right-hand side f.
    dirichlet_g: callable (x, y) -> array
        Dirichlet datum, interpolated at Dirichlet nodes.
    dirichlet: callable (x, y) -> bool array, default everywhere
        Selects Dirichlet boundary edges by their midpoints.
    neumann: callable (x, y) -> bool array, optional
        Selects zero-flux boundary edges.
    beta: callable (x, y, tag) -> array (..., 2), optional
        Convection field, zero when omitted.
    exact: ExactSolution, optional
    region: callable (x, y) -> int array, optional
        Region tag of a point; evaluated at element centroids. All elements
        carry tag 0 when omitted.
    element_tags: int array (n_elements,), optional
        Explicit per-element tags, overriding region. Only valid for meshes
        with a matching element count.
    weight: float or array (n_elements,), default 1
        Per-element weight tau_T of the flux-mismatch functional.
    name: str, optional
    '''

    def __init__(self, domain, alpha, source, dirichlet_g, dirichlet=everywhere,
                 neumann=None, beta=None, exact=None, region=None,
                 element_tags=None, weight=1.0, name=''):
        self.domain = tuple(tuple(float(v) for v in side) for side in domain)
        self.alpha = alpha
        self.source = source
        self.dirichlet_g = dirichlet_g
        self.dirichlet = dirichlet
        self.neumann = neumann
        self.beta = beta
        self.exact = exact
        self.region = region
        self.element_tags = None if element_tags is None else np.asarray(element_tags, dtype=np.int64)
        self.weight = weight
        self.name = name

    def __repr__(self):
        return 'ProblemSpec({!r}, domain={})'.format(self.name, self.domain)

    def tags(self, mesh):
        '''Per-element region tags'''
        if self.element_tags is not None:
            if len(self.element_tags) != mesh.n_elements:
                raise AssemblyError('element_tags has {} entries for a mesh with {} elements'
                                    .format(len(self.element_tags), mesh.n_elements))
            return self.element_tags
        if self.region is None:
            return np.zeros(mesh.n_elements, dtype=np.int64)
        return np.asarray(self.region(mesh.centroid[:, 0], mesh.centroid[:, 1]), dtype=np.int64)

    def weights(self, mesh):
        '''Per-element weight tau_T'''
        tau = np.broadcast_to(np.asarray(self.weight, dtype=float), (mesh.n_elements,))
        if np.any(tau <= 0):
            raise AssemblyError('element weights must be positive')
        return tau

    def mark(self, mesh):
        '''Mesh copy with boundary tags from the problem's predicates'''
        return meshlib.mark_boundary(mesh, self.dirichlet, self.neumann)

    def evaluate_alpha(self, x, y, tag):
        a = np.asarray(self.alpha(x, y, tag), dtype=float)
        if a.shape != np.shape(x) + (2, 2):
            raise AssemblyError('alpha returned shape {}, expected {}'
                                .format(a.shape, np.shape(x) + (2, 2)))
        return a

    def evaluate_beta(self, x, y, tag):
        if self.beta is None:
            return np.zeros(np.shape(x) + (2,))
        return np.broadcast_to(np.asarray(self.beta(x, y, tag), dtype=float), np.shape(x) + (2,))

    def exact_flux(self, x, y, tag, normal):
        '''
        Exact normal flux -(alpha grad u + beta u) . normal.

        normal broadcasts against the point arrays with a trailing axis of 2.
        '''
        if self.exact is None:
            raise ValueError('problem {!r} has no exact solution'.format(self.name))
        a = self.evaluate_alpha(x, y, tag)
        grad = np.asarray(self.exact.grad(x, y, tag), dtype=float)
        flux = np.einsum('...ab,...b->...a', a, grad)
        flux = flux + self.evaluate_beta(x, y, tag) * np.asarray(self.exact.u(x, y, tag))[..., None]
        return -np.sum(flux * normal, axis=-1)
