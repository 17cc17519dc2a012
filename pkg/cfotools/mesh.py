''' Mesh Module

This module contains functions to build conforming triangulations of
rectangular domains with globally oriented edges, together with all the
element/edge topology needed by the flux assembly.
'''

import copy
import logging

import numpy as np


log = logging.getLogger(__name__)

# boundary classification codes shared by edge_tags and node_tags
INTERIOR = 0
DIRICHLET = 1
NEUMANN = 2
UNCLASSIFIED = -1
CONFLICT = -2


class MeshError(ValueError):
    pass


def edge_orientation(a, b, coords):
    '''
    Unit normal n_e of the edge running from node a to node b.

    Parameters
    ----------
    a, b: int
        Global node indices with a < b.
    coords: array (n_nodes, 2)
        Node coordinates.

    Returns
    -------
    numpy array (2,)
        n_e = (t_y, -t_x) where t is the unit tangent from a to b.
    '''
    if a >= b:
        raise MeshError('edge orientation requires a < b, got ({}, {})'.format(a, b))
    coords = np.asarray(coords, dtype=float)
    normals, _ = _edge_normals(coords, np.array([[a, b]]))
    return normals[0]


def _edge_normals(nodes, edges):
    tangent = nodes[edges[:, 1]] - nodes[edges[:, 0]]
    length = np.hypot(tangent[:, 0], tangent[:, 1])
    if np.any(length == 0):
        raise MeshError('coincident nodes on edge {}'.format(int(np.argmin(length))))
    tangent = tangent / length[:, None]
    return np.column_stack([tangent[:, 1], -tangent[:, 0]]), length


def signed_areas(nodes, triangles):
    p0 = nodes[triangles[:, 0]]
    p1 = nodes[triangles[:, 1]]
    p2 = nodes[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) -
                  (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1]))


def _freeze(*arrays):
    for arr in arrays:
        arr.setflags(write=False)


class Mesh(object):
    '''
    Conforming triangulation with globally oriented edges.

    Local edge k of a triangle joins its vertices k and k+1 (mod 3). Edge e
    has nodes (a, b) with a < b and normal n_e obtained by rotating the
    tangent a -> b by -90 degrees. The sign factor s(T, e) is +1 when n_e is
    the outward normal of T.

    Parameters
    ----------
    nodes: array (n_nodes, 2)
        Node coordinates.
    triangles: array (n_triangles, 3)
        Counterclockwise node index triples.
    h: float, optional
        Nominal mesh size; defaults to the largest element diameter.

    Attributes
    ----------
    edges, edge_normal, edge_length, edge_midpoint: per-edge arrays
    elem_edges, elem_signs: (n_triangles, 3) edge indices and sign factors
    edge_elems: (n_edges, 2) adjacent elements, first one is the element the
        normal points out of (or the only element for boundary edges),
        -1 marks a missing neighbour
    edge_signs: (n_edges, 2) sign factors of the elements in edge_elems
    area, diameter, centroid, grad_basis: per-element geometry
    edge_tags, node_tags: boundary classification, see mark_boundary
    '''

    def __init__(self, nodes, triangles, h=None):
        nodes = np.array(nodes, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise MeshError('nodes must be an (n, 2) array')
        if triangles.ndim != 2 or triangles.shape[1] != 3 or len(triangles) == 0:
            raise MeshError('triangles must be a non-empty (n, 3) array')
        if triangles.min() < 0 or triangles.max() >= len(nodes):
            raise MeshError('triangle refers to a missing node')

        area = signed_areas(nodes, triangles)
        if np.any(area <= 0):
            raise MeshError('triangle {} has nonpositive signed area'
                            .format(int(np.argmin(area))))

        n_tri = len(triangles)
        local = np.stack([triangles, np.roll(triangles, -1, axis=1)], axis=2)
        pairs = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
        elem_edges = np.asarray(inverse).reshape(n_tri, 3)
        elem_signs = np.where(local[..., 0] < local[..., 1], 1, -1)

        n_edges = len(edges)
        flat_e = elem_edges.ravel()
        flat_t = np.repeat(np.arange(n_tri), 3)
        slot = np.where(elem_signs.ravel() > 0, 0, 1)
        for s in (0, 1):
            if np.any(np.bincount(flat_e[slot == s], minlength=n_edges) > 1):
                raise MeshError('inconsistent triangle orientation or non-manifold edge')
        edge_elems = -np.ones((n_edges, 2), dtype=np.int64)
        edge_elems[flat_e, slot] = flat_t
        edge_signs = np.zeros((n_edges, 2), dtype=np.int64)
        edge_signs[:, 0] = 1
        edge_signs[:, 1] = -1
        # boundary edge whose only element sees n_e pointing inward
        lonely = edge_elems[:, 0] < 0
        edge_elems[lonely, 0] = edge_elems[lonely, 1]
        edge_elems[lonely, 1] = -1
        edge_signs[lonely, 0] = -1
        edge_signs[edge_elems[:, 1] < 0, 1] = 0

        edge_normal, edge_length = _edge_normals(nodes, edges)
        edge_midpoint = 0.5 * (nodes[edges[:, 0]] + nodes[edges[:, 1]])

        p0 = nodes[triangles[:, 0]]
        p1 = nodes[triangles[:, 1]]
        p2 = nodes[triangles[:, 2]]
        two_area = 2.0 * area
        grad_basis = np.empty((n_tri, 3, 2))
        grad_basis[:, 0, 0] = (p1[:, 1] - p2[:, 1]) / two_area
        grad_basis[:, 0, 1] = (p2[:, 0] - p1[:, 0]) / two_area
        grad_basis[:, 1, 0] = (p2[:, 1] - p0[:, 1]) / two_area
        grad_basis[:, 1, 1] = (p0[:, 0] - p2[:, 0]) / two_area
        grad_basis[:, 2, 0] = (p0[:, 1] - p1[:, 1]) / two_area
        grad_basis[:, 2, 1] = (p1[:, 0] - p0[:, 0]) / two_area

        boundary_edge = edge_elems[:, 1] < 0
        boundary_node = np.zeros(len(nodes), dtype=bool)
        boundary_node[edges[boundary_edge].ravel()] = True

        self.nodes = nodes
        self.triangles = triangles
        self.edges = edges
        self.edge_normal = edge_normal
        self.edge_length = edge_length
        self.edge_midpoint = edge_midpoint
        self.elem_edges = elem_edges
        self.elem_signs = elem_signs
        self.edge_elems = edge_elems
        self.edge_signs = edge_signs
        self.area = area
        self.diameter = edge_length[elem_edges].max(axis=1)
        self.centroid = (p0 + p1 + p2) / 3.0
        self.grad_basis = grad_basis
        self.boundary_edge = boundary_edge
        self.boundary_node = boundary_node
        self.h = float(self.diameter.max()) if h is None else float(h)
        self.n = None
        self.domain = None
        self.edge_tags = np.where(boundary_edge, UNCLASSIFIED, INTERIOR)
        self.node_tags = np.where(boundary_node, UNCLASSIFIED, INTERIOR)

        _freeze(self.nodes, self.triangles, self.edges, self.edge_normal,
                self.edge_length, self.edge_midpoint, self.elem_edges,
                self.elem_signs, self.edge_elems, self.edge_signs, self.area,
                self.diameter, self.centroid, self.grad_basis,
                self.boundary_edge, self.boundary_node, self.edge_tags,
                self.node_tags)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_elements(self):
        return len(self.triangles)

    def __repr__(self):
        return 'Mesh(nodes={}, edges={}, triangles={}, h={:.4g})'.format(
            self.n_nodes, self.n_edges, self.n_elements, self.h)


def build_uniform(domain, n):
    '''
    Uniform triangulation of an axis-aligned rectangle.

    Each of the n x n cells is split along its diagonal from the lower-left
    to the upper-right corner.

    Parameters
    ----------
    domain: ((x0, x1), (y0, y1))
        Rectangle bounds.
    n: int
        Number of cells per direction.

    Returns
    -------
    Mesh
    '''
    (x0, x1), (y0, y1) = domain
    if int(n) != n or n < 1:
        raise MeshError('subdivision count must be a positive integer, got {}'.format(n))
    if not (x1 > x0 and y1 > y0):
        raise MeshError('degenerate rectangle {}'.format(domain))
    n = int(n)

    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    a = (j * (n + 1) + i).ravel()
    b = a + 1
    c = a + n + 2
    d = a + n + 1
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = np.column_stack([a, b, c])
    triangles[1::2] = np.column_stack([a, c, d])

    h = max((x1 - x0) / n, (y1 - y0) / n)
    mesh = Mesh(nodes, triangles, h=h)
    mesh.n = n
    mesh.domain = ((float(x0), float(x1)), (float(y0), float(y1)))
    log.debug('uniform mesh n=%d: %r', n, mesh)
    return mesh


class _Lcg64(object):
    '''64-bit linear congruential generator with 53-bit uniform output'''

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed):
        self.state = int(seed) & self.MASK

    def uniform(self):
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return (self.state >> 11) * 2.0 ** -53


def build_perturbed(domain, n, magnitude, seed, max_retries=8):
    '''
    Uniform mesh with interior nodes displaced pseudo-randomly.

    Parameters
    ----------
    domain: ((x0, x1), (y0, y1))
    n: int
        Number of cells per direction.
    magnitude: float
        Largest displacement as a fraction of the cell size, in [0, 0.3].
    seed: int
        Generator seed; equal seeds give identical meshes.
    max_retries: int, default 8
        Number of times the displacement of nodes belonging to inverted
        triangles is halved before giving up.

    Returns
    -------
    Mesh
    '''
    if not 0 <= magnitude <= 0.3:
        raise MeshError('perturbation magnitude must lie in [0, 0.3], got {}'.format(magnitude))
    base = build_uniform(domain, n)
    if magnitude == 0:
        return base

    (x0, x1), (y0, y1) = base.domain
    radius = magnitude * min((x1 - x0) / base.n, (y1 - y0) / base.n)

    rng = _Lcg64(seed)
    displacement = np.zeros_like(base.nodes)
    for node in np.flatnonzero(~base.boundary_node):
        r = radius * np.sqrt(rng.uniform())
        theta = 2.0 * np.pi * rng.uniform()
        displacement[node] = (r * np.cos(theta), r * np.sin(theta))

    scale = np.ones(base.n_nodes)
    for attempt in range(max_retries + 1):
        trial = base.nodes + scale[:, None] * displacement
        bad = signed_areas(trial, base.triangles) <= 0
        if not bad.any():
            mesh = Mesh(trial, base.triangles, h=base.h)
            mesh.n = base.n
            mesh.domain = base.domain
            return mesh
        log.debug('perturbed mesh: %d inverted triangles, retry %d', bad.sum(), attempt + 1)
        scale[np.unique(base.triangles[bad])] *= 0.5

    raise MeshError('could not restore positive triangle areas after {} retries'
                    .format(max_retries))


def mark_boundary(mesh, dirichlet, neumann=None):
    '''
    Classify boundary edges and nodes.

    Parameters
    ----------
    mesh: Mesh
    dirichlet: callable (x, y) -> bool array
        Selects Dirichlet edges, evaluated at edge midpoints.
    neumann: callable (x, y) -> bool array, optional
        Selects zero-flux edges.

    Returns
    -------
    Mesh
        Shallow copy with edge_tags and node_tags set. Boundary edges matched
        by neither predicate are UNCLASSIFIED, by both CONFLICT. A boundary
        node is DIRICHLET when any adjacent edge is Dirichlet.
    '''
    mx = mesh.edge_midpoint[:, 0]
    my = mesh.edge_midpoint[:, 1]
    bnd = mesh.boundary_edge
    is_d = bnd & np.asarray(dirichlet(mx, my), dtype=bool)
    if neumann is None:
        is_n = np.zeros_like(is_d)
    else:
        is_n = bnd & np.asarray(neumann(mx, my), dtype=bool)

    edge_tags = np.where(bnd, UNCLASSIFIED, INTERIOR)
    edge_tags[is_d] = DIRICHLET
    edge_tags[is_n] = NEUMANN
    edge_tags[is_d & is_n] = CONFLICT

    node_tags = np.where(mesh.boundary_node, NEUMANN, INTERIOR)
    node_tags[mesh.edges[edge_tags == UNCLASSIFIED].ravel()] = UNCLASSIFIED
    node_tags[mesh.edges[edge_tags == DIRICHLET].ravel()] = DIRICHLET

    tagged = copy.copy(mesh)
    tagged.edge_tags = edge_tags
    tagged.node_tags = node_tags
    _freeze(edge_tags, node_tags)
    return tagged
