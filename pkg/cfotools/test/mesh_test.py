""" Mesh Module Tests. """

import unittest

import numpy as np

from cfotools.mesh import (Mesh, MeshError, build_uniform, build_perturbed, edge_orientation,
                           mark_boundary, signed_areas, DIRICHLET, NEUMANN, INTERIOR,
                           UNCLASSIFIED, CONFLICT)


UNIT = ((0.0, 1.0), (0.0, 1.0))


class EdgeOrientationTestCase(unittest.TestCase):
    ''' Unit tests for the edge normal convention.'''

    def setUp(self):
        self.coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])

    def test_horizontal(self):
        np.testing.assert_allclose(edge_orientation(0, 1, self.coords), [0.0, -1.0])

    def test_vertical(self):
        np.testing.assert_allclose(edge_orientation(0, 2, self.coords), [1.0, 0.0])

    def test_diagonal(self):
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(edge_orientation(0, 3, self.coords), [s, -s])

    def test_single_normal_shape(self):
        self.assertEqual(edge_orientation(1, 2, self.coords).shape, (2,))

    def test_rejects_bad_input(self):
        with self.assertRaises(MeshError):
            edge_orientation(1, 0, self.coords)
        with self.assertRaises(MeshError):
            edge_orientation(0, 1, np.zeros((2, 2)))


class UniformMeshTestCase(unittest.TestCase):
    ''' Unit tests for build_uniform.'''

    def test_single_cell(self):
        mesh = build_uniform(UNIT, 1)
        self.assertEqual((mesh.n_elements, mesh.n_nodes, mesh.n_edges), (2, 4, 5))

    def test_counts(self):
        for n in range(1, 65):
            mesh = build_uniform(UNIT, n)
            self.assertEqual(mesh.n_elements, 2 * n * n)
            self.assertEqual(mesh.n_nodes, (n + 1) ** 2)
            self.assertEqual(mesh.n_edges, 3 * n * n + 2 * n)
            self.assertEqual(mesh.n_nodes - mesh.n_edges + mesh.n_elements, 1)

    def test_n8(self):
        mesh = build_uniform(UNIT, 8)
        self.assertEqual((mesh.n_elements, mesh.n_nodes, mesh.n_edges), (128, 81, 208))
        self.assertAlmostEqual(mesh.h, 0.125)

    def test_centered_square(self):
        mesh = build_uniform(((-1.0, 1.0), (-1.0, 1.0)), 2)
        self.assertTrue(np.any(np.all(mesh.nodes == 0.0, axis=1)))
        np.testing.assert_allclose(mesh.area, 0.5)

    def test_rejects_bad_input(self):
        with self.assertRaises(MeshError):
            build_uniform(UNIT, 0)
        with self.assertRaises(MeshError):
            build_uniform(((0.0, 0.0), (0.0, 1.0)), 4)

    def test_closed_normals(self):
        mesh = build_uniform(UNIT, 6)
        weighted = (mesh.edge_length[mesh.elem_edges] * mesh.elem_signs)[..., None] \
            * mesh.edge_normal[mesh.elem_edges]
        np.testing.assert_allclose(weighted.sum(axis=1), 0.0, atol=1e-14)

    def test_edge_neighbours(self):
        mesh = build_uniform(UNIT, 5)
        interior = mesh.edge_elems[:, 1] >= 0
        self.assertEqual(int((~interior).sum()), 4 * 5)
        # first element sees n_e as its outward normal
        for e in range(mesh.n_edges):
            for slot in (0, 1):
                t = mesh.edge_elems[e, slot]
                if t < 0:
                    continue
                k = list(mesh.elem_edges[t]).index(e)
                self.assertEqual(mesh.elem_signs[t, k], mesh.edge_signs[e, slot])
            if interior[e]:
                self.assertEqual(mesh.edge_signs[e, 0], 1)
                self.assertEqual(mesh.edge_signs[e, 1], -1)

    def test_normals_point_out_of_first_element(self):
        mesh = build_uniform(UNIT, 3)
        first = mesh.edge_elems[:, 0]
        outward = mesh.edge_midpoint - mesh.centroid[first]
        dots = np.sum(outward * mesh.edge_normal, axis=1) * mesh.edge_signs[:, 0]
        self.assertTrue(np.all(dots > 0))

    def test_immutable(self):
        mesh = build_uniform(UNIT, 2)
        with self.assertRaises(ValueError):
            mesh.nodes[0, 0] = 3.0


class GeneralMeshTestCase(unittest.TestCase):
    ''' Unit tests for Mesh from explicit triangles.'''

    def test_two_triangles(self):
        nodes = [[0, 0], [1, 0], [1, 1], [0, 1]]
        mesh = Mesh(nodes, [[0, 1, 2], [0, 2, 3]])
        self.assertEqual(mesh.n_edges, 5)
        diagonal = int(np.flatnonzero((mesh.edges == [0, 2]).all(axis=1))[0])
        # n_e of the diagonal points from the upper-left into the lower-right triangle
        self.assertEqual(list(mesh.edge_elems[diagonal]), [1, 0])
        self.assertAlmostEqual(mesh.diameter[0], np.sqrt(2))

    def test_rejects_clockwise(self):
        with self.assertRaises(MeshError):
            Mesh([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])

    def test_rejects_missing_node(self):
        with self.assertRaises(MeshError):
            Mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 3]])


class PerturbedMeshTestCase(unittest.TestCase):
    ''' Unit tests for build_perturbed.'''

    def test_zero_magnitude(self):
        uniform = build_uniform(UNIT, 8)
        perturbed = build_perturbed(UNIT, 8, 0.0, 42)
        np.testing.assert_array_equal(uniform.nodes, perturbed.nodes)
        np.testing.assert_array_equal(uniform.triangles, perturbed.triangles)

    def test_deterministic(self):
        a = build_perturbed(UNIT, 8, 0.2, 42)
        b = build_perturbed(UNIT, 8, 0.2, 42)
        self.assertEqual(a.nodes.tobytes(), b.nodes.tobytes())
        c = build_perturbed(UNIT, 8, 0.2, 43)
        self.assertFalse(np.array_equal(a.nodes, c.nodes))

    def test_positive_areas(self):
        mesh = build_perturbed(UNIT, 8, 0.2, 42)
        self.assertGreater(signed_areas(mesh.nodes, mesh.triangles).min(), 0)

    def test_displacement_bounds(self):
        uniform = build_uniform(UNIT, 8)
        mesh = build_perturbed(UNIT, 8, 0.3, 7)
        shift = np.hypot(*(mesh.nodes - uniform.nodes).T)
        self.assertLessEqual(shift.max(), 0.3 / 8 + 1e-15)
        np.testing.assert_array_equal(shift[uniform.boundary_node], 0.0)
        self.assertGreater(shift[~uniform.boundary_node].max(), 0.0)

    def test_rejects_magnitude(self):
        with self.assertRaises(MeshError):
            build_perturbed(UNIT, 4, 0.5, 1)


class MarkBoundaryTestCase(unittest.TestCase):
    ''' Unit tests for boundary classification.'''

    def setUp(self):
        self.mesh = build_uniform(UNIT, 4)

    def test_mixed_sides(self):
        tagged = mark_boundary(self.mesh,
                               dirichlet=lambda x, y: (x == 0) | (x == 1),
                               neumann=lambda x, y: (y == 0) | (y == 1))
        mid = tagged.edge_midpoint
        bnd = tagged.boundary_edge
        self.assertTrue(np.all(tagged.edge_tags[bnd & (mid[:, 0] == 0)] == DIRICHLET))
        self.assertTrue(np.all(tagged.edge_tags[bnd & (mid[:, 1] == 1)] == NEUMANN))
        self.assertTrue(np.all(tagged.edge_tags[~bnd] == INTERIOR))
        # corners touch a Dirichlet side
        corner = int(np.flatnonzero((tagged.nodes == [0, 0]).all(axis=1))[0])
        self.assertEqual(tagged.node_tags[corner], DIRICHLET)
        bottom_middle = int(np.flatnonzero((tagged.nodes == [0.5, 0]).all(axis=1))[0])
        self.assertEqual(tagged.node_tags[bottom_middle], NEUMANN)
        # the original is left untagged
        self.assertTrue(np.all(self.mesh.edge_tags[bnd] == UNCLASSIFIED))

    def test_unclassified_and_conflict(self):
        tagged = mark_boundary(self.mesh, dirichlet=lambda x, y: x == 0,
                               neumann=lambda x, y: (x == 0) | (y == 0))
        bnd = tagged.boundary_edge
        mid = tagged.edge_midpoint
        self.assertTrue(np.all(tagged.edge_tags[bnd & (mid[:, 0] == 0)] == CONFLICT))
        self.assertTrue(np.all(tagged.edge_tags[bnd & (mid[:, 0] == 1)] == UNCLASSIFIED))


if __name__ == '__main__':
    unittest.main()
