''' Export Module

This module contains writers for meshes, solutions, convergence tables and
two-phase snapshots: legacy ASCII VTK, CSV through pandas and HDF5 through
h5py. Numbers are written with 17 significant digits so that identical runs
produce identical files.
'''

import logging
import os

import h5py
import numpy as np
import pandas as pd

from cfotools.twophase import SaturationState


log = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
VTK_TRIANGLE = 5


def _numbers(values):
    return ' '.join(FLOAT_FORMAT % v for v in np.ravel(values))


def write_vtk(path, mesh, point_data=None, cell_data=None, title='cfotools'):
    '''
    Write a mesh with optional fields as a legacy ASCII unstructured grid.

    Parameters
    ----------
    path: str
    mesh: Mesh
    point_data: dict of str -> array (n_nodes,), optional
    cell_data: dict of str -> array (n_elements,), optional
    title: str
    '''
    lines = ['# vtk DataFile Version 3.0', title, 'ASCII', 'DATASET UNSTRUCTURED_GRID',
             'POINTS {} double'.format(mesh.n_nodes)]
    lines.extend('{} 0'.format(_numbers(p)) for p in mesh.nodes)
    lines.append('CELLS {} {}'.format(mesh.n_elements, 4 * mesh.n_elements))
    lines.extend('3 {} {} {}'.format(*t) for t in mesh.triangles)
    lines.append('CELL_TYPES {}'.format(mesh.n_elements))
    lines.extend([str(VTK_TRIANGLE)] * mesh.n_elements)

    for header, count, data in (('POINT_DATA', mesh.n_nodes, point_data),
                                ('CELL_DATA', mesh.n_elements, cell_data)):
        if not data:
            continue
        lines.append('{} {}'.format(header, count))
        for name in sorted(data):
            values = np.asarray(data[name], dtype=float)
            if values.shape != (count,):
                raise ValueError('{} field {!r} has shape {}, expected ({},)'
                                 .format(header, name, values.shape, count))
            lines.append('SCALARS {} double 1'.format(name))
            lines.append('LOOKUP_TABLE default')
            lines.extend(FLOAT_FORMAT % v for v in values)

    with open(path, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    log.debug('wrote %s', path)
    return path


def edge_flux_frame(mesh, q):
    '''DataFrame with columns edge_id, n_x, n_y, flux'''
    q = np.asarray(q, dtype=float)
    if q.shape != (mesh.n_edges,):
        raise ValueError('expected {} edge values, got shape {}'.format(mesh.n_edges, q.shape))
    return pd.DataFrame({'edge_id': np.arange(mesh.n_edges),
                         'n_x': mesh.edge_normal[:, 0],
                         'n_y': mesh.edge_normal[:, 1],
                         'flux': q})


def write_edge_flux_csv(path, mesh, q):
    edge_flux_frame(mesh, q).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    log.debug('wrote %s', path)
    return path


def write_convergence_csv(path, table):
    '''Convergence table as CSV, order cells of the first row left empty'''
    table.to_csv(path, index=False, float_format=FLOAT_FORMAT, na_rep='')
    log.debug('wrote %s', path)
    return path


def _significant(value, digits):
    if value is None or not np.isfinite(value):
        return ''
    return '{:.{}g}'.format(value, digits)


def format_table(table, error_digits=3, order_digits=2):
    '''
    Printable convergence table.

    h is shown as 1/round(1/h), errors with error_digits and orders with
    order_digits significant digits.
    '''
    shown = pd.DataFrame(index=table.index)
    shown['h'] = ['1/{}'.format(int(round(1.0 / h))) for h in table['h']]
    for column in table.columns[1:]:
        digits = order_digits if column.endswith('_order') else error_digits
        shown[column] = [_significant(v, digits) for v in table[column]]
    return shown.to_string(index=False)


def write_snapshot_series(directory, mesh, snapshots, prefix='saturation'):
    '''
    One VTK file (cell data saturation) and one edge-flux CSV per snapshot.

    Returns
    -------
    list of str
        Paths written, in snapshot order.
    '''
    paths = []
    for k, state in enumerate(snapshots):
        stem = os.path.join(directory, '{}_{:04d}'.format(prefix, k))
        paths.append(write_vtk(stem + '.vtk', mesh, cell_data={'saturation': state.S},
                               title='saturation t={}'.format(FLOAT_FORMAT % state.t)))
        paths.append(write_edge_flux_csv(stem + '_flux.csv', mesh, state.v))
    return paths


def write_snapshots_hdf5(path, snapshots):
    '''Store snapshots as /snapshots/<k>/{saturation, flux} with attribute t'''
    with h5py.File(path, 'w') as f:
        group = f.create_group('snapshots')
        for k, state in enumerate(snapshots):
            entry = group.create_group('{:04d}'.format(k))
            entry.create_dataset('saturation', data=np.asarray(state.S, dtype=float))
            entry.create_dataset('flux', data=np.asarray(state.v, dtype=float))
            entry.attrs['t'] = float(state.t)
    log.debug('wrote %d snapshots to %s', len(snapshots), path)
    return path


def read_snapshots_hdf5(path):
    '''Inverse of write_snapshots_hdf5'''
    with h5py.File(path, 'r') as f:
        group = f['snapshots']
        return [SaturationState(group[key]['saturation'][()], float(group[key].attrs['t']),
                                group[key]['flux'][()])
                for key in sorted(group.keys())]
