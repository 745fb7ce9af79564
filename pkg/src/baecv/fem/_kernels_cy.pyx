# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled assembly kernels; same contracts as ``_kernels_np``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "cython"


def tri_weighted_mass(double[:, ::1] vertices, long[:, ::1] triangles,
                      double[::1] weight):
    cdef Py_ssize_t nt = triangles.shape[0]
    rows_arr = np.empty(9 * nt, dtype=np.int64)
    cols_arr = np.empty(9 * nt, dtype=np.int64)
    vals_arr = np.empty(9 * nt)
    cdef long[::1] rows = rows_arr
    cdef long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t t, i, j, m
    cdef long a, b, c
    cdef double x1, y1, x2, y2, x3, y3, area, s, scale
    cdef double w[3]
    cdef long v[3]
    m = 0
    for t in range(nt):
        a = triangles[t, 0]; b = triangles[t, 1]; c = triangles[t, 2]
        v[0] = a; v[1] = b; v[2] = c
        x1 = vertices[a, 0]; y1 = vertices[a, 1]
        x2 = vertices[b, 0]; y2 = vertices[b, 1]
        x3 = vertices[c, 0]; y3 = vertices[c, 1]
        area = 0.5 * ((x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1))
        w[0] = weight[a]; w[1] = weight[b]; w[2] = weight[c]
        s = w[0] + w[1] + w[2]
        scale = area / 60.0
        for i in range(3):
            for j in range(3):
                rows[m] = v[i]
                cols[m] = v[j]
                if i == j:
                    vals[m] = scale * (4.0 * w[i] + 2.0 * s)
                else:
                    vals[m] = scale * (w[i] + w[j] + s)
                m += 1
    return rows_arr, cols_arr, vals_arr


def tri_stiffness(double[:, ::1] vertices, long[:, ::1] triangles,
                  double gamma, double[::1] kappa_weight,
                  double[:, ::1] theta):
    cdef Py_ssize_t nt = triangles.shape[0]
    rows_arr = np.empty(9 * nt, dtype=np.int64)
    cols_arr = np.empty(9 * nt, dtype=np.int64)
    vals_arr = np.empty(9 * nt)
    cdef long[::1] rows = rows_arr
    cdef long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t t, i, j, m
    cdef long v[3]
    cdef double px[3]
    cdef double py[3]
    cdef double gx[3]
    cdef double gy[3]
    cdef double det, area, kbar, val
    cdef double t00 = theta[0, 0], t01 = theta[0, 1]
    cdef double t10 = theta[1, 0], t11 = theta[1, 1]
    m = 0
    for t in range(nt):
        for i in range(3):
            v[i] = triangles[t, i]
            px[i] = vertices[v[i], 0]
            py[i] = vertices[v[i], 1]
        det = (px[1] - px[0]) * (py[2] - py[0]) - (py[1] - py[0]) * (px[2] - px[0])
        area = 0.5 * det
        for i in range(3):
            gx[i] = (py[(i + 1) % 3] - py[(i + 2) % 3]) / det
            gy[i] = (px[(i + 2) % 3] - px[(i + 1) % 3]) / det
        kbar = (kappa_weight[v[0]] + kappa_weight[v[1]] + kappa_weight[v[2]]) / 3.0
        for i in range(3):
            for j in range(3):
                val = kbar * area * (gx[i] * (t00 * gx[j] + t01 * gy[j])
                                     + gy[i] * (t10 * gx[j] + t11 * gy[j]))
                if gamma != 0.0:
                    if i == j:
                        val += gamma * area / 6.0
                    else:
                        val += gamma * area / 12.0
                rows[m] = v[i]
                cols[m] = v[j]
                vals[m] = val
                m += 1
    return rows_arr, cols_arr, vals_arr


def tri_stiffness_bilinear_gradient(double[:, ::1] vertices,
                                    long[:, ::1] triangles,
                                    double[:, ::1] theta,
                                    double[::1] u, double[::1] w):
    cdef Py_ssize_t nt = triangles.shape[0]
    g_arr = np.zeros(vertices.shape[0])
    cdef double[::1] g = g_arr
    cdef Py_ssize_t t, i
    cdef long v[3]
    cdef double px[3]
    cdef double py[3]
    cdef double gx[3]
    cdef double gy[3]
    cdef double det, area, gux, guy, gwx, gwy, c
    cdef double t00 = theta[0, 0], t01 = theta[0, 1]
    cdef double t10 = theta[1, 0], t11 = theta[1, 1]
    for t in range(nt):
        for i in range(3):
            v[i] = triangles[t, i]
            px[i] = vertices[v[i], 0]
            py[i] = vertices[v[i], 1]
        det = (px[1] - px[0]) * (py[2] - py[0]) - (py[1] - py[0]) * (px[2] - px[0])
        area = 0.5 * det
        gux = 0.0; guy = 0.0; gwx = 0.0; gwy = 0.0
        for i in range(3):
            gx[i] = (py[(i + 1) % 3] - py[(i + 2) % 3]) / det
            gy[i] = (px[(i + 2) % 3] - px[(i + 1) % 3]) / det
            gux += gx[i] * u[v[i]]
            guy += gy[i] * u[v[i]]
            gwx += gx[i] * w[v[i]]
            gwy += gy[i] * w[v[i]]
        c = area * (gux * (t00 * gwx + t01 * gwy) + guy * (t10 * gwx + t11 * gwy)) / 3.0
        for i in range(3):
            g[v[i]] += c
    return g_arr


def seg_weighted_mass(double[:, ::1] vertices, long[:, ::1] segments,
                      double[::1] weight):
    cdef Py_ssize_t ns = segments.shape[0]
    rows_arr = np.empty(4 * ns, dtype=np.int64)
    cols_arr = np.empty(4 * ns, dtype=np.int64)
    vals_arr = np.empty(4 * ns)
    cdef long[::1] rows = rows_arr
    cdef long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t e, m
    cdef long a, b
    cdef double dx, dy, h, wa, wb, scale
    m = 0
    for e in range(ns):
        a = segments[e, 0]; b = segments[e, 1]
        dx = vertices[b, 0] - vertices[a, 0]
        dy = vertices[b, 1] - vertices[a, 1]
        h = (dx * dx + dy * dy) ** 0.5
        wa = weight[a]; wb = weight[b]
        scale = h / 12.0
        rows[m] = a; cols[m] = a; vals[m] = scale * (3.0 * wa + wb); m += 1
        rows[m] = b; cols[m] = b; vals[m] = scale * (wa + 3.0 * wb); m += 1
        rows[m] = a; cols[m] = b; vals[m] = scale * (wa + wb); m += 1
        rows[m] = b; cols[m] = a; vals[m] = scale * (wa + wb); m += 1
    return rows_arr, cols_arr, vals_arr


def seg_stiffness(double[:, ::1] vertices, long[:, ::1] segments,
                  double gamma, double kappa, double theta):
    cdef Py_ssize_t ns = segments.shape[0]
    rows_arr = np.empty(4 * ns, dtype=np.int64)
    cols_arr = np.empty(4 * ns, dtype=np.int64)
    vals_arr = np.empty(4 * ns)
    cdef long[::1] rows = rows_arr
    cdef long[::1] cols = cols_arr
    cdef double[::1] vals = vals_arr
    cdef Py_ssize_t e, m
    cdef long a, b
    cdef double dx, dy, h, kt, diag, off
    kt = kappa * theta
    m = 0
    for e in range(ns):
        a = segments[e, 0]; b = segments[e, 1]
        dx = vertices[b, 0] - vertices[a, 0]
        dy = vertices[b, 1] - vertices[a, 1]
        h = (dx * dx + dy * dy) ** 0.5
        diag = gamma * h / 3.0 + kt / h
        off = gamma * h / 6.0 - kt / h
        rows[m] = a; cols[m] = a; vals[m] = diag; m += 1
        rows[m] = b; cols[m] = b; vals[m] = diag; m += 1
        rows[m] = a; cols[m] = b; vals[m] = off; m += 1
        rows[m] = b; cols[m] = a; vals[m] = off; m += 1
    return rows_arr, cols_arr, vals_arr


def locate_points(vertices, triangles, points, cell_lookup, tol):
    # Point location branches per query; the python driver is kept shared.
    from . import _kernels_np
    return _kernels_np.locate_points(vertices, triangles, points, cell_lookup, tol)
