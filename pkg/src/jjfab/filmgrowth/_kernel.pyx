# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled growth kernel; arithmetic mirrors ``_kernel_py`` exactly."""

KERNEL = "cython"


cdef inline Py_ssize_t _wrap(Py_ssize_t a, Py_ssize_t n) nogil:
    a = a % n
    if a < 0:
        a += n
    return a


def grow_lattice(int[:, ::1] heights, unsigned char[:, ::1] impurity,
                 long wall_height, int[::1] xs, int[::1] ys, double[::1] phase,
                 unsigned char[:, ::1] ties, unsigned char[:, :, ::1] layers,
                 long launches_per_layer, double cot, bint normal_incidence):
    cdef Py_ssize_t ny = heights.shape[0]
    cdef Py_ssize_t nx = heights.shape[1]
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t nsteps = ties.shape[1]
    cdef Py_ssize_t nlayers = layers.shape[0]
    cdef bint has_wall = wall_height >= 0
    cdef Py_ssize_t nn = 4 if ny > 1 else 2
    cdef int dx[4]
    cdef int dy[4]
    dx[0] = -1; dx[1] = 1; dx[2] = 0; dx[3] = 0
    dy[0] = 0; dy[1] = 0; dy[2] = -1; dy[3] = 1

    cdef Py_ssize_t i, j, k, s, d, y, col, cx, cy, tx, ty, bx, by, yy, xx
    cdef Py_ssize_t start, layer = 0
    cdef long deposited = 0
    cdef long hmax = heights[0, 0]
    cdef long zref, best
    cdef double u

    for yy in range(ny):
        for xx in range(nx):
            if heights[yy, xx] > hmax:
                hmax = heights[yy, xx]

    with nogil:
        for i in range(n):
            y = ys[i]
            col = xs[i]
            if not normal_incidence:
                zref = hmax + 1
                u = phase[i]
                k = 0
                while True:
                    col = (xs[i] + k) % nx
                    if heights[y, col] >= zref - (k + 1 - u) * cot:
                        break
                    k += 1
                if k > 0 and heights[y, col] > zref - (k - u) * cot:
                    col = (xs[i] + k - 1) % nx
            if not (has_wall and col == 0):
                heights[y, col] += 1
                deposited += 1
                if heights[y, col] > hmax:
                    hmax = heights[y, col]
                cx = col
                cy = y
                for s in range(nsteps):
                    if impurity[cy, cx]:
                        break
                    best = heights[cy, cx] - 1
                    bx = -1
                    by = -1
                    start = ties[i, s] % nn
                    for j in range(nn):
                        d = (start + j) % nn
                        tx = _wrap(cx + dx[d], nx)
                        ty = _wrap(cy + dy[d], ny)
                        if has_wall and tx == 0:
                            continue
                        if impurity[ty, tx]:
                            continue
                        if heights[ty, tx] < best:
                            best = heights[ty, tx]
                            bx = tx
                            by = ty
                    if bx < 0:
                        break
                    heights[cy, cx] -= 1
                    heights[by, bx] += 1
                    cx = bx
                    cy = by
            if nlayers and layer < nlayers and (i + 1) % launches_per_layer == 0:
                for yy in range(ny):
                    for xx in range(nx):
                        if layers[layer, yy, xx]:
                            impurity[yy, xx] = 1
                layer += 1
    return deposited
