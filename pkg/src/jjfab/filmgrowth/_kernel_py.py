"""Pure-Python growth kernel.

Reference implementation of the lattice deposition loop. The compiled
``_kernel`` module performs the same arithmetic in the same order, so both
produce bit-identical height fields for identical inputs.
"""

KERNEL = "python"


def grow_lattice(heights, impurity, wall_height, xs, ys, phase, ties, layers,
                 launches_per_layer, cot, normal_incidence):
    """Deposit ``len(xs)`` particles onto ``heights`` in place.

    Returns the number of particles that stuck to the film; particles that
    strike the wall column (x = 0, present when ``wall_height >= 0``) are
    discarded.
    """
    ny, nx = heights.shape
    n = xs.shape[0]
    nsteps = ties.shape[1]
    nlayers = layers.shape[0]
    has_wall = wall_height >= 0
    nn = 4 if ny > 1 else 2

    h = heights.tolist()
    imp = impurity.tolist()
    xs_l = xs.tolist()
    ys_l = ys.tolist()
    ph_l = phase.tolist()
    ties_l = ties.tolist()
    layers_l = layers.tolist() if nlayers else []

    hmax = max(max(row) for row in h)
    deposited = 0
    layer = 0
    dx = (-1, 1, 0, 0)
    dy = (0, 0, -1, 1)

    for i in range(n):
        y = ys_l[i]
        row = h[y]
        col = xs_l[i]
        if not normal_incidence:
            # walk the ray downstream until it dips to a column top
            zref = hmax + 1
            u = ph_l[i]
            k = 0
            while True:
                col = (xs_l[i] + k) % nx
                if row[col] >= zref - (k + 1 - u) * cot:
                    break
                k += 1
            # a ray meeting the column's side face sticks to that face,
            # i.e. on top of the upstream neighbour
            if k > 0 and row[col] > zref - (k - u) * cot:
                col = (xs_l[i] + k - 1) % nx
        if not (has_wall and col == 0):
            row[col] += 1
            deposited += 1
            if row[col] > hmax:
                hmax = row[col]
            cx = col
            cy = y
            for s in range(nsteps):
                if imp[cy][cx]:
                    break
                best = h[cy][cx] - 1
                bx = -1
                by = -1
                start = ties_l[i][s] % nn
                for j in range(nn):
                    d = (start + j) % nn
                    tx = (cx + dx[d]) % nx
                    ty = (cy + dy[d]) % ny
                    if has_wall and tx == 0:
                        continue
                    if imp[ty][tx]:
                        continue
                    if h[ty][tx] < best:
                        best = h[ty][tx]
                        bx = tx
                        by = ty
                if bx < 0:
                    break
                h[cy][cx] -= 1
                h[by][bx] += 1
                cx = bx
                cy = by
        if nlayers and layer < nlayers and (i + 1) % launches_per_layer == 0:
            lay = layers_l[layer]
            for yy in range(ny):
                irow = imp[yy]
                lrow = lay[yy]
                for xx in range(nx):
                    if lrow[xx]:
                        irow[xx] = 1
            layer += 1

    heights[:, :] = h
    impurity[:, :] = imp
    return deposited
