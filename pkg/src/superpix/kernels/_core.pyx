# Compiled kernel set. Mirror of pure.py: same signatures, same float64
# operation order, so compiled and pure outputs are bit-identical. Keep the
# two files in sync when touching either.

from libc.math cimport cbrt, sqrt
from libc.stdlib cimport calloc, free, malloc

cimport numpy as cnp

import numpy as np

from . import tables as _tables

cnp.import_array()

NAME = "compiled"

cdef double _LUT[256]
cdef double _M[9]
cdef double _W[3]
cdef double _EPS = 216.0 / 24389.0
cdef double _KAPPA = 24389.0 / 27.0

# Home cell first, then the eight neighbors in increasing cluster-id order.
cdef Py_ssize_t[9] _OFF_R = [0, -1, -1, -1, 0, 0, 1, 1, 1]
cdef Py_ssize_t[9] _OFF_C = [0, -1, 0, 1, -1, 1, -1, 0, 1]


def _load_tables():
    cdef Py_ssize_t i
    lut = _tables.LINEAR_LUT
    mat = _tables.RGB_TO_XYZ.ravel()
    white = _tables.WHITE
    for i in range(256):
        _LUT[i] = lut[i]
    for i in range(9):
        _M[i] = mat[i]
    for i in range(3):
        _W[i] = white[i]


_load_tables()


def convert_band(const unsigned char[:, :, ::1] rgb, float[:, :, ::1] out,
                 int space, Py_ssize_t y0, Py_ssize_t y1):
    """Convert rows [y0, y1) of an 8-bit RGB raster into `out` (float32)."""
    cdef Py_ssize_t w = rgb.shape[1]
    cdef Py_ssize_t x, y
    cdef double r, g, b, cx, cy, cz, tx, ty, tz, fx, fy, fz, light
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                if space == 0:
                    out[y, x, 0] = <float>(rgb[y, x, 0] / 255.0)
                    out[y, x, 1] = <float>(rgb[y, x, 1] / 255.0)
                    out[y, x, 2] = <float>(rgb[y, x, 2] / 255.0)
                    continue
                r = _LUT[rgb[y, x, 0]]
                g = _LUT[rgb[y, x, 1]]
                b = _LUT[rgb[y, x, 2]]
                cx = _M[0] * r + _M[1] * g + _M[2] * b
                cy = _M[3] * r + _M[4] * g + _M[5] * b
                cz = _M[6] * r + _M[7] * g + _M[8] * b
                if space == 1:
                    out[y, x, 0] = <float>cx
                    out[y, x, 1] = <float>cy
                    out[y, x, 2] = <float>cz
                    continue
                tx = cx / _W[0]
                ty = cy / _W[1]
                tz = cz / _W[2]
                fx = cbrt(tx) if tx > _EPS else (_KAPPA * tx + 16.0) / 116.0
                fy = cbrt(ty) if ty > _EPS else (_KAPPA * ty + 16.0) / 116.0
                fz = cbrt(tz) if tz > _EPS else (_KAPPA * tz + 16.0) / 116.0
                light = 116.0 * fy - 16.0
                if light < 0.0:
                    light = 0.0
                if light > 100.0:
                    light = 100.0
                out[y, x, 0] = <float>light
                out[y, x, 1] = <float>(500.0 * (fx - fy))
                out[y, x, 2] = <float>(200.0 * (fy - fz))


def init_centers_range(const float[:, :, ::1] img, Py_ssize_t s, Py_ssize_t ns_c,
                       double[:, ::1] cxy, double[:, ::1] clab,
                       Py_ssize_t k0, Py_ssize_t k1):
    """Seed cluster centers [k0, k1) at cell centers, clamped to the image."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t k, r, c, ix, iy
    with nogil:
        for k in range(k0, k1):
            r = k // ns_c
            c = k % ns_c
            ix = c * s + s // 2
            if ix > w - 1:
                ix = w - 1
            iy = r * s + s // 2
            if iy > h - 1:
                iy = h - 1
            cxy[k, 0] = <double>ix
            cxy[k, 1] = <double>iy
            clab[k, 0] = img[iy, ix, 0]
            clab[k, 1] = img[iy, ix, 1]
            clab[k, 2] = img[iy, ix, 2]


cdef inline double _gradient(const float[:, :, ::1] img, Py_ssize_t x, Py_ssize_t y) noexcept nogil:
    cdef double dl, da, db, gx, gy
    dl = <double>img[y, x + 1, 0] - <double>img[y, x - 1, 0]
    da = <double>img[y, x + 1, 1] - <double>img[y, x - 1, 1]
    db = <double>img[y, x + 1, 2] - <double>img[y, x - 1, 2]
    gx = dl * dl + da * da + db * db
    dl = <double>img[y + 1, x, 0] - <double>img[y - 1, x, 0]
    da = <double>img[y + 1, x, 1] - <double>img[y - 1, x, 1]
    db = <double>img[y + 1, x, 2] - <double>img[y - 1, x, 2]
    gy = dl * dl + da * da + db * db
    return gx + gy


def perturb_range(const float[:, :, ::1] img, double[:, ::1] cxy, double[:, ::1] clab,
                  Py_ssize_t k0, Py_ssize_t k1):
    """Move centers [k0, k1) to the lowest-gradient pixel of their 3x3 patch."""
    cdef Py_ssize_t h = img.shape[0]
    cdef Py_ssize_t w = img.shape[1]
    cdef Py_ssize_t k, ix, iy, bx, by, nx, ny, dx, dy
    cdef double best, g
    with nogil:
        for k in range(k0, k1):
            ix = <Py_ssize_t>cxy[k, 0]
            iy = <Py_ssize_t>cxy[k, 1]
            if ix < 1 or ix > w - 2 or iy < 1 or iy > h - 2:
                continue
            best = _gradient(img, ix, iy)
            bx = ix
            by = iy
            for dy in range(-1, 2):
                for dx in range(-1, 2):
                    if dx == 0 and dy == 0:
                        continue
                    nx = ix + dx
                    ny = iy + dy
                    if nx < 1 or nx > w - 2 or ny < 1 or ny > h - 2:
                        continue
                    g = _gradient(img, nx, ny)
                    if g < best:
                        best = g
                        bx = nx
                        by = ny
            cxy[k, 0] = <double>bx
            cxy[k, 1] = <double>by
            clab[k, 0] = img[by, bx, 0]
            clab[k, 1] = img[by, bx, 1]
            clab[k, 2] = img[by, bx, 2]


cdef inline double _pix_dist(const float[:, :, ::1] img, const double[:, ::1] cxy,
                             const double[:, ::1] clab, Py_ssize_t k,
                             Py_ssize_t x, Py_ssize_t y, double xy_weight) noexcept nogil:
    cdef double dl, da, db, dx, dy, dlab
    dl = clab[k, 0] - <double>img[y, x, 0]
    da = clab[k, 1] - <double>img[y, x, 1]
    db = clab[k, 2] - <double>img[y, x, 2]
    dlab = sqrt(dl * dl + da * da + db * db)
    dx = cxy[k, 0] - <double>x
    dy = cxy[k, 1] - <double>y
    return dlab + xy_weight * sqrt(dx * dx + dy * dy)


def associate_band(const float[:, :, ::1] img, const double[:, ::1] cxy,
                   const double[:, ::1] clab, cnp.int32_t[:, ::1] labels,
                   Py_ssize_t s, Py_ssize_t ns_r, Py_ssize_t ns_c,
                   double xy_weight, Py_ssize_t y0, Py_ssize_t y1):
    """Assign each pixel in rows [y0, y1) to its best of <= 9 candidate centers."""
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t x, y, pr, pc, kr, kc, k, best_k, t
    cdef double d, best_d
    with nogil:
        for y in range(y0, y1):
            pr = y // s
            for x in range(w):
                pc = x // s
                best_k = pr * ns_c + pc
                best_d = _pix_dist(img, cxy, clab, best_k, x, y, xy_weight)
                for t in range(1, 9):
                    kr = pr + _OFF_R[t]
                    kc = pc + _OFF_C[t]
                    if kr < 0 or kr >= ns_r or kc < 0 or kc >= ns_c:
                        continue
                    k = kr * ns_c + kc
                    d = _pix_dist(img, cxy, clab, k, x, y, xy_weight)
                    if d < best_d:
                        best_d = d
                        best_k = k
                labels[y, x] = <cnp.int32_t>best_k


def accumulate_range(const float[:, :, ::1] img, const cnp.int32_t[:, ::1] labels,
                     double[:, :, ::1] slab, Py_ssize_t s, Py_ssize_t ns_c,
                     Py_ssize_t tile_len, Py_ssize_t k0, Py_ssize_t k1):
    """Fill the per-strip partial sums of clusters [k0, k1).

    Strip j of cluster (r, c) covers rows [(r-1)S + j*tile_len,
    (r-1)S + (j+1)*tile_len) of the 3S-row window span, clipped to the window
    and the image, over all window columns.
    """
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t n_bl = slab.shape[1]
    cdef Py_ssize_t k, r, c, wx0, wx1, ry0, ry1, j, sy0, sy1, x, y, sx, sy, cnt
    cdef double sl, sa, sb
    with nogil:
        for k in range(k0, k1):
            r = k // ns_c
            c = k % ns_c
            wx0 = (c - 1) * s
            if wx0 < 0:
                wx0 = 0
            wx1 = (c + 2) * s
            if wx1 > w:
                wx1 = w
            ry0 = (r - 1) * s
            ry1 = (r + 2) * s
            if ry1 > h:
                ry1 = h
            for j in range(n_bl):
                sy0 = ry0 + j * tile_len
                if sy0 < 0:
                    sy0 = 0
                sy1 = ry0 + (j + 1) * tile_len
                if sy1 > ry1:
                    sy1 = ry1
                sl = 0.0
                sa = 0.0
                sb = 0.0
                sx = 0
                sy = 0
                cnt = 0
                for y in range(sy0, sy1):
                    for x in range(wx0, wx1):
                        if labels[y, x] == k:
                            sl += <double>img[y, x, 0]
                            sa += <double>img[y, x, 1]
                            sb += <double>img[y, x, 2]
                            sx += x
                            sy += y
                            cnt += 1
                slab[k, j, 0] = sl
                slab[k, j, 1] = sa
                slab[k, j, 2] = sb
                slab[k, j, 3] = <double>sx
                slab[k, j, 4] = <double>sy
                slab[k, j, 5] = <double>cnt


def accumulate_spill(const float[:, :, ::1] img, const cnp.int32_t[:, ::1] labels,
                     double[:, :, ::1] slab, Py_ssize_t s, Py_ssize_t ns_c):
    """Sequentially add pixels lying outside their cluster's window to strip 0.

    Unreachable from the pipeline's own label maps but required so arbitrary
    label maps are still counted exactly once. Returns the spill count.
    """
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t x, y, k, kr, kc, spills
    spills = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                k = labels[y, x]
                kr = k // ns_c
                kc = k % ns_c
                if (x >= (kc - 1) * s and x < (kc + 2) * s
                        and y >= (kr - 1) * s and y < (kr + 2) * s):
                    continue
                slab[k, 0, 0] += <double>img[y, x, 0]
                slab[k, 0, 1] += <double>img[y, x, 1]
                slab[k, 0, 2] += <double>img[y, x, 2]
                slab[k, 0, 3] += <double>x
                slab[k, 0, 4] += <double>y
                slab[k, 0, 5] += 1.0
                spills += 1
    return spills


def reduce_range(double[:, :, ::1] slab, const double[:, ::1] prev_xy,
                 const double[:, ::1] prev_lab, double[:, ::1] out_xy,
                 double[:, ::1] out_lab, cnp.int64_t[::1] out_counts,
                 Py_ssize_t k0, Py_ssize_t k1):
    """Pairwise-tree reduce the strips of clusters [k0, k1) into new centers.

    Destroys the slab rows it reduces. Empty clusters keep their previous
    center and get num_pixels = 0.
    """
    cdef Py_ssize_t n_bl = slab.shape[1]
    cdef Py_ssize_t k, m, half, i, comp
    cdef double cnt
    with nogil:
        for k in range(k0, k1):
            m = n_bl
            while m > 1:
                half = m >> 1
                for i in range(half):
                    for comp in range(6):
                        slab[k, i, comp] = slab[k, 2 * i, comp] + slab[k, 2 * i + 1, comp]
                if m & 1:
                    for comp in range(6):
                        slab[k, half, comp] = slab[k, m - 1, comp]
                m = half + (m & 1)
            cnt = slab[k, 0, 5]
            if cnt > 0.0:
                out_lab[k, 0] = slab[k, 0, 0] / cnt
                out_lab[k, 1] = slab[k, 0, 1] / cnt
                out_lab[k, 2] = slab[k, 0, 2] / cnt
                out_xy[k, 0] = slab[k, 0, 3] / cnt
                out_xy[k, 1] = slab[k, 0, 4] / cnt
            else:
                out_lab[k, 0] = prev_lab[k, 0]
                out_lab[k, 1] = prev_lab[k, 1]
                out_lab[k, 2] = prev_lab[k, 2]
                out_xy[k, 0] = prev_xy[k, 0]
                out_xy[k, 1] = prev_xy[k, 1]
            out_counts[k] = <cnp.int64_t>cnt


def weak_band(const cnp.int32_t[:, ::1] src, cnp.int32_t[:, ::1] dst,
              Py_ssize_t y0, Py_ssize_t y1):
    """One stray-pixel pass over rows [y0, y1), reading the frozen `src`.

    A pixel whose in-bounds 4-neighbors all differ from it adopts its left
    neighbor's label (top neighbor in column 0; (0,0) is left unchanged).
    """
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef Py_ssize_t x, y
    cdef cnp.int32_t v
    with nogil:
        for y in range(y0, y1):
            for x in range(w):
                v = src[y, x]
                if x > 0 and src[y, x - 1] == v:
                    dst[y, x] = v
                elif x < w - 1 and src[y, x + 1] == v:
                    dst[y, x] = v
                elif y > 0 and src[y - 1, x] == v:
                    dst[y, x] = v
                elif y < h - 1 and src[y + 1, x] == v:
                    dst[y, x] = v
                elif x > 0:
                    dst[y, x] = src[y, x - 1]
                elif y > 0:
                    dst[y, x] = src[y - 1, x]
                else:
                    dst[y, x] = v


def strict_fill(const cnp.int32_t[:, ::1] src, cnp.int32_t[:, ::1] dst,
                Py_ssize_t min_size):
    """Scan-order flood fill guaranteeing one 4-connected component per label.

    A component keeps its original label unless it is smaller than `min_size`
    or its label value was already kept by an earlier component; in either
    case it takes the final label of the first previously-finalized neighbor
    of its seed in (left, up, right, down) order.
    """
    cdef Py_ssize_t h = src.shape[0]
    cdef Py_ssize_t w = src.shape[1]
    cdef Py_ssize_t n = h * w
    cdef Py_ssize_t p, q, qx, qy, px, py, top, size, n_comps, t, nx, ny
    cdef cnp.int64_t sn
    cdef cnp.int32_t orig, adj, max_label
    cdef cnp.int64_t* serial = <cnp.int64_t*>malloc(n * sizeof(cnp.int64_t))
    cdef Py_ssize_t* stack = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef cnp.int32_t* comp_value = <cnp.int32_t*>malloc(n * sizeof(cnp.int32_t))
    cdef unsigned char* used = NULL
    cdef Py_ssize_t[4] nbx
    cdef Py_ssize_t[4] nby
    if serial == NULL or stack == NULL or comp_value == NULL:
        free(serial)
        free(stack)
        free(comp_value)
        raise MemoryError()
    max_label = 0
    for p in range(n):
        if src[p // w, p % w] > max_label:
            max_label = src[p // w, p % w]
    used = <unsigned char*>calloc(max_label + 1, 1)
    if used == NULL:
        free(serial)
        free(stack)
        free(comp_value)
        raise MemoryError()
    try:
        with nogil:
            for p in range(n):
                serial[p] = -1
            n_comps = 0
            for p in range(n):
                if serial[p] != -1:
                    continue
                orig = src[p // w, p % w]
                serial[p] = n_comps
                stack[0] = p
                top = 1
                size = 0
                while top > 0:
                    top -= 1
                    q = stack[top]
                    size += 1
                    qy = q // w
                    qx = q % w
                    if qx > 0 and serial[q - 1] == -1 and src[qy, qx - 1] == orig:
                        serial[q - 1] = n_comps
                        stack[top] = q - 1
                        top += 1
                    if qx < w - 1 and serial[q + 1] == -1 and src[qy, qx + 1] == orig:
                        serial[q + 1] = n_comps
                        stack[top] = q + 1
                        top += 1
                    if qy > 0 and serial[q - w] == -1 and src[qy - 1, qx] == orig:
                        serial[q - w] = n_comps
                        stack[top] = q - w
                        top += 1
                    if qy < h - 1 and serial[q + w] == -1 and src[qy + 1, qx] == orig:
                        serial[q + w] = n_comps
                        stack[top] = q + w
                        top += 1
                py = p // w
                px = p % w
                nbx[0] = px - 1
                nby[0] = py
                nbx[1] = px
                nby[1] = py - 1
                nbx[2] = px + 1
                nby[2] = py
                nbx[3] = px
                nby[3] = py + 1
                adj = -1
                for t in range(4):
                    nx = nbx[t]
                    ny = nby[t]
                    if 0 <= nx < w and 0 <= ny < h:
                        sn = serial[ny * w + nx]
                        if sn != -1 and sn != n_comps:
                            adj = comp_value[sn]
                            break
                if (size < min_size or used[orig]) and adj != -1:
                    comp_value[n_comps] = adj
                else:
                    comp_value[n_comps] = orig
                    used[orig] = 1
                n_comps += 1
            for p in range(n):
                dst[p // w, p % w] = comp_value[serial[p]]
    finally:
        free(serial)
        free(stack)
        free(comp_value)
        free(used)
