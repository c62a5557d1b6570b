"""Pure numpy/Python kernel set.

Fallback used when the compiled extension is unavailable. Every function here
is the reference for `_core.pyx`: identical signatures, identical float64
operation order, so the two implementations produce bit-identical outputs.

All kernels operate on preallocated C-contiguous arrays and touch only the
half-open row band [y0, y1) or cluster range [k0, k1) they are given; bands
never overlap, which is what makes the parallel backend deterministic.
"""

import numpy as np

from . import tables
from .tables import LAB_EPS, LAB_KAPPA, SPACE_LAB, SPACE_RGB, SPACE_XYZ

NAME = "pure"

# Candidate scan order for association: home cell first, then the remaining
# eight in increasing cluster-id order. Ties keep the earliest candidate.
_OFFSETS = ((0, 0), (-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def convert_band(rgb, out, space, y0, y1):
    """Convert rows [y0, y1) of an 8-bit RGB raster into `out` (float32)."""
    block = rgb[y0:y1]
    if space == SPACE_RGB:
        out[y0:y1] = block / 255.0
        return
    r = tables.LINEAR_LUT[block[..., 0]]
    g = tables.LINEAR_LUT[block[..., 1]]
    b = tables.LINEAR_LUT[block[..., 2]]
    m = tables.RGB_TO_XYZ
    x = m[0, 0] * r + m[0, 1] * g + m[0, 2] * b
    y = m[1, 0] * r + m[1, 1] * g + m[1, 2] * b
    z = m[2, 0] * r + m[2, 1] * g + m[2, 2] * b
    if space == SPACE_XYZ:
        out[y0:y1, :, 0] = x
        out[y0:y1, :, 1] = y
        out[y0:y1, :, 2] = z
        return
    assert space == SPACE_LAB
    tx = x / tables.WHITE[0]
    ty = y / tables.WHITE[1]
    tz = z / tables.WHITE[2]
    fx = np.where(tx > LAB_EPS, np.cbrt(tx), (LAB_KAPPA * tx + 16.0) / 116.0)
    fy = np.where(ty > LAB_EPS, np.cbrt(ty), (LAB_KAPPA * ty + 16.0) / 116.0)
    fz = np.where(tz > LAB_EPS, np.cbrt(tz), (LAB_KAPPA * tz + 16.0) / 116.0)
    lightness = 116.0 * fy - 16.0
    np.clip(lightness, 0.0, 100.0, out=lightness)
    out[y0:y1, :, 0] = lightness
    out[y0:y1, :, 1] = 500.0 * (fx - fy)
    out[y0:y1, :, 2] = 200.0 * (fy - fz)


def init_centers_range(img, s, ns_c, cxy, clab, k0, k1):
    """Seed cluster centers [k0, k1) at cell centers, clamped to the image."""
    h, w = img.shape[0], img.shape[1]
    ks = np.arange(k0, k1)
    r = ks // ns_c
    c = ks % ns_c
    ix = np.minimum(c * s + s // 2, w - 1)
    iy = np.minimum(r * s + s // 2, h - 1)
    cxy[k0:k1, 0] = ix
    cxy[k0:k1, 1] = iy
    clab[k0:k1] = img[iy, ix]


def _gradient(img, x, y):
    # Squared color difference across the horizontal plus vertical pixel pairs.
    dl = float(img[y, x + 1, 0]) - float(img[y, x - 1, 0])
    da = float(img[y, x + 1, 1]) - float(img[y, x - 1, 1])
    db = float(img[y, x + 1, 2]) - float(img[y, x - 1, 2])
    gx = dl * dl + da * da + db * db
    dl = float(img[y + 1, x, 0]) - float(img[y - 1, x, 0])
    da = float(img[y + 1, x, 1]) - float(img[y - 1, x, 1])
    db = float(img[y + 1, x, 2]) - float(img[y - 1, x, 2])
    gy = dl * dl + da * da + db * db
    return gx + gy


def perturb_range(img, cxy, clab, k0, k1):
    """Move centers [k0, k1) to the lowest-gradient pixel of their 3x3 patch.

    Only interior pixels (full 4-neighborhood in bounds) are candidates;
    a center that is not interior does not move. A tie with the center's own
    gradient keeps the center; otherwise the scan-order-first minimum wins.
    Assumes centers sit on integer pixel positions (as after initialization).
    """
    h, w = img.shape[0], img.shape[1]
    for k in range(k0, k1):
        ix = int(cxy[k, 0])
        iy = int(cxy[k, 1])
        if ix < 1 or ix > w - 2 or iy < 1 or iy > h - 2:
            continue
        best = _gradient(img, ix, iy)
        bx, by = ix, iy
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                nx = ix + dx
                ny = iy + dy
                if nx < 1 or nx > w - 2 or ny < 1 or ny > h - 2:
                    continue
                g = _gradient(img, nx, ny)
                if g < best:
                    best = g
                    bx, by = nx, ny
        cxy[k, 0] = bx
        cxy[k, 1] = by
        clab[k] = img[by, bx]


def associate_band(img, cxy, clab, labels, s, ns_r, ns_c, xy_weight, y0, y1):
    """Assign each pixel in rows [y0, y1) to its best of <= 9 candidate centers."""
    w = labels.shape[1]
    lch = img[y0:y1, :, 0].astype(np.float64)
    ach = img[y0:y1, :, 1].astype(np.float64)
    bch = img[y0:y1, :, 2].astype(np.float64)
    px = np.arange(w, dtype=np.float64)[None, :]
    py = np.arange(y0, y1, dtype=np.float64)[:, None]
    pr = (np.arange(y0, y1) // s)[:, None]
    pc = (np.arange(w) // s)[None, :]
    best_d = None
    best_id = None
    for dr, dc in _OFFSETS:
        kr = pr + dr
        kc = pc + dc
        cand = np.clip(kr, 0, ns_r - 1) * ns_c + np.clip(kc, 0, ns_c - 1)
        cl = clab[cand]
        dl = cl[..., 0] - lch
        da = cl[..., 1] - ach
        db = cl[..., 2] - bch
        dlab = np.sqrt(dl * dl + da * da + db * db)
        cp = cxy[cand]
        dx = cp[..., 0] - px
        dy = cp[..., 1] - py
        d = dlab + xy_weight * np.sqrt(dx * dx + dy * dy)
        if best_d is None:
            best_d = d
            best_id = cand.copy()
        else:
            upd = d < best_d
            upd &= (kr >= 0) & (kr < ns_r) & (kc >= 0) & (kc < ns_c)
            best_d[upd] = d[upd]
            best_id[upd] = cand[upd]
    labels[y0:y1] = best_id


def accumulate_range(img, labels, slab, s, ns_c, tile_len, k0, k1):
    """Fill the per-strip partial sums of clusters [k0, k1).

    Strip j of cluster (r, c) covers rows [(r-1)S + j*tile_len,
    (r-1)S + (j+1)*tile_len) of the 3S-row window span, clipped to the window
    and the image, over all window columns. Color sums are a row-major
    left-fold in double precision; x/y/count are integer-exact.
    """
    h, w = labels.shape
    n_bl = slab.shape[1]
    for k in range(k0, k1):
        r, c = divmod(k, ns_c)
        wx0 = max(0, (c - 1) * s)
        wx1 = min(w, (c + 2) * s)
        ry0 = (r - 1) * s
        ry1 = min(h, (r + 2) * s)
        for j in range(n_bl):
            sy0 = max(0, ry0 + j * tile_len)
            sy1 = min(ry1, ry0 + (j + 1) * tile_len)
            sl = sa = sb = 0.0
            sx = sy = cnt = 0
            for y in range(sy0, sy1):
                idx = np.nonzero(labels[y, wx0:wx1] == k)[0]
                n = idx.size
                if n == 0:
                    continue
                sel = img[y, wx0:wx1][idx]
                for v in sel[:, 0].tolist():
                    sl += v
                for v in sel[:, 1].tolist():
                    sa += v
                for v in sel[:, 2].tolist():
                    sb += v
                sx += wx0 * n + int(idx.sum())
                sy += y * n
                cnt += n
            part = slab[k, j]
            part[0] = sl
            part[1] = sa
            part[2] = sb
            part[3] = float(sx)
            part[4] = float(sy)
            part[5] = float(cnt)


def accumulate_spill(img, labels, slab, s, ns_c):
    """Sequentially add pixels lying outside their cluster's window to strip 0.

    Unreachable from the pipeline's own label maps (the 9-candidate rule keeps
    every pixel inside its cluster's 3Sx3S window) but required so arbitrary
    label maps are still counted exactly once. Returns the spill count.
    """
    h, w = labels.shape
    kc = labels % ns_c
    kr = labels // ns_c
    x_idx = np.arange(w)[None, :]
    y_idx = np.arange(h)[:, None]
    inside = (
        (x_idx >= (kc - 1) * s)
        & (x_idx < (kc + 2) * s)
        & (y_idx >= (kr - 1) * s)
        & (y_idx < (kr + 2) * s)
    )
    ys, xs = np.nonzero(~inside)
    for y, x in zip(ys.tolist(), xs.tolist()):
        part = slab[labels[y, x], 0]
        part[0] += float(img[y, x, 0])
        part[1] += float(img[y, x, 1])
        part[2] += float(img[y, x, 2])
        part[3] += float(x)
        part[4] += float(y)
        part[5] += 1.0
    return int(ys.size)


def reduce_range(slab, prev_xy, prev_lab, out_xy, out_lab, out_counts, k0, k1):
    """Pairwise-tree reduce the strips of clusters [k0, k1) into new centers.

    Destroys the slab rows it reduces. Empty clusters keep their previous
    center and get num_pixels = 0.
    """
    parts = slab[k0:k1]
    m = parts.shape[1]
    while m > 1:
        half = m // 2
        parts[:, :half] = parts[:, 0 : 2 * half : 2] + parts[:, 1 : 2 * half : 2]
        if m & 1:
            parts[:, half] = parts[:, m - 1]
        m = half + (m & 1)
    tot = parts[:, 0]
    cnt = tot[:, 5]
    nz = cnt > 0.0
    div = np.where(nz, cnt, 1.0)[:, None]
    out_lab[k0:k1] = np.where(nz[:, None], tot[:, 0:3] / div, prev_lab[k0:k1])
    out_xy[k0:k1] = np.where(nz[:, None], tot[:, 3:5] / div, prev_xy[k0:k1])
    out_counts[k0:k1] = cnt.astype(np.int64)


def weak_band(src, dst, y0, y1):
    """One stray-pixel pass over rows [y0, y1), reading the frozen `src`.

    A pixel whose in-bounds 4-neighbors all differ from it adopts its left
    neighbor's label (top neighbor in column 0; (0,0) is left unchanged).
    """
    h, w = src.shape
    bh = y1 - y0
    b = src[y0:y1]
    qual = np.ones((bh, w), dtype=bool)
    if w > 1:
        qual[:, 1:] &= b[:, 1:] != b[:, :-1]
        qual[:, :-1] &= b[:, :-1] != b[:, 1:]
    u0 = y0 if y0 > 0 else 1
    if u0 < y1:
        qual[u0 - y0 :] &= src[u0 - 1 : y1 - 1] != src[u0:y1]
    d1 = y1 if y1 < h else h - 1
    if d1 > y0:
        qual[: d1 - y0] &= src[y0 + 1 : d1 + 1] != src[y0:d1]
    adopt = b.copy()
    if w > 1:
        adopt[:, 1:] = b[:, :-1]
    if y0 > 0:
        adopt[:, 0] = src[y0 - 1 : y1 - 1, 0]
    elif bh > 1:
        adopt[1:, 0] = src[y0 : y1 - 1, 0]
    dst[y0:y1] = np.where(qual, adopt, b)


def strict_fill(src, dst, min_size):
    """Scan-order flood fill guaranteeing one 4-connected component per label.

    A component keeps its original label unless it is smaller than `min_size`
    or its label value was already kept by an earlier component; in either
    case it takes the final label of the first previously-finalized neighbor
    of its seed in (left, up, right, down) order. The scan-order-first
    component has no such neighbor and always keeps its label.
    """
    h, w = src.shape
    n = h * w
    flat = src.reshape(-1)
    serial = np.full(n, -1, dtype=np.int64)
    used = np.zeros(int(flat.max()) + 1, dtype=bool)
    comp_value = []
    stack = []
    n_comps = 0
    for p in range(n):
        if serial[p] != -1:
            continue
        orig = int(flat[p])
        serial[p] = n_comps
        stack.append(p)
        size = 0
        while stack:
            q = stack.pop()
            size += 1
            qy, qx = divmod(q, w)
            if qx > 0 and serial[q - 1] == -1 and flat[q - 1] == orig:
                serial[q - 1] = n_comps
                stack.append(q - 1)
            if qx < w - 1 and serial[q + 1] == -1 and flat[q + 1] == orig:
                serial[q + 1] = n_comps
                stack.append(q + 1)
            if qy > 0 and serial[q - w] == -1 and flat[q - w] == orig:
                serial[q - w] = n_comps
                stack.append(q - w)
            if qy < h - 1 and serial[q + w] == -1 and flat[q + w] == orig:
                serial[q + w] = n_comps
                stack.append(q + w)
        py, px = divmod(p, w)
        adj = -1
        for nx, ny in ((px - 1, py), (px, py - 1), (px + 1, py), (px, py + 1)):
            if 0 <= nx < w and 0 <= ny < h:
                sn = serial[ny * w + nx]
                if sn != -1 and sn != n_comps:
                    adj = comp_value[sn]
                    break
        if (size < min_size or used[orig]) and adj != -1:
            comp_value.append(adj)
        else:
            comp_value.append(orig)
            used[orig] = True
        n_comps += 1
    dst.reshape(-1)[:] = np.asarray(comp_value, dtype=np.int32)[serial]
