# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled per-Gaussian raster kernels.

Must stay semantically identical to _kernels_np: same window bounds, same
inclusion test, same gradient expressions, so the two backends agree to
rounding error and share the exact truncated support set.
"""

from libc.math cimport ceil, exp, fabs, floor

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _imax(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a > b else b


cdef inline Py_ssize_t _imin(Py_ssize_t a, Py_ssize_t b) nogil:
    return a if a < b else b


def render(params, Py_ssize_t height, Py_ssize_t width, double cutoff):
    """Sum of truncated isotropic Gaussians evaluated at pixel centers."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(
        params, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] image = np.zeros(
        (height, width), dtype=np.float64
    )
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t i, r, c, r_lo, r_hi, c_lo, c_hi
    cdef double mu_x, mu_y, sigma, amp, radius, rad_sq, inv_var, dx, dy, sq
    for i in range(n):
        mu_x = p[i, 0]
        mu_y = p[i, 1]
        sigma = p[i, 2]
        amp = p[i, 3]
        radius = cutoff * sigma
        rad_sq = radius * radius
        inv_var = 1.0 / (sigma * sigma)
        r_lo = _imax(0, <Py_ssize_t>ceil(mu_y - radius - 0.5))
        r_hi = _imin(height - 1, <Py_ssize_t>floor(mu_y + radius - 0.5))
        c_lo = _imax(0, <Py_ssize_t>ceil(mu_x - radius - 0.5))
        c_hi = _imin(width - 1, <Py_ssize_t>floor(mu_x + radius - 0.5))
        for r in range(r_lo, r_hi + 1):
            dy = (<double>r) + 0.5 - mu_y
            for c in range(c_lo, c_hi + 1):
                dx = (<double>c) + 0.5 - mu_x
                sq = dx * dx + dy * dy
                if sq <= rad_sq:
                    image[r, c] += amp * exp(-0.5 * sq * inv_var)
    return image


def gradient_stats(params, residual, double cutoff):
    """Per-Gaussian raw loss-gradient sums over the truncated support.

    Output columns: (sum gx, sum gy, sum ga, sum |gx|, sum |gy|, pixel
    count), all before the 2/P mean-squared-error factor.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=2] p = np.ascontiguousarray(
        params, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=2] res = np.ascontiguousarray(
        residual, dtype=np.float64
    )
    cdef Py_ssize_t height = res.shape[0]
    cdef Py_ssize_t width = res.shape[1]
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, 6), dtype=np.float64)
    cdef Py_ssize_t i, r, c, r_lo, r_hi, c_lo, c_hi, touched
    cdef double mu_x, mu_y, sigma, amp, radius, rad_sq, inv_var
    cdef double dx, dy, sq, weight, gx, gy
    cdef double sum_gx, sum_gy, sum_ga, sum_abs_gx, sum_abs_gy
    for i in range(n):
        mu_x = p[i, 0]
        mu_y = p[i, 1]
        sigma = p[i, 2]
        amp = p[i, 3]
        radius = cutoff * sigma
        rad_sq = radius * radius
        inv_var = 1.0 / (sigma * sigma)
        r_lo = _imax(0, <Py_ssize_t>ceil(mu_y - radius - 0.5))
        r_hi = _imin(height - 1, <Py_ssize_t>floor(mu_y + radius - 0.5))
        c_lo = _imax(0, <Py_ssize_t>ceil(mu_x - radius - 0.5))
        c_hi = _imin(width - 1, <Py_ssize_t>floor(mu_x + radius - 0.5))
        sum_gx = 0.0
        sum_gy = 0.0
        sum_ga = 0.0
        sum_abs_gx = 0.0
        sum_abs_gy = 0.0
        touched = 0
        for r in range(r_lo, r_hi + 1):
            dy = (<double>r) + 0.5 - mu_y
            for c in range(c_lo, c_hi + 1):
                dx = (<double>c) + 0.5 - mu_x
                sq = dx * dx + dy * dy
                if sq <= rad_sq:
                    weight = res[r, c] * exp(-0.5 * sq * inv_var)
                    gx = weight * amp * dx * inv_var
                    gy = weight * amp * dy * inv_var
                    sum_gx += gx
                    sum_gy += gy
                    sum_ga += weight
                    sum_abs_gx += fabs(gx)
                    sum_abs_gy += fabs(gy)
                    touched += 1
        out[i, 0] = sum_gx
        out[i, 1] = sum_gy
        out[i, 2] = sum_ga
        out[i, 3] = sum_abs_gx
        out[i, 4] = sum_abs_gy
        out[i, 5] = <double>touched
    return out
