# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exit-time walkers.

Both walkers advance a batch of paths through one chunk of pre-drawn normals
and uniforms, stopping each path at its first exit. Crossings that happen
between grid points are caught with the Brownian-bridge probability
exp(-2 d0 d1 / dt), where d0 and d1 are the distances to the barrier at the
two ends of the step.
"""

from libc.math cimport exp, sin, cos


def strip_walk(double[::1] x, double[::1] y, signed char[::1] state, long[::1] nsteps,
               const double[:, :, ::1] normals, const double[:, ::1] uniforms,
               double lo, double hi, double sqrt_dt, double dt):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t chunk = normals.shape[1]
    cdef Py_ssize_t i, s
    cdef double x0, y0, x1, y1, dx, dy, frac, p_lo, p_hi, u
    for i in range(n):
        if state[i] != 0:
            continue
        x0 = x[i]
        y0 = y[i]
        for s in range(chunk):
            dx = sqrt_dt * normals[i, s, 0]
            dy = sqrt_dt * normals[i, s, 1]
            x1 = x0 + dx
            y1 = y0 + dy
            nsteps[i] += 1
            if x1 <= lo:
                frac = (x0 - lo) / (x0 - x1)
                y0 = y0 + frac * dy
                x0 = lo
                state[i] = 1
                break
            if x1 >= hi:
                frac = (hi - x0) / (x1 - x0)
                y0 = y0 + frac * dy
                x0 = hi
                state[i] = 2
                break
            p_lo = exp(-2.0 * (x0 - lo) * (x1 - lo) / dt)
            p_hi = exp(-2.0 * (hi - x0) * (hi - x1) / dt)
            u = uniforms[i, s]
            if u < p_lo:
                y0 = y0 + 0.5 * dy
                x0 = lo
                state[i] = 1
                break
            if u < p_lo + p_hi:
                y0 = y0 + 0.5 * dy
                x0 = hi
                state[i] = 2
                break
            x0 = x1
            y0 = y1
        x[i] = x0
        y[i] = y0


def halfplane_walk(double[::1] x, double[::1] y, double[::1] integral,
                   signed char[::1] state, long[::1] nsteps,
                   const double[:, :, ::1] normals, const double[:, ::1] uniforms,
                   const double[::1] kappa, const double[::1] a, const double[::1] b,
                   double sqrt_dt, double dt):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t chunk = normals.shape[1]
    cdef Py_ssize_t modes = kappa.shape[0]
    cdef Py_ssize_t i, s, k
    cdef double x0, y0, x1, y1, dv, dh, ux, uy, damp, c, sn, frac, acc
    for i in range(n):
        if state[i] != 0:
            continue
        x0 = x[i]
        y0 = y[i]
        acc = integral[i]
        for s in range(chunk):
            ux = 0.0
            uy = 0.0
            for k in range(modes):
                damp = exp(-kappa[k] * y0)
                c = cos(kappa[k] * x0)
                sn = sin(kappa[k] * x0)
                ux = ux + damp * kappa[k] * (b[k] * c - a[k] * sn)
                uy = uy - damp * kappa[k] * (a[k] * c + b[k] * sn)
            dv = sqrt_dt * normals[i, s, 0]
            dh = sqrt_dt * normals[i, s, 1]
            # the whole increment is kept on the exit step, so the sum stays an
            # exact discrete martingale; only the exit abscissa is interpolated
            acc = acc + ux * dv - uy * dh
            x1 = x0 + dh
            y1 = y0 + dv
            nsteps[i] += 1
            if y1 <= 0.0:
                frac = y0 / (y0 - y1)
                x0 = x0 + frac * dh
                y0 = 0.0
                state[i] = 1
                break
            if uniforms[i, s] < exp(-2.0 * y0 * y1 / dt):
                x0 = x0 + 0.5 * dh
                y0 = 0.0
                state[i] = 1
                break
            x0 = x1
            y0 = y1
        x[i] = x0
        y[i] = y0
        integral[i] = acc
