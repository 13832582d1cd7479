"""Pure-numpy versions of the compiled walkers in ``_kernels.pyx``.

Same arguments and in-place semantics; the step loop runs in Python and the
work inside a step is vectorized over the paths that are still alive.
"""

from __future__ import annotations

import numpy as np


def strip_walk(x, y, state, nsteps, normals, uniforms, lo, hi, sqrt_dt, dt):
    live = np.flatnonzero(state == 0)
    chunk = normals.shape[1]
    x0, y0 = x[live].copy(), y[live].copy()
    for s in range(chunk):
        if live.size == 0:
            break
        dx = sqrt_dt * normals[live, s, 0]
        dy = sqrt_dt * normals[live, s, 1]
        x1 = x0 + dx
        y1 = y0 + dy
        nsteps[live] += 1
        u = uniforms[live, s]
        with np.errstate(divide="ignore", invalid="ignore"):
            below = x1 <= lo
            above = ~below & (x1 >= hi)
            inside = ~below & ~above
            p_lo = np.exp(-2.0 * (x0 - lo) * (x1 - lo) / dt)
            p_hi = np.exp(-2.0 * (hi - x0) * (hi - x1) / dt)
            bridge_lo = inside & (u < p_lo)
            bridge_hi = inside & ~bridge_lo & (u < p_lo + p_hi)
            frac_lo = (x0 - lo) / (x0 - x1)
            frac_hi = (hi - x0) / (x1 - x0)
        done = below | above | bridge_lo | bridge_hi
        y_exit = np.where(below, y0 + frac_lo * dy, np.where(above, y0 + frac_hi * dy, y0 + 0.5 * dy))
        idx = live[done]
        x[idx] = np.where((below | bridge_lo)[done], lo, hi)
        y[idx] = y_exit[done]
        state[idx] = np.where((below | bridge_lo)[done], 1, 2)
        keep = ~done
        live, x0, y0 = live[keep], x1[keep], y1[keep]
    x[live] = x0
    y[live] = y0


def halfplane_walk(x, y, integral, state, nsteps, normals, uniforms, kappa, a, b, sqrt_dt, dt):
    live = np.flatnonzero(state == 0)
    chunk = normals.shape[1]
    x0, y0, acc = x[live].copy(), y[live].copy(), integral[live].copy()
    for s in range(chunk):
        if live.size == 0:
            break
        ux = np.zeros(live.size)
        uy = np.zeros(live.size)
        for k in range(kappa.size):
            damp = np.exp(-kappa[k] * y0)
            c = np.cos(kappa[k] * x0)
            sn = np.sin(kappa[k] * x0)
            ux = ux + damp * kappa[k] * (b[k] * c - a[k] * sn)
            uy = uy - damp * kappa[k] * (a[k] * c + b[k] * sn)
        dv = sqrt_dt * normals[live, s, 0]
        dh = sqrt_dt * normals[live, s, 1]
        # whole increment kept on the exit step (exact discrete martingale)
        acc = acc + ux * dv - uy * dh
        x1 = x0 + dh
        y1 = y0 + dv
        nsteps[live] += 1
        crossed = y1 <= 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = y0 / (y0 - y1)
        bridged = ~crossed & (uniforms[live, s] < np.exp(-2.0 * y0 * y1 / dt))
        done = crossed | bridged
        w = np.where(crossed, frac, 0.5)
        idx = live[done]
        integral[idx] = acc[done]
        x[idx] = (x0 + w * dh)[done]
        y[idx] = 0.0
        state[idx] = 1
        keep = ~done
        live, x0, y0, acc = live[keep], x1[keep], y1[keep], acc[keep]
    x[live] = x0
    y[live] = y0
    integral[live] = acc
