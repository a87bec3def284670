"""Pure-numpy fallback for the branching kernels.

Implements the same branching Brownian dynamics as the compiled extension,
processing the cloud wave by wave (all particles of one generation within the
slab advance together) so the per-event work is vectorized.  Each backend is
deterministic for a fixed seed, but the two consume the stream in different
orders, so their outputs agree in law rather than bitwise.
"""
from __future__ import annotations

import numpy as np

from .errors import ParticleCapError

BACKEND_NAME = "python"

_GRID_NUDGE = 1e-9


def _generator(bit_generator):
    return np.random.Generator(bit_generator)


def advance_full(pos, t0, t1, rate, p2, bit_generator, cap):
    """Advance a full-space cloud from t0 to t1; returns (positions, n_events)."""
    if t1 < t0:
        raise ValueError("cannot advance backwards in time")
    pos = np.asarray(pos, dtype=float)
    n, d = pos.shape
    if t1 == t0 or n == 0:
        return pos.copy(), 0
    gen = _generator(bit_generator)
    out_chunks = []
    out_total = 0
    cur_pos = pos
    cur_t = np.full(n, float(t0))
    n_events = 0
    while cur_pos.shape[0]:
        m = cur_pos.shape[0]
        death = cur_t + gen.standard_exponential(m) / rate
        survives = death >= t1
        ns = int(np.count_nonzero(survives))
        if ns:
            z = gen.standard_normal((ns, d))
            fin = cur_pos[survives] + z * np.sqrt(t1 - cur_t[survives])[:, None]
            out_chunks.append(fin)
            out_total += ns
        dying = ~survives
        nd = m - ns
        n_events += nd
        if nd == 0:
            break
        branch = gen.random(nd) < p2
        nb = int(np.count_nonzero(branch))
        if nb == 0:
            break
        dpos = cur_pos[dying][branch]
        dt0 = cur_t[dying][branch]
        dtd = death[dying][branch]
        z = gen.standard_normal((nb, d))
        bp = dpos + z * np.sqrt(dtd - dt0)[:, None]
        cur_pos = np.repeat(bp, 2, axis=0)
        cur_t = np.repeat(dtd, 2)
        if out_total + cur_pos.shape[0] > cap:
            raise ParticleCapError(cap)
    if out_chunks:
        return np.concatenate(out_chunks, axis=0), n_events
    return np.empty((0, d)), n_events


def advance_orthant(pos, t0, t1, rate, p2, n_abs, dt, bit_generator, cap):
    """Advance an orthant cloud with dt-capped segments and bridge kill."""
    if t1 < t0:
        raise ValueError("cannot advance backwards in time")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    pos = np.asarray(pos, dtype=float)
    n, d = pos.shape
    if n_abs < 1 or n_abs > d:
        raise ValueError("need 1 <= absorbed coordinates <= d")
    if t1 == t0 or n == 0:
        return pos.copy(), 0
    gen = _generator(bit_generator)
    out_chunks = []
    out_total = 0
    cur_pos = pos.copy()
    cur_t = np.full(n, float(t0))
    # pending branching time per particle
    tau = cur_t + gen.standard_exponential(n) / rate
    n_events = 0
    while cur_pos.shape[0]:
        m = cur_pos.shape[0]
        grid = (np.floor(cur_t / dt + _GRID_NUDGE) + 1.0) * dt
        grid = np.where(grid <= cur_t, cur_t + dt, grid)
        te = np.minimum(grid, t1)
        is_branch = tau <= te
        te = np.where(is_branch, tau, te)
        n_events += int(np.count_nonzero(is_branch))

        # childless branch deaths drop out before any endpoint is sampled
        keep = np.full(m, True)
        nb = int(np.count_nonzero(is_branch))
        if nb:
            keep[is_branch] = gen.random(nb) < p2
        cur_pos, cur_t, te, is_branch, tau = (
            a[keep] for a in (cur_pos, cur_t, te, is_branch, tau)
        )
        m = cur_pos.shape[0]
        if m == 0:
            break

        # diffuse to the segment end, killing on boundary hits
        h = te - cur_t
        alive = np.full(m, True)
        moving = h > 0
        nm = int(np.count_nonzero(moving))
        nxt = cur_pos.copy()
        if nm:
            z = gen.standard_normal((nm, d))
            nxt[moving] += z * np.sqrt(h[moving])[:, None]
        for j in range(d - n_abs, d):
            yj = nxt[:, j]
            xj = cur_pos[:, j]
            pos_ok = yj > 0
            cross = np.zeros(m)
            safe = moving & pos_ok
            cross[safe] = np.exp(-2.0 * xj[safe] * yj[safe] / h[safe])
            u = gen.random(m)
            seg_alive = np.where(moving, pos_ok & (u >= cross), True)
            alive &= seg_alive
        cur_pos = nxt[alive]
        te, is_branch, tau = te[alive], is_branch[alive], tau[alive]
        m = cur_pos.shape[0]
        if m == 0:
            break

        at_end = ~is_branch & (te >= t1)
        ne = int(np.count_nonzero(at_end))
        if ne:
            out_chunks.append(cur_pos[at_end])
            out_total += ne
        stay = ~at_end
        cur_pos, cur_t, tau = cur_pos[stay], te[stay], tau[stay]
        was_branch = is_branch[stay]
        nb2 = int(np.count_nonzero(was_branch))
        if nb2:
            # branch survivors duplicate; both offspring draw fresh clocks
            cur_pos = np.concatenate([cur_pos, cur_pos[was_branch]], axis=0)
            cur_t = np.concatenate([cur_t, cur_t[was_branch]])
            tau = np.concatenate([tau, tau[was_branch]])
            redraw = np.concatenate([was_branch, np.full(nb2, True)])
            tau = tau.copy()
            tau[redraw] = cur_t[redraw] + gen.standard_exponential(
                int(np.count_nonzero(redraw))
            ) / rate
        if out_total + cur_pos.shape[0] > cap:
            raise ParticleCapError(cap)
    if out_chunks:
        return np.concatenate(out_chunks, axis=0), n_events
    return np.empty((0, d)), n_events
