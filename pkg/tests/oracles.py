"""Slow, independent reference computations used to check the fast paths."""
import numpy as np

from sram5t import cell as C

MV = 1e-3


def _fn(curve):
    """Monotone curve (vin, vout) as a callable vin -> vout."""
    order = np.argsort(curve[:, 0])
    x, y = curve[order, 0], curve[order, 1]
    return lambda v: np.interp(v, x, y)


def largest_square(curve_a, curve_b, step=MV):
    """Exhaustive search for the largest square in each butterfly lobe.

    curve_a: Qz = fa(Q); curve_b: Q = fb(Qz).  Upper-left lobe: below fa and
    right of fb; its binding corners are bottom-left (on fb) and top-right
    (on fa).  The lower-right lobe is the mirror case.  Corner positions are
    scanned on a ``step`` grid; at each position the side is scanned on the
    same grid and then bisected to 1 uV, so only the position is quantized.
    """
    fa, fb = _fn(curve_a), _fn(curve_b)
    lo = min(curve_a[:, 0].min(), curve_b[:, 0].min())
    hi = max(curve_a[:, 0].max(), curve_b[:, 0].max())
    grid = np.arange(lo, hi + step / 2, step)
    sides = np.arange(0.0, hi - lo + step / 2, step)

    def best(start_other, fits):
        coarse = []
        for g in grid:
            o = start_other(g)
            ok = fits(g, o, sides)
            # the side must work for every smaller side too
            bad = np.nonzero(~ok)[0]
            n = bad[0] if bad.size else ok.size
            coarse.append(sides[n - 1] if n > 0 else -1.0)
        coarse = np.array(coarse)
        top = coarse.max()
        if top < 0:
            return 0.0
        out = top
        for k in np.nonzero(coarse >= top - step)[0]:
            g = grid[k]
            o = start_other(g)
            a, b = coarse[k], coarse[k] + step
            while b - a > 1e-6:
                m = 0.5 * (a + b)
                a, b = (m, b) if fits(g, o, m) else (a, m)
            out = max(out, a)
        return out

    # upper-left: y on grid, x = fb(y), need y + s <= fa(x + s)
    ul = best(fb, lambda y, x, s: y + s <= fa(x + s))
    # lower-right: x on grid, y = fa(x), need x + s <= fb(y + s)
    lr = best(fa, lambda x, y, s: x + s <= fb(y + s))
    return min(ul, lr)


def sign_change_cells(cell, corner, bias, n=41, lo=None, hi=None):
    """Grid cells of a clamped (Q, Qz) scan where both KCL currents change sign."""
    lo = bias.rail_low - 0.05 if lo is None else lo
    hi = bias.vddm + 0.05 if hi is None else hi
    g = np.linspace(lo, hi, n)
    qq, zz = np.meshgrid(g, g, indexing="ij")
    iq, iqz = C.node_currents(cell, corner, bias, qq, zz)
    cells = []
    for i in range(n - 1):
        for j in range(n - 1):
            a = iq[i:i + 2, j:j + 2]
            b = iqz[i:i + 2, j:j + 2]
            if a.min() <= 0 <= a.max() and b.min() <= 0 <= b.max():
                cells.append((g[i], g[i + 1], g[j], g[j + 1]))
    return cells


def trip_scan(cell, corner, bias, step=MV):
    """Identity-line crossing of the Q-sensing inverter by a 1 mV scan."""
    v = np.arange(bias.rail_low, bias.vddm + step / 2, step)
    g = C.node_currents(cell, corner, bias, v, v)[1]
    k = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0][0]
    return 0.5 * (v[k] + v[k + 1])


def flip_scan(pred, lo, hi, step=MV, coarse=10 * MV):
    """Grid scan of a flip predicate: ``coarse`` steps over [lo, hi] to find
    where it changes, then every ``step`` across each changing interval.
    Returns the sorted grid points and predicate values."""
    grid = np.arange(lo, hi + coarse / 2, coarse)
    vals = {float(v): pred(v) for v in grid}
    for a, b in zip(grid[:-1], grid[1:]):
        if vals[float(a)] != vals[float(b)]:
            for v in np.arange(a - coarse, b + coarse + step / 2, step):
                if lo <= v <= hi and float(v) not in vals:
                    vals[float(v)] = pred(v)
    v = np.array(sorted(vals))
    return v, np.array([vals[float(x)] for x in v])


def charge_shared(c_read, c_bl, c_vg1, c_vg2, n0, n1, v, v0, v1):
    """V_SSM after reconnecting a word: total charge over total capacitance.

    The detached ground lines come back discharged, so they add capacitance
    but no charge.
    """
    q = c_read * v + c_bl * (n0 * v0 + n1 * v1)
    return q / (c_read + (n0 + n1) * (c_bl + c_vg1 + c_vg2))
