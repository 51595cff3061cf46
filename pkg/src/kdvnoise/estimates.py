"""Space-time (modulation) analysis tools: resonance algebra, weighted norms,
the bilinear form, and desk-scale numerical oracles for the supporting lemmas.

Conventions shared across this module: lattice rows are ordered
n = -N..-1, 1..N (no zero mode), the tau grid is uniform with step dtau over
[-tau_max, tau_max], and all tau integrals are Riemann sums on that grid.
Products whose output tau falls outside the window are dropped; this boundary
loss is part of the discrete contract and applies identically on the dense
and sparse evaluation routes.
"""
from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.fft import next_fast_len
from scipy.integrate import quad

from .spectral import bracket

__all__ = [
    "SpaceTimeCoeffs",
    "WeightParams",
    "bilinear_form",
    "bilinear_ratio_sweep",
    "bourgain_l1tau_norm",
    "bourgain_norm",
    "bracket_product_integral",
    "bump",
    "bump_transform",
    "family_points",
    "modulation_max_holds",
    "quadratic_bracket_sum",
    "resonance_residual",
    "resonance_residual_max",
    "resonance_set_integral",
    "resonance_weight",
    "sweep_trial_rng",
    "time_localization_check",
    "weight_terms",
    "weighted_bourgain_norm",
]


# ---------------------------------------------------------------- resonance

def resonance_residual(n1, n2):
    """(n1+n2)^3 - n1^3 - n2^3 - 3(n1+n2)n1n2, exactly, in integers."""
    n1, n2 = int(n1), int(n2)
    n = n1 + n2
    return n**3 - n1**3 - n2**3 - 3 * n * n1 * n2


def resonance_residual_max(bound):
    """Max |residual| over the full integer square |n1|,|n2| <= bound."""
    k = np.arange(-bound, bound + 1, dtype=np.int64)
    n1 = k[:, None]
    n2 = k[None, :]
    n = n1 + n2
    res = n**3 - n1**3 - n2**3 - 3 * n * n1 * n2
    return int(np.abs(res).max())


def modulation_max_holds(n1, n2, tau1, tau2):
    """Check max of the three modulations against the resonance size.

    The three quantities tau-n^3, tau1-n1^3, tau2-n2^3 sum (with signs) to
    -3*n*n1*n2, so the largest bracket is at least a third of <3 n n1 n2>.
    """
    if n1 == 0 or n2 == 0 or n1 + n2 == 0:
        raise ValueError("all three modes must be nonzero")
    n = n1 + n2
    tau = tau1 + tau2
    biggest = max(
        bracket(tau - n**3), bracket(tau1 - n1**3), bracket(tau2 - n2**3)
    )
    return bool(biggest >= bracket(3 * n * n1 * n2) / 3.0)


# ------------------------------------------------------------------- weight

@dataclasses.dataclass(frozen=True)
class WeightParams:
    """Resonance-curve weight parameters.

    C: |n| threshold below which the weight is identically 1.
    c0: proximity constant scaling the <n>^(1/100) window width.
    delta: exponent on the min-bracket gain.
    """

    C: float = 10.0
    c0: float = 1.0
    delta: float = 0.01

    def __post_init__(self):
        if not self.C >= 1:
            raise ValueError("C must be >= 1")
        if not self.c0 >= 0:
            raise ValueError("c0 must be nonnegative")
        if not 0 < self.delta < 1:
            raise ValueError("delta must be in (0,1)")


_OFFSETS = np.arange(-2, 3)


def _weight_candidates(n, d, r):
    """Integer k candidates near the roots of 3nk(n-k) = -d (+-r) and the vertex.

    n: (m,) int array; d = tau - n^3, r: (m,) floats. Returns (m, 25) int64,
    sorted per row.
    """
    nf = n.astype(float)
    base = np.empty((n.size, 5))
    for col, v in enumerate((-d - r, -d + r)):
        disc = 9.0 * nf**4 - 12.0 * nf * v
        sq = np.sqrt(np.clip(disc, 0.0, None))
        base[:, 2 * col] = (3.0 * nf**2 - sq) / (6.0 * nf)
        base[:, 2 * col + 1] = (3.0 * nf**2 + sq) / (6.0 * nf)
    base[:, 4] = nf / 2.0
    cands = np.rint(base)[:, :, None] + _OFFSETS[None, None, :]
    return np.sort(cands.reshape(n.size, 25).astype(np.int64), axis=1)


def _weight_eval(n, tau, params):
    """Vectorized weight on flat int/float arrays; solves the quadratic."""
    n = np.asarray(n, dtype=np.int64)
    tau = np.asarray(tau, dtype=float)
    out = np.ones(n.shape, dtype=float)
    live = np.abs(n) >= params.C
    if params.c0 == 0 or not live.any():
        return out
    nl = n[live]
    tl = tau[live]
    d = tl - nl.astype(float) ** 3
    r = params.c0 * bracket(nl) ** 0.01
    k = _weight_candidates(nl, d, r)
    first = np.concatenate(
        [np.ones((k.shape[0], 1), dtype=bool), k[:, 1:] != k[:, :-1]], axis=1
    )
    kf = k.astype(float)
    value = 3.0 * nl[:, None] * kf * (nl[:, None] - kf)
    hit = (k != 0) & first & (np.abs(d[:, None] + value) <= r[:, None])
    gain = np.minimum(bracket(k), bracket(nl[:, None] - k)) ** params.delta
    out[live] = 1.0 + np.sum(np.where(hit, gain, 0.0), axis=1)
    return out


def resonance_weight(n, tau, params):
    """w(n, tau) >= 1; scalar in, scalar out; arrays broadcast elementwise."""
    scalar = np.isscalar(n) or (isinstance(n, np.ndarray) and n.ndim == 0)
    n_arr = np.atleast_1d(np.asarray(n))
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    n_arr, tau_arr = np.broadcast_arrays(n_arr, tau_arr)
    w = _weight_eval(n_arr.ravel(), tau_arr.ravel(), params).reshape(n_arr.shape)
    return float(w[0]) if scalar else w


def weight_terms(n, tau, params):
    """The contributing (k, gain) pairs behind resonance_weight at one point."""
    if abs(n) < params.C or params.c0 == 0:
        return []
    d = float(tau) - n**3
    r = params.c0 * bracket(n) ** 0.01
    k = _weight_candidates(np.array([n], dtype=np.int64), np.array([d]), np.array([r]))[0]
    terms = []
    seen = set()
    for kk in k.tolist():
        if kk == 0 or kk in seen:
            continue
        seen.add(kk)
        if abs(d + 3 * n * kk * (n - kk)) <= r:
            terms.append((kk, min(bracket(kk), bracket(n - kk)) ** params.delta))
    return sorted(terms)


# --------------------------------------------------------- space-time grids

def _signed_modes(N):
    return np.concatenate([np.arange(-N, 0), np.arange(1, N + 1)])


class SpaceTimeCoeffs:
    """Dense coefficient table f(n, tau) on the shared lattice.

    Rows follow _signed_modes order (n = -N..-1 then 1..N); columns are the
    uniform tau grid. values stays writable so tests and profiles can be
    built in place; finiteness is checked at construction.
    """

    __slots__ = ("N", "tau_max", "dtau", "values")

    def __init__(self, N, tau_max, dtau, values):
        if N < 1:
            raise ValueError("cutoff must be positive")
        if not (tau_max > 0 and dtau > 0):
            raise ValueError("grid parameters must be positive")
        half = tau_max / dtau
        if abs(round(half) - half) > 1e-9:
            raise ValueError("dtau must divide tau_max")
        L = 2 * round(half) + 1
        arr = np.asarray(values, dtype=np.complex128)
        if arr.shape != (2 * N, L):
            raise ValueError(f"values must have shape {(2 * N, L)}, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("values must be finite")
        self.N = int(N)
        self.tau_max = float(tau_max)
        self.dtau = float(dtau)
        self.values = arr

    @property
    def L(self):
        return self.values.shape[1]

    @property
    def tau_grid(self):
        return -self.tau_max + self.dtau * np.arange(self.L)

    def row(self, n):
        if n == 0 or abs(n) > self.N:
            raise ValueError(f"mode {n} not on the lattice (cutoff {self.N})")
        return n + self.N if n < 0 else self.N + n - 1

    def col(self, tau):
        idx = (tau + self.tau_max) / self.dtau
        k = round(idx)
        if abs(k - idx) > 1e-9 or not 0 <= k < self.L:
            raise ValueError(f"tau={tau} is off the grid")
        return k

    @classmethod
    def zeros(cls, N, tau_max=None, dtau=0.5):
        if tau_max is None:
            tau_max = 4.0 * N**3
        half = tau_max / dtau
        if abs(round(half) - half) > 1e-9:
            raise ValueError("dtau must divide tau_max")
        L = 2 * round(half) + 1
        return cls(N, tau_max, dtau, np.zeros((2 * N, L), dtype=np.complex128))

    @classmethod
    def from_points(cls, N, pts, tau_max=None, dtau=0.5):
        out = cls.zeros(N, tau_max=tau_max, dtau=dtau)
        for (n, tau), v in pts.items():
            out.values[out.row(n), out.col(tau)] += v
        return out

    def same_lattice(self, other):
        return (
            self.N == other.N
            and self.tau_max == other.tau_max
            and self.dtau == other.dtau
        )


def _block_ids(N):
    modes = _signed_modes(N)
    return modes, np.floor(np.log2(np.abs(modes))).astype(int)


def _sup_block_lp(row_stats, N, p):
    """sup over dyadic blocks of the l^p combination of per-row statistics.

    For finite p row_stats must hold per-row p-th-power sums; for p = inf it
    holds per-row maxima.
    """
    _, blocks = _block_ids(N)
    best = 0.0
    for j in range(blocks.max() + 1):
        sel = row_stats[blocks == j]
        if math.isinf(p):
            val = sel.max()
        else:
            val = sel.sum() ** (1.0 / p)
        best = max(best, float(val))
    return best


def _xsb_weights(f, s, b):
    modes = _signed_modes(f.N).astype(float)
    return (
        bracket(modes[:, None]) ** s
        * bracket(f.tau_grid[None, :] - modes[:, None] ** 3) ** b
    )


def bourgain_norm(f, s, b, p):
    """sup over blocks of the in-block L^p (in n and tau) of <n>^s<tau-n^3>^b f."""
    A = _xsb_weights(f, s, b) * np.abs(f.values)
    if math.isinf(p):
        return _sup_block_lp(A.max(axis=1), f.N, p)
    return _sup_block_lp(np.sum(A**p, axis=1) * f.dtau, f.N, p)


def bourgain_l1tau_norm(f, s, b, p):
    """Variant with inner L^1 in tau, then block l^p in n, then sup."""
    rows = np.sum(_xsb_weights(f, s, b) * np.abs(f.values), axis=1) * f.dtau
    if math.isinf(p):
        return _sup_block_lp(rows, f.N, p)
    return _sup_block_lp(rows**p, f.N, p)


def _weight_matrix(f, params):
    modes = _signed_modes(f.N)
    nn = np.repeat(modes, f.L)
    tt = np.tile(f.tau_grid, 2 * f.N)
    return _weight_eval(nn, tt, params).reshape(2 * f.N, f.L)


def weighted_bourgain_norm(f, s, b, p, params):
    """Weighted norm: X-part of w*f at (s, b) plus the L^1-in-tau part at b-1/2."""
    W = _weight_matrix(f, params)
    A = _xsb_weights(f, s, b) * W * np.abs(f.values)
    if math.isinf(p):
        x_part = _sup_block_lp(A.max(axis=1), f.N, p)
    else:
        x_part = _sup_block_lp(np.sum(A**p, axis=1) * f.dtau, f.N, p)
    return x_part + bourgain_l1tau_norm(f, s, b - 0.5, p)


# ------------------------------------------------------------ bilinear form

def _input_denominators(f, params, weighted):
    den = bracket(
        f.tau_grid[None, :] - _signed_modes(f.N).astype(float)[:, None] ** 3
    ) ** 0.5
    if weighted:
        den = den * _weight_matrix(f, params)
    return den


def bilinear_form(f, g, s, params, weighted=True):
    """The two-input resonant interaction with its outer modulation factor.

    Output at (n, tau) sums over n1+n2=n, tau1+tau2=tau of
    |n|<n>^s/(<n1>^s<n2>^s) * f(n1,tau1)g(n2,tau2) / (den1*den2), times the
    tau-convolution measure dtau, times <tau-n^3>^(-1/2); den_j is
    <tau_j-n_j^3>^(1/2), weighted additionally by w(n_j,tau_j).
    """
    if not f.same_lattice(g):
        raise ValueError("inputs must share one lattice")
    N, L, dtau = f.N, f.L, f.dtau
    F = f.values / _input_denominators(f, params, weighted)
    G = g.values / _input_denominators(g, params, weighted)
    nfft = next_fast_len(2 * L - 1)
    Fh = np.fft.fft(F, nfft, axis=1)
    Gh = np.fft.fft(G, nfft, axis=1)
    modes = _signed_modes(N)
    row_of = {int(m): i for i, m in enumerate(modes)}
    K = round(f.tau_max / dtau)
    out = np.zeros((2 * N, L), dtype=np.complex128)
    sb = bracket(modes.astype(float)) ** s
    for i, n in enumerate(modes):
        acc = np.zeros(nfft, dtype=np.complex128)
        pref_n = abs(int(n)) * sb[i]
        touched = False
        for j, n1 in enumerate(modes):
            n2 = int(n) - int(n1)
            if n2 == 0 or abs(n2) > N:
                continue
            jj = row_of[n2]
            acc += (pref_n / (sb[j] * sb[jj])) * (Fh[j] * Gh[jj])
            touched = True
        if not touched:
            continue
        conv = np.fft.ifft(acc)[K : K + L]
        out[i] = conv * dtau
    outer = bracket(
        f.tau_grid[None, :] - modes.astype(float)[:, None] ** 3
    ) ** -0.5
    return SpaceTimeCoeffs(N, f.tau_max, dtau, out * outer)


# -------------------------------------------------------------- ratio sweep

_FAMILIES = ("out_curve_lo", "out_curve_hi", "free_curve", "random")
_SWEEP_DT = 0.5  # families and the sparse route live on the default grid


def sweep_trial_rng(seed, N, trial):
    return np.random.default_rng(np.random.SeedSequence([seed, N, trial]))


def _block_amp(n, p):
    j = int(math.floor(math.log2(abs(n))))
    return 2.0 ** (-j / p) * _SWEEP_DT ** (-1.0 / p)


def family_points(family, N, p, rng):
    """Sparse (f, g) inputs for one sweep trial, on the default grid.

    Families: free_curve puts unit-per-block mass on tau = n^3; the out_curve
    pair concentrates products onto the output curve at a low/high mode;
    random mixes curve-adjacent, resonance-translated, and uniform points.
    """
    tau_max = 4.0 * N**3

    def snap(t):
        return min(tau_max, max(-tau_max, round(t / _SWEEP_DT) * _SWEEP_DT))

    def free_curve():
        return {(int(n), float(n**3)): _block_amp(n, p) for n in _signed_modes(N)}

    if family == "free_curve":
        return free_curve(), free_curve()
    if family in ("out_curve_lo", "out_curve_hi"):
        n0 = 1 if family == "out_curve_lo" else max(1, N // 2)
        fpts = free_curve()
        gpts = {}
        for n1 in _signed_modes(N):
            n2 = n0 - int(n1)
            if n2 == 0 or abs(n2) > N:
                continue
            key = (n2, float(n0**3 - int(n1) ** 3))
            gpts[key] = gpts.get(key, 0.0) + _block_amp(n2, p)
        return fpts, gpts
    if family == "random":
        def draw():
            pts = {}
            for _ in range(40):
                n = 0
                while n == 0:
                    n = int(rng.integers(-N, N + 1))
                kind = rng.integers(0, 3)
                if kind == 0:
                    t = n**3 + int(rng.integers(-6, 7)) * _SWEEP_DT
                elif kind == 1:
                    k0 = 0
                    while k0 in (0, n):
                        k0 = int(rng.integers(-2 * N, 2 * N + 1))
                    t = n**3 - 3 * n * (n - k0) * k0
                else:
                    t = rng.uniform(-tau_max, tau_max)
                key = (n, float(snap(t)))
                amp = (rng.standard_normal() + 1j * rng.standard_normal()) * _block_amp(n, p)
                pts[key] = pts.get(key, 0.0) + amp
            return pts

        return draw(), draw()
    raise ValueError(f"unknown family {family!r}")


def _pts_arrays(pts):
    ns = np.array([k[0] for k in pts], dtype=np.int64)
    ts = np.array([k[1] for k in pts], dtype=float)
    vs = np.array([pts[k] for k in pts], dtype=np.complex128)
    return ns, ts, vs


def _sparse_input_norm(ns, ts, vs, N, p):
    """X^{0,0}_p of a sparse input: block l^p with the dtau measure."""
    blocks = np.floor(np.log2(np.abs(ns))).astype(int)
    best = 0.0
    for j in range(int(blocks.max()) + 1):
        sel = blocks == j
        if not sel.any():
            continue
        best = max(best, float(np.sum(np.abs(vs[sel]) ** p) * _SWEEP_DT) ** (1.0 / p))
    return best


def _sparse_ratio(fpts, gpts, N, s, p, params, weighted):
    n1, t1, v1 = _pts_arrays(fpts)
    n2, t2, v2 = _pts_arrays(gpts)
    tau_max = 4.0 * N**3
    w1 = resonance_weight(n1, t1, params) if weighted else np.ones(n1.size)
    w2 = resonance_weight(n2, t2, params) if weighted else np.ones(n2.size)
    a1 = v1 / (w1 * bracket(t1 - n1.astype(float) ** 3) ** 0.5)
    a2 = v2 / (w2 * bracket(t2 - n2.astype(float) ** 3) ** 0.5)

    # all cross pairs
    n_out = n1[:, None] + n2[None, :]
    t_out = t1[:, None] + t2[None, :]
    prod = a1[:, None] * a2[None, :]
    keep = (n_out != 0) & (np.abs(n_out) <= N) & (np.abs(t_out) <= tau_max)
    n_out, t_out, prod = n_out[keep], t_out[keep], prod[keep]
    nn1 = np.broadcast_to(n1[:, None], keep.shape)[keep]
    mult = (
        np.abs(n_out)
        * bracket(n_out) ** s
        / (bracket(nn1) ** s * bracket(n_out - nn1) ** s)
    )
    prod = prod * mult
    if n_out.size == 0:
        return 0.0

    # aggregate coincident output points before any norm is taken
    Lcols = 2 * round(tau_max / _SWEEP_DT) + 1
    rows = np.where(n_out < 0, n_out + N, N + n_out - 1).astype(np.int64)
    cols = np.rint((t_out + tau_max) / _SWEEP_DT).astype(np.int64)
    key = rows * Lcols + cols
    uniq, inv = np.unique(key, return_inverse=True)
    agg = np.zeros(uniq.size, dtype=np.complex128)
    np.add.at(agg, inv, prod)
    agg *= _SWEEP_DT  # tau-convolution measure
    u_rows = uniq // Lcols
    u_cols = uniq % Lcols
    u_n = np.where(u_rows < N, u_rows - N, u_rows - N + 1)
    u_t = -tau_max + u_cols * _SWEEP_DT
    mod = bracket(u_t - u_n.astype(float) ** 3)

    # weighted norm of the composition without its outer factor: X-part uses
    # w(n,tau)<tau-n^3>^{-1/2}, the companion part uses <tau-n^3>^{-1} with L^1
    w_out = resonance_weight(u_n, u_t, params)
    x_vals = np.abs(agg) * w_out * mod**-0.5
    y_vals = np.abs(agg) * mod**-1.0
    blocks = np.floor(np.log2(np.abs(u_n))).astype(int)
    x_part = 0.0
    y_part = 0.0
    for j in range(int(blocks.max()) + 1):
        sel = blocks == j
        if not sel.any():
            continue
        x_part = max(x_part, float(np.sum(x_vals[sel] ** p) * _SWEEP_DT) ** (1.0 / p))
        # inner L^1 over tau per mode, then l^p across the block
        rows_j = u_n[sel]
        vals_j = y_vals[sel]
        per_mode = {}
        for m, v in zip(rows_j.tolist(), vals_j.tolist()):
            per_mode[m] = per_mode.get(m, 0.0) + v * _SWEEP_DT
        y_part = max(y_part, float(sum(v**p for v in per_mode.values()) ** (1.0 / p)))
    num = x_part + y_part
    den = _sparse_input_norm(n1, t1, v1, N, p) * _sparse_input_norm(n2, t2, v2, N, p)
    return num / den


def bilinear_ratio_sweep(s, p, params, N_list, trials, seed, weighted=True):
    """Max-ratio table over seeded trial families, one row per (N, trial)."""
    rows = []
    for N in N_list:
        for trial in range(trials):
            family = _FAMILIES[trial % len(_FAMILIES)]
            rng = sweep_trial_rng(seed, N, trial)
            fpts, gpts = family_points(family, N, p, rng)
            ratio = _sparse_ratio(fpts, gpts, N, s, p, params, weighted)
            rows.append(
                {"N": int(N), "trial": int(trial), "family": family, "ratio": float(ratio)}
            )
    return rows


# ------------------------------------------------------------ lemma oracles

def bracket_product_integral(alpha, beta, a, eps=0.01):
    """Quadrature of integral <tau>^-2a <tau-a>^-2b dtau and its decay ratio.

    The comparison exponent is gamma = 2*alpha - [1-2*beta]_+, where the
    bracket [x]_+ means x when positive, eps when exactly 0 (the "0+" case),
    and 0 when negative. Returns (value, value * <a>^gamma).
    """
    if not 0 <= alpha <= beta:
        raise ValueError("need 0 <= alpha <= beta")
    if not alpha + beta > 0.5:
        raise ValueError("need alpha + beta > 1/2")
    ta, tb = 2.0 * alpha, 2.0 * beta
    nu = ta + tb - 1.0
    aa = abs(float(a))  # symmetric in the sign of the offset

    def fn(t):
        return bracket(t) ** -ta * bracket(t - aa) ** -tb

    def tail_from(T, c):
        # integral_T^inf <t>^-ta <t-c>^-tb dt with T > c, substituted
        # u = t^-nu; the new integrand is bounded and smooth near u = 0,
        # which plain infinite-interval quadrature is not when nu is small
        def g(u):
            lt = -math.log(u) / nu
            if lt > 300.0:
                return 1.0 / nu
            t = math.exp(lt)
            return (t / (1.0 + t)) ** ta * (t / (1.0 + t - c)) ** tb / nu

        part, _ = quad(g, 0.0, T**-nu, limit=400, epsabs=1e-13, epsrel=1e-11)
        return part

    L = max(4.0 * aa, 16.0)
    R0 = aa + L
    segs = [(-L, 0.0), (0.0, aa), (aa, R0)] if aa > 0 else [(-L, R0)]
    value = 0.0
    for lo, hi in segs:
        part, _ = quad(fn, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-11)
        value += part
    value += tail_from(R0, aa) + tail_from(L, -aa)
    x = 1.0 - 2.0 * beta
    if x > 1e-12:
        loss = x
    elif x >= -1e-12:
        loss = eps
    else:
        loss = 0.0
    gamma = 2.0 * alpha - loss
    return value, value * bracket(a) ** gamma


def quadratic_bracket_sum(n, lam, l1, l2, cutoff):
    """Sum over n1 of <n1>^-l1 <lam + n1(n-n1)>^-l2, with a tail bound.

    The tail bound covers everything beyond the cutoff and is rigorous once
    cutoff >= 2(|n| + sqrt|lam| + 2); below that it is reported as inf.
    """
    if not (l1 > 0 and l2 > 0):
        raise ValueError("exponents must be positive")
    if not l1 + 2 * l2 > 1:
        raise ValueError("need l1 + 2*l2 > 1")
    cutoff = int(cutoff)
    total = 0.0
    chunk = 10**6
    for lo in range(-cutoff, cutoff + 1, chunk):
        n1 = np.arange(lo, min(lo + chunk, cutoff + 1), dtype=float)
        mask = (n1 != 0) & (n1 != n)
        n1 = n1[mask]
        total += float(
            np.sum(
                bracket(n1) ** (-l1) * bracket(lam + n1 * (n - n1)) ** (-l2)
            )
        )
    decay = l1 + 2 * l2
    if cutoff >= 2 * (abs(n) + math.sqrt(abs(lam)) + 2):
        tail = 2.0 * 4.0**l2 * cutoff ** (1.0 - decay) / (decay - 1.0)
    else:
        tail = math.inf
    return total, tail


def _bracket_antideriv(eta, e):
    """Signed antiderivative of <eta>^-e."""
    eta = np.asarray(eta, dtype=float)
    if e == 1.0:
        return np.sign(eta) * np.log1p(np.abs(eta))
    return np.sign(eta) * ((1.0 + np.abs(eta)) ** (1.0 - e) - 1.0) / (1.0 - e)


def resonance_set_integral(n, exponent, c0=1.0, n1_max=10**4):
    """integral of <eta>^-exponent over the union of resonance windows.

    The set unions, over n1 not in {0, n}, the intervals of half-width
    c0*<n*n1*(n-n1)>^(1/100) centered at -3*n*n1*(n-n1).
    """
    if n == 0:
        raise ValueError("n must be nonzero")
    if c0 == 0.0:
        return 0.0
    n1 = np.arange(-n1_max, n1_max + 1, dtype=float)
    n1 = n1[(n1 != 0) & (n1 != n)]
    prod = n * n1 * (n - n1)
    centers = -3.0 * prod
    half = c0 * bracket(prod) ** 0.01
    lefts = centers - half
    rights = centers + half
    order = np.argsort(lefts)
    lefts, rights = lefts[order], rights[order]
    run_max = np.maximum.accumulate(rights)
    new_group = np.empty(lefts.size, dtype=bool)
    new_group[0] = True
    new_group[1:] = lefts[1:] > run_max[:-1]
    starts = np.flatnonzero(new_group)
    ends = np.append(starts[1:], lefts.size) - 1
    merged_l = lefts[starts]
    merged_r = run_max[ends]
    return float(
        np.sum(_bracket_antideriv(merged_r, exponent) - _bracket_antideriv(merged_l, exponent))
    )


# -------------------------------------------------------- time localization

_BUMP_NODES = 4097


def _smoothstep(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", divide="ignore"):
        lo = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        hi = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, lo / (lo + hi)))


def bump(t):
    """Smooth even cutoff: 1 on |t| <= 1/2, 0 outside |t| < 1."""
    at = np.abs(np.asarray(t, dtype=float))
    val = _smoothstep(2.0 * (1.0 - at))
    out = np.where(at <= 0.5, 1.0, np.where(at >= 1.0, 0.0, val))
    return float(out) if np.isscalar(t) else out


_bump_cache = None


def _bump_quadrature():
    global _bump_cache
    if _bump_cache is None:
        t = np.linspace(0.0, 1.0, _BUMP_NODES)
        w = np.full(_BUMP_NODES, t[1] - t[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        _bump_cache = (t, bump(t) * w)
    return _bump_cache


def bump_transform(xi):
    """Real, even frequency profile of the cutoff: 2 * int_0^1 bump(t) cos(xi t) dt."""
    t, bw = _bump_quadrature()
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty(xi_arr.size)
    chunk = 2048
    for lo in range(0, xi_arr.size, chunk):
        seg = xi_arr[lo : lo + chunk]
        out[lo : lo + chunk] = 2.0 * (np.cos(np.outer(seg, t)) @ bw)
    return float(out[0]) if np.isscalar(xi) else out.reshape(np.shape(xi))


def time_localization_check(f, T, s, p):
    """Ratio of the time-localized flat-modulation norm to its predicted size.

    Multiplication by the dilated cutoff acts as tau-convolution against its
    transform; the result's X^{s,0}_p norm is compared against
    T^{1/p} * X^{s,1/2}_p of the input. Returns 0 for zero input.
    """
    den = T ** (1.0 / p) * bourgain_norm(f, s, 0.5, p)
    if den == 0.0:
        return 0.0
    L = f.L
    diffs = (np.arange(2 * L - 1) - (L - 1)) * f.dtau
    ker = (2.0 * T / (2.0 * np.pi)) * bump_transform(2.0 * T * diffs)
    from scipy.signal import fftconvolve

    conv = fftconvolve(f.values, ker[None, :], mode="full", axes=1)[:, L - 1 : 2 * L - 1]
    loc = SpaceTimeCoeffs(f.N, f.tau_max, f.dtau, conv * f.dtau)
    return bourgain_norm(loc, s, 0.0, p) / den
