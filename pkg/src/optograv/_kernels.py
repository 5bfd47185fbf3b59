"""Hot loop of the time-domain simulation: x_{n+1} = Phi x_n + c + g xi_n.

Two interchangeable backends:

* ``numba``: a compiled per-step loop.
* ``numpy``: block evaluation of the same recurrence, with the noise
  convolution done by FFT against precomputed impulse responses Phi^k g.

Set ``OPTOGRAV_DISABLE_NUMBA=1`` to force the numpy path (also used when numba
is not importable). Both consume the same noise sequence, so they agree to
rounding.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba as nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    nb = None
    HAVE_NUMBA = False

_ENV_FLAG = "OPTOGRAV_DISABLE_NUMBA"


def default_backend() -> str:
    if os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on"):
        return "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


def resolve_backend(name: str | None) -> str:
    if name is None:
        return default_backend()
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not installed")
    return name


# --------------------------------------------------------------------------
# numba


def _propagate_py(phi, c, g, state, noise, start, burn, stride, rec):
    """Advance ``state`` in place over ``len(noise)`` steps.

    Returns (n_recorded, sum_x, sum_x2, n_stats, bad_step); bad_step is -1
    when every state stayed finite.
    """
    n_rec = 0
    s1 = 0.0
    s2 = 0.0
    n_stat = 0
    x0, x1, x2, x3 = state[0], state[1], state[2], state[3]
    for j in range(noise.shape[0]):
        xi = noise[j]
        y0 = phi[0, 0] * x0 + phi[0, 1] * x1 + phi[0, 2] * x2 + phi[0, 3] * x3 + c[0] + g[0] * xi
        y1 = phi[1, 0] * x0 + phi[1, 1] * x1 + phi[1, 2] * x2 + phi[1, 3] * x3 + c[1] + g[1] * xi
        y2 = phi[2, 0] * x0 + phi[2, 1] * x1 + phi[2, 2] * x2 + phi[2, 3] * x3 + c[2] + g[2] * xi
        y3 = phi[3, 0] * x0 + phi[3, 1] * x1 + phi[3, 2] * x2 + phi[3, 3] * x3 + c[3] + g[3] * xi
        x0, x1, x2, x3 = y0, y1, y2, y3
        idx = start + j + 1
        if idx >= burn:
            s1 += x0
            s2 += x0 * x0
            n_stat += 1
        if idx % stride == 0:
            if not (np.isfinite(x0) and np.isfinite(x1) and np.isfinite(x2) and np.isfinite(x3)):
                state[0], state[1], state[2], state[3] = x0, x1, x2, x3
                return n_rec, s1, s2, n_stat, idx
            rec[n_rec, 0] = x0
            rec[n_rec, 1] = x1
            rec[n_rec, 2] = x2
            rec[n_rec, 3] = x3
            n_rec += 1
    state[0], state[1], state[2], state[3] = x0, x1, x2, x3
    bad = -1
    if not (np.isfinite(x0) and np.isfinite(x1) and np.isfinite(x2) and np.isfinite(x3)):
        bad = start + noise.shape[0]
    return n_rec, s1, s2, n_stat, bad


if HAVE_NUMBA:
    _propagate_nb = nb.njit(cache=True, nogil=True, fastmath=False)(_propagate_py)
else:  # pragma: no cover
    _propagate_nb = _propagate_py


# --------------------------------------------------------------------------
# numpy


class _BlockPropagator:
    def __init__(self, phi, c, g, block=8192):
        self.block = block
        n = phi.shape[0]
        P = np.empty((block + 1, n, n))
        P[0] = np.eye(n)
        for k in range(1, block + 1):
            P[k] = P[k - 1] @ phi
        self.P = P
        self.H = P[:block] @ g  # H[k] = Phi^k g
        C = np.zeros((block + 1, n))
        Pc = P[:block] @ c
        C[1:] = np.cumsum(Pc, axis=0)  # C[k] = sum_{i<k} Phi^i c
        self.C = C
        self.nfft = 1 << int(np.ceil(np.log2(2 * block)))
        self.Hf = np.fft.rfft(self.H, n=self.nfft, axis=0)

    def run(self, state, noise, start, burn, stride, rec):
        n_rec = 0
        s1 = s2 = 0.0
        n_stat = 0
        pos = 0
        while pos < noise.shape[0]:
            K = min(self.block, noise.shape[0] - pos)
            xi = noise[pos:pos + K]
            conv = np.fft.irfft(self.Hf * np.fft.rfft(xi, n=self.nfft)[:, None], n=self.nfft, axis=0)[:K]
            X = self.P[1:K + 1] @ state + conv + self.C[1:K + 1]
            idx = start + pos + np.arange(1, K + 1)
            finite = np.isfinite(X).all(axis=1)
            if not finite.all():
                state[:] = X[np.argmin(finite)]
                return n_rec, s1, s2, n_stat, int(idx[np.argmin(finite)])
            m = idx >= burn
            if m.any():
                xs = X[m, 0]
                s1 += float(xs.sum())
                s2 += float(xs @ xs)
                n_stat += int(m.sum())
            r = idx % stride == 0
            nr = int(r.sum())
            if nr:
                rec[n_rec:n_rec + nr] = X[r]
                n_rec += nr
            state[:] = X[-1]
            pos += K
        return n_rec, s1, s2, n_stat, -1


class Propagator:
    """Chunked driver for the linear stochastic recurrence on one backend."""

    def __init__(self, phi, c, g, backend: str | None = None):
        self.backend = resolve_backend(backend)
        self.phi = np.ascontiguousarray(phi, dtype=np.float64)
        self.c = np.ascontiguousarray(c, dtype=np.float64)
        self.g = np.ascontiguousarray(g, dtype=np.float64)
        self._block = _BlockPropagator(self.phi, self.c, self.g) if self.backend == "numpy" else None

    def run(self, state, noise, start, burn, stride, rec):
        if self.backend == "numba":
            return _propagate_nb(self.phi, self.c, self.g, state, noise, start, burn, stride, rec)
        return self._block.run(state, noise, start, burn, stride, rec)
