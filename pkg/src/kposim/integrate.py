"""Adaptive embedded Runge-Kutta integration (Dormand-Prince 5(4)).

Works on complex arrays of arbitrary shape. Step size is governed by a PI
controller on the embedded error estimate plus a hard cap tied to the
spectral radius of the generator: the propagating solution's stability
polynomial satisfies |R(i y)| <= 1 only for y <= 1, and beyond that the
high-frequency components grow slowly even while the error estimate looks
acceptable (their amplitudes are tiny), so pure error control would let
long integrations diverge. Callers pass max_step = 1 / spectral_radius.

The stage loop reuses preallocated buffers; the right-hand side is the only
per-stage allocation left to the caller.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

try:  # BLAS thread fan-out costs more than it buys at these matrix sizes
    from threadpoolctl import threadpool_limits

    def _single_thread_blas():
        return threadpool_limits(limits=1)

except ImportError:  # pragma: no cover

    def _single_thread_blas():
        return nullcontext()


from .errors import StiffnessError

__all__ = ["adaptive_rk", "RkStats"]

# Dormand-Prince 5(4) tableau (FSAL: stage 7 of an accepted step is stage 1
# of the next). Stored complex so the stage contractions stay in one dtype.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([], dtype=complex),
    np.array([1 / 5], dtype=complex),
    np.array([3 / 40, 9 / 40], dtype=complex),
    np.array([44 / 45, -56 / 15, 32 / 9], dtype=complex),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729], dtype=complex),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656], dtype=complex),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84], dtype=complex),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0], dtype=complex)
_E = _B5 - np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40],
    dtype=complex,
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


@dataclass
class RkStats:
    steps: int = 0
    rejected: int = 0
    rhs_evals: int = 0


def adaptive_rk(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_span: tuple[float, float],
    tol: float = 1e-8,
    sample_times: Sequence[float] | None = None,
    max_step: float = np.inf,
    max_steps: int = 5_000_000,
    post_accept: Callable[[np.ndarray], np.ndarray] | None = None,
) -> tuple[np.ndarray, list[np.ndarray], RkStats]:
    """Integrate dy/dt = rhs(t, y) over t_span, returning y at sample_times.

    sample_times must be sorted and lie inside t_span; the step size is
    clamped so each sample is hit exactly (no dense-output interpolation).
    If sample_times is None only the final state is returned. post_accept,
    when given, maps the state (in its original shape) after every accepted
    step; it is where structure projections (e.g. Hermitization) belong.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError(f"backwards integration not supported: {t_span}")
    if sample_times is None:
        samples = np.array([t1])
    else:
        samples = np.asarray(sample_times, dtype=float)
        if samples.size and (
            np.any(np.diff(samples) < 0)
            or samples[0] < t0 - 1e-12
            or samples[-1] > t1 + 1e-12
        ):
            raise ValueError("sample_times must be sorted and within t_span")

    shape = y0.shape
    y = np.asarray(y0, dtype=complex).ravel().copy()
    n = y.size
    stats = RkStats()
    out: list[np.ndarray] = []
    si = 0
    t = t0
    span = t1 - t0
    tiny = 1e-14 * max(1.0, abs(t1))

    while si < samples.size and samples[si] <= t0 + tiny:
        out.append(y.reshape(shape).copy())
        si += 1
    if span == 0.0 or si >= samples.size:
        while si < samples.size:
            out.append(y.reshape(shape).copy())
            si += 1
        return samples, out, stats

    def f(tt: float, yy: np.ndarray, into: np.ndarray) -> None:
        stats.rhs_evals += 1
        into[:] = np.asarray(rhs(tt, yy.reshape(shape))).ravel()

    k = np.empty((7, n), dtype=complex)
    yi = np.empty(n, dtype=complex)
    y_new = np.empty(n, dtype=complex)
    err_c = np.empty(n, dtype=complex)
    wrk = np.empty(n, dtype=float)
    wrk2 = np.empty(n, dtype=float)

    with _single_thread_blas():
        _integrate(f, y, k, yi, y_new, err_c, wrk, wrk2, t0, t1, samples, out, shape,
                   tol, max_step, max_steps, stats, si, tiny, post_accept)
    return samples, out, stats


def _integrate(f, y, k, yi, y_new, err_c, wrk, wrk2, t0, t1, samples, out, shape,
               tol, max_step, max_steps, stats, si, tiny, post_accept):
    t = t0
    f(t, y, k[0])
    h = min(max_step, (t1 - t0) / 100.0, 1e-3)
    err_prev = 1.0

    while t < t1 - tiny:
        if stats.steps >= max_steps:
            raise StiffnessError(f"step budget {max_steps} exhausted at t = {t:g}")
        h = min(h, max_step, t1 - t)
        target = samples[si] if si < samples.size else t1
        clamped = False
        if t + h >= target - tiny:
            h = target - t
            clamped = True
        if h < tiny:
            raise StiffnessError(f"step size underflow at t = {t:g}")

        for i in range(1, 7):
            np.dot(_A[i], k[:i], out=yi)
            yi *= h
            yi += y
            f(t + _C[i] * h, yi, k[i])
        np.dot(_B5, k, out=y_new)
        y_new *= h
        y_new += y
        np.dot(_E, k, out=err_c)
        err_c *= h

        np.abs(y, out=wrk)
        np.abs(y_new, out=wrk2)
        np.maximum(wrk, wrk2, out=wrk)   # scale/tol - 1
        wrk += 1.0
        np.abs(err_c, out=wrk2)
        wrk2 /= wrk
        # max norm, not RMS: averaging would hide localized errors in the
        # handful of fast-rotating components fed by dephasing heating
        err = float(np.max(wrk2)) / tol
        stats.steps += 1

        if err <= 1.0:
            t += h
            y, y_new = y_new, y
            if post_accept is not None:
                y[:] = np.asarray(post_accept(y.reshape(shape))).ravel()
            k[0] = k[6]
            if clamped and si < samples.size and abs(t - samples[si]) <= tiny:
                out.append(y.reshape(shape).copy())
                si += 1
            factor = _SAFETY * (err + 1e-30) ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
            err_prev = max(err, 1e-4)
            h *= min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        else:
            stats.rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err ** (-0.2))

    while si < samples.size:
        out.append(y.reshape(shape).copy())
        si += 1
