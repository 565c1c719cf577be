"""Finite-difference and Fourier derivatives of gridded data.

Strong-form feature evaluation and the low-order inner derivatives of
nonlinear weak-form integrands both come through here.  No smoothing or
denoising is applied before differentiation.
"""

from __future__ import annotations

import numpy as np

from .data import GridDataset


def fd_weights(m: int, x0: float, nodes) -> np.ndarray:
    """Fornberg weights for the m-th derivative at x0 from arbitrary nodes."""
    nodes = np.asarray(nodes, dtype=np.float64)
    n = len(nodes)
    if n < m + 1:
        raise ValueError("need at least m+1 nodes")
    c = np.zeros((n, m + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = nodes[0] - x0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


# interior central stencils, second-order accurate; weights are exact dyadic
# rationals so the derivative of a constant is exactly zero
_CENTRAL_OFFSETS = {1: (-1, 0, 1), 2: (-1, 0, 1), 3: (-2, -1, 0, 1, 2), 4: (-2, -1, 0, 1, 2)}
_CENTRAL_WEIGHTS = {
    1: (-0.5, 0.0, 0.5),
    2: (1.0, -2.0, 1.0),
    3: (-0.5, 1.0, 0.0, -1.0, 0.5),
    4: (1.0, -4.0, 6.0, -4.0, 1.0),
}


def central_diff(field, axis: int, order: int, spacing: float, periodic: bool) -> np.ndarray:
    """Second-order central differences along one axis.

    Periodic axes wrap around; otherwise one-sided second-order stencils
    fill in near the boundary.
    """
    field = np.asarray(field, dtype=np.float64)
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    if axis < -field.ndim or axis >= field.ndim:
        raise ValueError("axis out of range")
    axis = axis % field.ndim
    n = field.shape[axis]
    if n < order + 2:
        raise ValueError(f"too few samples along axis ({n}) for order {order}")

    offsets = _CENTRAL_OFFSETS[order]
    w = np.array(_CENTRAL_WEIGHTS[order]) / spacing**order
    moved = np.moveaxis(field, axis, 0)
    out = np.zeros_like(moved)

    if periodic:
        for off, wk in zip(offsets, w):
            if wk != 0.0:
                out += wk * np.roll(moved, -off, axis=0)
    else:
        half = max(abs(o) for o in offsets)
        for off, wk in zip(offsets, w):
            if wk != 0.0:
                out[half : n - half] += wk * moved[half + off : n - half + off]
        # one-sided second-order stencils at each boundary row
        width = order + 2
        for i in range(half):
            wl = fd_weights(order, 0.0, np.arange(width) - i) / spacing**order
            out[i] = np.tensordot(wl, moved[:width], axes=(0, 0))
            wr = fd_weights(order, 0.0, np.arange(-width + 1, 1) + i) / spacing**order
            out[n - 1 - i] = np.tensordot(wr, moved[n - width :], axes=(0, 0))
    return np.moveaxis(out, 0, axis)


def spectral_diff(field, axis: int, order: int, domain_length: float) -> np.ndarray:
    """Fourier-collocation derivative on a periodic axis.

    Exact for band-limited fields up to rounding.  The Nyquist mode is
    zeroed for odd derivative orders (its derivative is not representable
    on the grid).
    """
    field = np.asarray(field, dtype=np.float64)
    if not 1 <= order <= 4:
        raise ValueError("order must be in 1..4")
    if domain_length <= 0:
        raise ValueError("domain_length must be positive")
    axis = axis % field.ndim
    n = field.shape[axis]
    if n < 4:
        raise ValueError("need at least 4 samples for a spectral derivative")
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=1.0 / n) / domain_length
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[-1] = 0.0
    shape = [1] * field.ndim
    shape[axis] = len(k)
    fh = np.fft.rfft(field, axis=axis)
    out = np.fft.irfft(fh * mult.reshape(shape), n=n, axis=axis)
    return out


def time_derivative(d: GridDataset, component: int) -> np.ndarray:
    """du/dt on the full grid: central interior, one-sided second order at
    the two temporal endpoints."""
    if d.n_time < 3:
        raise ValueError("fewer than 3 time samples")
    return central_diff(d.component(component), axis=-1, order=1, spacing=d.dt, periodic=False)


def dataset_derivative(d: GridDataset, component: int, deriv, backend: str = "central") -> np.ndarray:
    """Spatial derivative of one component per the multi-index ``deriv``.

    backend "central" uses finite differences everywhere; "spectral" uses
    Fourier differentiation on periodic axes (and falls back to central on
    non-periodic ones).
    """
    if d.kind == "ensemble":
        raise ValueError("trajectory ensembles carry no spatial derivatives")
    arr = d.component(component)
    for ax, order in enumerate(deriv):
        if order == 0:
            continue
        if backend == "spectral" and d.periodic[ax]:
            length = d.dx[ax] * arr.shape[ax]
            arr = spectral_diff(arr, axis=ax, order=order, domain_length=length)
        else:
            arr = central_diff(arr, axis=ax, order=order, spacing=d.dx[ax], periodic=d.periodic[ax])
    return arr
