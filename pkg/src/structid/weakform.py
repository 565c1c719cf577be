"""Weak-form assembly over compactly supported polynomial bump test functions.

Each subdomain carries a separable test function psi(x, t) = prod_axis
(1 - s^2)^p with s in [-1, 1] mapped across the subdomain.  Multiplying the
dynamics by psi and integrating by parts moves derivatives off the noisy
data: the time derivative always moves (target entries are -integral of
u psi_t), flux and variational entries move their outer spatial derivatives,
and linear terms move everything.  Integrals are tensor-product trapezoid
sums on the existing grid nodes, evaluated as separable correlations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy import ndimage

from .algebra import Monomial, evaluate_monomial, monomial
from .data import GridDataset, LinearSystem, build_linear_system
from .dictionary import Dictionary
from .differentiate import dataset_derivative


def quadrature_weights(n_points: int, spacing: float) -> np.ndarray:
    """Composite trapezoid weights: spacing/2 at the ends, spacing inside."""
    if n_points < 2:
        raise ValueError("need at least 2 quadrature points")
    w = np.full(n_points, float(spacing))
    w[0] = w[-1] = 0.5 * spacing
    return w


def bump_derivative(p: int, order: int, s: np.ndarray) -> np.ndarray:
    """d^order/ds^order of (1 - s^2)^p, evaluated in the factored form
    (1 - s^2)^(p - order) * Q(s) so transferred derivatives vanish exactly
    at s = +-1."""
    if order > p:
        raise ValueError("derivative order exceeds bump exponent")
    q = np.array([1.0])  # Q_0 = 1
    for m in range(order):
        # d/ds [(1-s^2)^k Q] = (1-s^2)^(k-1) [ -2 k s Q + (1-s^2) Q' ]
        k = p - m
        term1 = -2.0 * k * npoly.polymulx(q)
        term2 = npoly.polymul(np.array([1.0, 0.0, -1.0]), npoly.polyder(q))
        q = npoly.polyadd(term1, term2)
    env = (1.0 - s * s) ** (p - order)
    return env * npoly.polyval(s, q)


@dataclass(frozen=True)
class TestFunctionFamily:
    """Separable bump family on a lattice of identical subdomains.

    Axis order is (space..., time); trajectory ensembles have a single time
    axis.  centers holds per-axis center indices; the subdomain at lattice
    position (i0, ..., it) spans +-half_widths around each center.
    """

    exponents: tuple[int, ...]
    half_widths: tuple[int, ...]
    centers: tuple[tuple[int, ...], ...]
    spacings: tuple[float, ...]
    periodic: tuple[bool, ...]
    max_transfer: tuple[int, ...]

    def __post_init__(self):
        for p, t in zip(self.exponents, self.max_transfer):
            if p < t + 1:
                raise ValueError("bump exponent must exceed the transferred order")

    @property
    def n_axes(self) -> int:
        return len(self.exponents)

    @property
    def n_subdomains(self) -> int:
        out = 1
        for c in self.centers:
            out *= len(c)
        return out

    def kernel(self, axis: int, order: int) -> np.ndarray:
        """Quadrature-weighted psi derivative samples along one axis."""
        if order > self.exponents[axis] - 1 and order > 0:
            raise ValueError("transfer plan infeasible for this bump exponent")
        h = self.half_widths[axis]
        s = np.arange(-h, h + 1) / h
        half_phys = h * self.spacings[axis]
        vals = bump_derivative(self.exponents[axis], order, s) / half_phys**order
        return vals * quadrature_weights(2 * h + 1, self.spacings[axis])


def _center_lattice(n: int, half: int, count: int, periodic: bool) -> tuple[int, ...]:
    if 2 * half + 1 > n:
        raise ValueError(f"subdomain of {2*half+1} points does not fit a {n}-point axis")
    if periodic:
        count = min(count, n)
        idx = (np.arange(count) * n) // count
    else:
        lo, hi = half, n - 1 - half
        count = min(count, hi - lo + 1)
        if count == 1:
            idx = np.array([(lo + hi) // 2])
        else:
            idx = np.unique(np.round(np.linspace(lo, hi, count)).astype(int))
    return tuple(int(i) for i in idx)


def make_test_family(
    d: GridDataset,
    half_widths=None,
    n_centers=None,
    max_transfer=None,
    exponents=None,
) -> TestFunctionFamily:
    """Uniform overlapping subdomain lattice with per-axis bump exponents.

    Defaults: half-widths 25 grid points in space and 20 steps in time,
    40 centers per axis (clipped to fit), transfer budget 4 in space and 1 in
    time, exponent = transfer + 3.
    """
    n_space = d.n_space_axes
    shape = d.spatial_shape if d.kind == "field" else ()
    sizes = tuple(shape) + (d.n_time,)
    spacings = tuple(d.dx[:n_space]) + (d.dt,) if d.kind == "field" else (d.dt,)
    periodic = (tuple(d.periodic) if d.kind == "field" else ()) + (False,)
    n_axes = len(sizes)

    if half_widths is None:
        half_widths = (25,) * n_space + (20,)
    if n_centers is None:
        n_centers = (40,) * n_axes
    if max_transfer is None:
        max_transfer = (4,) * n_space + (1,)
    if exponents is None:
        exponents = tuple(t + 3 for t in max_transfer)

    centers = tuple(
        _center_lattice(sizes[a], half_widths[a], n_centers[a], periodic[a])
        for a in range(n_axes)
    )
    return TestFunctionFamily(
        exponents=tuple(exponents),
        half_widths=tuple(half_widths),
        centers=centers,
        spacings=spacings,
        periodic=periodic,
        max_transfer=tuple(max_transfer),
    )


# --------------------------------------------------------------------------
# Transfer plans
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakContribution:
    """One correlation: const * integral( integrand * d^psi_orders psi )."""

    const: float
    psi_orders: tuple[int, ...]  # spatial derivative orders applied to psi
    integrand: Monomial          # normalized (const folded into `const`)
    data_order: int              # highest derivative computed from data


@dataclass(frozen=True)
class WeakPlan:
    """Integration-by-parts split for every term row of a dictionary."""

    contributions: tuple[tuple[tuple[int, tuple[WeakContribution, ...]], ...], ...]
    max_space_transfer: int

    def term_rows(self, j: int):
        return self.contributions[j]


def flux_rewrite(m: Monomial, n_axes: int):
    """Try to write a monomial as an exact single derivative (g)_x.

    const * w^k * w_a with w some derivative of one component rewrites to
    (const/(k+1) * w^(k+1))_a, lowering the derivative order applied to
    noisy data by one.  Returns (axis, inner monomial, const) or None.
    """
    if m.inv or not m.factors:
        return None
    orders = [sum(f.deriv) for f in m.factors]
    dmax = max(orders)
    if dmax == 0:
        return None
    top = [f for f in m.factors if sum(f.deriv) == dmax]
    if len(top) != 1 or top[0].power != 1:
        return None
    top = top[0]
    axes = [a for a, o in enumerate(top.deriv) if o]
    if len(axes) != 1:
        return None
    axis = axes[0]
    lower = tuple(o - 1 if a == axis else o for a, o in enumerate(top.deriv))
    k = 0
    for f in m.factors:
        if f is top:
            continue
        if f.component != top.component or tuple(f.deriv) != lower:
            return None
        k += f.power
    inner = monomial(1.0, (type(top)(top.component, lower, k + 1),))
    return axis, inner, m.const / (k + 1)


def _normalize(m: Monomial) -> tuple[Monomial, float]:
    return Monomial(1.0, m.factors, m.inv), m.const


def build_weak_plan(dictionary: Dictionary) -> WeakPlan:
    n_axes = dictionary.n_space_axes
    all_terms = []
    max_transfer = 0
    for term in dictionary.terms:
        rows = []
        for comp, pieces in term.rows:
            contribs = []
            for piece in pieces:
                outer = piece.outer if piece.outer else (0,) * n_axes
                for m in piece.inner:
                    contribs.append(_plan_monomial(m, outer, n_axes))
            rows.append((comp, tuple(contribs)))
        for _, cs in rows:
            for c in cs:
                max_transfer = max(max_transfer, max(c.psi_orders, default=0))
        all_terms.append(tuple(rows))
    return WeakPlan(tuple(all_terms), max_transfer)


def _plan_monomial(m: Monomial, outer, n_axes: int) -> WeakContribution:
    total_outer = sum(outer)
    if m.is_linear_state():
        f = m.factors[0]
        psi = tuple(o + dv for o, dv in zip(outer, f.deriv)) if n_axes else ()
        moved = sum(psi)
        bare = Monomial(1.0, ((type(f)(f.component, (0,) * n_axes, 1)),), ())
        return WeakContribution((-1.0) ** moved * m.const, psi, bare, 0)
    if total_outer > 0:
        norm, const = _normalize(m)
        return WeakContribution((-1.0) ** total_outer * const, tuple(outer), norm, norm_order(norm))
    rw = flux_rewrite(m, n_axes)
    if rw is not None:
        axis, inner, const = rw
        psi = tuple(1 if a == axis else 0 for a in range(n_axes))
        norm, c2 = _normalize(inner)
        return WeakContribution(-const * c2, psi, norm, norm_order(norm))
    norm, const = _normalize(m)
    return WeakContribution(const, (0,) * n_axes, norm, norm_order(norm))


def norm_order(m: Monomial) -> int:
    return max((sum(f.deriv) for f in m.factors), default=0)


# --------------------------------------------------------------------------
# Subdomain correlation engine
# --------------------------------------------------------------------------


def _time_contract(field: np.ndarray, centers_t, kt: np.ndarray) -> np.ndarray:
    h = (len(kt) - 1) // 2
    idx = np.asarray(centers_t)[:, None] + np.arange(-h, h + 1)[None, :]
    return field[..., idx] @ kt  # (..., K)


def subdomain_integrals(
    field: np.ndarray,
    fam: TestFunctionFamily,
    space_orders,
    time_order: int,
) -> np.ndarray:
    """integral of field * (d^space_orders_x d^time_order_t psi) over every
    subdomain, flattened in lattice order (axis-0 major, time minor)."""
    kt = fam.kernel(fam.n_axes - 1, time_order)
    g = _time_contract(field, fam.centers[-1], kt)
    for axis, order in enumerate(space_orders):
        k = fam.kernel(axis, order)
        mode = "wrap" if fam.periodic[axis] else "constant"
        g = ndimage.correlate1d(g, k, axis=axis, mode=mode)
        g = np.take(g, fam.centers[axis], axis=axis)
    return g.reshape(-1)


def weak_target(d: GridDataset, fam: TestFunctionFamily, component: int) -> np.ndarray:
    """-integral of u psi_t per subdomain (time derivative moved onto psi);
    for ensembles the integral runs along each trajectory, trajectory-major."""
    field = d.component(component)
    if d.kind == "ensemble":
        kt = fam.kernel(0, 1)
        return -_time_contract(field, fam.centers[0], kt).reshape(-1)
    return -subdomain_integrals(field, fam, (0,) * d.n_space_axes, 1)


def evaluate_weak(
    dictionary: Dictionary,
    d: GridDataset,
    fam: TestFunctionFamily,
    backend: str = "central",
) -> LinearSystem:
    """Assemble the weak-form linear system.

    Rows run subdomain-major (trajectory-major for ensembles), target
    component minor.  Columns are normalized with scales recorded.
    """
    if dictionary.n_components > d.n_components:
        raise ValueError("dictionary references components absent from the dataset")
    if d.kind == "ensemble" and dictionary.n_space_axes != 0:
        raise ValueError("spatial dictionary cannot be evaluated on a trajectory ensemble")

    plan = build_weak_plan(dictionary)
    targets = dictionary.target_components
    t_index = {c: i for i, c in enumerate(targets)}
    n_t = len(targets)

    deriv_cache: dict = {}
    value_cache: dict = {}
    corr_cache: dict = {}

    def base(c):
        return d.component(c)

    def deriv_of(c, deriv):
        key = (c, tuple(deriv))
        if key not in deriv_cache:
            deriv_cache[key] = dataset_derivative(d, c, deriv, backend=backend)
        return deriv_cache[key]

    def values_of(m: Monomial) -> np.ndarray:
        if m not in value_cache:
            arr = evaluate_monomial(m, base, deriv_of)
            if np.isscalar(arr) or arr.ndim == 0:
                arr = np.full(d.component(0).shape, float(arr))
            value_cache[m] = arr
        return value_cache[m]

    def corr(m: Monomial, psi_orders) -> np.ndarray:
        key = (m, tuple(psi_orders))
        if key not in corr_cache:
            field = values_of(m)
            if d.kind == "ensemble":
                kt = fam.kernel(0, 0)
                corr_cache[key] = _time_contract(field, fam.centers[0], kt).reshape(-1)
            else:
                corr_cache[key] = subdomain_integrals(field, fam, psi_orders, 0)
        return corr_cache[key]

    n_samples = None
    theta_raw = None
    for j, term in enumerate(dictionary.terms):
        for comp, contribs in plan.term_rows(j):
            for c in contribs:
                vals = corr(c.integrand, c.psi_orders)
                if theta_raw is None:
                    n_samples = len(vals)
                    theta_raw = np.zeros((n_samples * n_t, dictionary.n_terms))
                theta_raw[t_index[comp]::n_t, j] += c.const * vals

    b = np.zeros(n_samples * n_t)
    for comp in targets:
        b[t_index[comp]::n_t] = weak_target(d, fam, comp)

    row_component = np.tile(np.array(targets, dtype=np.int64), n_samples)
    row_sample = np.repeat(np.arange(n_samples, dtype=np.int64), n_t)

    from .dictionary import invalid_samples

    bad = invalid_samples(dictionary, d)
    if bad is not None and d.kind == "ensemble":
        # reject whole subdomains whose window touches a singular sample
        h = fam.half_widths[0]
        idx = np.asarray(fam.centers[0])[:, None] + np.arange(-h, h + 1)[None, :]
        bad_sub = bad[:, idx].any(axis=2).reshape(-1)
        keep = np.repeat(~bad_sub, n_t)
        theta_raw, b = theta_raw[keep], b[keep]
        row_component, row_sample = row_component[keep], row_sample[keep]
    return build_linear_system(theta_raw, b, row_component, row_sample)
