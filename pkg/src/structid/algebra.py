"""Minimal monomial algebra over state components and their derivatives.

Candidate right-hand-side terms are sums of scaled monomials.  Each monomial
is a product of factors ``(component, derivative multi-index, power)`` and,
for point-mass interactions, pairwise inverse-distance factors
``|z_a - z_b|^(-n)``.  The algebra supports exactly what library construction
needs: products, spatial differentiation (product + chain rule), gradients
with respect to state coordinates, and pointwise evaluation on gridded data.
It is intentionally not a general CAS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Deriv = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Factor:
    """One ``(d^|deriv| u_component / dx^deriv) ** power`` factor."""

    component: int
    deriv: Deriv
    power: int


@dataclass(frozen=True, order=True)
class InvDistance:
    """``|z_a - z_b| ** (-power)`` where a, b are coordinate index groups."""

    group_a: tuple[int, ...]
    group_b: tuple[int, ...]
    power: int


@dataclass(frozen=True)
class Monomial:
    const: float
    factors: tuple[Factor, ...] = ()
    inv: tuple[InvDistance, ...] = ()

    def degree(self) -> int:
        return sum(f.power for f in self.factors)

    def max_deriv_order(self) -> int:
        return max((sum(f.deriv) for f in self.factors), default=0)

    def is_linear_state(self) -> bool:
        """True when the monomial is const * (single factor, power 1)."""
        return not self.inv and len(self.factors) == 1 and self.factors[0].power == 1


Polynomial = tuple[Monomial, ...]


def monomial(const, factors=(), inv=()) -> Monomial:
    """Canonical monomial: factors merged per (component, deriv) and sorted."""
    merged: dict[tuple[int, Deriv], int] = {}
    for f in factors:
        if f.power == 0:
            continue
        key = (f.component, tuple(f.deriv))
        merged[key] = merged.get(key, 0) + f.power
    inv_merged: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
    for d in inv:
        a, b = (d.group_a, d.group_b) if d.group_a <= d.group_b else (d.group_b, d.group_a)
        inv_merged[(a, b)] = inv_merged.get((a, b), 0) + d.power
    return Monomial(
        const=float(const),
        factors=tuple(sorted(Factor(c, d, p) for (c, d), p in merged.items() if p != 0)),
        inv=tuple(sorted(InvDistance(a, b, p) for (a, b), p in inv_merged.items() if p != 0)),
    )


def poly(monomials) -> Polynomial:
    """Combine like monomials and drop zero terms; deterministic order."""
    acc: dict[tuple, float] = {}
    for m in monomials:
        key = (m.factors, m.inv)
        acc[key] = acc.get(key, 0.0) + m.const
    out = [Monomial(c, fs, iv) for (fs, iv), c in acc.items() if c != 0.0]
    out.sort(key=lambda m: (m.factors, m.inv))
    return tuple(out)


def poly_scale(p: Polynomial, s: float) -> Polynomial:
    return poly(Monomial(m.const * s, m.factors, m.inv) for m in p)


def poly_mul(p: Polynomial, q: Polynomial) -> Polynomial:
    out = []
    for a in p:
        for b in q:
            out.append(monomial(a.const * b.const, a.factors + b.factors, a.inv + b.inv))
    return poly(out)


def diff_monomial(m: Monomial, axis: int, n_axes: int) -> Polynomial:
    """d/dx_axis of a spatial monomial via the product and chain rules.

    Inverse-distance factors live in phase space, not on a spatial grid, so
    they are rejected here.
    """
    if m.inv:
        raise ValueError("cannot take spatial derivative of inverse-distance factor")
    out = []
    for i, f in enumerate(m.factors):
        dv = list(f.deriv) if f.deriv else [0] * n_axes
        dv[axis] += 1
        bumped = Factor(f.component, tuple(dv), 1)
        rest = list(m.factors)
        rest[i] = Factor(f.component, f.deriv, f.power - 1)
        out.append(monomial(m.const * f.power, tuple(rest) + (bumped,)))
    return poly(out)


def diff_poly(p: Polynomial, axis: int, n_axes: int) -> Polynomial:
    out = []
    for m in p:
        out.extend(diff_monomial(m, axis, n_axes))
    return poly(out)


def grad_monomial(m: Monomial, coord: int) -> Polynomial:
    """Partial derivative of a phase-space monomial w.r.t. coordinate z_coord.

    Factors must be underived (ODE state coordinates).  Inverse-distance
    factors differentiate analytically:
    d/dz_c |z_a - z_b|^(-n) = -n (z_c - z_c') |z_a - z_b|^(-n-2)
    with c' the partner coordinate in the other group.
    """
    out = []
    for i, f in enumerate(m.factors):
        if any(f.deriv):
            raise ValueError("phase-space gradient expects underived factors")
        if f.component != coord:
            continue
        rest = list(m.factors)
        rest[i] = Factor(f.component, f.deriv, f.power - 1)
        out.append(monomial(m.const * f.power, tuple(rest), m.inv))
    for i, d in enumerate(m.inv):
        # d/dz_c |z_a - z_b|^2 = 2 (z_c - z_partner) on either side of the pair
        partner = None
        if coord in d.group_a:
            partner = d.group_b[d.group_a.index(coord)]
        elif coord in d.group_b:
            partner = d.group_a[d.group_b.index(coord)]
        if partner is None:
            continue
        rest = list(m.inv)
        rest[i] = InvDistance(d.group_a, d.group_b, d.power + 2)
        # -n * (z_coord - z_partner) * |..|^(-n-2), split into two monomials
        for comp, s in ((coord, 1.0), (partner, -1.0)):
            out.append(
                monomial(
                    -d.power * s * m.const,
                    m.factors + (Factor(comp, (), 1),),
                    tuple(rest),
                )
            )
    return poly(out)


def grad_poly(p: Polynomial, coord: int) -> Polynomial:
    out = []
    for m in p:
        out.extend(grad_monomial(m, coord))
    return poly(out)


def evaluate_monomial(m: Monomial, base, deriv_of):
    """Evaluate pointwise. ``base(c)`` returns component c's samples;
    ``deriv_of(c, deriv)`` returns the derivative array for nonzero orders."""
    val = None
    for f in m.factors:
        arr = base(f.component) if not any(f.deriv) else deriv_of(f.component, f.deriv)
        term = arr if f.power == 1 else arr ** f.power
        val = term if val is None else val * term
    for d in m.inv:
        sq = None
        for ca, cb in zip(d.group_a, d.group_b):
            diff = base(ca) - base(cb)
            sq = diff * diff if sq is None else sq + diff * diff
        dist = np.sqrt(sq)
        val = dist ** (-d.power) if val is None else val * dist ** (-d.power)
    if val is None:
        return m.const  # pure constant term; caller broadcasts
    return m.const * val


def evaluate_poly(p: Polynomial, base, deriv_of, shape):
    out = np.zeros(shape)
    for m in p:
        out += evaluate_monomial(m, base, deriv_of)
    return out


# --- display helpers ------------------------------------------------------

_AXES = ("x", "y", "z")


def factor_name(f: Factor, names) -> str:
    comp = names[f.component]
    if any(f.deriv):
        sub = "".join(_AXES[a] * n for a, n in enumerate(f.deriv))
        comp = f"{comp}_{sub}"
    return comp if f.power == 1 else f"{comp}^{f.power}"


def _group_name(group, names) -> str:
    # common prefix of the group's component names, e.g. (q1x,q1y,q1z) -> q1
    labels = [names[c] for c in group]
    prefix = labels[0]
    for lab in labels[1:]:
        while not lab.startswith(prefix):
            prefix = prefix[:-1]
    return prefix or labels[0]


def monomial_name(m: Monomial, names, with_const=True) -> str:
    parts = [factor_name(f, names) for f in m.factors]
    parts += [
        "|%s-%s|^-%d" % (_group_name(d.group_a, names), _group_name(d.group_b, names), d.power)
        for d in m.inv
    ]
    body = "*".join(parts) if parts else "1"
    if not with_const:
        return body
    c = m.const
    if c == 1.0:
        return body
    if c == -1.0:
        return f"-{body}"
    cs = f"{c:g}"
    return f"{cs}*{body}" if parts else cs


def poly_name(p: Polynomial, names) -> str:
    if not p:
        return "0"
    pieces = []
    for i, m in enumerate(p):
        s = monomial_name(m, names)
        if i > 0 and not s.startswith("-"):
            s = "+ " + s
        elif i > 0:
            s = "- " + s[1:]
        pieces.append(s)
    return " ".join(pieces)
