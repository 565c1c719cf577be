"""Candidate feature libraries: baseline and structure-constrained.

A FeatureTerm is one candidate right-hand-side term.  It may feed several
state equations with a single shared coefficient (skew-gradient entries tie
all components of J grad(phi); isotropic flux entries tie the x and y
directions).  Each per-equation expression is a sum of "pieces"
outer-derivative(inner polynomial), which keeps the flux/variational
structure explicit for weak-form assembly while strong-form evaluation
simply expands everything to monomials.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import (
    Deriv,
    Factor,
    InvDistance,
    Monomial,
    Polynomial,
    diff_poly,
    evaluate_poly,
    grad_poly,
    monomial,
    monomial_name,
    poly,
    poly_name,
    poly_scale,
)
from .data import GridDataset, LinearSystem, build_linear_system
from .differentiate import dataset_derivative, time_derivative


@dataclass(frozen=True)
class TermPiece:
    """outer-derivative applied to an inner polynomial of the state."""

    outer: Deriv
    inner: Polynomial


@dataclass(frozen=True)
class FeatureTerm:
    name: str
    rows: tuple[tuple[int, tuple[TermPiece, ...]], ...]
    source: str = ""  # generating density / flux atom / energy basis element

    def target_components(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.rows)

    def expression(self, component: int) -> tuple[TermPiece, ...]:
        for c, pieces in self.rows:
            if c == component:
                return pieces
        return ()


@dataclass(frozen=True)
class Dictionary:
    terms: tuple[FeatureTerm, ...]
    n_components: int
    n_space_axes: int
    component_names: tuple[str, ...]
    prior_kind: str = "none"  # none | hamiltonian | flux | gradient_flow
    truth: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        names = [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ValueError("term display names must be unique")
        for idx, _ in self.truth:
            if not 0 <= idx < len(self.terms):
                raise ValueError("truth support index out of range")

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def target_components(self) -> tuple[int, ...]:
        seen: list[int] = []
        for t in self.terms:
            for c in t.target_components():
                if c not in seen:
                    seen.append(c)
        return tuple(sorted(seen))

    def term_names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.terms)

    def truth_support(self) -> tuple[int, ...]:
        return tuple(sorted(idx for idx, _ in self.truth))


def expand_pieces(pieces, n_axes: int) -> Polynomial:
    """Apply outer derivatives symbolically; result is a plain polynomial."""
    out: list[Monomial] = []
    for piece in pieces:
        p = piece.inner
        for axis, order in enumerate(piece.outer):
            for _ in range(order):
                p = diff_poly(p, axis, n_axes)
        out.extend(p)
    return poly(out)


def _zero_deriv(n_axes: int) -> Deriv:
    return (0,) * n_axes


def state_factor(component: int, n_axes: int, power: int = 1, deriv: Deriv | None = None) -> Factor:
    return Factor(component, _zero_deriv(n_axes) if deriv is None else deriv, power)


def plain_term(name: str, component: int, p: Polynomial, n_axes: int, source: str = "") -> FeatureTerm:
    return FeatureTerm(name, ((component, (TermPiece(_zero_deriv(n_axes), p),)),), source)


# --------------------------------------------------------------------------
# Energy densities and variational derivatives (gradient-flow prior)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyDensityTerm:
    """Scaled monomial energy density in (u, u_x, u_xx) for one component."""

    orders_powers: tuple[tuple[int, int], ...]  # (derivative order <= 2, power >= 1)
    scale: float = 1.0
    component: int = 0

    def __post_init__(self):
        for order, power in self.orders_powers:
            if power < 1:
                raise ValueError("density powers must be positive integers")
            if order > 2:
                raise ValueError("density may involve derivatives up to order 2 only")

    def name(self, comp: str = "u") -> str:
        names = {0: comp, 1: comp + "_x", 2: comp + "_xx"}
        body = "*".join(
            names[o] if p == 1 else f"{names[o]}^{p}" for o, p in sorted(self.orders_powers)
        )
        return body if self.scale == 1.0 else f"{self.scale:g}*{body}"


def _density_partial(term: EnergyDensityTerm, order: int) -> Polynomial:
    """d(density)/d(u^(order)) as a polynomial in u, u_x, u_xx."""
    out = []
    found = False
    for i, (o, p) in enumerate(term.orders_powers):
        if o != order:
            continue
        found = True
        rest = [
            Factor(term.component, (oo,), pp)
            for j, (oo, pp) in enumerate(term.orders_powers)
            if j != i
        ]
        rest.append(Factor(term.component, (order,), p - 1))
        out.append(monomial(term.scale * p, tuple(rest)))
    return poly(out) if found else ()


def variational_derivative(term: EnergyDensityTerm, component_names=("u",)) -> FeatureTerm:
    """Euler-Lagrange map of one density, negated for gradient-flow dynamics:

        -dE/du = -d(eps)/du + d/dx d(eps)/du_x - d^2/dx^2 d(eps)/du_xx

    The three derivative blocks are kept as separate pieces so weak-form
    assembly can move the outer derivatives onto the test function.
    """
    if any(o >= 3 for o, _ in term.orders_powers):
        raise ValueError("density may involve derivatives up to order 2 only")
    pieces = []
    for order, sign in ((0, -1.0), (1, 1.0), (2, -1.0)):
        part = _density_partial(term, order)
        if part:
            pieces.append(TermPiece((order,), poly_scale(part, sign)))
    if not pieces:
        raise ValueError("density term is constant; no dynamics")
    expanded = expand_pieces(pieces, 1)
    name = poly_name(expanded, component_names)
    return FeatureTerm(name, ((term.component, tuple(pieces)),), source=term.name(component_names[term.component]))


def build_gradient_flow_library(densities, component_names=("u",)) -> Dictionary:
    """Map admissible energy densities through the variational derivative."""
    if not densities:
        raise ValueError("need at least one energy density")
    terms = tuple(variational_derivative(t, component_names) for t in densities)
    return Dictionary(
        terms=terms,
        n_components=len(component_names),
        n_space_axes=1,
        component_names=tuple(component_names),
        prior_kind="gradient_flow",
    )


# --------------------------------------------------------------------------
# Hamiltonian prior: skew-gradient entries
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalarHamiltonianTerm:
    """Monomial in canonical coordinates z=(q..., p...), optionally times a
    pairwise inverse distance |q_i - q_j|^-1."""

    powers: tuple[tuple[int, int], ...] = ()  # (coordinate index, power)
    inv_pair: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def to_polynomial(self) -> Polynomial:
        factors = tuple(Factor(c, (), p) for c, p in self.powers)
        inv = (InvDistance(*self.inv_pair, 1),) if self.inv_pair else ()
        return poly([monomial(1.0, factors, inv)])

    def name(self, coord_names) -> str:
        return monomial_name(self.to_polynomial()[0], coord_names) if self.to_polynomial() else "1"


def build_hamiltonian_library(basis, n_pairs: int, coord_names=None) -> Dictionary:
    """One tied entry J grad(phi) per basis element phi(q, p).

    Coordinates 0..n-1 are positions, n..2n-1 momenta.  The entry's row for
    dq_k/dt is d(phi)/dp_k and its row for dp_k/dt is -d(phi)/dq_k, all
    sharing one coefficient.  Basis elements with identically zero gradient
    (constants) produce no entry.
    """
    if not basis:
        raise ValueError("need at least one Hamiltonian basis element")
    n = n_pairs
    dim = 2 * n
    if coord_names is None:
        coord_names = tuple(f"q{i}" for i in range(n)) + tuple(f"p{i}" for i in range(n))
    terms = []
    for phi in basis:
        for c, _ in phi.powers:
            if not 0 <= c < dim:
                raise ValueError("basis term references out-of-range coordinate")
        if phi.inv_pair is not None:
            for c in phi.inv_pair[0] + phi.inv_pair[1]:
                if not 0 <= c < dim:
                    raise ValueError("basis term references out-of-range coordinate")
        p = phi.to_polynomial()
        rows = []
        for k in range(n):
            dq_row = grad_poly(p, n + k)  # dq_k/dt = +d phi / dp_k
            if dq_row:
                rows.append((k, (TermPiece((), dq_row),)))
        for k in range(n):
            dp_row = poly_scale(grad_poly(p, k), -1.0)  # dp_k/dt = -d phi / dq_k
            if dp_row:
                rows.append((n + k, (TermPiece((), dp_row),)))
        if not rows:
            continue  # constant basis element: zero vector field
        name = "Jgrad(%s)" % phi.name(coord_names)
        terms.append(FeatureTerm(name, tuple(rows), source=phi.name(coord_names)))
    return Dictionary(
        terms=tuple(terms),
        n_components=dim,
        n_space_axes=0,
        component_names=tuple(coord_names),
        prior_kind="hamiltonian",
    )


# --------------------------------------------------------------------------
# Conservation-law prior: divergence entries
# --------------------------------------------------------------------------

_AX = ("x", "y")


def build_flux_library(
    flux_atoms,
    n_space_dims: int,
    tie_isotropic: bool = False,
    target_rows=(0,),
    component_names=("u",),
) -> Dictionary:
    """Divergence entries (F)_x (and (F)_y in 2D) for each candidate flux atom.

    flux_atoms: sequence of (name, Polynomial) pairs over the state
    components (no derivatives).  With tie_isotropic the x- and y-direction
    entries of one atom share a single coefficient.  For systems each target
    row gets its own independent flux candidates.
    """
    if not flux_atoms:
        raise ValueError("need at least one flux atom")
    if n_space_dims not in (1, 2):
        raise ValueError("n_space_dims must be 1 or 2")
    terms = []
    for row in target_rows:
        row_tag = f"[{component_names[row]}] " if len(target_rows) > 1 else ""
        for atom_name, p in flux_atoms:
            pieces_by_axis = []
            for axis in range(n_space_dims):
                outer = tuple(1 if a == axis else 0 for a in range(n_space_dims))
                pieces_by_axis.append(TermPiece(outer, p))
            if tie_isotropic and n_space_dims == 2:
                name = f"{row_tag}({atom_name})_x+({atom_name})_y"
                terms.append(FeatureTerm(name, ((row, tuple(pieces_by_axis)),), source=atom_name))
            else:
                for axis, piece in enumerate(pieces_by_axis):
                    name = f"{row_tag}({atom_name})_{_AX[axis]}"
                    terms.append(FeatureTerm(name, ((row, (piece,)),), source=atom_name))
    return Dictionary(
        terms=tuple(terms),
        n_components=len(component_names),
        n_space_axes=n_space_dims,
        component_names=tuple(component_names),
        prior_kind="flux",
    )


# --------------------------------------------------------------------------
# Strong-form evaluation
# --------------------------------------------------------------------------

MIN_PAIR_DISTANCE = 1e-8


def inverse_distance_pairs(dictionary: Dictionary):
    pairs = set()
    for t in dictionary.terms:
        for _, pieces in t.rows:
            for piece in pieces:
                for m in piece.inner:
                    for d in m.inv:
                        pairs.add((d.group_a, d.group_b))
    return sorted(pairs)


def invalid_samples(dictionary: Dictionary, d: GridDataset):
    """Samples too close to an inverse-distance singularity, or None.

    Only trajectory dictionaries carry inverse-distance factors; such
    samples are rejected from assembled systems rather than clamped.
    """
    pairs = inverse_distance_pairs(dictionary)
    if not pairs:
        return None
    bad = np.zeros(d.component(0).shape, dtype=bool)
    for ga, gb in pairs:
        sq = np.zeros_like(d.component(0))
        for a, b2 in zip(ga, gb):
            diff = d.component(a) - d.component(b2)
            sq += diff * diff
        bad |= sq < MIN_PAIR_DISTANCE**2
    return bad if bad.any() else None


def _interior_selection(d: GridDataset, stride) -> tuple[slice, ...]:
    """Sample window: 2 boundary layers dropped per non-periodic axis and in
    time (one-sided stencil quality), optional stride per axis."""
    sel = []
    if d.kind == "ensemble":
        sel.append(slice(None))  # trajectories
        axes_periodic = ()
    else:
        axes_periodic = d.periodic
    if stride is None:
        stride = (1,) * (len(axes_periodic) + 1)
    for ax, per in enumerate(axes_periodic):
        lo, hi = (0, None) if per else (2, -2)
        sel.append(slice(lo, hi, stride[ax]))
    sel.append(slice(2, -2, stride[-1]))  # time
    return tuple(sel)


def evaluate_strong(
    dictionary: Dictionary,
    d: GridDataset,
    backend: str = "central",
    stride=None,
) -> LinearSystem:
    """Pointwise feature evaluation into a design matrix.

    Rows run sample-major, target-component-minor; tied entries stack their
    per-component evaluations into a single column.  Columns are normalized
    to unit l2 norm with the raw scales recorded.
    """
    if dictionary.n_components > d.n_components:
        raise ValueError("dictionary references components absent from the dataset")
    if d.kind == "ensemble" and dictionary.n_space_axes != 0:
        raise ValueError("spatial dictionary cannot be evaluated on a trajectory ensemble")

    sel = _interior_selection(d, stride)
    targets = dictionary.target_components
    t_index = {c: i for i, c in enumerate(targets)}

    deriv_cache: dict[tuple[int, Deriv], np.ndarray] = {}

    def base(c):
        return d.component(c)

    def deriv_of(c, deriv):
        key = (c, tuple(deriv))
        if key not in deriv_cache:
            deriv_cache[key] = dataset_derivative(d, c, deriv, backend=backend)
        return deriv_cache[key]

    shape = d.component(0).shape
    n_samples = d.values[0][sel].size

    poly_cache: dict = {}

    def eval_selected(p: Polynomial) -> np.ndarray:
        if p not in poly_cache:
            poly_cache[p] = evaluate_poly(p, base, deriv_of, shape)[sel].ravel()
        return poly_cache[p]

    theta_raw = np.zeros((n_samples * len(targets), dictionary.n_terms))
    for j, term in enumerate(dictionary.terms):
        for comp, pieces in term.rows:
            expanded = expand_pieces(pieces, dictionary.n_space_axes)
            if not expanded:
                continue
            col = eval_selected(expanded)
            theta_raw[t_index[comp] :: len(targets), j] += col

    b = np.zeros(n_samples * len(targets))
    for comp in targets:
        b[t_index[comp] :: len(targets)] = time_derivative(d, comp)[sel].ravel()

    row_component = np.tile(np.array(targets, dtype=np.int64), n_samples)
    row_sample = np.repeat(np.arange(n_samples, dtype=np.int64), len(targets))

    bad = invalid_samples(dictionary, d)
    if bad is not None:
        keep = np.repeat(~bad[sel].ravel(), len(targets))
        theta_raw, b = theta_raw[keep], b[keep]
        row_component, row_sample = row_component[keep], row_sample[keep]
    return build_linear_system(theta_raw, b, row_component, row_sample)


# --------------------------------------------------------------------------
# Model interpretation helpers
# --------------------------------------------------------------------------


def truth_model(dictionary: Dictionary):
    """SparseModel holding the dictionary's known true support/coefficients."""
    from .data import SparseModel

    order = sorted(dictionary.truth, key=lambda t: t[0])
    return SparseModel(
        support=tuple(i for i, _ in order),
        coefficients=np.array([c for _, c in order], dtype=np.float64),
        residual_sq=0.0,
    )


def pde_coefficients(dictionary: Dictionary, model) -> dict:
    """Expand an identified model into per-equation monomial coefficients.

    Returns {(component, factors, inv): coefficient}; tied entries distribute
    their single coefficient into every equation they feed.  Useful for
    reading physical constants (a diffusivity, a pressure coefficient) out of
    a structured model.
    """
    out: dict = {}
    for coef, j in zip(model.coefficients, model.support):
        term = dictionary.terms[j]
        for comp, pieces in term.rows:
            for m in expand_pieces(pieces, dictionary.n_space_axes):
                key = (comp, m.factors, m.inv)
                out[key] = out.get(key, 0.0) + coef * m.const
    return {k: v for k, v in out.items() if v != 0.0}


def monomial_key(component: int, factors) -> tuple:
    m = monomial(1.0, tuple(factors))
    return (component, m.factors, m.inv)


# --------------------------------------------------------------------------
# JSON serialization
# --------------------------------------------------------------------------


def _poly_doc(p: Polynomial):
    return [
        {
            "const": m.const,
            "factors": [[f.component, list(f.deriv), f.power] for f in m.factors],
            "inv": [[list(d.group_a), list(d.group_b), d.power] for d in m.inv],
        }
        for m in p
    ]


def _poly_from_doc(doc) -> Polynomial:
    return tuple(
        Monomial(
            m["const"],
            tuple(Factor(c, tuple(dv), p) for c, dv, p in m["factors"]),
            tuple(InvDistance(tuple(a), tuple(b), p) for a, b, p in m["inv"]),
        )
        for m in doc
    )


def dictionary_to_json(d: Dictionary) -> str:
    doc = {
        "n_components": d.n_components,
        "n_space_axes": d.n_space_axes,
        "component_names": list(d.component_names),
        "prior_kind": d.prior_kind,
        "truth": [[i, c] for i, c in d.truth],
        "terms": [
            {
                "name": t.name,
                "source": t.source,
                "rows": [
                    {"component": c, "pieces": [{"outer": list(p.outer), "inner": _poly_doc(p.inner)} for p in pieces]}
                    for c, pieces in t.rows
                ],
            }
            for t in d.terms
        ],
    }
    return json.dumps(doc, indent=2)


def dictionary_from_json(text: str) -> Dictionary:
    doc = json.loads(text)
    terms = tuple(
        FeatureTerm(
            name=t["name"],
            source=t.get("source", ""),
            rows=tuple(
                (
                    r["component"],
                    tuple(TermPiece(tuple(p["outer"]), _poly_from_doc(p["inner"])) for p in r["pieces"]),
                )
                for r in t["rows"]
            ),
        )
        for t in doc["terms"]
    )
    return Dictionary(
        terms=terms,
        n_components=doc["n_components"],
        n_space_axes=doc["n_space_axes"],
        component_names=tuple(doc["component_names"]),
        prior_kind=doc["prior_kind"],
        truth=tuple((i, c) for i, c in doc["truth"]),
    )
