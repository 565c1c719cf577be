"""Candidate libraries for the six benchmark systems.

Baseline libraries treat every state equation independently (no tying); the
structure-constrained libraries apply the skew-gradient, divergence, or
variational map to a latent basis so each candidate is physically admissible
by construction.  Every builder fills in the known true support so reports
can score recovery.
"""

from __future__ import annotations

from .algebra import Factor, InvDistance, Monomial, monomial, monomial_name, poly
from .dictionary import (
    Dictionary,
    EnergyDensityTerm,
    FeatureTerm,
    ScalarHamiltonianTerm,
    TermPiece,
    build_flux_library,
    build_gradient_flow_library,
    build_hamiltonian_library,
    plain_term,
)

SYSTEMS = ("harmonic", "three_body", "burgers", "swe", "diffusion", "allen_cahn")


def index_of(d: Dictionary, name: str) -> int:
    for i, t in enumerate(d.terms):
        if t.name == name:
            return i
    raise KeyError(name)


def _with_truth(d: Dictionary, pairs) -> Dictionary:
    truth = tuple((index_of(d, name), coef) for name, coef in pairs)
    return Dictionary(
        terms=d.terms,
        n_components=d.n_components,
        n_space_axes=d.n_space_axes,
        component_names=d.component_names,
        prior_kind=d.prior_kind,
        truth=truth,
    )


# --------------------------------------------------------------------------
# scalar 1D helpers
# --------------------------------------------------------------------------


def _u(power=1, deriv=0) -> Factor:
    return Factor(0, (deriv,), power)


def _mono1d(*factors) -> Monomial:
    return monomial(1.0, tuple(factors))


def _scalar_term(name, m: Monomial) -> FeatureTerm:
    return plain_term(name, 0, poly([m]), 1)


# --------------------------------------------------------------------------
# Baseline (no-prior) libraries
# --------------------------------------------------------------------------


def build_baseline_library(system=None, *, max_degree=None, max_deriv=None,
                           nu=0.02, g=9.81) -> Dictionary:
    """Baseline polynomial-derivative library for a named benchmark system,
    or a generic scalar library from (max_degree, max_deriv)."""
    if system is None:
        if max_degree is None:
            raise ValueError("give a system name or generator parameters")
        return _generic_baseline(max_degree, max_deriv or 0)
    builders = {
        "burgers": _burgers_baseline,
        "diffusion": lambda: _diffusion_baseline(nu),
        "allen_cahn": _allen_cahn_baseline,
        "harmonic": _harmonic_baseline,
        "three_body": _three_body_baseline,
        "swe": lambda: _swe_baseline(g),
    }
    if system not in builders:
        raise ValueError(f"unknown system {system!r}")
    return builders[system]()


def _generic_baseline(max_degree: int, max_deriv: int) -> Dictionary:
    terms = []
    if max_degree == 0 and max_deriv == 0:
        terms.append(_scalar_term("1", monomial(1.0)))
    else:
        for k in range(1, max_degree + 1):
            m = _mono1d(_u(k))
            terms.append(_scalar_term(monomial_name(m, ("u",)), m))
        for order in range(1, max_deriv + 1):
            for k in range(0, max_degree + 1):
                m = _mono1d(*((_u(k),) if k else ()), _u(1, order))
                terms.append(_scalar_term(monomial_name(m, ("u",)), m))
    return Dictionary(terms=tuple(terms), n_components=1, n_space_axes=1,
                      component_names=("u",), prior_kind="none")


def _burgers_baseline() -> Dictionary:
    terms = []
    for order in (1, 2):
        for k in range(4):
            m = _mono1d(*((_u(k),) if k else ()), _u(1, order))
            terms.append(_scalar_term(monomial_name(m, ("u",)), m))
    for k in (1, 2, 3):
        m = _mono1d(_u(k))
        terms.append(_scalar_term(monomial_name(m, ("u",)), m))
    d = Dictionary(terms=tuple(terms), n_components=1, n_space_axes=1,
                   component_names=("u",), prior_kind="none")
    return _with_truth(d, [("u*u_x", -1.0)])


def _diffusion_baseline(nu: float) -> Dictionary:
    monos = [_mono1d(_u(1)), _mono1d(_u(2)), _mono1d(_u(1, 1)),
             _mono1d(_u(2, 1)), _mono1d(_u(1, 2)), _mono1d(_u(2, 2))]
    terms = [_scalar_term(monomial_name(m, ("u",)), m) for m in monos]
    d = Dictionary(terms=tuple(terms), n_components=1, n_space_axes=1,
                   component_names=("u",), prior_kind="none")
    return _with_truth(d, [("u_xx", nu)])


def _allen_cahn_baseline() -> Dictionary:
    terms = []
    for p in range(1, 5):
        m = _mono1d(_u(p))
        terms.append(_scalar_term(monomial_name(m, ("u",)), m))
    for outer, suffix in ((1, "x"), (2, "xx")):
        for p in range(1, 5):
            inner = poly([_mono1d(_u(p))])
            name = f"u_{suffix}" if p == 1 else f"(u^{p})_{suffix}"
            terms.append(FeatureTerm(name, ((0, (TermPiece((outer,), inner),)),)))
    for order in (1, 2):
        for p in range(2, 5):
            m = _mono1d(_u(p, order))
            terms.append(_scalar_term(monomial_name(m, ("u",)), m))
    d = Dictionary(terms=tuple(terms), n_components=1, n_space_axes=1,
                   component_names=("u",), prior_kind="none")
    # u_t = u_xx + u - u^3
    return _with_truth(d, [("u", 1.0), ("u^3", -1.0), ("u_xx", 1.0)])


# --------------------------------------------------------------------------
# Harmonic oscillator
# --------------------------------------------------------------------------

_HO_NAMES = ("q", "p")
_Q, _P = 0, 1


def harmonic_energy_basis() -> tuple[ScalarHamiltonianTerm, ...]:
    """Polynomial basis in (q, p) up to third order, constant included."""
    basis = []
    for total in range(0, 4):
        for pq in range(total + 1):
            pp = total - pq
            powers = tuple(t for t in ((_Q, pq), (_P, pp)) if t[1] > 0)
            basis.append(ScalarHamiltonianTerm(powers=powers))
    return tuple(basis)


def _harmonic_baseline() -> Dictionary:
    terms = []
    for comp in (_Q, _P):
        for phi in harmonic_energy_basis():
            p = phi.to_polynomial()
            fname = phi.name(_HO_NAMES) if p else "1"
            name = f"{fname} -> {_HO_NAMES[comp]}'"
            terms.append(plain_term(name, comp, p if p else poly([monomial(1.0)]), 0))
    d = Dictionary(terms=tuple(terms), n_components=2, n_space_axes=0,
                   component_names=_HO_NAMES, prior_kind="none")
    # q' = 2p, p' = -2q
    return _with_truth(d, [("p -> q'", 2.0), ("q -> p'", -2.0)])


def harmonic_prior_library() -> Dictionary:
    d = build_hamiltonian_library(harmonic_energy_basis(), n_pairs=1, coord_names=_HO_NAMES)
    # H = p^2 + q^2
    return _with_truth(d, [("Jgrad(p^2)", 1.0), ("Jgrad(q^2)", 1.0)])


# --------------------------------------------------------------------------
# Three-body problem
# --------------------------------------------------------------------------


def three_body_names() -> tuple[str, ...]:
    return tuple(
        f"{kind}{body}{ax}" for kind in ("q", "p") for body in (1, 2, 3) for ax in ("x", "y", "z")
    )


def _q_coords(body: int) -> tuple[int, int, int]:
    return (3 * body, 3 * body + 1, 3 * body + 2)


def _p_coord(body: int, ax: int) -> int:
    return 9 + 3 * body + ax


def three_body_energy_basis() -> tuple[ScalarHamiltonianTerm, ...]:
    """Scalar momentum squares and pairwise inverse distances: 12 elements."""
    basis = [
        ScalarHamiltonianTerm(powers=((_p_coord(i, a), 2),))
        for i in range(3)
        for a in range(3)
    ]
    basis += [
        ScalarHamiltonianTerm(inv_pair=(_q_coords(i), _q_coords(j)))
        for i, j in ((0, 1), (0, 2), (1, 2))
    ]
    return tuple(basis)


def three_body_prior_library(grav_const: float = 1.0, mass: float = 1.0) -> Dictionary:
    names = three_body_names()
    d = build_hamiltonian_library(three_body_energy_basis(), n_pairs=9, coord_names=names)
    truth = []
    for i in range(3):
        for a in "xyz":
            truth.append((f"Jgrad(p{i+1}{a}^2)", 1.0 / (2.0 * mass)))
    for i, j in ((1, 2), (1, 3), (2, 3)):
        truth.append((f"Jgrad(|q{i}-q{j}|^-1)", -grav_const * mass * mass))
    return _with_truth(d, truth)


def _three_body_features():
    """58 scalar features: constant, coordinates, squares, q*p products,
    pairwise inverse distances, and relative-position-over-cube components."""
    names = three_body_names()
    feats = [("1", poly([monomial(1.0)]))]
    for k in range(18):
        feats.append((names[k], poly([monomial(1.0, (Factor(k, (), 1),))])))
    for k in range(18):
        feats.append((f"{names[k]}^2", poly([monomial(1.0, (Factor(k, (), 2),))])))
    for i in range(3):
        for a in range(3):
            qc, pc = 3 * i + a, _p_coord(i, a)
            feats.append(
                (f"{names[qc]}*{names[pc]}",
                 poly([monomial(1.0, (Factor(qc, (), 1), Factor(pc, (), 1)))]))
            )
    for i, j in ((0, 1), (0, 2), (1, 2)):
        inv = (InvDistance(_q_coords(i), _q_coords(j), 1),)
        feats.append((f"|q{i+1}-q{j+1}|^-1", poly([monomial(1.0, (), inv)])))
    for i, j in ((0, 1), (0, 2), (1, 2)):
        inv3 = (InvDistance(_q_coords(i), _q_coords(j), 3),)
        for a, ax in enumerate("xyz"):
            p = poly([
                monomial(1.0, (Factor(3 * i + a, (), 1),), inv3),
                monomial(-1.0, (Factor(3 * j + a, (), 1),), inv3),
            ])
            feats.append((f"(q{i+1}-q{j+1}){ax}*|q{i+1}-q{j+1}|^-3", p))
    return feats


def _three_body_baseline() -> Dictionary:
    names = three_body_names()
    feats = _three_body_features()
    terms = [
        plain_term(f"{fname} -> {names[comp]}'", comp, p, 0)
        for comp in range(18)
        for fname, p in feats
    ]
    d = Dictionary(terms=tuple(terms), n_components=18, n_space_axes=0,
                   component_names=names, prior_kind="none")
    truth = []
    for i in range(3):
        for a, ax in enumerate("xyz"):
            truth.append((f"p{i+1}{ax} -> q{i+1}{ax}'", 1.0))
    # dp_i/dt = -sum_j (q_i - q_j)|q_ij|^-3 with unordered pair features
    for i, j in ((0, 1), (0, 2), (1, 2)):
        for ax in "xyz":
            f = f"(q{i+1}-q{j+1}){ax}*|q{i+1}-q{j+1}|^-3"
            truth.append((f"{f} -> p{i+1}{ax}'", -1.0))
            truth.append((f"{f} -> p{j+1}{ax}'", 1.0))
    return _with_truth(d, truth)


# --------------------------------------------------------------------------
# Burgers
# --------------------------------------------------------------------------


def burgers_flux_library() -> Dictionary:
    atoms = [("u", poly([_mono1d(_u(1))])),
             ("u^2", poly([_mono1d(_u(2))])),
             ("u^3", poly([_mono1d(_u(3))]))]
    d = build_flux_library(atoms, n_space_dims=1, component_names=("u",))
    # u_t + (u^2/2)_x = 0
    return _with_truth(d, [("(u^2)_x", -0.5)])


# --------------------------------------------------------------------------
# Shallow water (2D)
# --------------------------------------------------------------------------

_SWE_NAMES = ("h", "u", "v", "hu", "hv")
_SWE_ROWS = (0, 3, 4)


def _swe_monomial(a: int, b: int, c: int) -> tuple[str, Monomial]:
    factors = []
    name = ""
    for comp, power, label in ((0, a, "h"), (1, b, "u"), (2, c, "v")):
        if power:
            factors.append(Factor(comp, (0, 0), power))
            name += label if power == 1 else f"{label}^{power}"
    return name, monomial(1.0, tuple(factors))


def swe_flux_atoms(max_degree: int = 3):
    """All monomials h^a u^b v^c with 1 <= a+b+c <= max_degree."""
    atoms = []
    for total in range(1, max_degree + 1):
        for a in range(total, -1, -1):
            for b in range(total - a, -1, -1):
                c = total - a - b
                name, m = _swe_monomial(a, b, c)
                atoms.append((name, poly([m])))
    return atoms


def swe_flux_library(g: float = 9.81) -> Dictionary:
    d = build_flux_library(
        swe_flux_atoms(), n_space_dims=2, tie_isotropic=False,
        target_rows=_SWE_ROWS, component_names=_SWE_NAMES,
    )
    truth = [
        ("[h] (hu)_x", -1.0), ("[h] (hv)_y", -1.0),
        ("[hu] (hu^2)_x", -1.0), ("[hu] (huv)_y", -1.0), ("[hu] (h^2)_x", -0.5 * g),
        ("[hv] (huv)_x", -1.0), ("[hv] (hv^2)_y", -1.0), ("[hv] (h^2)_y", -0.5 * g),
    ]
    return _with_truth(d, truth)


def _swe_baseline(g: float) -> Dictionary:
    states = [("1", monomial(1.0))]
    for spec in ((0,), (1,), (2,), (1, 1), (2, 2), (1, 2), (0, 1), (0, 2), (0, 1, 2)):
        factors = tuple(Factor(c, (0, 0), 1) for c in spec)
        name = "".join(_SWE_NAMES[c] for c in spec)
        if spec == (1, 1):
            name, factors = "u^2", (Factor(1, (0, 0), 2),)
        if spec == (2, 2):
            name, factors = "v^2", (Factor(2, (0, 0), 2),)
        states.append((name, monomial(1.0, factors)))
    derivs = []
    for comp, label in ((0, "h"), (1, "u"), (2, "v")):
        for dv, suffix in (((1, 0), "x"), ((0, 1), "y")):
            derivs.append((f"{label}_{suffix}", monomial(1.0, (Factor(comp, dv, 1),))))
    terms = []
    for row in _SWE_ROWS:
        tag = f"[{_SWE_NAMES[row]}] "
        for sname, sm in states:
            for dname, dm in derivs:
                name = dname if sname == "1" else f"{sname}*{dname}"
                prod = monomial(sm.const * dm.const, sm.factors + dm.factors)
                terms.append(plain_term(tag + name, row, poly([prod]), 2))
    d = Dictionary(terms=tuple(terms), n_components=5, n_space_axes=2,
                   component_names=_SWE_NAMES, prior_kind="none")
    truth = [
        ("[h] h*u_x", -1.0), ("[h] u*h_x", -1.0), ("[h] h*v_y", -1.0), ("[h] v*h_y", -1.0),
        ("[hu] u^2*h_x", -1.0), ("[hu] hu*u_x", -2.0), ("[hu] h*h_x", -g),
        ("[hu] uv*h_y", -1.0), ("[hu] hv*u_y", -1.0), ("[hu] hu*v_y", -1.0),
        ("[hv] uv*h_x", -1.0), ("[hv] hu*v_x", -1.0), ("[hv] hv*u_x", -1.0),
        ("[hv] v^2*h_y", -1.0), ("[hv] hv*v_y", -2.0), ("[hv] h*h_y", -g),
    ]
    return _with_truth(d, truth)


# --------------------------------------------------------------------------
# Gradient-flow systems
# --------------------------------------------------------------------------


def diffusion_prior_library(nu: float = 0.02) -> Dictionary:
    """Dirichlet-type quadratic densities u^2/2, u_x^2/2, u_xx^2/2, whose
    negative variational derivatives are -u, +u_xx, -u_xxxx."""
    densities = [
        EnergyDensityTerm(((0, 2),), 0.5),
        EnergyDensityTerm(((1, 2),), 0.5),
        EnergyDensityTerm(((2, 2),), 0.5),
    ]
    d = build_gradient_flow_library(densities)
    return _with_truth(d, [("u_xx", nu)])


def allen_cahn_prior_library() -> Dictionary:
    """Even-power densities u^2, u^4, u_x^2, u_x^4, u_xx^2, u_xx^4."""
    densities = [
        EnergyDensityTerm(((0, 2),)),
        EnergyDensityTerm(((0, 4),)),
        EnergyDensityTerm(((1, 2),)),
        EnergyDensityTerm(((1, 4),)),
        EnergyDensityTerm(((2, 2),)),
        EnergyDensityTerm(((2, 4),)),
    ]
    d = build_gradient_flow_library(densities)
    # u_t = u_xx + u - u^3 against entries (-2u, -4u^3, 2u_xx, ...)
    return _with_truth(d, [("-2*u", -0.5), ("-4*u^3", 0.25), ("2*u_xx", 0.5)])


def prior_library(system: str, *, nu: float = 0.02, g: float = 9.81,
                  grav_const: float = 1.0, mass: float = 1.0) -> Dictionary:
    builders = {
        "harmonic": harmonic_prior_library,
        "three_body": lambda: three_body_prior_library(grav_const, mass),
        "burgers": burgers_flux_library,
        "swe": lambda: swe_flux_library(g),
        "diffusion": lambda: diffusion_prior_library(nu),
        "allen_cahn": allen_cahn_prior_library,
    }
    if system not in builders:
        raise ValueError(f"unknown system {system!r}")
    return builders[system]()
