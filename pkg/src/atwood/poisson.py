"""Poisson brackets of the expansion constants.

The angular function A_z = (i m / 2)(x+ x-' - x- x+') rotates the factorised
coordinates: {A_z, x_pm} = +- i x_pm at every time.  Inserting the Puiseux
series (in t + t0) for both sides turns this identity into an infinite
linear system for the six elementary brackets among (t0, and the three
series constants).  The system is heavily overdetermined; its consistency
is itself a strong check of the series.

Brackets are solved pointwise at exact rational assignments sigma and then
compared against the closed forms, which avoids rational-function linear
algebra while keeping every verification exact.

Sign convention: the series are functions of t + t0, so d/dt0 acts as the
time derivative with a plus sign; this is the convention in which
{H, t0} = +1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .exactnum import (
    GR_I,
    GR_ONE,
    GR_ZERO,
    CoefficientPoly,
    GaussianRational,
    PuiseuxSeries,
)
from .model import IntegrityError, MachineParams, energy


@dataclass(frozen=True)
class BracketTable:
    """The six elementary brackets at one constant assignment."""

    family: str
    coords: tuple  # ("t0", name1, name2, name3)
    values: dict  # (coord_i, coord_j) i<j by position -> GaussianRational
    sigma: dict

    def bracket(self, u: str, v: str) -> GaussianRational:
        iu, iv = self.coords.index(u), self.coords.index(v)
        if iu == iv:
            return GR_ZERO
        if iu < iv:
            return self.values[(u, v)]
        return -self.values[(v, u)]

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "coords": list(self.coords),
            "sigma": {k: str(v) for k, v in self.sigma.items()},
            "brackets": {f"{{{u},{v}}}": str(w) for (u, v), w in self.values.items()},
        }


def _series_partials(series: PuiseuxSeries, names) -> dict:
    """d/dt0 (= time derivative on series in t + t0) and d/d(constant)."""
    out = {"t0": series.differentiate()}
    for name in names:
        coeffs = [c.derivative(name) for c in series.coeffs]
        out[name] = PuiseuxSeries(
            series.k, series.leading, coeffs, series.zero, series.complete
        )
    return out


def _angular_series(sol, params: MachineParams) -> PuiseuxSeries:
    half_im = CoefficientPoly.const(sol.x_plus.zero.names, GaussianRational(0, Fraction(params.m, 2)))
    xp, xm = sol.x_plus, sol.x_minus
    return (xp * xm.differentiate() - xm * xp.differentiate()).scale(half_im)


def _solve_exact(rows, rhs):
    """Gaussian elimination over GaussianRational for an overdetermined
    system; returns the solution and checks every equation."""
    m = [list(r) + [b] for r, b in zip(rows, rhs)]
    n_unknowns = len(rows[0])
    pivots = []
    r = 0
    for c in range(n_unknowns):
        pivot = next((i for i in range(r, len(m)) if not m[i][c].is_zero()), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = GR_ONE / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == n_unknowns:
            break
    if len(pivots) < n_unknowns:
        raise IntegrityError("bracket system is rank deficient")
    solution = [GR_ZERO] * n_unknowns
    for i, c in enumerate(pivots):
        solution[c] = m[i][-1]
    for i in range(len(m)):
        if i >= len(pivots):
            # eliminated rows must be 0 = 0
            if any(not v.is_zero() for v in m[i]):
                raise IntegrityError(
                    "overdetermined bracket system is inconsistent; the series fail the canonical identity"
                )
    return solution


def solve_brackets(sol, params: MachineParams, sigma: Mapping, n_orders: int | None = None) -> BracketTable:
    """Solve {A_z(t), x_pm(t)} = +-i x_pm(t) for the six elementary brackets.

    ``sol`` must be a symbolic solution; ``sigma`` assigns exact rationals to
    its constants.  Consistency of every surplus equation is verified.
    """
    if sol.mode != "symbolic":
        raise ValueError("bracket solving needs a symbolic solution")
    names = sol.x_plus.zero.names  # ring order, stable across families
    coords = ("t0",) + tuple(names)
    sigma = {k: GaussianRational.coerce(v) if not isinstance(v, str) else _parse(v) for k, v in sigma.items()}
    az = _angular_series(sol, params)
    if n_orders is not None:
        az = az.truncate(n_orders)
    daz = _series_partials(az, names)
    pairs = list(itertools.combinations(coords, 2))
    rows = []
    rhs = []
    for target, sign in ((sol.x_plus, GR_I), (sol.x_minus, -GR_I)):
        if n_orders is not None:
            target = target.truncate(n_orders)
        dtg = _series_partials(target, names)
        combos = {}
        lead = None
        upper = None
        for u, v in pairs:
            s_uv = daz[u] * dtg[v] - daz[v] * dtg[u]
            combos[(u, v)] = s_uv
            lead = s_uv.leading if lead is None else min(lead, s_uv.leading)
            hi = s_uv.leading + len(s_uv.coeffs)
            upper = hi if upper is None else min(upper, hi)
        rhs_series = target.scale(sign)
        lead = min(lead, rhs_series.leading)
        upper = min(upper, rhs_series.leading + len(rhs_series.coeffs))
        for num in range(lead, upper):
            row = [combos[p].coeff_at(num).eval_exact(sigma) for p in pairs]
            b = rhs_series.coeff_at(num)
            rhs_val = b.eval_exact(sigma) if isinstance(b, CoefficientPoly) else b
            if all(v.is_zero() for v in row) and rhs_val.is_zero():
                continue
            rows.append(row)
            rhs.append(rhs_val)
    solution = _solve_exact(rows, rhs)
    values = dict(zip(pairs, solution))
    return BracketTable(family=sol.family, coords=coords, values=values, sigma=dict(sigma))


def _parse(text: str) -> GaussianRational:
    from .exactnum import parse_gaussian

    return parse_gaussian(text)


# ---------------------------------------------------------------------------
# Closed forms of the bracket tables
# ---------------------------------------------------------------------------


def closed_form_brackets(family: str, params: MachineParams) -> dict:
    """The published bracket tables as exact Laurent polynomials.

    Keys are ordered coordinate pairs matching :func:`solve_brackets`.
    """
    m, g = params.m, params.g
    if family == "integrable":
        names = ("b1", "c1", "d1")
        b1 = CoefficientPoly.variable(names, "b1")
        c1 = CoefficientPoly.variable(names, "c1")
        d1 = CoefficientPoly.variable(names, "d1")
        zero = CoefficientPoly.zero(names)
        g2 = CoefficientPoly.const(names, g * g)
        return {
            ("t0", "b1"): zero,
            ("t0", "c1"): b1 / (d1 * d1) / (4 * m),
            ("t0", "d1"): zero,
            # {c1,b1} = (g^2+32 b1 c1)/(32 m d1^2); stored pair is (b1, c1)
            ("b1", "c1"): -(g2 + b1 * c1 * 32) / (d1 * d1) / (32 * m),
            ("b1", "d1"): b1 / d1 / (2 * m),
            ("c1", "d1"): (g2 + b1 * c1 * 16) / (b1 * d1) / (32 * m),
        }
    if family == "q2":
        names = ("c1", "c2", "d1")
        c1 = CoefficientPoly.variable(names, "c1")
        c2 = CoefficientPoly.variable(names, "c2")
        d1 = CoefficientPoly.variable(names, "d1")
        zero = CoefficientPoly.zero(names)
        i = GaussianRational(0, 1)
        g3 = g**3
        return {
            ("t0", "c1"): zero,
            ("t0", "c2"): CoefficientPoly.const(names, Fraction(14, 15)) / (d1 * d1),
            ("t0", "d1"): zero,
            # {c1,c2} = -i (13412 c1^4 m - 19683 c2 g^4)/(65610 d1^2 g^3 m)
            ("c1", "c2"): (
                c1**4 * GaussianRational(0, -Fraction(13412, 65610))
                + c2 * GaussianRational(0, Fraction(19683, 65610) * g**4 / m)
            )
            / (d1 * d1)
            / g3,
            # {d1,c1} = i 3g/(20 m d1)  -> stored (c1, d1) = -that
            ("c1", "d1"): CoefficientPoly.const(names, GaussianRational(0, -Fraction(3, 20) * g / m)) / d1,
            # {d1,c2} = i 13412 c1^3/(32805 g^3 d1) -> stored (c2, d1) = -that
            ("c2", "d1"): c1**3 * GaussianRational(0, -Fraction(13412, 32805)) / d1 / g3,
        }
    raise ValueError(f"unknown family {family!r}")


def closed_form_table(family: str, params: MachineParams, sigma: Mapping) -> dict:
    sigma = {k: GaussianRational.coerce(v) if not isinstance(v, str) else _parse(v) for k, v in sigma.items()}
    return {
        pair: poly.eval_exact(sigma)
        for pair, poly in closed_form_brackets(family, params).items()
    }


# ---------------------------------------------------------------------------
# Brackets with the Hamiltonian and the Jacobi identity
# ---------------------------------------------------------------------------


def hamiltonian_brackets(sol, table: BracketTable, params: MachineParams) -> dict:
    """{H, t0} and {H, constant} from the energy closed form and the table.

    For a valid series family this returns {H, t0} = 1 and zero for every
    constant of motion.
    """
    h = energy(sol, params)  # CoefficientPoly in the constants
    names = sol.x_plus.zero.names
    sigma = table.sigma
    out = {}
    for target in table.coords:
        total = GR_ZERO
        for q in names:
            dh = h.derivative(q).eval_exact(sigma)
            total = total + dh * table.bracket(q, target)
        out[target] = total
    return out


def _poisson_of(coord: str, poly: CoefficientPoly, forms: dict, coords) -> CoefficientPoly:
    names = poly.names
    total = CoefficientPoly.zero(names)
    for q in names:
        dp = poly.derivative(q)
        if dp.is_zero():
            continue
        iu, iv = coords.index(coord), coords.index(q)
        if iu == iv:
            continue
        if iu < iv:
            b = forms[(coord, q)]
        else:
            b = -forms[(q, coord)]
        total = total + dp * b
    return total


def jacobi_check(forms: dict, coords, sigma_grid) -> Fraction:
    """Max |cyclic Jacobi sum| over all coordinate triples and assignments.

    ``forms`` maps ordered pairs to bracket polynomials (t0 never appears in
    a bracket value, so d/dt0 of every form vanishes).  Exact arithmetic:
    the result is exactly zero for a valid Poisson structure.
    """
    residual_sq = Fraction(0)
    triples = list(itertools.combinations(coords, 3))
    for sigma in sigma_grid:
        sig = {k: GaussianRational.coerce(v) if not isinstance(v, str) else _parse(v) for k, v in sigma.items()}
        for u, v, w in triples:
            total = GR_ZERO
            for a, b, c in ((u, v, w), (v, w, u), (w, u, v)):
                ib, ic = coords.index(b), coords.index(c)
                inner = forms[(b, c)] if ib < ic else -forms[(c, b)]
                total = total + _poisson_of(a, inner, forms, coords).eval_exact(sig)
            residual_sq = max(residual_sq, total.abs2())
        # may be irrational in general; squared modulus is exact
    return residual_sq
