"""Leading-order balances, the Kowalevski matrix, and the full recursive
Puiseux expansion with resonance bookkeeping.

Two families of singular balances exist for positive mass ratio:

* the ``integrable`` branch (q < 2): exponents p + q = 1, realised with a
  three-constant expansion only at M/m = 3 (p = -1/2, q = 3/2), series in
  t**(1/2);
* the ``q2`` branch: q = 2, p = -r/k for admissible coprime (k, r) with
  k odd, r even, k < r < 2k, mass ratio 4(r+k)/(2k-r), series in t**(1/k).

The recursion solves, order by order, the linear system K(s) v = rhs where
K(s) is the 4x4 Kowalevski matrix in the unknown coefficient vector
(a, b, d, l) of (x_plus, x_minus, z, lambda).  K(s) always has the arrowhead
sparsity

    [[alpha,     0,     0,  -a1],
     [    0,  beta,     0,  -b1],
     [    0,     0, gamma,   d1],
     [  -b1,   -a1, 2*d1,    0]]

with exact rational alpha, beta, gamma, so every solve and every resonance
decision happens in closed form inside the Laurent ring; det K(s) =
-d1^2 (beta*gamma + alpha*gamma + 2*alpha*beta).

At a resonant step (singular K) the right-hand side must be orthogonal to
the left nullspace; a new free constant then enters along the right
nullvector.  Two normalisations are supported, see :func:`expand`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

from .exactnum import (
    GR_I,
    GR_ONE,
    GR_ZERO,
    CoefficientPoly,
    ExponentOverflowError,
    GaussianRational,
    PuiseuxSeries,
    coeff_is_zero,
    parse_gaussian,
)
from .model import MachineParams


class ObstructionError(RuntimeError):
    """An unsolvable resonance: the compatibility scalar did not vanish."""

    def __init__(self, s: int, detail):
        super().__init__(f"resonance at s={s} is obstructed: {detail!r}")
        self.s = s
        self.detail = detail


# ---------------------------------------------------------------------------
# Leading-order balances
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LeadingBalance:
    """A consistent leading-order singular behaviour.

    ``x_plus ~ a1 t^p``, ``x_minus ~ b1 t^q``, ``z ~ d1 t^((p+q)/2)``,
    ``lambda ~ l1 t^-2``; ``k`` is the branch denominator of the expansion.
    """

    family: str  # "integrable" | "q2"
    p: Fraction
    q: Fraction
    mass_ratio: Fraction
    k: int
    r: int | None = None

    def __post_init__(self):
        if self.family not in ("integrable", "q2"):
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def ring_names(self) -> tuple:
        if self.family == "integrable":
            return ("b1", "c1", "d1")
        return ("c1", "c2", "d1")

    def supports_expansion(self) -> bool:
        if self.family == "q2":
            return True
        return self.p == Fraction(-1, 2)

    def l1(self, params: MachineParams) -> Fraction:
        if self.family == "integrable":
            return Fraction(3, 4) * params.m
        return params.m * Fraction(self.r * (self.r + self.k), self.k**2)

    def b1_exact(self, params: MachineParams) -> GaussianRational:
        """Leading x_minus coefficient; fixed by the balance in the q2 family."""
        if self.family != "q2":
            raise ValueError("b1 is a free constant in the integrable family")
        k, r = self.k, self.r
        return GaussianRational(0, -params.g * Fraction(k**2, (r + 2 * k) * (r - k)))

    def machine_params(self, m: Fraction = Fraction(1), g: Fraction = Fraction(1)) -> MachineParams:
        m = Fraction(m)
        return MachineParams(m=m, M=m * self.mass_ratio, g=Fraction(g))

    # exponents (numerators over k) of the four series
    @property
    def leading_numerators(self) -> dict:
        if self.family == "integrable":
            return {"x_plus": -1, "x_minus": 3, "z": 1, "lam": -4}
        k, r = self.k, self.r
        return {"x_plus": -r, "x_minus": 2 * k, "z": k - r // 2, "lam": -2 * k}

    def resonant_steps(self) -> tuple:
        if self.family == "integrable":
            return (2,)
        return (self.r - self.k, self.r)

    def kowalevski_indices(self) -> tuple:
        """All roots of det K(s)."""
        if self.family == "integrable":
            return (-2, 0, 0, 2)
        return (-self.k, 0, self.r - self.k, self.r)

    def leading_data(self, params: MachineParams) -> dict:
        names = self.ring_names
        d1 = CoefficientPoly.variable(names, "d1")
        if self.family == "integrable":
            b1 = CoefficientPoly.variable(names, "b1")
        else:
            b1 = CoefficientPoly.const(names, self.b1_exact(params))
        return {
            "a1": d1 * d1 / b1,
            "b1": b1,
            "d1": d1,
            "l1": CoefficientPoly.const(names, self.l1(params)),
        }


def _rational_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def leading_balance(mass_ratio) -> list:
    """All leading balances consistent with a given positive mass ratio."""
    ratio = Fraction(mass_ratio)
    if ratio <= 0:
        raise ValueError("mass ratio must be positive")
    out = []
    # q < 2 branch: (2p - 1)^2 = 1 + M/m, with p in (-1, 0) so M/m in (0, 8)
    rho = _rational_sqrt(1 + ratio)
    if rho is not None and ratio < 8:
        p = (1 - rho) / 2
        if -1 < p < 0:
            k = math.lcm(p.denominator, 2)
            out.append(
                LeadingBalance(family="integrable", p=p, q=1 - p, mass_ratio=ratio, k=k)
            )
    # q = 2 branch: M/m = 4(r+k)/(2k-r) fixes r/k = 2(ratio-2)/(ratio+4)
    p = Fraction(-2) * (ratio - 2) / (ratio + 4)
    if -2 < p < 0:
        k = p.denominator
        r = -p.numerator
        if k % 2 == 1 and r % 2 == 0 and k < r < 2 * k:
            out.append(
                LeadingBalance(family="q2", p=p, q=Fraction(2), mass_ratio=ratio, k=k, r=r)
            )
    return out


def admissible_pairs(k_max: int) -> list:
    """All admissible (k, r, M/m) with k <= k_max.

    k odd, r = 2r' with k/2 < r' < k and gcd(r, k) = 1.
    """
    out = []
    for k in range(3, int(k_max) + 1, 2):
        for rp in range(k // 2 + 1, k):
            r = 2 * rp
            if math.gcd(r, k) != 1:
                continue
            ratio = Fraction(4 * (r + k), 2 * k - r)
            out.append((k, r, ratio))
    return out


# ---------------------------------------------------------------------------
# Kowalevski matrix
# ---------------------------------------------------------------------------


def _abc_scalars(balance: LeadingBalance, params: MachineParams, s: int):
    """The exact diagonal scalars (alpha, beta, gamma) of K(s)."""
    m, M = params.m, params.M
    l1 = balance.l1(params)
    if balance.family == "integrable":
        alpha = m * Fraction((s - 1) * (s - 3), 4) - l1
        beta = m * Fraction((s + 1) * (s + 3), 4) - l1
        gamma = M * Fraction((s + 1) * (s - 1), 4) + l1
    else:
        k, r = balance.k, balance.r
        alpha = m * Fraction((s - r) * (s - r - k), k**2) - l1
        beta = m * Fraction((2 * k + s) * (k + s), k**2) - l1
        gamma = M * Fraction(2 * k + 2 * s - r, 2) * Fraction(2 * s - r, 2) / (k**2) + l1
    return alpha, beta, gamma


@dataclass(frozen=True)
class KowalevskiMatrix:
    s: int
    family: str
    entries: tuple  # 4x4 nested tuple of CoefficientPoly

    def determinant(self) -> CoefficientPoly:
        """Cofactor-expansion determinant, exact in the Laurent ring."""

        def det(rows):
            n = len(rows)
            if n == 1:
                return rows[0][0]
            total = None
            for j in range(n):
                minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
                term = rows[0][j] * det(minor)
                if j % 2:
                    term = -term
                total = term if total is None else total + term
            return total

        return det([list(row) for row in self.entries])


def kowalevski_matrix(s: int, balance: LeadingBalance, params: MachineParams) -> KowalevskiMatrix:
    if s < 1:
        raise ValueError("the recursion index s starts at 1")
    names = balance.ring_names
    data = balance.leading_data(params)
    a1, b1, d1 = data["a1"], data["b1"], data["d1"]
    alpha, beta, gamma = _abc_scalars(balance, params, s)
    c = lambda q: CoefficientPoly.const(names, q)
    zero = CoefficientPoly.zero(names)
    entries = (
        (c(alpha), zero, zero, -a1),
        (zero, c(beta), zero, -b1),
        (zero, zero, c(gamma), d1),
        (-b1, -a1, d1 * 2, zero),
    )
    return KowalevskiMatrix(s=s, family=balance.family, entries=entries)


def determinant_closed_form(s: int, balance: LeadingBalance, params: MachineParams) -> CoefficientPoly:
    names = balance.ring_names
    m = params.m
    d1sq = CoefficientPoly.monomial(
        names, [2 if n == "d1" else 0 for n in names], GR_ONE
    )
    if balance.family == "integrable":
        scalar = -Fraction(m * m, 2) * (s + 2) * s * s * (s - 2)
    else:
        k, r = balance.k, balance.r
        scalar = (
            -6 * m * m * Fraction(2 * k + r, k**4 * (2 * k - r))
            * s * (s + k) * (s - r) * (s + k - r)
        )
    return d1sq * scalar


# ---------------------------------------------------------------------------
# The expansion itself
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantEntry:
    name: str
    step: int


@dataclass(frozen=True)
class ResonanceEvent:
    s: int
    det_zero: bool
    rhs_zero: bool
    solvable: bool
    injected: str | None
    component: str | None

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "det_zero": self.det_zero,
            "rhs_zero": self.rhs_zero,
            "solvable": self.solvable,
            "injected": self.injected,
            "component": self.component,
        }


@dataclass(frozen=True)
class PuiseuxSolution:
    """The four series with their free-constant registry and resonance log."""

    family: str
    k: int
    r: int | None
    params: MachineParams
    policy: str
    n_orders: int
    x_plus: PuiseuxSeries
    x_minus: PuiseuxSeries
    z: PuiseuxSeries
    lam: PuiseuxSeries
    constants: tuple
    resonance_log: tuple
    mode: str
    rhs_history: tuple | None = None

    def free_constant_count(self) -> int:
        """Free constants including the implicit time origin."""
        return len(self.constants) + 1

    @property
    def series(self) -> dict:
        return {
            "x_plus": self.x_plus,
            "x_minus": self.x_minus,
            "z": self.z,
            "lam": self.lam,
        }

    def substitute(self, sigma: Mapping) -> "PuiseuxSolution":
        mode, sig = normalize_sigma(sigma)
        return replace(
            self,
            x_plus=self.x_plus.substitute(sig),
            x_minus=self.x_minus.substitute(sig),
            z=self.z.substitute(sig),
            lam=self.lam.substitute(sig),
            mode=mode,
        )


class _Ring:
    """Coefficient ring adapter: symbolic polys, exact numbers, double
    floats, or arbitrary-precision mpmath floats.

    The high-precision mode matters for deep expansions at irrational
    constants: roundoff injected into the recursion decays slower than the
    true coefficients (it follows the nearest singularity of the *generic*
    solution), so double precision loses the tail after ~140 orders.
    """

    def __init__(self, mode: str, names, sigma=None):
        self.mode = mode
        self.names = tuple(names)
        self.sigma = sigma or {}
        if mode == "symbolic":
            self.zero = CoefficientPoly.zero(self.names)
            self.one = CoefficientPoly.const(self.names, 1)
        elif mode == "exact":
            self.zero = GR_ZERO
            self.one = GR_ONE
        elif mode == "float":
            self.zero = 0j
            self.one = 1 + 0j
        elif mode == "mp":
            import mpmath

            self.zero = mpmath.mpc(0)
            self.one = mpmath.mpc(1)
        else:
            raise ValueError(mode)

    def from_gr(self, v: GaussianRational):
        if self.mode == "symbolic":
            return CoefficientPoly.const(self.names, v)
        if self.mode == "exact":
            return v
        if self.mode == "mp":
            import mpmath

            return mpmath.mpc(
                mpmath.mpf(v.re.numerator) / v.re.denominator,
                mpmath.mpf(v.im.numerator) / v.im.denominator,
            )
        return v.to_complex()

    def from_q(self, q: Fraction):
        return self.from_gr(GaussianRational(q))

    def var(self, name: str):
        if self.mode == "symbolic":
            return CoefficientPoly.variable(self.names, name)
        try:
            v = self.sigma[name]
        except KeyError:
            raise ValueError(f"constant assignment is missing {name!r}") from None
        if self.mode == "exact":
            return v
        if self.mode == "mp":
            import mpmath

            return mpmath.mpc(v)
        return complex(v)

    def is_zero(self, x, scale: float = 1.0) -> bool:
        if self.mode == "float":
            return abs(x) <= 1e-8 * max(scale, 1e-30)
        if self.mode == "mp":
            import mpmath

            tol = mpmath.mpf(10) ** (8 - mpmath.mp.dps)
            return abs(x) <= tol * max(scale, 1e-30)
        return coeff_is_zero(x)


def _is_mp(value) -> bool:
    return type(value).__module__.split(".")[0] == "mpmath"


def normalize_sigma(sigma) -> tuple:
    """Classify an assignment as exact, float or mpmath and normalise it."""
    if sigma is None:
        return "symbolic", {}
    out = {}
    mode = "exact"
    for key, value in sigma.items():
        if isinstance(value, str):
            value = parse_gaussian(value)
        elif isinstance(value, (int, Fraction)):
            value = GaussianRational(value)
        out[key] = value
        if _is_mp(value):
            mode = "mp"
        elif not isinstance(value, GaussianRational) and mode != "mp":
            mode = "float"
    if mode == "float":
        out = {
            k: complex(v.to_complex() if isinstance(v, GaussianRational) else v)
            for k, v in out.items()
        }
    return mode, out


def expand(
    balance: LeadingBalance,
    params: MachineParams,
    n_orders: int,
    constant_policy: str = "paper",
    sigma=None,
    record_rhs: bool = False,
    mp_dps: int | None = None,
) -> PuiseuxSolution:
    """Solve the coefficient recursion for s = 1..n_orders.

    ``constant_policy`` fixes how a new free constant is parametrised at a
    resonant step:

    * ``"paper"`` -- the constant is the new x_minus coefficient at the first
      resonance and the new lambda coefficient at the second (this is the
      parametrisation of the published tables);
    * ``"b_normalized"`` -- always the new x_minus coefficient.

    In both cases the particular solution is taken with a zero entry in the
    normalised component, so the constant *is* that series coefficient.

    With ``sigma`` the same recursion runs over exact Gaussian-rational or
    complex-float coefficients instead of symbolic polynomials; mpmath
    inputs select arbitrary-precision arithmetic at ``mp_dps`` digits (the
    ambient mpmath precision when not given).
    """
    if constant_policy not in ("paper", "b_normalized"):
        raise ValueError(f"unknown constant policy {constant_policy!r}")
    if mp_dps is not None:
        import mpmath

        with mpmath.workdps(mp_dps):
            return expand(balance, params, n_orders, constant_policy, sigma, record_rhs)
    if not balance.supports_expansion():
        raise ValueError(
            f"no expansion is implemented for the {balance.family} branch at p={balance.p}"
        )
    if n_orders < max(balance.resonant_steps()) + 1:
        raise ValueError("n_orders must exceed the largest Kowalevski index")
    mode, sig = normalize_sigma(sigma)
    ring = _Ring(mode, balance.ring_names, sig)
    m, M, g = params.m, params.M, params.g
    if balance.family == "q2" and params.mass_ratio != balance.mass_ratio:
        raise ValueError("params mass ratio does not match the balance")
    if balance.family == "integrable" and params.mass_ratio != 3:
        raise ValueError("integrable expansion requires M/m = 3")

    d1 = ring.var("d1")
    b1 = ring.var("b1") if balance.family == "integrable" else ring.from_gr(
        balance.b1_exact(params)
    )
    a1 = d1 * d1 / b1
    l1 = ring.from_q(balance.l1(params))
    d1sq = d1 * d1

    # forcing exponents: where -img and -Mg constants land in the recursion
    if balance.family == "integrable":
        s_img_plus, s_img_minus, s_mg = 5, 1, 3
    else:
        s_img_plus, s_img_minus, s_mg = 2 * balance.k + balance.r, None, balance.k + balance.r // 2
    img = ring.from_gr(GaussianRational(0, m * g))
    mg = ring.from_gr(GaussianRational(M * g))

    resonances = balance.resonant_steps()
    first_resonance = resonances[0]
    cname = {}
    if balance.family == "integrable":
        cname[resonances[0]] = "c1"
    else:
        cname[resonances[0]] = "c1"
        cname[resonances[1]] = "c2"

    a = {1: a1}
    b = {1: b1}
    d = {1: d1}
    l = {1: l1}
    log = [
        ResonanceEvent(0, True, True, True, "t0", None),
        ResonanceEvent(0, True, True, True, "d1", None),
    ]
    constants = [ConstantEntry("d1", 0)]
    if balance.family == "integrable":
        log.append(ResonanceEvent(0, True, True, True, "b1", None))
        constants.append(ConstantEntry("b1", 0))
    rhs_history = {} if record_rhs else None

    if mode == "symbolic":
        from .exactnum import _accumulate_product, _poly_from_acc

        def conv(seq1, seq2, s):
            acc: dict = {}
            for j in range(2, s + 1):
                x, y = seq1[j], seq2[s + 2 - j]
                if x.terms and y.terms:
                    _accumulate_product(acc, x, y)
            return _poly_from_acc(ring.names, acc)

    else:

        def conv(seq1, seq2, s):
            acc = ring.zero
            for j in range(2, s + 1):
                x, y = seq1[j], seq2[s + 2 - j]
                if coeff_is_zero(x) or coeff_is_zero(y):
                    continue
                acc = acc + x * y
            return acc

    for s in range(1, n_orders):
        A = conv(a, l, s)
        B = conv(b, l, s)
        D = -conv(d, l, s)
        L = -conv(d, d, s) + conv(a, b, s)
        if s == s_img_plus:
            A = A - img
        if s_img_minus is not None and s == s_img_minus:
            B = B + img
        if s == s_mg:
            D = D - mg
        if rhs_history is not None:
            rhs_history[s] = (A, B, D, L)

        alpha, beta, gamma = _abc_scalars(balance, params, s)
        det_scalar = beta * gamma + alpha * gamma + 2 * alpha * beta

        if det_scalar != 0:
            if alpha != 0 and beta != 0 and gamma != 0:
                t_sum = 1 / alpha + 1 / beta + Fraction(2) / gamma
                num = L + (b1 * A) / alpha + (a1 * B) / beta - (d1 * D) * 2 / gamma
                l_new = num / (-t_sum) / d1sq
                a_new = (A + a1 * l_new) / alpha
                b_new = (B + b1 * l_new) / beta
                d_new = (D - d1 * l_new) / gamma
            elif alpha == 0:
                l_new = -(A / a1)
                b_new = (B + b1 * l_new) / beta
                d_new = (D - d1 * l_new) / gamma
                a_new = -(L + a1 * b_new - (d1 * d_new) * 2) / b1
            elif beta == 0:
                l_new = -(B / b1)
                a_new = (A + a1 * l_new) / alpha
                d_new = (D - d1 * l_new) / gamma
                b_new = -(L + b1 * a_new - (d1 * d_new) * 2) / a1
            else:  # gamma == 0
                l_new = D / d1
                a_new = (A + a1 * l_new) / alpha
                b_new = (B + b1 * l_new) / beta
                d_new = (L + b1 * a_new + a1 * b_new) / (d1 * 2)
        else:
            # Resonant step: K(s) is singular.
            rhs_zero = all(ring.is_zero(x) for x in (A, B, D, L))
            want = "l" if (constant_policy == "paper" and s == resonances[-1] and len(resonances) > 1) else "b"
            if alpha != 0 and beta != 0 and gamma != 0:
                scale = sum(
                    _magnitude(x)
                    for x in (b1 * A / alpha, a1 * B / beta, d1 * D * 2 / gamma, L)
                ) if mode in ("float", "mp") else 1.0
                w = (b1 * A) / alpha + (a1 * B) / beta - (d1 * D) * 2 / gamma + L
                if not ring.is_zero(w, scale):
                    raise ObstructionError(s, w)
                nullvec = (a1 / alpha, b1 / beta, -(d1 / gamma), ring.one)
                if want == "l":
                    part = (A / alpha, B / beta, D / gamma, ring.zero)
                else:
                    l_p = -(B / b1)
                    part = (
                        (A + a1 * l_p) / alpha,
                        ring.zero,
                        (D - d1 * l_p) / gamma,
                        l_p,
                    )
                    scale_elem = ring.from_q(beta) / b1
                    nullvec = tuple(x * scale_elem for x in nullvec)
            elif beta == 0 and gamma == 0:
                scale = (_magnitude(d1 * B) + _magnitude(b1 * D)) if mode in ("float", "mp") else 1.0
                w = d1 * B + b1 * D
                if not ring.is_zero(w, scale):
                    raise ObstructionError(s, w)
                want = "b"  # the nullvector has no lambda component here
                l_p = -(B / b1)
                a_p = (A + a1 * l_p) / alpha
                part = (a_p, ring.zero, (L + b1 * a_p) / (d1 * 2), l_p)
                nullvec = (ring.zero, ring.one, d1 / (b1 * 2), ring.zero)
            else:
                raise ObstructionError(
                    s, f"unexpected degeneracy pattern alpha={alpha} beta={beta} gamma={gamma}"
                )
            name = cname[s]
            c_elem = ring.var(name)
            a_new, b_new, d_new, l_new = (
                part[0] + nullvec[0] * c_elem,
                part[1] + nullvec[1] * c_elem,
                part[2] + nullvec[2] * c_elem,
                part[3] + nullvec[3] * c_elem,
            )
            constants.append(ConstantEntry(name, s))
            log.append(ResonanceEvent(s, True, rhs_zero, True, name, want))

        a[s + 1], b[s + 1], d[s + 1], l[s + 1] = a_new, b_new, d_new, l_new
        if mode == "symbolic":
            guard = 10 * n_orders
            for x in (a_new, b_new, d_new, l_new):
                if x.max_exponent_magnitude() > guard:
                    raise ExponentOverflowError(
                        f"Laurent exponent magnitude exceeded {guard} at step s={s}"
                    )

    leads = balance.leading_numerators
    k = balance.k

    def series(coeffs_map, lead):
        return PuiseuxSeries(
            k, lead, [coeffs_map[j] for j in range(1, n_orders + 1)], ring.zero
        )

    return PuiseuxSolution(
        family=balance.family,
        k=k,
        r=balance.r,
        params=params,
        policy=constant_policy,
        n_orders=n_orders,
        x_plus=series(a, leads["x_plus"]),
        x_minus=series(b, leads["x_minus"]),
        z=series(d, leads["z"]),
        lam=series(l, leads["lam"]),
        constants=tuple(constants),
        resonance_log=tuple(log),
        mode=mode,
        rhs_history=tuple(sorted(rhs_history.items())) if rhs_history is not None else None,
    )


def _magnitude(x) -> float:
    if isinstance(x, complex) or _is_mp(x):
        return float(abs(x))
    return 1.0


# ---------------------------------------------------------------------------
# Resonance structure and the covector solvability test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResonanceStructure:
    k: int
    r: int
    first_index: int
    second_index: int
    family_label: str  # "generic" | "r=k+1"
    predicted_support: tuple  # steps where the rhs may be nonzero
    actual_nonzero: tuple  # steps (<= r) where the expansion rhs was nonzero
    second_index_in_support: bool
    verified: bool


def resonance_structure(k: int, r: int, params: MachineParams | None = None) -> ResonanceStructure:
    """Predicted and observed pattern of nonzero right-hand sides up to s=r.

    For r >= k+2 the rhs can be nonzero only at multiples of (r - k); since
    gcd(r, k) = 1 the second Kowalevski index s = r is never such a multiple,
    which is what makes the second constant enter unobstructed.  For
    r = k+1 every step is potentially nonzero and solvability rests on the
    covector compatibility, see :func:`covector_test`.
    """
    balances = [b for b in leading_balance(Fraction(4 * (r + k), 2 * k - r)) if b.family == "q2"]
    if not balances or balances[0].k != k or balances[0].r != r:
        raise ValueError(f"({k}, {r}) is not an admissible pair")
    balance = balances[0]
    if params is None:
        params = balance.machine_params()
    gap = r - k
    if gap == 1:
        label = "r=k+1"
        predicted = tuple(range(1, r + 1))
    else:
        label = "generic"
        predicted = tuple(s for s in range(1, r + 1) if s % gap == 0)
    sol = expand(balance, params, r + 1, record_rhs=True)
    actual = tuple(
        s
        for s, rhs in sol.rhs_history
        if s <= r and not all(coeff_is_zero(x) for x in rhs)
    )
    in_support = (gap == 1) or (r % gap == 0)
    verified = all(s in predicted for s in actual) and (gap == 1 or r not in actual)
    return ResonanceStructure(
        k=k,
        r=r,
        first_index=gap,
        second_index=r,
        family_label=label,
        predicted_support=predicted,
        actual_nonzero=actual,
        second_index_in_support=in_support,
        verified=verified,
    )


@dataclass(frozen=True)
class CovectorReport:
    k: int
    r: int
    covector: tuple  # four CoefficientPoly entries
    uk_products: tuple  # U . K(r), four polys, all zero when valid
    w: tuple  # ((s, W(s) poly), ...) for s = 2..r
    w_at_r_zero: bool


def covector_test(k: int, params: MachineParams | None = None, s_max: int | None = None) -> CovectorReport:
    """Left-nullcovector check for the r = k+1 family.

    Verifies U.K(r) = 0 exactly and computes the compatibility scalars
    W(s) = u1 A + u2 B + u3 D + u4 L along the expansion; W(r) = 0 is what
    lets the second constant in.
    """
    r = k + 1
    balance_list = [b for b in leading_balance(Fraction(4 * (r + k), 2 * k - r)) if b.family == "q2"]
    if not balance_list:
        raise ValueError(f"k={k} does not give an admissible r=k+1 pair")
    balance = balance_list[0]
    if params is None:
        params = balance.machine_params()
    names = balance.ring_names
    m, g = params.m, params.g
    d1 = CoefficientPoly.variable(names, "d1")
    const = lambda v: CoefficientPoly.const(names, v)
    u1 = const(2 * g * g * Fraction(k**5))
    u2 = d1 * d1 * Fraction((k + 1) * (3 * k + 1) ** 2)
    u3 = d1 * GaussianRational(0, g * Fraction(k**2 * (k - 1) * (3 * k + 1)))
    u4 = const(GaussianRational(0, -2 * m * g * Fraction(k * (k + 1) * (2 * k + 1) * (3 * k + 1))))
    u = (u1, u2, u3, u4)

    km = kowalevski_matrix(r, balance, params)
    uk = tuple(
        u[0] * km.entries[0][j] + u[1] * km.entries[1][j] + u[2] * km.entries[2][j] + u[3] * km.entries[3][j]
        for j in range(4)
    )

    n = (s_max or r) + 1
    sol = expand(balance, params, n, record_rhs=True)
    w_list = []
    for s, (A, B, D, L) in sol.rhs_history:
        if 2 <= s <= (s_max or r):
            w_list.append((s, u1 * A + u2 * B + u3 * D + u4 * L))
    w_at_r = next((w for s, w in w_list if s == r), None)
    return CovectorReport(
        k=k,
        r=r,
        covector=u,
        uk_products=uk,
        w=tuple(w_list),
        w_at_r_zero=w_at_r is not None and w_at_r.is_zero(),
    )


def w3_closed_form(k: int, params: MachineParams, names=("c1", "c2", "d1")) -> CoefficientPoly:
    """Closed form of the compatibility scalar at s=3 in the r=k+1 family."""
    m, g = params.m, params.g
    c1 = CoefficientPoly.variable(names, "c1")
    d1 = CoefficientPoly.variable(names, "d1")
    scalar = -m * Fraction(
        (k - 2) * (k + 1) * (2 * k + 1) * (3 * k + 1) ** 4, 4 * k**5 * (k + 2)
    ) / (g * g)
    return c1**3 * d1**2 * scalar
