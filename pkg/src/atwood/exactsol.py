"""Closed-form trigonometric solution of the integrable machine (M/m = 3).

The zero-separation-constant orbit is rational in a uniformising variable U
that makes the two-sheeted time cover single valued: t = -t_inf U^2/(1-U^2)
with branch points t = 0 and t = t_inf.  Positions and the multiplier are

    x_plus  = -C * P(U) / U,   x_minus = C * P(U) * U^3,   z = i C P(U) U,

with C = 2Kg/(omega^2 (K^2-1)^2 (U^2-1)^2) and
P(U) = ((K-i)U - K - i) ((K+i)U + K - i).

All position formulas are rational in (K, U, g, omega^2), so they evaluate
exactly over Gaussian rationals; velocities additionally need omega itself
(exact only when 2E is a perfect rational square, e.g. E = 1/2, g = 1).

``bridge_constants`` maps (K, E) to the three Kowalevski constants
(b1, c1, d1) of the integrable series expansion around t = 0, using
principal branches throughout.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass
from fractions import Fraction

from .exactnum import GR_I, GaussianRational
from .model import CartesianState, MachineParams


class PoleError(ValueError):
    """Evaluation at a pole of the closed-form solution."""

    def __init__(self, which: str, u):
        super().__init__(f"{which} diverges at U = {u}")
        self.which = which


@dataclass(frozen=True)
class TrigParams:
    """Modulus parameter K and energy E of the trigonometric orbit."""

    K: complex
    E: float
    g: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        if self.K == 1 or self.K == -1 or self.K == 0:
            raise ValueError("K in {0, +-1} degenerates the parametrisation")
        if not (isinstance(self.E, (int, float, Fraction)) and self.E > 0):
            raise ValueError("E must be a positive real number")

    @property
    def omega2(self):
        return self.g * self.g / (2 * self.E)

    @property
    def omega(self) -> complex:
        return cmath.sqrt(complex(self.omega2))

    @property
    def alpha(self):
        return 2 * self.g / self.E

    @property
    def t_inf(self) -> complex:
        K = complex(self.K)
        return (4j * K / (K * K - 1)) / self.omega

    def machine_params(self) -> MachineParams:
        m = Fraction(self.m)
        return MachineParams(m=m, M=3 * m, g=Fraction(self.g))

    def exact_omega(self) -> Fraction | None:
        """omega as an exact rational, when 2E is a perfect rational square."""
        w2 = Fraction(self.g) ** 2 / (2 * Fraction(self.E))
        n, d = w2.numerator, w2.denominator
        rn, rd = math.isqrt(n), math.isqrt(d)
        if rn * rn == n and rd * rd == d:
            return Fraction(rn, rd)
        return None


def _bracket(K, U, i):
    """P(U) and P'(U) for the common numerator factor."""
    p = ((K - i) * U - K - i) * ((K + i) * U + K - i)
    dp = (K * K + 1) * U * 2 - i * K * 4
    return p, dp


def trig_state(params: TrigParams, U, exact: bool = False):
    """Closed-form state at uniformiser U, with velocities and multiplier.

    With ``exact=True`` (and Gaussian-rational inputs) everything is computed
    over GaussianRational; this requires a rational omega.
    """
    if exact:
        i = GR_I
        K = GaussianRational(Fraction(params.K))
        g = GaussianRational(Fraction(params.g))
        m = GaussianRational(Fraction(params.m))
        w2 = GaussianRational(Fraction(params.g) ** 2 / (2 * Fraction(params.E)))
        omega = params.exact_omega()
        if omega is None:
            raise ValueError("exact evaluation requires a rational omega")
        t_inf = GaussianRational(0, 4 * Fraction(1)) * K / ((K * K - 1) * omega)
        Uv = U if isinstance(U, GaussianRational) else GaussianRational(Fraction(U))
        one = GaussianRational(1)
        is_zero = lambda v: v.is_zero()
    else:
        i = 1j
        K = complex(params.K)
        g = complex(params.g)
        m = complex(params.m)
        w2 = complex(params.omega2)
        t_inf = params.t_inf
        Uv = complex(U)
        one = 1.0 + 0j
        is_zero = lambda v: v == 0

    if is_zero(Uv):
        raise PoleError("x_plus (and lambda)", U)
    u2m1 = Uv * Uv - one
    if is_zero(u2m1):
        raise PoleError("x_plus, x_minus, z and lambda", U)
    p, dp = _bracket(K, Uv, i)
    k2m1 = K * K - one
    cfac = (K * g * 2 / w2) / (k2m1 * k2m1)
    f = cfac * p / (u2m1 * u2m1)
    x_plus = -f / Uv
    x_minus = f * Uv**3
    z = i * f * Uv
    if is_zero(p):
        raise PoleError("lambda", U)
    lam = -(
        m
        * (w2 * 3 / (K * K * 64))
        * k2m1
        * k2m1
        * (K * K + one)
        * u2m1**5
        / (p * Uv**4)
    )

    # dF/dU via the quotient rule; dt/dU = -2 t_inf U / (1 - U^2)^2
    fprime = cfac * (dp * u2m1 - Uv * p * 4) / (u2m1**3)
    dxp = -(fprime * Uv - f) / (Uv * Uv)
    dxm = fprime * Uv**3 + f * Uv * Uv * 3
    dz = i * (fprime * Uv + f)
    dt_du = -(t_inf * Uv * 2) / (u2m1 * u2m1)
    v_plus = dxp / dt_du
    v_minus = dxm / dt_du
    v_z = dz / dt_du

    if exact:
        return {
            "x_plus": x_plus,
            "x_minus": x_minus,
            "z": z,
            "lam": lam,
            "v_plus": v_plus,
            "v_minus": v_minus,
            "v_z": v_z,
        }
    return (
        CartesianState(
            x_plus=x_plus,
            x_minus=x_minus,
            z=z,
            v_plus=v_plus,
            v_minus=v_minus,
            v_z=v_z,
        ),
        lam,
    )


def t_of_U(params: TrigParams, U) -> complex:
    U = complex(U)
    return -params.t_inf * U * U / (1 - U * U)


def U_of_t(params: TrigParams, t, sheet: int = +1) -> complex:
    """Inverse of :func:`t_of_U` on the chosen square-root sheet."""
    t = complex(t)
    t_inf = params.t_inf
    if t == t_inf:
        raise ZeroDivisionError("U diverges at t = t_inf")
    return sheet * cmath.sqrt(t / (t - t_inf))


def bridge_constants(params: TrigParams, mp_dps: int | None = None) -> tuple:
    """Kowalevski constants (b1, c1, d1) of the series at t = 0.

    Principal branches for every fractional power; for real K > 1 these
    reproduce the fixed phases e^(-i pi/4) and e^(-3 i pi/4).  With
    ``mp_dps`` the constants come back as mpmath numbers at that precision,
    suitable for driving deep high-precision expansions.
    """
    if mp_dps is not None:
        import mpmath

        with mpmath.workdps(mp_dps):
            K = mpmath.mpc(params.K)
            g = mpmath.mpf(params.g)
            E = mpmath.mpf(params.E)
            w = g / mpmath.sqrt(2 * E)
            sqK, sqw = mpmath.sqrt(K), mpmath.sqrt(w)
            k2p1, k2m1 = K * K + 1, K * K - 1
            e4 = mpmath.exp(-1j * mpmath.pi / 4)
            e34 = mpmath.exp(-3j * mpmath.pi / 4)
            b1 = e4 * g * k2p1 / (4 * sqw * sqK * mpmath.sqrt(k2m1))
            c1 = e34 * g * sqw * mpmath.sqrt(k2m1) * k2p1 / (32 * sqK**3)
            d1 = e4 * g * sqK * k2p1 / (w * sqw * mpmath.sqrt(k2m1) ** 3)
        return b1, c1, d1
    K = complex(params.K)
    g = complex(params.g)
    w = params.omega
    sqK = cmath.sqrt(K)
    sqw = cmath.sqrt(w)
    k2p1 = K * K + 1
    k2m1 = K * K - 1
    e4 = cmath.exp(-1j * cmath.pi / 4)
    e34 = cmath.exp(-3j * cmath.pi / 4)
    b1 = e4 * g * k2p1 / (4 * sqw * sqK * cmath.sqrt(k2m1))
    c1 = e34 * g * sqw * cmath.sqrt(k2m1) * k2p1 / (32 * sqK**3)
    d1 = e4 * g * sqK * k2p1 / (w * sqw * cmath.sqrt(k2m1) ** 3)
    return b1, c1, d1


def trig_grid(params: TrigParams, us) -> list:
    """Rows (U, t, x_plus, x_minus, z, lambda) for the CSV export."""
    rows = []
    for u in us:
        state, lam = trig_state(params, u)
        rows.append(
            {
                "U": complex(u),
                "t": t_of_U(params, u),
                "x_plus": state.x_plus,
                "x_minus": state.x_minus,
                "z": state.z,
                "lam": lam,
            }
        )
    return rows


def write_grid_csv(path, rows) -> None:
    cols = ["U", "t", "x_plus", "x_minus", "z", "lam"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"{c}_{p}" for c in cols for p in ("re", "im")])
        for row in rows:
            out = []
            for c in cols:
                v = complex(row[c])
                out += [f"{v.real:.17g}", f"{v.imag:.17g}"]
            w.writerow(out)
