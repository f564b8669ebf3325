"""The swinging Atwood's machine: equations of motion, conserved quantities,
Hamiltonian forms and a complexified adaptive integrator.

The machine couples a swinging mass ``m`` at (x, y) to a counterweight ``M``
at height z through an inextensible string; with the origin chosen so the
constraint is the cone z^2 = x^2 + y^2.  Everything here works in the
factorised coordinates x_pm = x +- i y, in which the constraint reads
z^2 = x_plus * x_minus and the equations of motion are polynomial.

Functions taking a series solution (an object exposing ``x_plus``,
``x_minus``, ``z``, ``lam`` PuiseuxSeries attributes) operate exactly in the
coefficient ring; functions taking numeric states use complex floats.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .exactnum import (
    GR_I,
    CoefficientPoly,
    GaussianRational,
    PuiseuxSeries,
)


class SingularConfigurationError(ValueError):
    """Raised when a formula is evaluated at z = 0 (string fully wound)."""


class IntegrityError(AssertionError):
    """A quantity that must be conserved exactly came out time dependent."""


class UnsupportedMassRatioError(ValueError):
    """Raised for operations defined only at the integrable ratio M/m = 3."""


@dataclass(frozen=True)
class MachineParams:
    """Masses and gravity, kept exact."""

    m: Fraction = Fraction(1)
    M: Fraction = Fraction(3)
    g: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m))
        object.__setattr__(self, "M", Fraction(self.M))
        object.__setattr__(self, "g", Fraction(self.g))
        if self.m <= 0 or self.M <= 0 or self.g <= 0:
            raise ValueError("masses and gravity must be positive")

    @property
    def mass_ratio(self) -> Fraction:
        return self.M / self.m


@dataclass(frozen=True)
class CartesianState:
    """Complexified state in the factorised coordinates."""

    x_plus: complex
    x_minus: complex
    z: complex
    v_plus: complex = 0j
    v_minus: complex = 0j
    v_z: complex = 0j

    @property
    def y(self) -> complex:
        return -0.5j * (self.x_plus - self.x_minus)

    @property
    def constraint_residual(self) -> complex:
        return self.z * self.z - self.x_plus * self.x_minus

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.x_plus, self.x_minus, self.z, self.v_plus, self.v_minus, self.v_z],
            dtype=complex,
        )

    @classmethod
    def from_vector(cls, v: Sequence[complex]) -> "CartesianState":
        return cls(*[complex(c) for c in v])


@dataclass(frozen=True)
class PhasePoint:
    """Real phase-space point (positions and canonical momenta)."""

    x: object
    y: object
    z: object
    px: object
    py: object
    pz: object

    def constraint(self):
        return self.z * self.z - self.x * self.x - self.y * self.y

    @classmethod
    def from_velocities(cls, params: MachineParams, x, y, z, vx, vy, vz) -> "PhasePoint":
        # momentum gauge fixed to mu = 0
        return cls(x, y, z, params.m * vx, params.m * vy, params.M * vz)


def lambda_of(state: CartesianState, params: MachineParams) -> complex:
    """String tension multiplier from positions and velocities."""
    if state.z == 0:
        raise SingularConfigurationError("lambda is singular at z = 0")
    m, M, g = float(params.m), float(params.M), float(params.g)
    num = state.v_z**2 - state.v_plus * state.v_minus + g * (state.y - state.z)
    return (m * M / (M + m)) * num / (state.z * state.z)


def acceleration(state: CartesianState, params: MachineParams) -> tuple:
    """Second derivatives (x_plus'', x_minus'', z'') with lambda eliminated."""
    lam = lambda_of(state, params)
    m, M, g = float(params.m), float(params.M), float(params.g)
    a_plus = (-1j * m * g + lam * state.x_plus) / m
    a_minus = (1j * m * g + lam * state.x_minus) / m
    a_z = (-M * g - lam * state.z) / M
    return a_plus, a_minus, a_z, lam


# ---------------------------------------------------------------------------
# Series-level quantities (exact in the coefficient ring)
# ---------------------------------------------------------------------------


def _const_series(like: PuiseuxSeries, value: GaussianRational) -> PuiseuxSeries:
    zero = like.zero
    if isinstance(zero, CoefficientPoly):
        c = CoefficientPoly.const(zero.names, value)
    elif isinstance(zero, GaussianRational):
        c = value
    else:
        c = value.to_complex()
    return PuiseuxSeries.constant(like.k, c, zero)


def eom_residual(sol, params: MachineParams):
    """Residual series of the four equations of motion.

    Returns ``(R_plus, R_minus, R_z, R_constraint)``; a valid solution makes
    every available coefficient of each residual exactly zero.
    """
    m, M, g = params.m, params.M, params.g
    xp, xm, z, lam = sol.x_plus, sol.x_minus, sol.z, sol.lam
    img = _const_series(xp, GaussianRational(0, m * g))
    mg = _const_series(xp, GaussianRational(M * g, 0))

    r_plus = xp.differentiate().differentiate().scale(m) + img - lam * xp
    r_minus = xm.differentiate().differentiate().scale(m) - img - lam * xm
    r_z = z.differentiate().differentiate().scale(M) + mg + lam * z
    r_con = z * z - xp * xm
    return r_plus, r_minus, r_z, r_con


def residual_max_order(res: PuiseuxSeries) -> Fraction:
    """Largest exponent through which a residual series is asserted."""
    return Fraction(res.leading + len(res.coeffs) - 1, res.k)


def is_zero_series(s: PuiseuxSeries) -> bool:
    from .exactnum import coeff_is_zero

    return all(coeff_is_zero(c) for c in s.coeffs)


def _y_series(sol) -> PuiseuxSeries:
    half_i = GaussianRational(0, Fraction(-1, 2))
    return (sol.x_plus - sol.x_minus).scale(_ring_scalar(sol.x_plus, half_i))


def _ring_scalar(like: PuiseuxSeries, value: GaussianRational):
    zero = like.zero
    if isinstance(zero, CoefficientPoly):
        return CoefficientPoly.const(zero.names, value)
    if isinstance(zero, GaussianRational):
        return value
    return value.to_complex()


def energy(sol_or_state, params: MachineParams):
    """Total energy.

    For a numeric state, returns a complex number.  For a series solution,
    returns the constant coefficient and raises :class:`IntegrityError` if
    any non-constant order survives.
    """
    if isinstance(sol_or_state, CartesianState):
        s = sol_or_state
        m, M, g = float(params.m), float(params.M), float(params.g)
        return (
            0.5 * m * s.v_plus * s.v_minus
            + 0.5 * M * s.v_z**2
            + g * (m * s.y + M * s.z)
        )
    sol = sol_or_state
    m, M, g = params.m, params.M, params.g
    vp = sol.x_plus.differentiate()
    vm = sol.x_minus.differentiate()
    vz = sol.z.differentiate()
    e = (
        (vp * vm).scale(Fraction(m, 2))
        + (vz * vz).scale(Fraction(M, 2))
        + _y_series(sol).scale(m * g)
        + sol.z.scale(M * g)
    )
    return _constant_term(e, "energy")


def _constant_term(series: PuiseuxSeries, what: str):
    from .exactnum import coeff_is_zero

    const = None
    for j, c in enumerate(series.coeffs):
        num = series.leading + j
        if num == 0:
            const = c
        elif not coeff_is_zero(c):
            raise IntegrityError(
                f"{what} series has a non-constant term at t^({num}/{series.k}): {c!r}"
            )
    if const is None:
        const = series.zero
    return const


def second_invariant_sq(sol_or_state, params: MachineParams):
    """Square of the second conserved quantity of the M/m = 3 machine."""
    if params.mass_ratio != 3:
        raise UnsupportedMassRatioError(
            f"second invariant requires M/m = 3, got {params.mass_ratio}"
        )
    g = params.g
    if isinstance(sol_or_state, CartesianState):
        s = sol_or_state
        gf = float(g)
        x = 0.5 * (s.x_plus + s.x_minus)
        y = s.y
        vx = 0.5 * (s.v_plus + s.v_minus)
        vy = -0.5j * (s.v_plus - s.v_minus)
        v = s.z * (s.z - y)
        if v == 0:
            raise SingularConfigurationError("z(z - y) vanishes")
        vdot = s.v_z * (2 * s.z - y) - s.z * vy
        aq = x * vy - y * vx
        return aq * aq * vdot * vdot / v + 2 * gf * x * aq * vdot + gf * gf * x * x * v

    sol = sol_or_state
    half = _ring_scalar(sol.x_plus, GaussianRational(Fraction(1, 2)))
    half_i = _ring_scalar(sol.x_plus, GaussianRational(0, Fraction(1, 2)))
    xp, xm, z = sol.x_plus, sol.x_minus, sol.z
    x = (xp + xm).scale(half)
    y = _y_series(sol)
    # x*ydot - y*xdot == (i/2)(x_plus * x_minus' - x_minus * x_plus')
    aq = (xp * xm.differentiate() - xm * xp.differentiate()).scale(half_i)
    v = z * (z - y)
    vdot = v.differentiate()
    n = min(len(v.coeffs), len(aq.coeffs), len(x.coeffs))
    h2 = (
        aq * aq * vdot * vdot * v.invert(n)
        + (x * aq * vdot).scale(2 * g)
        + (x * x * v).scale(g * g)
    )
    return _constant_term(h2, "second invariant")


def second_invariant_sq_closed_form(names=("b1", "c1", "d1")) -> CoefficientPoly:
    """The closed-form value 2 i d1^5 / b1^3 (b1^2 - 2 i c1 d1)^2."""
    b1 = CoefficientPoly.variable(names, "b1")
    c1 = CoefficientPoly.variable(names, "c1")
    d1 = CoefficientPoly.variable(names, "d1")
    two_i = CoefficientPoly.const(names, GaussianRational(0, 2))
    inner = b1 * b1 - (c1 * d1) * GaussianRational(0, 2)
    return two_i * d1**5 / (b1**3) * inner * inner


# ---------------------------------------------------------------------------
# Reduced Hamiltonian on the constrained phase space
# ---------------------------------------------------------------------------


def angular_functions(p: PhasePoint):
    """The constraint-invariant functions (A_x, A_y, A_z)."""
    ax = p.z * p.py + p.y * p.pz
    ay = p.z * p.px + p.x * p.pz
    az = p.x * p.py - p.y * p.px
    return ax, ay, az


def reduced_hamiltonian(p: PhasePoint, params: MachineParams):
    """Invariant Hamiltonian generating the constrained dynamics."""
    if p.z == 0:
        raise SingularConfigurationError("reduced Hamiltonian singular at z = 0")
    m, M, g = params.m, params.M, params.g
    ax, ay, az = angular_functions(p)
    quad = ax * ax + ay * ay + (Fraction(M, m)) * az * az
    return quad / (2 * (m + M) * p.z * p.z) + M * g * p.z + m * g * p.y


# ---------------------------------------------------------------------------
# Symmetry maps on series solutions
# ---------------------------------------------------------------------------


def swap_reflect(sol):
    """(x_plus, x_minus) -> (-x_minus, -x_plus); z and lambda unchanged."""
    from dataclasses import replace

    return replace(sol, x_plus=sol.x_minus.scale(-1), x_minus=sol.x_plus.scale(-1))


def similarity_transform(sol, nu: Fraction):
    """t -> t/mu with mu = nu**k: x, z pick up mu^2, lambda mu^-2.

    The coefficient of t^(num/k) in mu^w s(t/mu) is the original coefficient
    times nu^(w*k - num), exactly rational for rational nu.
    """
    from dataclasses import replace

    nu = Fraction(nu)

    def rescale(series: PuiseuxSeries, weight: int) -> PuiseuxSeries:
        coeffs = []
        for j, c in enumerate(series.coeffs):
            factor = nu ** (weight * series.k - (series.leading + j))
            coeffs.append(c * float(factor) if isinstance(c, complex) else c * factor)
        return PuiseuxSeries(
            series.k, series.leading, coeffs, series.zero, series.complete
        )

    return replace(
        sol,
        x_plus=rescale(sol.x_plus, 2),
        x_minus=rescale(sol.x_minus, 2),
        z=rescale(sol.z, 2),
        lam=rescale(sol.lam, -2),
    )


# ---------------------------------------------------------------------------
# Complexified adaptive integrator (Runge-Kutta-Fehlberg 4(5))
# ---------------------------------------------------------------------------

_RKF_A = (
    (),
    (Fraction(1, 4),),
    (Fraction(3, 32), Fraction(9, 32)),
    (Fraction(1932, 2197), Fraction(-7200, 2197), Fraction(7296, 2197)),
    (Fraction(439, 216), Fraction(-8), Fraction(3680, 513), Fraction(-845, 4104)),
    (
        Fraction(-8, 27),
        Fraction(2),
        Fraction(-3544, 2565),
        Fraction(1859, 4104),
        Fraction(-11, 40),
    ),
)
_RKF_B5 = (
    Fraction(16, 135),
    Fraction(0),
    Fraction(6656, 12825),
    Fraction(28561, 56430),
    Fraction(-9, 50),
    Fraction(2, 55),
)
_RKF_B4 = (
    Fraction(25, 216),
    Fraction(0),
    Fraction(1408, 2565),
    Fraction(2197, 4104),
    Fraction(-1, 5),
    Fraction(0),
)


@dataclass
class Trajectory:
    """Accepted integration steps with per-step integrity diagnostics."""

    t: np.ndarray
    states: np.ndarray  # shape (n, 6), columns x+, x-, z, v+, v-, vz
    constraint: np.ndarray
    energy: np.ndarray
    complete: bool
    reason: str
    n_steps: int

    def state_at(self, i: int) -> CartesianState:
        return CartesianState.from_vector(self.states[i])

    @property
    def energy_drift(self) -> np.ndarray:
        return np.abs(self.energy - self.energy[0])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                [
                    "t_re",
                    "t_im",
                    "xp_re",
                    "xp_im",
                    "xm_re",
                    "xm_im",
                    "z_re",
                    "z_im",
                    "constraint_residual",
                    "energy_drift",
                ]
            )
            drift = self.energy_drift
            for i in range(len(self.t)):
                row = [self.t[i].real, self.t[i].imag]
                for j in range(3):
                    row += [self.states[i, j].real, self.states[i, j].imag]
                row += [self.constraint[i], drift[i]]
                w.writerow([f"{v:.17g}" for v in row])


def _rhs(y: np.ndarray, params: MachineParams) -> np.ndarray:
    state = CartesianState.from_vector(y)
    a_plus, a_minus, a_z, _ = acceleration(state, params)
    return np.array([y[3], y[4], y[5], a_plus, a_minus, a_z], dtype=complex)


def integrate_complex(
    initial: CartesianState,
    params: MachineParams,
    t_span,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    max_steps: int = 10**6,
) -> Trajectory:
    """Integrate the complexified system along the straight segment t0 -> t1.

    z is carried as an independent variable; the constraint z^2 - x+ x- is
    monitored per accepted step, never projected.
    """
    if initial.z == 0:
        raise SingularConfigurationError("cannot start integration at z = 0")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    t0, t1 = complex(t_span[0]), complex(t_span[1])
    direction = t1 - t0
    if direction == 0:
        raise ValueError("empty integration span")

    a = [[float(x) for x in row] for row in _RKF_A]
    b5 = [float(x) for x in _RKF_B5]
    b4 = [float(x) for x in _RKF_B4]

    y = initial.as_vector()
    s = 0.0
    h = 1e-4
    h_min = 1e-14
    ts = [t0]
    states = [y.copy()]
    e0 = energy(initial, params)
    energies = [e0]
    cons = [abs(initial.constraint_residual)]
    n_steps = 0
    complete = True
    reason = "reached end of span"

    def f(yv):
        return direction * _rhs(yv, params)

    while s < 1.0:
        if n_steps >= max_steps:
            complete, reason = False, "maximum step count exceeded"
            break
        h = min(h, 1.0 - s)
        kstages = [f(y)]
        finite = np.all(np.isfinite(kstages[0].view(float)))
        if finite:
            for i in range(1, 6):
                yi = y + h * sum(a[i][j] * kstages[j] for j in range(i))
                ki = f(yi)
                if not np.all(np.isfinite(ki.view(float))):
                    finite = False
                    break
                kstages.append(ki)
        if not finite:
            h *= 0.25
            if h < h_min:
                complete, reason = False, "step underflow near singularity"
                break
            continue
        y5 = y + h * sum(b5[i] * kstages[i] for i in range(6))
        y4 = y + h * sum(b4[i] * kstages[i] for i in range(6))
        err = np.max(np.abs(y5 - y4) / (atol + rtol * np.maximum(np.abs(y), np.abs(y5))))
        if err <= 1.0 or h <= h_min:
            s += h
            y = y5
            n_steps += 1
            state = CartesianState.from_vector(y)
            ts.append(t0 + s * direction)
            states.append(y.copy())
            cons.append(abs(state.constraint_residual))
            energies.append(energy(state, params))
        factor = 0.9 * (err ** (-0.2)) if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if h < h_min:
            if s < 1.0:
                complete, reason = False, "step underflow near singularity"
            break

    return Trajectory(
        t=np.array(ts),
        states=np.array(states),
        constraint=np.array(cons),
        energy=np.array(energies),
        complete=complete,
        reason=reason,
        n_steps=n_steps,
    )
