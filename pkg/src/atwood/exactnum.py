"""Exact arithmetic foundation.

Three layers, each immutable after construction:

* :class:`GaussianRational` -- complex numbers with arbitrary-precision
  rational real and imaginary parts.  This is the coefficient field of
  everything exact in the package.
* :class:`CoefficientPoly` -- sparse multivariate Laurent polynomials in a
  fixed ordered tuple of named free constants, over GaussianRational.
* :class:`PuiseuxSeries` -- truncated series in the branch variable
  ``w = t**(1/k)`` whose coefficients live in one of three rings:
  CoefficientPoly (symbolic constants), GaussianRational (exact numbers)
  or ``complex`` (floating point).

Division is deliberately restricted: a CoefficientPoly may only be divided
by a scalar or by a single-term (monomial) polynomial.  Every division the
series recursions perform is of this kind, so the Laurent ring is closed
under all operations used here; no general rational-function arithmetic is
ever needed.
"""

from __future__ import annotations

import cmath
import re as _re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

try:  # gmpy2 rationals are drop-in and much faster for deep expansions
    from gmpy2 import mpq as _RAT
except ImportError:  # pragma: no cover
    _RAT = Fraction

_RAT_TYPE = type(_RAT(0))


def _as_fraction(x):
    """Exact rational from int/str/Fraction/mpq; floats are rejected."""
    if isinstance(x, (_RAT_TYPE, Fraction, int, str)):
        return _RAT(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


class GaussianRational:
    """Exact complex number with rational real/imaginary parts.

    Always canonical: each part is a ``Fraction`` (coprime numerator and
    denominator, positive denominator).
    """

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- constructors ------------------------------------------------------

    @classmethod
    def i(cls) -> "GaussianRational":
        return cls(0, 1)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {x!r} to GaussianRational")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return _gr_unchecked(self.re + other.re, self.im + other.im)
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return _gr_unchecked(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return _gr_unchecked(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianRational.coerce(other) - self

    def __neg__(self):
        return _gr_unchecked(-self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return _gr_unchecked(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return _gr_unchecked(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            return GaussianRational(1) / self ** (-n)
        result = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- predicates and conversions ---------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Squared modulus, exact."""
        return self.re * self.re + self.im * self.im

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __eq__(self, other):
        try:
            o = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if self.im == 0:
            return f"GR({self.re})"
        return f"GR({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


def _gr_unchecked(re, im) -> GaussianRational:
    """Construct from parts already in canonical rational form (hot path)."""
    gr = object.__new__(GaussianRational)
    object.__setattr__(gr, "re", re)
    object.__setattr__(gr, "im", im)
    return gr


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)

_GAUSSIAN_RE = _re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+)?)?\s*"
    r"(?P<im>[+-]\s*\d+(?:/\d+)?|[+-])?\s*(?P<unit>[ij])?\s*$"
)


def parse_gaussian(text: str) -> GaussianRational:
    """Parse strings like ``"3/4"``, ``"-2i"``, ``"1/2-9/10i"`` or ``"i"``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty Gaussian rational literal")
    if s in ("i", "+i"):
        return GR_I
    if s == "-i":
        return -GR_I
    m = _GAUSSIAN_RE.match(s)
    if not m or (m.group("im") and not m.group("unit")):
        raise ValueError(f"bad Gaussian rational literal: {text!r}")
    if m.group("unit"):
        if m.group("im") is not None:
            re_part = Fraction(m.group("re")) if m.group("re") else Fraction(0)
            raw = m.group("im")
            im_part = Fraction(1) if raw == "+" else Fraction(-1) if raw == "-" else Fraction(raw)
        else:
            re_part = Fraction(0)
            im_part = Fraction(m.group("re")) if m.group("re") else Fraction(1)
        return GaussianRational(re_part, im_part)
    if m.group("re") is None:
        raise ValueError(f"bad Gaussian rational literal: {text!r}")
    return GaussianRational(Fraction(m.group("re")), 0)


class ExponentOverflowError(RuntimeError):
    """Raised when Laurent exponents grow beyond the configured guard."""


class CoefficientPoly:
    """Sparse Laurent polynomial in named free constants over GaussianRational.

    ``names`` is the fixed ordered tuple of constants; ``terms`` maps an
    integer exponent vector (one entry per name, negatives allowed) to a
    nonzero GaussianRational.  Zero-valued terms are never stored.
    """

    __slots__ = ("names", "terms", "_split")

    def __init__(self, names: Sequence[str], terms: Mapping[tuple, GaussianRational]):
        object.__setattr__(self, "names", tuple(names))
        clean = {}
        for exps, val in terms.items():
            if not val.is_zero():
                clean[tuple(exps)] = val
        object.__setattr__(self, "terms", clean)
        object.__setattr__(self, "_split", None)

    def __setattr__(self, name, value):
        raise AttributeError("CoefficientPoly is immutable")

    def _scaled_parts(self):
        """(D, pure_re, pure_im, mixed) with integer numerators over the
        common denominator D, split by pure-real/imaginary parts (cached).

        Products of two polynomials then run entirely in integer
        arithmetic; a single exact division by D_p * D_q per output term
        restores canonical rationals.
        """
        cached = self._split
        if cached is None:
            denom = 1
            for v in self.terms.values():
                if v.re:
                    denom = _lcm(denom, v.re.denominator)
                if v.im:
                    denom = _lcm(denom, v.im.denominator)
            pure_re, pure_im, mixed = [], [], []
            for exps, v in self.terms.items():
                ire = v.re.numerator * (denom // v.re.denominator) if v.re else 0
                iim = v.im.numerator * (denom // v.im.denominator) if v.im else 0
                if not iim:
                    pure_re.append((exps, ire))
                elif not ire:
                    pure_im.append((exps, iim))
                else:
                    mixed.append((exps, ire, iim))
            cached = (denom, pure_re, pure_im, mixed)
            object.__setattr__(self, "_split", cached)
        return cached

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, names) -> "CoefficientPoly":
        return cls(names, {})

    @classmethod
    def const(cls, names, value) -> "CoefficientPoly":
        value = GaussianRational.coerce(value)
        if value.is_zero():
            return cls(names, {})
        return cls(names, {(0,) * len(names): value})

    @classmethod
    def variable(cls, names, name: str) -> "CoefficientPoly":
        exps = [0] * len(names)
        exps[tuple(names).index(name)] = 1
        return cls(names, {tuple(exps): GR_ONE})

    @classmethod
    def monomial(cls, names, exps, value) -> "CoefficientPoly":
        return cls(names, {tuple(exps): GaussianRational.coerce(value)})

    # -- helpers -----------------------------------------------------------

    def _compat(self, other) -> "CoefficientPoly":
        if isinstance(other, CoefficientPoly):
            if other.names != self.names:
                raise ValueError(
                    f"mixing polynomials over {self.names} and {other.names}"
                )
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return CoefficientPoly.const(self.names, other)
        raise TypeError(f"cannot combine CoefficientPoly with {other!r}")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        try:
            o = self._compat(other)
        except TypeError:
            return NotImplemented
        terms = dict(self.terms)
        for exps, val in o.terms.items():
            cur = terms.get(exps)
            new = val if cur is None else cur + val
            if new.is_zero():
                terms.pop(exps, None)
            else:
                terms[exps] = new
        return CoefficientPoly(self.names, terms)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._compat(other))

    def __rsub__(self, other):
        return self._compat(other) - self

    def __neg__(self):
        return CoefficientPoly(self.names, {e: -v for e, v in self.terms.items()})

    def __mul__(self, other):
        try:
            o = self._compat(other)
        except TypeError:
            return NotImplemented
        acc: dict = {}
        _accumulate_product(acc, self, o)
        return _poly_from_acc(self.names, acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise TypeError("CoefficientPoly powers must be nonnegative integers")
        result = CoefficientPoly.const(self.names, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            inv = GR_ONE / GaussianRational.coerce(other)
            return CoefficientPoly(
                self.names, {e: v * inv for e, v in self.terms.items()}
            )
        if isinstance(other, CoefficientPoly):
            o = self._compat(other)
            if len(o.terms) != 1:
                raise ValueError(
                    "CoefficientPoly division only supports monomial divisors"
                )
            ((dexps, dval),) = o.terms.items()
            inv = GR_ONE / dval
            return CoefficientPoly(
                self.names,
                {
                    tuple(a - b for a, b in zip(e, dexps)): v * inv
                    for e, v in self.terms.items()
                },
            )
        return NotImplemented

    def inverse(self) -> "CoefficientPoly":
        """Inverse of a monomial polynomial (the only invertible elements)."""
        if len(self.terms) != 1:
            raise ValueError("only monomials are invertible in the Laurent ring")
        return CoefficientPoly.const(self.names, 1) / self

    # -- calculus and evaluation -------------------------------------------

    def derivative(self, name: str) -> "CoefficientPoly":
        idx = self.names.index(name)
        terms = {}
        for exps, val in self.terms.items():
            n = exps[idx]
            if n == 0:
                continue
            new = list(exps)
            new[idx] = n - 1
            key = tuple(new)
            add = val * Fraction(n)
            cur = terms.get(key)
            tot = add if cur is None else cur + add
            if not tot.is_zero():
                terms[key] = tot
            else:
                terms.pop(key, None)
        return CoefficientPoly(self.names, terms)

    def substitute(self, name: str, value: "CoefficientPoly") -> "CoefficientPoly":
        """Replace ``name`` by a polynomial; the name must occur with
        nonnegative exponents only."""
        idx = self.names.index(name)
        value = self._compat(value)
        result = CoefficientPoly.zero(self.names)
        powers = {0: CoefficientPoly.const(self.names, 1)}
        for exps, val in self.terms.items():
            n = exps[idx]
            if n < 0:
                raise ValueError(f"cannot substitute into negative power of {name}")
            if n not in powers:
                powers[n] = value**n
            rest = list(exps)
            rest[idx] = 0
            result = result + powers[n] * CoefficientPoly.monomial(
                self.names, rest, val
            )
        return result

    def eval_exact(self, sigma: Mapping[str, GaussianRational]) -> GaussianRational:
        total = GR_ZERO
        values = [GaussianRational.coerce(sigma[n]) for n in self.names]
        for exps, val in self.terms.items():
            term = val
            for v, e in zip(values, exps):
                if e:
                    term = term * v**e
            total = total + term
        return total

    def eval_complex(self, sigma: Mapping[str, complex]) -> complex:
        total = 0j
        values = [complex(sigma[n]) for n in self.names]
        for exps, val in self.terms.items():
            term = val.to_complex()
            for v, e in zip(values, exps):
                if e:
                    term *= v**e
            total += term
        return total

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> GaussianRational:
        if not self.terms:
            return GR_ZERO
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def max_exponent_magnitude(self) -> int:
        if not self.terms:
            return 0
        return max(max((abs(e) for e in exps), default=0) for exps in self.terms)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0])

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = CoefficientPoly.const(self.names, other)
        if not isinstance(other, CoefficientPoly):
            return NotImplemented
        return self.names == other.names and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        if not self.terms:
            return "Poly(0)"
        parts = []
        for exps, val in self.sorted_terms():
            factors = [str(val)] if val != GR_ONE or all(e == 0 for e in exps) else []
            for name, e in zip(self.names, exps):
                if e == 1:
                    factors.append(name)
                elif e != 0:
                    factors.append(f"{name}^{e}")
            parts.append("*".join(factors))
        return "Poly(" + " + ".join(parts) + ")"


try:
    from gmpy2 import lcm as _lcm
except ImportError:  # pragma: no cover
    from math import lcm as _lcm


def _accumulate_product(acc: dict, p: CoefficientPoly, q: CoefficientPoly) -> None:
    """Accumulate the term products of p*q into ``acc`` as [re, im] parts.

    Deep expansions spend most of their time here.  Both factors are
    pre-scaled to integer numerators over cached common denominators, so
    every term pair costs one big-integer multiply-add; a single exact
    rational division per output slot happens at the merge below.
    """
    if len(p.names) != 3:  # generic fallback; the families here use three
        for e1, v1 in p.terms.items():
            for e2, v2 in q.terms.items():
                exps = tuple(map(int.__add__, e1, e2))
                cur = acc.get(exps)
                if cur is None:
                    cur = [None, None]
                    acc[exps] = cur
                re = v1.re * v2.re - v1.im * v2.im
                im = v1.re * v2.im + v1.im * v2.re
                if re:
                    cur[0] = re if cur[0] is None else cur[0] + re
                if im:
                    cur[1] = im if cur[1] is None else cur[1] + im
        return
    dp, p_re, p_im, p_mix = p._scaled_parts()
    dq, q_re, q_im, q_mix = q._scaled_parts()
    dd = dp * dq
    local: dict = {}
    get = local.get

    def run(p_terms, q_terms, slot, sign):
        for e1, c1 in p_terms:
            a0, a1, a2 = e1[0], e1[1], e1[2]
            if sign < 0:
                c1 = -c1
            for e2, c2 in q_terms:
                exps = (a0 + e2[0], a1 + e2[1], a2 + e2[2])
                cur = get(exps)
                if cur is None:
                    local[exps] = [c1 * c2, 0] if slot == 0 else [0, c1 * c2]
                else:
                    cur[slot] += c1 * c2

    # real*real -> re, imag*imag -> -re, real*imag / imag*real -> im
    if p_re:
        if q_re:
            run(p_re, q_re, 0, 1)
        if q_im:
            run(p_re, q_im, 1, 1)
    if p_im:
        if q_im:
            run(p_im, q_im, 0, -1)
        if q_re:
            run(p_im, q_re, 1, 1)
    # mixed terms are rare; handle them with full complex products
    if p_mix or q_mix:
        def acc2(exps, ire, iim):
            cur = get(exps)
            if cur is None:
                local[exps] = [ire, iim]
            else:
                cur[0] += ire
                cur[1] += iim

        q_full = (
            [(e, c, 0) for e, c in q_re]
            + [(e, 0, c) for e, c in q_im]
            + q_mix
        )
        for e1, re1, im1 in p_mix:
            a0, a1, a2 = e1[0], e1[1], e1[2]
            for e2, re2, im2 in q_full:
                exps = (a0 + e2[0], a1 + e2[1], a2 + e2[2])
                acc2(exps, re1 * re2 - im1 * im2, re1 * im2 + im1 * re2)
        for e2, re2, im2 in q_mix:
            b0, b1, b2 = e2[0], e2[1], e2[2]
            for e1, c1 in p_re:
                exps = (e1[0] + b0, e1[1] + b1, e1[2] + b2)
                acc2(exps, c1 * re2, c1 * im2)
            for e1, c1 in p_im:
                exps = (e1[0] + b0, e1[1] + b1, e1[2] + b2)
                acc2(exps, -(c1 * im2), c1 * re2)

    # merge: one exact rational per slot, not per term pair
    for exps, (ire, iim) in local.items():
        cur = acc.get(exps)
        if cur is None:
            acc[exps] = [
                _RAT(ire, dd) if ire else None,
                _RAT(iim, dd) if iim else None,
            ]
        else:
            if ire:
                v = _RAT(ire, dd)
                cur[0] = v if cur[0] is None else cur[0] + v
            if iim:
                v = _RAT(iim, dd)
                cur[1] = v if cur[1] is None else cur[1] + v


_RAT_ZERO = _RAT(0)


def _poly_from_acc(names, acc: dict) -> CoefficientPoly:
    terms = {}
    for exps, (re, im) in acc.items():
        if re or im:
            terms[exps] = _gr_unchecked(
                re if re is not None else _RAT_ZERO,
                im if im is not None else _RAT_ZERO,
            )
    poly = object.__new__(CoefficientPoly)
    object.__setattr__(poly, "names", names)
    object.__setattr__(poly, "terms", terms)
    object.__setattr__(poly, "_split", None)
    return poly


# ---------------------------------------------------------------------------
# Generic coefficient-ring helpers.  Series coefficients may be
# CoefficientPoly, GaussianRational or complex; these small dispatchers keep
# the series code ring-agnostic.
# ---------------------------------------------------------------------------


def coeff_is_zero(c) -> bool:
    if isinstance(c, (CoefficientPoly, GaussianRational)):
        return c.is_zero()
    return c == 0


def coeff_scale(c, q: Fraction):
    """Multiply a coefficient by an exact rational scalar."""
    if isinstance(c, complex):
        return c * float(q)
    return c * q


def coeff_invert(c):
    if isinstance(c, CoefficientPoly):
        return c.inverse()
    if isinstance(c, GaussianRational):
        return GR_ONE / c
    return 1.0 / c


def coeff_to_complex(c, sigma=None) -> complex:
    if isinstance(c, CoefficientPoly):
        if sigma is None:
            raise ValueError("symbolic coefficient needs a constant assignment")
        if all(isinstance(v, GaussianRational) for v in sigma.values()):
            return c.eval_exact(sigma).to_complex()
        return c.eval_complex({k: complex(v) for k, v in sigma.items()})
    if isinstance(c, GaussianRational):
        return c.to_complex()
    return complex(c)


class PuiseuxSeries:
    """Truncated series ``sum_j coeffs[j] * t**((leading + j)/k)``.

    ``coeffs[0]`` is nonzero after normalisation unless the series is
    identically zero (empty coefficient list).  ``complete=True`` marks a
    series whose coefficients beyond the stored list are exactly zero
    (polynomial-like objects such as constants); otherwise the tail is
    unknown and operations track how many leading coefficients of a result
    are guaranteed.
    """

    __slots__ = ("k", "leading", "coeffs", "zero", "complete")

    def __init__(self, k: int, leading: int, coeffs: Sequence, zero, complete=False):
        if k <= 0:
            raise ValueError("branch denominator k must be positive")
        object.__setattr__(self, "k", int(k))
        coeffs = list(coeffs)
        # trim leading exact zeros so coeffs[0] != 0
        while coeffs and coeff_is_zero(coeffs[0]):
            coeffs.pop(0)
            leading += 1
        object.__setattr__(self, "leading", int(leading))
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "zero", zero)
        object.__setattr__(self, "complete", bool(complete))

    def __setattr__(self, name, value):
        raise AttributeError("PuiseuxSeries is immutable")

    # -- basics --------------------------------------------------------------

    @classmethod
    def constant(cls, k: int, value, zero) -> "PuiseuxSeries":
        return cls(k, 0, [value], zero, complete=True)

    def n_known(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def exponent(self, j: int) -> Fraction:
        return Fraction(self.leading + j, self.k)

    def _upper(self):
        """Exponent-numerator bound below which coefficients are known."""
        if self.complete:
            return None  # known to all orders
        return self.leading + len(self.coeffs)

    def coeff_at(self, num: int):
        """Coefficient of ``t**(num/k)``; zero below the leading exponent."""
        j = num - self.leading
        if j < 0:
            return self.zero
        if j < len(self.coeffs):
            return self.coeffs[j]
        if self.complete:
            return self.zero
        raise IndexError(f"coefficient t^({num}/{self.k}) beyond truncation")

    # -- arithmetic ------------------------------------------------------------

    def _check_k(self, other: "PuiseuxSeries"):
        if self.k != other.k:
            raise ValueError(f"branch denominators differ: {self.k} vs {other.k}")

    def __add__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        self._check_k(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        lead = min(self.leading, other.leading)
        uppers = [u for u in (self._upper(), other._upper()) if u is not None]
        upper = min(uppers) if uppers else None
        if upper is None:
            upper = max(self.leading + len(self.coeffs), other.leading + len(other.coeffs))
            complete = True
        else:
            complete = False
        coeffs = [
            self.coeff_at(num) + other.coeff_at(num) for num in range(lead, upper)
        ]
        return PuiseuxSeries(self.k, lead, coeffs, self.zero, complete)

    def __sub__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        return self + other.scale(-1)

    def __mul__(self, other: "PuiseuxSeries") -> "PuiseuxSeries":
        return self.mul(other)

    def mul(self, other: "PuiseuxSeries", n: int | None = None) -> "PuiseuxSeries":
        """Cauchy product truncated to ``n`` coefficients (defaults to what
        the operands guarantee)."""
        self._check_k(other)
        if self.is_zero() or other.is_zero():
            return PuiseuxSeries(self.k, 0, [], self.zero, complete=True)
        la, lb = len(self.coeffs), len(other.coeffs)
        if self.complete and other.complete:
            guaranteed = la + lb - 1
            complete = True
        elif self.complete:
            guaranteed = lb
            complete = False
        elif other.complete:
            guaranteed = la
            complete = False
        else:
            guaranteed = min(la, lb)
            complete = False
        if n is not None:
            if n > guaranteed and not complete:
                raise ValueError(
                    f"requested {n} coefficients but only {guaranteed} are guaranteed"
                )
            length = n
            complete = complete and n >= la + lb - 1
        else:
            length = guaranteed
        if isinstance(self.zero, CoefficientPoly):
            accs: list = [None] * length
            for i, a in enumerate(self.coeffs):
                if not a.terms:
                    continue
                jmax = min(length - i, lb)
                for j in range(jmax):
                    b = other.coeffs[j]
                    if not b.terms:
                        continue
                    if accs[i + j] is None:
                        accs[i + j] = {}
                    _accumulate_product(accs[i + j], a, b)
            names = self.zero.names
            out = [
                self.zero if acc is None else _poly_from_acc(names, acc)
                for acc in accs
            ]
        else:
            out = [self.zero] * length
            for i, a in enumerate(self.coeffs):
                if coeff_is_zero(a):
                    continue
                jmax = min(length - i, lb)
                for j in range(jmax):
                    b = other.coeffs[j]
                    if coeff_is_zero(b):
                        continue
                    out[i + j] = out[i + j] + a * b
        return PuiseuxSeries(
            self.k, self.leading + other.leading, out, self.zero, complete
        )

    def scale(self, factor) -> "PuiseuxSeries":
        """Multiply all coefficients by a scalar or ring element."""
        if isinstance(factor, (int, Fraction)):
            coeffs = [coeff_scale(c, Fraction(factor)) for c in self.coeffs]
        else:
            coeffs = [c * factor for c in self.coeffs]
        return PuiseuxSeries(self.k, self.leading, coeffs, self.zero, self.complete)

    def shift(self, num: int) -> "PuiseuxSeries":
        """Multiply by ``t**(num/k)``."""
        return PuiseuxSeries(
            self.k, self.leading + num, self.coeffs, self.zero, self.complete
        )

    def differentiate(self) -> "PuiseuxSeries":
        """d/dt, term by term."""
        coeffs = [
            coeff_scale(c, self.exponent(j)) for j, c in enumerate(self.coeffs)
        ]
        return PuiseuxSeries(
            self.k, self.leading - self.k, coeffs, self.zero, self.complete
        )

    def invert(self, n: int | None = None) -> "PuiseuxSeries":
        """Multiplicative inverse to ``n`` coefficients.

        Requires an invertible leading coefficient (any nonzero number, or a
        monomial in the symbolic ring).
        """
        if self.is_zero():
            raise ZeroDivisionError("cannot invert the zero series")
        if n is None:
            n = len(self.coeffs)
        inv0 = coeff_invert(self.coeffs[0])
        out = [inv0]
        for j in range(1, n):
            acc = self.zero
            for i in range(1, min(j, len(self.coeffs) - 1) + 1):
                acc = acc + self.coeffs[i] * out[j - i]
            out.append(-(inv0 * acc) if not coeff_is_zero(acc) else self.zero)
        return PuiseuxSeries(self.k, -self.leading, out, self.zero, False)

    def truncate(self, n: int) -> "PuiseuxSeries":
        return PuiseuxSeries(
            self.k,
            self.leading,
            self.coeffs[:n],
            self.zero,
            self.complete and n >= len(self.coeffs),
        )

    # -- evaluation -------------------------------------------------------------

    def substitute(self, sigma: Mapping) -> "PuiseuxSeries":
        """Substitute constants, producing an exact-numeric or float series."""
        exact = all(isinstance(v, GaussianRational) for v in sigma.values())
        coeffs = []
        for c in self.coeffs:
            if isinstance(c, CoefficientPoly):
                coeffs.append(
                    c.eval_exact(sigma) if exact else c.eval_complex(
                        {k: complex(v) for k, v in sigma.items()}
                    )
                )
            else:
                coeffs.append(c if exact else coeff_to_complex(c))
        zero = GR_ZERO if exact else 0j
        return PuiseuxSeries(self.k, self.leading, coeffs, zero, self.complete)

    def eval(self, t: complex, sigma=None, radius_guard: float | None = None) -> complex:
        """Evaluate at complex ``t`` using the principal k-th root.

        ``radius_guard`` optionally rejects |t| beyond a known convergence
        radius estimate.
        """
        t = complex(t)
        if t == 0:
            if self.leading < 0:
                raise ZeroDivisionError("series has a pole at t = 0")
            if self.is_zero() or self.leading > 0:
                return 0j
            return coeff_to_complex(self.coeffs[0], sigma)
        if radius_guard is not None and abs(t) > radius_guard:
            raise ValueError(
                f"|t|={abs(t):g} outside the requested radius guard {radius_guard:g}"
            )
        w = cmath.exp(cmath.log(t) / self.k)
        total = 0j
        # Horner from the highest stored coefficient down.
        for c in reversed(self.coeffs):
            total = total * w + coeff_to_complex(c, sigma)
        return total * w**self.leading

    # -- serialization -----------------------------------------------------------

    def to_json_dict(self) -> dict:
        names: tuple = ()
        rows = []
        for c in self.coeffs:
            if isinstance(c, CoefficientPoly):
                names = c.names
                rows.append(
                    [
                        [list(exps)]
                        + [
                            str(v.re.numerator),
                            str(v.re.denominator),
                            str(v.im.numerator),
                            str(v.im.denominator),
                        ]
                        for exps, v in c.sorted_terms()
                    ]
                )
            elif isinstance(c, GaussianRational):
                rows.append(
                    [
                        [
                            [],
                            str(c.re.numerator),
                            str(c.re.denominator),
                            str(c.im.numerator),
                            str(c.im.denominator),
                        ]
                    ]
                    if not c.is_zero()
                    else []
                )
            else:
                raise TypeError("float series have no exact JSON form")
        return {
            "k": self.k,
            "leading": self.leading,
            "constants": list(names),
            "coeffs": rows,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PuiseuxSeries":
        names = tuple(data.get("constants", ()))
        coeffs = []
        for row in data["coeffs"]:
            if names:
                terms = {}
                for exps, rn, rd, inum, iden in row:
                    terms[tuple(exps)] = GaussianRational(
                        Fraction(int(rn), int(rd)), Fraction(int(inum), int(iden))
                    )
                coeffs.append(CoefficientPoly(names, terms))
            else:
                if row:
                    _, rn, rd, inum, iden = row[0]
                    coeffs.append(
                        GaussianRational(
                            Fraction(int(rn), int(rd)), Fraction(int(inum), int(iden))
                        )
                    )
                else:
                    coeffs.append(GR_ZERO)
        zero = CoefficientPoly.zero(names) if names else GR_ZERO
        return cls(int(data["k"]), int(data["leading"]), coeffs, zero)

    def __eq__(self, other):
        if not isinstance(other, PuiseuxSeries):
            return NotImplemented
        if self.k != other.k:
            return False
        if self.is_zero() or other.is_zero():
            return self.is_zero() and other.is_zero()
        if self.leading != other.leading or len(self.coeffs) != len(other.coeffs):
            return False
        return all(
            (a == b) if not isinstance(a, complex) else a == b
            for a, b in zip(self.coeffs, other.coeffs)
        )

    __hash__ = None

    def __repr__(self):
        terms = ", ".join(
            f"t^({self.leading + j}/{self.k}): {c!r}"
            for j, c in enumerate(self.coeffs[:4])
        )
        more = "..." if len(self.coeffs) > 4 else ""
        return f"PuiseuxSeries(k={self.k}, [{terms}{more}])"


# -- module-level operation wrappers (the public contract names) --------------


def gr_arith(a: GaussianRational, b: GaussianRational, op: str) -> GaussianRational:
    """Exact field operation; ``op`` is one of add/sub/mul/div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def series_mul(a: PuiseuxSeries, b: PuiseuxSeries, n: int | None = None) -> PuiseuxSeries:
    return a.mul(b, n)


def series_eval(s: PuiseuxSeries, sigma, t: complex, radius_guard=None) -> complex:
    return s.eval(t, sigma=sigma, radius_guard=radius_guard)
