"""Floating-point analysis of series coefficients: radius-of-convergence
ratio tests, singularity-exponent extraction, Pade approximants of
logarithmic derivatives, and pole/residue classification.

Everything here consumes plain coefficient lists in the branch variable
z = t**(1/k).  Exact coefficients are converted to complex floats once, on
entry; all estimators then work in double precision, matching the displayed
precision of the quantities they reproduce.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.linalg

from .exactnum import GaussianRational, PuiseuxSeries, coeff_to_complex


def series_to_coeffs(series: PuiseuxSeries, sigma=None) -> list:
    """Float coefficient list of a series, in order, including exact zeros."""
    return [coeff_to_complex(c, sigma) for c in series.coeffs]


# ---------------------------------------------------------------------------
# d'Alembert ratio test
# ---------------------------------------------------------------------------


@dataclass
class RatioSequence:
    """Gap-corrected ratio data |a_{n+g}/a_n|^(1/g) with a tail estimate.

    ``limit`` is the tail average of the 1/n-extrapolated moduli; the raw
    ratio converges only like O(1/n) (the prefactor n^alpha), which the
    two-point extrapolation (n_i m_i - n_j m_j)/(n_i - n_j) removes.
    """

    indices: np.ndarray
    ratios: np.ndarray  # raw complex ratios a_{n+g}/a_n
    moduli: np.ndarray  # gap-corrected |a_{n+g}/a_n|^(1/g)
    skipped: tuple  # indices of zero coefficients
    limit: float
    uncertainty: float

    def radius(self) -> float:
        return 1.0 / self.limit


def _tail(values: np.ndarray, fraction: float = 0.1, at_least: int = 3) -> np.ndarray:
    n = max(at_least, int(round(len(values) * fraction)))
    return values[-n:]


def _structural_zeros(cs: np.ndarray, zero_tol: float) -> np.ndarray:
    """Mark coefficients that are zero up to noise.

    A structurally-zero position of an exactly computed series holds an
    exact 0.0 after float conversion, but only roundoff noise when the
    series itself was generated in finite precision.  A coefficient far
    below both neighbours (relative factor ``zero_tol``) is treated as such
    a zero; this misfires only for series whose genuine term ratio is
    steeper than zero_tol.
    """
    mags = np.abs(cs)
    zero = mags == 0.0
    if zero_tol > 0:
        for n in range(len(cs)):
            neigh = [mags[i] for i in (n - 1, n + 1) if 0 <= i < len(cs)]
            if neigh and mags[n] < zero_tol * max(neigh):
                zero[n] = True
    return zero


def dalembert(coeffs, zero_tol: float = 1e-9) -> RatioSequence:
    """Ratio test estimating the inverse radius of convergence."""
    cs = np.asarray([complex(c) for c in coeffs])
    zero = _structural_zeros(cs, zero_tol)
    nz = [(n, c) for n, c in enumerate(cs) if not zero[n]]
    skipped = tuple(int(n) for n in np.nonzero(zero)[0])
    if len(nz) < 10:
        raise ValueError("ratio test needs at least 10 nonzero coefficients")
    idx = []
    ratios = []
    moduli = []
    for (n1, c1), (n2, c2) in zip(nz, nz[1:]):
        gap = n2 - n1
        ratios.append(c2 / c1)
        moduli.append(abs(c2 / c1) ** (1.0 / gap))
        idx.append(n2)
    idx = np.array(idx)
    ratios = np.array(ratios)
    moduli = np.array(moduli)
    # extrapolate m_i ~ rho + B/n_i pairwise, then tail-average
    extr = (idx[1:] * moduli[1:] - idx[:-1] * moduli[:-1]) / (idx[1:] - idx[:-1])
    tail = _tail(extr)
    limit = float(np.mean(tail))
    unc = float((np.max(tail) - np.min(tail)) / 2)
    return RatioSequence(
        indices=idx,
        ratios=ratios,
        moduli=moduli,
        skipped=skipped,
        limit=limit,
        uncertainty=unc,
    )


# ---------------------------------------------------------------------------
# Singularity exponent from the coefficient prefactor
# ---------------------------------------------------------------------------


@dataclass
class ExponentEstimate:
    """Sequence of n^2 (a_{n-2} a_n / a_{n-1}^2 - 1) -> -alpha, with the
    binomial-map singular exponent -1 - alpha."""

    indices: np.ndarray
    values: np.ndarray  # complex estimates of -alpha
    neg_alpha: float
    exponent: float
    skipped: tuple


def exponent_estimate(coeffs, zero_tol: float = 1e-9) -> ExponentEstimate:
    cs = np.asarray([complex(c) for c in coeffs])
    zero = _structural_zeros(cs, zero_tol)
    nz = [(n, c) for n, c in enumerate(cs) if not zero[n] and n >= 1]
    skipped = tuple(int(n) for n in np.nonzero(zero)[0])
    if len(nz) < 30:
        raise ValueError("exponent estimate needs at least 30 nonzero coefficients")
    idx = []
    vals = []
    for (n1, c1), (n2, c2), (n3, c3) in zip(nz, nz[1:], nz[2:]):
        # general three-point form; for consecutive indices this is
        # n^2 (a_{n-2} a_n / a_{n-1}^2 - 1)
        u, w = n3 - n2, n2 - n1
        e = (c1 / c2) ** u * (c3 / c2) ** w
        denom = u * np.log(n1) - (u + w) * np.log(n2) + w * np.log(n3)
        vals.append(-(e - 1.0) / denom)
        idx.append(n2)
    idx = np.array(idx)
    vals = np.array(vals)
    tail = _tail(np.real(vals))
    neg_alpha = float(np.mean(tail))
    return ExponentEstimate(
        indices=idx,
        values=vals,
        neg_alpha=neg_alpha,
        exponent=neg_alpha - 1.0,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# Pade approximants
# ---------------------------------------------------------------------------


@dataclass
class PadeApproximant:
    """[M, M+1] rational approximant; coefficients are ascending in z."""

    numerator: np.ndarray
    denominator: np.ndarray
    requested_m: int
    effective_m: int
    condition: float
    reductions: tuple = ()

    def __call__(self, z):
        num = np.polyval(self.numerator[::-1], z)
        den = np.polyval(self.denominator[::-1], z)
        return num / den

    def taylor(self, n: int) -> np.ndarray:
        """Re-expanded Taylor coefficients, for reconstruction checks."""
        inv = np.zeros(n, dtype=complex)
        inv[0] = 1.0 / self.denominator[0]
        for j in range(1, n):
            acc = 0j
            for i in range(1, min(j, len(self.denominator) - 1) + 1):
                acc += self.denominator[i] * inv[j - i]
            inv[j] = -acc / self.denominator[0]
        out = np.zeros(n, dtype=complex)
        for j in range(n):
            for i in range(min(j, len(self.numerator) - 1) + 1):
                out[j] += self.numerator[i] * inv[j - i]
        return out


def pade(coeffs, m: int) -> PadeApproximant:
    """[M, M+1] Pade approximant of a Taylor series.

    The denominator comes from the standard Toeplitz linear system, solved
    through a column-pivoted QR factorisation; an exactly rank-deficient
    system reduces M (recorded in ``reductions``) until solvable.
    """
    cs = np.asarray([complex(c) for c in coeffs])
    if len(cs) < 2 * int(m) + 2:
        raise ValueError(
            f"[{m},{m+1}] Pade needs {2 * int(m) + 2} coefficients, got {len(cs)}"
        )
    reductions = []
    m_eff = int(m)
    while m_eff >= 0:
        ell = m_eff + 1
        rows = np.arange(m_eff + 1, m_eff + 1 + ell)
        A = np.empty((ell, ell), dtype=complex)
        for i, n in enumerate(rows):
            A[i] = cs[n - 1 : n - ell - 1 : -1] if n - ell - 1 >= 0 else np.concatenate(
                [cs[n - 1 :: -1], np.zeros(ell - n, dtype=complex)]
            )
        rhs = -cs[rows]
        q, r, piv = scipy.linalg.qr(A, pivoting=True)
        diag = np.abs(np.diag(r))
        if diag.min() == 0.0 or not np.all(np.isfinite(diag)):
            reductions.append((m_eff, "rank-deficient Toeplitz system"))
            m_eff -= 1
            continue
        yq = q.conj().T @ rhs
        xp = scipy.linalg.solve_triangular(r, yq)
        x = np.empty_like(xp)
        x[piv] = xp
        if not np.all(np.isfinite(x)):
            reductions.append((m_eff, "non-finite solution"))
            m_eff -= 1
            continue
        den = np.concatenate([[1.0 + 0j], x])
        num = np.array(
            [sum(cs[j - i] * den[i] for i in range(min(j, ell) + 1)) for j in range(m_eff + 1)]
        )
        cond = float(diag.max() / diag.min())
        return PadeApproximant(
            numerator=num,
            denominator=den,
            requested_m=int(m),
            effective_m=m_eff,
            condition=cond,
            reductions=tuple(reductions),
        )
    raise ValueError("could not build any Pade approximant from the input")


# ---------------------------------------------------------------------------
# Poles, residues and classification
# ---------------------------------------------------------------------------

TRUE_RESIDUE_THRESHOLD = 0.5
FROISSART_PAIR_DISTANCE = 1e-4


@dataclass
class Singularity:
    pole: complex
    residue: complex
    cls: str  # true_branch_point | froissart_artifact | unclassified
    paired_zero_distance: float
    nearest_exponent: float | None = None
    exponent_deviation: float | None = None


@dataclass
class SingularityReport:
    entries: list
    zeros: np.ndarray

    def true_poles(self) -> list:
        return [e for e in self.entries if e.cls == "true_branch_point"]


def pole_residues(p: PadeApproximant, exponent_candidates=None) -> SingularityReport:
    """Poles (companion-matrix roots of the denominator), residues, and the
    true-branch-point / Froissart classification.

    For a log-derivative input the residue at a genuine branch point equals
    the local exponent; ``exponent_candidates`` (e.g. the two Kowalevski
    exponents of the family) attaches the nearest theoretical exponent to
    each true pole.
    """
    poles = np.roots(p.denominator[::-1])
    zeros = np.roots(p.numerator[::-1]) if len(p.numerator) > 1 else np.array([])
    dden = np.polyder(np.poly1d(p.denominator[::-1]))
    entries = []
    for pole in poles:
        with np.errstate(over="ignore", invalid="ignore"):
            slope = dden(pole)
            if slope == 0:  # numerically repeated root; residue undefined
                slope = np.finfo(float).tiny
            residue = np.polyval(p.numerator[::-1], pole) / slope
        dist = float(np.min(np.abs(zeros - pole))) if len(zeros) else np.inf
        if not np.isfinite(residue):
            residue = complex(np.nan, np.nan)
            cls = "unclassified"
        elif abs(residue) >= TRUE_RESIDUE_THRESHOLD:
            cls = "true_branch_point"
        elif dist <= FROISSART_PAIR_DISTANCE:
            cls = "froissart_artifact"
        else:
            cls = "unclassified"
        entry = Singularity(
            pole=complex(pole),
            residue=complex(residue),
            cls=cls,
            paired_zero_distance=dist,
        )
        if cls == "true_branch_point" and exponent_candidates:
            cands = [float(c) for c in exponent_candidates]
            nearest = min(cands, key=lambda c: abs(residue - c))
            entry.nearest_exponent = nearest
            entry.exponent_deviation = float(abs(residue - nearest))
        entries.append(entry)
    entries.sort(key=lambda e: abs(e.pole))
    return SingularityReport(entries=entries, zeros=zeros)


# ---------------------------------------------------------------------------
# Log-derivative preparation for the Pade analysis
# ---------------------------------------------------------------------------


def log_derivative_coeffs(series: PuiseuxSeries, sigma=None, n: int | None = None):
    """Taylor coefficients (in z = t**(1/k)) of d/dz log(series) with the
    exact principal part at z = 0 removed.

    Writing series = z**lead * A(z) with A(0) != 0, this is A'(z)/A(z); the
    discarded pole is lead/z.  Computed exactly when the series is exact,
    converted to float at the end.
    """
    s = series if sigma is None else series.substitute(sigma)
    if s.is_zero():
        raise ValueError("zero series has no logarithmic derivative")
    if n is None:
        n = len(s.coeffs) - 1
    # A(z) = sum coeffs[j] z^j; A'(z)/A(z) as a power series
    a = s.coeffs
    ap = [a[j + 1] * (j + 1) for j in range(len(a) - 1)]
    azero = s.zero
    A = PuiseuxSeries(1, 0, list(a), azero)
    Ap = PuiseuxSeries(1, 0, ap, azero)
    f = Ap * A.invert(len(ap))
    coeffs = [f.coeff_at(j) for j in range(f.leading, f.leading + len(f.coeffs))]
    # f.leading could exceed 0 if A'(0)=0; pad so index 0 is z^0
    out = [0j] * n
    for j, c in enumerate(coeffs):
        num = f.leading + j
        if 0 <= num < n:
            out[num] = coeff_to_complex(c)
    return out


# ---------------------------------------------------------------------------
# CSV contracts consumed by the plots component
# ---------------------------------------------------------------------------


def write_ratio_csv(path, sequences: dict, header_comment: str | None = None):
    """Long-format rows (series, n, ratio, ratio_re, ratio_im)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["series", "n", "ratio", "ratio_re", "ratio_im"])
        for name, seq in sequences.items():
            for i, n in enumerate(seq.indices):
                w.writerow(
                    [
                        name,
                        int(n),
                        f"{seq.moduli[i]:.17g}",
                        f"{seq.ratios[i].real:.17g}",
                        f"{seq.ratios[i].imag:.17g}",
                    ]
                )


def write_exponent_csv(path, estimates: dict, header_comment: str | None = None):
    """Long-format rows (series, n, neg_alpha, exponent)."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["series", "n", "neg_alpha", "exponent"])
        for name, est in estimates.items():
            for i, n in enumerate(est.indices):
                v = est.values[i].real
                w.writerow([name, int(n), f"{v:.17g}", f"{v - 1.0:.17g}"])


def write_singularity_csv(path, report: SingularityReport, header_comment=None, include_zeros=True):
    """Rows (re_pole, im_pole, re_residue, im_residue, class); numerator
    zeros are appended with class ``zero`` for pole/zero maps."""
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["re_pole", "im_pole", "re_residue", "im_residue", "class"])
        for e in report.entries:
            w.writerow(
                [
                    f"{e.pole.real:.17g}",
                    f"{e.pole.imag:.17g}",
                    f"{e.residue.real:.17g}",
                    f"{e.residue.imag:.17g}",
                    e.cls,
                ]
            )
        if include_zeros:
            for z in report.zeros:
                w.writerow([f"{z.real:.17g}", f"{z.imag:.17g}", "0", "0", "zero"])
