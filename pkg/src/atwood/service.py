"""HTTP service exposing the toolkit operations.

Endpoints are stateless: each request carries its full configuration and
returns the complete result payload; the CLI client turns payloads into
files.  Complex numbers travel as [re, im] pairs, exact rationals as
strings like "3/4" or "-9/10i".

Run standalone with ``uvicorn atwood.service:app``; the bundled CLI talks
to the app in process by default.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Literal

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from . import __version__, diagnostics, exactsol, kowalevski, model, poisson
from .exactnum import GaussianRational, PuiseuxSeries, parse_gaussian

app = FastAPI(title="atwood", version=__version__)


class BadConfigError(ValueError):
    pass


@app.exception_handler(kowalevski.ObstructionError)
async def _obstruction_handler(request: Request, exc: kowalevski.ObstructionError):
    return JSONResponse(
        status_code=409,
        content={"error": {"code": "obstruction", "s": exc.s, "detail": str(exc)}},
    )


@app.exception_handler(BadConfigError)
@app.exception_handler(ValueError)
async def _bad_config_handler(request: Request, exc: Exception):
    return JSONResponse(
        status_code=422,
        content={"error": {"code": "bad_config", "detail": str(exc)}},
    )


@app.exception_handler(RequestValidationError)
async def _validation_handler(request: Request, exc: RequestValidationError):
    return JSONResponse(
        status_code=422,
        content={"error": {"code": "bad_config", "detail": str(exc.errors())}},
    )


def _parse_sigma(sigma: dict | None) -> dict | None:
    if not sigma:
        return None
    out = {}
    for key, value in sigma.items():
        if isinstance(value, str):
            out[key] = parse_gaussian(value)
        elif isinstance(value, (list, tuple)) and len(value) == 2:
            out[key] = complex(value[0], value[1])
        else:
            raise BadConfigError(f"constant {key}: expected rational string or [re, im]")
    return out


def _balance(family: str, k: int | None, r: int | None, g: str, m: str) -> tuple:
    gq, mq = Fraction(g), Fraction(m)
    if family == "integrable":
        bal = kowalevski.leading_balance(3)[0]
    elif family == "kr":
        if k is None or r is None:
            raise BadConfigError("family 'kr' requires k and r")
        pairs = [p for p in kowalevski.admissible_pairs(k) if p[0] == k and p[1] == r]
        if not pairs:
            raise BadConfigError(f"({k}, {r}) is not an admissible pair")
        bal = next(
            b
            for b in kowalevski.leading_balance(pairs[0][2])
            if b.family == "q2" and b.k == k and b.r == r
        )
    else:
        raise BadConfigError(f"unknown family {family!r}")
    return bal, bal.machine_params(m=mq, g=gq)


class FamilySelector(BaseModel):
    family: Literal["integrable", "kr"]
    k: int | None = None
    r: int | None = None
    g: str = "1"
    m: str = "1"

    @field_validator("g", "m")
    @classmethod
    def _positive_rational(cls, v: str) -> str:
        if Fraction(v) <= 0:
            raise ValueError("must be positive")
        return v


class ScanRequest(BaseModel):
    k_max: int = Field(ge=0, le=10_000)


class ScanResponse(BaseModel):
    pairs: list[dict]


@app.get("/v1/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/v1/scan", response_model=ScanResponse)
def scan(req: ScanRequest) -> dict:
    pairs = [
        {"k": k, "r": r, "mass_ratio": str(ratio)}
        for k, r, ratio in kowalevski.admissible_pairs(req.k_max)
    ]
    return {"pairs": pairs}


class ExpandRequest(FamilySelector):
    n_orders: int = Field(ge=3, le=2000)
    policy: Literal["paper", "b_normalized"] = "paper"
    sigma: dict[str, str | list[float]] | None = None


@app.post("/v1/expand")
def expand(req: ExpandRequest) -> dict:
    bal, params = _balance(req.family, req.k, req.r, req.g, req.m)
    sol = kowalevski.expand(
        bal, params, req.n_orders, constant_policy=req.policy, sigma=_parse_sigma(req.sigma)
    )
    body = {
        "family": sol.family,
        "k": sol.k,
        "r": sol.r,
        "mode": sol.mode,
        "mass_ratio": str(bal.mass_ratio),
        "constants": [{"name": e.name, "step": e.step} for e in sol.constants],
        "resonance_log": [e.to_json_dict() for e in sol.resonance_log],
    }
    if sol.mode in ("symbolic", "exact"):
        body["series"] = {name: s.to_json_dict() for name, s in sol.series.items()}
    if sol.mode != "symbolic":
        body["float_coeffs"] = {
            name: [[c.real, c.imag] for c in diagnostics.series_to_coeffs(s)]
            for name, s in sol.series.items()
        }
        body["leading"] = {name: [s.leading, s.k] for name, s in sol.series.items()}
    return body


class DiagnoseRequest(BaseModel):
    coeffs: dict[str, list[list[float]]]
    zero_tol: float = 1e-9


@app.post("/v1/diagnose")
def diagnose(req: DiagnoseRequest) -> dict:
    ratios = {}
    exponents = {}
    for name, rows in req.coeffs.items():
        cs = [complex(a, b) for a, b in rows]
        try:
            seq = diagnostics.dalembert(cs, zero_tol=req.zero_tol)
        except ValueError as exc:
            raise BadConfigError(f"{name}: {exc}") from None
        ratios[name] = {
            "n": [int(v) for v in seq.indices],
            "modulus": list(map(float, seq.moduli)),
            "ratio": [[v.real, v.imag] for v in seq.ratios],
            "limit": seq.limit,
            "uncertainty": seq.uncertainty,
            "skipped": list(seq.skipped),
        }
        try:
            est = diagnostics.exponent_estimate(cs, zero_tol=req.zero_tol)
        except ValueError:
            continue
        exponents[name] = {
            "n": [int(v) for v in est.indices],
            "neg_alpha": [v.real for v in est.values],
            "neg_alpha_tail": est.neg_alpha,
            "exponent": est.exponent,
        }
    return {"ratios": ratios, "exponents": exponents}


class PadeRequest(BaseModel):
    series: dict  # exact series JSON (exactnum schema)
    sigma: dict[str, str | list[float]] | None = None
    m_order: int = Field(ge=1, le=400)
    exponent_candidates: list[float] | None = None


@app.post("/v1/pade")
def pade_endpoint(req: PadeRequest) -> dict:
    series = PuiseuxSeries.from_json_dict(req.series)
    sigma = _parse_sigma(req.sigma)
    n_need = 2 * req.m_order + 2
    coeffs = diagnostics.log_derivative_coeffs(series, sigma=sigma, n=n_need)
    ap = diagnostics.pade(coeffs, req.m_order)
    report = diagnostics.pole_residues(ap, exponent_candidates=req.exponent_candidates)
    return {
        "effective_m": ap.effective_m,
        "condition": ap.condition,
        "reductions": [list(r) for r in ap.reductions],
        "numerator": [[c.real, c.imag] for c in ap.numerator],
        "denominator": [[c.real, c.imag] for c in ap.denominator],
        "poles": [
            {
                "pole": [e.pole.real, e.pole.imag],
                "residue": [e.residue.real, e.residue.imag]
                if e.residue == e.residue  # not NaN
                else None,
                "class": e.cls,
                "paired_zero_distance": float(e.paired_zero_distance)
                if e.paired_zero_distance != float("inf")
                else -1.0,
                "nearest_exponent": e.nearest_exponent,
                "exponent_deviation": e.exponent_deviation,
            }
            for e in report.entries
        ],
        "zeros": [[z.real, z.imag] for z in report.zeros],
    }


class ExactRequest(BaseModel):
    K: list[float]
    E: float = Field(gt=0)
    g: float = Field(default=1.0, gt=0)
    n_grid: int = Field(default=64, ge=1, le=100_000)
    radius: float = Field(default=0.8, gt=0)


@app.post("/v1/exact")
def exact(req: ExactRequest) -> dict:
    import cmath

    params = exactsol.TrigParams(K=complex(*req.K), E=req.E, g=req.g)
    us = [
        req.radius * cmath.exp(2j * cmath.pi * (j + 0.5) / req.n_grid)
        for j in range(req.n_grid)
    ]
    rows = exactsol.trig_grid(params, us)
    b1, c1, d1 = exactsol.bridge_constants(params)
    pack = lambda z: [z.real, z.imag]
    return {
        "t_inf": pack(params.t_inf),
        "bridge": {"b1": pack(b1), "c1": pack(c1), "d1": pack(d1)},
        "rows": [{key: pack(val) for key, val in row.items()} for row in rows],
    }


class PoissonRequest(FamilySelector):
    sigma: dict[str, str]
    n_orders: int = Field(default=14, ge=8, le=60)


@app.post("/v1/poisson")
def poisson_endpoint(req: PoissonRequest) -> dict:
    bal, params = _balance(req.family, req.k, req.r, req.g, req.m)
    sol = kowalevski.expand(bal, params, req.n_orders)
    table = poisson.solve_brackets(sol, params, req.sigma)
    hb = poisson.hamiltonian_brackets(sol, table, params)
    forms = poisson.closed_form_brackets(sol.family, params)
    jac = poisson.jacobi_check(forms, table.coords, [req.sigma])
    closed = poisson.closed_form_table(sol.family, params, req.sigma)
    return {
        "table": table.to_json_dict(),
        "matches_closed_form": all(
            v == closed[pair] for pair, v in table.values.items()
        ),
        "hamiltonian_brackets": {k: str(v) for k, v in hb.items()},
        "jacobi_residual_sq": str(jac),
    }


class IntegrateRequest(FamilySelector):
    sigma: dict[str, str | list[float]]
    n_orders: int = Field(default=120, ge=10, le=600)
    t_start: list[float]
    t_end: list[float]
    rtol: float = Field(default=1e-10, gt=0)
    atol: float = Field(default=1e-12, gt=0)
    compare_series: bool = True


@app.post("/v1/integrate")
def integrate(req: IntegrateRequest) -> dict:
    bal, params = _balance(req.family, req.k, req.r, req.g, req.m)
    sol = kowalevski.expand(bal, params, req.n_orders, sigma=_parse_sigma(req.sigma))
    t0 = complex(*req.t_start)
    t1 = complex(*req.t_end)
    state = model.CartesianState(
        x_plus=sol.x_plus.eval(t0),
        x_minus=sol.x_minus.eval(t0),
        z=sol.z.eval(t0),
        v_plus=sol.x_plus.differentiate().eval(t0),
        v_minus=sol.x_minus.differentiate().eval(t0),
        v_z=sol.z.differentiate().eval(t0),
    )
    traj = model.integrate_complex(
        state, params, (t0, t1), rtol=req.rtol, atol=req.atol
    )
    pack = lambda z: [z.real, z.imag]
    samples = []
    drift = traj.energy_drift
    for i in range(len(traj.t)):
        row = {
            "t": pack(traj.t[i]),
            "x_plus": pack(traj.states[i, 0]),
            "x_minus": pack(traj.states[i, 1]),
            "z": pack(traj.states[i, 2]),
            "constraint_residual": float(traj.constraint[i]),
            "energy_drift": float(drift[i]),
        }
        if req.compare_series:
            dev = max(
                abs(sol.x_plus.eval(traj.t[i]) - traj.states[i, 0]),
                abs(sol.x_minus.eval(traj.t[i]) - traj.states[i, 1]),
                abs(sol.z.eval(traj.t[i]) - traj.states[i, 2]),
            )
            row["series_deviation"] = float(dev)
        samples.append(row)
    return {
        "complete": traj.complete,
        "reason": traj.reason,
        "n_steps": traj.n_steps,
        "samples": samples,
    }
