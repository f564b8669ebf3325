"""Command-line front end.

A thin client over the HTTP service: every command builds a request, posts
it (to the in-process app by default, or to ``--server URL``), and writes
the returned payload to deterministic JSON/CSV artifacts in ``--out``.
Exit codes: 0 success, 2 obstructed resonance, 3 bad configuration.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click
import httpx

from .artifacts import config_header, fmt, json_artifact

EXIT_OBSTRUCTION = 2
EXIT_BAD_CONFIG = 3

SERIES_NAMES = ("x_plus", "x_minus", "z", "lam")


class Client:
    def __init__(self, server: str | None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            # starlette's sync ASGI client; the service runs inside this
            # process, one request per command, no daemon involved
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from starlette.testclient import TestClient

            from .service import app

            self._client = TestClient(app, raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        resp = self._client.post(path, json=payload)
        if resp.status_code >= 400:
            try:
                err = resp.json().get("error", {})
            except Exception:
                err = {"code": "internal", "detail": resp.text}
            click.echo(json.dumps({"error": err}), err=True)
            code = EXIT_OBSTRUCTION if err.get("code") == "obstruction" else EXIT_BAD_CONFIG
            sys.exit(code)
        return resp.json()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    click.echo(f"wrote {path}")


@click.group()
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.option("--out", type=click.Path(path_type=Path), default=Path("."), help="Output directory.")
@click.pass_context
def main(ctx, server, out):
    """Singular-expansion toolkit for the swinging Atwood's machine."""
    ctx.obj = {"client": Client(server), "out": out}


def _family_payload(family, k, r, g, m):
    payload = {"family": family, "g": g, "m": m}
    if family == "kr":
        payload.update({"k": k, "r": r})
    return payload


def _sigma_payload(c1, c2, d1, b1):
    sigma = {}
    for name, val in (("c1", c1), ("c2", c2), ("d1", d1), ("b1", b1)):
        if val is not None:
            sigma[name] = val
    return sigma or None


family_opts = [
    click.option("--family", type=click.Choice(["integrable", "kr"]), required=True),
    click.option("--k", type=int, default=None),
    click.option("--r", type=int, default=None),
    click.option("--g", default="1", help="Gravity (exact rational)."),
    click.option("--m", default="1", help="Swinging mass (exact rational)."),
]

sigma_opts = [
    click.option("--c1", default=None),
    click.option("--c2", default=None),
    click.option("--d1", default=None),
    click.option("--b1", default=None),
]


def add_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn

    return wrap


@main.command()
@click.argument("k_max", type=int)
@click.pass_obj
def scan(obj, k_max):
    """Admissible (k, r, M/m) table up to K_MAX."""
    data = obj["client"].post("/v1/scan", {"k_max": k_max})
    config = {"command": "scan", "k_max": k_max}
    path = obj["out"] / "admissible.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(config_header(config) + "\n")
        w = csv.writer(fh)
        w.writerow(["k", "r", "mass_ratio"])
        for row in data["pairs"]:
            w.writerow([row["k"], row["r"], row["mass_ratio"]])
    click.echo(f"wrote {path} ({len(data['pairs'])} rows)")


@main.command()
@add_options(family_opts)
@add_options(sigma_opts)
@click.option("--N", "n_orders", type=int, required=True)
@click.option("--policy", type=click.Choice(["paper", "b_normalized"]), default="paper")
@click.pass_obj
def expand(obj, family, k, r, g, m, c1, c2, d1, b1, n_orders, policy):
    """Puiseux expansion; writes expand.json (+ coeffs.csv with constants)."""
    payload = _family_payload(family, k, r, g, m)
    payload.update({"n_orders": n_orders, "policy": policy})
    sigma = _sigma_payload(c1, c2, d1, b1)
    if sigma:
        payload["sigma"] = sigma
    data = obj["client"].post("/v1/expand", payload)
    config = {"command": "expand", **payload}
    _write(obj["out"] / "expand.json", json_artifact(config, data))
    if "float_coeffs" in data:
        path = obj["out"] / "coeffs.csv"
        with open(path, "w", newline="") as fh:
            fh.write(config_header(config) + "\n")
            w = csv.writer(fh)
            w.writerow(["series", "n", "exp_num", "exp_den", "re", "im"])
            for name in SERIES_NAMES:
                lead, kk = data["leading"][name]
                for n, (re_, im_) in enumerate(data["float_coeffs"][name]):
                    w.writerow([name, n, lead + n, kk, fmt(re_), fmt(im_)])
        click.echo(f"wrote {path}")


def _read_csv_with_header(path: Path):
    with open(path) as fh:
        first = fh.readline()
        source = None
        if first.startswith("#"):
            source = json.loads(first[1:].strip())
            header = fh.readline()
        else:
            header = first
        cols = next(csv.reader([header]))
        rows = list(csv.DictReader(fh, fieldnames=cols))
    return source, rows


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--N", "n_orders", type=int, default=None, help="Truncate input to N coefficients.")
@click.option("--zero-tol", type=float, default=1e-9)
@click.pass_obj
def diagnose(obj, input_path, n_orders, zero_tol):
    """Ratio and exponent analysis of a coeffs.csv artifact."""
    source, rows = _read_csv_with_header(input_path)
    coeffs: dict = {}
    for row in rows:
        coeffs.setdefault(row["series"], []).append([float(row["re"]), float(row["im"])])
    if n_orders:
        coeffs = {k: v[:n_orders] for k, v in coeffs.items()}
    data = obj["client"].post("/v1/diagnose", {"coeffs": coeffs, "zero_tol": zero_tol})
    config = {
        "command": "diagnose",
        "input": str(input_path),
        "n_orders": n_orders,
        "zero_tol": zero_tol,
        "source": source,
        "guides": _exponent_guides(source),
    }
    header = config_header(config)
    path = obj["out"] / "ratios.csv"
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        w = csv.writer(fh)
        w.writerow(["series", "n", "ratio", "ratio_re", "ratio_im"])
        for name, seq in data["ratios"].items():
            for i, n in enumerate(seq["n"]):
                w.writerow(
                    [name, n, fmt(seq["modulus"][i]), fmt(seq["ratio"][i][0]), fmt(seq["ratio"][i][1])]
                )
    click.echo(f"wrote {path}")
    path = obj["out"] / "exponents.csv"
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        w = csv.writer(fh)
        w.writerow(["series", "n", "neg_alpha", "exponent"])
        for name, est in data["exponents"].items():
            for i, n in enumerate(est["n"]):
                w.writerow([name, n, fmt(est["neg_alpha"][i]), fmt(est["neg_alpha"][i] - 1.0)])
    click.echo(f"wrote {path}")
    summary = {
        name: {"limit": seq["limit"], "uncertainty": seq["uncertainty"]}
        for name, seq in data["ratios"].items()
    }
    _write(obj["out"] / "diagnose.json", json_artifact(config, {"ratio_limits": summary,
        "exponents": {k: v["exponent"] for k, v in data["exponents"].items()}}))


def _exponent_guides(source):
    """Asymptote guide values for the plots layer, when the family is known."""
    try:
        cfg = source["config"]
        if cfg["family"] == "integrable":
            return [1.5, -0.5, 0.5, -2.0]
        if cfg["family"] == "kr":
            k, r = cfg["k"], cfg["r"]
            return [2.0, -r / k, 1.0 - r / (2.0 * k), -2.0]
    except (TypeError, KeyError):
        return None
    return None


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True, path_type=Path), required=True,
              help="expand.json artifact with exact series.")
@click.option("--series", "series_name", type=click.Choice(SERIES_NAMES), default="x_plus")
@click.option("--M", "m_order", type=int, required=True)
@add_options(sigma_opts)
@click.pass_obj
def pade(obj, input_path, series_name, m_order, c1, c2, d1, b1):
    """Pade pole/residue analysis of a log-derivative; writes singularities.csv."""
    art = json.loads(Path(input_path).read_text())
    if "series" not in art:
        click.echo(json.dumps({"error": {"code": "bad_config",
                   "detail": "expand artifact carries no exact series"}}), err=True)
        sys.exit(EXIT_BAD_CONFIG)
    payload = {
        "series": art["series"][series_name],
        "m_order": m_order,
    }
    sigma = _sigma_payload(c1, c2, d1, b1)
    if sigma:
        payload["sigma"] = sigma
    cfg = art.get("config", {})
    if cfg.get("family") == "kr" and cfg.get("k"):
        payload["exponent_candidates"] = [2.0, -cfg["r"] / cfg["k"]]
    elif cfg.get("family") == "integrable":
        payload["exponent_candidates"] = [1.5, -0.5]
    data = obj["client"].post("/v1/pade", payload)
    config = {"command": "pade", "input": str(input_path), "series": series_name,
              "m_order": m_order, "sigma": sigma, "source": art.get("config")}
    path = obj["out"] / "singularities.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(config_header(config) + "\n")
        w = csv.writer(fh)
        w.writerow(["re_pole", "im_pole", "re_residue", "im_residue", "class"])
        for p in data["poles"]:
            res = p["residue"] if p["residue"] is not None else [float("nan")] * 2
            w.writerow([fmt(p["pole"][0]), fmt(p["pole"][1]),
                        fmt(res[0]), fmt(res[1]), p["class"]])
        for z in data["zeros"]:
            w.writerow([fmt(z[0]), fmt(z[1]), "0", "0", "zero"])
    click.echo(f"wrote {path}")
    _write(obj["out"] / "pade.json", json_artifact(config, {
        "effective_m": data["effective_m"], "condition": data["condition"],
        "reductions": data["reductions"], "poles": data["poles"]}))


@main.command()
@click.option("--K", "k_param", type=float, required=True)
@click.option("--E", "energy", type=float, required=True)
@click.option("--g", type=float, default=1.0)
@click.option("--n-grid", type=int, default=64)
@click.option("--radius", type=float, default=0.8)
@click.pass_obj
def exact(obj, k_param, energy, g, n_grid, radius):
    """Closed-form trigonometric solution on a uniformiser grid."""
    payload = {"K": [k_param, 0.0], "E": energy, "g": g, "n_grid": n_grid, "radius": radius}
    data = obj["client"].post("/v1/exact", payload)
    config = {"command": "exact", **payload}
    path = obj["out"] / "grid.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = ["U", "t", "x_plus", "x_minus", "z", "lam"]
    with open(path, "w", newline="") as fh:
        fh.write(config_header(config) + "\n")
        w = csv.writer(fh)
        w.writerow([f"{c}_{p}" for c in cols for p in ("re", "im")])
        for row in data["rows"]:
            w.writerow([fmt(row[c][i]) for c in cols for i in (0, 1)])
    click.echo(f"wrote {path}")
    _write(obj["out"] / "bridge.json", json_artifact(config, {
        "t_inf": data["t_inf"], "bridge": data["bridge"]}))


@main.command()
@add_options(family_opts)
@add_options(sigma_opts)
@click.option("--N", "n_orders", type=int, default=14)
@click.pass_obj
def poisson(obj, family, k, r, g, m, c1, c2, d1, b1, n_orders):
    """Bracket table of the expansion constants at an exact assignment."""
    payload = _family_payload(family, k, r, g, m)
    sigma = _sigma_payload(c1, c2, d1, b1)
    if not sigma:
        click.echo(json.dumps({"error": {"code": "bad_config",
                   "detail": "poisson requires an exact constant assignment"}}), err=True)
        sys.exit(EXIT_BAD_CONFIG)
    payload.update({"sigma": sigma, "n_orders": n_orders})
    data = obj["client"].post("/v1/poisson", payload)
    config = {"command": "poisson", **payload}
    _write(obj["out"] / "brackets.json", json_artifact(config, data))


@main.command()
@add_options(family_opts)
@add_options(sigma_opts)
@click.option("--N", "n_orders", type=int, default=120)
@click.option("--t-start", required=True, help="Complex start time, e.g. '0.02+0.01j'.")
@click.option("--t-end", required=True)
@click.option("--tol", type=float, default=1e-10)
@click.pass_obj
def integrate(obj, family, k, r, g, m, c1, c2, d1, b1, n_orders, t_start, t_end, tol):
    """Integrate from a series-built state; writes trajectory.csv."""
    try:
        t0, t1 = complex(t_start), complex(t_end)
    except ValueError:
        click.echo(json.dumps({"error": {"code": "bad_config",
                   "detail": "t-start/t-end must parse as complex numbers"}}), err=True)
        sys.exit(EXIT_BAD_CONFIG)
    payload = _family_payload(family, k, r, g, m)
    sigma = _sigma_payload(c1, c2, d1, b1)
    if not sigma:
        click.echo(json.dumps({"error": {"code": "bad_config",
                   "detail": "integrate requires a constant assignment"}}), err=True)
        sys.exit(EXIT_BAD_CONFIG)
    payload.update({
        "sigma": sigma, "n_orders": n_orders,
        "t_start": [t0.real, t0.imag], "t_end": [t1.real, t1.imag],
        "rtol": tol, "atol": tol * 1e-2,
    })
    data = obj["client"].post("/v1/integrate", payload)
    config = {"command": "integrate", **payload}
    path = obj["out"] / "trajectory.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(config_header(config) + "\n")
        w = csv.writer(fh)
        cols = ["t_re", "t_im", "xp_re", "xp_im", "xm_re", "xm_im", "z_re", "z_im",
                "constraint_residual", "energy_drift"]
        if data["samples"] and "series_deviation" in data["samples"][0]:
            cols.append("series_deviation")
        w.writerow(cols)
        for s in data["samples"]:
            row = [fmt(s["t"][0]), fmt(s["t"][1]), fmt(s["x_plus"][0]), fmt(s["x_plus"][1]),
                   fmt(s["x_minus"][0]), fmt(s["x_minus"][1]), fmt(s["z"][0]), fmt(s["z"][1]),
                   fmt(s["constraint_residual"]), fmt(s["energy_drift"])]
            if "series_deviation" in s:
                row.append(fmt(s["series_deviation"]))
            w.writerow(row)
    click.echo(f"wrote {path} ({data['n_steps']} steps, complete={data['complete']})")
    if not data["complete"]:
        click.echo(f"integration truncated: {data['reason']}", err=True)


if __name__ == "__main__":
    main()
