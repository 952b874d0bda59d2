"""Command-line front end: experiment orchestration, CSV/JSON emission,
deterministic seeding.

Outputs start with '#'-prefixed header lines echoing the config hash; exit
codes: 0 ok, 2 config, 3 budget, 4 numeric.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from . import errors
from .config import ExperimentConfig, load_config, parse_float_list
from .errors import ConfigInvalid, exit_code


def _emit(cfg: ExperimentConfig, body: str) -> None:
    out = "\n".join(cfg.header_lines()) + "\n" + body
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _problem_from_config(cfg: ExperimentConfig):
    from .quadric import diagonal_problem, disc_problem
    if cfg.form == "disc":
        return disc_problem(int(cfg.m), cfg.norm)
    try:
        d1, d2, d3 = (int(tok) for tok in cfg.form.split(","))
    except ValueError as e:
        raise ConfigInvalid(f"bad form {cfg.form!r}") from e
    return diagonal_problem(d1, d2, d3, int(cfg.m), cfg.norm)


def cmd_count(cfg: ExperimentConfig) -> None:
    from .quadric import brute_force_count, orbit_count
    problem = _problem_from_config(cfg)
    Ts = parse_float_list(cfg.T, "T")
    want_orbits = bool(int(cfg.extra.get("orbits", 0)))
    rows = []
    orbit_keys: list = []
    per_orbit = []
    for T in Ts:
        total = brute_force_count(problem, T, budget=cfg.point_budget)
        if want_orbits:
            oc = orbit_count(problem, T, plateau_budget=cfg.plateau_budget)
            for k in oc:
                if k not in orbit_keys:
                    orbit_keys.append(k)
            per_orbit.append(oc)
        rows.append([T, total])
    if want_orbits:
        orbit_keys.sort()
        for row, oc in zip(rows, per_orbit):
            row.extend(oc.get(k, 0) for k in orbit_keys)
        cols = ["T", "total"] + [f"orbit{k}".replace(" ", "")
                                 for k in orbit_keys]
    else:
        cols = ["T", "total"]
    _emit(cfg, _csv(rows, cols))


def cmd_fit(cfg: ExperimentConfig) -> None:
    from .quadric import CountSeries, fit_main_term
    path = cfg.extra.get("input")
    if not path:
        raise ConfigInvalid("fit needs input=<csv>")
    Ts, Ns = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("T,"):
                continue
            parts = line.split(",")
            Ts.append(float(parts[0]))
            Ns.append(float(parts[1]))
    fit = fit_main_term(CountSeries(T=Ts, counts=Ns))
    body = json.dumps({"c1": fit.coeffs["c1"], "c2": fit.coeffs["c2"],
                       "max_rel_residual": float(
                           np.max(np.abs(fit.meta["relative_residuals"])))})
    _emit(cfg, body + "\n")


def cmd_torus(cfg: ExperimentConfig) -> None:
    from .number_field import NumberFieldSpec, ok_lattice
    from .torus_lines import character_bump, discrepancy_sweep
    spec = NumberFieldSpec.parse(cfg.field)
    lattice = ok_lattice(spec)
    Ts = parse_float_list(cfg.T, "T")
    f = character_bump(lattice)
    if cfg.direction.startswith("complex"):
        j = int(cfg.direction.split(":")[1]) if ":" in cfg.direction else 0
        direction = ("complex", j)
    else:
        direction = int(cfg.direction) - 1
        if not 0 <= direction < lattice.rank:
            raise ConfigInvalid(f"direction out of range: {cfg.direction}")
    fit = discrepancy_sweep(f, lattice, direction, Ts)
    rows = []
    for i, T in enumerate(Ts):
        rows.append([T,
                     float(fit.values[i] + (fit.meta.get("torus_average", 0.0)
                           if not isinstance(direction, tuple)
                           else 2 * math.pi * fit.meta["torus_average"])),
                     fit.meta.get("torus_average", 0.0),
                     float(fit.values[i]),
                     float(fit.meta["excluded_measure"][i])])
    body = _csv(rows, ["T", "line_avg", "torus_avg", "abs_err",
                       "excluded_measure"])
    body += f"# delta_hat={fit.coeffs.get('delta_hat', float('nan'))}\n"
    _emit(cfg, body)


def cmd_volume(cfg: ExperimentConfig) -> None:
    from .volume_zeta import ball_measure, log_weighted_ball
    problem = _problem_from_config(cfg)
    Ts = parse_float_list(cfg.T, "T")
    rows = [[T, ball_measure(problem, T), log_weighted_ball(problem, T)]
            for T in Ts]
    _emit(cfg, _csv(rows, ["T", "ball_measure", "log_weighted_ball"]))


def cmd_zeta(cfg: ExperimentConfig) -> None:
    from .volume_zeta import height_zeta
    problem = _problem_from_config(cfg)
    taus = parse_float_list(cfg.tau, "tau")
    rows = []
    for tau in taus:
        plain = height_zeta(problem, tau, cfg.cutoff)
        logw = height_zeta(problem, tau, cfg.cutoff, weighted=True)
        rows.append([tau, plain.value, plain.tail_estimate, logw.value,
                     logw.tail_estimate])
    _emit(cfg, _csv(rows, ["tau", "Z", "Z_err", "Z_log", "Z_log_err"]))


def cmd_equidist(cfg: ExperimentConfig) -> None:
    from .equidist import d_constants, theorem_check
    from .modular import TestBump
    svals = parse_float_list(cfg.s or "2,4,8,16,32,64", "s")
    center = complex(*[float(t) for t in
                       cfg.extra.get("center", "0,1").split(",")])
    rho = float(cfg.extra.get("rho", 0.3))
    bump = TestBump(center=center, rho=rho)
    dconst = d_constants(bump, cfg.eps0)
    rows_data, fit = theorem_check(bump, svals, cfg.eps0, dconst)
    rows = [[r.s, r.T, r.orbit, r.log_term, r.dplus, r.dminus, r.residual]
            for r in rows_data]
    body = _csv(rows, ["s", "T", "orbit_integral", "log_term", "Dplus",
                       "Dminus", "residual"])
    body += f"# residual_decay_exponent={-fit.coeffs['exponent']}\n"
    _emit(cfg, body)


def cmd_eisenstein(cfg: ExperimentConfig) -> None:
    from .eisenstein import (ClassGroupData, class_transform,
                             dedekind_zeta_h1, E_partial, Estar_partial)
    ztext = cfg.extra.get("z", "0,1")
    x, y = (float(t) for t in ztext.split(","))
    z = complex(x, y)
    svals = parse_float_list(cfg.s or "2", "s")
    class_file = cfg.extra.get("class_data")
    lines = []
    for s in svals:
        e = E_partial(z, s, cfg.cutoff)
        estar = Estar_partial(z, s, cfg.cutoff)
        rec = {"z": [x, y], "s": s, "E": e.value, "E_tail": e.tail,
               "Estar": estar.value, "Estar_tail": estar.tail,
               "cutoff": cfg.cutoff}
        if class_file:
            with open(class_file) as fh:
                payload = json.load(fh)
            data = ClassGroupData(
                h=payload["h"], labels=payload["labels"],
                characters=np.array(payload["characters"], dtype=complex),
                zeta_values=_zeta_from_payload(payload))
            vec = np.full(data.h, e.value, dtype=complex)
            rec["Estar_from_classes"] = [float(v.real)
                                         for v in class_transform(vec, s, data)]
        lines.append(json.dumps(rec))
    _emit(cfg, "\n".join(lines) + "\n")


def _zeta_from_payload(payload):
    table = payload.get("zeta_table")
    if table:
        def zeta_values(s, i):
            key = f"{s:.6f}"
            return complex(table[key][i])
        return zeta_values
    from .eisenstein import dedekind_zeta_h1
    zk = dedekind_zeta_h1(payload.get("field", "rational"),
                          payload.get("d"))
    return lambda s, i: zk(s)


def cmd_decompose(cfg: ExperimentConfig) -> None:
    from .group_kit import kau_decompose, khu_decompose, GroupElement
    mat_text = cfg.extra.get("matrix")
    if not mat_text:
        raise ConfigInvalid("decompose needs matrix=a,b,c,d")
    vals = [float(t) for t in mat_text.split(",")]
    if len(vals) != 4:
        raise ConfigInvalid("matrix must have 4 entries")
    m = np.array(vals).reshape(2, 2)
    mode = cfg.extra.get("mode", "kau")
    sign = cfg.extra.get("sign", "+")
    if mode == "kau":
        res = kau_decompose(m, sign)
        err = float(np.max(np.abs(res.reconstruct() - m)))
        body = json.dumps({"mode": "kau", "k": res.k.tolist(),
                           "lambda": res.lam, "r": res.r, "sign": sign,
                           "reconstruction_error": err})
    elif mode == "khu":
        g = GroupElement([m], 1, 0)
        res = khu_decompose(g, sign)
        err = res.reconstruct().max_abs_diff(g)
        body = json.dumps({"mode": "khu", "b": res.b.mats[0].tolist(),
                           "s": res.s, "h1": res.h1.mats[0].tolist(),
                           "u": res.u.mats[0].tolist(),
                           "reconstruction_error": err})
    else:
        raise ConfigInvalid(f"unknown mode {mode!r}")
    _emit(cfg, body + "\n")


COMMANDS = {
    "count": cmd_count,
    "fit": cmd_fit,
    "torus": cmd_torus,
    "volume": cmd_volume,
    "zeta": cmd_zeta,
    "equidist": cmd_equidist,
    "eisenstein": cmd_eisenstein,
    "decompose": cmd_decompose,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="orbitlab",
        description="orbit counting and equidistribution experiments")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--field")
    p.add_argument("--form")
    p.add_argument("--m")
    p.add_argument("--norm")
    p.add_argument("--T")
    p.add_argument("--tau")
    p.add_argument("--s")
    p.add_argument("--direction")
    p.add_argument("--cutoff", type=float)
    p.add_argument("--eps0", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.add_argument("--set", action="append", default=[],
                   metavar="KEY=VALUE", help="extra config entries")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "set") and v is not None}
    try:
        cfg = load_config(args.config, overrides)
        for item in args.set:
            if "=" not in item:
                raise ConfigInvalid(f"bad --set item {item!r}")
            key, val = item.split("=", 1)
            cfg.extra[key] = val
        cfg.command = args.command
        np.random.seed(cfg.seed % (2 ** 32))
        COMMANDS[args.command](cfg)
        return 0
    except errors.OrbitLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
