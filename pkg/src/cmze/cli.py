"""Command-line entry point: polynomials, trees, ladders, verification, runs.

TOML drives the simulation commands, CSV carries trajectories, JSON carries
symbolic objects.  Exit codes: 0 success, 1 numeric runtime failure (blow-up,
singular systems), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import families, trees, wordeq, words
from .numerics import (
    BlowupError,
    KernelExpansion,
    MCTParams,
    Trajectory,
    kernel_from_resummation,
    solve_given_kernel,
    solve_matrix_cmze,
    solve_mct,
    solve_scalar_cmze,
)

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class ConfigError(Exception):
    """Configuration problems are treated as usage errors (exit 2)."""


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _load_config(path: str, allowed: dict) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(p, "rb") as fh:
        try:
            cfg = tomllib.load(fh)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"cannot parse {path}: {e}")
    unknown = set(cfg) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    missing = {k for k, required in allowed.items() if required and k not in cfg}
    if missing:
        raise ConfigError(f"missing config keys: {sorted(missing)}")
    return cfg


def _as_complex(v):
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(
        isinstance(x, (int, float)) for x in v
    ):
        return complex(v[0], v[1])
    raise ConfigError(f"expected a number or [re, im] pair, got {v!r}")


def _as_matrix(v) -> np.ndarray:
    try:
        return np.array([[_as_complex(x) for x in row] for row in v], dtype=complex)
    except (TypeError, ConfigError):
        raise ConfigError(f"expected a matrix of numbers or [re, im] pairs")


def _write_csv(path: str, tr: Trajectory) -> None:
    vals = tr.values
    with open(path, "w") as fh:
        if vals.ndim == 1:
            fh.write("t,re,im\n")
            for k, v in enumerate(vals):
                fh.write(f"{k * tr.h:.17g},{v.real:.17g},{v.imag:.17g}\n")
        else:
            r = vals.shape[1]
            cols = [f"{p}_{i}{j}" for i in range(r) for j in range(r) for p in ("re", "im")]
            fh.write("t," + ",".join(cols) + "\n")
            for k in range(len(vals)):
                row = [f"{k * tr.h:.17g}"]
                for i in range(r):
                    for j in range(r):
                        row.append(f"{vals[k, i, j].real:.17g}")
                        row.append(f"{vals[k, i, j].imag:.17g}")
                fh.write(",".join(row) + "\n")


def _render_cpoly(p: families.CPoly, symbol: str) -> str:
    if not p:
        return "0"
    chunks = []
    for mono in sorted(p, key=lambda m: (sum(m), len(m), m)):
        c = p[mono]
        sign = "+" if c > 0 else "-"
        mag = abs(c)
        coeff = f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        body = ""
        for idx in sorted(set(mono)):
            e = mono.count(idx)
            body += f"{symbol}{idx}" + (f"^{e}" if e > 1 else "")
        chunks.append(f"{sign}{coeff}" + (f"·{body}" if body else ""))
    return " ".join(chunks)


def _cpoly_json(p: families.CPoly) -> list:
    return [
        {"monomial": list(m), "coeff": [c.numerator, c.denominator]}
        for m, c in sorted(p.items())
    ]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_poly(args) -> int:
    n, k = args.n, args.k
    if args.family == "bell":
        p = families.bell_commutative(n) if k < 0 else families.bell_partial_commutative(n, k)
        print(_render_cpoly(p, "x") if args.format == "text" else json.dumps(_cpoly_json(p)))
        return 0
    if args.family == "cbipart":
        p = (
            families.bipartition_commutative(n)
            if k < 0
            else families.bipartition_partial_commutative(n, k)
        )
        print(_render_cpoly(p, "b") if args.format == "text" else json.dumps(_cpoly_json(p)))
        return 0
    alphabet = "b" if args.family == "bipart" else "a"
    p = families.family_polynomial(args.family, n, k, alphabet=alphabet)
    if args.format == "text":
        print(p.render())
    else:
        print(words.poly_to_json(p, [alphabet]))
    return 0


def _cmd_trees(args) -> int:
    if args.family == "fsolution":
        sol = trees.tree_solution_F(args.n)
        forest = sol[args.n]
        items = sorted(
            ((trees.render_stack(s), w) for s, w in forest.items())
        )
    else:
        forest = trees.forest_family(args.family, args.n)
        items = sorted(((trees.render_tree(t), w) for t, w in forest.items()))
    if args.format == "ascii":
        for key, w in items:
            sign = "+" if w > 0 else "-"
            mag = abs(w)
            c = f"{mag.numerator}" if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
            print(f"{sign}{c}·{key}")
    else:
        print(
            json.dumps(
                [
                    {"tree": key, "weight": [w.numerator, w.denominator]}
                    for key, w in items
                ]
            )
        )
    return 0


def _cmd_solve_words(args) -> int:
    problem = wordeq.WordEquationProblem(
        qb=args.qb, qa=args.qa, m=args.m, case=args.case, order=args.order
    )
    ladder = wordeq.solve_words(problem)
    registry = [problem.qb_alphabet, problem.qa_alphabet]
    payload = [json.loads(words.poly_to_json(f, registry)) for f in ladder]
    print(json.dumps(payload))
    return 0


def _cmd_fk(args) -> int:
    ladder = wordeq.laurent_fk(args.order, skew=args.skew)
    if args.format == "text":
        for i, f in enumerate(ladder):
            print(f"f{i}: {f.render()}")
    else:
        print(json.dumps([f.to_jsonable() for f in ladder]))
    return 0


def _cmd_operator_f(args) -> int:
    ladder = wordeq.operator_F(args.order)
    if args.format == "text":
        for i, f in enumerate(ladder):
            print(f"F{i}: {f.render()}")
    else:
        print(json.dumps([json.loads(words.poly_to_json(f, ["m"])) for f in ladder]))
    return 0


def _cmd_td_fg(args) -> int:
    F, G = wordeq.time_dependent_FG(args.order)
    registry = ["QL", "PB", "Ls", "Lt"]
    if args.format == "text":
        for i, f in enumerate(F):
            print(f"F{i}(s): {f.render()}")
        for i, g in enumerate(G):
            print(f"G{i}(t): {g.render()}")
    else:
        payload = {
            "F": [json.loads(words.poly_to_json(f, registry)) for f in F],
            "G": [json.loads(words.poly_to_json(g, registry)) for g in G],
        }
        print(json.dumps(payload))
    return 0


def _cmd_knm(args) -> int:
    table = wordeq.knm_scalar(args.n, args.m)
    print(wordeq.render_knm(table))
    return 0


def _cmd_verify(args) -> int:
    from . import oplab

    sys_ = oplab.random_system(args.dim, args.rank, args.seed, skew=args.check == "skew",
                               unit_scale=True)
    out = {"check": args.check, "dim": args.dim, "rank": args.rank, "seed": args.seed}
    if args.check == "bipart":
        res = [oplab.verify_bipartition_identity(sys_, n) for n in range(1, args.order + 1)]
        out["residuals"] = res
        out["max"] = max(res)
        ok = out["max"] < 1e-10
    elif args.check == "kernel":
        ladder = wordeq.operator_F(args.order)
        devs, slopes = [], []
        for N in range(args.order + 1):
            dev, slope = oplab.verify_kernel_expansion(sys_, ladder, N, 0.3)
            devs.append(dev)
            slopes.append(slope)
        out["deviations"] = devs
        out["slopes"] = slopes
        ok = all(s >= n + 1 - 0.3 for n, s in enumerate(slopes))
    elif args.check == "dyson":
        r = oplab.dyson_split_residual(sys_, 0.5, 1e-3)
        out["residual"] = r
        ok = r < 1e-8
    elif args.check == "skew":
        gam = oplab.scalar_gammas(sys_, 2 * args.order + 2) if args.rank == 1 else None
        if gam is None:
            raise ConfigError("skew check requires rank 1")
        evens = [abs(gam[2 * j]) for j in range(args.order + 1)]
        out["even_moments"] = evens
        ok = max(evens) < 1e-10
    else:  # pragma: no cover
        raise ConfigError(f"unknown check {args.check}")
    out["pass"] = bool(ok)
    print(json.dumps(out))
    return 0 if ok else 1


_SIM_KEYS = {
    "omega": False,
    "coefficients": False,
    "c0": False,
    "h": True,
    "steps": True,
    "resummation": False,
    "pade": False,
    "basis": False,
    "kernel": False,
    "omega0_sq": False,
    "omega2_sq": False,
    "q": False,
    "S": False,
    "N": False,
    "m": False,
    "kBT": False,
}


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config, _SIM_KEYS)
    h = float(cfg["h"])
    steps = int(cfg["steps"])
    if args.model == "scalar":
        coeffs = [_as_complex(c) for c in cfg.get("coefficients", [])]
        omega = _as_complex(cfg.get("omega", 0.0))
        mode = cfg.get("resummation", "power_series")
        if mode == "power_series":
            kern = KernelExpansion(mode="power_series", omega=omega, coefficients=coeffs)
        else:
            fr = [Fraction(c.real).limit_denominator(10**12) for c in coeffs]
            if mode == "pade":
                pm, pn = cfg.get("pade", [len(coeffs) - 1, 0])
                ev = kernel_from_resummation(fr, "pade", pm, pn)
            elif mode == "orthogonal":
                ev = kernel_from_resummation(fr, "orthogonal", basis=cfg.get("basis", "chebyshev"))
            else:
                raise ConfigError(f"unknown resummation {mode!r}")
            kern = KernelExpansion(mode=mode, omega=omega, evaluator=ev)
        tr = solve_scalar_cmze(kern, h, steps)
    elif args.model == "matrix":
        omega = _as_matrix(cfg["omega"])
        coeffs = [_as_matrix(c) for c in cfg["coefficients"]]
        kern = KernelExpansion(
            mode="power_series", omega=omega, coefficients=coeffs,
            c0=np.eye(omega.shape[0], dtype=complex),
        )
        tr = solve_matrix_cmze(kern, h, steps)
    elif args.model == "given-kernel":
        omega = _as_complex(cfg.get("omega", 0.0))
        samples = np.array([_as_complex(v) for v in cfg["kernel"]])
        tr = solve_given_kernel(omega, samples, h, steps)
    elif args.model == "mct":
        params = MCTParams(
            q=float(cfg["q"]), S=float(cfg["S"]), N=float(cfg["N"]),
            m=float(cfg["m"]), kBT=float(cfg["kBT"]),
        )
        tr = solve_mct(float(cfg["omega0_sq"]), float(cfg["omega2_sq"]), params, h, steps)
    else:  # pragma: no cover
        raise ConfigError(f"unknown model {args.model}")
    _write_csv(args.out, tr)
    return 0


_HUBBARD_KEYS = {
    "sites": True,
    "eps0": False,
    "mu": False,
    "hop": False,
    "U": False,
    "beta": False,
    "boundary": False,
    "densities": False,
    "h": False,
    "steps": False,
    "order": False,
    "moments": False,
}


def _hubbard_params(cfg):
    from .apps.hubbard import HubbardParams

    return HubbardParams(
        sites=int(cfg["sites"]),
        eps0=float(cfg.get("eps0", 0.0)),
        mu=float(cfg.get("mu", 0.0)),
        hop=float(cfg.get("hop", 1.0)),
        U=float(cfg.get("U", 0.0)),
        beta=float(cfg.get("beta", 1.0)),
        boundary=cfg.get("boundary", "periodic"),
        densities=cfg.get("densities"),
    )


def _cmd_hubbard(args) -> int:
    from .apps import hubbard as hub

    cfg = _load_config(args.config, _HUBBARD_KEYS)
    p = _hubbard_params(cfg)
    if args.action == "coeffs":
        omega, ds = hub.hubbard_frequency_and_moments(p, int(cfg.get("order", 3)))
        payload = {
            "omega": _mat_json(omega),
            "moments": [_mat_json(d) for d in ds],
        }
        try:
            om, f0, f1 = hub.hubbard_scalar_coeffs(p)
            payload["scalar"] = {"omega": om, "f0": [f0.real, f0.imag], "f1": [f1.real, f1.imag]}
        except ValueError:
            pass
        print(json.dumps(payload))
        return 0
    h = float(cfg.get("h", 0.001))
    steps = int(cfg.get("steps", 200))
    if args.action == "ed":
        oracle = hub.EDOracle(p)
        tr = Trajectory(h, oracle.correlation(h, steps))
    elif args.action == "matrix-cmze":
        if cfg.get("moments", "formula") == "ed":
            ds = hub.EDOracle(p).moments(3)
        else:
            _, ds = hub.hubbard_frequency_and_moments(p, 3)
        om0, om1 = hub.hubbard_omega01(p, moments_=ds)
        kern = KernelExpansion(
            mode="power_series", omega=ds[0], coefficients=[om0, om1],
            c0=np.eye(p.sites, dtype=complex),
        )
        tr = solve_matrix_cmze(kern, h, steps)
    elif args.action == "kbe":
        tr = hub.kbe_second_born(p, h, steps)
    else:  # pragma: no cover
        raise ConfigError(f"unknown hubbard action {args.action}")
    _write_csv(args.out, tr)
    return 0


def _mat_json(m: np.ndarray) -> list:
    return [[[x.real, x.imag] for x in row] for row in m]


_GLE_KEYS = {
    "mass": True,
    "friction": True,
    "beta": True,
    "d2V": False,
    "d3V": False,
    "dV_d2V": False,
    "h": False,
    "steps": False,
    "order": False,
}


def _cmd_gle(args) -> int:
    from .apps.langevin import GLEInputs, langevin_coeffs

    cfg = _load_config(args.config, _GLE_KEYS)
    g = GLEInputs(
        mass=float(cfg["mass"]),
        friction=float(cfg["friction"]),
        beta=float(cfg["beta"]),
        d2V=float(cfg.get("d2V", 0.0)),
        d3V=float(cfg.get("d3V", 0.0)),
        dV_d2V=float(cfg.get("dV_d2V", 0.0)),
    )
    omega, f0, f1, f2 = langevin_coeffs(g)
    print(json.dumps({"omega": omega, "f": [f0, f1, f2]}))
    if args.out:
        order = int(cfg.get("order", 2))
        kern = KernelExpansion(
            mode="power_series", omega=omega, coefficients=[f0, f1, f2][: order + 1]
        )
        tr = solve_scalar_cmze(kern, float(cfg.get("h", 1e-3)), int(cfg.get("steps", 1000)))
        _write_csv(args.out, tr)
    return 0


_MCT_KEYS = {
    "q": True,
    "S": True,
    "N": True,
    "m": True,
    "kBT": True,
    "jdot_sq": True,
    "jddot_sq": False,
    "h": False,
    "steps": False,
}


def _cmd_mct(args) -> int:
    from .apps.mct import MCTInputs, mct_coeffs

    cfg = _load_config(args.config, _MCT_KEYS)
    inp = MCTInputs(
        q=float(cfg["q"]), S=float(cfg["S"]), N=float(cfg["N"]),
        m=float(cfg["m"]), kBT=float(cfg["kBT"]),
        jdot_sq=float(cfg["jdot_sq"]), jddot_sq=float(cfg.get("jddot_sq", 0.0)),
    )
    w0, w2, iom = mct_coeffs(inp)
    print(json.dumps({"omega0_sq": w0, "omega2_sq": w2, "i_omega": _mat_json(iom)}))
    if args.out:
        params = MCTParams(q=inp.q, S=inp.S, N=inp.N, m=inp.m, kBT=inp.kBT)
        tr = solve_mct(w0, w2, params, float(cfg.get("h", 1e-3)), int(cfg.get("steps", 1000)))
        _write_csv(args.out, tr)
    return 0


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cmze",
        description="combinatorial memory-kernel toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    q = sub.add_parser("poly", help="print one polynomial family member")
    q.add_argument("--family", required=True,
                   choices=["bell", "ncbell1", "ncbell2", "bipart", "cbipart"])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, default=-1)
    q.add_argument("--format", choices=["text", "json"], default="text")
    q.set_defaults(fn=_cmd_poly)

    q = sub.add_parser("trees", help="print a tree family forest")
    q.add_argument("--family", required=True, choices=["type1", "type2", "bipart", "fsolution"])
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--format", choices=["ascii", "json"], default="ascii")
    q.set_defaults(fn=_cmd_trees)

    q = sub.add_parser("solve-words", help="solve the triangular word equation")
    q.add_argument("--case", type=int, choices=[1, 2], default=1)
    q.add_argument("--qb", required=True, choices=["bipart", "ncbell1", "ncbell2"])
    q.add_argument("--qa", required=True, choices=["bipart", "ncbell1", "ncbell2"])
    q.add_argument("--m", type=int, default=0)
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--format", choices=["json"], default="json")
    q.set_defaults(fn=_cmd_solve_words)

    q = sub.add_parser("fk", help="scalar Laurent kernel coefficients")
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--skew", action="store_true")
    q.add_argument("--format", choices=["text", "json"], default="text")
    q.set_defaults(fn=_cmd_fk)

    q = sub.add_parser("operator-f", help="operator kernel coefficient ladder")
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--format", choices=["text", "json"], default="text")
    q.set_defaults(fn=_cmd_operator_f)

    q = sub.add_parser("td-fg", help="time-dependent coefficient ladders")
    q.add_argument("--order", type=int, required=True)
    q.add_argument("--format", choices=["text", "json"], default="text")
    q.set_defaults(fn=_cmd_td_fg)

    q = sub.add_parser("knm", help="rank-1 scalar bracket coefficients")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)
    q.set_defaults(fn=_cmd_knm)

    q = sub.add_parser("verify", help="run a brute-force oracle check")
    q.add_argument("--check", required=True, choices=["bipart", "kernel", "dyson", "skew"])
    q.add_argument("--dim", type=int, default=8)
    q.add_argument("--rank", type=int, default=1)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--order", type=int, default=4)
    q.set_defaults(fn=_cmd_verify)

    q = sub.add_parser("simulate", help="integrate a memory equation from TOML")
    q.add_argument("--model", required=True, choices=["scalar", "matrix", "mct", "given-kernel"])
    q.add_argument("--config", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(fn=_cmd_simulate)

    q = sub.add_parser("hubbard", help="lattice-model front end")
    q.add_argument("action", choices=["coeffs", "matrix-cmze", "ed", "kbe"])
    q.add_argument("--config", required=True)
    q.add_argument("--out", default="hubbard.csv")
    q.set_defaults(fn=_cmd_hubbard)

    q = sub.add_parser("gle", help="tagged-particle kernel coefficients")
    q.add_argument("--config", required=True)
    q.add_argument("--out", default="")
    q.set_defaults(fn=_cmd_gle)

    q = sub.add_parser("mct", help="density-fluctuation memory equation")
    q.add_argument("--config", required=True)
    q.add_argument("--out", default="")
    q.set_defaults(fn=_cmd_mct)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        return _fail(str(e), 2)
    except BlowupError as e:
        return _fail(str(e), 1)
    except (ValueError, np.linalg.LinAlgError, words.WordAlgebraError) as e:
        return _fail(str(e), 1)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
