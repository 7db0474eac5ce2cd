"""Command line front end.

Subcommands:
    profile   construct a profile and sample it (CSV) with a JSON sidecar
    verify    residual-sweep a profile against a synthesized structure,
              plus reduced-ODE, fresh-integration and substitution checks
    series    run the affine-coefficient recurrence
    prolong   solve the single-time damped wave equation and check its
              prolongation to the multitime equation
    decay     follow a profile along a ray in multitime

--out names a directory; each command writes <command>.json / <command>.csv
there per --format (default: both).  Without --out the payload goes to
stdout (default format: json; "both" needs --out).  Status lines go to
stderr.  Floats are printed with 17 significant digits, JSON keys are
sorted, lines end with \n, so repeated runs are byte-identical.

Exit codes: 0 success / verified, 1 verification failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .closed_form import (
    soliton_arccosh,
    soliton_arcsin,
    soliton_arcsinh,
    soliton_quadrature,
    vdp_explicit,
    vdp_implicit,
    with_speed,
)
from .coefficients import (
    SpeedVector,
    Variant,
    constant_coeffs,
    general_coeffs,
    prolongation_structure,
    synthesize_structure,
)
from .errors import BlowUp, ConditionViolated, MrayleighError, StiffnessFailure
from .geometry import GridSpec, check_prolongation, stationary_solution
from .oracle import (
    bernoulli_chain_check,
    decay_check,
    integrate_reduction,
    integrate_single_time_rayleigh,
    reduction_ode_residual,
    residual_sweep,
)
from .series import AffineCoeffs, series_coefficients, series_coefficients_triple_sum, series_soliton

GUARD_BAND = 0.1

_PROFILE_FAMILIES = ["quadrature", "arccosh", "arcsinh", "arcsin",
                     "vdp-implicit", "vdp-explicit", "series"]


def fmt17(v) -> str:
    return format(float(v), ".17g")


def dumps(obj) -> str:
    """JSON with sorted keys and .17g floats; non-finite floats become null."""
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return fmt17(v) if math.isfinite(v) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ",".join(json.dumps(str(k)) + ":" + dumps(obj[k])
                         for k in sorted(obj, key=str))
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) for v in row))
    return "\n".join(lines) + "\n"


def _emit(ns, json_obj, csv_payload):
    """Route payload per --format/--out.  csv_payload is (header, rows) or None."""
    fmt = ns.format or ("both" if ns.out else "json")
    if fmt in ("csv", "both") and csv_payload is None:
        raise ValueError(f"the {ns.cmd} subcommand emits json only")
    if fmt == "both" and not ns.out:
        raise ValueError("--format both requires --out")
    pieces = {}
    if fmt in ("json", "both"):
        pieces["json"] = dumps(json_obj) + "\n"
    if fmt in ("csv", "both"):
        pieces["csv"] = csv_text(*csv_payload)
    if ns.out:
        os.makedirs(ns.out, exist_ok=True)
        for ext, text in pieces.items():
            with open(os.path.join(ns.out, f"{ns.cmd}.{ext}"), "w", newline="") as f:
                f.write(text)
    else:
        sys.stdout.write(next(iter(pieces.values())))


def _status(ns, line: str):
    if not ns.quiet:
        print(line, file=sys.stderr)


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _coeff(text):
    """Coefficient value: a float, or the literal 'exp' meaning e^z."""
    if isinstance(text, (int, float)):
        return float(text)
    if str(text).strip() == "exp":
        return "exp"
    return float(text)


def _triple(text):
    """An axis triple lo:hi:count."""
    if isinstance(text, (list, tuple)):
        lo, hi, n = text
    else:
        parts = str(text).split(":")
        if len(parts) != 3:
            raise ValueError(f"axis must be lo:hi:count, got {text!r}")
        lo, hi, n = parts
    return (float(lo), float(hi), int(n))


_PROFILE_KEYS = dict(family="arcsinh", a=1.0, b=1.0, c=1.0, d=3.0, K=1.0,
                     r=0.0, sigma=1.0, k1=0.0, phi0=None, z0=0.0,
                     square_relation="reciprocal", lam=None,
                     coeffs=None, alpha0=0.0, alpha1=1.0, N=40,
                     zmin=None, zmax=None, n=201)

_COMMON_KEYS = dict(out=None, format=None, quiet=False, tol=1e-6)

# per-subcommand defaults; config keys must come from here
_DEFAULTS = {
    "profile": {**_PROFILE_KEYS, **_COMMON_KEYS},
    "verify": {**_PROFILE_KEYS, **_COMMON_KEYS,
               "m": 1, "grid": None, "oracle_tol": 1e-10},
    "series": {**_COMMON_KEYS, "coeffs": None, "alpha0": 0.0, "alpha1": 1.0,
               "N": 40, "method": "convolution"},
    "prolong": {**_COMMON_KEYS, "tol": None, "epsilon": 0.1, "m": 2,
                "t_final": 1.0, "amplitude": 0.1, "n_x": 256, "n_t": 101,
                "grid_x": 25, "grid_t": 17},
    "decay": {**_PROFILE_KEYS, **_COMMON_KEYS,
              "direction": None, "threshold": 1e-3, "horizon": 1e3, "x": 0.0},
}

_FAMILY_DOMAIN = {"quadrature": (-10.0, 10.0), "vdp-implicit": (-5.0, 5.0)}


def _add_common(p):
    p.add_argument("--config", help="JSON file with option values; flags win")
    p.add_argument("--out", help="output directory")
    p.add_argument("--tol", type=float, help="verdict tolerance")
    p.add_argument("--format", choices=["csv", "json", "both"],
                   help="payload selection (default: both with --out, else json)")
    p.add_argument("--quiet", action="store_true", default=None,
                   help="suppress the status line on stderr")


def _add_profile_params(p, families):
    p.add_argument("--family", choices=families)
    p.add_argument("--a", type=_coeff, help="coefficient of phi'' (or 'exp')")
    p.add_argument("--b", type=float, help="coefficient of phi'^3")
    p.add_argument("--c", type=_coeff, help="coefficient of phi' (or 'exp')")
    p.add_argument("--d", type=_coeff, help="coefficient of phi^2 phi' (or 'exp')")
    p.add_argument("--K", type=float, help="integration constant")
    p.add_argument("--r", type=float, help="additive constant (arc families)")
    p.add_argument("--sigma", type=float, choices=[-1.0, 1.0],
                   help="sign choice (arc families)")
    p.add_argument("--k1", type=float, help="constant root (vdp-implicit)")
    p.add_argument("--phi0", type=float, help="value at z0 (vdp-implicit)")
    p.add_argument("--z0", type=float, help="anchor point")
    p.add_argument("--square-relation", dest="square_relation",
                   choices=["reciprocal", "direct"],
                   help="vdp-implicit k1=0 relation (direct is the known-bad form)")
    p.add_argument("--lam", type=_floats, metavar="L1,L2,...",
                   help="speed vector components")
    p.add_argument("--coeffs", type=_floats, metavar="M,P,Q,A,B,C",
                   help="series family: affine slopes then constants")
    p.add_argument("--alpha0", type=float, help="series family: phi(0)")
    p.add_argument("--alpha1", type=float, help="series family: phi'(0)")
    p.add_argument("--N", type=int, help="series family: truncation order")
    p.add_argument("--zmin", type=float, help="left end of the working window")
    p.add_argument("--zmax", type=float, help="right end of the working window")
    p.add_argument("--n", type=int, help="number of samples / check points")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mrayleigh", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.set_defaults(cmd=None)
    sub = ap.add_subparsers(dest="cmd")

    p = sub.add_parser("profile", help="construct and sample a profile")
    _add_common(p)
    _add_profile_params(p, _PROFILE_FAMILIES)

    p = sub.add_parser("verify", help="check a profile several independent ways")
    _add_common(p)
    _add_profile_params(p, _PROFILE_FAMILIES + ["stationary"])
    p.add_argument("--m", type=int, help="number of multitime dimensions")
    p.add_argument("--grid", action="append", type=_triple, metavar="LO:HI:N",
                   help="axis triple, repeat m+1 times (x first, then t axes)")
    p.add_argument("--oracle-tol", dest="oracle_tol", type=float,
                   help="tolerance handed to the fresh integration")

    p = sub.add_parser("series", help="affine-coefficient recurrence")
    _add_common(p)
    p.add_argument("--coeffs", type=_floats, metavar="M,P,Q,A,B,C",
                   help="three slopes then three constants")
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--N", type=int, help="truncation order")
    p.add_argument("--method", choices=["convolution", "triple"])

    p = sub.add_parser("prolong", help="single-time solve plus multitime check")
    _add_common(p)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--m", type=int, help="number of multitime dimensions")
    p.add_argument("--t-final", dest="t_final", type=float)
    p.add_argument("--amplitude", type=float, help="u(x,0) = amplitude sin x")
    p.add_argument("--n-x", dest="n_x", type=int, help="spatial modes")
    p.add_argument("--n-t", dest="n_t", type=int, help="stored time slices")
    p.add_argument("--grid-x", dest="grid_x", type=int, help="check grid, x count")
    p.add_argument("--grid-t", dest="grid_t", type=int, help="check grid, t1 count")

    p = sub.add_parser("decay", help="threshold crossing along a multitime ray")
    _add_common(p)
    _add_profile_params(p, _PROFILE_FAMILIES)
    p.add_argument("--direction", type=_floats, metavar="D1,D2,...")
    p.add_argument("--threshold", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--x", type=float, help="spatial point")

    return ap


def _merge_config(ns) -> argparse.Namespace:
    """config file < command line flags; unknown config keys are an error."""
    defaults = dict(_DEFAULTS[ns.cmd])
    merged = dict(defaults)
    if ns.config:
        with open(ns.config) as f:
            cfg = json.load(f)
        if not isinstance(cfg, dict):
            raise ValueError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        for key, val in cfg.items():
            if key in ("lam", "coeffs", "direction"):
                val = _floats(val) if val is not None else None
            elif key == "grid":
                val = [_triple(t) for t in val] if val is not None else None
            elif key in ("a", "c", "d"):
                val = _coeff(val)
            merged[key] = val
    for key in defaults:
        given = getattr(ns, key, None)
        if given is not None:
            merged[key] = given
    out = argparse.Namespace(**merged)
    out.cmd = ns.cmd
    return out


def _as_fn(v):
    return (lambda z: math.exp(z)) if v == "exp" else None


def _reduced(ns, names):
    """ReducedCoeffs from flag values; 'exp' switches to the general tier."""
    vals = {k: getattr(ns, k) for k in names}
    if any(v == "exp" for v in vals.values()):
        fns = {k: _as_fn(v) or (lambda z, vv=float(v): vv) for k, v in vals.items()}
        return general_coeffs(fns["a"], fns["c"],
                              b=fns.get("b"), d=fns.get("d"))
    return constant_coeffs(float(vals["a"]), float(vals["c"]),
                           b=vals.get("b") and float(vals["b"]),
                           d=vals.get("d") and float(vals["d"]))


def _require_numbers(ns, names):
    for k in names:
        if getattr(ns, k) == "exp":
            raise ValueError(f"--{k} must be a number for family {ns.family}")


def _build_profile(ns):
    lam = SpeedVector(np.asarray(ns.lam, dtype=float)) if ns.lam else None
    fam = ns.family
    if fam in ("arccosh", "arcsinh", "arcsin"):
        _require_numbers(ns, ("a", "c"))
        builder = {"arccosh": soliton_arccosh, "arcsinh": soliton_arcsinh,
                   "arcsin": soliton_arcsin}[fam]
        return builder(ns.a, ns.b, ns.c, ns.K, r=ns.r, sigma=ns.sigma, lam=lam)
    if fam == "quadrature":
        dom = _window_or(ns, _FAMILY_DOMAIN[fam])
        return soliton_quadrature(_reduced(ns, ("a", "b", "c")), ns.K,
                                  z0=ns.z0, domain=dom, lam=lam)
    if fam == "vdp-implicit":
        dom = _window_or(ns, _FAMILY_DOMAIN[fam])
        return vdp_implicit(_reduced(ns, ("a", "c", "d")), ns.k1,
                            z0=ns.z0, phi0=ns.phi0, domain=dom,
                            square_relation=ns.square_relation, lam=lam)
    if fam == "vdp-explicit":
        _require_numbers(ns, ("a", "c", "d"))
        return vdp_explicit(ns.a, ns.c, ns.d, ns.K, lam=lam)
    if fam == "series":
        if not ns.coeffs:
            raise ValueError("family series needs --coeffs M,P,Q,A,B,C")
        sol = series_coefficients(AffineCoeffs.from_sextuple(ns.coeffs),
                                  ns.alpha0, ns.alpha1, ns.N)
        return series_soliton(sol, lam)
    raise ValueError(f"unknown family {fam!r}")


def _window_or(ns, fallback):
    lo = ns.zmin if ns.zmin is not None else fallback[0]
    hi = ns.zmax if ns.zmax is not None else fallback[1]
    return (float(lo), float(hi))


def _sample_window(profile, ns):
    """Finite z-interval to sample on, kept a guard band inside any finite
    domain endpoint (derivatives are probed by small steps that must stay
    inside, and arc-family derivatives are singular at the edge)."""
    lo = ns.zmin if ns.zmin is not None else max(profile.domain.lo, -10.0)
    hi = ns.zmax if ns.zmax is not None else min(profile.domain.hi, 10.0)
    dlo, dhi = profile.domain.lo, profile.domain.hi
    guard = GUARD_BAND
    if math.isfinite(dlo) and math.isfinite(dhi):
        guard = min(GUARD_BAND, 0.05 * (dhi - dlo))
    if math.isfinite(dlo):
        lo = max(lo, dlo + guard)
    if math.isfinite(dhi):
        hi = min(hi, dhi - guard)
    if not lo < hi:
        raise ValueError(f"empty sampling window [{lo}, {hi}]")
    return float(lo), float(hi)


def _cmd_profile(ns) -> int:
    prof = _build_profile(ns)
    lo, hi = _sample_window(prof, ns)
    zs = np.linspace(lo, hi, ns.n)
    z, phi, dphi = prof.sample(zs, skip_out_of_domain=True)
    obj = prof.to_json_dict()
    obj["window"] = [lo, hi]
    obj["n"] = int(len(z))
    rows = [[zi, pi, di] for zi, pi, di in zip(z, phi, dphi)]
    _emit(ns, obj, (["z", "phi", "phi_prime"], rows))
    _status(ns, f"{prof.family.value}: {len(z)} samples on [{fmt17(lo)}, {fmt17(hi)}]")
    return 0


def _default_grid(ns, lo, hi):
    axes = [(lo, hi, 9)] + [(0.0, 1.0, 5)] * ns.m
    return GridSpec(axes[0], axes[1:])


def _cmd_verify(ns) -> int:
    if ns.family == "stationary":
        field = stationary_solution(float(ns.a), float(ns.b))
        lam = SpeedVector(np.ones(ns.m))
        structure = synthesize_structure(constant_coeffs(1.0, 1.0, b=1.0),
                                         ns.m, lam)
        grid = (GridSpec(ns.grid[0], ns.grid[1:]) if ns.grid
                else _default_grid(ns, -5.0, 5.0))
        rep = residual_sweep(field, structure, grid)
        verified = rep.max_abs <= ns.tol
        obj = {"family": "stationary", "report": rep.to_json_dict(),
               "tol": float(ns.tol), "verified": verified}
        _emit(ns, obj, (rep.csv_header(), list(rep.csv_rows())))
        _status(ns, f"{'verified' if verified else 'FAILED'}: max residual "
                    f"{fmt17(rep.max_abs)} against tol {fmt17(ns.tol)}")
        return 0 if verified else 1

    prof = _build_profile(ns)
    lam = (SpeedVector(np.asarray(ns.lam, dtype=float)) if ns.lam
           else SpeedVector(np.ones(ns.m)))
    if lam.m != ns.m:
        raise ValueError("--lam length must equal --m")
    prof = with_speed(prof, lam)
    lo, hi = _sample_window(prof, ns)
    zs = np.linspace(lo, hi, ns.n)

    rep_an = reduction_ode_residual(prof.coeffs, prof, zs, "analytic")
    rep_fd = reduction_ode_residual(prof.coeffs, prof, zs, "fd")
    mid = 0.5 * (lo + hi)
    oracle_note = None
    try:
        ivp = integrate_reduction(prof.coeffs, prof.phi(mid), prof.phi_prime(mid),
                                  span=(lo, hi), z0=mid, tol=ns.oracle_tol)
        oracle_dev = float(max(abs(prof.phi(z) - ivp.phi(z)) for z in zs))
    except (BlowUp, StiffnessFailure) as e:
        # the true solution through this data does not stay on the profile;
        # that is a failed verification, not bad input
        oracle_dev = math.inf
        oracle_note = str(e)
    chain_ok = True
    if prof.coeffs.variant is Variant.RAYLEIGH:
        # xi = phi'^-2 squares away small phi', so an absolute tolerance is
        # only meaningful where phi' is not tiny
        chain_zs = [z for z in zs if abs(prof.phi_prime(z)) >= 0.05]
        chain_ok = bernoulli_chain_check(prof.coeffs, prof, chain_zs, tol=ns.tol)

    structure = synthesize_structure(prof.coeffs, ns.m, lam)
    grid = (GridSpec(ns.grid[0], ns.grid[1:]) if ns.grid
            else _default_grid(ns, lo, hi))
    sweep = residual_sweep(prof, structure, grid, skip_out_of_domain=True)

    verified = (sweep.max_abs <= ns.tol and rep_fd.max_abs <= ns.tol
                and rep_an.max_abs <= ns.tol and oracle_dev <= ns.tol
                and chain_ok)
    obj = {
        "family": prof.family.value,
        "window": [lo, hi],
        "n": int(ns.n),
        "m": int(ns.m),
        "checks": {
            "ode_analytic_max": rep_an.max_abs,
            "ode_fd_max": rep_fd.max_abs,
            "oracle_max_dev": oracle_dev,
            "chain_ok": chain_ok,
            "sweep_max": sweep.max_abs,
        } | ({"oracle_note": oracle_note} if oracle_note else {}),
        "report": sweep.to_json_dict(),
        "tol": float(ns.tol),
        "verified": verified,
    }
    _emit(ns, obj, (sweep.csv_header(), list(sweep.csv_rows())))
    worst = max(sweep.max_abs, rep_an.max_abs, rep_fd.max_abs, oracle_dev)
    _status(ns, f"{'verified' if verified else 'FAILED'}: worst deviation "
                f"{fmt17(worst)} against tol {fmt17(ns.tol)}, chain "
                f"{'ok' if chain_ok else 'failed'}")
    return 0 if verified else 1


def _cmd_series(ns) -> int:
    if not ns.coeffs:
        raise ValueError("series needs --coeffs M,P,Q,A,B,C")
    ac = AffineCoeffs.from_sextuple(ns.coeffs)
    runner = (series_coefficients if ns.method == "convolution"
              else series_coefficients_triple_sum)
    sol = runner(ac, ns.alpha0, ns.alpha1, ns.N)
    rows = [[n, v] for n, v in enumerate(sol.alpha)]
    _emit(ns, sol.to_json_dict(), (["n", "alpha_n"], rows))
    _status(ns, f"{sol.n_terms + 1} coefficients, radius estimate "
                f"{fmt17(sol.radius_estimate)}")
    return 0


def _cmd_prolong(ns) -> int:
    sol = integrate_single_time_rayleigh(ns.epsilon,
                                         lambda x: ns.amplitude * math.sin(x),
                                         lambda x: 0.0, ns.t_final,
                                         n_x=ns.n_x, n_t=ns.n_t)
    tau_r = sol.residual_estimate()
    tol = ns.tol if ns.tol is not None else 10.0 * max(tau_r, 1e-12)
    structure = prolongation_structure(ns.m, ns.epsilon)
    margin = 0.01 * ns.t_final
    grid = GridSpec((0.0, 2.0 * math.pi, ns.grid_x),
                    [(margin, ns.t_final - margin, ns.grid_t)]
                    + [(0.0, 1.0, 1)] * (ns.m - 1))
    rep = check_prolongation(sol.as_field(), structure, grid=grid)
    verified = rep.max_abs <= tol
    obj = {
        "epsilon": float(ns.epsilon),
        "m": int(ns.m),
        "t_final": float(ns.t_final),
        "tau_r": tau_r,
        "max_abs": rep.max_abs,
        "rms": rep.rms,
        "tol": float(tol),
        "verified": verified,
    }
    _emit(ns, obj, (rep.csv_header(), list(rep.csv_rows())))
    _status(ns, f"{'verified' if verified else 'FAILED'}: max residual "
                f"{fmt17(rep.max_abs)} against tol {fmt17(tol)} "
                f"(single-time floor {fmt17(tau_r)})")
    return 0 if verified else 1


def _cmd_decay(ns) -> int:
    prof = _build_profile(ns)
    if not ns.direction:
        raise ValueError("decay needs --direction D1,D2,...")
    if ns.lam is None:
        prof = with_speed(prof, SpeedVector(np.ones(len(ns.direction))))
    res = decay_check(prof, ns.direction, threshold=ns.threshold,
                      horizon=ns.horizon, x=ns.x)
    _emit(ns, res.to_json_dict(), None)
    if res.ok:
        _status(ns, f"decays: |phi| stays under {fmt17(ns.threshold)} past "
                    f"radius {fmt17(res.crossing_radius)}")
    else:
        _status(ns, f"no decay: final sample {fmt17(res.final_value)} "
                    f"against threshold {fmt17(ns.threshold)}")
    return 0 if res.ok else 1


_RUNNERS = {
    "profile": _cmd_profile,
    "verify": _cmd_verify,
    "series": _cmd_series,
    "prolong": _cmd_prolong,
    "decay": _cmd_decay,
}


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    if ns.cmd is None:
        ap.print_usage(sys.stderr)
        return 2
    try:
        merged = _merge_config(ns)
        return _RUNNERS[ns.cmd](merged)
    except ConditionViolated as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return 1
    except (MrayleighError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
