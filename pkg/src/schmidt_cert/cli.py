"""Command-line entry point.

Usage:
    schmidt-cert construct --kind mub --d 5 --m 6 [--out FILE]
    schmidt-cert certify (--in COUNTS | --example NAME) [--confidence 0.99] [--k K]
    schmidt-cert simulate --noise isotropic --kind mub --d 5 --m 3 --v 0.9 --shots 100000 --seed 1
    schmidt-cert thresholds --noise isotropic --kind mub --d 2,3,5 --m 2,3,d+1 [--format csv]
    schmidt-cert verify --kind mub --d 3 --m 2   |   schmidt-cert verify --in family.json

Exit codes: 0 success, 1 assertion or certification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import measurements as ms
from . import noise
from .errors import NoThresholdError
from .shots import (
    certify_from_counts,
    counts_from_dict,
    counts_to_dict,
    load_counts,
    sample_projections,
)
from .witness import (
    FamilyDescriptor,
    SPECTRAL_TOL,
    maximal_set_identity_check,
    verify_measurement,
    witness_value,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

BUNDLED = ("d97_two_mub", "d97_three_mub_hypothetical", "d97_full_mub_hypothetical", "d19_two_mub")


class InputError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _finite(x):
    return None if x is None or (isinstance(x, float) and not math.isfinite(x)) else x


def _load_fiducial(path):
    if path is None:
        return None
    raw = np.asarray(json.loads(Path(path).read_text()), dtype=float)
    return raw[..., 0] + 1j * raw[..., 1]


def _settings_arg(args):
    return args.m if args.kind == "mub" else args.n


def _measurement_from_args(args, validate=True):
    if getattr(args, "infile", None):
        return ms.load_measurement(args.infile, validate=validate)
    if args.kind is None or args.d is None:
        raise InputError("either --in or both --kind and --d are required")
    return ms.construct_measurement(
        args.kind, args.d, _settings_arg(args), args.variant, _load_fiducial(args.fiducial)
    )


def bundled_path(name: str):
    if name not in BUNDLED:
        raise InputError(f"unknown bundled example {name!r}; choose from {', '.join(BUNDLED)}")
    return resources.files("schmidt_cert").joinpath("data", f"{name}.json")


# -- commands ---------------------------------------------------------------


def cmd_construct(args) -> int:
    meas = _measurement_from_args(args)
    report = ms.validate_mub(meas) if meas.kind == "mub" else ms.validate_eam(meas, args.tol)
    if not report.passed:
        sys.stderr.write(_dump(report.to_dict()) + "\n")
        return EXIT_FAIL
    _emit(json.dumps(ms.measurement_to_dict(meas)), args.out)
    return EXIT_OK


def cmd_certify(args) -> int:
    if bool(args.infile) == bool(args.example):
        raise InputError("give exactly one of --in or --example")
    if args.example:
        data = counts_from_dict(json.loads(bundled_path(args.example).read_text()))
    else:
        data = load_counts(args.infile)
    if args.measurement:
        meas = ms.load_measurement(args.measurement)
        if FamilyDescriptor.of(meas) != data.descriptor:
            raise InputError(
                f"measurement file {FamilyDescriptor.of(meas)} does not match counts {data.descriptor}"
            )
    result = data.certify(args.confidence)
    payload = result.to_dict()
    payload["estimate"] = {k: _finite(v) for k, v in payload["estimate"].items()}
    _emit(_dump(payload), args.out)
    if args.k is not None and result.certificate.schmidt_lower_bound < args.k:
        return EXIT_FAIL
    return EXIT_OK


def cmd_simulate(args) -> int:
    variant = args.variant
    if args.kind == "eam" and args.noise == "dephasing" and variant == "standard" and not args.keep_variant:
        variant = "dephasing"
    meas = ms.construct_measurement(
        args.kind, args.d, _settings_arg(args), variant, _load_fiducial(args.fiducial)
    )
    spec = noise.NoiseSpec(args.noise, args.v, args.d)
    rho = noise.noisy_state(spec, meas)
    records = sample_projections(rho, meas, args.shots, args.seed)
    desc = FamilyDescriptor.of(meas)
    result = certify_from_counts(records, desc, args.confidence)
    if args.counts_out:
        Path(args.counts_out).write_text(json.dumps(counts_to_dict(desc, records)))
    payload = {
        "noise": {"kind": spec.kind, "visibility": spec.visibility, "dim_local": spec.dim_local},
        "measurement": {"kind": desc.kind, "settings": desc.settings_count, "variant": variant},
        "shots_per_setting": args.shots,
        "seed": args.seed,
        "exact_value": witness_value(rho, meas),
        **result.to_dict(),
    }
    _emit(_dump(payload), args.out)
    if args.k is not None and result.certificate.schmidt_lower_bound < args.k:
        return EXIT_FAIL
    return EXIT_OK


def _int_list(spec: str, d: int | None = None) -> list[int]:
    """Parse '2,3,d+1', '2:5' (inclusive) or expressions in d such as 'd^2'."""
    out = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        if ":" in token:
            lo, hi = token.split(":")
            out.extend(range(_eval_int(lo, d), _eval_int(hi, d) + 1))
        else:
            out.append(_eval_int(token, d))
    return out


_ALLOWED = (ast.Expression, ast.BinOp, ast.Constant, ast.Name, ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.Load)


def _eval_int(expr: str, d: int | None) -> int:
    expr = expr.strip().replace("^", "**")
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise InputError(f"cannot parse {expr!r}") from exc
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED) or (isinstance(node, ast.Name) and node.id != "d"):
            raise InputError(f"unsupported expression {expr!r}")
    if d is None and any(isinstance(n, ast.Name) for n in ast.walk(tree)):
        raise InputError(f"{expr!r} refers to d where no d is defined")
    return int(eval(compile(tree, "<range>", "eval"), {"__builtins__": {}}, {"d": d}))


def _closed_form(noise_kind, kind, s, d, k):
    if noise_kind == "isotropic":
        return noise.v_crit_mub_iso(s, d, k) if kind == "mub" else noise.v_crit_eam_iso(s, d, k)
    if noise_kind == "worst_case":
        return noise.v_crit_worst(kind, s, d, k)
    if noise_kind == "dephasing":
        if kind == "mub" and s == 2:
            return noise.v_crit_mub_dephase_pair(d, k)
        if kind == "eam" and s == d + 1:
            return noise.v_crit_eam_dephase(d, k, verify=False)
    if noise_kind == "unfaithful" and ((kind == "mub" and s == d + 1) or (kind == "eam" and s == d * d)):
        return k / d
    return None


def _reference(noise_kind, d, k):
    if noise_kind == "isotropic":
        return noise.v_opt_iso(d, k)
    if noise_kind == "dephasing":
        return noise.v_opt_dephase(d, k)
    if noise_kind == "worst_case":
        return noise.fidelity_reference_worst(d, k)
    # entangled for every v > 0
    return 0.0 if k == 1 else None


def threshold_rows(noise_kind, kind, dims, ks_spec, settings_spec, scan=False, tol=1e-10):
    rows = []
    for d in dims:
        ks = _int_list(ks_spec, d) if ks_spec else list(range(1, d))
        for s in sorted(set(_int_list(settings_spec, d))):
            meas = None
            for k in ks:
                if not 1 <= k <= d - 1:
                    continue
                v_crit = _closed_form(noise_kind, kind, s, d, k)
                v_scan = None
                if scan or v_crit is None:
                    if meas is None:
                        variant = "dephasing" if noise_kind == "dephasing" else "standard"
                        try:
                            meas = ms.construct_measurement(kind, d, s, variant)
                        except (ValueError, ms.UnsupportedDimensionError):
                            meas = False
                    if meas:
                        try:
                            v_scan = noise.threshold_scan(noise_kind, meas, k, tol)
                        except NoThresholdError:
                            v_scan = None
                v_ref = _reference(noise_kind, d, k)
                v_use = v_crit if v_crit is not None else v_scan
                delta = noise.accuracy_delta(v_use, v_ref) if v_use is not None and v_ref is not None else None
                rows.append(
                    {
                        "noise": noise_kind,
                        "kind": kind,
                        "d": d,
                        "settings": s,
                        "k": k,
                        "v_crit": v_crit,
                        "v_scan": v_scan,
                        "v_opt": v_ref,
                        "delta": delta,
                    }
                )
    return rows


def cmd_thresholds(args) -> int:
    settings_spec = _settings_arg(args) or ("2" if args.kind == "mub" else "d+1")
    rows = threshold_rows(
        args.noise, args.kind, _int_list(args.d), args.k, str(settings_spec), args.scan, args.tol
    )
    if args.format == "json":
        text = _dump(rows)
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["noise"], lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    meas = _measurement_from_args(args, validate=False)
    if meas.kind == "mub":
        validation = ms.validate_mub(meas)
    else:
        validation = ms.validate_eam(meas, ms.SIC_TOL)
    spectral = verify_measurement(meas, args.tol)
    payload = {"validation": validation.to_dict(), "spectrum": spectral.to_dict()}
    ok = validation.passed and spectral.passed
    d, s = meas.dim_local, meas.settings_count
    if (meas.kind == "mub" and s == d + 1) or (meas.kind == "eam" and s == d * d):
        ident = maximal_set_identity_check(d, meas, args.tol)[meas.kind]
        payload["maximal_set_identity"] = {"holds": ident.holds, "deviation": ident.deviation}
        ok = ok and bool(ident.holds)
    payload["passed"] = ok
    _emit(_dump(payload), args.out)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -----------------------------------------------------------------


def _add_measurement_flags(p):
    p.add_argument("--kind", choices=["mub", "eam"])
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--variant", choices=["standard", "dephasing"], default="standard")
    p.add_argument("--fiducial", help="JSON list of [re, im] pairs for a SIC fiducial")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schmidt-cert", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build and serialize a MUB family or equiangular frame")
    _add_measurement_flags(p)
    p.add_argument("--tol", type=float, default=ms.SIC_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("certify", help="certify Schmidt number and fidelity from a counts file")
    p.add_argument("--in", dest="infile")
    p.add_argument("--example", help=f"bundled dataset: {', '.join(BUNDLED)}")
    p.add_argument("--measurement", help="optional measurement file checked against the counts header")
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--k", type=int, help="exit 1 unless the certified Schmidt number is at least K")
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="simulate a noisy experiment and certify it")
    _add_measurement_flags(p)
    p.add_argument("--noise", choices=noise.NOISE_KINDS, default="isotropic")
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--confidence", type=float, default=0.99)
    p.add_argument("--k", type=int, help="exit 1 unless the certified Schmidt number is at least K")
    p.add_argument("--keep-variant", action="store_true", help="do not switch frames to the dephasing variant")
    p.add_argument("--counts-out", help="write the simulated counts file here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("thresholds", help="tabulate critical visibilities and accuracy")
    p.add_argument("--noise", choices=noise.NOISE_KINDS, default="isotropic")
    p.add_argument("--kind", choices=["mub", "eam"], default="mub")
    p.add_argument("--d", required=True, help="dimensions, e.g. '2,3,5' or '2:13'")
    p.add_argument("--k", help="Schmidt bounds k (default 1..d-1); thresholds certify k+1")
    p.add_argument("--m", help="MUB counts, e.g. '2,3,d+1'")
    p.add_argument("--n", help="frame sizes, e.g. 'd+1,d^2'")
    p.add_argument("--scan", action="store_true", help="add numerically scanned thresholds")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("verify", help="check witness-operator spectral identities")
    _add_measurement_flags(p)
    p.add_argument("--in", dest="infile", help="measurement JSON file (validated, not trusted)")
    p.add_argument("--tol", type=float, default=SPECTRAL_TOL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
