"""Command-line front end.

Exit codes: 0 success, 1 hard error (bad input, failed command), 2 partial
report (some metrics failed or raised warnings, see the flags).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import coupling, lti, metrics, report, sysid
from .errors import ForcebenchError
from .frd import FrequencyResponseData
from .grid import FrequencyGrid
from .io import load_system, model_from_dict, model_to_dict

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_common(p: argparse.ArgumentParser, formats=("json", "markdown", "csv")) -> None:
    defaults = FrequencyGrid.default()
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="passivity margin for the PII (default 0.05)")
    p.add_argument("--grid-min", type=float, default=defaults.omega_min, help="rad/s")
    p.add_argument("--grid-max", type=float, default=defaults.omega_max, help="rad/s")
    p.add_argument("--grid-points", type=int, default=defaults.points,
                   help="log-spaced points (env FORCEBENCH_GRID_POINTS)")
    p.add_argument("--format", choices=formats, default=formats[0], help="output format")
    p.add_argument("--input-format", choices=("auto", "json", "csv"), default="auto",
                   help="input file kind; auto picks by extension")
    p.add_argument("--out", type=Path, help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="forcebench", description="Load-independent force controller metrics.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("metrics", help="full metric report for one controller")
    p.add_argument("zb", type=Path, help="blocked system (model .json or FRD .csv)")
    p.add_argument("zt", type=Path, help="transparency (model .json or FRD .csv)")
    p.add_argument("--name", default=None)
    p.add_argument("--omega-b", type=float, default=None, help="override LCS band edge, rad/s")
    _add_common(p)

    p = sub.add_parser("compare", help="side-by-side table for several controllers")
    p.add_argument("--controller", nargs=3, action="append", metavar=("NAME", "ZB", "ZT"),
                   default=[], help="repeat once per controller")
    p.add_argument("--stored", type=Path, help="JSON list of stored reports to render instead")
    p.add_argument("--omega-b", type=float, default=None)
    _add_common(p, formats=("markdown", "csv", "json"))

    p = sub.add_parser("coupled", help="coupled response and stability with a given load")
    p.add_argument("zb", type=Path)
    p.add_argument("zt", type=Path)
    p.add_argument("load", type=Path, help="load JSON: MSD parameters (mass_kg, damping_Ns_per_m, "
                                           "stiffness_N_per_m) or an admittance model (num, den)")
    p.add_argument("--step-out", type=Path, help="write the T_y step response CSV here when stable")
    _add_common(p, formats=("json", "markdown"))

    p = sub.add_parser("fit", help="fit a rational model to FRD data")
    p.add_argument("frd", type=Path)
    p.add_argument("--num-order", type=int, required=True)
    p.add_argument("--den-order", type=int, required=True)
    p.add_argument("--iterations", type=int, default=5)
    p.add_argument("--name", default=None)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("bode", help="magnitude/phase data for plotting")
    p.add_argument("system", type=Path)
    _add_common(p, formats=("csv",))
    return parser


def _grid(args) -> FrequencyGrid:
    return FrequencyGrid(args.grid_min, args.grid_max, args.grid_points)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _num(x: float) -> str:
    return repr(float(x))


def _require_model(sys_, path) -> lti.TransferFunction:
    if isinstance(sys_, FrequencyResponseData):
        raise ValueError(f"{path}: a parametric model (.json) is required here")
    return sys_


def cmd_metrics(args) -> int:
    zb = load_system(args.zb, args.input_format)
    zt = load_system(args.zt, args.input_format)
    name = args.name if args.name is not None else args.zt.stem
    rep = metrics.benchmark_report(zb, zt, args.epsilon, _grid(args), name, omega_b=args.omega_b)
    _emit(report.RENDERERS[args.format](rep if args.format == "json" else [rep]), args.out)
    return EXIT_OK if rep.complete and not rep.flags else EXIT_PARTIAL


def cmd_compare(args) -> int:
    if args.stored is not None:
        if args.controller:
            raise UsageError("use either --stored or --controller, not both")
        data = json.loads(args.stored.read_text())
        reports = [metrics.MetricReport.from_dict(d) for d in data]
    else:
        if len(args.controller) < 2:
            raise UsageError("compare needs at least two --controller NAME ZB ZT entries")
        reports = []
        grid = _grid(args)
        for name, zb_path, zt_path in args.controller:
            try:
                zb = load_system(Path(zb_path), args.input_format)
                zt = load_system(Path(zt_path), args.input_format)
            except (ForcebenchError, OSError, ValueError) as exc:
                reports.append(metrics.MetricReport(name, args.epsilon, flags=[f"load: {exc}"]))
                continue
            reports.append(metrics.benchmark_report(zb, zt, args.epsilon, grid, name,
                                                    omega_b=args.omega_b))
    if len(reports) < 2:
        raise UsageError("compare needs at least two controllers")
    _emit(report.RENDERERS[args.format](reports), args.out)
    partial = any(not r.complete or r.flags for r in reports)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_coupled(args) -> int:
    zb = _require_model(load_system(args.zb, args.input_format), args.zb)
    zt = _require_model(load_system(args.zt, args.input_format), args.zt)
    data = json.loads(args.load.read_text())
    if isinstance(data, dict) and "num" in data:
        load_desc = model_to_dict(model_from_dict(data, args.load), "Y")
        y = model_from_dict(data, args.load)
    else:
        load = coupling.LoadModel.from_dict(data)
        load_desc = load.to_dict()
        y = coupling.load_admittance(load)
    grid = _grid(args)
    cs = coupling.coupled_response(zb, zt, y)
    sg = coupling.small_gain_check(zt, y, grid)
    pii = metrics.pii(zt, args.epsilon, grid)
    mixed = coupling.mixed_stability_check(zt, y, pii, grid)
    poles = sorted(cs.characteristic_poles.tolist(), key=lambda p: (p.real, p.imag))
    step_note = None
    if cs.stable and args.step_out is not None:
        try:
            ts = lti.step_response(lti.minreal(cs.t_y))
            with args.step_out.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t_s", "f_l"])
                w.writerows([_num(t), _num(v)] for t, v in zip(ts.t, ts.y))
        except ForcebenchError as exc:
            step_note = f"step response unavailable: {exc}"
    payload = {
        "load": load_desc,
        "t_y": model_to_dict(lti.minreal(cs.t_y), "T_y"),
        "characteristic_poles": [[p.real, p.imag] for p in poles],
        "stable": cs.stable,
        "small_gain": {"holds": sg.holds, "worst_omega_rad_s": sg.worst_omega,
                       "worst_product": sg.worst_product},
        "pii": pii.to_dict(),
        "mixed": {"guaranteed": mixed.guaranteed, "reason": mixed.reason},
    }
    if step_note:
        payload["notes"] = [step_note]
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        lines = [
            f"- stable: {'yes' if cs.stable else 'no'}",
            "- characteristic poles: " + ", ".join(f"{p.real:.6g}{p.imag:+.6g}j" for p in poles),
            f"- small gain: {'holds' if sg.holds else 'fails'} "
            f"(worst |Z_t||Y| = {sg.worst_product:.6g} at {sg.worst_omega:.6g} rad/s)",
            f"- mixed passivity/small-gain: "
            f"{'guaranteed' if mixed.guaranteed else 'not guaranteed'} ({mixed.reason})",
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    frd = load_system(args.frd, "csv")
    cfg = sysid.FitConfig(args.num_order, args.den_order, args.iterations)
    res = sysid.fit_rational(frd, cfg)
    name = args.name if args.name is not None else args.frd.stem
    _emit(json.dumps(model_to_dict(res.tf, name), indent=2) + "\n", args.out)
    print(f"relative_rms_error={res.relative_rms_error!r} stable={res.stable}", file=sys.stderr)
    return EXIT_OK


def cmd_bode(args) -> int:
    sys_ = load_system(args.system, args.input_format)
    w = sys_.frequencies if isinstance(sys_, FrequencyResponseData) else _grid(args).omegas()
    h = sys_.freqresp(w)
    with np.errstate(divide="ignore"):
        mag_db = 20.0 * np.log10(np.abs(h))
    phase = np.degrees(np.unwrap(np.angle(h)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["omega_rad_s", "mag_db", "phase_deg"])
    for row in zip(w, mag_db, phase):
        writer.writerow([_num(v) if math.isfinite(v) else str(v) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


COMMANDS = {"metrics": cmd_metrics, "compare": cmd_compare, "coupled": cmd_coupled,
            "fit": cmd_fit, "bode": cmd_bode}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ForcebenchError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
