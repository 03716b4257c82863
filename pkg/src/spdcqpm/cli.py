"""Command-line entry point: ``spdcqpm <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from . import coincsim, pairstats, phasematch, qpm_inference
from .dispersion import Axis, load_model, refractive_index
from .errors import DomainError, FitError, ModelError

log = logging.getLogger("spdcqpm")

REFERENCE_PUMP_NM = 405.0
REFERENCE_PERIOD_UM = 9.96


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"\n{self.prog}: error: {message}\n")


def _clean(value):
    """Make a result JSON-safe: non-finite floats become null."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def dumps_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row.get(k) is None else row[k]) for k in columns})
    return buf.getvalue()


def write_output(text: str, out: str | None) -> None:
    """Write to stdout, or atomically to ``out`` via a temp file in the same directory."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    target = Path(out)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, rows: list[dict], columns: list[str], document=None) -> None:
    if args.format == "json":
        doc = document if document is not None else (rows[0] if len(rows) == 1 else rows)
        write_output(dumps_json(doc), args.out)
    else:
        write_output(dumps_csv(rows, columns), args.out)


def _grating(args) -> phasematch.GratingSpec:
    return phasematch.GratingSpec(poling_period_0=args.period_um)


def _process(kind, order, kwg) -> phasematch.ProcessSpec:
    return phasematch.ProcessSpec(kind, order, kwg)


def _point_row(point: phasematch.TuningPoint | None, temperature: float) -> dict:
    if point is None:
        return {"temperature_c": temperature, "signal_nm": None, "idler_nm": None, "residual": None}
    return {
        "temperature_c": point.temperature,
        "signal_nm": point.signal_wavelength,
        "idler_nm": point.idler_wavelength,
        "residual": point.residual,
    }


def cmd_index(args) -> None:
    disp = load_model(args.config)
    axis = Axis.parse(args.axis)
    n = refractive_index(disp, axis, args.lambda_nm * 1e-3, args.t)
    if args.format == "text":
        write_output(f"{n!r}\n", args.out)
        return
    row = {"axis": axis.value, "wavelength_nm": args.lambda_nm, "temperature_c": args.t, "n": n}
    emit(args, [row], list(row))


def cmd_tuning_curve(args) -> None:
    disp = load_model(args.config)
    proc = _process(args.process, args.order, args.kwg)
    curve = phasematch.tuning_curve(
        disp, _grating(args), proc, args.pump_nm, (args.t_min, args.t_max), args.step,
        bracket=(args.signal_min_nm, args.signal_max_nm),
    )
    rows = [_point_row(p, t) for t, p in zip(curve.temperatures, curve.points)]
    log.info("%d of %d temperatures phase matched", len(curve.solved), len(curve))
    emit(args, rows, ["temperature_c", "signal_nm", "idler_nm", "residual"], document=rows)


def cmd_degeneracy(args) -> None:
    disp = load_model(args.config)
    proc = _process(args.process, args.order, args.kwg)
    t = phasematch.degeneracy_temperature(disp, _grating(args), proc, args.pump_nm, (args.t_min, args.t_max))
    row = {"process": proc.kind.value, "qpm_order": proc.qpm_order, "k_wg": proc.k_wg,
           "degeneracy_temperature_c": t, "found": t is not None}
    emit(args, [row], list(row))


def cmd_intersect(args) -> None:
    disp = load_model(args.config)
    kwg_a = args.kwg if args.kwg_a is None else args.kwg_a
    kwg_b = args.kwg if args.kwg_b is None else args.kwg_b
    pa = _process(args.process_a, args.order_a, kwg_a)
    pb = _process(args.process_b, args.order_b, kwg_b)
    hit = phasematch.find_intersection(
        disp, _grating(args), pa, pb, args.pump_nm, (args.t_min, args.t_max),
        bracket=(args.signal_min_nm, args.signal_max_nm),
    )
    row = {"found": hit is not None, "identical": bool(hit and hit.identical),
           "temperature_c": None, "signal_nm": None, "idler_nm": None}
    if hit is not None:
        row["temperature_c"] = hit.temperature
        if hit.point is not None:
            row["signal_nm"] = hit.point.signal_wavelength
            row["idler_nm"] = hit.point.idler_wavelength
    emit(args, [row], list(row))


def cmd_infer_qpm(args) -> None:
    disp = load_model(args.config)
    obs = qpm_inference.IntersectionObservation(args.t, args.pump_nm, args.signal_nm, args.idler_nm)
    consts = qpm_inference.equation_constants(disp, _grating(args), obs)
    gap = qpm_inference.order_gap(consts)
    try:
        sol = qpm_inference.infer_orders(consts, args.max_order)
        found = True
    except qpm_inference.NoQpmSolution as exc:
        sol, found = exc.best, False
    doc = {
        "found": found,
        "m_x": sol.m_x,
        "m_y": sol.m_y,
        "k_wg": sol.k_wg,
        "residual_split": sol.residual_split,
        "order_gap": gap,
        "score": sol.score,
        "alternatives": [list(p) for p in sol.alternatives],
        "constants": consts.as_dict(),
    }
    if args.format == "csv":
        row = {k: v for k, v in doc.items() if k not in ("constants", "alternatives")}
        row.update(consts.as_dict())
        emit(args, [row], list(row))
    else:
        write_output(dumps_json(doc), args.out)


def _read_points(path: str, window: float) -> list[pairstats.CoincidencePoint]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"power_mw", "coincidences_hz", "accidentals_hz"} - set(reader.fieldnames or [])
        if missing:
            raise DomainError(f"{path}: missing columns {sorted(missing)}")
        return [
            pairstats.CoincidencePoint(
                float(r["power_mw"]), float(r["coincidences_hz"]), float(r["accidentals_hz"]), window
            )
            for r in reader
        ]


def cmd_pairstats(args) -> None:
    if args.budget:
        budget = pairstats.LossBudget.from_dict(json.loads(Path(args.budget).read_text()))
    elif args.paper_defaults:
        budget = pairstats.REFERENCE_BUDGET
    else:
        budget = pairstats.LossBudget()
    window = args.window_ns * 1e-9

    if args.points:
        doc = pairstats.analyze_points(_read_points(args.points, window), budget)
    elif args.rate_mhz is not None:
        slope = args.rate_mhz * pairstats.MHZ
        effective = pairstats.splitter_correction(slope)
        doc = {"slope": slope, "effective_rate": effective,
               "intrinsic_rate": pairstats.loss_corrected_rate(effective, budget),
               "total_efficiency": budget.total_efficiency}
    else:
        raise DomainError("pairstats needs --points or --rate-mhz")
    doc["window_s"] = window
    doc["units"] = "Hz/mW"
    if args.bandwidth_nm is not None:
        sd = pairstats.spectral_density(doc["intrinsic_rate"], args.bandwidth_nm, args.center_nm)
        doc["spectral_density"] = {"per_nm": sd.per_nm, "bandwidth_thz": sd.bandwidth_thz,
                                   "per_thz": sd.per_thz}
    if args.format == "csv":
        keys = [k for k in ("slope", "stderr", "r_squared", "effective_rate", "intrinsic_rate") if k in doc]
        emit(args, [{k: doc[k] for k in keys}], keys)
    else:
        write_output(dumps_json(doc), args.out)


def _sim_config(args, pair_rate: float, seed: int) -> coincsim.SimConfig:
    return coincsim.SimConfig(
        pair_rate=pair_rate,
        duration=args.duration,
        detector_efficiency_a=args.eff_a,
        detector_efficiency_b=args.eff_b,
        dark_rate_a=args.dark_a,
        dark_rate_b=args.dark_b,
        jitter_sigma=args.jitter_ps * 1e-12,
        seed=seed,
        splitter=coincsim.Splitter(args.splitter),
    )


def _run_sim(args, pair_rate: float, seed: int):
    res = coincsim.simulate(_sim_config(args, pair_rate, seed))
    hist = coincsim.build_histogram(res.stream_a, res.stream_b, args.bin_ps * 1e-12,
                                    args.span_ns * 1e-9, duration=args.duration)
    return hist, coincsim.analyze_histogram(hist, args.window_ns * 1e-9)


def cmd_simulate(args) -> None:
    seed = 0 if args.seed is None else args.seed
    if args.sweep:
        with open(args.sweep, newline="") as fh:
            powers = [float(r["power_mw"]) for r in csv.DictReader(fh)]
        rows = []
        for i, p in enumerate(powers):
            rate = p * args.rate_per_mw
            _, an = _run_sim(args, rate, seed + i)
            rows.append({"power_mw": p, "pair_rate_hz": rate, "measured_hz": an.measured,
                         "accidentals_hz": an.accidentals, "true_hz": an.true, "car": an.car})
        emit(args, rows, list(rows[0]) if rows else ["power_mw"], document=rows)
        return
    hist, an = _run_sim(args, args.pair_rate, seed)
    if args.format == "json":
        doc = {"analysis": an.__dict__, "bin_center_ns": (hist.centers * 1e9).tolist(),
               "counts": hist.counts.tolist()}
        write_output(dumps_json(doc), args.out)
    else:
        rows = [{"bin_center_ns": c, "counts": int(n)} for c, n in zip(hist.centers * 1e9, hist.counts)]
        write_output(dumps_csv(rows, ["bin_center_ns", "counts"]), args.out)
    log.info("measured %.1f Hz, accidentals %.2f Hz, CAR %.1f", an.measured, an.accidentals, an.car)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default="ktp-default", help="crystal profile: built-in name or JSON path")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--json", dest="format", action="store_const", const="json", help="same as --format json")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paper-defaults", action="store_true",
                   help="preload the reference device: 9.96 um period, 405 nm pump, measured loss budget")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _phase_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pump-nm", type=float, default=REFERENCE_PUMP_NM)
    p.add_argument("--period-um", type=float, default=REFERENCE_PERIOD_UM)
    p.add_argument("--signal-min-nm", type=float, default=phasematch.DEFAULT_SIGNAL_BRACKET[0])
    p.add_argument("--signal-max-nm", type=float, default=phasematch.DEFAULT_SIGNAL_BRACKET[1])


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="spdcqpm", description="QPM SPDC modelling toolkit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("index", parents=[common], help="refractive index n(axis, lambda, T)")
    p.add_argument("--axis", required=True, choices=("y", "z", "Y", "Z"))
    p.add_argument("--lambda-nm", type=float, required=True)
    p.add_argument("--t", type=float, default=25.0)
    p.set_defaults(func=cmd_index, default_format="text")

    p = sub.add_parser("tuning-curve", parents=[common], help="signal/idler vs temperature")
    p.add_argument("--process", required=True)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--kwg", type=float, default=0.0)
    p.add_argument("--t-min", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--step", type=float, default=0.5)
    _phase_args(p)
    p.set_defaults(func=cmd_tuning_curve, default_format="csv")

    p = sub.add_parser("degeneracy", parents=[common], help="temperature of degenerate phase matching")
    p.add_argument("--process", required=True)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--kwg", type=float, default=0.0)
    p.add_argument("--t-min", type=float, default=20.0)
    p.add_argument("--t-max", type=float, default=80.0)
    _phase_args(p)
    p.set_defaults(func=cmd_degeneracy, default_format="csv")

    p = sub.add_parser("intersect", parents=[common], help="temperature where two tuning curves cross")
    p.add_argument("--process-a", default="type0")
    p.add_argument("--order-a", type=int, default=3)
    p.add_argument("--process-b", default="type2")
    p.add_argument("--order-b", type=int, default=1)
    p.add_argument("--kwg", type=float, default=0.0, help="shared waveguide mismatch, rad/um")
    p.add_argument("--kwg-a", type=float, default=None)
    p.add_argument("--kwg-b", type=float, default=None)
    p.add_argument("--t-min", type=float, default=20.0)
    p.add_argument("--t-max", type=float, default=80.0)
    _phase_args(p)
    p.set_defaults(func=cmd_intersect, default_format="csv")

    p = sub.add_parser("infer-qpm", parents=[common], help="QPM orders and k_wg from an intersection")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--signal-nm", type=float, required=True)
    p.add_argument("--idler-nm", type=float, required=True)
    p.add_argument("--pump-nm", type=float, default=REFERENCE_PUMP_NM)
    p.add_argument("--period-um", type=float, default=REFERENCE_PERIOD_UM)
    p.add_argument("--max-order", type=int, default=9)
    p.set_defaults(func=cmd_infer_qpm, default_format="json")

    p = sub.add_parser("pairstats", parents=[common], help="coincidence-rate pipeline")
    p.add_argument("--points", help="CSV with power_mw, coincidences_hz, accidentals_hz")
    p.add_argument("--rate-mhz", type=float, help="skip the fit: coincidence slope in MHz/mW")
    p.add_argument("--budget", help="loss budget JSON")
    p.add_argument("--window-ns", type=float, default=2.0)
    p.add_argument("--bandwidth-nm", type=float, help="also report spectral density over this filter")
    p.add_argument("--center-nm", type=float, default=810.0)
    p.set_defaults(func=cmd_pairstats, default_format="json")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo coincidence histogram")
    p.add_argument("--pair-rate", type=float, default=1e6)
    p.add_argument("--eff-a", type=float, default=0.65)
    p.add_argument("--eff-b", type=float, default=0.65)
    p.add_argument("--dark-a", type=float, default=500.0)
    p.add_argument("--dark-b", type=float, default=500.0)
    p.add_argument("--jitter-ps", type=float, default=350.0)
    p.add_argument("--duration", type=float, default=1.0)
    p.add_argument("--splitter", choices=[s.value for s in coincsim.Splitter], default="fifty-fifty")
    p.add_argument("--bin-ps", type=float, default=100.0)
    p.add_argument("--span-ns", type=float, default=50.0)
    p.add_argument("--window-ns", type=float, default=2.0)
    p.add_argument("--sweep", help="CSV with a power_mw column; emits CAR vs power")
    p.add_argument("--rate-per-mw", type=float, default=1e5, help="pair rate per mW for --sweep, Hz/mW")
    p.set_defaults(func=cmd_simulate, default_format="csv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    if args.format is None:
        args.format = args.default_format
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except (DomainError, ModelError, FitError, OSError) as exc:
        print(f"spdcqpm: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
