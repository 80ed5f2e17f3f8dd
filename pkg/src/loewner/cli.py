"""Command-line front end.

Exit status: 0 on success, 2 for unreadable or malformed input, 3 for
numerical breakdown, 4 for violated preconditions. The error class name is
printed on standard error. Set ``LOEWNER_LOG_LEVEL`` (e.g. ``INFO``) for
progress messages.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import benchmarks as bm
from . import io
from .errors import InputError, LoewnerError, ParseError, PreconditionError, SchemaError
from .hankel_time import (
    discretize_backward_euler,
    realize_from_impulse,
    realize_from_io,
    recover_markov,
    reduce_hankel,
    to_continuous_bilinear,
)
from .lddc import ReferenceModel, closed_loop_eval, identify_controller, ideal_controller_samples
from .loewner_bilinear import (
    InterpolationTuples,
    ModelKernel,
    bilinear_singular_values,
    build_bilinear_set,
    carleman,
    interleaved_points,
    kernel_data,
    realize_bilinear,
    reduce_bilinear,
    table_kernel,
)
from .loewner_lti import loewner_fit, partition_data
from .loewner_parametric import ParametricBarycentricModel, fit_parametric
from .model_core import (
    BilinearModel,
    DescriptorModel,
    TimeSeries,
    conjugate_close,
    samples_from_function,
    simulate_bilinear,
    simulate_discrete,
    transfer_siso,
)

log = logging.getLogger("loewner")


@dataclass
class JobConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    tol: float = 1e-10
    order: int | None = None
    output: str | None = None
    seed: int = 0

    def validate(self) -> None:
        if not 0 < self.tol < 1:
            raise PreconditionError(f"tolerance {self.tol} outside (0, 1)")
        for p in self.inputs:
            if not Path(p).exists():
                raise InputError(f"no such file: {p}")


# ---------------------------------------------------------------- helpers


def _write_text(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)] + [",".join(repr(float(v)) if not isinstance(v, str) else v for v in r)
                                  for r in rows]
    _write_text(path, "\n".join(lines) + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _rel_error(samples, model) -> float:
    H = np.array([s.response for s in samples])
    Hr = np.array([model(s.point) for s in samples])
    return float(np.abs(H - Hr).max() / max(np.abs(H).max(), 1e-300))


def _matrix(M):
    M = np.real_if_close(np.asarray(M), tol=1000)
    if np.iscomplexobj(M):
        return [[[float(v.real), float(v.imag)] for v in row] for row in M]
    return [[float(v) for v in row] for row in M]


def _sv_rows(*cols):
    n = max(len(c) for c in cols)
    return [[k + 1] + [c[k] if k < len(c) else float("nan") for c in cols] for k in range(n)]


# ---------------------------------------------------------------- commands


def cmd_fit_lti(a) -> dict:
    samples = io.load_frequency_csv(a.data)
    if a.conjugate_close:
        samples = conjugate_close(samples)
    directions = a.directions
    data = partition_data(samples, directions=directions, seed=a.seed)
    fit = loewner_fit(data, tol=a.tol, r=a.order, real=not a.complex, feedthrough=not a.no_feedthrough,
                      order_rule=a.rule, max_order=a.max_order, h=a.step)
    if a.out:
        io.save_model(a.out, fit.model)
    if a.sv:
        o = fit.orders
        _write_csv(a.sv, ["k", "sv_row", "sv_col", "sv_L"], _sv_rows(o.sv_row, o.sv_col, o.sv_L))
    return {"r": int(fit.orders.r), "nu": int(fit.orders.nu), "order": int(fit.model.n),
            "improper": bool(fit.improper), "D": _matrix(fit.D),
            "max_rel_error": _rel_error(samples, fit.model)}


def cmd_fit_param(a) -> dict:
    grid = io.load_grid_csv(a.data)
    model = fit_parametric(grid, tol=a.tol, orders=tuple(a.orders) if a.orders else None)
    if a.out:
        io.save_model(a.out, model)
    err = max(abs(model(z, p, method="ratio") - grid.Phi[i, k])
              for i, z in enumerate(grid.z) for k, p in enumerate(grid.p))
    return {"orders": list(model.orders), "max_rel_error": float(err / np.abs(grid.Phi).max())}


def cmd_fit_time(a) -> dict:
    series = io.load_time_csv(a.data)
    if series.y is None:
        raise SchemaError("time file carries no output columns")
    n = a.order
    if a.method == "io":
        model = realize_from_io(series.u, series.y, n, step=series.step, seed=a.seed)
    else:
        h = recover_markov(series.u, series.y, 2 * n)
        model = reduce_hankel(h, n, a.reduce, series.step) if a.reduce else \
            realize_from_impulse(h, n, series.step)
    if a.continuous:
        model = to_continuous_bilinear(model, series.step)
    if a.out:
        io.save_model(a.out, model)
    d = model if model.discrete else discretize_backward_euler(model, series.step)
    y = simulate_discrete(d, TimeSeries(series.step, series.u, start_index=series.start_index)).y
    err = float(np.abs(y - series.y).max() / max(np.abs(series.y).max(), 1e-300))
    return {"order": int(model.n), "continuous": model.h is None, "max_rel_error": err}


def cmd_fit_bilinear(a) -> dict:
    src = Path(a.data)
    doc = json.loads(src.read_text())
    if isinstance(doc, dict) and doc.get("type") == "bilinear":
        source = io.model_from_dict(doc)
        kernel = ModelKernel(source)
        lam, mu = interleaved_points(a.k, a.lo, a.hi, a.axis)
    else:
        lam, mu, table = io.load_kernel_json(src)
        kernel = table_kernel(table)
    tuples = InterpolationTuples(lam, mu)
    bset = build_bilinear_set(kernel, tuples)
    sv, _ = bilinear_singular_values(bset)
    r = a.order if a.order else int(np.sum(sv > a.tol))
    model = realize_bilinear(bset) if r == tuples.k else reduce_bilinear(bset, r)
    if a.out:
        io.save_model(a.out, model)
    if a.sv:
        _write_csv(a.sv, ["k", "sv"], _sv_rows(sv))
    fitted = ModelKernel(model)
    vals = [(kernel(l, rr), fitted(l, rr)) for l, rr in tuples.matched()]
    scale = max(abs(v) for v, _ in vals)
    return {"k": tuples.k, "order": r, "max_rel_error": float(max(abs(v - w) for v, w in vals) / scale)}


def _reference(spec: dict, plant) -> ReferenceModel:
    kind = spec.get("kind")
    if kind == "rational":
        return ReferenceModel.from_rational(spec["num"], spec["den"])
    if kind == "model":
        return ReferenceModel.from_model(io.load_model(spec["path"]))
    if kind == "closed_loop":
        c = spec["controller"]
        K = io.load_model(c["path"]) if "path" in c else ReferenceModel.from_rational(c["num"], c["den"])
        p = spec.get("plant", "data")
        H = plant if p == "data" else io.load_model(p)
        return ReferenceModel.closed_loop(H, K, "closed loop")
    raise SchemaError(f"unknown reference kind {kind!r}")


def cmd_lddc(a) -> dict:
    plant = io.load_frequency_csv(a.plant)
    try:
        spec = json.loads(Path(a.reference).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, a.reference) from None
    try:
        M = _reference(spec, plant)
    except KeyError as exc:
        raise SchemaError(f"reference JSON lacks {exc}") from None
    ks = ideal_controller_samples(plant, M, strict=a.strict)
    fit = identify_controller(ks, tol=a.tol, r=a.order, order_rule=a.rule, max_order=a.max_order,
                              seed=a.seed)
    if a.out:
        io.save_model(a.out, fit.model)
    rep = closed_loop_eval(plant, fit.model, M)
    if a.report:
        rows = [[z.real, z.imag, c.real, c.imag, m.real, m.imag, d]
                for z, c, m, d in zip(rep.points, rep.achieved, rep.reference, rep.deviation)]
        _write_csv(a.report, ["point_re", "point_im", "achieved_re", "achieved_im",
                              "reference_re", "reference_im", "deviation"], rows)
    return {"order": int(fit.model.n), "max_deviation": rep.max_error, "mean_deviation": rep.mean_error,
            "sv_row": [float(x) for x in fit.orders.sv_row[:10]]}


def _grid(spec) -> np.ndarray:
    kind, lo, hi, n = spec[0], float(spec[1]), float(spec[2]), int(spec[3])
    if kind == "log":
        if lo <= 0 or hi <= 0:
            raise PreconditionError("log grid needs positive bounds")
        return np.logspace(np.log10(lo), np.log10(hi), n)
    if kind == "lin":
        return np.linspace(lo, hi, n)
    raise PreconditionError(f"unknown grid kind {kind!r}")


def cmd_freqresp(a) -> dict:
    model = io.load_model(a.model)
    w = _grid(a.grid)
    if isinstance(model, ParametricBarycentricModel):
        if a.param is None:
            raise PreconditionError("parametric models need --param")
        vals = np.array([model(1j * x, a.param) for x in w])
    elif isinstance(model, BilinearModel):
        vals = transfer_siso(model.linear_part(), 1j * w)
    else:
        pts = np.exp(1j * w * model.h) if model.discrete else 1j * w
        if model.m != 1 or model.p != 1:
            raise PreconditionError("freqresp writes SISO responses only")
        vals = transfer_siso(model, pts)
    _write_csv(a.out, ["omega", "H_re", "H_im", "mag", "phase"],
               [[x, v.real, v.imag, abs(v), np.angle(v)] for x, v in zip(w, vals)])
    return {"rows": len(w)}


def cmd_simulate(a) -> dict:
    model = io.load_model(a.model)
    series = io.load_time_csv(a.input)
    if isinstance(model, BilinearModel):
        out = simulate_bilinear(model, series, scheme=a.scheme)
    elif isinstance(model, DescriptorModel):
        d = model if model.discrete else discretize_backward_euler(model, series.step)
        if model.discrete and abs(model.h - series.step) > 1e-9 * series.step:
            raise PreconditionError(f"model step {model.h} differs from data step {series.step}")
        out = simulate_discrete(d, TimeSeries(series.step, series.u, start_index=series.start_index))
    else:
        raise PreconditionError("simulation needs a descriptor or bilinear model")
    if a.out:
        io.save_time_csv(a.out, out)
    return {"samples": len(out)}


def cmd_bench(a) -> dict:
    name = a.name
    if name in ("transport", "gust"):
        if a.points % 2:
            raise PreconditionError("--points counts conjugate pairs twice and must be even")
        w = np.logspace(np.log10(a.lo), np.log10(a.hi), a.points // 2)
        fun = bm.transport(a.xm) if name == "transport" else bm.gust_fixture(a.seed)
        samples = conjugate_close(samples_from_function(lambda s: np.asarray(fun(s)).reshape(1, 1), 1j * w))
        io.save_frequency_csv(a.out, samples)
        return {"benchmark": name, "points": len(samples)}
    if name == "building":
        model = bm.structural_chain(seed=a.seed)
        d = discretize_backward_euler(model, bm.BUILDING_STEP)
        t = bm.building_grid()
        out = simulate_discrete(d, TimeSeries(bm.BUILDING_STEP, bm.building_input(t)))
        io.save_time_csv(a.out, out)
        if a.model_out:
            io.save_model(a.model_out, model)
        return {"benchmark": name, "samples": len(out), "states": model.n}
    if name == "burgers":
        model = carleman(bm.burgers_spec(a.n, a.nu))
        t = bm.burgers_grid()
        out = simulate_bilinear(model, TimeSeries(t[1] - t[0], bm.burgers_input(t)))
        io.save_time_csv(a.out, out)
        if a.model_out:
            io.save_model(a.model_out, model)
        if a.kernels:
            lam, mu = interleaved_points(a.k, a.lo, a.hi, "real")
            tup = InterpolationTuples(lam, mu)
            io.save_kernel_json(a.kernels, lam, mu, kernel_data(ModelKernel(model), tup))
        return {"benchmark": name, "samples": len(out), "states": model.n}
    raise PreconditionError(f"unknown benchmark {name!r}")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="loewner", description="Loewner-framework fitting and reduction")
    p.add_argument("--seed", type=int, default=0, help="seed for all random choices (default 0)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, order=True):
        sp.add_argument("--tol", type=float, default=1e-10, help="relative singular-value tolerance")
        if order:
            sp.add_argument("--order", type=int, default=None, help="fixed reduced order")
        sp.add_argument("--out", default=None, help="output model JSON")
        sp.add_argument("--report", default=None, help="report JSON (default: stdout)")

    s = sub.add_parser("fit-lti", help="Loewner fit of frequency samples")
    s.add_argument("data")
    common(s)
    s.add_argument("--rule", choices=("tol", "gap"), default="tol")
    s.add_argument("--max-order", type=int, default=None)
    s.add_argument("--directions", choices=("cyclic", "random", "ones"), default="cyclic")
    s.add_argument("--complex", action="store_true", help="skip realification")
    s.add_argument("--no-feedthrough", action="store_true")
    s.add_argument("--conjugate-close", action="store_true")
    s.add_argument("--step", type=float, default=None, help="mark the model discrete with this step")
    s.add_argument("--sv", default=None, help="singular-value CSV")
    s.set_defaults(func=cmd_fit_lti)

    s = sub.add_parser("fit-param", help="two-variable barycentric fit of grid samples")
    s.add_argument("data")
    common(s, order=False)
    s.add_argument("--orders", type=int, nargs=2, default=None, metavar=("R", "Q"))
    s.set_defaults(func=cmd_fit_param)

    s = sub.add_parser("fit-time", help="realization from input/output samples")
    s.add_argument("data")
    common(s, order=False)
    s.add_argument("--order", type=int, required=True, help="realization order n")
    s.add_argument("--reduce", type=int, default=None, help="project to this order")
    s.add_argument("--method", choices=("impulse", "io"), default="impulse")
    s.add_argument("--continuous", action="store_true", help="invert the Backward Euler map")
    s.set_defaults(func=cmd_fit_time)

    s = sub.add_parser("fit-bilinear", help="bilinear Loewner fit from a model or kernel data")
    s.add_argument("data", help="bilinear model JSON or kernel-data JSON")
    common(s)
    s.add_argument("--k", type=int, default=20, help="points per side")
    s.add_argument("--lo", type=float, default=1e-2)
    s.add_argument("--hi", type=float, default=1e2)
    s.add_argument("--axis", choices=("imag", "real"), default="imag")
    s.add_argument("--sv", default=None)
    s.set_defaults(func=cmd_fit_bilinear)

    s = sub.add_parser("lddc", help="data-driven controller from plant samples and a reference model")
    s.add_argument("plant")
    s.add_argument("reference", help="reference-model JSON")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--order", type=int, default=None)
    s.add_argument("--rule", choices=("tol", "gap"), default="tol")
    s.add_argument("--max-order", type=int, default=None)
    s.add_argument("--strict", action="store_true", help="fail instead of dropping points with M = 1")
    s.add_argument("--out", default=None)
    s.add_argument("--report", default=None, help="deviation CSV")
    s.set_defaults(func=cmd_lddc)

    s = sub.add_parser("freqresp", help="tabulate a model on a frequency grid")
    s.add_argument("model")
    s.add_argument("--grid", nargs=4, required=True, metavar=("KIND", "LO", "HI", "N"))
    s.add_argument("--param", type=float, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_freqresp)

    s = sub.add_parser("simulate", help="simulate a model on a time-series input")
    s.add_argument("model")
    s.add_argument("input")
    s.add_argument("--scheme", choices=("rk4", "euler"), default="rk4")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("bench", help="generate benchmark data")
    s.add_argument("name", choices=("transport", "gust", "building", "burgers"))
    s.add_argument("--out", required=True)
    s.add_argument("--xm", type=float, default=1.9592)
    s.add_argument("--points", type=int, default=300)
    s.add_argument("--lo", type=float, default=None)
    s.add_argument("--hi", type=float, default=None)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--nu", type=float, default=0.1)
    s.add_argument("--k", type=int, default=40)
    s.add_argument("--kernels", default=None, help="Burgers: also write kernel-data JSON")
    s.add_argument("--model-out", default=None)
    s.set_defaults(func=cmd_bench)
    return p


_BENCH_BANDS = {"transport": (1e-2, 1e1), "gust": (1e-1, 1e1), "burgers": (1e-2, 1e2)}


def run(args: argparse.Namespace) -> int:
    if args.command == "bench":
        lo, hi = _BENCH_BANDS.get(args.name, (None, None))
        args.lo = lo if args.lo is None else args.lo
        args.hi = hi if args.hi is None else args.hi
    inputs = [getattr(args, k) for k in ("data", "plant", "reference", "model", "input") if hasattr(args, k)]
    JobConfig(args.command, inputs, getattr(args, "tol", 1e-10), getattr(args, "order", None),
              getattr(args, "out", None), args.seed).validate()
    result = args.func(args)
    report = getattr(args, "report", None)
    if args.command == "lddc" or report is None:
        sys.stdout.write(_json(result))
    else:
        _write_text(report, _json(result))
    return 0


def main(argv=None) -> int:
    level = os.environ.get("LOEWNER_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except LoewnerError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"PreconditionError: {exc}", file=sys.stderr)
        return PreconditionError.exit_code


if __name__ == "__main__":
    sys.exit(main())
