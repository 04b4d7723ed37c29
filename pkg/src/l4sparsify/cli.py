"""Command-line interface: ``l4sparsify {gen,learn,verify,ber}``.

Flags may also come from a ``key=value`` file given with ``--config``; flags
on the command line win. Every output records the resolved configuration and
:data:`FORMAT_VERSION`.

Exit codes: 0 success or claim passed, 1 claim failed, 2 usage error,
3 runtime or numerical error.
"""
import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, analysis, cmx, learn, models, simulate
from ._accel import HAVE_NUMBA
from .errors import InvalidArguments, InvalidDimension, InvalidFraction, L4Error
from .matkit import as_unitary, dct2_matrix, dft_matrix, random_unitary
from .objective import ObjectiveSpec, objective

FORMAT_VERSION = 1
EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

log = logging.getLogger("l4sparsify")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def int_range(text):
    """``"a..b"`` (inclusive), ``"a,b,c"`` or ``"a"`` -> list of ints."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def float_grid(text):
    """``"a..b"`` or ``"a..b:step"`` (inclusive) or a comma list of floats."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (float(v) for v in span.split(".."))
            step = float(step) if step else 1.0
            if step <= 0 or hi < lo:
                raise ValueError
            n = int(np.floor((hi - lo) / step + 1e-9)) + 1
            return [lo + j * step for j in range(n)]
        return [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def complex_list(text):
    try:
        return tuple(complex(t.strip().replace(" ", "")) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad gain list {text!r}") from None


def read_config(path):
    """``key=value`` lines; ``#`` starts a comment, dashes in keys map to
    underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(path, sub, command):
    """Install the file's values as defaults of subcommand ``sub``."""
    values = read_config(path)
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    unknown = sorted(set(values) - set(actions))
    if unknown:
        raise UsageError(f"unknown config keys for {command}: {', '.join(unknown)}")
    defaults = {}
    for key, value in values.items():
        action = actions[key]
        if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
            low = value.lower()
            if low not in _TRUE | _FALSE:
                raise UsageError(f"config key {key} expects a boolean, got {value!r}")
            defaults[key] = low in _TRUE
        else:
            # argparse converts string defaults through the action's type
            defaults[key] = value
            action.required = False
    sub.set_defaults(**defaults)
    return values


def _resolved(args, file_values):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg = json.loads(json.dumps(cfg, default=_jsonable))
    return {"format_version": FORMAT_VERSION, "version": __version__, "config": cfg, "config_file": file_values}


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, (tuple, set)):
        return list(v)
    return str(v)


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, default=_jsonable) + "\n")


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise UsageError("--threads must be >= 1")
    if HAVE_NUMBA:
        import numba

        with warnings.catch_warnings():
            # numba probes its threading layers here and may warn about TBB
            warnings.simplefilter("ignore")
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, meta):
    if args.model == "multipath":
        gains = args.gains or (1.0,) * args.l
        if len(gains) != args.l:
            raise InvalidArguments(f"{len(gains)} gains for --l {args.l}")
        s = models.sample_multipath(models.MultipathModel(args.b, gains, args.seed), args.n)
    elif args.model == "sinusoid":
        s = models.sample_sinusoid(models.SinusoidModel(args.b, args.seed), args.n)
    else:
        scene = models.MuMimoScene(b=args.b, u=args.u, paths_per_ue=args.paths, seed=args.seed)
        s = models.channel_columns(models.synth_scene_channels(scene, args.n))
    models.save_samples(s, args.out)
    _write_json(str(args.out) + ".json", {**meta, "shape": [s.dim, s.count]})
    print(f"wrote {args.out}: dim={s.dim} count={s.count} seed={args.seed}")
    return EXIT_OK


def _initial(args, b):
    if args.init == "dft":
        return dft_matrix(b)
    if args.init == "dct":
        return dct2_matrix(b)
    if args.init == "identity":
        return np.eye(b, dtype=np.complex128)
    if args.init == "random":
        return random_unitary(b, models.philox(args.init_seed, 0))
    if args.init_file is None:
        raise InvalidArguments("--init file needs --init-file")
    a = as_unitary(cmx.read_cmx1(args.init_file))
    if a.shape[0] != b:
        raise InvalidDimension(f"init file is {a.shape}, data dimension is {b}")
    return a


def _learn_spec(args):
    sources = [args.data is not None, args.model_l1, args.model is not None]
    if sum(sources) != 1:
        raise InvalidArguments("give exactly one of --data, --model-l1, --model")
    if args.data is not None:
        return ObjectiveSpec.dataset(models.load_samples(args.data))
    if args.b is None:
        raise InvalidArguments("--b is required with a model")
    if args.model_l1:
        return ObjectiveSpec.analytic_l1(args.b)
    if args.model == "multipath":
        gains = args.gains or (1.0,) * args.l
        return ObjectiveSpec.monte_carlo(models.MultipathModel(args.b, gains, args.seed), args.draws)
    return ObjectiveSpec.monte_carlo(models.SinusoidModel(args.b, args.seed), args.draws)


def cmd_learn(args, meta):
    spec = _learn_spec(args)
    init = _initial(args, spec.dim)
    if args.alg == "msp":
        cfg = learn.MspConfig(init=init, max_iters=args.max_iters, step_tol=args.step_tol, obj_tol=args.obj_tol)
        a, trace = learn.msp_run(cfg, spec)
    else:
        cfg = learn.CaConfig(
            init=init,
            max_sweeps=args.max_sweeps,
            sweep_order=args.sweep_order,
            inner_tol=args.inner_tol,
            improvement_tol=args.improvement_tol,
            seed=args.seed,
        )
        a, trace = learn.ca_run(cfg, spec)
    summary = {
        "terminated_by": trace.terminated_by,
        "initial_objective": trace.objective[0],
        "final_objective": objective(a, spec),
        "updates": len(trace.step_norm),
        "objective_spec": spec.describe(),
    }
    if trace.sweep_gain:
        summary["first_sweep_gain"] = trace.sweep_gain[0]
    if args.out:
        cmx.write_cmx1(args.out, a)
        _write_json(str(args.out) + ".json", {**meta, "shape": list(a.shape), "summary": summary})
    if args.trace:
        _write_json(args.trace, {**meta, "summary": summary, "trace": trace.to_dict()})
    print(json.dumps(summary, default=_jsonable))
    return EXIT_OK


def cmd_verify(args, meta):
    if args.claim == "dft-msp":
        report = analysis.verify_dft_msp(
            args.b or [2, 4, 8, 16, 32],
            l=args.l,
            gains=args.gains,
            mode=args.mode,
            n_draws=args.draws,
            seed=args.seed,
            perturb=args.perturb,
        )
    elif args.claim == "dft-ca":
        report = analysis.verify_dft_ca(args.b or list(range(2, 33)))
    else:
        report = analysis.scan_dct(args.b or list(range(3, 33)), grid=args.grid)
    print(report.table())
    if args.json:
        _write_json(args.json, {**meta, "report": report.to_dict()})
    return EXIT_OK if report.passed else EXIT_FAILED


def _transform(args, b):
    if args.transform == "dft":
        return dft_matrix(b)
    if args.transform == "dct":
        return dct2_matrix(b)
    if args.transform == "identity":
        return np.eye(b, dtype=np.complex128)
    if args.transform_file is None:
        raise InvalidArguments("--transform file needs --transform-file")
    return as_unitary(cmx.read_cmx1(args.transform_file))


def _channels(args):
    if args.channels is not None:
        y = cmx.read_cmx1(args.channels)
        if y.shape[0] != args.b or y.shape[1] % args.u:
            raise InvalidDimension(f"channel file {y.shape} is not a stack of ({args.b}, {args.u}) matrices")
        return [y[:, j : j + args.u] for j in range(0, y.shape[1], args.u)]
    scene = models.MuMimoScene(b=args.b, u=args.u, paths_per_ue=args.paths, seed=args.scene_seed)
    return models.synth_scene_channels(scene, args.scenes)


def cmd_ber(args, meta):
    cfg = simulate.UplinkConfig(
        b=args.b,
        u=args.u,
        constellation=args.constellation,
        snr_db_grid=tuple(args.snr),
        trials_per_point=args.trials,
        seed=args.seed,
        csi=args.csi,
    )
    if args.det == "lmmse":
        # a unitary pre-transform leaves LMMSE decisions unchanged; apply it
        # through the LE path with every row kept so the flag is honoured
        t = _transform(args, args.b)
        det = simulate.DetectorKind.lmmse() if args.transform == "identity" else simulate.DetectorKind.le(t, 1.0)
    else:
        det = simulate.DetectorKind.le(_transform(args, args.b), args.density)
    curve = simulate.ber_sweep(cfg, det, _channels(args))
    out = Path(args.out)
    curve.write_csv(out.with_suffix(".csv"))
    curve.write_json(out.with_suffix(".json"), {**meta, "uplink": cfg.to_dict()})
    for s, b, n in zip(curve.snr_db, curve.ber, curve.bit_count):
        print(f"{s:8.2f} dB  ber={b:.6e}  bits={n}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="l4sparsify", description="l4-norm sparsifying transforms")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--config", help="key=value file with defaults for the subcommand's flags")
    p.add_argument("--threads", type=int, help="cap on worker threads for compiled kernels")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a sample file")
    g.add_argument("--model", choices=("multipath", "sinusoid", "scene"), required=True)
    g.add_argument("--b", type=int, default=16)
    g.add_argument("--l", type=int, default=1)
    g.add_argument("--gains", type=complex_list)
    g.add_argument("--n", type=int, default=1000, help="samples (scenes for --model scene)")
    g.add_argument("--u", type=int, default=4)
    g.add_argument("--paths", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    ln = sub.add_parser("learn", help="learn a unitary transform")
    ln.add_argument("--alg", choices=("msp", "ca"), required=True)
    ln.add_argument("--init", choices=("dft", "dct", "identity", "random", "file"), default="dft")
    ln.add_argument("--init-seed", type=int, default=0)
    ln.add_argument("--init-file")
    ln.add_argument("--data", help="cmx1 sample file")
    ln.add_argument("--model-l1", action="store_true", help="exact single-path model")
    ln.add_argument("--model", choices=("multipath", "sinusoid"), help="Monte-Carlo model")
    ln.add_argument("--b", type=int)
    ln.add_argument("--l", type=int, default=1)
    ln.add_argument("--gains", type=complex_list)
    ln.add_argument("--draws", type=int, default=10**5)
    ln.add_argument("--seed", type=int, default=0)
    ln.add_argument("--max-iters", type=int, default=500)
    ln.add_argument("--step-tol", type=float, default=1e-10)
    ln.add_argument("--obj-tol", type=float, default=1e-12)
    ln.add_argument("--max-sweeps", type=int, default=50)
    ln.add_argument("--sweep-order", choices=("lexicographic", "seeded-random"), default="lexicographic")
    ln.add_argument("--inner-tol", type=float, default=1e-10)
    ln.add_argument("--improvement-tol", type=float, default=1e-10)
    ln.add_argument("--out", help="cmx1 file for the learned transform")
    ln.add_argument("--trace", help="JSON file for the learning trace")
    ln.set_defaults(func=cmd_learn)

    v = sub.add_parser("verify", help="check a structural claim numerically")
    v.add_argument("claim", choices=("dft-msp", "dft-ca", "dct-scan"))
    v.add_argument("--b", type=int_range, help="a..b, a,b,c or a")
    v.add_argument("--l", type=int, default=1)
    v.add_argument("--gains", type=complex_list)
    v.add_argument("--mode", choices=("analytic", "mc"), default="analytic")
    v.add_argument("--draws", type=int, default=10**6)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--perturb", type=float, default=0.0)
    v.add_argument("--grid", type=int, default=512)
    v.add_argument("--json", help="write the report here")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("ber", help="uncoded BER sweep")
    b.add_argument("--det", choices=("lmmse", "le"), default="le")
    b.add_argument("--density", type=float, default=0.125)
    b.add_argument("--transform", choices=("identity", "dft", "dct", "file"), default="dft")
    b.add_argument("--transform-file")
    b.add_argument("--channels", help="cmx1 file of stacked (b, u) channel matrices")
    b.add_argument("--scenes", type=int, default=100)
    b.add_argument("--scene-seed", type=int, default=0)
    b.add_argument("--paths", type=int, default=1)
    b.add_argument("--b", type=int, default=32)
    b.add_argument("--u", type=int, default=4)
    b.add_argument("--constellation", choices=("QPSK", "16QAM"), default="QPSK")
    b.add_argument("--snr", type=float_grid, default=float_grid("-10..10:5"))
    b.add_argument("--trials", type=int, default=10000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--csi", choices=("perfect", "shrinkage"), default="perfect")
    b.add_argument("--out", required=True, help="output prefix; writes .csv and .json")
    b.set_defaults(func=cmd_ber)
    return p, {"gen": g, "learn": ln, "verify": v, "ber": b}


def _command_of(argv, subs):
    return next((tok for tok in argv if tok in subs), None)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        file_values = {}
        command = _command_of(argv, subs)
        if known.config and command:
            file_values = _apply_config(known.config, subs[command], command)
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        _set_threads(args.threads)
        meta = _resolved(args, file_values)
        meta["command"] = args.command
        return args.func(args, meta)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, InvalidArguments, InvalidFraction, InvalidDimension) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (L4Error, ArithmeticError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
