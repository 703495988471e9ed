"""Command-line entry point: one subcommand per pipeline stage.

Typical Model A run::

    rssi-fcnn simulate --preset los --seed 0 --out trace.csv
    rssi-fcnn preprocess trace.csv --variant a --out dataset.json
    rssi-fcnn train --dataset dataset.json --variant a --seed 0 --out model.json
    rssi-fcnn evaluate --model model.json --dataset dataset.json --out metrics.json
    rssi-fcnn report metrics.json

Every artifact records the resolved configuration that produced it, either
inline under a ``"config"`` key (JSON files) or in a ``<name>.config.json``
sidecar (CSV files).
"""

import argparse
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .chansim import ChannelParams, SweepSpec, simulate_location_sweep, simulate_readings
from .data import (
    average_locations,
    load_location_csv,
    load_readings,
    load_split,
    make_windows,
    location_split,
    normalizer_from_dict,
    save_split,
    temporal_split,
    with_normalizer,
    write_locations_csv,
    write_trace_csv,
)
from .errors import (
    ConfigError,
    DataError,
    FileAccessError,
    LoadError,
    NumericError,
    RssiError,
    ShapeError,
)
from .evaluation import (
    LeastSquaresAR,
    MovingAverage,
    Persistence,
    Report,
    compare_report,
    run_baseline,
)
from .models import VARIANTS, ModelConfig, evaluate, train
from .nn import init_weights, mlp_specs, network_from_dict, save_network
from .optim import gradient_check

log = logging.getLogger("rssi_fcnn")

# most specific class first
ERROR_CATEGORIES = [
    (FileAccessError, "io"),
    (LoadError, "parse"),
    (ShapeError, "shape"),
    (NumericError, "numeric"),
    (ConfigError, "config"),
    (DataError, "data"),
    (RssiError, "error"),
]

EPILOG = """\
exit codes:
  0  success
  1  other package error
  2  command-line usage error
  3  io       missing or unwritable file
  4  parse    malformed file content (message cites path and line)
  5  shape    mismatched array or window shapes
  6  numeric  non-finite values, divergence, gradient check above tolerance
  7  config   invalid or missing setting (including a missing seed)
  8  data     unusable data (empty or too-short series, empty splits)
"""

BASELINES = ("persistence", "moving_average", "ls_ar")

# applied after --config, so the recorded configuration shows every value used
DEFAULTS = {
    "simulate": dict(preset="los", scenario="stationary", readings=1, distance=3.0),
    "preprocess": dict(variant="a", column="rssi_dbm", train_fraction=0.8,
                       train_locations=8, test_locations=2, override=False),
    "train": dict(variant="a", engine="compiled", normalize=True, override=False),
    "evaluate": dict(baselines=list(BASELINES)),
    "gradcheck": dict(sizes=[10, 10, 10, 1], samples=5, tol=1e-5),
}


# ---------------------------------------------------------------------------
# argument helpers


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    val = str(text).strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _float_list(text):
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        return [float(x) for x in items if str(x).strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    vals = _float_list(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _str_list(text):
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    return [str(x).strip() for x in items if str(x).strip()]


def read_config(path):
    """Load a JSON object or flat ``key=value`` lines (``#`` starts a comment)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileAccessError(f"{path}: {exc.strerror or exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LoadError(f"{path}: invalid JSON ({exc})") from exc
        return {str(k).replace("-", "_"): v for k, v in doc.items()}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise LoadError(f"{path}: line {lineno}: expected key=value, got {raw.strip()!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _coerce(action, value):
    if isinstance(action, argparse.BooleanOptionalAction):
        return _parse_bool(value)
    if action.nargs in ("*", "+") and not isinstance(value, (list, tuple)):
        value = _str_list(value)
    if action.type is not None:
        if isinstance(value, (list, tuple)) and action.type not in (_float_list, _int_list, _str_list):
            value = [action.type(v) for v in value]
        elif isinstance(value, (str, list, tuple)):
            value = action.type(value)
        else:
            value = action.type(str(value))
    if action.choices is not None and value not in action.choices:
        raise ConfigError(f"config {action.dest}={value!r}; choose from {list(action.choices)}")
    return value


def apply_config(parser, args):
    """Fill every option left unset on the command line from ``--config``."""
    if not args.config:
        return args
    values = read_config(args.config)
    actions = {a.dest: a for a in parser._actions}
    for key, val in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            log.debug("config key %r not used by %s", key, args.command)
            continue
        if getattr(args, key) in (None, []):
            try:
                setattr(args, key, _coerce(action, val))
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise ConfigError(f"{args.config}: {key}: {exc}") from None
    return args


def apply_defaults(args):
    for key, val in DEFAULTS.get(args.command, {}).items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    if args.command == "simulate":
        sweep = args.scenario == "sweep"
        if args.samples is None:
            args.samples = 250 if sweep else 10_000
        if sweep and not args.distances:
            args.distances = list(SweepSpec().distances_m)
    return args


def _require_seed(args):
    if args.seed is None:
        raise ConfigError("a seed is required: pass --seed or set seed in the config file")
    return args.seed


def _resolved(args, skip=("func", "verbose", "config")):
    out = {k: v for k, v in vars(args).items() if k not in skip}
    out["rssi_fcnn_version"] = __version__
    return out


def _sha256(path):
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise FileAccessError(f"{path}: {exc.strerror or exc}") from exc


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise FileAccessError(f"{path}: {exc.strerror or exc}") from exc


def sidecar(path, kind):
    """``run/trace.csv`` -> ``run/trace.<kind>.json``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.{kind}.json")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    seed = _require_seed(args)
    overrides = {
        k: v
        for k, v in dict(
            tx_power_dbm=args.tx_power,
            pl0_dbm=args.pl0,
            d0_m=args.d0,
            exponent=args.exponent,
            shadow_sigma_db=args.shadow_sigma,
            shadow_rho=args.shadow_rho,
        ).items()
        if v is not None
    }
    params = ChannelParams.preset(args.preset, seed=seed, **overrides)
    out = Path(args.out)
    files = []
    if args.scenario == "sweep":
        spec = SweepSpec(tuple(args.distances), samples_per_location=args.samples)
        write_locations_csv(simulate_location_sweep(params, spec), out)
        files.append(str(out))
    else:
        readings = simulate_readings(params, args.readings, args.distance, args.samples)
        if len(readings) == 1:
            write_trace_csv(readings[0], out)
            files.append(str(out))
        else:
            for k, trace in enumerate(readings, start=1):
                path = out.with_name(f"{out.stem}_r{k}{out.suffix}")
                write_trace_csv(trace, path)
                files.append(str(path))
    resolved = _resolved(args)
    resolved["channel"] = {k: getattr(params, k) for k in params.__dataclass_fields__}
    resolved["channel"]["condition"] = params.condition.value
    _write_json(sidecar(out, "config"), {"config": resolved, "files": files})
    for f in files:
        print(f)
    return 0


def _model_config(args):
    hyper_kw = {k: getattr(args, k) for k in ("eta", "beta1", "beta2", "epsilon")
                if getattr(args, k, None) is not None}
    variant = args.variant.upper()
    return ModelConfig(
        variant=variant,
        window=args.window,
        epochs=args.epochs,
        seed=args.seed,
        hyper=replace(ModelConfig(variant, seed=args.seed).hyper, **hyper_kw),
        normalize=args.normalize,
        override=args.override,
    )


def cmd_preprocess(args):
    if not args.inputs:
        raise ConfigError("preprocess needs at least one input CSV")
    variant = args.variant.upper()
    window = args.window if args.window is not None else VARIANTS[variant]["window"]
    if window != VARIANTS[variant]["window"] and not args.override:
        raise ConfigError(
            f"variant {variant} fixes window={VARIANTS[variant]['window']}; got {window} "
            "(pass --override to change it)"
        )
    column = args.column
    if variant == "B":
        if len(args.inputs) != 1:
            raise ConfigError("variant B takes exactly one location CSV")
        means = average_locations(load_location_csv(args.inputs[0], column))
        log.info("%d location means", len(means))
        split = location_split(make_windows(means, window), args.train_locations, args.test_locations)
    else:
        trace = load_readings(args.inputs, column)
        split = temporal_split(make_windows(trace, window), args.train_fraction)
    resolved = _resolved(args)
    resolved["window"] = window
    resolved["input_sha256"] = {str(p): _sha256(p) for p in args.inputs}
    save_split(split, args.out, extra={"config": resolved})
    print(f"{args.out}: {len(split.train)} train pairs, {len(split.test)} test pairs, window {window}")
    return 0


def cmd_train(args):
    _require_seed(args)
    if not args.dataset:
        raise ConfigError("train needs --dataset")
    split = load_split(args.dataset)
    cfg = _model_config(args)
    split = with_normalizer(split) if cfg.normalize else split
    net, history = train(cfg, split, engine=args.engine)
    norm = split.normalizer
    resolved = _resolved(args)
    resolved["model"] = cfg.to_dict()
    resolved["dataset_sha256"] = _sha256(args.dataset)
    save_network(net, args.out, extra={
        "normalizer": None if norm is None else {"mean": norm.mean, "std": norm.std},
        "config": resolved,
    })
    _write_json(sidecar(args.out, "history"), {"config": resolved, **history.to_dict()})
    first = history.train_mse[0] if history.train_mse else float("nan")
    last = history.train_mse[-1] if history.train_mse else float("nan")
    print(f"{args.out}: {cfg.epochs} epochs, train MSE {first:.6g} -> {last:.6g} dBm^2, "
          f"test MSE {history.test_mse} dBm^2, {history.train_seconds:.2f} s")
    return 0


def _baseline(name, window):
    if name == "persistence":
        return Persistence()
    if name == "moving_average":
        return MovingAverage(window)
    if name == "ls_ar":
        return LeastSquaresAR(window)
    raise ConfigError(f"unknown baseline {name!r}; choose from {list(BASELINES)}")


def cmd_evaluate(args):
    if not args.model or not args.dataset:
        raise ConfigError("evaluate needs --model and --dataset")
    doc = _read_json(args.model)
    net = network_from_dict(doc)
    model_cfg = (doc.get("config") or {}).get("model", {})
    split = load_split(args.dataset)
    split = replace(split, normalizer=normalizer_from_dict(doc.get("normalizer")))

    label = args.label or f"fcnn_{str(model_cfg.get('variant', 'model')).lower()}"
    m = evaluate(net, split)
    hist_path = sidecar(args.model, "history")
    if hist_path.is_file():
        m.train_seconds = float(_read_json(hist_path).get("train_seconds", 0.0))
    entries = [(label, m)]
    for name in args.baselines:
        kind = _baseline(name, split.window)
        entries.append((kind.label, run_baseline(kind, split)))
    report = compare_report(entries)

    resolved = _resolved(args)
    resolved["model_config"] = model_cfg
    resolved["model_sha256"] = _sha256(args.model)
    resolved["dataset_sha256"] = _sha256(args.dataset)
    # scores only: wall-clock timings go to a sidecar so this file is reproducible
    _write_json(args.out, {
        "entries": [{"label": lab, **mm.scores()} for lab, mm in entries],
        "config": resolved,
    })
    _write_json(sidecar(args.out, "timing"), {
        "entries": [{"label": lab, **mm.timings()} for lab, mm in entries],
    })
    sys.stdout.write(report.to_text())
    return 0


def cmd_gradcheck(args):
    seed = _require_seed(args)
    sizes, tol = args.sizes, args.tol
    init_seq, draw_seq = np.random.SeedSequence(seed).spawn(2)
    net = init_weights(mlp_specs(sizes), int(init_seq.generate_state(1)[0]))
    res = gradient_check(net, np.random.default_rng(draw_seq), n_samples=args.samples)
    print(f"network {'-'.join(map(str, sizes))}: max relative error {res.max_rel_error:.3e} "
          f"(max abs {res.max_abs_error:.3e}; {res.n_checked} gradients, "
          f"{res.n_skipped} draws skipped near the kink)")
    if args.out:
        _write_json(args.out, {
            "max_rel_error": res.max_rel_error,
            "max_abs_error": res.max_abs_error,
            "n_checked": res.n_checked,
            "n_skipped": res.n_skipped,
            "per_sample": res.per_sample,
            "config": _resolved(args),
        })
    if not res.max_rel_error <= tol:
        raise NumericError(f"gradient check failed: {res.max_rel_error:.3e} > {tol:g}")
    return 0


def _load_metrics_file(path):
    doc = _read_json(path)
    report = Report.from_dict(doc)
    timing = sidecar(path, "timing")
    if timing.is_file():
        times = {e["label"]: e for e in _read_json(timing).get("entries", [])}
        for label, m in report.entries:
            t = times.get(label, {})
            m.train_seconds = float(t.get("train_seconds", 0.0))
            m.test_seconds = float(t.get("test_seconds", 0.0))
    return report.entries


def cmd_report(args):
    if not args.inputs:
        raise ConfigError("report needs at least one metrics JSON")
    entries = []
    for path in args.inputs:
        rows = _load_metrics_file(path)
        if len(args.inputs) > 1:
            rows = [(f"{Path(path).stem}/{label}", m) for label, m in rows]
        entries += rows
    report = compare_report(entries)
    sys.stdout.write(report.to_text())
    if args.out:
        Path(args.out).write_text(report.to_json())
        Path(args.out).with_suffix(".txt").write_text(report.to_text())
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON object or key=value file; flags override it")
    common.add_argument("--seed", type=int, help="random seed (required where randomness is used)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="rssi-fcnn",
        description="FCNN RSSI channel estimators: simulate, preprocess, train, evaluate.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                           epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=func)
        return p

    def model_flags(p):
        p.add_argument("--variant", type=str.lower, choices=["a", "b"])
        p.add_argument("--window", type=int)
        p.add_argument("--override", action="store_true", default=None,
                       help="allow window/epochs that differ from the variant's fixed values")

    p = add("simulate", cmd_simulate, "write synthetic RSSI traces as CSV")
    p.add_argument("--preset", type=str.lower, choices=["los", "nlos"])
    p.add_argument("--scenario", choices=["stationary", "sweep"])
    p.add_argument("--samples", type=int,
                   help="samples per trace (stationary, default 10000) or per location (sweep, default 250)")
    p.add_argument("--readings", type=int, help="independent stationary captures (default 1)")
    p.add_argument("--distance", type=float, help="stationary link distance in m (default 3.0)")
    p.add_argument("--distances", type=_float_list, help="comma-separated sweep distances in m")
    p.add_argument("--tx-power", type=float, help="transmit power, dBm")
    p.add_argument("--pl0", type=float, help="path loss at the reference distance, dB")
    p.add_argument("--d0", type=float, help="reference distance, m")
    p.add_argument("--exponent", type=float, help="path-loss exponent")
    p.add_argument("--shadow-sigma", type=float, help="shadowing standard deviation, dB")
    p.add_argument("--shadow-rho", type=float, help="lag-1 shadowing correlation")
    p.add_argument("--out", required=True)

    p = add("preprocess", cmd_preprocess, "average, window and split CSV traces into a dataset JSON")
    p.add_argument("inputs", nargs="*", help="reading CSVs (variant a) or one location CSV (variant b)")
    model_flags(p)
    p.add_argument("--column", help="RSSI column name (default rssi_dbm)")
    p.add_argument("--train-fraction", type=float, help="variant a train share (default 0.8)")
    p.add_argument("--train-locations", type=int, help="variant b (default 8)")
    p.add_argument("--test-locations", type=int, help="variant b (default 2)")
    p.add_argument("--out", required=True)

    p = add("train", cmd_train, "train a model; writes the network and a history JSON")
    p.add_argument("--dataset")
    model_flags(p)
    p.add_argument("--epochs", type=int)
    p.add_argument("--eta", type=float)
    p.add_argument("--beta1", type=float)
    p.add_argument("--beta2", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None,
                   help="z-score inputs and targets with train statistics (default on)")
    p.add_argument("--engine", choices=["compiled", "numpy"])
    p.add_argument("--out", required=True)

    p = add("evaluate", cmd_evaluate, "score a trained model and baselines on the test pairs")
    p.add_argument("--model")
    p.add_argument("--dataset")
    p.add_argument("--label")
    p.add_argument("--baselines", type=_str_list,
                   help=f"comma-separated subset of {','.join(BASELINES)} (default all)")
    p.add_argument("--out", required=True)

    p = add("gradcheck", cmd_gradcheck, "compare backprop with finite differences")
    p.add_argument("--sizes", type=_int_list, help="layer sizes (default 10,10,10,1)")
    p.add_argument("--samples", type=int, help="random inputs to check (default 5)")
    p.add_argument("--tol", type=float, help="maximum relative error (default 1e-5)")
    p.add_argument("--out")

    p = add("report", cmd_report, "merge metrics JSON files into one comparison table")
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out")
    return parser


def _category(exc):
    for cls, name in ERROR_CATEGORIES:
        if isinstance(exc, cls):
            return name
    return "error"


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        apply_config(parser._subparsers._group_actions[0].choices[args.command], args)
        apply_defaults(args)
        return args.func(args)
    except RssiError as exc:
        print(f"rssi-fcnn: {_category(exc)} error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"rssi-fcnn: io error: {exc}", file=sys.stderr)
        return FileAccessError.exit_code


if __name__ == "__main__":
    sys.exit(main())
