"""Command-line front end: ``tssnet <subcommand> --out DIR [--config FILE] [--set key=value ...]``.

Exit status: 0 success, 1 usage error, 2 runtime error. Data goes to files in
the output directory (and report rows to stdout); diagnostics go to stderr.
"""
import argparse
import logging
import sys
from pathlib import Path


from .data import SeriesMatrix, acf, export_feature_maps, load_csv, save_acf, save_csv, write_csv
from .errors import InvalidConfig, TssNetError
from .metrics import REPORT_COLUMNS, evaluate_model
from .pipeline import RunConfig, build_model, fit, load_series, prepare, run_sweep
from .training import (TrainConfig, grad_check, hyper_search, load_checkpoint, save_checkpoint,
                       save_trial_log)

log = logging.getLogger("tssnet")

SUBCOMMANDS = {
    "synth": "write the configured synthetic series (series.csv)",
    "acf": "autocorrelation of every feature (acf_<feature>.csv)",
    "train": "fit the configured model (checkpoint.json, history.csv)",
    "evaluate": "score a checkpoint on a split (report.csv, row on stdout)",
    "predict": "forecast the next horizon after the series end or --input (predictions.csv)",
    "featuremap": "export post-conv1 activation maps (featuremap_k*.csv/.pgm)",
    "search": "random hyperparameter search (trials.csv, checkpoint.json)",
    "sweep": "input length x horizon grid (sweep.csv)",
    "gradcheck": "finite-difference gradient audit (gradcheck.csv)",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def make_parser():
    parser = _Parser(prog="tssnet", description="Temporal-slicing stack forecasting toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    for name, help_text in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        if name in ("evaluate", "predict", "featuremap", "gradcheck"):
            p.add_argument("--checkpoint", help="checkpoint to load (default: OUT/checkpoint.json)")
        if name == "predict":
            p.add_argument("--input", help="CSV whose last input_length rows are the model input")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _load_config(args):
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    try:
        return RunConfig.parse(text, args.set)
    except InvalidConfig as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc


def _checkpoint_path(args, out):
    return Path(args.checkpoint) if getattr(args, "checkpoint", None) else out / "checkpoint.json"


def cmd_synth(cfg, args, out, echo):
    save_csv(load_series(cfg), out / "series.csv", echo)


def cmd_acf(cfg, args, out, echo):
    series = load_series(cfg)
    for name, row in zip(series.names, series.values):
        lag = min(cfg.acf_max_lag, series.T - 1)
        save_acf(acf(row, lag), out / f"acf_{_safe(name)}.csv", echo)


def cmd_train(cfg, args, out, echo):
    data = prepare(cfg, load_series(cfg))
    model, history = fit(cfg, data)
    save_checkpoint(model, out / "checkpoint.json", cfg.seed, data.scaler,
                    {"config": cfg.lines()})
    history.save(out / "history.csv", echo)
    best = history.best
    if best is not None:
        log.info("best epoch %d: valid corr %r", best["epoch"], best["valid_corr"])


def _load(args, out):
    model, meta = load_checkpoint(_checkpoint_path(args, out), with_meta=True)
    return model, meta["scaler"]


def _prepared_for(cfg, model, scaler):
    return prepare(cfg, load_series(cfg), model.T, model.h, scaler)


def cmd_evaluate(cfg, args, out, echo):
    model, scaler = _load(args, out)
    data = _prepared_for(cfg, model, scaler)
    report = evaluate_model(model, data.split(cfg.split), cfg.corr_variant, cfg.dataset,
                            cfg.lines())
    write_csv(out / "report.csv", REPORT_COLUMNS, [report.row()], echo)
    print(report.csv_row())


def cmd_predict(cfg, args, out, echo):
    model, scaler = _load(args, out)
    series = load_csv(args.input, cfg.has_header, cfg.delimiter) if args.input else load_series(cfg)
    if series.m != model.m or series.T < model.T:
        raise InvalidConfig(f"need at least {model.T} steps of {model.m} features")
    x = series.values[:, -model.T:]
    if scaler is not None:
        x = scaler.transform(x)
    yhat = model.forward(x)
    if scaler is not None:
        yhat = scaler.inverse(yhat)
    save_csv(SeriesMatrix(yhat, list(series.names)), out / "predictions.csv", echo)


def cmd_featuremap(cfg, args, out, echo):
    path = _checkpoint_path(args, out)
    if getattr(args, "checkpoint", None) or path.exists():
        model, scaler = _load(args, out)
        data = _prepared_for(cfg, model, scaler)
    else:
        data = prepare(cfg, load_series(cfg))
        model, _ = fit(cfg, data)
    windows = data.split(cfg.split)
    maps = model.forward(windows.inputs[cfg.featuremap_sample], capture=True)[1]
    export_feature_maps(maps, out, "featuremap", echo)


def cmd_search(cfg, args, out, echo):
    series = load_series(cfg)
    data = prepare(cfg, series)
    base = {"m": series.m, "T": cfg.input_length, "h": cfg.horizon, "k": cfg.kernel_width,
            "kernel_height_mode": cfg.kernel_height_mode, "kernel_height": cfg.kernel_height,
            "hidden_multiplier": cfg.hidden_multiplier}
    best, model, results = hyper_search(cfg.search_space(), data.train, data.valid, base,
                                        cfg.transform_config(), cfg.train_config(), cfg.jobs)
    save_trial_log(results, out / "trials.csv", echo)
    save_checkpoint(model, out / "checkpoint.json", best.trial, data.scaler,
                    {"config": cfg.lines(), "trial": best.trial})
    print(",".join(str(v) for v in best.row()))


def cmd_sweep(cfg, args, out, echo):
    reports = run_sweep(cfg, load_series(cfg), cfg.jobs)
    write_csv(out / "sweep.csv", REPORT_COLUMNS, [r.row() for r in reports], echo)
    for r in reports:
        print(r.csv_row())


def cmd_gradcheck(cfg, args, out, echo):
    path = _checkpoint_path(args, out)
    if getattr(args, "checkpoint", None) or path.exists():
        model, scaler = _load(args, out)
        data = _prepared_for(cfg, model, scaler)
    else:
        data = prepare(cfg, load_series(cfg))
        model = build_model(cfg, data.series.m)
    sample = (data.train.inputs[0], data.train.targets[0])
    report = grad_check(model, sample, cfg.gradcheck_eps, seed=cfg.seed)
    write_csv(out / "gradcheck.csv", ["parameter", "checked", "max_rel_err"], report.rows(), echo)
    print(f"max_rel_err,{report.max_rel_err!r}")


def _safe(name):
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


COMMANDS = {name: globals()[f"cmd_{name}"] for name in SUBCOMMANDS}


def run(argv=None):
    parser = make_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(f"missing subcommand\n{parser.format_usage()}")
        cfg = _load_config(args)
    except UsageError as exc:
        print(f"tssnet: {exc}", file=sys.stderr)
        print("subcommands: " + ", ".join(SUBCOMMANDS), file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args, out, cfg.lines())
    except (TssNetError, OSError, ValueError) as exc:
        print(f"tssnet {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
