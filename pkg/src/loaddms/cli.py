"""Command line interface.

Subcommands mirror the workflow: ``synth`` writes a synthetic dataset,
``train`` fits the model pool, ``forecast`` dumps the per-model forecast
matrix, ``dms`` runs the selection walk, ``evaluate`` scores it, and
``report`` writes every artifact in one go.

Exit codes: 0 on success, 1 on data or training failures, 2 on bad usage or
configuration.
"""

import argparse
import dataclasses
import logging
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .backtest import dms_forecast_csv, learning_curves_csv, run_dms, \
    selections_csv, stitched_forecasts
from .config import RunConfig, default_config, load_config
from .dataio import build_features, generate_synthetic, load_dataset, \
    write_dataset
from .errors import ConfigError, LoadDmsError
from .metrics import evaluate_run, mape, rank_counts_csv
from .pool import forecast_matrix, load_pool, save_pool, train_pool
from .pool.pool import forecasts_csv
from .qlearn import REWARD_CODES

log = logging.getLogger(__name__)


def _add_common(sp, models=False, data=False):
    sp.add_argument("--config", metavar="YAML",
                    help="run configuration file (defaults apply if omitted)")
    sp.add_argument("--seed", type=int, default=None,
                    help="override the seed this command uses")
    sp.add_argument("--out", required=True, metavar="PATH",
                    help="output file or directory")
    sp.add_argument("--no-header-timestamp", action="store_true",
                    help="omit the generation timestamp from output headers")
    if data:
        sp.add_argument("--data", metavar="CSV",
                        help="dataset path (overrides data.path in config)")
    if models:
        sp.add_argument("--models", required=True, metavar="DIR",
                        help="directory with a trained model pool")
    if models or data:
        sp.add_argument("--reward", choices=sorted(REWARD_CODES),
                        default=None,
                        help="override the agent reward strategy")


def build_parser():
    p = argparse.ArgumentParser(
        prog="loaddms",
        description="Short-term load forecasting with Q-learning based "
                    "dynamic model selection.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="count", default=0,
                   help="-v for info, -vv for debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="generate a synthetic hourly dataset")
    _add_common(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("train", help="train the forecasting model pool")
    _add_common(sp, data=True)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("forecast",
                        help="write the per-model test-split forecasts")
    _add_common(sp, models=True, data=True)
    sp.set_defaults(func=cmd_forecast)

    sp = sub.add_parser("dms",
                        help="run the dynamic selection walk over the test "
                             "split")
    _add_common(sp, models=True, data=True)
    sp.set_defaults(func=cmd_dms)

    sp = sub.add_parser("evaluate",
                        help="score the pool and the selection walk")
    _add_common(sp, models=True, data=True)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("report", help="write all artifacts for one run")
    _add_common(sp, models=True, data=True)
    sp.set_defaults(func=cmd_report)
    return p


def _config(args):
    return load_config(args.config) if args.config else default_config()


def _stamp(args):
    if args.no_header_timestamp:
        return None
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _dataset(cfg, args):
    path = getattr(args, "data", None) or cfg.data_path
    if not path:
        raise ConfigError("no dataset given: pass --data or set data.path")
    return load_dataset(path)


def _features(cfg, args):
    return build_features(_dataset(cfg, args), cfg.lags, cfg.split)


def _apply_reward(cfg, args):
    if getattr(args, "reward", None):
        cfg = cfg.with_reward(args.reward)
    return cfg


def _capacity(cfg, dataset):
    """Normalizer for nMAE: the configured value, else the dataset peak."""
    return cfg.capacity if cfg.capacity else float(dataset.load.max())


def _run_walk(cfg, args):
    cfg = _apply_reward(cfg, args)
    dataset = _dataset(cfg, args)
    _, fm_valid, fm_test = build_features(dataset, cfg.lags, cfg.split)
    pool = load_pool(args.models)
    fmat = stitched_forecasts(pool, fm_valid, fm_test, cfg.window.window)
    seed = args.seed if args.seed is not None else cfg.dms_seed
    result = run_dms(fmat, cfg.window, base_seed=seed,
                     warmup=cfg.window.window)
    return cfg, dataset, fmat, result


def cmd_synth(args):
    cfg = _config(args)
    synth = cfg.synth
    if args.seed is not None:
        synth = dataclasses.replace(synth, seed=args.seed)
    ds = generate_synthetic(synth)
    write_dataset(args.out, ds)
    print("wrote %d hourly rows to %s" % (len(ds.load), args.out))
    return 0


def cmd_train(args):
    cfg = _config(args)
    fm_train, fm_valid, _ = _features(cfg, args)
    seed = args.seed if args.seed is not None else cfg.pool_seed
    pool = train_pool(fm_train, fm_valid, specs=cfg.pool_specs,
                      base_seed=seed)
    save_pool(pool, args.out)
    fm = forecast_matrix(pool, fm_valid)
    val_path = os.path.join(args.out, "validation.csv")
    with open(val_path, "w") as fh:
        stamp = _stamp(args)
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        fh.write("model,family,variant,val_mape_pct\n")
        for j, spec in enumerate(pool.specs):
            fh.write("%s,%s,%s,%.2f\n" % (spec.model_id, spec.family,
                                          spec.variant,
                                          mape(fm.y, fm.preds[:, j])))
    print("trained %d models on %d rows; saved to %s"
          % (len(pool.specs), len(fm_train), args.out))
    return 0


def cmd_forecast(args):
    cfg = _config(args)
    _, _, fm_test = _features(cfg, args)
    pool = load_pool(args.models)
    fmat = forecast_matrix(pool, fm_test)
    forecasts_csv(args.out, fmat, stamp=_stamp(args))
    print("wrote %d forecast rows (%d models) to %s"
          % (len(fmat), fmat.n_models, args.out))
    return 0


def cmd_dms(args):
    cfg, _, _, result = _run_walk(_config(args), args)
    os.makedirs(args.out, exist_ok=True)
    stamp = _stamp(args)
    path = os.path.join(args.out, "selections.csv")
    selections_csv(path, result, stamp=stamp)
    dms_forecast_csv(os.path.join(args.out, "dms_forecast.csv"), result,
                     stamp=stamp)
    learning_curves_csv(os.path.join(args.out, "learning_curves.csv"),
                        result, stamp=stamp)
    print("dms: %d steps, %d agents, reward=%s -> %s"
          % (len(result), result.n_agents, cfg.window.agent.reward, path))
    return 0


def cmd_evaluate(args):
    cfg, dataset, fmat, result = _run_walk(_config(args), args)
    report = evaluate_run(fmat, result, capacity=_capacity(cfg, dataset))
    report.to_csv(args.out, stamp=_stamp(args))
    print(report.to_text())
    return 0


def cmd_report(args):
    cfg, dataset, fmat, result = _run_walk(_config(args), args)
    report = evaluate_run(fmat, result, capacity=_capacity(cfg, dataset))
    os.makedirs(args.out, exist_ok=True)
    stamp = _stamp(args)
    forecasts_csv(os.path.join(args.out, "forecasts.csv"), fmat, stamp=stamp)
    selections_csv(os.path.join(args.out, "selections.csv"), result,
                   stamp=stamp)
    dms_forecast_csv(os.path.join(args.out, "dms_forecast.csv"), result,
                     stamp=stamp)
    learning_curves_csv(os.path.join(args.out, "learning_curves.csv"),
                        result, stamp=stamp)
    report.to_csv(os.path.join(args.out, "evaluation.csv"), stamp=stamp)
    rank_counts_csv(os.path.join(args.out, "ranks.csv"), report.rank_counts,
                    report.model_ids, stamp=stamp)
    with open(os.path.join(args.out, "summary.txt"), "w") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        fh.write("reward strategy      %s\n" % cfg.window.agent.reward)
        fh.write("window/horizon/top_k %d/%d/%d\n"
                 % (cfg.window.window, cfg.window.horizon, cfg.window.top_k))
        fh.write("max |Q| observed     %.4f\n\n" % result.max_abs_q)
        fh.write(report.to_text())
    print("report written to %s (dms mape %.3f%%)"
          % (args.out, report.dms_mape))
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = (logging.WARNING, logging.INFO,
             logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except LoadDmsError as exc:
        log.error("%s", exc)
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
