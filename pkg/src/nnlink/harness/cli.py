"""Command line entry point (``nnlink``).

Every subcommand writes CSV to ``--out`` (stdout when omitted).  ``--config``
reads a flat ``key = value`` file; explicit flags override its values.
Errors print a one-line diagnostic to stderr and exit with status 2.
"""

from __future__ import annotations

import argparse
import sys

from ..autoencoder import AeTrainConfig, extract_constellation, train_e2e
from ..channel import ebn0_to_esn0
from ..errors import NNLinkError
from ..modem import bits_per_symbol, build_constellation
from ..nn_demapper import DEFAULT_TRAIN_EBN0_DB, DemapperTrainConfig, train_demapper
from ..theory import ber_gray_approx, ber_paper, ser_mqam
from .figures import ExperimentConfig, run_figure
from .io import read_config, records_csv, render_csv, write_text
from .persistence import load_model, save_model
from .sweep import SweepSpec, mc_sweep, snr_grid

EXIT_ERROR = 2
EXIT_GATE_FAILED = 3


def _common(p, *, sweep=True, model=False, trials=1_000_000):
    p.add_argument("--mod-order", type=int, help="modulation order M")
    if sweep:
        p.add_argument("--snr-start", type=float, help="first Eb/N0 point in dB")
        p.add_argument("--snr-stop", type=float, help="last Eb/N0 point in dB (inclusive)")
        p.add_argument("--snr-step", type=float, help="Eb/N0 step in dB")
        p.add_argument("--trials", type=int,
                       help=f"bits (BER) or messages (SER) per point, default {trials}")
    p.add_argument("--seed", type=int, help="master seed")
    if model:
        p.add_argument("--model", help="model bundle path")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--workers", type=int, help="threads per sweep point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnlink", description="Neural and classical demapping over AWGN.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constellation", help="list constellation points")
    _common(p, sweep=False, model=True)
    p.add_argument("--learned", action="store_true",
                   help="list the learned codebook of the autoencoder in --model")

    p = sub.add_parser("theory", help="closed-form SER and both BER variants")
    _common(p)

    p = sub.add_parser("sweep-app", help="Monte Carlo sweep of the APP demapper")
    _common(p)
    p.add_argument("--metric", choices=("ber", "ser"), help="default ber")

    p = sub.add_parser("train-demapper", help="train a neural demapper and save it")
    _common(p, sweep=False, model=True)
    p.add_argument("--train-snr", type=float, help="training Eb/N0 in dB")
    p.add_argument("--iterations", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int, help="symbols per step")

    p = sub.add_parser("eval-demapper", help="BER sweep of a saved neural demapper")
    _common(p, model=True)

    p = sub.add_parser("train-ae", help="train an autoencoder transceiver and save it")
    _common(p, sweep=False, model=True)
    p.add_argument("--variant", choices=("cnn", "dnn"))
    p.add_argument("--train-snr", type=float, help="training Eb/N0 in dB")
    p.add_argument("--iterations", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--batch-size", type=int, help="messages per step")

    p = sub.add_parser("eval-ae", help="SER sweep of a saved autoencoder")
    _common(p, model=True)

    for name in ("fig1", "fig2", "fig3"):
        p = sub.add_parser(name, help=f"reproduce {name} (CSV plus pass/fail summary)")
        _common(p)
        p.add_argument("--seeds", help="comma separated seed list (overrides --seed)")
        p.add_argument("--iterations", type=int, help="training iterations per model")
        p.add_argument("--summary", help="write the summary here as well as to stderr")
        p.add_argument("--strict", action="store_true",
                       help=f"exit {EXIT_GATE_FAILED} when a gate fails")
    return parser


def _settings(args) -> dict:
    """Config file values overlaid with explicitly given flags (flags win)."""
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key, val in vars(args).items():
        if val is not None and key not in ("command", "config"):
            values[key] = val
    return values


def _get(values, key, cast, default=None):
    val = values.get(key, default)
    return None if val is None else cast(val)


def _grid(values, default_stop):
    return snr_grid(_get(values, "snr_start", float, 0.0),
                    _get(values, "snr_stop", float, default_stop),
                    _get(values, "snr_step", float, 1.0))


def _order(values, default=16):
    return _get(values, "mod_order", int, default)


def _need_model(values):
    path = values.get("model")
    if not path:
        raise NNLinkError("--model is required")
    return path


def cmd_constellation(values):
    if values.get("learned"):
        lc = extract_constellation(load_model(_need_model(values)))
        return render_csv(list(lc.to_csv_rows()), ("m", "label", "re", "im"))
    c = build_constellation(_order(values))
    return render_csv(list(c.to_csv_rows()), ("m", "label", "re", "im"))


def cmd_theory(values):
    M = _order(values)
    k = bits_per_symbol(M)
    rows = []
    for snr in _grid(values, 20.0):
        ser = float(ser_mqam(ebn0_to_esn0(snr, k), M))
        rows.append((snr, M, ser, float(ber_paper(ser, M)), float(ber_gray_approx(ser, M))))
    return render_csv(rows, ("snr_db", "M", "ser", "ber_paper", "ber_gray"))


def _spec(values, system, stop):
    return SweepSpec(system, _order(values), _grid(values, stop),
                     _get(values, "trials", int, 1_000_000), _get(values, "seed", int, 0),
                     values.get("model"), values.get("metric"),
                     workers=_get(values, "workers", int, 1))


def cmd_sweep_app(values):
    return records_csv(mc_sweep(_spec(values, "app", 10.0)))


def cmd_train_demapper(values):
    M = _order(values)
    config = DemapperTrainConfig(_get(values, "train_snr", float, DEFAULT_TRAIN_EBN0_DB[M]),
                                 seed=_get(values, "seed", int, 0))
    for key, attr, cast in (("iterations", "iterations", int),
                            ("learning_rate", "learning_rate", float),
                            ("batch_size", "batch_size", int)):
        if key in values:
            setattr(config, attr, cast(values[key]))
    model, losses = train_demapper(config, build_constellation(M))
    save_model(_need_model(values), model)
    return render_csv([(i, float(v)) for i, v in enumerate(losses)], ("iteration", "loss"))


def cmd_eval_demapper(values):
    model = load_model(_need_model(values))
    values.setdefault("mod_order", getattr(model, "order", None))
    return records_csv(mc_sweep(_spec(values, "nn_demapper", 10.0), model))


def cmd_train_ae(values):
    kw = {"order": _order(values), "seed": _get(values, "seed", int, 0)}
    for key, attr, cast in (("variant", "variant", str), ("train_snr", "train_ebn0_db", float),
                            ("iterations", "iterations", int),
                            ("learning_rate", "learning_rate", float),
                            ("batch_size", "batch_size", int)):
        if key in values:
            kw[attr] = cast(values[key])
    ae, losses = train_e2e(AeTrainConfig(**kw))
    save_model(_need_model(values), ae)
    return render_csv([(i, float(v)) for i, v in enumerate(losses)], ("iteration", "loss"))


def cmd_eval_ae(values):
    model = load_model(_need_model(values))
    values.setdefault("mod_order", getattr(model, "order", None))
    system = f"ae_{getattr(model, 'variant', 'cnn')}"
    return records_csv(mc_sweep(_spec(values, system, 14.0), model))


def _figure_config(figure, values):
    mapping = {}
    for key, val in values.items():
        if key in ("out", "summary", "strict", "model", "metric", "learned"):
            continue
        if key == "mod_order":
            key = "orders"
        elif key == "seed":
            if "seeds" in values:
                continue
            key = "seeds"
        mapping[key] = val
    return ExperimentConfig.from_mapping(figure, mapping)


def cmd_figure(figure, values):
    report = run_figure(_figure_config(figure, values))
    summary = report.summary()
    sys.stderr.write(summary)
    if values.get("summary"):
        write_text(summary, values["summary"])
    return report.csv(), report.passed


COMMANDS = {
    "constellation": cmd_constellation,
    "theory": cmd_theory,
    "sweep-app": cmd_sweep_app,
    "train-demapper": cmd_train_demapper,
    "eval-demapper": cmd_eval_demapper,
    "train-ae": cmd_train_ae,
    "eval-ae": cmd_eval_ae,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = _settings(args)
        if args.command.startswith("fig"):
            text, passed = cmd_figure(args.command, values)
        else:
            text, passed = COMMANDS[args.command](values), True
        write_text(text, values.get("out"))
    except (NNLinkError, OSError, ValueError, KeyError) as exc:
        print(f"nnlink {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if not passed and values.get("strict"):
        return EXIT_GATE_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
