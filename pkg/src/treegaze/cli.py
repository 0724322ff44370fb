"""Command-line pipeline: transitions, align, features, bayesnet, frp, synth.

Every command reads a declarative JSON config (plus --seed/--out overrides),
writes machine-readable reports into the output directory, and archives the
resolved configuration next to them. Exit codes: 0 success, 1 data error,
2 configuration error. A failing command leaves a FAILED.txt marker so
partial outputs are never mistaken for a completed run.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import align, bayesnet, corpus, features, frp, gaze, plots, stats, synth, transitions
from .config import RunConfig, dump_config, load_config
from .errors import ConfigError, DataError


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _load_corpus(cfg: RunConfig):
    cfg.require("conllu", "fixations")
    sentences = corpus.parse_conllu(Path(cfg.conllu).read_text(encoding="utf-8"))
    records = gaze.load_fixations(cfg.fixations, cfg.min_fixation_ms)
    sequences = gaze.build_all_sequences(records)
    return sentences, sequences


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_transitions(cfg: RunConfig, args) -> None:
    sentences, sequences = _load_corpus(cfg)
    analysis = transitions.analyze_transitions(sentences, sequences)
    out = cfg.out_dir
    corpus.write_role_table(sentences, out / "roles.csv")
    _write_csv(out / "transition_distributions.csv", transitions.DISTRIBUTION_COLUMNS, analysis.rows)
    payload = {
        t: None
        if w is None
        else {
            "t": w.t,
            "df": w.df,
            "p_two_tailed": w.p_two_tailed,
            "mean_baseline": w.mean_a,
            "sd_baseline": w.sd_a,
            "mean_gaze": w.mean_b,
            "sd_gaze": w.sd_b,
            "n_baseline": len(analysis.baseline_values[t]),
            "n_gaze": len(analysis.gaze_values[t]),
        }
        for t, w in analysis.tests.items()
    }
    _write_json(out / "transition_tests.json", payload)
    plots.save_transition_bars(analysis, cfg.alpha, out / "transitions.svg")


def cmd_align(cfg: RunConfig, args) -> None:
    sentences, sequences = _load_corpus(cfg)
    rows = []
    mean_rows = []
    for sentence in sentences:
        paths = {
            p: seq.path
            for p, seq in sequences.get(sentence.id, {}).items()
            if len(seq.path) > 0
        }
        if not paths:
            continue
        text = gaze.text_sequence(sentence)
        for participant in sorted(paths):
            rows.append((sentence.id, participant, align.edit_distance(paths[participant], text)))
        mean_rows.append((sentence.id, align.sentence_edit_distance(paths, text)))
    _write_csv(cfg.out_dir / "edit_distances.csv", ("sentence_id", "participant", "edit_distance"), rows)
    _write_csv(cfg.out_dir / "edit_distance_means.csv", ("sentence_id", "mean_edit_distance"), mean_rows)


def _build_features(cfg: RunConfig):
    cfg.require("conllu", "fixations", "norms", "surprisal")
    sentences, sequences = _load_corpus(cfg)
    norms = features.load_norms(cfg.norms)
    surprisals = features.load_surprisal(cfg.surprisal)
    table, dropped = features.assemble_features(
        sentences, sequences, norms, surprisals, bins=cfg.bins
    )
    if dropped:
        print(f"note: dropped {len(dropped)} sentence(s) with incomplete data", file=sys.stderr)
    return table


def cmd_features(cfg: RunConfig, args) -> None:
    table = _build_features(cfg)
    features.write_feature_table(table, cfg.out_dir / "feature_table.csv")
    features.write_correlation_matrix(table, cfg.out_dir / "correlation_matrix.csv")


def cmd_bayesnet(cfg: RunConfig, args) -> None:
    table = _build_features(cfg)
    out = cfg.out_dir
    features.write_feature_table(table, out / "feature_table.csv")
    features.write_correlation_matrix(table, out / "correlation_matrix.csv")

    data = table.bins
    cards = tuple([cfg.bins] * len(table.names))
    dag = bayesnet.hill_climb(
        data, max_parents=cfg.max_parents, restarts=cfg.restarts, seed=cfg.seed,
        cardinalities=cards,
    )
    bn = bayesnet.fit_mle(dag, data, cardinalities=cards)
    strength = bayesnet.bootstrap_arc_strength(
        data, n_boot=cfg.n_boot, seed=cfg.seed, max_parents=cfg.max_parents,
        restarts=cfg.restarts, cardinalities=cards,
    )
    losses = bayesnet.score_loss_strength(dag, data, cardinalities=cards)

    names = table.names
    (out / "network_arcs.csv").write_text(bayesnet.arcs_csv(dag, names), encoding="utf-8")
    (out / "network_cpts.json").write_text(bayesnet.cpts_json(bn, names) + "\n", encoding="utf-8")
    (out / "arc_strength.csv").write_text(
        bayesnet.strength_csv(strength, losses, names), encoding="utf-8"
    )

    target = 0  # edit_distance
    mi_rows = []
    for j in range(1, len(names)):
        mi = bayesnet.mutual_information(data[:, j], data[:, target])
        mi_rows.append((names[j], names[target], mi.nats, mi.scaled))
    _write_csv(
        out / "mutual_information.csv",
        ("variable", "target", "mi_nats", "n_times_mi"),
        mi_rows,
    )

    labels = {arc: f"{loss:.2f}" for arc, loss in losses.items()}
    (out / "network.dot").write_text(bayesnet.to_dot(dag, names, labels), encoding="utf-8")


def cmd_frp(cfg: RunConfig, args) -> None:
    cfg.require("epochs_dir")
    epoch_dir = Path(cfg.epochs_dir)
    sidecars = sorted(
        p for p in epoch_dir.glob("*.json")
        if json.loads(p.read_text(encoding="utf-8")).get("order") == frp.EPOCH_ORDER
    )
    if not sidecars:
        raise DataError(f"no epoch sidecars found in {epoch_dir}")

    out = cfg.out_dir
    beta_dir = out / "betas"
    subjects = [frp.load_epochs(p) for p in sidecars]
    by_predictor: dict[str, list[frp.BetaSeries]] = {}
    for predictor in frp.PREDICTORS:
        series_list = []
        for epochs in subjects:
            series = frp.regress_timewise(epochs, standardize=True, predictor=predictor)
            frp.save_beta(series, beta_dir, f"{epochs.subject}_{predictor}")
            series_list.append(series)
        by_predictor[predictor] = series_list

    first = subjects[0]
    times_ms = first.times() * 1000.0
    rois = cfg.rois or {"all": list(range(first.data.shape[1]))}

    timecourse_rows = []
    clusters_payload: dict = {}
    panels: dict[str, dict] = {}
    for ri, (roi_name, channels) in enumerate(sorted(rois.items())):
        panels[roi_name] = {}
        clusters_payload[roi_name] = {}
        for pi, predictor in enumerate(frp.PREDICTORS):
            series = np.vstack(
                [frp.roi_average(b, channels) for b in by_predictor[predictor]]
            )
            cluster_seed = _derived_seed(cfg.seed, 1, ri, pi)
            boot_seed = _derived_seed(cfg.seed, 2, ri, pi)
            result = stats.cluster_permutation_1samp(
                series, n_perm=cfg.n_perm, alpha=cfg.alpha, seed=cluster_seed
            )
            band = stats.bootstrap_ci(series, n_boot=cfg.n_boot, seed=boot_seed)
            p_raw = np.array(
                [_wilcoxon_p_or_one(series[:, k]) for k in range(series.shape[1])]
            )
            fdr = stats.fdr_bh(p_raw, alpha=cfg.alpha)

            for k in range(series.shape[1]):
                timecourse_rows.append(
                    (
                        roi_name,
                        predictor,
                        times_ms[k],
                        band.mean[k],
                        band.lo[k],
                        band.hi[k],
                        p_raw[k],
                        fdr.p_adjusted[k],
                        int(fdr.reject[k]),
                    )
                )
            clusters_payload[roi_name][predictor] = {
                "threshold_t": result.threshold_t,
                "n_permutations": result.n_permutations,
                "clusters": [
                    {
                        "start_sample": c.start,
                        "end_sample": c.end,
                        "start_ms": float(times_ms[c.start]),
                        "end_ms": float(times_ms[c.end]),
                        "sign": c.sign,
                        "mass": c.mass,
                        "p": p,
                        "significant": p < cfg.alpha,
                    }
                    for c, p in zip(result.clusters, result.p_values)
                ],
            }
            panels[roi_name][predictor] = {
                "mean": band.mean,
                "lo": band.lo,
                "hi": band.hi,
                "sig": fdr.reject,
            }

    _write_csv(
        out / "roi_timecourse.csv",
        ("roi", "predictor", "time_ms", "mean_slope", "ci_lo", "ci_hi", "p_raw", "p_fdr", "significant"),
        timecourse_rows,
    )
    _write_json(out / "clusters.json", clusters_payload)
    plots.save_frp_timecourse(times_ms, panels, out / "frp_timecourse.svg")


def _wilcoxon_p_or_one(values: np.ndarray) -> float:
    # an all-zero timepoint (e.g. a flat interpolated channel) carries no evidence
    if np.all(values == 0.0):
        return 1.0
    return stats.wilcoxon_signed_rank(values, alternative="greater").p_value


def cmd_synth(cfg: RunConfig, args) -> None:
    out = cfg.out_dir
    if args.mode == "reader":
        model = synth.ReaderModel(
            kind=args.kind,
            head_attraction=args.head_attraction,
            skip_prob=args.skip_prob,
            regress_prob=args.regress_prob,
        )
        vocab = synth.vocabulary()
        sentences = synth.random_sentences(
            args.sentences, seed=cfg.seed, min_tokens=args.min_tokens,
            max_tokens=args.max_tokens, vocab=vocab,
        )
        (out / "sentences.conllu").write_text(corpus.to_conllu(sentences), encoding="utf-8")
        (out / "fixations.csv").write_text(
            synth.gen_reader_paths(sentences, model, args.participants, cfg.seed),
            encoding="utf-8",
        )
        (out / "norms.csv").write_text(synth.norms_csv(synth.zipf_norms(vocab)), encoding="utf-8")
        (out / "surprisal.csv").write_text(
            synth.surprisal_csv(synth.random_surprisal(sentences, cfg.seed)), encoding="utf-8"
        )
    elif args.mode == "bn":
        bn = synth.planted_network()
        data = synth.gen_bn_dataset(bn, args.rows, seed=cfg.seed)
        (out / "bn_data.csv").write_text(synth.bn_data_csv(data), encoding="utf-8")
        (out / "planted_arcs.csv").write_text(
            bayesnet.arcs_csv(bn.dag, features.FEATURE_NAMES), encoding="utf-8"
        )
    elif args.mode == "frp":
        synth.gen_frp_dataset(
            out / "epochs",
            n_subjects=args.subjects,
            n_trials=args.trials,
            n_channels=args.channels,
            effect_window_ms=(args.window[0], args.window[1]),
            amplitude=args.amplitude,
            noise_sd=args.noise,
            seed=cfg.seed,
        )
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown synth mode {args.mode!r}")


COMMANDS = {
    "transitions": cmd_transitions,
    "align": cmd_align,
    "features": cmd_features,
    "bayesnet": cmd_bayesnet,
    "frp": cmd_frp,
    "synth": cmd_synth,
}


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treegaze",
        description="Gaze-transition, scanpath-network and fixation-EEG analyses",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=None, help="override the configured seed")
    common.add_argument("--out", type=Path, default=None, help="override the output directory")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("transitions", parents=[common], help="baseline-vs-gaze transition analysis")
    sub.add_parser("align", parents=[common], help="gaze-vs-text edit distances")
    sub.add_parser("features", parents=[common], help="sentence feature table and correlations")
    sub.add_parser("bayesnet", parents=[common], help="learn and report the feature network")
    sub.add_parser("frp", parents=[common], help="time-resolved surprisal regression on epochs")

    sp = sub.add_parser("synth", parents=[common], help="generate synthetic ingestion files")
    sp.add_argument("--mode", choices=("reader", "bn", "frp"), default="reader")
    sp.add_argument("--kind", choices=synth.READER_KINDS, default="serial")
    sp.add_argument("--participants", type=int, default=12)
    sp.add_argument("--sentences", type=int, default=50)
    sp.add_argument("--head-attraction", type=float, default=0.8, dest="head_attraction")
    sp.add_argument("--skip-prob", type=float, default=0.0, dest="skip_prob")
    sp.add_argument("--regress-prob", type=float, default=0.0, dest="regress_prob")
    sp.add_argument("--min-tokens", type=int, default=5, dest="min_tokens")
    sp.add_argument("--max-tokens", type=int, default=12, dest="max_tokens")
    sp.add_argument("--rows", type=int, default=400)
    sp.add_argument("--subjects", type=int, default=12)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--channels", type=int, default=4)
    sp.add_argument("--window", type=float, nargs=2, default=(48.0, 300.0))
    sp.add_argument("--amplitude", type=float, default=0.5)
    sp.add_argument("--noise", type=float, default=1.0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = Path(args.out).resolve()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    marker = Path(cfg.out_dir) / "FAILED.txt"
    try:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        if marker.exists():
            marker.unlink()
        (Path(cfg.out_dir) / "config_used.json").write_text(
            dump_config(cfg) + "\n", encoding="utf-8"
        )
        COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        _write_marker(marker, str(exc))
        return 2
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        _write_marker(marker, str(exc))
        return 1
    return 0


def _write_marker(marker: Path, message: str) -> None:
    try:
        marker.parent.mkdir(parents=True, exist_ok=True)
        marker.write_text(message + "\n", encoding="utf-8")
    except OSError:
        pass


if __name__ == "__main__":
    raise SystemExit(main())
