"""Command-line interface.

One binary, six subcommands: ``stats``, ``augment``, ``vad-segment``,
``score``, ``evaluate``, ``figures``.  Exit codes: 0 success, 1 data error,
2 usage error.  Randomized subcommands always print the effective seed (and
the RNG algorithm) to stderr so any emitted file can be reproduced from
logs; ``--threads`` never changes output bytes.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

from . import __version__, analysis, scoring, vadsim, wer
from .augment import (
    RucConfig,
    TrainingSchedule,
    iter_batches,
    run_schedule,
    serialize_batch,
    write_augmented_manifest,
    write_batch_file,
    write_batch_header,
)
from .corpus import corpus_summary, load_manifest, read_manifest
from .errors import RucError
from .rng import RNG_ALGORITHM

VERSION_LINE = f"ruc {__version__} (rng: {RNG_ALGORITHM})"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruc",
        description="Utterance concatenation augmentation and ASR "
        "length-mismatch evaluation toolkit.",
    )
    parser.add_argument("--version", action="version", version=VERSION_LINE)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads", type=int, default=1, metavar="K",
        help="worker threads; output bytes are identical for any K",
    )
    common.add_argument("--quiet", action="store_true", help="suppress progress info")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("stats", parents=[common], help="corpus length statistics")
    p.add_argument("--manifest", required=True, help="utterance manifest (JSONL)")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser(
        "augment", parents=[common],
        help="emit concatenation-augmented batches or an augmented manifest",
    )
    p.add_argument("--manifest", required=True, help="utterance manifest (JSONL)")
    p.add_argument("--out", required=True, help="output file")
    p.add_argument(
        "--emit", choices=("manifest", "batches"), default="manifest",
        help="augmented JSONL manifest or binary batch file",
    )
    p.add_argument("--steps", type=int, help="number of batches (single stage)")
    p.add_argument(
        "--stage1-steps", type=int,
        help="steps without concatenation before the concatenation stage",
    )
    p.add_argument("--stage2-steps", type=int, help="concatenation-stage steps")
    p.add_argument("--batch-size", type=int, default=8, metavar="B")
    p.add_argument(
        "--buffer-size", type=int, default=None,
        help="per-step sampling buffer (default 10 x batch size)",
    )
    p.add_argument(
        "--max-concat", type=int, default=4, metavar="N",
        help="max utterances concatenated per item",
    )
    p.add_argument(
        "--max-tokens", type=int, default=300,
        help="transcript token cap per item (0 disables)",
    )
    p.add_argument(
        "--max-duration", type=float, default=25.0,
        help="duration cap per item, seconds (0 disables)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser(
        "vad-segment", parents=[common],
        help="segment speech/non-speech span lists into test utterances",
    )
    p.add_argument("--spans", required=True, help="span file")
    p.add_argument("--out", default="-", help="output TSV (default stdout)")
    p.add_argument("--max-segment", type=float, help="segment length cap, seconds")
    p.add_argument(
        "--merge-gap", type=float, default=vadsim.DEFAULT_MERGE_GAP_S,
        help="merge speech spans separated by gaps up to this, seconds",
    )
    p.add_argument(
        "--target-mean", type=float,
        help="calibrate the cap so the mean segment duration hits this",
    )
    p.set_defaults(func=cmd_vad_segment)

    p = sub.add_parser(
        "score", parents=[common],
        help="length-normalized n-best rescoring and alpha sweeps",
    )
    p.add_argument("--nbest", required=True, help="n-best file")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--sweep", action="store_true", help="sweep alpha against --ref")
    p.add_argument(
        "--grid", default=None,
        help="comma-separated alphas for --sweep (default 0.0..0.8 by 0.1)",
    )
    p.add_argument("--ref", help="reference manifest (required for --sweep)")
    p.add_argument("--out", default="-", help="output TSV (default stdout)")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", parents=[common], help="WER / WERR evaluation")
    p.add_argument("--ref", required=True, help="reference manifest (JSONL)")
    p.add_argument("--hyp", help="hypothesis file (utterance_id token ...)")
    p.add_argument("--per-utt", action="store_true", help="emit per-utterance TSV")
    p.add_argument(
        "--robustness", nargs="+", metavar="LABEL=HYPFILE",
        help="labeled hypothesis files per VAD setting; emits WERs + SD",
    )
    p.add_argument("--out", default="-", help="output TSV (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("figures", parents=[common], help="emit figure data")
    p.add_argument("--figure", required=True, choices=("ratio", "length-bucket"))
    p.add_argument(
        "--data", help="reference results JSON (default: bundled file)"
    )
    p.add_argument("--language", help="restrict ratio curves to one language")
    p.add_argument("--bucket-width", type=int, default=10)
    p.add_argument("--ref", help="reference manifest (length-bucket)")
    p.add_argument("--hyp", help="hypothesis file (length-bucket)")
    p.add_argument("--out", choices=("tsv", "svg"), default="tsv")
    p.add_argument("--output", default="-", help="output path (default stdout)")
    p.set_defaults(func=cmd_figures)

    return parser


@contextmanager
def _open_out(path, binary=False):
    if path == "-":
        yield sys.stdout.buffer if binary else sys.stdout
    else:
        mode = "wb" if binary else "w"
        kwargs = {} if binary else {"encoding": "utf-8", "newline": "\n"}
        with open(path, mode, **kwargs) as f:
            yield f


def _info(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _ref_pairs(ref_manifest, hyp_path):
    """(id, ref, hyp) triples for every hypothesis id, in hyp-file order."""
    refs = {e.id: e.transcript for e in read_manifest(ref_manifest)}
    hyps = wer.read_hyp_file(hyp_path)
    triples = []
    for utt_id, hyp_tokens in hyps.items():
        if utt_id not in refs:
            raise RucError(f"hypothesis id '{utt_id}' not in reference manifest")
        triples.append((utt_id, refs[utt_id], hyp_tokens))
    if not triples:
        raise RucError(f"{hyp_path}: no hypotheses")
    return triples


def cmd_stats(args) -> int:
    corpus = load_manifest(args.manifest)
    summary = corpus_summary(corpus)
    stats = analysis.length_stats(corpus)
    print(f"utterances\t{summary.utterance_count}")
    print(f"total_hours\t{summary.total_hours:.6f}")
    print(f"duration_mean_s\t{stats.mean_duration_s:.2f}")
    print(f"duration_sd_s\t{stats.sd_duration_s:.2f}")
    print(f"tokens_mean\t{stats.mean_tokens:.2f}")
    print(f"tokens_sd\t{stats.sd_tokens:.2f}")
    return 0


def cmd_augment(args) -> int:
    parser_error = None
    two_stage = args.stage1_steps is not None or args.stage2_steps is not None
    if two_stage and args.steps is not None:
        parser_error = "--steps conflicts with --stage1-steps/--stage2-steps"
    if not two_stage and args.steps is None:
        parser_error = "one of --steps or --stage1-steps/--stage2-steps is required"
    if parser_error:
        print(f"ruc augment: error: {parser_error}", file=sys.stderr)
        return 2

    stage1 = args.stage1_steps or 0
    stage2 = args.stage2_steps or 0
    total = stage1 + stage2 if two_stage else args.steps
    try:
        cfg = RucConfig(
            total_steps_S=total,
            batch_size_B=args.batch_size,
            max_concat_N=args.max_concat,
            buffer_size=args.buffer_size,
            max_tokens=args.max_tokens if args.max_tokens > 0 else None,
            max_duration_s=args.max_duration if args.max_duration > 0 else None,
            seed=args.seed,
        )
    except ValueError as exc:
        print(f"ruc augment: error: {exc}", file=sys.stderr)
        return 2
    corpus = load_manifest(args.manifest)
    # Reproducibility record; kept on stderr so data outputs stay clean.
    print(f"seed: {cfg.seed}", file=sys.stderr)
    print(f"rng: {RNG_ALGORITHM}", file=sys.stderr)

    binary = args.emit == "batches"
    with _open_out(args.out, binary=binary) as out:
        count = 0
        if two_stage:
            if binary:
                write_batch_header(out, creator=VERSION_LINE)

                def step_fn(batch, stage):
                    out.write(serialize_batch(batch))
            else:

                def step_fn(batch, stage):
                    write_augmented_manifest(out, [batch])

            report = run_schedule(
                corpus, cfg, TrainingSchedule(stage1, stage2), step_fn,
                threads=args.threads,
            )
            count = report.stage1_steps_run + report.stage2_steps_run
            _info(
                args,
                f"stage1 steps: {report.stage1_steps_run}, "
                f"stage2 steps: {report.stage2_steps_run}",
            )
        else:
            batches = iter_batches(corpus, cfg, args.steps, threads=args.threads)
            if binary:
                count = write_batch_file(out, batches, creator=VERSION_LINE)
            else:
                count = write_augmented_manifest(out, batches)
        _info(args, f"wrote {count} batches to {args.out}")
    return 0


def cmd_vad_segment(args) -> int:
    if args.max_segment is None and args.target_mean is None:
        print(
            "ruc vad-segment: error: one of --max-segment or --target-mean "
            "is required",
            file=sys.stderr,
        )
        return 2
    recordings = vadsim.read_span_file(args.spans)
    if not recordings:
        raise RucError(f"{args.spans}: no spans")
    span_lists = list(recordings.values())
    if args.target_mean is not None:
        max_segment = vadsim.calibrate_max_segment(
            span_lists, args.target_mean, args.merge_gap
        )
        _info(args, f"calibrated max_segment_s: {max_segment:.4f}")
    else:
        max_segment = args.max_segment
    lines = [f"# max_segment_s\t{max_segment:.4f}", "# recording_id\tstart_s\tend_s"]
    for rec_id, spans in recordings.items():
        for seg in vadsim.segment_recording(
            spans, max_segment, args.merge_gap, recording_id=rec_id
        ):
            lines.append(f"{rec_id}\t{seg.start_s:.3f}\t{seg.end_s:.3f}")
    with _open_out(args.out) as out:
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_score(args) -> int:
    nbest = scoring.read_nbest_file(args.nbest)
    if args.sweep:
        if not args.ref:
            print(
                "ruc score: error: --sweep requires --ref", file=sys.stderr
            )
            return 2
        refs = {e.id: e.transcript for e in read_manifest(args.ref)}
        sets = []
        for utt_id, hyps in nbest.items():
            if utt_id not in refs:
                raise RucError(f"n-best id '{utt_id}' not in reference manifest")
            sets.append((refs[utt_id], hyps))
        grid = (
            [float(a) for a in args.grid.split(",")]
            if args.grid
            else list(scoring.ALPHA_GRID_DEFAULT)
        )
        best_alpha, results = scoring.sweep_alpha(sets, grid)
        lines = ["# alpha\twer_percent"]
        lines += [f"{alpha:.2f}\t{wp:.4f}" for alpha, wp in results]
        lines.append(f"best_alpha\t{best_alpha:.2f}")
        with _open_out(args.out) as out:
            out.write("\n".join(lines) + "\n")
        _info(args, f"best alpha: {best_alpha:.2f}")
        return 0
    lines = ["# utterance_id\trank\tnorm_score\traw_score\tlength\ttokens"]
    for utt_id, hyps in nbest.items():
        for rank, hyp in enumerate(scoring.rescore_nbest(hyps, args.alpha), start=1):
            ns = scoring.score_hypothesis(hyp, args.alpha)
            lines.append(
                f"{utt_id}\t{rank}\t{ns.norm_s:.6f}\t{ns.raw_s:.6f}"
                f"\t{ns.length}\t{' '.join(hyp.tokens)}"
            )
    with _open_out(args.out) as out:
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_evaluate(args) -> int:
    if args.robustness:
        labeled = []
        for spec_item in args.robustness:
            label, sep, path = spec_item.partition("=")
            if not sep or not label or not path:
                print(
                    f"ruc evaluate: error: --robustness item '{spec_item}' is not "
                    "LABEL=HYPFILE",
                    file=sys.stderr,
                )
                return 2
            triples = _ref_pairs(args.ref, path)
            report = wer.corpus_wer(
                [(ref, hyp) for _, ref, hyp in triples], threads=args.threads
            )
            labeled.append((label, report.wer_percent))
        row = wer.vad_robustness(labeled)
        header = "# " + "\t".join(label for label, _ in row.wers) + "\tsd"
        values = "\t".join(f"{w:.2f}" for _, w in row.wers) + f"\t{row.sd:.2f}"
        with _open_out(args.out) as out:
            out.write(header + "\n" + values + "\n")
        return 0

    if not args.hyp:
        print(
            "ruc evaluate: error: --hyp is required unless --robustness is given",
            file=sys.stderr,
        )
        return 2
    triples = _ref_pairs(args.ref, args.hyp)
    pairs = [(ref, hyp) for _, ref, hyp in triples]
    lines = []
    if args.per_utt:
        lines.append("# utterance_id\tref_tokens\tsub\tdel\tins\twer_percent")
        for utt_id, ref, hyp in triples:
            counts = wer.align(ref, hyp)
            lines.append(
                f"{utt_id}\t{len(ref)}\t{counts.substitutions}\t{counts.deletions}"
                f"\t{counts.insertions}\t{100.0 * counts.errors / len(ref):.2f}"
            )
    report = wer.corpus_wer(pairs, threads=args.threads)
    lines.append("# ref_tokens\tsub\tdel\tins\twer_percent")
    lines.append(
        f"{report.ref_tokens}\t{report.substitutions}\t{report.deletions}"
        f"\t{report.insertions}\t{report.wer_percent:.2f}"
    )
    with _open_out(args.out) as out:
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_figures(args) -> int:
    if args.figure == "ratio":
        if args.data:
            try:
                with open(args.data, encoding="utf-8") as f:
                    results = json.load(f)
                curves = analysis.reference_ratio_curves(results)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise RucError(f"{args.data}: malformed results file ({exc})") from exc
        else:
            curves = analysis.reference_ratio_curves()
        if args.language:
            if args.language not in curves:
                raise RucError(f"unknown language '{args.language}'")
            curves = {args.language: curves[args.language]}
        content = (
            analysis.ratio_curve_tsv(curves)
            if args.out == "tsv"
            else analysis.ratio_curve_svg(curves)
        )
    else:
        if not args.ref or not args.hyp:
            print(
                "ruc figures: error: --figure length-bucket requires --ref and --hyp",
                file=sys.stderr,
            )
            return 2
        triples = _ref_pairs(args.ref, args.hyp)
        curve = analysis.wer_by_length_bucket(
            [(ref, hyp) for _, ref, hyp in triples], args.bucket_width
        )
        content = (
            analysis.length_bucket_tsv(curve)
            if args.out == "tsv"
            else analysis.length_bucket_svg(curve)
        )
    if args.output == "-":
        sys.stdout.write(content)
    else:
        analysis.write_text(args.output, content)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ValueError as exc:
        # library precondition hit by a flag value
        print(f"ruc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (RucError, OSError) as exc:
        print(f"ruc {args.command}: error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
