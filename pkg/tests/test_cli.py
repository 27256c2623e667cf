import json

import pytest

from conftest import write_corpus_files
from ructk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# --- global behavior ---------------------------------------------------------

def test_version_mentions_rng_algorithm(capsys):
    code, out, _ = run(capsys, "--version")
    assert code == 0
    assert "0.1.0" in out
    assert "philox4x64-10" in out


def test_unknown_flag_exits_2(capsys, three_utt_manifest):
    code, _, err = run(
        capsys, "stats", "--manifest", str(three_utt_manifest), "--bogus"
    )
    assert code == 2
    assert "--bogus" in err


def test_missing_subcommand_exits_2(capsys):
    assert run(capsys)[0] == 2


def test_data_error_exits_1(capsys, tmp_path):
    missing = tmp_path / "none.jsonl"
    missing.write_text("", encoding="utf-8")
    code, _, err = run(capsys, "stats", "--manifest", str(missing))
    assert code == 1
    assert "error" in err


# --- stats ---------------------------------------------------------------------

def test_stats_output(capsys, three_utt_manifest):
    code, out, _ = run(capsys, "stats", "--manifest", str(three_utt_manifest))
    assert code == 0
    lines = dict(line.split("\t") for line in out.strip().split("\n"))
    assert lines["utterances"] == "3"
    assert lines["duration_mean_s"] == "4.00"
    assert lines["duration_sd_s"] == "2.00"
    assert lines["total_hours"] == f"{12.0 / 3600:.6f}"


# --- augment ---------------------------------------------------------------------

def corpus_for_augment(tmp_path, n=12):
    specs = [
        (f"u{i:02d}", 0.5 + 0.25 * (i % 6), [f"w{i}", f"v{i}"]) for i in range(n)
    ]
    return write_corpus_files(tmp_path, specs, dim=2)


def test_augment_manifest_deterministic(capsys, tmp_path):
    manifest = corpus_for_augment(tmp_path)
    manifest_before = manifest.read_bytes()
    outs = []
    for name in ("a.jsonl", "b.jsonl"):
        out_path = tmp_path / name
        code, _, err = run(
            capsys,
            "augment", "--manifest", str(manifest), "--out", str(out_path),
            "--steps", "3", "--seed", "42", "--batch-size", "4",
            "--max-concat", "3",
        )
        assert code == 0
        assert "seed: 42" in err
        assert "rng: philox4x64-10" in err
        outs.append(out_path.read_bytes())
    assert outs[0] == outs[1]
    assert manifest.read_bytes() == manifest_before  # inputs never mutated
    records = [
        json.loads(line)
        for line in outs[0].decode().strip().split("\n")
    ]
    assert len(records) == 12
    assert all(1 <= len(r["source_ids"]) <= 3 for r in records)


def test_augment_thread_purity(capsys, tmp_path):
    manifest = corpus_for_augment(tmp_path)
    blobs = []
    for threads, name in ((1, "t1.bin"), (8, "t8.bin")):
        out_path = tmp_path / name
        code, _, _ = run(
            capsys,
            "augment", "--manifest", str(manifest), "--out", str(out_path),
            "--emit", "batches", "--steps", "5", "--seed", "7",
            "--batch-size", "4", "--max-concat", "4", "--threads", str(threads),
        )
        assert code == 0
        blobs.append(out_path.read_bytes())
    assert blobs[0] == blobs[1]
    assert blobs[0].startswith(b"RUCB")


def test_augment_two_stage(capsys, tmp_path):
    manifest = corpus_for_augment(tmp_path)
    out_path = tmp_path / "staged.jsonl"
    code, _, _ = run(
        capsys,
        "augment", "--manifest", str(manifest), "--out", str(out_path),
        "--stage1-steps", "4", "--stage2-steps", "2", "--seed", "1",
        "--batch-size", "3", "--max-concat", "4",
        "--max-tokens", "0", "--max-duration", "0",
    )
    assert code == 0
    records = [json.loads(l) for l in out_path.read_text().strip().split("\n")]
    assert len(records) == 18
    stage1 = records[: 4 * 3]
    assert all(len(r["source_ids"]) == 1 for r in stage1)
    assert any(len(r["source_ids"]) > 1 for r in records[12:])


def test_augment_steps_conflict(capsys, tmp_path):
    manifest = corpus_for_augment(tmp_path)
    code, _, err = run(
        capsys,
        "augment", "--manifest", str(manifest), "--out", str(tmp_path / "x"),
        "--steps", "2", "--stage1-steps", "1",
    )
    assert code == 2
    assert "--steps" in err


def test_augment_requires_steps(capsys, tmp_path):
    manifest = corpus_for_augment(tmp_path)
    code, _, _ = run(
        capsys,
        "augment", "--manifest", str(manifest), "--out", str(tmp_path / "x"),
    )
    assert code == 2


# --- vad-segment --------------------------------------------------------------------

def test_vad_segment_with_target_mean(capsys, tmp_path):
    spans = tmp_path / "spans.txt"
    spans.write_text(
        "".join(f"rec{i} 0.0 30.0 1\n" for i in range(10)), encoding="utf-8"
    )
    out_path = tmp_path / "segments.tsv"
    code, _, err = run(
        capsys,
        "vad-segment", "--spans", str(spans), "--out", str(out_path),
        "--target-mean", "15",
    )
    assert code == 0
    assert "calibrated max_segment_s" in err
    rows = [
        line.split("\t")
        for line in out_path.read_text().strip().split("\n")
        if not line.startswith("#")
    ]
    durations = [float(end) - float(start) for _, start, end in rows]
    assert len(durations) == 20
    assert sum(durations) / len(durations) == pytest.approx(15.0, abs=0.1)


def test_vad_segment_requires_knob(capsys, tmp_path):
    spans = tmp_path / "spans.txt"
    spans.write_text("r 0.0 3.0 1\n", encoding="utf-8")
    code, _, _ = run(capsys, "vad-segment", "--spans", str(spans))
    assert code == 2


# --- score ---------------------------------------------------------------------------

NBEST = (
    "u1 1 a:-2.0 a:-2.0 a:-2.0 a:-2.0 a:-2.0\n"
    # 30 tokens at -11/30 each: raw -11, longer
    + "u1 2 " + " ".join(["b:-0.3667"] * 30) + "\n"
)


def test_score_alpha_zero_ranks_by_raw(capsys, tmp_path):
    nbest = tmp_path / "nbest.txt"
    nbest.write_text(NBEST, encoding="utf-8")
    code, out, _ = run(capsys, "score", "--nbest", str(nbest), "--alpha", "0.0")
    assert code == 0
    rows = [l.split("\t") for l in out.strip().split("\n") if not l.startswith("#")]
    assert rows[0][1] == "1" and rows[0][5].startswith("a ")


def test_score_alpha_flips_ranking(capsys, tmp_path):
    nbest = tmp_path / "nbest.txt"
    nbest.write_text(NBEST, encoding="utf-8")
    code, out, _ = run(capsys, "score", "--nbest", str(nbest), "--alpha", "0.8")
    assert code == 0
    rows = [l.split("\t") for l in out.strip().split("\n") if not l.startswith("#")]
    assert rows[0][1] == "1" and rows[0][5].startswith("b ")


def test_score_sweep(capsys, tmp_path):
    ref = write_corpus_files(tmp_path, [("u1", 0.3, ["b"] * 30)])
    nbest = tmp_path / "nbest.txt"
    nbest.write_text(NBEST, encoding="utf-8")
    code, out, err = run(
        capsys,
        "score", "--nbest", str(nbest), "--sweep", "--ref", str(ref),
        "--grid", "0.0,0.8",
    )
    assert code == 0
    assert "best_alpha\t0.80" in out
    assert "best alpha: 0.80" in err


def test_score_sweep_requires_ref(capsys, tmp_path):
    nbest = tmp_path / "nbest.txt"
    nbest.write_text(NBEST, encoding="utf-8")
    assert run(capsys, "score", "--nbest", str(nbest), "--sweep")[0] == 2


# --- evaluate -----------------------------------------------------------------------

def eval_fixture(tmp_path):
    ref = write_corpus_files(
        tmp_path,
        [("u1", 0.5, ["a", "b", "c", "d"]), ("u2", 0.5, ["e", "f"])],
    )
    hyp = tmp_path / "hyp.txt"
    hyp.write_text("u1 a x c\nu2 e f\n", encoding="utf-8")
    return ref, hyp


def test_evaluate_summary(capsys, tmp_path):
    ref, hyp = eval_fixture(tmp_path)
    code, out, _ = run(capsys, "evaluate", "--ref", str(ref), "--hyp", str(hyp))
    assert code == 0
    data_line = [l for l in out.strip().split("\n") if not l.startswith("#")][-1]
    ref_tokens, sub, dele, ins, wer = data_line.split("\t")
    assert (ref_tokens, sub, dele, ins) == ("6", "1", "1", "0")
    assert wer == f"{100.0 * 2 / 6:.2f}"


def test_evaluate_per_utt(capsys, tmp_path):
    ref, hyp = eval_fixture(tmp_path)
    code, out, _ = run(
        capsys, "evaluate", "--ref", str(ref), "--hyp", str(hyp), "--per-utt"
    )
    assert code == 0
    assert "u1\t4\t1\t1\t0\t50.00" in out
    assert "u2\t2\t0\t0\t0\t0.00" in out


def test_evaluate_robustness_table(capsys, tmp_path):
    ref = write_corpus_files(tmp_path, [("u1", 0.5, ["a", "b", "c", "d"])])
    hyp_a = tmp_path / "a.txt"
    hyp_a.write_text("u1 a b c d\n", encoding="utf-8")
    hyp_b = tmp_path / "b.txt"
    hyp_b.write_text("u1 a x c d\n", encoding="utf-8")
    code, out, _ = run(
        capsys,
        "evaluate", "--ref", str(ref),
        "--robustness", f"15s={hyp_a}", f"7s={hyp_b}",
    )
    assert code == 0
    header, values = out.strip().split("\n")
    assert header == "# 15s\t7s\tsd"
    wer_a, wer_b, sd = values.split("\t")
    assert (wer_a, wer_b) == ("0.00", "25.00")
    assert float(sd) == pytest.approx(17.68, abs=0.01)


def test_evaluate_unknown_id_is_data_error(capsys, tmp_path):
    ref, hyp = eval_fixture(tmp_path)
    bad = tmp_path / "bad.txt"
    bad.write_text("nope a b\n", encoding="utf-8")
    code, _, err = run(capsys, "evaluate", "--ref", str(ref), "--hyp", str(bad))
    assert code == 1
    assert "nope" in err


# --- figures -------------------------------------------------------------------------

def test_figures_ratio_single_language(capsys):
    code, out, _ = run(capsys, "figures", "--figure", "ratio", "--language", "my")
    assert code == 0
    rows = [l.split("\t") for l in out.strip().split("\n") if not l.startswith("#")]
    assert len(rows) == 4
    xs = [float(r[2]) for r in rows]
    for x, expect in zip(xs, [0.43, 1.08, 1.52, 1.95]):
        assert x == pytest.approx(expect, abs=0.01)
    assert [float(r[3]) for r in rows] == [-4.0, 5.94, 8.36, 10.15]


def test_figures_ratio_all_languages(capsys, tmp_path):
    out_path = tmp_path / "fig.tsv"
    code, _, _ = run(
        capsys, "figures", "--figure", "ratio", "--output", str(out_path)
    )
    assert code == 0
    rows = [l for l in out_path.read_text().strip().split("\n") if not l.startswith("#")]
    assert len(rows) == 60


def test_figures_ratio_svg(capsys):
    code, out, _ = run(
        capsys, "figures", "--figure", "ratio", "--language", "vi", "--out", "svg"
    )
    assert code == 0
    assert out.startswith("<svg ")


def test_figures_unknown_language(capsys):
    code, _, err = run(capsys, "figures", "--figure", "ratio", "--language", "zz")
    assert code == 1
    assert "zz" in err


def test_figures_length_bucket(capsys, tmp_path):
    ref, hyp = eval_fixture(tmp_path)
    code, out, _ = run(
        capsys,
        "figures", "--figure", "length-bucket", "--ref", str(ref),
        "--hyp", str(hyp), "--bucket-width", "10",
    )
    assert code == 0
    rows = [l for l in out.strip().split("\n") if not l.startswith("#")]
    assert rows == ["10\t33.33\t2"]


def test_figures_length_bucket_requires_inputs(capsys):
    assert run(capsys, "figures", "--figure", "length-bucket")[0] == 2
