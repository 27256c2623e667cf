import pytest

from conftest import make_mini_corpus
from ructk.analysis import (
    expected_concat_ratio,
    length_bucket_tsv,
    length_bucket_svg,
    length_stats,
    load_reference_results,
    ratio_curve,
    ratio_curve_svg,
    ratio_curve_tsv,
    reference_ratio_curves,
    wer_by_length_bucket,
    write_text,
)
from ructk.errors import EmptyCurve, IoFailure
from ructk.synth import make_corpus, normal_durations
from ructk.wer import corpus_wer


# --- length_stats -----------------------------------------------------------

def test_length_stats_hand_case():
    corpus = make_mini_corpus(
        [("a", 2.0, ["x"]), ("b", 4.0, ["x", "y"]), ("c", 6.0, ["x", "y", "z"])]
    )
    stats = length_stats(corpus)
    assert stats.mean_duration_s == pytest.approx(4.0)
    assert stats.sd_duration_s == pytest.approx(2.0)
    assert stats.mean_tokens == pytest.approx(2.0)
    assert stats.sd_tokens == pytest.approx(1.0)


def test_length_stats_single_utterance():
    corpus = make_mini_corpus([("a", 3.0, ["x"])])
    stats = length_stats(corpus)
    assert stats.sd_duration_s == 0.0
    assert stats.sd_tokens == 0.0


def test_length_stats_of_augmented_manifest_follows_expected_length_law():
    # mean duration of emitted items (caps off, N=4) ~= train_mean * 2.5
    import io
    import json

    from ructk.augment import RucConfig, iter_batches, write_augmented_manifest

    corpus = make_corpus(
        5000,
        seed=11,
        feature_dim=1,
        duration_sampler=normal_durations(3.0, 1.0),
        min_tokens=1,
        max_tokens=3,
        noise_features=False,
    )
    train_mean = length_stats(corpus).mean_duration_s
    cfg = RucConfig(
        batch_size_B=100, max_concat_N=4,
        max_tokens=None, max_duration_s=None, seed=12,
    )
    sink = io.StringIO()
    write_augmented_manifest(sink, iter_batches(corpus, cfg, 1000))
    durations = [
        json.loads(line)["duration_s"]
        for line in sink.getvalue().strip().split("\n")
    ]
    assert len(durations) == 100_000
    mean = sum(durations) / len(durations)
    expected = train_mean * (4 + 1) / 2.0
    assert abs(mean - expected) / expected < 0.02


def test_length_stats_recovers_generator_parameters():
    corpus = make_corpus(
        100_000,
        seed=17,
        feature_dim=1,
        duration_sampler=normal_durations(3.0, 1.0),
        min_tokens=1,
        max_tokens=3,
        noise_features=False,
    )
    stats = length_stats(corpus)
    assert abs(stats.mean_duration_s - 3.0) / 3.0 < 0.01
    assert abs(stats.sd_duration_s - 1.0) < 0.01


# --- expected_concat_ratio -----------------------------------------------------

def test_ratio_published_points():
    assert expected_concat_ratio(4.62, 10.67, 1) == pytest.approx(0.43, abs=0.01)
    assert expected_concat_ratio(4.62, 10.67, 8) == pytest.approx(1.95, abs=0.01)


def test_ratio_equal_means_n1():
    assert expected_concat_ratio(5.0, 5.0, 1) == 1.0


def test_ratio_validation():
    with pytest.raises(ValueError):
        expected_concat_ratio(0.0, 1.0, 1)
    with pytest.raises(ValueError):
        expected_concat_ratio(1.0, 1.0, 0)


# --- ratio_curve -----------------------------------------------------------------

def test_ratio_curve_de_series():
    points = ratio_curve(
        3.08, 10.22, [(1, 4.25), (4, 7.73), (6, 9.59), (8, 10.12)]
    )
    xs = [p.ratio_r for p in points]
    for x, expect in zip(xs, [0.30, 0.75, 1.05, 1.36]):
        assert x == pytest.approx(expect, abs=0.01)
    assert [p.werr for p in points] == [4.25, 7.73, 9.59, 10.12]


def test_ratio_curve_vi_endpoint():
    points = ratio_curve(2.88, 10.70, [(8, 22.53)])
    assert points[0].ratio_r == pytest.approx(1.21, abs=0.01)


def test_ratio_curve_single_point():
    points = ratio_curve(5.0, 5.0, [(1, 3.3)])
    assert len(points) == 1
    assert points[0].ratio_r == 1.0
    assert points[0].werr == 3.3


def test_ratio_curve_sorts_and_rejects_duplicates():
    points = ratio_curve(1.0, 1.0, [(8, 1.0), (1, 2.0)])
    assert [p.n for p in points] == [1, 8]
    with pytest.raises(ValueError):
        ratio_curve(1.0, 1.0, [(4, 1.0), (4, 2.0)])


# --- wer_by_length_bucket ---------------------------------------------------------

def test_single_bucket():
    pairs = [(("a",) * 5, ("a",) * 5), (("b",) * 5, ("x",) * 5)]
    curve = wer_by_length_bucket(pairs, bucket_width=10)
    assert len(curve.points) == 1
    assert curve.points[0].bucket == 10
    assert curve.points[0].pair_count == 2
    assert curve.points[0].wer_percent == pytest.approx(50.0)


def test_two_buckets_match_per_group_pooling():
    short = [(("a", "b", "c", "d", "e"), ("a", "b", "x", "d", "e"))]
    long = [(tuple("abcdefghijklmno"), tuple("abcdefghijklmnz"))]
    curve = wer_by_length_bucket(short + long, bucket_width=10)
    assert [p.bucket for p in curve.points] == [10, 20]
    assert curve.points[0].wer_percent == pytest.approx(
        corpus_wer(short).wer_percent
    )
    assert curve.points[1].wer_percent == pytest.approx(
        corpus_wer(long).wer_percent
    )


def test_perfect_hyps_zero_everywhere():
    pairs = [(("a",) * n, ("a",) * n) for n in (3, 12, 25)]
    curve = wer_by_length_bucket(pairs, bucket_width=10)
    assert all(p.wer_percent == 0.0 for p in curve.points)


def test_buckets_recombine_to_corpus_wer():
    from ructk.rng import Stream

    rng = Stream(81, 5, 6)
    pairs = []
    for _ in range(120):
        n = rng.randint(1, 40)
        ref = tuple(f"t{rng.randbelow(6)}" for _ in range(n))
        hyp = tuple(f"t{rng.randbelow(6)}" for _ in range(rng.randint(0, 40)))
        pairs.append((ref, hyp))
    curve = wer_by_length_bucket(pairs, bucket_width=10)
    errors = sum(p.wer_percent * p.ref_tokens / 100.0 for p in curve.points)
    tokens = sum(p.ref_tokens for p in curve.points)
    overall = corpus_wer(pairs)
    assert tokens == overall.ref_tokens
    assert 100.0 * errors / tokens == pytest.approx(overall.wer_percent, abs=1e-9)
    assert sum(p.pair_count for p in curve.points) == len(pairs)


# --- emission ------------------------------------------------------------------

def test_ratio_tsv_format_and_determinism():
    curves = {"de": ratio_curve(3.08, 10.22, [(1, 4.25), (4, 7.73)])}
    a = ratio_curve_tsv(curves)
    b = ratio_curve_tsv(curves)
    assert a == b
    lines = a.strip().split("\n")
    assert lines[0].startswith("# ")
    assert lines[1] == "de\t1\t0.30\t4.25"


def test_empty_curve_is_error_not_empty_file():
    with pytest.raises(EmptyCurve):
        ratio_curve_tsv({})
    with pytest.raises(EmptyCurve):
        ratio_curve_tsv({"xx": []})
    from ructk.analysis import LengthBucketCurve

    with pytest.raises(EmptyCurve):
        length_bucket_tsv(LengthBucketCurve(10, ()))


def test_bucket_tsv():
    pairs = [(("a",) * 5, ("a",) * 5)]
    curve = wer_by_length_bucket(pairs, bucket_width=10)
    content = length_bucket_tsv(curve)
    assert content == "# bucket_upper_tokens\twer_percent\tpair_count\n10\t0.00\t1\n"


def test_svg_outputs():
    curves = {"de": ratio_curve(3.08, 10.22, [(1, 4.25), (4, 7.73)])}
    svg = ratio_curve_svg(curves)
    assert svg.startswith("<svg ") and svg.rstrip().endswith("</svg>")
    assert ratio_curve_svg(curves) == svg
    pairs = [(("a",) * 5, ("a",) * 5), (("b",) * 15, ("b",) * 15)]
    assert length_bucket_svg(wer_by_length_bucket(pairs, 10)).startswith("<svg ")


def test_write_text_failure(tmp_path):
    with pytest.raises(IoFailure):
        write_text(tmp_path, "content")  # directory, not a file


# --- bundled reference data ------------------------------------------------------

def test_reference_results_shape():
    results = load_reference_results()
    langs = results["languages"]
    assert len(langs) == 15
    for entry in langs.values():
        assert set(entry["werr_by_n"]) == {"1", "4", "6", "8"}
        assert len(entry["plotted_ratio_x"]) == 4
    rows = results["vad_robustness"]["rows"]
    assert set(rows) == {"pt", "vi", "ja", "ko"}


def test_reference_ratio_curves_cover_all_languages():
    curves = reference_ratio_curves()
    assert len(curves) == 15
    assert all(len(points) == 4 for points in curves.values())
