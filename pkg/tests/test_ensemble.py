import numpy as np
import pytest

from csfkit import (
    Bucket,
    CandidateSegment,
    GrayImage,
    adaptive_threshold,
    make_buckets,
    read_candidates_json,
    read_pgm,
    run_ensemble,
    score_candidate,
    select_ensemble,
    write_pgm,
)
from csfkit.ensemble import boundary_pixels, hull_lattice_count, scores_to_csv_text
from csfkit.errors import DomainError, FormatError, NumericError, SizeLimitError

DISK = tuple(
    (x, y) for x in range(-2, 3) for y in range(-2, 3) if x * x + y * y <= 4
)
PLUS = tuple({(d, 0) for d in range(-3, 4)} | {(0, d) for d in range(-3, 4)})


def paint(shape, center, h=17, w=17, bg=0.1, fg=0.9):
    px = np.full((h, w), bg)
    cx, cy = center
    pixels = tuple((cx + x, cy + y) for x, y in shape)
    for x, y in pixels:
        px[y, x] = fg
    return GrayImage(px), CandidateSegment(pixels)


def chain_candidates():
    a = CandidateSegment(((0, 0), (1, 0)))
    b = CandidateSegment(((1, 0), (2, 0)))
    c = CandidateSegment(((2, 0), (3, 0)))
    return a, b, c


def set_scores(bucket, scores):
    for cand, s in zip(bucket.candidates, scores):
        cand.score = float(s)


def test_gray_image_validation():
    with pytest.raises(DomainError):
        GrayImage(np.zeros(4))
    with pytest.raises(DomainError):
        GrayImage(np.full((2, 2), 1.5))
    with pytest.raises(DomainError):
        GrayImage(np.full((2, 2), np.nan))
    img = GrayImage(np.zeros((3, 5)))
    assert img.height == 3 and img.width == 5


def test_candidate_validation_and_ops():
    with pytest.raises(DomainError):
        CandidateSegment(())
    with pytest.raises(DomainError):
        CandidateSegment(((0, 0), (0, 0)))
    a = CandidateSegment(((0, 0), (1, 0)), source_param=2.0)
    b = a.shifted(3, 1)
    assert b.pixels == ((3, 1), (4, 1))
    assert b.source_param == 2.0
    assert a.overlaps(CandidateSegment(((1, 0),)))
    assert not a.overlaps(b)


def test_adaptive_threshold_matches_bruteforce(rng):
    px = rng.random((7, 9))
    img = GrayImage(px)
    for window in (3, 5):
        T = adaptive_threshold(img, window).pixels
        h = window // 2
        for y in range(7):
            for x in range(9):
                block = px[max(0, y - h) : y + h + 1, max(0, x - h) : x + h + 1]
                assert T[y, x] == pytest.approx(block.mean(), abs=1e-12)


def test_adaptive_threshold_full_window_is_global_mean(rng):
    px = rng.random((5, 8))
    img = GrayImage(px)
    window = 2 * max(5, 8) - 1
    T = adaptive_threshold(img, window).pixels
    assert np.allclose(T, px.mean(), atol=1e-12)


def test_adaptive_threshold_validation():
    img = GrayImage(np.zeros((4, 4)))
    with pytest.raises(DomainError):
        adaptive_threshold(img, 4)
    with pytest.raises(DomainError):
        adaptive_threshold(img, 1)


def test_hull_lattice_counts():
    assert hull_lattice_count([(0, 0)]) == 1
    assert hull_lattice_count([(0, 0), (3, 0)]) == 4
    assert hull_lattice_count([(0, 0), (4, 2)]) == 3  # interior gcd points only
    assert hull_lattice_count([(0, 0), (1, 0), (0, 1), (1, 1)]) == 4
    square = [(x, y) for x in range(3) for y in range(3)]
    assert hull_lattice_count(square) == 9
    assert hull_lattice_count([(0, 0), (2, 0), (0, 2)]) == 6
    assert hull_lattice_count(DISK) == len(DISK)  # hull-closed region
    assert hull_lattice_count(PLUS) == 25  # |x| + |y| <= 3 diamond


def test_boundary_pixels():
    square = CandidateSegment(tuple((x, y) for x in range(3) for y in range(3)))
    assert set(boundary_pixels(square)) == set(square.pixels) - {(1, 1)}
    single = CandidateSegment(((5, 5),))
    assert boundary_pixels(single) == ((5, 5),)


def test_convexity_energy_values():
    img = GrayImage(np.full((8, 8), 0.5))
    thresh = GrayImage(np.full((8, 8), 0.4))
    rect = CandidateSegment(tuple((x, y) for x in range(2, 5) for y in range(2, 4)))
    ec, _, _, _ = score_candidate(rect, img, thresh)
    assert ec == 1.0
    ring = CandidateSegment(
        tuple((x, y) for x in range(2, 5) for y in range(2, 5) if (x, y) != (3, 3))
    )
    ec, _, _, _ = score_candidate(ring, img, thresh)
    assert ec == pytest.approx(8.0 / 9.0)
    assert ring.score is not None


def test_compact_shape_outscores_cross():
    # equal-area regions with equal contrast: the hull-closed disk beats
    # the plus sign, whose hull is a mostly empty diamond; a flat
    # threshold keeps the other two energies identical by symmetry
    img_d, disk = paint(DISK, (8, 8))
    img_p, plus = paint(PLUS, (8, 8))
    flat = GrayImage(np.full((17, 17), 0.3))
    sd = score_candidate(disk, img_d, flat)
    sp = score_candidate(plus, img_p, flat)
    assert sd[1] == pytest.approx(sp[1], abs=1e-12)
    assert sd[2] == sp[2]
    assert sd[0] == 1.0 and sp[0] == pytest.approx(13.0 / 25.0)
    assert sd[3] > sp[3]


def test_score_translation_invariance():
    base, moved = (13, 15), (16, 16)
    img_a, cand_a = paint(DISK, base, h=31, w=31, bg=0.15, fg=0.85)
    img_b, cand_b = paint(DISK, moved, h=31, w=31, bg=0.15, fg=0.85)
    sa = score_candidate(cand_a, img_a, adaptive_threshold(img_a, 9))
    sb = score_candidate(cand_b, img_b, adaptive_threshold(img_b, 9))
    assert sa == sb


def test_score_validation_and_degenerate_cases():
    img = GrayImage(np.full((4, 4), 0.5))
    cand = CandidateSegment(((1, 1), (2, 1)))
    with pytest.raises(DomainError):
        score_candidate(cand, img, GrayImage(np.full((3, 3), 0.5)))
    with pytest.raises(DomainError):
        score_candidate(CandidateSegment(((9, 0),)), img, img)
    # constant image: background contrast vanishes
    with pytest.raises(NumericError):
        score_candidate(cand, img, adaptive_threshold(img, 3))
    # candidate covering everything leaves no background
    whole = CandidateSegment(tuple((x, y) for x in range(4) for y in range(4)))
    thresh = GrayImage(np.full((4, 4), 0.25))
    with pytest.raises(DomainError):
        score_candidate(whole, img, thresh)


def test_make_buckets_groups_overlap_chains():
    a, b, c = chain_candidates()
    d = CandidateSegment(((9, 9),))
    buckets = make_buckets([a, d, b, c])
    assert [bk.indices for bk in buckets] == [(0, 2, 3), (1,)]
    assert buckets[0].m == 3
    assert buckets[0].union_pixels() == {(0, 0), (1, 0), (2, 0), (3, 0)}
    assert make_buckets([]) == []


def test_bucket_invariant():
    a, _, c = chain_candidates()  # a and c are disjoint
    with pytest.raises(DomainError):
        Bucket((0, 1), (a, c))
    with pytest.raises(DomainError):
        Bucket((0,), (a, c))
    assert Bucket((4,), (a,)).m == 1  # singletons need no overlap


def test_selection_two_overlapping():
    a = CandidateSegment(((0, 0), (1, 0)))
    b = CandidateSegment(((1, 0),))
    bucket = make_buckets([a, b])[0]
    set_scores(bucket, (2.5, 1.9))
    assert select_ensemble(bucket, "greedy") == (0,)
    assert select_ensemble(bucket, "exact") == (0,)


def test_selection_chain_greedy_vs_exact():
    bucket = make_buckets(list(chain_candidates()))[0]
    set_scores(bucket, (1.0, 1.5, 1.0))
    assert select_ensemble(bucket, "greedy") == (1,)
    assert select_ensemble(bucket, "exact") == (0, 2)


def test_selection_tie_prefers_greedy_answer():
    a = CandidateSegment(((0, 0), (1, 0)))
    b = CandidateSegment(((1, 0), (2, 0)))
    bucket = make_buckets([a, b])[0]
    set_scores(bucket, (1.0, 1.0))
    assert select_ensemble(bucket, "exact") == (0,)


def test_selection_nested_candidates_agree():
    outer = CandidateSegment(tuple((x, y) for x in range(3) for y in range(3)))
    inner = CandidateSegment(((1, 1),))
    bucket = make_buckets([outer, inner])[0]
    set_scores(bucket, (3.0, 1.0))
    assert select_ensemble(bucket, "greedy") == (0,)
    assert select_ensemble(bucket, "exact") == (0,)


def test_selection_all_negative_scores():
    a = CandidateSegment(((0, 0), (1, 0)))
    b = CandidateSegment(((1, 0),))
    bucket = make_buckets([a, b])[0]
    set_scores(bucket, (-1.0, -2.0))
    # the empty set (total 0) beats any negative pick
    assert select_ensemble(bucket, "exact") == ()
    assert select_ensemble(bucket, "greedy") == (0,)


def test_selection_validation():
    a = CandidateSegment(((0, 0),))
    bucket = Bucket((0,), (a,))
    with pytest.raises(DomainError):
        select_ensemble(bucket, "exact")  # unscored
    a.score = 1.0
    with pytest.raises(DomainError):
        select_ensemble(bucket, "best")


def test_exact_selection_size_limit():
    cands = [
        CandidateSegment(((0, 0), (i + 1, 1))) for i in range(21)
    ]
    bucket = make_buckets(cands)[0]
    set_scores(bucket, range(21))
    with pytest.raises(SizeLimitError):
        select_ensemble(bucket, "exact")
    assert select_ensemble(bucket, "greedy") == (20,)


def total_of(bucket, picks):
    by_index = dict(zip(bucket.indices, bucket.candidates))
    return sum(by_index[i].score for i in picks)


def test_selection_random_buckets_exact_dominates(rng):
    for trial in range(30):
        r = np.random.default_rng(trial)
        cands = []
        for _ in range(10):
            x, y = int(r.integers(0, 5)), int(r.integers(0, 5))
            pts = {(x, y), (x + int(r.integers(0, 2)), y + int(r.integers(0, 2)))}
            cands.append(CandidateSegment(tuple(pts)))
        for bucket in make_buckets(cands):
            set_scores(bucket, r.random(bucket.m) + 0.01)
            greedy = select_ensemble(bucket, "greedy")
            exact = select_ensemble(bucket, "exact")
            gt, et = total_of(bucket, greedy), total_of(bucket, exact)
            assert et >= gt - 1e-12
            assert gt >= 0.5 * et - 1e-12  # greedy half-approximation
            by_index = dict(zip(bucket.indices, bucket.candidates))
            for picks in (greedy, exact):
                chosen = [by_index[i] for i in picks]
                for i in range(len(chosen)):
                    for j in range(i + 1, len(chosen)):
                        assert not chosen[i].overlaps(chosen[j])


def test_run_ensemble_pipeline():
    px = np.full((19, 19), 0.1)
    blob_a = tuple((x, y) for x in range(3, 6) for y in range(3, 6))
    blob_b = tuple((x, y) for x in range(12, 15) for y in range(12, 15))
    for x, y in blob_a + blob_b:
        px[y, x] = 0.9
    img = GrayImage(px)
    cands = [CandidateSegment(blob_a, 1.0), CandidateSegment(blob_b, 2.0)]
    selected, rows = run_ensemble(img, cands, window=9, mode="greedy")
    assert selected == [0, 1]
    assert [row[0] for row in rows] == [0, 1]
    assert rows[0][1] == 1.0 and rows[1][1] == 2.0
    # bright blobs on a uniform field push the background ratio negative
    # (the background mean contrast is the mirror of the blob's excess),
    # so exact mode prefers the empty ensemble while greedy keeps both
    assert all(row[5] < 0 for row in rows)
    selected_exact, rows_exact = run_ensemble(img, cands, window=9, mode="exact")
    assert selected_exact == []
    assert rows_exact == rows
    text = scores_to_csv_text(rows)
    lines = text.splitlines()
    assert lines[0] == "index,source_param,e_convex,e_boundary,e_background,score"
    assert len(lines) == 3


def test_candidates_json_round_trip():
    text = '[{"source_param": 1.5, "pixels": [[0, 0], [1, 0]]}, {"pixels": [[4, 4]]}]'
    cands = read_candidates_json(text)
    assert cands[0].pixels == ((0, 0), (1, 0))
    assert cands[0].source_param == 1.5
    assert cands[1].source_param == 0.0


@pytest.mark.parametrize(
    "text",
    [
        "{",
        '{"pixels": []}',
        "[3]",
        '[{"source_param": 1.0}]',
        '[{"pixels": [[1, 2, 3]]}]',
        '[{"pixels": []}]',
        '[{"pixels": [[0, 0], [0, 0]]}]',
    ],
)
def test_candidates_json_rejects_malformed(text):
    with pytest.raises(FormatError):
        read_candidates_json(text)


def test_pgm_round_trip(tmp_path, rng):
    px = rng.random((6, 4))
    img = GrayImage(px)
    path = tmp_path / "img.pgm"
    write_pgm(img, path)
    back = read_pgm(path)
    assert back.pixels.shape == (6, 4)
    assert np.allclose(back.pixels, np.rint(px * 255) / 255, atol=1e-12)


def test_pgm_sixteen_bit_and_comments():
    vals = np.array([[0, 30000], [65535, 1]], dtype=">u2")
    data = b"P5\n# wide gradient\n2 2\n65535\n" + vals.tobytes()
    img = read_pgm(data)
    assert img.pixels == pytest.approx(vals.astype(float) / 65535)


@pytest.mark.parametrize(
    "data",
    [
        b"P2\n2 2\n255\n" + b"\x00" * 4,
        b"P5\n2 2\n255\n" + b"\x00" * 3,
        b"P5\n2 2\n0\n",
        b"P5\n2 2\n70000\n" + b"\x00" * 8,
        b"P5\n2\n",
        b"P5\nx 2\n255\n" + b"\x00" * 4,
    ],
)
def test_pgm_rejects_malformed(data):
    with pytest.raises(FormatError):
        read_pgm(data)


def test_write_pgm_validates_maxval(tmp_path):
    img = GrayImage(np.zeros((2, 2)))
    with pytest.raises(DomainError):
        write_pgm(img, tmp_path / "x.pgm", maxval=300)
