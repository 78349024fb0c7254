"""Ensemble selection over candidate segmentations of a grayscale image.

Candidate regions (e.g. one per trial radius of an upstream segmenter)
are scored by three efficiencies -- convexity, boundary contrast and
background separation -- then grouped into buckets of mutually
overlapping candidates, and a non-overlapping subset is picked per
bucket to maximize total score.  Greedy selection is the production
path; exact brute force over small buckets is the verification oracle.

Pixel coordinates are (x, y) with x the column and y the row; images
are stored row-major as (height, width) float arrays in [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, FormatError, NumericError, SizeLimitError

_EXACT_LIMIT = 20
_CONTRAST_EPS = 1e-12
_N4 = ((1, 0), (-1, 0), (0, 1), (0, -1))
_N8 = tuple(
    (dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (dx, dy) != (0, 0)
)


@dataclass(frozen=True)
class GrayImage:
    """Grayscale raster with intensities normalized to [0, 1]."""

    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.float64))
        if arr.ndim != 2 or arr.size == 0:
            raise DomainError(f"image must be 2-D and nonempty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
            raise DomainError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class CandidateSegment:
    """A candidate region: unique pixel coordinates plus the parameter
    (e.g. radius) of the segmenter run that produced it."""

    pixels: tuple[tuple[int, int], ...]
    source_param: float = 0.0
    score: float | None = None

    def __post_init__(self) -> None:
        pix = tuple((int(x), int(y)) for x, y in self.pixels)
        if not pix:
            raise DomainError("candidate must contain at least one pixel")
        if len(set(pix)) != len(pix):
            raise DomainError("candidate pixels must be unique")
        self.pixels = pix

    @property
    def pixel_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.pixels)

    def overlaps(self, other: "CandidateSegment") -> bool:
        return not self.pixel_set.isdisjoint(other.pixel_set)

    def shifted(self, dx: int, dy: int) -> "CandidateSegment":
        return CandidateSegment(
            tuple((x + dx, y + dy) for x, y in self.pixels), self.source_param
        )


@dataclass(frozen=True)
class Bucket:
    """Candidates forming one connected component of the overlap graph.

    indices are positions in the original candidate list; members keep
    that order.
    """

    indices: tuple[int, ...]
    candidates: tuple[CandidateSegment, ...]

    def __post_init__(self) -> None:
        if len(self.indices) != len(self.candidates):
            raise DomainError("indices and candidates must align")
        if len(self.candidates) > 1:
            for i, cand in enumerate(self.candidates):
                if not any(
                    cand.overlaps(other)
                    for j, other in enumerate(self.candidates)
                    if j != i
                ):
                    raise DomainError(
                        f"candidate {self.indices[i]} overlaps nothing in its bucket"
                    )

    @property
    def m(self) -> int:
        return len(self.candidates)

    def union_pixels(self) -> frozenset[tuple[int, int]]:
        out: set[tuple[int, int]] = set()
        for cand in self.candidates:
            out.update(cand.pixels)
        return frozenset(out)


def adaptive_threshold(img: GrayImage, window: int) -> GrayImage:
    """Local-mean threshold image over a window x window neighborhood.

    The neighborhood is clamped at the image edges: border pixels
    average only the in-image part of their window, so a window wide
    enough to cover the image from every pixel yields the global mean
    everywhere.
    """
    if window % 2 == 0:
        raise DomainError(f"window must be odd, got {window}")
    if window < 3:
        raise DomainError(f"window must be >= 3, got {window}")
    half = window // 2
    px = img.pixels
    # integral image with a zero row/column prefix: box sums in O(1)
    integral = np.zeros((img.height + 1, img.width + 1))
    np.cumsum(np.cumsum(px, axis=0), axis=1, out=integral[1:, 1:])
    ys = np.arange(img.height)
    xs = np.arange(img.width)
    y0 = np.maximum(ys - half, 0)
    y1 = np.minimum(ys + half, img.height - 1) + 1
    x0 = np.maximum(xs - half, 0)
    x1 = np.minimum(xs + half, img.width - 1) + 1
    sums = (
        integral[np.ix_(y1, x1)]
        - integral[np.ix_(y0, x1)]
        - integral[np.ix_(y1, x0)]
        + integral[np.ix_(y0, x0)]
    )
    counts = np.outer(y1 - y0, x1 - x0)
    return GrayImage(np.clip(sums / counts, 0.0, 1.0))


def _convex_hull(points: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Monotone-chain hull, counterclockwise, collinear points dropped."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[int, int]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def hull_lattice_count(points: Sequence[tuple[int, int]]) -> int:
    """Number of integer points inside or on the convex hull of points.

    Exact integer arithmetic: twice the shoelace area plus boundary
    points counted edge-wise by gcd, combined via Pick's theorem.
    Degenerate (collinear) hulls count the segment's lattice points.
    """
    hull = _convex_hull(points)
    if len(hull) == 1:
        return 1
    if len(hull) == 2:
        (x1, y1), (x2, y2) = hull
        return math.gcd(abs(x2 - x1), abs(y2 - y1)) + 1
    twice_area = 0
    boundary = 0
    for i, (x1, y1) in enumerate(hull):
        x2, y2 = hull[(i + 1) % len(hull)]
        twice_area += x1 * y2 - x2 * y1
        boundary += math.gcd(abs(x2 - x1), abs(y2 - y1))
    return (abs(twice_area) + boundary + 2) // 2


def boundary_pixels(C: CandidateSegment) -> tuple[tuple[int, int], ...]:
    """Pixels of C with at least one 4-neighbor outside C (image edges count)."""
    inside = C.pixel_set
    return tuple(
        (x, y)
        for x, y in C.pixels
        if any((x + dx, y + dy) not in inside for dx, dy in _N4)
    )


def score_candidate(
    C: CandidateSegment,
    img: GrayImage,
    thresh: GrayImage,
    bucket: Bucket | None = None,
) -> tuple[float, float, float, float]:
    """(e_convex, e_boundary, e_background, total) for one candidate.

    e_convex    = |C| / lattice points of C's convex hull
    e_boundary  = 1 - mean over boundary pixels of (surround max - T),
                  the surround being the in-image 8-neighborhood
    e_background= mean(I-T over C) / mean(I-T over background), the
                  background being the image minus the bucket's union
                  (minus C alone when no bucket is given)

    Also fills C.score with the total.
    """
    if thresh.pixels.shape != img.pixels.shape:
        raise DomainError("threshold image must match image dimensions")
    h, w = img.height, img.width
    if any(not (0 <= x < w and 0 <= y < h) for x, y in C.pixels):
        raise DomainError("candidate pixels must lie inside the image")
    I = img.pixels
    T = thresh.pixels

    e_convex = len(C.pixels) / hull_lattice_count(C.pixels)

    terms = []
    for x, y in boundary_pixels(C):
        best = -1.0
        for dx, dy in _N8:
            nx, ny = x + dx, y + dy
            if 0 <= nx < w and 0 <= ny < h and I[ny, nx] > best:
                best = I[ny, nx]
        if best < 0.0:  # 1x1 image: no surround to inspect
            best = I[y, x]
        terms.append(best - T[y, x])
    e_boundary = 1.0 - float(np.mean(terms))

    covered = bucket.union_pixels() if bucket is not None else C.pixel_set
    mask = np.ones((h, w), dtype=bool)
    for x, y in covered:
        if 0 <= x < w and 0 <= y < h:
            mask[y, x] = False
    if not mask.any():
        raise DomainError("bucket covers the whole image; no background left")
    diff = I - T
    xs = np.fromiter((x for x, _ in C.pixels), dtype=np.intp, count=len(C.pixels))
    ys = np.fromiter((y for _, y in C.pixels), dtype=np.intp, count=len(C.pixels))
    num = float(diff[ys, xs].mean())
    den = float(diff[mask].mean())
    if abs(den) < _CONTRAST_EPS:
        raise NumericError("background has zero mean contrast; score undefined")
    e_background = num / den

    total = e_convex + e_boundary + e_background
    C.score = total
    return e_convex, e_boundary, e_background, total


def make_buckets(candidates: Sequence[CandidateSegment]) -> list[Bucket]:
    """Connected components of the pairwise pixel-overlap graph.

    Buckets are ordered by their smallest candidate index; members keep
    input order.
    """
    n = len(candidates)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict[tuple[int, int], int] = {}
    for i, cand in enumerate(candidates):
        for pix in cand.pixels:
            if pix in owner:
                ra, rb = find(owner[pix]), find(i)
                if ra != rb:
                    parent[rb] = ra
            else:
                owner[pix] = i
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in sorted(groups.values(), key=min):
        out.append(
            Bucket(tuple(members), tuple(candidates[i] for i in members))
        )
    return out


def _greedy_pick(bucket: Bucket) -> tuple[int, ...]:
    """Bucket-local positions picked greedily by score, ties to lower index."""
    order = sorted(
        range(bucket.m),
        key=lambda i: (-bucket.candidates[i].score, bucket.indices[i]),
    )
    chosen: list[int] = []
    for i in order:
        if all(not bucket.candidates[i].overlaps(bucket.candidates[j]) for j in chosen):
            chosen.append(i)
    return tuple(sorted(chosen))


def select_ensemble(bucket: Bucket, mode: str = "greedy") -> tuple[int, ...]:
    """Non-overlapping candidate subset of one bucket, as original indices.

    greedy: repeatedly take the highest-score candidate compatible with
    the picks so far.  exact: brute force over all subsets (m <= 20),
    maximizing total score; ties resolve to the greedy answer when it
    attains the maximum, otherwise to the lexicographically smallest
    index set.
    """
    if mode not in ("greedy", "exact"):
        raise DomainError(f"mode must be 'greedy' or 'exact', got {mode!r}")
    if any(c.score is None for c in bucket.candidates):
        raise DomainError("all candidates must be scored before selection")
    greedy_local = _greedy_pick(bucket)
    if mode == "greedy":
        return tuple(bucket.indices[i] for i in greedy_local)
    m = bucket.m
    if m > _EXACT_LIMIT:
        raise SizeLimitError(f"exact mode supports at most {_EXACT_LIMIT}, got {m}")
    conflict = [0] * m
    for i in range(m):
        for j in range(i + 1, m):
            if bucket.candidates[i].overlaps(bucket.candidates[j]):
                conflict[i] |= 1 << j
                conflict[j] |= 1 << i
    scores = [c.score for c in bucket.candidates]
    best_masks: list[int] = [0]
    best_total = 0.0
    for mask in range(1, 1 << m):
        total = 0.0
        mm = mask
        feasible = True
        while mm:
            i = (mm & -mm).bit_length() - 1
            if conflict[i] & (mm & (mm - 1)):
                feasible = False
                break
            total += scores[i]
            mm &= mm - 1
        if not feasible:
            continue
        if total > best_total:
            best_total = total
            best_masks = [mask]
        elif total == best_total:
            best_masks.append(mask)
    greedy_mask = 0
    for i in greedy_local:
        greedy_mask |= 1 << i
    if greedy_mask in best_masks:
        winner = greedy_mask
    else:
        winner = min(
            best_masks,
            key=lambda mk: tuple(i for i in range(m) if mk >> i & 1),
        )
    return tuple(bucket.indices[i] for i in range(m) if winner >> i & 1)


def run_ensemble(
    img: GrayImage,
    candidates: Sequence[CandidateSegment],
    window: int,
    mode: str = "greedy",
) -> tuple[list[int], list[tuple]]:
    """Threshold, score, bucket and select; the full pipeline.

    Returns (sorted selected indices, per-candidate score rows of
    (index, source_param, e_convex, e_boundary, e_background, score)).
    """
    thresh = adaptive_threshold(img, window)
    rows: list[tuple] = [()] * len(candidates)
    selected: list[int] = []
    for bucket in make_buckets(candidates):
        for idx, cand in zip(bucket.indices, bucket.candidates):
            ec, eb, eg, total = score_candidate(cand, img, thresh, bucket=bucket)
            rows[idx] = (idx, cand.source_param, ec, eb, eg, total)
        selected.extend(select_ensemble(bucket, mode))
    return sorted(selected), rows


def scores_to_csv_text(rows: Iterable[tuple]) -> str:
    lines = ["index,source_param,e_convex,e_boundary,e_background,score"]
    for idx, param, ec, eb, eg, total in rows:
        lines.append(
            f"{idx},{param:.9g},{ec:.9g},{eb:.9g},{eg:.9g},{total:.9g}"
        )
    return "\n".join(lines) + "\n"


def read_candidates_json(text: str) -> list[CandidateSegment]:
    """Parse a JSON list of {source_param, pixels: [[x, y], ...]}."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad candidate JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise FormatError("candidate JSON must be a list")
    out = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "pixels" not in entry:
            raise FormatError(f"candidate {i}: expected an object with 'pixels'")
        pixels = entry["pixels"]
        if not isinstance(pixels, list) or not all(
            isinstance(p, list) and len(p) == 2 for p in pixels
        ):
            raise FormatError(f"candidate {i}: pixels must be [[x, y], ...]")
        try:
            out.append(
                CandidateSegment(
                    tuple((int(x), int(y)) for x, y in pixels),
                    source_param=float(entry.get("source_param", 0.0)),
                )
            )
        except DomainError as exc:
            raise FormatError(f"candidate {i}: {exc}") from exc
    return out


def read_pgm(source: bytes | str | Path) -> GrayImage:
    """Load a binary (P5) PGM file, normalizing intensities by maxval."""
    data = source if isinstance(source, bytes) else Path(source).read_bytes()
    pos = 0

    def token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError("truncated PGM header")
        return data[start:pos]

    if token() != b"P5":
        raise FormatError("not a binary PGM (P5) file")
    try:
        width, height, maxval = int(token()), int(token()), int(token())
    except ValueError as exc:
        raise FormatError(f"bad PGM header field: {exc}") from exc
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise FormatError(f"bad PGM dimensions {width}x{height} maxval {maxval}")
    pos += 1  # single whitespace after maxval
    depth = 1 if maxval < 256 else 2
    need = width * height * depth
    raster = data[pos : pos + need]
    if len(raster) != need:
        raise FormatError(f"PGM raster truncated: need {need}, got {len(raster)}")
    dtype = np.uint8 if depth == 1 else np.dtype(">u2")
    arr = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return GrayImage(arr.astype(np.float64) / maxval)


def write_pgm(img: GrayImage, path: str | Path, maxval: int = 255) -> None:
    """Write a binary (P5) PGM file, quantizing intensities to maxval."""
    if not 1 <= maxval <= 255:
        raise DomainError(f"maxval must be in [1, 255], got {maxval}")
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode()
    quant = np.rint(img.pixels * maxval).astype(np.uint8)
    Path(path).write_bytes(header + quant.tobytes())
