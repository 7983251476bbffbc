"""Head-movement probability models: synthetic profiles, CSV ingestion,
prediction noise, and viewed-tile realization."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

ROW_SUM_TOL = 1e-3  # CSV rows within this of 1.0 are renormalized


@dataclass(frozen=True)
class ProfileSpec:
    """Synthetic attention profile.

    d_pos tiles carry all the probability mass; alpha blends a uniform
    split (alpha=0) with a descending linear ramp (alpha=1) whose min/max
    ratio is r_min.
    """

    d_pos: int
    alpha: float
    r_min: float

    def __post_init__(self) -> None:
        if self.d_pos < 1:
            raise ValueError("d_pos must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 <= self.r_min <= 1.0:
            raise ValueError("r_min must lie in [0, 1]")


def linear_base(d_pos: int, r_min: float) -> tuple[float, ...]:
    """Descending arithmetic sequence summing to 1 with min/max = r_min.

    Closed form: p_max = 2 / (d_pos * (1 + r_min)), p_min = r_min * p_max,
    equal steps in between.  d_pos = 1 degenerates to (1,).
    """
    if d_pos < 1:
        raise ValueError("d_pos must be >= 1")
    if d_pos == 1:
        return (1.0,)
    p_max = 2.0 / (d_pos * (1.0 + r_min))
    p_min = r_min * p_max
    step = (p_max - p_min) / (d_pos - 1)
    return tuple(p_max - i * step for i in range(d_pos))


def profile_probs(spec: ProfileSpec, num_tiles: int) -> tuple[float, ...]:
    """Per-tile probabilities of a profile, padded with zeros to num_tiles."""
    if spec.d_pos > num_tiles:
        raise ValueError(f"profile needs {spec.d_pos} tiles but video has {num_tiles}")
    base = linear_base(spec.d_pos, spec.r_min)
    head = [(1.0 - spec.alpha) / spec.d_pos + spec.alpha * b for b in base]
    return tuple(head) + (0.0,) * (num_tiles - spec.d_pos)


def table_profiles() -> tuple[ProfileSpec, ...]:
    """The twelve stock profiles used by the synthetic benchmarks."""
    d_pos = (8, 8, 8, 8, 8, 4, 4, 4, 4, 4, 2, 2)
    alpha = (0.0, 0.25, 0.5, 0.75, 1.0, 0.0, 0.25, 0.5, 0.75, 1.0, 0.0, 0.5)
    return tuple(ProfileSpec(d, a, 0.05) for d, a in zip(d_pos, alpha))


@dataclass(frozen=True)
class HeadModel:
    """Ground-truth viewing probabilities for a whole session.

    probs is a K x D row-stochastic matrix.  viewed optionally pins the
    realized tile per chunk (0-based), bypassing sampling.
    """

    probs: tuple[tuple[float, ...], ...]
    viewed: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if len(self.probs) == 0:
            raise ValueError("head model needs at least one chunk row")
        width = len(self.probs[0])
        for k, row in enumerate(self.probs):
            if len(row) != width:
                raise ValueError("probability rows must share one width")
            if any(p < 0 or p > 1 for p in row):
                raise ValueError(f"row {k} has probabilities outside [0, 1]")
            if abs(sum(row) - 1.0) > 1e-9:
                raise ValueError(f"row {k} sums to {sum(row)}, not 1")
        if self.viewed is not None:
            if len(self.viewed) != len(self.probs):
                raise ValueError("viewed trace length must equal chunk count")
            if any(not 0 <= d < width for d in self.viewed):
                raise ValueError("viewed tile index outside tile range")

    @property
    def num_chunks(self) -> int:
        return len(self.probs)

    @property
    def num_tiles(self) -> int:
        return len(self.probs[0])

    def row(self, chunk_1based: int) -> tuple[float, ...]:
        return self.probs[chunk_1based - 1]


def head_model_from_profile(
    spec: ProfileSpec,
    num_chunks: int,
    num_tiles: int,
    rotate: bool = False,
    seed: int = 0,
) -> HeadModel:
    """Repeat a profile row for every chunk, optionally rotating the tile
    assignment per chunk with a seeded RNG (models a wandering viewport)."""
    row = profile_probs(spec, num_tiles)
    if not rotate:
        return HeadModel(tuple(row for _ in range(num_chunks)))
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(num_chunks):
        shift = int(rng.integers(num_tiles))
        rows.append(tuple(row[(i - shift) % num_tiles] for i in range(num_tiles)))
    return HeadModel(tuple(rows))


def uniform_head_model(num_chunks: int, num_tiles: int) -> HeadModel:
    row = tuple(1.0 / num_tiles for _ in range(num_tiles))
    return HeadModel(tuple(row for _ in range(num_chunks)))


def noisy_probs(
    head: HeadModel, playing_chunk: int, target_chunk: int, noise_rate: float
):
    """Predicted probabilities for target_chunk seen from playing_chunk.

    Prediction error grows linearly with lookahead: e = noise_rate *
    (target - playing).  The prediction blends the true row with the
    uniform distribution by e, degenerating to uniform once e >= 1.
    """
    if noise_rate < 0:
        raise ValueError("noise rate must be nonnegative")
    row = head.row(target_chunk)
    d = head.num_tiles
    e = noise_rate * max(0, target_chunk - playing_chunk)
    if e <= 0:
        return row
    uniform = 1.0 / d
    if e >= 1.0:
        return tuple(uniform for _ in range(d))
    return tuple((1.0 - e) * p + e * uniform for p in row)


def realize_fov(head: HeadModel, chunk_1based: int, rng: np.random.Generator) -> int:
    """Sample (or look up) the tile actually viewed during a chunk, 0-based.

    Sampling inverts the CDF with a single uniform draw, so the realized
    sequence is reproducible for a given seed regardless of library
    version quirks in categorical sampling.
    """
    if head.viewed is not None:
        return head.viewed[chunk_1based - 1]
    row = head.row(chunk_1based)
    u = rng.random()
    acc = 0.0
    for i, p in enumerate(row):
        acc += p
        if u < acc:
            return i
    return len(row) - 1


def sample_viewed_sequence(head: HeadModel, seed: int) -> tuple[int, ...]:
    """Realize the whole session's viewed tiles with one seeded generator."""
    rng = np.random.default_rng(seed)
    return tuple(realize_fov(head, k, rng) for k in range(1, head.num_chunks + 1))


def load_prob_matrix(path_or_file) -> HeadModel:
    """Read a K x D probability matrix from CSV (no header).

    Rows whose sum is within 1e-3 of 1 are renormalized; anything further
    off is rejected.
    """
    if hasattr(path_or_file, "read"):
        rows = list(csv.reader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.reader(fh))
    matrix: list[tuple[float, ...]] = []
    for idx, row in enumerate(rows):
        if not row or all(not c.strip() for c in row):
            continue
        values = [float(c) for c in row]
        total = sum(values)
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise ValueError(f"row {idx} sums to {total:.6f}, outside 1 +/- {ROW_SUM_TOL}")
        matrix.append(tuple(v / total for v in values))
    if not matrix:
        raise ValueError("probability matrix file is empty")
    return HeadModel(tuple(matrix))


def load_viewed_trace(path_or_file, num_tiles: int) -> tuple[int, ...]:
    """Read a viewed-tile trace CSV with columns chunk_index,tile_index (0-based)."""
    if hasattr(path_or_file, "read"):
        rows = list(csv.reader(path_or_file))
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.reader(fh))
    pairs: list[tuple[int, int]] = []
    for row in rows:
        if not row or all(not c.strip() for c in row):
            continue
        if row[0].strip().lower() == "chunk_index":
            continue
        k, d = int(row[0]), int(row[1])
        if not 0 <= d < num_tiles:
            raise ValueError(f"viewed tile {d} outside 0..{num_tiles - 1}")
        pairs.append((k, d))
    pairs.sort()
    if [k for k, _ in pairs] != list(range(len(pairs))):
        raise ValueError("viewed trace must cover chunk indices 0..K-1 exactly once")
    return tuple(d for _, d in pairs)


def dump_prob_matrix(head: HeadModel, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    for row in head.probs:
        writer.writerow([f"{p:.10g}" for p in row])
