"""Video, tiling and bitrate-ladder model shared by every algorithm.

Units are fixed across the package: sizes in megabits, bandwidth in
megabits per second, time in seconds.  Segment sizes are per tile, so a
whole chunk downloaded at level m across D tiles costs D * size(m).
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BitrateLevel:
    """One encoding of a tile segment.

    index is 1-based; index 0 is reserved everywhere for "download
    nothing".  utility is dimensionless and must be nondecreasing with
    size across a ladder.
    """

    index: int
    bitrate_mbps: float
    size_mbits: float
    utility: float


@dataclass(frozen=True)
class BitrateLadder:
    """Ascending encoding levels available for every tile."""

    levels: tuple[BitrateLevel, ...]

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, index_1based: int) -> BitrateLevel:
        """Fetch a level by its 1-based index."""
        if not 1 <= index_1based <= len(self.levels):
            raise IndexError(f"level index {index_1based} outside 1..{len(self.levels)}")
        return self.levels[index_1based - 1]

    @property
    def sizes(self) -> tuple[float, ...]:
        return tuple(lv.size_mbits for lv in self.levels)

    @property
    def utilities(self) -> tuple[float, ...]:
        return tuple(lv.utility for lv in self.levels)

    @property
    def bitrates(self) -> tuple[float, ...]:
        return tuple(lv.bitrate_mbps for lv in self.levels)

    @property
    def max_utility(self) -> float:
        return self.levels[-1].utility


@dataclass(frozen=True)
class VideoSpec:
    """A tiled video: K chunks, D tiles per chunk, delta seconds per chunk."""

    num_chunks: int
    num_tiles: int
    chunk_duration: float
    ladder: BitrateLadder


def log_utilities(sizes: list[float] | tuple[float, ...]) -> tuple[float, ...]:
    """Logarithmic utilities v_m = ln(size_m / size_1).

    The lowest level always gets utility 0, so downloading something is
    never worse than nothing on the utility axis alone.
    """
    if len(sizes) == 0:
        raise ValueError("ladder needs at least one size")
    if any(s <= 0 for s in sizes):
        raise ValueError("segment sizes must be positive")
    if any(b < a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("segment sizes must be nondecreasing")
    base = sizes[0]
    return tuple(math.log(s / base) for s in sizes)


def ladder_from_bitrates(
    bitrates_mbps: list[float] | tuple[float, ...],
    chunk_duration: float,
    utilities: list[float] | tuple[float, ...] | None = None,
) -> BitrateLadder:
    """Build a ladder where size = bitrate * chunk duration exactly."""
    sizes = [b * chunk_duration for b in bitrates_mbps]
    utils = tuple(utilities) if utilities is not None else log_utilities(sizes)
    if len(utils) != len(sizes):
        raise ValueError("one utility per level required")
    levels = tuple(
        BitrateLevel(i + 1, bitrates_mbps[i], sizes[i], utils[i])
        for i in range(len(sizes))
    )
    return BitrateLadder(levels)


def ladder_from_sizes(
    sizes_mbits: list[float] | tuple[float, ...],
    chunk_duration: float,
    utilities: list[float] | tuple[float, ...] | None = None,
) -> BitrateLadder:
    """Build a ladder from per-tile segment sizes; bitrate = size / duration."""
    utils = tuple(utilities) if utilities is not None else log_utilities(tuple(sizes_mbits))
    if len(utils) != len(sizes_mbits):
        raise ValueError("one utility per level required")
    levels = tuple(
        BitrateLevel(i + 1, sizes_mbits[i] / chunk_duration, sizes_mbits[i], utils[i])
        for i in range(len(sizes_mbits))
    )
    return BitrateLadder(levels)


def validate_video(video: VideoSpec) -> list[str]:
    """Return a list of violation messages; an empty list means valid."""
    problems: list[str] = []
    if video.num_chunks < 1:
        problems.append(f"num_chunks must be >= 1, got {video.num_chunks}")
    if video.num_tiles < 1:
        problems.append(f"num_tiles must be >= 1, got {video.num_tiles}")
    if not video.chunk_duration > 0:
        problems.append(f"chunk_duration must be positive, got {video.chunk_duration}")
    levels = video.ladder.levels
    if len(levels) == 0:
        problems.append("ladder has no levels")
        return problems
    for i, lv in enumerate(levels):
        if lv.index != i + 1:
            problems.append(f"level at position {i} has index {lv.index}, expected {i + 1}")
        if not lv.size_mbits > 0:
            problems.append(f"level {i + 1} size must be positive, got {lv.size_mbits}")
        if not lv.bitrate_mbps > 0:
            problems.append(f"level {i + 1} bitrate must be positive, got {lv.bitrate_mbps}")
        if not math.isfinite(lv.utility):
            problems.append(f"level {i + 1} utility is not finite")
    for a, b in zip(levels, levels[1:]):
        if b.size_mbits < a.size_mbits:
            problems.append(f"sizes decrease between levels {a.index} and {b.index}")
        if b.utility < a.utility:
            problems.append(f"utilities decrease between levels {a.index} and {b.index}")
    return problems
