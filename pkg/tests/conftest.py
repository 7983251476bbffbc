import pytest

from abr360.bola import BolaParams
from abr360.media import ladder_from_bitrates, VideoSpec

# The two stock ladders used throughout: six levels with log utilities
# and seven levels with pinned utilities (size ratios are exact exps).
SIX_BITRATES = (0.2, 0.4, 0.6, 0.8, 1.0, 1.5)
SEVEN_UTILITIES = (0.0, 0.464, 1.121, 1.582, 2.232, 2.925, 3.624)


@pytest.fixture(scope="session")
def ladder6():
    return ladder_from_bitrates(SIX_BITRATES, 5.0)


@pytest.fixture(scope="session")
def params56():
    # the small-scale walkthrough setting: V=1.66, gamma=0.1
    return BolaParams(v=1.66, gamma=0.1)


@pytest.fixture
def video6(ladder6):
    return VideoSpec(num_chunks=50, num_tiles=6, chunk_duration=5.0, ladder=ladder6)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import SCORECARD
    except ImportError:
        return
    if SCORECARD:
        terminalreporter.section("acceptance scorecard")
        for line in SCORECARD:
            terminalreporter.write_line(line)
