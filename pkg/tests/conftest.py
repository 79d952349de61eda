import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from robust_planner import blocksworld  # noqa: E402
from robust_planner.planner import plan, plan_bnb  # noqa: E402


@pytest.fixture(scope="session")
def fig9_domain():
    from robust_planner import data_file, parse_domain

    return parse_domain(data_file("slippery-blocks.domain"))


@pytest.fixture(scope="session")
def fig9_initial(fig9_domain):
    return blocksworld.slippery_blocks(0.5).initial


@pytest.fixture(scope="session")
def fig9_plans():
    """Exhaustive plans for the fig9 scenario at R = 0.5 and 0.6."""
    return {r: plan(blocksworld.slippery_blocks(r)) for r in (0.5, 0.6)}


@pytest.fixture(scope="session")
def fig9_bnb_plans():
    return {r: plan_bnb(blocksworld.slippery_blocks(r)) for r in (0.5, 0.6)}
