from __future__ import annotations

import pytest

from routegames import ActionProfile, game_a, game_b


@pytest.fixture
def net_a():
    return game_a()


@pytest.fixture
def net_b():
    return game_b()


def profile_with(counts, own_route):
    """Build a profile where agent 0 rides ``own_route`` and the per-route
    totals (including agent 0) equal ``counts``."""
    remaining = list(counts)
    remaining[own_route] -= 1
    assert all(c >= 0 for c in remaining)
    choices = [own_route]
    for route, count in enumerate(remaining):
        choices.extend([route] * count)
    return ActionProfile(tuple(choices))
