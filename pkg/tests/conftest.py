from __future__ import annotations

import json
import random

import numpy as np
import pytest

from pfwords.markov import MarkovChain
from pfwords.words import Alphabet, Word

# Four-state chain with successors y0->{y1,y2,y3}, y1->{y2,y3}, y2->{y3,y0},
# y3->{y2,y0}, uniform over each successor set.
FIG2_TRANSITIONS = [
    [0.0, 1 / 3, 1 / 3, 1 / 3],
    [0.0, 0.0, 0.5, 0.5],
    [0.5, 0.0, 0.0, 0.5],
    [0.5, 0.0, 0.5, 0.0],
]


def make_fig2_chain() -> MarkovChain:
    return MarkovChain(Alphabet(("y0", "y1", "y2", "y3")), np.array(FIG2_TRANSITIONS), 0)


@pytest.fixture
def abc():
    return Alphabet(("a", "b", "c"))


@pytest.fixture
def word_abc(abc):
    return Word.from_labels(abc, "abc")


@pytest.fixture
def fig2_chain():
    return make_fig2_chain()


@pytest.fixture
def fig2_word(fig2_chain):
    return fig2_chain.word(["y1", "y2", "y3"])


@pytest.fixture
def fig2_path(tmp_path, fig2_chain):
    path = tmp_path / "fig2.json"
    path.write_text(json.dumps(fig2_chain.to_dict()))
    return path


@pytest.fixture
def rng():
    return random.Random(12345)


# Acceptance criteria register one line each; they are echoed after the run
# so they appear even when pytest captures output.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
