import numpy as np
import pytest

from offtsim.core import OfftError
from offtsim.gridio import format_grid, parse_grid, read_grid, write_grid


def test_parse_mixed():
    g = parse_grid("1 2,3  # comment\n\n-0.5 0,-1\n")
    assert np.array_equal(g, [[1, 2 + 3j], [-0.5, -1j]])


@pytest.mark.parametrize("text", ["", "# only\n", "1 2\n3\n", "1 x\n", "1,2,3\n"])
def test_parse_errors(text):
    with pytest.raises(OfftError):
        parse_grid(text)


def test_roundtrip(tmp_path, rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    write_grid(tmp_path / "g.txt", g)
    assert np.array_equal(read_grid(tmp_path / "g.txt"), g)
    with pytest.raises(OfftError):
        format_grid(np.ones(3))
