"""Direct checks of the compression criterion and of greedy maximality."""
import pytest

from tristat.symbolize import _segment_errors


def piece_error(x, start, length):
    return _segment_errors(x[start:start + length + 1])[length - 1]


def check_pieces(x, pieces, tol):
    """Criterion and maximality oracle; returns the number of pieces checked."""
    start = 0
    for p in pieces:
        assert piece_error(x, start, p.len) <= p.len * tol ** 2 + 1e-12
        assert p.inc == pytest.approx(x[start + p.len] - x[start], abs=1e-12)
        end = start + p.len
        if end < len(x) - 1:
            assert piece_error(x, start, p.len + 1) > (p.len + 1) * tol ** 2
        start = end
    assert start == len(x) - 1
    return len(pieces)
