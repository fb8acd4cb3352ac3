import numpy as np
import pytest

from quasiortho import RngStream


def test_identical_streams_are_bit_identical():
    a = RngStream(1234, 5).generator.standard_normal(100)
    b = RngStream(1234, 5).generator.standard_normal(100)
    assert a.tobytes() == b.tobytes()


def test_distinct_stream_indices_differ():
    a = RngStream(1234, 0).generator.standard_normal(100)
    b = RngStream(1234, 1).generator.standard_normal(100)
    assert not np.array_equal(a, b)


def test_distinct_seeds_differ():
    a = RngStream(1, 0).generator.standard_normal(100)
    b = RngStream(2, 0).generator.standard_normal(100)
    assert not np.array_equal(a, b)


def test_substreams_are_independent_and_reproducible():
    root = RngStream(7)
    kids = [root.substream(i).generator.standard_normal(50) for i in range(4)]
    again = [RngStream(7).substream(i).generator.standard_normal(50)
             for i in range(4)]
    for k, g in zip(kids, again):
        assert k.tobytes() == g.tobytes()
    # substreams differ from each other and from the parent
    parent = RngStream(7).generator.standard_normal(50)
    flat = [parent] + kids
    for i in range(len(flat)):
        for j in range(i + 1, len(flat)):
            assert not np.array_equal(flat[i], flat[j])


def test_nested_substreams_distinct():
    r = RngStream(11)
    a = r.substream(0).substream(1).generator.standard_normal(20)
    b = r.substream(1).substream(0).generator.standard_normal(20)
    assert not np.array_equal(a, b)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, -2)
    with pytest.raises(ValueError):
        RngStream(0).substream(-1)
