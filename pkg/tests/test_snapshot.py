import numpy as np
import pytest

from zwitter import make_grid
from zwitter.grid import PhaseField
from zwitter.snapshot import SnapshotError, from_bytes, read_snapshot, to_bytes, write_snapshot
from zwitter.state import gaussian_packet
from zwitter.transforms import density_matrix_of_pure_state

from conftest import smooth_field


@pytest.fixture(scope="module")
def grid():
    return make_grid(48, 48, 16.0)


def _objects(grid):
    rng = np.random.default_rng(1)
    real = smooth_field(grid, rng)
    return [
        PhaseField(grid, real),
        PhaseField(grid, real + 1j * smooth_field(grid, rng)),
        PhaseField(grid, real * (1 + 0.5j), "zr"),
        PhaseField(grid, real * (2 - 1j), "kp"),
        gaussian_packet(grid, 0.3, 0.2, 0.6),
        density_matrix_of_pure_state(gaussian_packet(grid, 0.3, 0.2, 0.6)),
    ]


def _arrays(obj):
    if hasattr(obj, "even"):
        return [obj.even, obj.odd]
    return [obj.values]


def test_round_trip_is_bit_exact(grid, tmp_path):
    for i, obj in enumerate(_objects(grid)):
        path = write_snapshot(tmp_path / f"obj{i}.zwit", obj)
        back = read_snapshot(path)
        assert type(back) is type(obj)
        assert back.grid == obj.grid
        assert getattr(back, "rep", None) == getattr(obj, "rep", None)
        for a, b in zip(_arrays(obj), _arrays(back)):
            assert np.array_equal(a, b)
    assert not list(tmp_path.glob("*.tmp"))


def test_rejects_bad_input(grid):
    data = to_bytes(PhaseField(grid, np.ones(grid.shape)))
    with pytest.raises(SnapshotError):
        from_bytes(b"NOPE" + data[4:])
    with pytest.raises(SnapshotError):
        from_bytes(data[:10])
    with pytest.raises(SnapshotError):
        from_bytes(data[:-8])
    with pytest.raises(SnapshotError):
        to_bytes("not a field")
