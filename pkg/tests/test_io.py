import numpy as np
import pytest

from biphoton_fwm import io
from biphoton_fwm.lattice import Lattice, random_state
from biphoton_fwm.propagator import StepPlan, run


def test_grid_roundtrip_is_bit_exact(tmp_path, rng):
    lat = Lattice(7, dz=0.3)
    s = random_state(lat, rng)
    path = tmp_path / "grid.csv"
    io.write_grid(s, path)
    back = io.read_grid(path, lat, s.t)
    np.testing.assert_array_equal(back.psi_omega, s.psi_omega)
    np.testing.assert_array_equal(back.psi_e, s.psi_e)


def test_grid_rejects_foreign_header(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        io.read_grid(path, Lattice(3))


def test_series_layout(tmp_path, rng):
    with pytest.warns(UserWarning):
        lat = Lattice(2)
    traj = run(random_state(lat, rng), StepPlan(0.4, n_steps=1))
    io.write_diagonal_series(traj, tmp_path / "d.csv")
    header, rows = io.read_table(tmp_path / "d.csv")
    assert header == io.DIAGONAL_HEADER
    assert rows.shape == (4, 6)
    np.testing.assert_array_equal(rows[:, 0], [0, 0, 1, 1])
    np.testing.assert_array_equal(rows[:, 1], [0, 1, 0, 1])
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 2


def test_series_sorted_by_time(tmp_path, rng):
    lat = Lattice(3)
    traj = run(random_state(lat, rng), StepPlan(0.4, n_steps=3))
    io.write_intensity_series(list(reversed(traj.snapshots)), tmp_path / "i.csv")
    header, rows = io.read_table(tmp_path / "i.csv")
    assert header == io.INTENSITY_HEADER
    assert np.all(np.diff(rows[:, 0]) >= 0)


def test_empty_series_is_header_only(tmp_path):
    io.write_diagonal_series([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(io.DIAGONAL_HEADER) + "\n"
    header, rows = io.read_table(tmp_path / "e.csv")
    assert rows.shape == (0, 6)


def test_output_is_deterministic(tmp_path):
    lat = Lattice(5)
    s = random_state(lat, np.random.default_rng(3))
    traj = run(s, StepPlan(0.2, n_steps=4))
    io.write_diagonal_series(traj, tmp_path / "a.csv")
    io.write_diagonal_series(traj, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_fmt_round_trips_doubles():
    for x in (0.1, 1 / 3, 2.0**-1074, 1.7976931348623157e308, -0.0):
        assert float(io.fmt(x)) == x


def test_plot_script(tmp_path):
    io.write_plot_script(tmp_path / "p.gp", "stem", with_grid=True)
    text = (tmp_path / "p.gp").read_text()
    assert '"stem_diagonal.csv"' in text and '"stem_grid.csv"' in text


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        io.write_rows(blocker / "sub" / "x.csv", ["a"], [[1.0]])
