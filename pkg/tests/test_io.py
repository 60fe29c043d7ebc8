import numpy as np
import pytest

from curlow.io import (
    DENSE_BANNER,
    ParseError,
    read_index,
    read_matrix,
    read_omega,
    write_index,
    write_matrix,
    write_omega,
)
from curlow.sampling import RngStream, sample_columns, sample_entries


def test_identity_round_trip_dense(tmp_path):
    path = tmp_path / "eye.mtx"
    write_matrix(np.eye(2), path)
    lines = path.read_text().splitlines()
    assert lines[0] == DENSE_BANNER
    assert lines[1].split() == ["2", "2"]
    # column-major entry order
    assert [float(x) for x in lines[2:]] == [1.0, 0.0, 0.0, 1.0]
    assert np.array_equal(read_matrix(path), np.eye(2))


def test_csv_header_and_round_trip(tmp_path):
    path = tmp_path / "m.csv"
    M = np.arange(6, dtype=float).reshape(2, 3)
    write_matrix(M, path, format="csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# rows=2 cols=3"
    assert lines[1] == "0,1,2"
    assert np.array_equal(read_matrix(path), M)


def test_random_round_trip_is_bitwise_both_formats(tmp_path):
    g = np.random.default_rng(1)
    M = g.standard_normal((50, 40)) * np.exp(g.uniform(-8, 8, size=(50, 40)))
    for fmt, name in (("dense-array", "m.mtx"), ("csv", "m.csv")):
        path = tmp_path / name
        write_matrix(M, path, format=fmt)
        back = read_matrix(path)
        assert back.shape == M.shape
        assert np.array_equal(back, M)  # 17 significant digits: bit-exact


def test_writer_is_byte_deterministic(tmp_path):
    g = np.random.default_rng(2)
    M = g.standard_normal((10, 7))
    p1, p2 = tmp_path / "a.mtx", tmp_path / "b.mtx"
    write_matrix(M, p1)
    write_matrix(M, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_unknown_format_rejected(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(np.eye(2), tmp_path / "m.x", format="json")


def test_dense_bad_banner(tmp_path):
    path = tmp_path / "bad.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n2 2\n1\n1\n1\n1\n")
    with pytest.raises(ParseError) as err:
        read_matrix(path)
    assert err.value.line_no == 1


def test_dense_wrong_entry_count(tmp_path):
    path = tmp_path / "short.mtx"
    path.write_text(f"{DENSE_BANNER}\n2 2\n1.0\n2.0\n3.0\n")
    with pytest.raises(ParseError):
        read_matrix(path)


def test_dense_non_numeric_entry_reports_line(tmp_path):
    path = tmp_path / "junk.mtx"
    path.write_text(f"{DENSE_BANNER}\n2 1\n1.0\nbogus\n")
    with pytest.raises(ParseError) as err:
        read_matrix(path)
    assert err.value.line_no == 4
    assert "bogus" in str(err.value)


def test_csv_ragged_row_rejected(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("# rows=2 cols=3\n1,2,3\n4,5\n")
    with pytest.raises(ParseError):
        read_matrix(path)


def test_csv_dimension_mismatch_rejected(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("# rows=3 cols=2\n1,2\n3,4\n")
    with pytest.raises(ParseError):
        read_matrix(path)


def test_omega_round_trip_small(tmp_path):
    M = np.arange(12, dtype=float).reshape(3, 4) / 7.0
    omega = sample_entries(M, 3, RngStream(seed=4))
    path = tmp_path / "omega.csv"
    write_omega(omega, path)
    back = read_omega(path)
    assert back.shape == omega.shape
    assert np.array_equal(back.rows, omega.rows)
    assert np.array_equal(back.cols, omega.cols)
    assert np.array_equal(back.values, omega.values)


def test_omega_round_trip_large_bitwise(tmp_path):
    g = np.random.default_rng(5)
    M = g.standard_normal((120, 100))
    omega = sample_entries(M, 10_000, RngStream(seed=6))
    path = tmp_path / "omega.csv"
    write_omega(omega, path)
    write_omega(omega, tmp_path / "omega2.csv")
    assert path.read_bytes() == (tmp_path / "omega2.csv").read_bytes()
    back = read_omega(path)
    assert np.array_equal(back.values, omega.values)
    assert np.array_equal(back.rows, omega.rows)


def test_omega_sorted_by_position(tmp_path):
    M = np.arange(30, dtype=float).reshape(5, 6)
    omega = sample_entries(M, 20, RngStream(seed=7))
    path = tmp_path / "omega.csv"
    write_omega(omega, path)
    body = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert body[0] == "i,j,value"
    pairs = [tuple(map(int, ln.split(",")[:2])) for ln in body[1:]]
    assert pairs == sorted(pairs)


def test_omega_duplicate_pair_rejected(tmp_path):
    path = tmp_path / "dup.csv"
    path.write_text("# shape=3,3\ni,j,value\n0,1,2.0\n0,1,3.0\n")
    with pytest.raises(ParseError) as err:
        read_omega(path)
    assert "duplicate" in str(err.value)


def test_omega_empty_body_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("# shape=3,3\ni,j,value\n")
    with pytest.raises(ParseError):
        read_omega(path)


def test_omega_out_of_bounds_rejected(tmp_path):
    path = tmp_path / "oob.csv"
    path.write_text("# shape=3,3\ni,j,value\n0,5,2.0\n")
    with pytest.raises(ParseError):
        read_omega(path)


def test_omega_malformed_header_rejected(tmp_path):
    path = tmp_path / "hdr.csv"
    path.write_text("# shape=3,3\nrow,col,val\n0,1,2.0\n")
    with pytest.raises(ParseError) as err:
        read_omega(path)
    assert err.value.line_no == 2


def test_index_round_trip_preserves_draw_order(tmp_path):
    M = np.arange(56, dtype=float).reshape(7, 8)
    idx, _ = sample_columns(M, 5, RngStream(seed=8))
    path = tmp_path / "cols.txt"
    write_index(idx, path)
    back = read_index(path, kind="col-indices", bound=8)
    assert np.array_equal(back.draw_order, idx.draw_order)
    assert np.array_equal(back.indices, idx.indices)
    assert back.bound == 8


def test_index_one_entry_per_line(tmp_path):
    M = np.arange(20, dtype=float).reshape(4, 5)
    idx, _ = sample_columns(M, 3, RngStream(seed=9))
    path = tmp_path / "cols.txt"
    write_index(idx, path)
    body = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert [int(x) for x in body] == list(idx.draw_order)


def test_index_out_of_bounds_rejected(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("0\n9\n")
    with pytest.raises(ParseError):
        read_index(path, kind="col-indices", bound=5)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        read_matrix(tmp_path / "nope.mtx")
