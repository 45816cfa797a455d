import numpy as np
import pytest

from brmds import io
from brmds.config import load_config, read_config_file
from brmds.data import MaximaMatrix, StationSet
from brmds.errors import MissingData, ParseError, SchemaMismatch, ValidationError
from brmds.gev_margins import GevParams, MarginFit
from brmds.mds import Embedding


@pytest.fixture
def fixture_files(tmp_path):
    st = tmp_path / "stations.csv"
    st.write_text("station_id,easting,northing,elevation\nA,0,0,500\nB,10.5,3,720\nC,4,-8,1300\n", encoding="utf-8")
    mx = tmp_path / "maxima.csv"
    rows = ["year,A,B,C"] + [f"{2000 + y},{10 + y},{12.5 + y},{9 + 2 * y}" for y in range(5)]
    mx.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return st, mx


def test_ingest_fixture(fixture_files):
    st, mx = fixture_files
    stations = io.ingest_stations(st)
    data = io.ingest_maxima(mx, stations)
    assert len(stations) == 3 and data.n == 3 and data.p == 5
    assert data.years[0] == 2000


def test_missing_cell_named(tmp_path, fixture_files):
    st, mx = fixture_files
    text = mx.read_text().replace("2002,12,14.5,13", "2002,12,,13")
    mx.write_text(text)
    with pytest.raises(MissingData) as exc:
        io.ingest_maxima(mx)
    assert exc.value.station == "B" and exc.value.year == 2002


def test_station_mismatch_named(tmp_path, fixture_files):
    st, mx = fixture_files
    st.write_text(st.read_text() + "D,1,1,1\n")
    with pytest.raises(SchemaMismatch) as exc:
        io.ingest_maxima(mx, io.ingest_stations(st))
    assert exc.value.missing == ["D"]


def test_parse_error_location(tmp_path, fixture_files):
    st, _ = fixture_files
    st.write_text(st.read_text().replace("10.5", "ten"))
    with pytest.raises(ParseError) as exc:
        io.ingest_stations(st)
    assert (exc.value.line, exc.value.column) == (3, 2)


def test_roundtrips(tmp_path, rng):
    ids = ["a", "b", "c", "d"]
    M = rng.uniform(1, 2, (4, 4))
    io.write_square_matrix(tmp_path / "m.csv", M, ids)
    back, back_ids = io.read_square_matrix(tmp_path / "m.csv")
    np.testing.assert_array_equal(back, M)
    assert back_ids == ids

    emb = Embedding(rng.normal(size=(4, 3)))
    io.write_embedding(tmp_path / "e.csv", emb, ids)
    e2, ids2 = io.read_embedding(tmp_path / "e.csv")
    np.testing.assert_array_equal(e2.coords, emb.coords)
    assert ids2 == ids

    fits = [MarginFit(s, GevParams(*rng.uniform(0.1, 5, 2), 0.1 * i / 3), i, 0.0) for i, s in enumerate(ids)]
    io.write_gev_params(tmp_path / "g.csv", fits)
    assert [f.params for f in io.read_gev_params(tmp_path / "g.csv")] == [f.params for f in fits]

    st = StationSet(ids, rng.normal(size=(4, 3)))
    io.write_stations(tmp_path / "s.csv", st)
    np.testing.assert_array_equal(io.ingest_stations(tmp_path / "s.csv").coords, st.coords)
    mx = MaximaMatrix(rng.uniform(1, 9, (6, 4)), ids)
    io.write_maxima(tmp_path / "x.csv", mx)
    np.testing.assert_array_equal(io.ingest_maxima(tmp_path / "x.csv").values, mx.values)


def test_config_file_and_overrides(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("# demo\nmethod = 1\nsigma_grid = 1.0:2.0:0.5\nd_set = 2 3\nseed = 4\n")
    assert read_config_file(cfg_path)["method"] == "1"
    cfg = load_config(cfg_path, {"seed": "9", "method": None})
    assert cfg.method == "1" and cfg.seed == 9
    assert cfg.sigma_grid == (1.0, 1.5, 2.0) and cfg.d_set == (2, 3)
    cfg_path.write_text("colour = blue\n")
    with pytest.raises(ValidationError):
        load_config(cfg_path)
    cfg_path.write_text("no equals sign\n")
    with pytest.raises(ParseError):
        load_config(cfg_path)
