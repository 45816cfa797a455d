import numpy as np
import pytest
from skimage.measure import EllipseModel, find_contours

from brmds import io
from brmds.cli import main
from brmds.covariance import CovFunction
from brmds.errors import UnknownStation
from brmds.fit_pipeline import CLASSICAL, ClimateTransform, FittedModel, GridSpec, fit_mds_model
from brmds.madogram import extremal_matrix
from brmds.maps import export_observed_theta_map, export_theta_map, map_grid, observed_theta_map_values
from brmds.results import load_model, save_model
from brmds.simulator import nonstationary_scenario, simulate_field

from helpers import random_stations

BBOX = (-60.0, 60.0, -40.0, 40.0)


@pytest.fixture(scope="module")
def small_fit():
    sc = nonstationary_scenario(nx=5, ny=4, p=150, seed=2)
    data = simulate_field(sc.spec)
    th = extremal_matrix(data)
    grid = GridSpec(sigma_grid=(2.0, 2.5), alpha_grid=(1.5, 2.0), d_set=(3,))
    return sc.stations, data, th, fit_mds_model(1, data, th, grid, 3, sc.stations)


def classical_model():
    stations = random_stations(6, seed=1)
    ct = ClimateTransform(0.4, 0.05, 0.02, 0.001)
    return FittedModel(2.0, CovFunction.powexp(1.2), CLASSICAL, 3, stations, list(stations.ids), climate=ct)


def test_map_grid_shape():
    pts = map_grid((0, 10, 0, 4), 2.0)
    assert pts.shape == (18, 2)


def test_mds_map_reference_and_range(small_fit, tmp_path):
    stations, _, _, model = small_fit
    ref = stations.ids[7]
    e, n, z = stations.coords[7]
    pts, th = export_theta_map(tmp_path / "map.csv", model, ref, 5.0, (e - 20, e + 20, n - 20, n + 20), elevation=z)
    at_ref = np.all(pts == [e, n, z], axis=1)
    assert at_ref.sum() == 1 and th[at_ref][0] == 1.0
    assert np.all((th >= 1.0) & (th < 2.0))
    cols = io.read_grid_csv(tmp_path / "map.csv")
    np.testing.assert_array_equal(cols["theta"], th)
    with pytest.raises(UnknownStation):
        export_theta_map(None, model, "nope", 5.0, BBOX)


def test_map_values_match_model_theta(small_fit):
    stations, _, _, model = small_fit
    from brmds.maps import theta_map_values

    th = theta_map_values(model, stations.ids[0], stations.coords)
    np.testing.assert_allclose(th, model.theta()[0], atol=1e-6)


def test_classical_level_sets_are_ellipses():
    model = classical_model()
    res, box = 0.25, (-50.0, 50.0, -50.0, 50.0)
    _, th = export_theta_map(None, model, np.array([0.0, 0.0, 500.0]), res, box, elevation=500.0)
    es = np.arange(box[0], box[1] + 0.5 * res, res)
    ns = np.arange(box[2], box[3] + 0.5 * res, res)
    img = th.reshape(ns.size, es.size)
    for level in (1.5, 1.7):
        contour = max(find_contours(img, level), key=len)
        xy = np.column_stack([np.interp(contour[:, 1], np.arange(es.size), es), np.interp(contour[:, 0], np.arange(ns.size), ns)])
        ell = EllipseModel()
        assert ell.estimate(xy)
        axis = min(ell.params[2], ell.params[3])
        assert np.max(np.abs(ell.residuals(xy))) < 0.01 * axis


def test_observed_map(small_fit, tmp_path):
    stations, _, th, _ = small_fit
    ref = stations.ids[3]
    vals = observed_theta_map_values(th, stations, ref, stations.coords)
    np.testing.assert_allclose(vals, th[3], atol=1e-4)
    assert vals[3] == pytest.approx(1.0, abs=1e-6)
    const = np.full_like(th, 1.4)
    _, flat = export_observed_theta_map(tmp_path / "obs.csv", const, stations, ref, 10.0, BBOX)
    np.testing.assert_allclose(flat, 1.4, rtol=1e-12)


def test_model_save_load(small_fit, tmp_path):
    _, _, _, model = small_fit
    save_model(tmp_path / "m.json", model)
    back = load_model(tmp_path / "m.json")
    pts = random_stations(5, seed=8).coords
    np.testing.assert_allclose(back.locate(pts), model.locate(pts), rtol=1e-12)
    assert (back.sigma, back.cov, back.d) == (model.sigma, model.cov, model.d)
    cl = classical_model()
    save_model(tmp_path / "c.json", cl)
    np.testing.assert_array_equal(load_model(tmp_path / "c.json").locate(pts), cl.locate(pts))


def test_cli_end_to_end(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["simulate", "--p", "40", "--seed", "3", "--output-dir", out]) == 0
    fr, st = f"{out}/frechet.csv", f"{out}/stations.csv"
    assert main(["estimate-theta", "--frechet", fr, "--output-dir", out]) == 0
    th, ids = io.read_square_matrix(f"{out}/theta_hat.csv")
    assert th.shape == (60, 60)
    cfg = tmp_path / "run.cfg"
    cfg.write_text("method = 1\nsigma_grid = 2.0 2.5\nalpha_grid = 2.0\nd = 3\n")
    assert main(["fit-mds", "--config", str(cfg), "--frechet", fr, "--stations", st, "--output-dir", out]) == 0
    assert main(["theta-map", "--model", f"{out}/model_method1.json", "--reference", "S001",
                 "--bbox", "0 40 0 40", "--resolution", "20", "--output-dir", out]) == 0
    cols = io.read_grid_csv(f"{out}/theta_map.csv")
    assert cols["theta"][0] == 1.0
    first = (tmp_path / "o" / "theta_map.csv").read_bytes()
    main(["theta-map", "--model", f"{out}/model_method1.json", "--reference", "S001",
          "--bbox", "0 40 0 40", "--resolution", "20", "--output-dir", out])
    assert (tmp_path / "o" / "theta_map.csv").read_bytes() == first


def test_cli_exit_codes(tmp_path):
    assert main(["estimate-theta", "--frechet", str(tmp_path / "missing.csv")]) == 1
    assert main(["fit-mds", "--nonsense", "1"]) == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["simulate", "--config", str(bad)]) == 1
    st = tmp_path / "s.csv"
    st.write_text("station_id,easting,northing,elevation\nA,0,0,0\nB,0,0,0\nC,1,1,1\n")
    mx = tmp_path / "m.csv"
    mx.write_text("year,A,B,C\n1,5,5,5\n2,5,5,5\n3,5,5,5\n")
    # constant series cannot be fitted: a numerical failure
    assert main(["fit-margins", "--stations", str(st), "--maxima", str(mx), "--output-dir", str(tmp_path)]) == 2
