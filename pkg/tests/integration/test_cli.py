"""
End-to-end tests of the randfa command line through files
"""

import json

import numpy as np
import pandas as pd
import pytest

from randfa.cli import EXIT_NOT_CONVERGED, EXIT_OK, EXIT_USAGE, main
from randfa.services.scores import procrustes_mse

pytestmark = pytest.mark.integration


@pytest.fixture
def workdir(tmp_path, strong_spec):
    spec = {
        "lambda_true": [list(row) for row in strong_spec.lambda_true],
        "psi2_true": list(strong_spec.psi2_true),
        "n": strong_spec.n,
        "seed": strong_spec.seed,
    }
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    return tmp_path


@pytest.fixture
def simulated(workdir):
    """Data and true factors written by `randfa simulate`."""
    code = main([
        "simulate",
        "--spec", str(workdir / "spec.json"),
        "--output", str(workdir / "data.csv"),
        "--factors-out", str(workdir / "factors.csv"),
    ])
    assert code == EXIT_OK
    return workdir / "data.csv"


def _fit(workdir, data, output="model.json", *extra):
    return main([
        "fit",
        "--input", str(data),
        "--k", "2",
        "--max-iter", "5000",
        "--output", str(workdir / output),
        *extra,
    ])


def _read(path):
    return pd.read_csv(path, float_precision="round_trip")


def test_simulate_fit_scores_diagnose(workdir, simulated):
    assert _fit(workdir, simulated, "model.json", "--trace-out", str(workdir / "trace.csv")) == EXIT_OK
    model = json.loads((workdir / "model.json").read_text())
    assert model["converged"] is True
    assert model["k"] == 2 and model["p"] == 10 and model["n"] == 500
    assert len(_read(workdir / "trace.csv")) == len(model["trace"])

    code = main([
        "scores",
        "--model", str(workdir / "model.json"),
        "--input", str(simulated),
        "--output", str(workdir / "scores.csv"),
        "--residuals-out", str(workdir / "residuals.csv"),
    ])
    assert code == EXIT_OK
    scores = _read(workdir / "scores.csv")
    residuals = _read(workdir / "residuals.csv")
    assert list(scores.columns) == ["f1", "f2"]
    assert list(residuals.columns) == [f"x{j + 1}" for j in range(10)]
    assert scores.shape == (500, 2) and residuals.shape == (500, 10)
    cross = residuals.to_numpy().T @ scores.to_numpy()
    assert np.max(np.abs(cross)) <= 1e-6 * 500

    code = main([
        "diagnose",
        "--model", str(workdir / "model.json"),
        "--input", str(simulated),
        "--report-out", str(workdir / "report.json"),
    ])
    assert code == EXIT_OK
    report = json.loads((workdir / "report.json").read_text())
    assert report["converged"] is True
    assert report["residual_msq_expected"] == 8
    # tr(D2^2)/(n-1) sits on p - k at convergence
    assert report["residual_msq_total"] == pytest.approx(8.0, abs=1e-4)


def test_thomson_scores_shrink_bartlett(workdir, simulated):
    assert _fit(workdir, simulated) == EXIT_OK
    for kind in ("bartlett", "thomson"):
        assert main([
            "scores",
            "--model", str(workdir / "model.json"),
            "--input", str(simulated),
            "--kind", kind,
            "--output", str(workdir / f"{kind}.csv"),
        ]) == EXIT_OK
    omega = np.asarray(json.loads((workdir / "model.json").read_text())["omega"])
    bartlett = _read(workdir / "bartlett.csv").to_numpy()
    thomson = _read(workdir / "thomson.csv").to_numpy()
    np.testing.assert_allclose(thomson, bartlett * (omega - 1.0) / omega, rtol=1e-12, atol=1e-12)


def test_reruns_are_byte_identical(workdir, simulated):
    assert _fit(workdir, simulated, "a.json") == EXIT_OK
    assert _fit(workdir, simulated, "b.json") == EXIT_OK
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()

    for name in ("s1.csv", "s2.csv"):
        main(["scores", "--model", str(workdir / "a.json"), "--input", str(simulated), "--output", str(workdir / name)])
    assert (workdir / "s1.csv").read_bytes() == (workdir / "s2.csv").read_bytes()


def test_end_to_end_scores_track_true_factors(workdir, simulated):
    assert _fit(workdir, simulated) == EXIT_OK
    main(["scores", "--model", str(workdir / "model.json"), "--input", str(simulated), "--output", str(workdir / "scores.csv")])
    scores = _read(workdir / "scores.csv").to_numpy()
    truth = _read(workdir / "factors.csv").to_numpy()
    assert procrustes_mse(scores, truth) < 0.2


def test_simulate_header_option(workdir):
    code = main(["simulate", "--spec", str(workdir / "spec.json"), "--output", str(workdir / "x.csv"), "--header"])
    assert code == EXIT_OK
    assert (workdir / "x.csv").read_text().splitlines()[0] == ",".join(f"x{j + 1}" for j in range(10))


def test_k_not_below_n_is_a_usage_error(workdir, rng):
    data = workdir / "wide.csv"
    pd.DataFrame(rng.standard_normal((22, 30))).to_csv(data, header=False, index=False)
    code = main(["fit", "--input", str(data), "--k", "22", "--output", str(workdir / "m.json")])
    assert code == EXIT_USAGE
    assert not (workdir / "m.json").exists()


def test_missing_input_is_a_data_error(workdir, capsys):
    code = main(["fit", "--input", str(workdir / "absent.csv"), "--k", "1", "--output", str(workdir / "m.json")])
    assert code == 3
    assert "absent.csv" in capsys.readouterr().err


def test_missing_required_option(workdir):
    assert main(["fit", "--input", str(workdir / "x.csv"), "--output", str(workdir / "m.json")]) == EXIT_USAGE


def test_unconverged_fit_still_writes_the_model(workdir, simulated):
    code = main(["fit", "--input", str(simulated), "--k", "2", "--max-iter", "1", "--output", str(workdir / "m.json")])
    assert code == EXIT_NOT_CONVERGED
    assert json.loads((workdir / "m.json").read_text())["converged"] is False


def test_plots_degrade_without_matplotlib(workdir, simulated, mocker):
    mocker.patch("randfa.services.plotting._pyplot", return_value=None)
    warn = mocker.patch("randfa.services.plotting.logger")
    code = _fit(
        workdir,
        simulated,
        "model.json",
        "--trace-out", str(workdir / "trace.csv"),
        "--plot-out", str(workdir / "plots" / "fit"),
    )
    assert code == EXIT_OK
    assert (workdir / "trace.csv").exists()
    assert not (workdir / "plots").exists()
    warn.warning.assert_called_once()
