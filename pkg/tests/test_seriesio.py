import json

import numpy as np
import pytest

from pcimpute.errors import StructuralError
from pcimpute.estimation import estimate_p
from pcimpute.imputation import ModelConfig
from pcimpute.processes import ProcessConfig
from pcimpute.seriesio import read_series, series_csv, sidecar_path, write_series


@pytest.mark.parametrize("cfg", [ProcessConfig.moving_maxima(), ProcessConfig.armax(0.5, 2.0, 3.0)])
def test_roundtrip_bit_exact(tmp_path, cfg):
    s = ModelConfig(cfg, 3, 0.4).simulate(500, seed=9)
    path = write_series(s, tmp_path / "s.csv", seed=9)
    back = read_series(path)
    np.testing.assert_array_equal(back.x.values, s.x.values)
    np.testing.assert_array_equal(back.u, s.u)
    np.testing.assert_array_equal(back.y[1:], s.y[1:])
    assert estimate_p(back) == estimate_p(s)
    header = json.loads(sidecar_path(path).read_text())
    assert header["seed"] == 9 and header["T"] == 3


def test_row_zero_empty_and_no_temp_files(tmp_path):
    s = ModelConfig(ProcessConfig.iid(), 2, 0.5).simulate(10, seed=1)
    write_series(s, tmp_path / "a.csv")
    lines = (tmp_path / "a.csv").read_text().splitlines()
    assert lines[0] == "index,x,u,y,imputed"
    assert lines[1].endswith(",1,,")
    assert len(lines) == 12
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.csv", "a.csv.json"]


def test_tampered_y_rejected(tmp_path):
    s = ModelConfig(ProcessConfig.iid(), 2, 0.5).simulate(10, seed=1)
    path = write_series(s, tmp_path / "a.csv")
    rows = path.read_text().splitlines()
    parts = rows[3].split(",")
    parts[3] = repr(float(parts[3]) * (1 + 1e-15))
    rows[3] = ",".join(parts)
    path.write_text("\n".join(rows) + "\n")
    with pytest.raises(StructuralError):
        read_series(path)


def test_missing_sidecar(tmp_path):
    s = ModelConfig(ProcessConfig.iid(), 2, 0.5).simulate(10, seed=1)
    (tmp_path / "b.csv").write_text(series_csv(s))
    with pytest.raises(StructuralError):
        read_series(tmp_path / "b.csv")
