import json

import pytest

from osuabr.cli import main, tub_check
from osuabr.core import InvalidParameterError

from helpers import chain_text


def test_tub_check_default_sweep():
    rep = tub_check(samples=2000)
    assert rep.total_violations == 0 and rep.worst_bound_slack >= 0


def test_tub_check_stress_delta():
    rep = tub_check(samples=2000, delta_min=0.48, delta_max=0.49, seed=1)
    assert rep.total_violations == 0


def test_tub_check_rejects_delta():
    with pytest.raises(InvalidParameterError, match="0.5"):
        tub_check(samples=10, delta_max=0.6)


def test_exit_codes(tmp_path, capsys):
    assert main(["tub-check", "--samples", "200"]) == 0
    assert main(["tub-check", "--samples", "10", "--delta-max", "0.6"]) == 1
    bad = tmp_path / "bad.ini"
    bad.write_text("[nonsense]\n")
    assert main(["run", "--scenario", str(bad)]) == 1
    out = tmp_path / "missing" / "t.csv"
    assert main(["run", "--scenario", "single_vc", "--duration", "1000", "--trace", str(out)]) == 2


def test_run_writes_trace(tmp_path, capsys):
    sc = tmp_path / "chain.ini"
    sc.write_text(chain_text(bandwidth=10e6, duration=30000.0))
    trace = tmp_path / "t.csv"
    code = main(["run", "--scenario", str(sc), "--option", "precise", "--becn",
                 "--duration", "30000", "--trace", str(trace), "--seed", "18446744073709551615"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["duration_us"] == 30000 and "vc1" in report["vc_mean_rate"]
    assert trace.read_text().startswith("time_us,kind,subject,value\n")


def test_oracle_command(capsys):
    assert main(["oracle", "--scenario", "upstream_bottleneck"]) == 0
    alloc = json.loads(capsys.readouterr().out)
    assert alloc["vc4"] == pytest.approx(2 * alloc["vc3"])
