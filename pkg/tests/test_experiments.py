import dataclasses

import numpy as np
import pytest

from bdris_wpt import cli, experiments
from bdris_wpt._validation import ContractError, NumericalError
from bdris_wpt.config import preset
from bdris_wpt.experiments import (
    Table,
    compare_architectures,
    dr_table,
    read_csv,
    run_convergence,
    save_tables,
    sweep_m,
    sweep_n,
    waveform_report,
    write_csv,
)


@pytest.fixture
def tiny():
    cfg = preset("desk").replace(M=3, N=2, realizations=3, seed=11)
    return cfg.replace(beamformer=dataclasses.replace(cfg.beamformer, K_rand=300, max_outer=3))


def test_csv_header_and_float_format(tmp_path, tiny):
    t = Table("demo", ("a", "x"), [("u", 1 / 3), ("v", float("inf"))], units="x in A")
    path = write_csv(t, tmp_path / "demo.csv", tiny)
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    assert lines[2] == f"# config_hash={tiny.config_hash()}"
    assert lines[3] == "# seed=11"
    assert lines[-2] == "u,0.333333333"
    meta, back = read_csv(path)
    assert meta["table"] == "demo" and back.columns == ("a", "x")


def test_sweep_aggregates_recomputable(tmp_path, tiny):
    raw, agg = sweep_m(tiny, (2, 3), algorithms=("it",))
    assert len(raw.rows) == 2 * tiny.realizations
    for row in agg.rows:
        alg, M, N, mean, std, count = row
        vals = [r[4] for r in raw.where(algorithm=alg, M=M)]
        assert count == tiny.realizations
        assert mean == pytest.approx(np.mean(vals)) and std == pytest.approx(np.std(vals, ddof=1))
    save_tables([raw, agg], tiny, tmp_path)
    _, back = read_csv(tmp_path / "sweep_m_raw.csv")
    assert len(back.rows) == len(raw.rows)


def test_sweep_n_runs(tiny):
    raw, agg = sweep_n(tiny, (1, 2), algorithms=("dris",))
    assert {r[2] for r in raw.rows} == {1, 2}


def test_identical_bytes_on_rerun(tmp_path, tiny):
    a = save_tables(sweep_m(tiny, (2,), ("sdr",)), tiny, tmp_path / "a")
    b = save_tables(sweep_m(tiny, (2,), ("sdr",)), tiny, tmp_path / "b")
    for pa, pb in zip(a, b):
        with open(pa, "rb") as fa, open(pb, "rb") as fb:
            assert fa.read() == fb.read()


def test_parallel_matches_serial(tiny):
    serial = sweep_m(tiny, (2,), ("it",), workers=1)[0]
    parallel = sweep_m(tiny, (2,), ("it",), workers=2)[0]
    assert serial.column("i_dc") == parallel.column("i_dc")


def test_convergence_traces(tiny):
    (table,) = run_convergence(tiny, ("sdr", "it"), cells=((3, 2),))
    for alg in ("it-wf", "sdr", "it"):
        for loop in ("outer", "inner"):
            vals = [r[5] for r in table.where(algorithm=alg, loop=loop)]
            assert np.all(np.diff(vals) >= -1e-9 * np.abs(vals[1:]))
    assert len(table.where(algorithm="it", loop="inner")) > len(table.where(algorithm="sdr", loop="outer"))


def test_waveform_report_tables(tiny):
    gains, summary, time = waveform_report(tiny, alphas=(1.0,), powers_dbm=(30.0,), M=4, N=4, oversampling=8)
    assert len(gains.rows) == 4 and len(summary.rows) == 1 and len(time.rows) == 32
    frac = gains.column("power_fraction")
    assert sum(frac) == pytest.approx(1.0)
    assert max(gains.column("gain_cascade")) == pytest.approx(1.0)


def test_single_element_architectures_coincide(tiny):
    raw, agg = compare_architectures(tiny.replace(realizations=2), M_list=(1,), N_list=(), channels=("rician",))
    d = [r[-1] for r in raw.where(architecture="D-RIS")]
    bd = [r[-1] for r in raw.where(architecture="BD-RIS")]
    np.testing.assert_allclose(bd, d, rtol=1e-6)
    with pytest.raises(ContractError):
        compare_architectures(tiny, (1,), (), channels=("martian",))


def test_dr_table_shape(tiny):
    raw, agg = dr_table(tiny, setups=((2, 2),), realizations=2)
    assert len(raw.rows) == 4 and len(agg.rows) == 2


def test_cli_success_and_determinism(tmp_path):
    args = ["sweep-m", "--values", "2", "--realizations", "2", "--algorithm", "it", "--seed", "3"]
    assert cli.main(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(args + ["--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "sweep_m_raw.csv").read_bytes() == (tmp_path / "b" / "sweep_m_raw.csv").read_bytes()


def test_cli_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[geometry]\nM = nope\n")
    assert cli.main(["sweep-m", "--config", str(bad)]) == 2
    assert cli.main(["sweep-m", "--values", "0", "--out", str(tmp_path)]) == 2
    assert cli.main(["no-such-command"]) == 2
    assert cli.main(["dr-table", "--setups", "4by4", "--out", str(tmp_path)]) == 2


def test_cli_solver_failure(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalError("synthetic")

    monkeypatch.setattr(experiments, "sweep_n", boom)
    assert cli.main(["sweep-n", "--out", str(tmp_path)]) == 3


def test_cli_help():
    assert cli.main(["--help"]) == 0
