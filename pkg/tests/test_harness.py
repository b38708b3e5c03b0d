import json
import math

import pytest
from hypothesis import given, strategies as st

import shocklab.shift
from shocklab.errors import ConfigError
from shocklab.harness import emit_report, parse_config, render_config
from shocklab.harness.cli import main
from shocklab.harness.io import read_csv, write_csv


SMALL = """seed = 7
[shock]
eps = 0.1
[numerics]
L = 200
N = 801
[time]
T = 2
"""


# {{{ config

def test_defaults():
    cfg = parse_config("")
    assert cfg.model.alpha == 0.0
    assert cfg.weight.lam == 0.1
    assert cfg.shock.eps == 0.01
    assert cfg.numerics.cfl == 0.4
    assert cfg.functionals.delta3 == 0.1
    assert cfg.functionals.delta0 == 0.05


def test_amplitude_too_large():
    with pytest.raises(ConfigError) as err:
        parse_config("[shock]\neps = 2\nv_minus = 1\n")
    assert any("amplitude exceeds p(v_minus)" in v for v in err.value.violations)


def test_lambda_out_of_range():
    with pytest.raises(ConfigError) as err:
        parse_config("[weight]\nlambda = 1.5\n")
    assert any("lambda" in v for v in err.value.violations)


def test_all_violations_reported():
    text = "[weight]\nlambda = 1.5\nbogus = 1\n[shock]\neps = 2\n[numerics]\ncfl = x\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    v = err.value.violations
    assert len(v) == 4
    assert any("weight.bogus" in x for x in v)


def test_bumps_and_sweep():
    cfg = parse_config(SMALL + "[perturbation]\nbump2 = h, sine-packet, 5, 2, 0.1\n"
                       "bump1 = v, gaussian, -20, 5, 0.05\n[sweep]\nnu_list = 1, 0.5\n")
    assert [b.target for b in cfg.perturbation.bumps] == ["v", "h"]
    assert cfg.sweep.nu_list == (1.0, 0.5)
    with pytest.raises(ConfigError):
        parse_config(SMALL + "[perturbation]\nbump1 = v, gaussian, 99, 5, 0.05\n")


@given(eps=st.floats(0.05, 0.9), lam=st.floats(0.01, 0.99), T=st.floats(0.1, 100.0),
       seed=st.integers(0, 10 ** 6), amp=st.floats(-0.5, 0.5))
def test_render_round_trip(eps, lam, T, seed, amp):
    text = (f"seed = {seed}\n[shock]\neps = {eps!r}\n[weight]\nlambda = {lam!r}\n"
            f"[numerics]\nL = 400\n[time]\nT = {T!r}\n"
            f"[perturbation]\nbump1 = v, gaussian, 0, 5, {amp!r}\n")
    cfg = parse_config(text)
    assert parse_config(render_config(cfg)) == cfg

# }}}


@given(rows=st.lists(st.tuples(st.floats(allow_nan=False), st.integers(-10 ** 9, 10 ** 9),
                               st.booleans(), st.text("abc_-", min_size=1)), max_size=20))
def test_csv_round_trip(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    write_csv(path, ["a", "b", "c", "d"], rows)
    header, back = read_csv(path)
    assert header == ["a", "b", "c", "d"]
    assert [tuple(r) for r in back] == [tuple(r) for r in rows]
    assert b"\r" not in path.read_bytes()


def test_csv_nan(tmp_path):
    write_csv(tmp_path / "n.csv", ["x"], [[math.nan], [math.inf]])
    _, rows = read_csv(tmp_path / "n.csv")
    assert math.isnan(rows[0][0]) and rows[1][0] == math.inf


# {{{ command line

def _run(args, tmp_path, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_endstates(tmp_path, capsys):
    code, out, _ = _run(["endstates", "--v-minus", "1", "--u-minus", "0", "--eps", "0.1",
                         "--family", "2", "--output", str(tmp_path)], tmp_path, capsys)
    assert code == 0
    assert "v_plus = 1.1111111111111112" in out
    _, rows = read_csv(tmp_path / "endstates.csv")
    assert dict((r[0], r[1]) for r in rows)["sigma"] == pytest.approx(0.9486833, abs=1e-7)


def test_unknown_subcommand(tmp_path, capsys):
    code, _, err = _run(["frobnicate"], tmp_path, capsys)
    assert code == 1
    assert "usage" in err
    assert json.loads(err.strip().splitlines()[-1])["exit_code"] == 1


def test_config_error_record(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("[weight]\nlambda = 1.5\n")
    code, _, err = _run(["contract", "--config", str(cfgfile), "--output", str(tmp_path)],
                        tmp_path, capsys)
    assert code == 1
    rec = json.loads((tmp_path / "error.json").read_text())
    assert rec["error"] == "ConfigError" and rec["violations"]


def test_numerical_failure(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(SMALL + "[perturbation]\nbump1 = v, gaussian, 0, 3, -1.5\n")
    code, _, _ = _run(["contract", "--config", str(cfgfile), "--output", str(tmp_path)],
                      tmp_path, capsys)
    assert code == 2
    assert json.loads((tmp_path / "error.json").read_text())["exit_code"] == 2


def test_contract_zero_perturbation_and_determinism(tmp_path, capsys, monkeypatch):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(SMALL + "[perturbation]\nbump1 = v, gaussian, -20, 5, 0.05\n")
    outs = []
    for name in ("a", "b"):
        code, out, _ = _run(["contract", "--config", str(cfgfile), "--output",
                             str(tmp_path / name)], tmp_path, capsys)
        assert code == 0 and "verdict: PASS" in out
        outs.append({f: (tmp_path / name / f).read_bytes()
                     for f in ("trace.csv", "contract_summary.csv", "ledger.csv", "config.ini")})
    assert outs[0] == outs[1]
    zero = tmp_path / "zero.cfg"
    zero.write_text(SMALL)
    monkeypatch.setenv("SHOCKLAB_OUTPUT", str(tmp_path / "env"))
    code, out, _ = _run(["contract", "--config", str(zero)], tmp_path, capsys)
    assert code == 0 and "verdict: PASS" in out
    assert (tmp_path / "env" / "trace.csv").exists()


def test_verdict_fail_exit_code(tmp_path, capsys, monkeypatch):
    real = shocklab.shift.run_contraction

    def failing(cfg):
        res = real(cfg)
        res.verdict = False
        res.details["verdict"] = False
        return res
    monkeypatch.setattr(shocklab.shift, "run_contraction", failing)
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(SMALL)
    code, out, _ = _run(["contract", "--config", str(cfgfile), "--output", str(tmp_path)],
                        tmp_path, capsys)
    assert code == 3 and "verdict: FAIL" in out

# }}}


# {{{ report

def test_report_contract(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text(SMALL + "[perturbation]\nbump1 = v, gaussian, -20, 5, 0.05\n")
    assert main(["contract", "--config", str(cfgfile), "--output", str(tmp_path)]) == 0
    text = emit_report(tmp_path).read_text()
    assert "wre monotone: PASS" in text


def test_report_sweep(tmp_path, capsys):
    code = main(["sweep", "--eps", "0.1", "--T", "1", "--sweep-nu-list", "1, 0.5",
                 "--bump", "v, gaussian, 10, 1, 0.2", "--output", str(tmp_path)])
    assert code in (0, 3)
    text = emit_report(tmp_path).read_text()
    assert "Per-viscosity drift ratios" in text
    assert "drift_ratio" in text


def test_report_empty(tmp_path):
    text = emit_report(tmp_path).read_text()
    assert "No run artifacts" in text and "missing: trace.csv" in text


def test_report_figures(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    assert main(["profile", "--eps", "0.1", "--numerics-L", "200", "--numerics-N", "401",
                 "--output", str(tmp_path)]) == 0
    assert main(["report", "--directory", str(tmp_path)]) == 0
    assert (tmp_path / "profile.png").exists()
    assert "profile.png" in (tmp_path / "summary.md").read_text()

# }}}
