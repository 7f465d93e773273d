import csv
import io
import json
import math
import subprocess
import sys

import pytest

import tailclass as tc
from tailclass.cli import CONVOLVE_HEADER, Report, RunConfig, main, parse_config, run


def _run_main(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestParse:
    def test_classify_defaults(self):
        c = parse_config(["classify", "--model", "pareto:a=2"])
        assert c.command == "classify" and len(c.models) == 1
        assert c.grid == {} and c.output == "json" and c.output_path is None
        assert c.settings == tc.DEFAULT_SETTINGS and c.quad == tc.DEFAULT_QUAD

    def test_convolve_two_models(self):
        c = parse_config(["convolve", "--model", "pareto:a=2", "--model", "pareto:a=3", "--out", "csv"])
        assert [str(m) for m in c.models] == ["pareto:a=2", "pareto:a=3"]
        assert c.output == "csv"

    def test_overrides(self):
        c = parse_config(["pitman", "--model", "weibull:shape=0.5", "--x-start", "2", "--grid-count", "40",
                          "--window", "8", "--kappa", "0.5,1,2", "--u-grid", "2,4", "--tol", "0.03",
                          "--rel-tol", "1e-8"])
        assert c.grid == {"x_start": 2.0, "count": 40, "window": 8}
        assert c.settings.kappas == (0.5, 1.0, 2.0) and c.settings.u_grid == (2.0, 4.0)
        assert c.settings.tol == 0.03 and c.quad.rel_tol == 1e-8
        assert c.grid_for(tc.build("weibull:shape=0.5")).x_start == 2.0

    @pytest.mark.parametrize("argv,token", [
        (["classify"], "1 --model"),
        ([], "command"),
        (["convolve", "--model", "pareto:a=2"], "exactly 2"),
        (["classify", "--model", "pareto:a=2", "--model", "exp"], "exactly 1"),
        (["classify", "--model", "pareto:a=-1"], "pareto:a=-1"),
        (["classify", "--model", "cauchy"], "cauchy"),
        (["classify", "--model", "pareto:a=2", "--out", "csv"], "csv"),
        (["classify", "--model", "pareto:a=2", "--window", "200"], "window"),
        (["classify", "--model", "pareto:a=2", "--x-start", "1e305"], "overflows"),
        (["classify", "--model", "pareto:a=2", "--u-grid", "0.5,2"], "u_grid"),
        (["classify", "--model", "pareto:a=2", "--kappa", "x"], "kappa"),
        (["frobnicate"], "frobnicate"),
    ])
    def test_usage_errors(self, argv, token):
        with pytest.raises(tc.UsageError) as exc:
            parse_config(argv)
        assert token in str(exc.value)

    def test_round_trip(self):
        c = parse_config(["verify", "--model", "pareto:a=2", "--model", "pareto:a=3", "--grid-count", "60"])
        assert RunConfig.from_dict(json.loads(json.dumps(c.to_dict()))) == c


class TestExitCodes:
    def test_classify_pareto(self, capsys):
        code, out, _ = _run_main(["classify", "--model", "pareto:a=2"], capsys)
        assert code == 0
        d = json.loads(out)
        assert {v["class"]: v["verdict"] for v in d["verdicts"]} == {
            c: "Member" for c in ("E", "D", "L", "S", "A", "DcapA", "DcapL")}

    def test_usage(self, capsys):
        code, out, err = _run_main(["classify"], capsys)
        assert code == 2 and out == "" and "usage error" in err

    def test_inconclusive(self, capsys):
        code, out, _ = _run_main(["classify", "--model", "logpareto:b=1"], capsys)
        assert code == 3
        assert any(v["verdict"] == "Inconclusive" for v in json.loads(out)["verdicts"])

    def test_internal_error(self, capsys):
        # grid itself is finite but u * x_max overflows in the index regression
        code, out, err = _run_main(["indices", "--model", "pareto:a=2", "--x-start", "1e302"], capsys)
        assert code == 1 and out == ""
        assert "GridError" in err and "pareto:a=2" in err

    def test_indices_exponential(self, capsys):
        code, out, _ = _run_main(["indices", "--model", "exp:rate=1"], capsys)
        assert code == 0
        d = json.loads(out)
        assert d["indices"]["tail"]["delta"] == math.inf
        assert d["indices"]["tail"]["flags"]["delta"] == "+inf"
        assert "M2 unbounded" in d["flags"]

    def test_subprocess_entry_point(self):
        p = subprocess.run([sys.executable, "-m", "tailclass", "classify", "--model", "pareto:a=2", "--out", "text"],
                           capture_output=True, text=True, timeout=120)
        assert p.returncode == 0 and "Member" in p.stdout
        p = subprocess.run([sys.executable, "-m", "tailclass", "classify"], capture_output=True, text=True, timeout=120)
        assert p.returncode == 2

    @pytest.mark.slow
    def test_verify_pareto_pair(self, capsys):
        code, out, _ = _run_main(["verify", "--model", "pareto:a=2", "--model", "pareto:a=3"], capsys)
        assert code == 0
        cl = json.loads(out)["closure"]
        assert cl["preconditions"]["satisfied"]
        assert cl["preconditions"]["witness_delta"] == pytest.approx(2.0)
        assert cl["convolution_e"]["verdict"] == "Member"


class TestReport:
    def test_json_round_trip(self):
        r = run(parse_config(["indices", "--model", "exp:rate=1"]))
        s = r.to_json()
        assert Report.from_json(s).to_json() == s
        assert Report.from_json(s) == r

    def test_round_trip_with_closure(self):
        r = run(parse_config(["verify", "--model", "exp:rate=1", "--model", "exp:rate=1"]))
        s = r.to_json()
        assert Report.from_json(s).to_json() == s

    def test_deterministic_modulo_timings(self):
        cfg = parse_config(["classify", "--model", "logperturbed:a=2,p=0.3"])
        a, b = run(cfg), run(cfg)
        assert a.to_json(timings=False) == b.to_json(timings=False)
        assert "timings" not in json.loads(a.to_json(timings=False))
        assert set(a.timings) and all(t >= 0 for t in a.timings.values())

    def test_verify_single_model_bounds(self):
        r = run(parse_config(["verify", "--model", "pareto:a=2"]))
        assert r.bounds and all(b.holds for b in r.bounds)

    def test_text_output(self, capsys):
        code, out, _ = _run_main(["classify", "--model", "exp:rate=1", "--out", "text"], capsys)
        assert code == 0
        assert "NonMember" in out and "positive decrease not established" in out


class TestCsv:
    def test_convolve_header_and_rows(self, capsys):
        code, out, _ = _run_main(["convolve", "--model", "exp:rate=1", "--model", "exp:rate=1",
                                  "--grid-count", "20", "--window", "8", "--out", "csv"], capsys)
        assert code == 0
        rows = list(csv.reader(io.StringIO(out)))
        assert tuple(rows[0]) == CONVOLVE_HEADER == ("x", "density", "tail", "hazard", "max_sum_ratio")
        assert len(rows) == 21
        x, dens, tail, haz, ms = map(float, rows[5])
        assert dens == pytest.approx(x * math.exp(-x), rel=1e-8)
        assert tail == pytest.approx((1 + x) * math.exp(-x), rel=1e-8)
        assert ms == pytest.approx((1 + x) / 2, rel=1e-8)
        assert haz == pytest.approx(x / (1 + x), rel=1e-8)

    def test_pitman_columns(self, capsys):
        code, out, _ = _run_main(["pitman", "--model", "pareto:a=2", "--kappa", "0.5,1",
                                  "--out", "csv"], capsys)
        assert code == 0
        header = next(csv.reader(io.StringIO(out)))
        assert header == ["x", "pitman_kappa_0.5", "pitman_kappa_1"]

    def test_output_path(self, tmp_path, capsys):
        path = tmp_path / "curve.csv"
        code, out, _ = _run_main(["convolve", "--model", "pareto:a=2", "--model", "pareto:a=3",
                                  "--grid-count", "20", "--window", "8", "--out", "csv",
                                  "--output-path", str(path)], capsys)
        assert code == 0 and out == ""
        assert path.read_text().splitlines()[0] == ",".join(CONVOLVE_HEADER)
