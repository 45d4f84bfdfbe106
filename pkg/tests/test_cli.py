import csv
import io
import json
import math
from pathlib import Path

import pytest

from gkplink import cli

GOLDEN = Path(__file__).parent / "golden"

GOLDEN_RUNS = {
    "rate_curve.csv": ["rate-curve", "--lattice", "sq,hex", "--n", "1,3", "--loss-db", "0:1:0.5", "--squeeze-db", "inf,10", "--amp", "pre,cc", "--combine", "single"],
    "asymptote.jsonl": ["asymptote", "--eps-range", "1e-6,1e-3,4", "--format", "jsonl"],
    "csum.csv": ["csum-fidelity", "--n", "1:2", "--C", "10,100", "--zeta", "0.95"],
    "swap_mc.csv": ["swap-mc", "--n", "2", "--sigma2", "0,0.1", "--trials", "20000", "--seed", "7"],
}


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse(text, fmt="csv"):
    if fmt == "jsonl":
        return [json.loads(line) for line in text.splitlines()]
    return list(csv.DictReader(io.StringIO(text)))


def same_cell(a, b):
    try:
        fa, fb = float(a), float(b)
    except (TypeError, ValueError):
        return a == b
    if math.isinf(fa) or math.isinf(fb):
        return fa == fb
    return math.isclose(fa, fb, rel_tol=1e-8, abs_tol=1e-12)


@pytest.mark.parametrize("name", sorted(GOLDEN_RUNS))
def test_golden(name, capsys):
    code, out, _ = run(GOLDEN_RUNS[name], capsys)
    assert code == 0
    ref = (GOLDEN / name).read_text()
    fmt = "jsonl" if name.endswith(".jsonl") else "csv"
    if fmt == "csv":
        assert out.splitlines()[0] == ref.splitlines()[0]
    got, want = parse(out, fmt), parse(ref, fmt)
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert list(g) == list(w)
        for key in w:
            assert same_cell(g[key], w[key]), (key, g[key], w[key])


def test_rate_curve_invariants(capsys):
    code, out, _ = run(["rate-curve", "--lattice", "sq,hex", "--amp", "pre,cc", "--n", "1:10", "--loss-db", "0:3:0.5"], capsys)
    assert code == 0
    rows = parse(out)
    assert len(rows) == 2 * 2 * 3 * 10 * 7
    for r in rows:
        rate, n = float(r["rate"]), int(r["N"])
        assert 0 <= rate <= n
        assert rate <= float(r["capacity_q2"])
        if float(r["half_loss_db"]) == 0 and r["squeezing_db"] == "inf":
            assert rate == n


def test_deterministic_and_thread_independent(capsys, tmp_path):
    base = ["swap-mc", "--lattice", "sq,hex", "--n", "1:3", "--sigma2", "0.05,0.2", "--trials", "70000", "--seed", "11"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert cli.main(base + ["--out", str(a)]) == 0
    assert cli.main(base + ["--out", str(b), "--threads", "4"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rows = ["csum-fidelity", "--n", "1:2", "--C", "1,10,100", "--zeta", "0.9,0.99"]
    assert cli.main(rows + ["--out", str(a)]) == 0
    assert cli.main(rows + ["--out", str(b), "--threads", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_swap_mc_ideal_and_dump(capsys, tmp_path):
    dump = tmp_path / "raw.csv"
    code, out, _ = run(["swap-mc", "--sigma2", "0", "--trials", "1000", "--dump", str(dump)], capsys)
    assert code == 0
    rows = parse(out)
    assert {(r["k"], r["count"], r["z"]) for r in rows} == {("0", "1000", "0")}
    raw = list(csv.DictReader(dump.open()))
    assert len(raw) == 1000
    assert all(float(r["x_f"]) == 0 and r["shift_x"] == "0" for r in raw)


def test_swap_mc_exit_on_disagreement(capsys):
    # a negative z-max forces the disagreement path
    code, _, err = run(["swap-mc", "--sigma2", "0.1", "--trials", "1000", "--z-max", "-1"], capsys)
    assert code == 2 and "disagrees" in err


def test_swap_mc_from_link_parameters(capsys):
    code, out, _ = run(["swap-mc", "--loss-db", "0.2", "--squeeze-db", "12", "--amp", "pre,cc", "--trials", "50000"], capsys)
    assert code == 0
    assert len({r["sigma2_eff"] for r in parse(out)}) == 2


def test_asymptote_report(capsys):
    code, out, _ = run(["asymptote"], capsys)
    assert code == 0
    rows = parse(out)
    for lat, xi, gap in (("sq", 1.642, 1.06), ("hex", 1.422, 0.85)):
        sel = [r for r in rows if r["lattice"] == lat]
        assert abs(float(sel[0]["xi_opt"]) - xi) < 0.01
        assert abs(float(sel[0]["gap"]) - gap) < 0.02
        eps = [float(r["eps"]) for r in sel]
        assert min(eps) == pytest.approx(1e-6) and max(eps) == pytest.approx(1e-3)
        sep = [float(r["q2"]) - float(r["i_lb"]) for r in sel]
        assert max(sep) - min(sep) < 0.02


def test_csum_report(capsys):
    code, out, _ = run(["csum-fidelity", "--n", "1", "--C", "1e9", "--zeta", "1", "--tau", "1e-5"], capsys)
    assert code == 0
    assert float(parse(out)[0]["fidelity"]) == pytest.approx(1.0, abs=1e-6)
    code, out, _ = run(["csum-fidelity", "--n", "1", "--C", "100", "--zeta", "0.95"], capsys)
    assert 0 < float(parse(out)[0]["fidelity"]) < 1
    code, out, _ = run(["csum-fidelity", "--n", "1:2", "--C", "1,10,100,1000", "--zeta", "0.95,0.99"], capsys)
    rows = parse(out)
    for n in ("1", "2"):
        for z in ("0.95", "0.99"):
            f = [float(r["fidelity"]) for r in rows if r["N"] == n and r["zeta"] == z]
            assert f == sorted(f)


def test_csum_pulse_file(capsys, tmp_path):
    from gkplink.cavity import flat_top_pulse

    p = flat_top_pulse(1e-7, 1.0, n=512)
    path = tmp_path / "pulse.txt"
    path.write_text("\n".join(f"{w:.17g} {f.real:.17g} {f.imag:.17g}" for w, f in zip(p.omega, p.f)))
    code, out, _ = run(["csum-fidelity", "--n", "1", "--C", "100", "--zeta", "0.95", "--pulse-file", str(path), "--tau", "1e-7"], capsys)
    assert code == 0 and 0 < float(parse(out)[0]["fidelity"]) < 1


def test_jsonl_infinities(capsys):
    code, out, _ = run(["rate-curve", "--n", "1", "--loss-db", "0", "--squeeze-db", "inf", "--format", "jsonl"], capsys)
    rec = json.loads(out)
    assert rec["squeezing_db"] == "inf" and rec["capacity_q2"] == "inf" and rec["rate"] == 1


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('n = [1, 2]\nloss-db = "0:1:0.5"\nsqueeze_db = [10.0]\nlattice = "hex"\nformat = "jsonl"\n')
    code, out, _ = run(["rate-curve", "--config", str(cfg)], capsys)
    assert code == 0
    rows = parse(out, "jsonl")
    assert len(rows) == 6 and {r["lattice"] for r in rows} == {"hex"}
    # command-line flags win over the file
    code, out, _ = run(["rate-curve", "--config", str(cfg), "--n", "3", "--format", "csv"], capsys)
    assert {r["N"] for r in parse(out)} == {"3"}
    bad = tmp_path / "bad.toml"
    bad.write_text("bogus = 1\n")
    assert run(["rate-curve", "--config", str(bad)], capsys)[0] == 1
    bad.write_text("n = [1,\n")
    assert run(["rate-curve", "--config", str(bad)], capsys)[0] == 1
    assert run(["rate-curve", "--config", str(tmp_path / "missing.toml")], capsys)[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["rate-curve", "--n", "0"],
        ["rate-curve", "--lattice", "tri"],
        ["rate-curve", "--loss-db", "3:0:1"],
        ["rate-curve", "--format", "xml"],
        ["csum-fidelity", "--bs-zeta", "1.0"],
        ["csum-fidelity", "--zeta", "1.5"],
        ["swap-mc", "--trials", "0"],
        ["swap-mc", "--sigma2", "-1"],
        ["nonsense"],
        [],
    ],
)
def test_usage_errors(argv, capsys):
    assert run(argv, capsys)[0] == 1


def test_io_error(capsys, tmp_path):
    code, _, err = run(["asymptote", "--out", str(tmp_path / "missing" / "x.csv")], capsys)
    assert code == 3 and "I/O" in err


def test_optimizer_failure_exit(monkeypatch, capsys):
    def boom(lattice):
        raise cli.OptimizationError("no convergence")

    monkeypatch.setattr(cli, "optimize_xi", boom)
    assert run(["asymptote"], capsys)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["rate-curve", "--n", "1,4", "--loss-db", "0:3:0.5", "--amp", "pre,cc", "--lattice", "sq,hex"],
        ["asymptote"],
        ["csum-fidelity", "--n", "1:2", "--C", "1,100"],
        ["swap-mc", "--n", "1:2", "--sigma2", "0.1", "--trials", "10000"],
    ],
)
def test_plot_written(argv, capsys, tmp_path):
    fig = tmp_path / "fig.png"
    code, out, _ = run(argv + ["--plot", str(fig)], capsys)
    assert code == 0 and out
    assert fig.stat().st_size > 1000
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_value_list_parsing():
    assert cli.float_list("0:1:0.25") == [0, 0.25, 0.5, 0.75, 1.0]
    assert cli.float_list("inf,5") == [math.inf, 5.0]
    assert cli.int_list("2:4") == [2, 3, 4]
    assert cli.int_list("1,7") == [1, 7]
