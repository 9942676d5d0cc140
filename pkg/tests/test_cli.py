import json
import subprocess
import sys

import pytest

from cev_wkb import MarketSpec, CevParams, bs_call_closed, cev_call_price, read_sweep_csv, wkb_kernel
from cev_wkb.cli import EXIT_CONVERGENCE, EXIT_DOMAIN, EXIT_OK, EXIT_VERIFY, main
from cev_wkb.verify import exp_factor_sign_fault


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_price_bs(capsys):
    code, out, _ = run(capsys, "price-bs", "--sigma", "0.2", "--maturity", "2")
    data = json.loads(out)
    assert code == EXIT_OK
    assert data["closed_form"] == bs_call_closed(MarketSpec(100.0, 110.0, 0.03, 2.0), 0.2)
    assert data["quadrature"] == pytest.approx(data["closed_form"], rel=1e-6)


def test_price_cev_defaults_to_reference(capsys):
    code, out, _ = run(capsys, "price-cev")
    assert code == EXIT_OK
    assert json.loads(out)["price"] == cev_call_price(MarketSpec(100, 110, 0.03, 1.0), CevParams(0.03, 0.3, -0.5))


def test_config_file_and_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"market": {"strike": 100.0}, "cev": {"alpha": -0.7, "sigma": 0.25},
                               "quad": {"rel_tol": 1e-9}}))
    code, out, _ = run(capsys, "price-cev", "--config", str(cfg), "--sigma", "0.3")
    want = cev_call_price(MarketSpec(100, 100, 0.03, 1.0), CevParams(0.03, 0.3, -0.7))
    assert code == EXIT_OK
    assert json.loads(out)["price"] == pytest.approx(want, rel=1e-8)


def test_unknown_config_section(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": {}}))
    assert run(capsys, "price-cev", "--config", str(cfg))[0] == EXIT_DOMAIN


def test_mc_price(capsys):
    code, out, _ = run(capsys, "mc-price", "--paths", "2000", "--steps-per-year", "100", "--seed", "4")
    data = json.loads(out)
    assert code == EXIT_OK and data["n_paths"] == 2000 and data["seed"] == 4
    assert data["std_error"] > 0


def test_kernel_decomposition(capsys):
    code, out, _ = run(capsys, "kernel", "--x", "4444.4", "--x-t", "4600", "--alpha", "-0.5")
    data = json.loads(out)
    ev = wkb_kernel(4444.4, 4600.0, CevParams(0.03, 0.3, -0.5).feller, 1.0)
    assert code == EXIT_OK
    assert data["value"] == ev.value and data["vvm"] == ev.vvm
    assert set(data["constants"]) == {"d1", "d2", "d", "b"}


def test_kernel_domain_error_maps_to_exit_2(capsys):
    code, _, err = run(capsys, "kernel", "--x", "-1", "--x-t", "4600")
    assert code == EXIT_DOMAIN and "error" in err


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--axis", "maturity", "--values", "0.5,1.0", "--paths", "400",
                     "--steps-per-year", "100", "--out", str(out))
    rows = read_sweep_csv(out)
    assert code == EXIT_OK and [r.axis_value for r in rows] == [0.5, 1.0]


def test_negative_sweep_values_with_equals(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "alpha", "--values=-0.9,-0.5", "--paths", "200",
                       "--steps-per-year", "50")
    assert code == EXIT_OK and len(out.splitlines()) == 3


def test_empty_sweep(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "mu")
    assert code == EXIT_OK
    assert out == "axis,axis_value,wkb_price,mc_mean,mc_std_error,abs_error,n_paths,seed,error\n"


def test_convergence(capsys):
    code, out, _ = run(capsys, "convergence", "--checkpoints", "10,100,400", "--steps-per-year", "100")
    lines = out.splitlines()
    assert code == EXIT_OK and lines[0] == "n_paths,mc_mean,mc_std_error,wkb_price"
    assert [int(l.split(",")[0]) for l in lines[1:]] == [10, 100, 400]


def test_parameter_domain_exit(capsys):
    assert run(capsys, "price-cev", "--alpha", "0.5")[0] == EXIT_DOMAIN
    assert run(capsys, "mc-price", "--paths", "1")[0] == EXIT_DOMAIN


def test_convergence_error_exit(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"quad": {"max_doublings": 0, "initial_span_multiplier": 0.01}}))
    assert run(capsys, "price-cev", "--config", str(cfg))[0] == EXIT_CONVERGENCE


def test_verify_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--level", "fast")
    assert code == EXIT_OK and "checks passed" in out
    with exp_factor_sign_fault():
        code, out, _ = run(capsys, "verify")
    assert code == EXIT_VERIFY
    assert "[FAIL] cev_kernel.reassembly" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cev_wkb", "price-bs"], capture_output=True, text=True)
    assert proc.returncode == 0 and "closed_form" in proc.stdout
