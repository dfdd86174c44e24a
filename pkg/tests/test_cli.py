import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from _support import params_for_method
from heunbeta.cli import format_complex, main, parse_complex, parse_grid
from heunbeta.errors import ParameterError
from test_acceptance import TERM_ALPHA, TERM_BETA, TERM_DELTA, TERM_GAMMA, _a2_a3, damped_newton

SYM = ["--a", "0.5", "--q", "0.105", "--alpha", "0.3", "--beta", "0.7", "--gamma", "0.5", "--delta", "0.5"]
GENERIC = ["--a", "2.5", "--q", "0.3", "--alpha", "0.4", "--beta", "1.1", "--gamma", "0.3", "--delta", "0.6"]


def _flags(p):
    out = []
    for k in ("a", "q", "alpha", "beta", "gamma", "delta"):
        out.append(f"--{k}={format_complex(getattr(p, k))}")
    return out


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows_of(out):
    return list(csv.reader(io.StringIO(out)))


# -- literals ------------------------------------------------------------------------


@pytest.mark.parametrize("text,val", [("1.5", 1.5), ("2-0.5i", 2 - 0.5j), ("-i", -1j), ("0.3+i", 0.3 + 1j), (2, 2)])
def test_parse_complex(text, val):
    assert parse_complex(text) == val


def test_format_complex_round_trips():
    z = 0.1 + 0.2j / 3
    assert parse_complex(format_complex(z)) == z


def test_bad_literals_and_grids():
    with pytest.raises(ParameterError):
        parse_complex("1+2k")
    for g in ("0.1:0.5", "0:0.5:3", "0.1:0.5:0"):
        with pytest.raises(ParameterError):
            parse_grid(g)


# -- eval --------------------------------------------------------------------------------


def test_eval_oracle_on_symmetric_parameters(capsys):
    code, out, _ = run(capsys, "eval", *SYM, "--method", "oracle", "--mu", "low", "--grid", "0.05:0.35:10")
    rows = rows_of(out)
    assert code == 0
    assert rows[0] == ["z", "re_u", "im_u", "re_du", "im_du", "tail_bound"]
    vals = np.array(rows[1:], dtype=float)
    assert vals.shape == (10, 6) and np.all(np.isfinite(vals))


def test_closed_form_on_other_parameters_is_rejected(capsys):
    code, out, err = run(capsys, "eval", *GENERIC, "--method", "closed-form-24")
    assert code == 2 and out == ""
    assert "NotApplicable" in err


def test_beta_terms_outside_domain(capsys):
    argv = ["--a", "2.5", "--q", "0.3", "--alpha", "0.4", "--beta", "1.1", "--gamma", "1.6", "--delta", "0.6"]
    code, _, err = run(capsys, "eval", *argv, "--method", "type1-beta0", "--mu", "low")
    assert code == 2 and "UnsupportedDomain" in err


def test_grid_outside_convergence_domain(capsys):
    p = params_for_method(np.random.default_rng(71), "type1-appell-z0")
    code, _, err = run(capsys, "eval", *_flags(p), "--method", "type1-appell-z0", "--grid", "0.01:0.99:5")
    assert code == 2 and "outside the convergence domain" in err


def test_resonance_exit_code(capsys):
    p = params_for_method(np.random.default_rng(72), "type1-appell-z0")
    code, _, err = run(capsys, "eval", *_flags(p), "--method", "type1-appell-z0", "--mu", "low")
    assert code == 4 and "Resonance" in err


def test_eval_methods_produce_finite_rows(capsys):
    rng = np.random.default_rng(73)
    for m in ("type1-beta0", "type1-beta1", "type1-appell-z0", "type2-beta0", "type2-beta1", "type2-appell"):
        code, out, _ = run(capsys, "eval", *_flags(params_for_method(rng, m)), "--method", m)
        vals = np.array(rows_of(out)[1:], dtype=float)
        assert code == 0 and len(vals) == 10 and np.all(np.isfinite(vals))


# -- coeffs and recurrence ---------------------------------------------------------------


def test_coeffs_ratio_tends_to_inverse_radius(capsys):
    argv = [x if x != "0.3" else "0.8" for x in GENERIC[:4]] + GENERIC[4:]
    code, out, _ = run(capsys, "coeffs", *argv, "--method", "type1-beta0", "--terms", "300", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and len(doc["rows"]) == 301
    # nearest singularity is 1: a = 2.5 and the extra point q/(alpha beta) = 1.82 lie further out
    assert abs(doc["rows"][-1]["abs_ratio"] - 1) < 0.02
    assert doc["rows"][0]["abs_ratio"] is None


def test_closed_form_has_no_coefficients(capsys):
    code, _, err = run(capsys, "coeffs", *SYM, "--method", "closed-form-24")
    assert code == 2 and "NotApplicable" in err


def test_three_row_relation_for_vanishing_q(capsys):
    argv = [x if x != "0.3" else "0" for x in GENERIC[:4]] + GENERIC[4:]
    code, out, _ = run(capsys, "recurrence", *argv, "--method", "type1-beta0")
    rows = rows_of(out)
    assert code == 0 and len(rows) == 4
    assert rows[0] == ["row", "re_n0", "im_n0", "re_n1", "im_n1", "re_n2", "im_n2"]


def test_six_row_relation_for_type2(capsys):
    from heunbeta import make_params, type2_transform

    code, out, _ = run(capsys, "recurrence", *GENERIC, "--method", "type2-beta0", "--mu", "low", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and [r["row"] for r in doc["rows"]] == list("KTSRQP")
    assert doc["meta"]["terms_in_relation"] == 6
    k = doc["rows"][0]
    lead = np.array([complex(k[f"re_n{i}"], k[f"im_n{i}"]) for i in range(3)])
    p = make_params(2.5, 0.3, 0.4, 1.1, 0.3, 0.6)
    td = type2_transform(p)
    # -a^2 z1 z2 (mu + n)(mu + n - gamma) with mu = 0
    ref = np.polynomial.polynomial.polymul([0, 1], [-p.gamma, 1]) * (-(p.a**2) * td.z1 * td.z2)
    assert np.allclose(lead, ref, rtol=1e-12, atol=1e-12)


# -- compare ------------------------------------------------------------------------------


def test_compare_passes_for_full_series(capsys):
    p = params_for_method(np.random.default_rng(74), "type1-beta0")
    code, out, err = run(capsys, "compare", *_flags(p), "--method", "type1-beta0")
    assert code == 0 and "PASS" in err
    vals = np.array(rows_of(out)[1:], dtype=float)
    assert vals[:, 5].max() < 1e-8


def test_truncated_compare_fails_tolerance(capsys):
    p = params_for_method(np.random.default_rng(74), "type1-beta0")
    _, full, _ = run(capsys, "compare", *_flags(p), "--method", "type1-beta0", "--format", "json")
    code, short, err = run(capsys, "compare", *_flags(p), "--method", "type1-beta0", "--terms", "3",
                           "--format", "json")
    assert code == 3 and "FAIL" in err
    full, short = json.loads(full), json.loads(short)
    assert short["meta"]["max_deviation"] > full["meta"]["max_deviation"]
    assert short["meta"]["passed"] is False
    assert max(r["tail_bound"] for r in short["rows"]) > max(r["tail_bound"] for r in full["rows"])


def test_compare_five_term_path(capsys):
    p = params_for_method(np.random.default_rng(75), "type2-beta0")
    p = p.replace(beta=p.alpha + p.gamma + p.delta - 1)  # eps = 2 alpha
    code, out, _ = run(capsys, "compare", *_flags(p), "--method", "type2-beta0", "--format", "json")
    doc = json.loads(out)
    assert doc["meta"]["kind"] == "Type2Linear"
    assert code in (0, 3) and all(np.isfinite(r["rel_dev"]) for r in doc["rows"])


def test_compare_closed_form(capsys):
    code, _, err = run(capsys, "compare", *SYM, "--method", "closed-form-24")
    assert code == 0 and "PASS" in err


def test_compare_rejects_oracle(capsys):
    code, _, _ = run(capsys, "compare", *SYM, "--method", "oracle")
    assert code == 2


# -- terminate ------------------------------------------------------------------------------


def test_terminate_lists_candidate(capsys):
    ga, de = 0.3, 0.6
    argv = ["--a", "2.5", "--q", "0.3", "--alpha", "0.4", f"--beta={format_complex(ga + de - 4)}",
            "--gamma", str(ga), "--delta", str(de)]
    code, out, _ = run(capsys, "terminate", *argv, "--method", "type1-beta0", "--mu", "low")
    rows = rows_of(out)
    assert code == 0 and len(rows) == 2
    assert rows[1][:4] == ["3", "α = N+ε+μ", "true", "false"]


def test_terminate_generic_is_empty(capsys):
    code, out, _ = run(capsys, "terminate", *GENERIC, "--method", "type1-beta0", "--format", "json")
    assert code == 0 and json.loads(out)["rows"] == []


def test_terminate_tuned_fixture(capsys):
    q, a = damped_newton(_a2_a3, (0.5, 2.5))
    vals = dict(a=a, q=q, alpha=TERM_ALPHA, beta=TERM_BETA, gamma=TERM_GAMMA, delta=TERM_DELTA)
    argv = [f"--{k}={format_complex(v)}" for k, v in vals.items()]
    code, out, _ = run(capsys, "terminate", *argv, "--method", "type1-beta0", "--mu", "low", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0 and len(rows) == 1
    assert rows[0]["N"] == 1 and rows[0]["terminated"] is True
    assert rows[0]["residual"] < 1e-10


def test_terminate_needs_expansion_method(capsys):
    code, _, _ = run(capsys, "terminate", *GENERIC, "--method", "oracle")
    assert code == 2


# -- output formats and jobs -------------------------------------------------------------------


def test_csv_round_trip_is_exact(capsys):
    _, out, _ = run(capsys, "eval", *GENERIC, "--method", "type1-beta0", "--format", "csv")
    _, js, _ = run(capsys, "eval", *GENERIC, "--method", "type1-beta0", "--format", "json")
    rows = rows_of(out)
    doc = json.loads(js)
    for line, ref in zip(rows[1:], doc["rows"]):
        vals = [float(x) for x in line]
        assert vals == [ref[c] for c in rows[0]]
        assert ["%.17g" % v for v in vals] == line


def test_json_document_shape(capsys):
    _, out, _ = run(capsys, "eval", *GENERIC, "--method", "type2-beta0", "--format", "json")
    doc = json.loads(out)
    assert set(doc) == {"meta", "rows"}
    for key in ("method", "mu", "c0", "branches", "epsilon"):
        assert key in doc["meta"]


def test_missing_parameters(capsys):
    code, _, err = run(capsys, "eval", "--a", "2.5")
    assert code == 2 and "missing parameters" in err


def test_job_file_with_flag_override(tmp_path, capsys):
    job = {"a": "2.5", "q": "0.3", "alpha": "0.4", "beta": "1.1", "gamma": "0.3", "delta": "0.6",
           "method": "oracle", "grid": "0.1:0.4:4", "format": "json"}
    path = tmp_path / "job.json"
    path.write_text(json.dumps(job))
    code, out, _ = run(capsys, "eval", "--job", str(path))
    doc = json.loads(out)
    assert code == 0 and doc["meta"]["method"] == "oracle" and len(doc["rows"]) == 4
    _, out, _ = run(capsys, "eval", "--job", str(path), "--grid", "0.1:0.4:7", "--q", "0.25")
    doc = json.loads(out)
    assert len(doc["rows"]) == 7 and parse_complex(doc["meta"]["q"]) == 0.25


def test_unreadable_job_file(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "eval", "--job", str(path))
    assert code == 2 and "job file" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "heunbeta", "eval", *SYM, "--method", "oracle",
                        "--grid", "0.1:0.3:3"], capture_output=True, text=True)
    assert r.returncode == 0
    assert len(r.stdout.strip().splitlines()) == 4
