import json
import os

from hyperorbit.cli import main


def run(tmp_path, name, *argv):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def read_files(out):
    data = {}
    for fn in sorted(os.listdir(out)):
        if fn == "manifest.txt":
            continue
        data[fn] = (out / fn).read_bytes()
    return data


def test_densities_basic(tmp_path):
    code, out = run(tmp_path, "d", "densities", "--set", "evens", "--horizon", "20000")
    assert code == 0
    text = (out / "densities.csv").read_text()
    assert "1/2,1/2,1/2,1/2" in text
    assert (out / "manifest.txt").exists()


def test_make_set(tmp_path):
    code, out = run(tmp_path, "m", "make-set", "--targets", "0,1/5,1/2,1", "--eras", "4", "--window", "200")
    assert code == 0
    assert (out / "set.txt").read_text().startswith("segments:")


def test_check_family(tmp_path):
    code, _ = run(tmp_path, "f", "check-family", "--family", "dyadic-block:4", "--horizon", "20000")
    assert code == 0
    code, _ = run(tmp_path, "f2", "check-family", "--family", "counterexample:2:2")
    assert code == 0
    code, _ = run(tmp_path, "f3", "check-family", "--family", "prime-power:2:1", "--horizon", "100")
    assert code == 3  # 8 and 9 collide


def test_verify_counterexample(tmp_path):
    code, out = run(
        tmp_path,
        "v",
        "verify-counterexample",
        "--kmax",
        "3",
        "--lmax",
        "20",
        "--product-horizon",
        "3000",
        "--family-levels",
        "2",
        "--family-reps",
        "2",
    )
    assert code == 0
    assert (out / "exclusion.csv").exists()
    assert (out / "products.csv").exists()
    assert (out / "blocks.csv").exists()


def test_dj_scan(tmp_path):
    code, out = run(tmp_path, "dj", "dj-scan", "--j", "1,5", "--horizon", "10000")
    assert code == 0
    assert "ratio" in (out / "threshold_scan.csv").read_text()


def test_construct_and_orbit(tmp_path):
    code, out = run(
        tmp_path, "c", "construct", "--depth", "3", "--horizon", "2000", "--family", "dyadic-block:6"
    )
    assert code == 0
    vec = out / "vector.txt"
    assert vec.exists()
    code, out2 = run(
        tmp_path,
        "o",
        "orbit",
        "--vector",
        f"file:{vec}",
        "--targets",
        "dense:1@4.5;dense:2@2.5",
        "--horizon",
        "2000",
    )
    assert code == 0
    assert (out2 / "hits.csv").exists()


def test_classify_command(tmp_path):
    code, out = run(
        tmp_path,
        "cl",
        "classify",
        "--vector",
        "e:0",
        "--targets",
        "zero:@0.5",
        "--horizon",
        "2000",
    )
    assert code == 0
    body = (out / "classification.csv").read_text()
    assert "frequent" in body


def test_return_set_command(tmp_path):
    code, out = run(
        tmp_path,
        "r",
        "return-set",
        "--u",
        "dense:1@0.25",
        "--v",
        "dense:2@0.25",
        "--horizon",
        "2000",
        "--stride",
        "40",
    )
    assert code == 0
    assert (out / "return_summary.csv").exists()


def test_correlate_command(tmp_path):
    code, out = run(tmp_path, "co", "correlate", "--set", "arith:3:0")
    assert code == 0
    assert "1/3" in (out / "correlation_summary.csv").read_text()


def test_beta_command(tmp_path):
    code, out = run(tmp_path, "b", "beta", "--set", "evens", "--horizon", "500")
    assert code == 0
    assert (out / "beta_growth.csv").exists()


def test_eqbeta_command(tmp_path):
    code, out = run(
        tmp_path, "eq", "eqbeta", "--set", "explicit:0,10,20", "--n", "10", "--horizon", "100"
    )
    assert code == 0
    body = (out / "tail_sums.csv").read_text()
    assert "9.5367431640625e-07" in body


def test_series_command(tmp_path):
    code, out = run(tmp_path, "s", "series-tests", "--horizon", "2000")
    assert code == 0
    body = (out / "series.csv").read_text()
    assert "converging-evidence" in body and "diverging-evidence" in body


def test_diff_set_command(tmp_path):
    code, out = run(tmp_path, "ds", "diff-set", "--set", "arith:128:64", "--horizon", "20000")
    assert code == 0
    assert "true" in (out / "difference_summary.csv").read_text()


# ---------------------------------------------------------------------------
# exit codes


def test_usage_error_exit_code(tmp_path):
    code, _ = run(tmp_path, "bad", "densities", "--set", "nonsense-spec")
    assert code == 2


def test_verification_failure_exit_code(tmp_path):
    code, _ = run(
        tmp_path, "vf", "construct", "--operator", "constant:1", "--depth", "2", "--horizon", "1000"
    )
    assert code == 3


def test_overflow_exit_code(tmp_path):
    vec = tmp_path / "big.txt"
    lines = ["# space lp:2.0"] + [f"{i} 1" for i in range(0, 1100)]
    vec.write_text("\n".join(lines) + "\n")
    code, out = run(
        tmp_path,
        "of",
        "orbit",
        "--vector",
        f"file:{vec}",
        "--targets",
        "zero:@0.5",
        "--horizon",
        "2000",
    )
    assert code == 4
    assert (out / "hits.csv").exists()  # partial outputs kept


def test_config_file_roundtrip(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"set": "evens", "horizon": 5000}))
    out = tmp_path / "cfgout"
    code = main(["densities", "--config", str(cfg), "--set", "arith:3:0", "--out", str(out)])
    assert code == 0
    body = (out / "densities.csv").read_text()
    assert "arith:3:0," in body  # the explicit flag overrides the config value
    assert ",5000," in body  # the config horizon is used
    assert "333/1000" in body  # one third, up to the window rounding
