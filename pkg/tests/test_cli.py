"""Config-driven runner: outputs, exit codes, and determinism."""

import json
import hashlib
import subprocess
import sys

import numpy as np
import pytest

from ustat_resample import derive_seed
from ustat_resample.cli import main, run_config

MINIMAL_USTAT = """\
[experiment]
kind = "ustat"
name = "smoke"
seed = 7

[kernel]
name = "product_xy"

[data]
values = [1.0, 2.0, 3.0]
"""

SMALL_CLT = """\
[experiment]
kind = "multiplier-clt"
name = "clt-small"
seed = 11

[kernel]
name = "centered_legendre1_pair"

[law]
name = "uniform01"

[scheme]
name = "iid_gaussian"

[params]
n = 40
B = 60
ref_draws = 1500
"""


def write_config(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_minimal_ustat_writes_eleven_thirds(tmp_path):
    config = write_config(tmp_path, MINIMAL_USTAT)
    out = tmp_path / "out"
    assert run_config(config, out_dir=out) == 0
    header, row = (out / "results.csv").read_text().splitlines()
    assert header == "kernel,n,order,normalization,value"
    assert float(row.split(",")[-1]) == 11.0 / 3.0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["value"] == 11.0 / 3.0
    assert summary["passed"] is True


def test_unknown_kernel_exits_one_and_names_field(tmp_path, capsys):
    config = write_config(tmp_path, MINIMAL_USTAT.replace(
        'name = "product_xy"', 'name = "mystery"'))
    code = main(["run", str(config), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "kernel.name" in capsys.readouterr().err


def test_missing_seed_exits_one_and_names_field(tmp_path, capsys):
    text = MINIMAL_USTAT.replace("seed = 7\n", "")
    config = write_config(tmp_path, text)
    code = main(["run", str(config), "--out", str(tmp_path / "out")])
    assert code == 1
    assert "experiment.seed" in capsys.readouterr().err


def test_ustat_seed_env_overrides_config(tmp_path, monkeypatch):
    config = write_config(tmp_path, MINIMAL_USTAT)
    monkeypatch.setenv("USTAT_SEED", "424242")
    out = tmp_path / "out"
    assert run_config(config, out_dir=out) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["master_seed"] == 424242


def test_rerun_is_bit_identical_in_single_thread_mode(tmp_path):
    config = write_config(tmp_path, SMALL_CLT)
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert run_config(config, out_dir=first, threads=1) == 0
    assert run_config(config, out_dir=second, threads=1) == 0
    for name in ("results.csv", "summary.json", "figure.png"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    a = json.loads((first / "manifest.json").read_text())
    b = json.loads((second / "manifest.json").read_text())
    a.pop("wall_time_s")
    b.pop("wall_time_s")
    assert a == b


def test_manifest_digests_match_emitted_files(tmp_path):
    config = write_config(tmp_path, MINIMAL_USTAT)
    out = tmp_path / "out"
    run_config(config, out_dir=out)
    manifest = json.loads((out / "manifest.json").read_text())
    for name, digest in manifest["outputs"].items():
        recomputed = hashlib.sha256((out / name).read_bytes()).hexdigest()
        assert recomputed == digest, name


def test_no_figures_flag_suppresses_rendering(tmp_path):
    config = write_config(tmp_path, MINIMAL_USTAT)
    out = tmp_path / "out"
    assert main(["run", str(config), "--out", str(out), "--no-figures"]) == 0
    assert not (out / "figure.png").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert "figure.png" not in manifest["outputs"]


def test_failed_check_exits_two(tmp_path):
    text = MINIMAL_USTAT + "\n[params]\nexpect_value = 99.0\n"
    config = write_config(tmp_path, text)
    code = main(["run", str(config), "--out", str(tmp_path / "out")])
    assert code == 2


def test_population_csv_feeds_the_ustat_runner(tmp_path):
    pop = tmp_path / "pop.csv"
    pop.write_text("x\n1.0\n2.0\n3.0\n")
    text = MINIMAL_USTAT.replace("values = [1.0, 2.0, 3.0]",
                                 f'path = "{pop}"')
    config = write_config(tmp_path, text)
    out = tmp_path / "out"
    assert run_config(config, out_dir=out) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["value"] == 11.0 / 3.0


def test_console_script_list_builtins_names_every_section():
    proc = subprocess.run([sys.executable, "-m", "ustat_resample.cli",
                           "list-builtins"], capture_output=True, text=True)
    assert proc.returncode == 0
    for section in ("experiments:", "kernels:", "factors:", "laws:",
                    "schemes:", "designs:"):
        assert section in proc.stdout
    assert "product_xy" in proc.stdout


def test_derive_seed_is_deterministic_and_label_sensitive():
    assert derive_seed(5, "a", 1) == derive_seed(5, "a", 1)
    assert derive_seed(5, "a", 1) != derive_seed(5, "a", 2)
    assert derive_seed(5, "a", 1) != derive_seed(6, "a", 1)
    assert derive_seed(5) == derive_seed(5)
    assert 0 <= derive_seed(5) < 2 ** 64


def test_derive_seed_has_no_collisions_over_a_million_replicates():
    seen = {derive_seed(12345, "replicate", r) for r in range(1000000)}
    assert len(seen) == 1000000


def test_invalid_toml_exits_one(tmp_path, capsys):
    config = tmp_path / "broken.toml"
    config.write_text("[experiment\nkind = ???")
    assert main(["run", str(config)]) == 1
    assert "cannot parse" in capsys.readouterr().err
