import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from wweuie.cli import emit, main, run_bench
from wweuie.image import load_image, save_image
from wweuie.metrics import Patch, PatchSpec
from wweuie.network import NetConfig, init_random, save_weights

SMALL_FLAGS = ["--base-channels", "8", "--num-scales", "2"]


def csv_rows(text):
    return {r[0]: r[1:] for r in csv.reader(io.StringIO(text))}


@pytest.fixture
def image_file(tmp_path, rng):
    path = tmp_path / "in.ppm"
    save_image(rng.uniform(size=(20, 16, 3)), path)
    return path


def test_cost_reports_reference_comparison(capsys):
    assert main(["cost", "--csv"]) == 0
    rows = csv_rows(capsys.readouterr().out)
    assert rows["quantity"] == ["ours", "reference", "deviation_pct"]
    assert float(rows["params_M"][0]) == pytest.approx(1.506797)
    assert float(rows["params_M"][1]) == 0.734
    assert float(rows["flops_G"][1]) == 6.251


def test_cost_uses_weight_file_config(tmp_path, capsys):
    path = tmp_path / "w.bin"
    save_weights(init_random(NetConfig(base_channels=8, num_scales=2)), path)
    assert main(["cost", "--csv", "--weights", str(path)]) == 0
    assert float(csv_rows(capsys.readouterr().out)["params_M"][0]) < 0.2


def test_enhance_needs_weights_or_seed(image_file, tmp_path, capsys):
    out = tmp_path / "out.ppm"
    assert main(["enhance", "-i", str(image_file), "-o", str(out)]) == 2
    assert "--weights or --seed" in capsys.readouterr().err
    assert main(["enhance", "-i", str(image_file), "-o", str(out), "--seed", "1", *SMALL_FLAGS]) == 0
    assert load_image(out).shape == (20, 16, 3)


def test_enhance_with_weights_matches_seed(image_file, tmp_path):
    weights = tmp_path / "w.bin"
    save_weights(init_random(NetConfig(base_channels=8, num_scales=2, seed=1)), weights)
    a, b = tmp_path / "a.pfm", tmp_path / "b.pfm"
    assert main(["enhance", "-i", str(image_file), "-o", str(a), "--weights", str(weights)]) == 0
    assert main(["enhance", "-i", str(image_file), "-o", str(b), "--seed", "1", *SMALL_FLAGS]) == 0
    np.testing.assert_array_equal(load_image(a), load_image(b))


def test_corrupt_weights_exit_1(image_file, tmp_path, capsys):
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"NOPE" + bytes(20))
    assert main(["enhance", "-i", str(image_file), "-o", str(tmp_path / "o.ppm"), "--weights", str(bad)]) == 1
    assert "magic" in capsys.readouterr().err


def test_missing_input_exit_1(tmp_path):
    assert main(["wb", "-i", str(tmp_path / "nope.ppm"), "-o", str(tmp_path / "o.ppm")]) == 1


def test_wb_and_dwt(image_file, tmp_path, capsys):
    out = tmp_path / "wb.pfm"
    assert main(["wb", "-i", str(image_file), "-o", str(out)]) == 0
    img = load_image(out)
    assert img.min() >= 0 and img.max() <= 1
    assert main(["dwt", "-i", str(image_file), "-o", str(tmp_path / "sb")]) == 0
    paths = capsys.readouterr().out.split()
    assert [p.rsplit(".", 2)[1] for p in paths] == ["ll", "lh", "hl", "hh"]
    assert load_image(paths[0]).shape == (10, 8, 3)


def test_metrics_with_and_without_reference(image_file, capsys):
    assert main(["metrics", "--test", str(image_file), "--csv"]) == 0
    assert "uciqe" in csv_rows(capsys.readouterr().out)
    assert main(["metrics", "-i", str(image_file), "--ref", str(image_file), "--csv"]) == 0
    rows = csv_rows(capsys.readouterr().out)
    assert float(rows["psnr_db"][0]) == 100.0 and float(rows["ssim"][0]) == pytest.approx(1.0)


def test_ciede_lab_pair(capsys):
    assert main(["ciede", "--lab1", "50,2.6772,-79.7751", "--lab2", "50,0,-82.7485", "--csv"]) == 0
    assert float(csv_rows(capsys.readouterr().out)["delta_e00"][0]) == pytest.approx(2.0425, abs=1e-4)
    assert main(["ciede", "--lab1", "50,0,0"]) == 2


def test_ciede_chart(image_file, tmp_path, capsys):
    patches = tmp_path / "p.csv"
    PatchSpec([Patch(0, 0, 4, 4, (0.5, 0.5, 0.5)), Patch(4, 4, 8, 8, (0.2, 0.3, 0.4))]).to_csv(patches)
    assert main(["ciede", "-i", str(image_file), "--patches", str(patches), "--csv"]) == 0
    rows = csv_rows(capsys.readouterr().out)
    assert set(rows) == {"name", "patch0", "patch1", "mean"}


def test_gradcheck_passes(capsys):
    assert main(["gradcheck", "--trials", "1", "--losses", "charbonnier,edge"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["loss", "max_rel_error", "tolerance", "status"]
    assert out.count("pass") == 2


def test_fit_demo_writes_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    out = tmp_path / "fit.pfm"
    assert main(["fit", "--demo", "24", "--iters", "20", "--trace", str(trace), "-o", str(out), "--csv"]) == 0
    rows = csv_rows(capsys.readouterr().out)
    assert float(rows["psnr_final_db"][0]) > float(rows["psnr_init_db"][0])
    lines = trace.read_text().splitlines()
    assert lines[0] == "iteration,loss" and len(lines) == 21
    assert main(["fit", "--demo", "16", "--iters", "2", "--lw", "1,0,0,0"]) == 1
    assert main(["fit"]) == 2


def test_xyy_export(image_file, tmp_path, capsys):
    out = tmp_path / "c.csv"
    assert main(["xyy", "-i", str(image_file), "-o", str(out), "--stride", "4"]) == 0
    assert out.read_text().splitlines()[0] == "x,y,Y"
    assert "wrote 20 rows" in capsys.readouterr().out


def test_bench_small(capsys):
    assert main(["bench", "--runs", "3", "--size", "32", "--warmup", "1", "--csv", *SMALL_FLAGS]) == 0
    rows = csv_rows(capsys.readouterr().out)
    assert rows["runs"] == ["3"] and rows["thread_mode"] == ["single-thread"]
    assert float(rows["min_ms"][0]) <= float(rows["mean_ms"][0]) <= float(rows["max_ms"][0])
    with pytest.raises(ValueError):
        run_bench(init_random(NetConfig(base_channels=8, num_scales=2)), runs=0)


def test_emit_text_alignment():
    buf = io.StringIO()
    emit([("a", 1.5), ("long_name", 2)], False, out=buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("name       value")
    assert lines[2] == "long_name  2"


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "wweuie", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "enhance" in res.stdout
