import numpy as np
import pytest

from wweuie.colorspace import lab_to_rgb
from wweuie.metrics import Patch, PatchSpec, chart_eval, evaluate, psnr, ssim, uciqe
from oracles import ssim_direct


def test_ssim_matches_direct_definition():
    rng = np.random.default_rng(42)
    for _ in range(20):
        y = rng.uniform(size=(16, 15, 3))
        y_pred = np.clip(y + rng.normal(0, rng.uniform(0.01, 0.3), size=y.shape), 0, 1)
        assert abs(ssim(y, y_pred) - ssim_direct(y, y_pred)) < 1e-6


def test_ssim_agrees_with_skimage(rng):
    metrics = pytest.importorskip("skimage.metrics")
    y, y_pred = rng.uniform(size=(2, 24, 20, 3))
    ref = metrics.structural_similarity(y, y_pred, gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False, data_range=1.0, channel_axis=2)
    # skimage averages after cropping (win - 1) / 2 from each side, i.e. over valid windows
    assert ssim(y, y_pred) == pytest.approx(ref, abs=1e-9)


def test_ssim_identity_and_small_input(rng):
    y = rng.uniform(size=(12, 12, 3))
    assert ssim(y, y) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ssim(y[:10], y[:10])


def test_psnr_values():
    y = np.zeros((4, 4, 3))
    assert psnr(y, y) == 100.0
    assert psnr(y, np.full_like(y, 0.1)) == pytest.approx(20.0)
    assert psnr(y, np.full_like(y, 1.0)) == pytest.approx(0.0)


def test_uciqe_closed_forms():
    assert uciqe(np.full((8, 8, 3), 0.5)) == 0.0
    assert uciqe(np.tile([1.0, 0.0, 0.0], (8, 8, 1))) == pytest.approx(0.2576)


def test_uciqe_prefers_contrast_and_colour(rng):
    flat = np.full((16, 16, 3), 0.4) + rng.normal(0, 0.01, size=(16, 16, 3))
    vivid = rng.uniform(size=(16, 16, 3))
    assert uciqe(vivid) > uciqe(flat) >= 0


def published_pair_patch(lab_ref, lab_measured):
    ref_rgb = lab_to_rgb(np.array(lab_ref))
    img_rgb = lab_to_rgb(np.array(lab_measured))
    assert np.all((ref_rgb >= 0) & (ref_rgb <= 1)) and np.all((img_rgb >= 0) & (img_rgb <= 1))
    img = np.tile(img_rgb, (6, 8, 1))
    return img, PatchSpec([Patch(1, 1, 5, 4, tuple(ref_rgb))])


@pytest.mark.parametrize("lab1,lab2,expected", [
    ((60.2574, -34.0099, 36.2677), (60.4626, -34.1751, 39.4387), 1.2644),
    ((63.0109, -31.0961, -5.8663), (62.8187, -29.7946, -4.0864), 1.2630),
    ((90.8027, -2.0831, 1.4410), (91.1528, -1.6435, 0.0447), 1.4441),
])
def test_chart_eval_single_patch_published_pair(lab1, lab2, expected):
    img, spec = published_pair_patch(lab1, lab2)
    assert chart_eval(img, spec) == pytest.approx(expected, abs=1e-4)


def test_chart_eval_mean_and_per_patch():
    img = np.zeros((4, 4, 3))
    img[:, 2:] = 1.0
    spec = PatchSpec([Patch(0, 0, 2, 4, (0.0, 0.0, 0.0)), Patch(2, 0, 4, 4, (0.0, 0.0, 0.0))])
    mean, per = chart_eval(img, spec, return_per_patch=True)
    assert per[0] == 0.0 and per[1] == pytest.approx(100.0, rel=1e-3)
    assert mean == pytest.approx(per.mean())


def test_patch_validation_and_csv(tmp_path):
    spec = PatchSpec([Patch(0, 0, 2, 2, (0.1, 0.2, 0.3))])
    path = tmp_path / "p.csv"
    spec.to_csv(path)
    assert path.read_text().splitlines()[0] == "x0,y0,x1,y1,R,G,B"
    assert PatchSpec.from_csv(path) == spec
    with pytest.raises(ValueError, match="outside"):
        chart_eval(np.zeros((1, 1, 3)), spec)
    with pytest.raises(ValueError, match="empty"):
        chart_eval(np.zeros((4, 4, 3)), PatchSpec())
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        PatchSpec.from_csv(path)


def test_evaluate_reports_what_it_can(rng):
    img = rng.uniform(size=(12, 12, 3))
    report = evaluate(img)
    assert report.not_computed == ("psnr", "ssim", "ciede2000_mean")
    assert [k for k, _ in report.rows()] == ["uciqe"]
    full = evaluate(img, img, PatchSpec([Patch(0, 0, 3, 3, tuple(img[:3, :3].reshape(-1, 3).mean(0)))]))
    assert full.not_computed == ()
    assert full.psnr == 100.0 and full.ssim == pytest.approx(1.0)
    assert full.ciede2000_mean == pytest.approx(0.0, abs=1e-9)
