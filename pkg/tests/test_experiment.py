import dataclasses
import json
import math

import numpy as np
import pytest

from srcortex import (
    ExperimentConfig,
    ModelConfig,
    StimulusSpec,
    measure_offset,
    poggendorff_classic,
    poggendorff_gratings,
    run_experiment,
    run_sweep,
)
from srcortex.cli import main
from srcortex.imgio import write_pgm


def paper_spec():
    return StimulusSpec()  # 200 px, 30 px bar, pi/3, 25 px gratings


class TestMeasureOffset:
    def test_raw_stimulus_has_no_completion(self):
        spec = paper_spec()
        assert measure_offset(poggendorff_gratings(spec), spec) is None

    def test_flat_image_has_no_completion(self):
        spec = paper_spec()
        assert measure_offset(np.full((200, 200), 0.5), spec) is None

    def test_exact_collinear_line_scores_zero(self):
        spec = paper_spec()
        visible = poggendorff_gratings(dataclasses.replace(spec, bar_gray=1.0))
        off = measure_offset(visible, spec)
        assert off is not None and abs(off) <= 0.5

    def test_classic_collinear_line_scores_zero(self):
        spec = StimulusSpec(grating_period=0.0)
        visible = poggendorff_classic(dataclasses.replace(spec, bar_gray=1.0))
        off = measure_offset(visible, spec)
        assert off is not None and abs(off) <= 0.5

    def test_affine_intensity_invariance(self):
        spec = paper_spec()
        visible = poggendorff_gratings(dataclasses.replace(spec, bar_gray=1.0))
        a = measure_offset(visible, spec)
        b = measure_offset(0.25 + 0.5 * visible, spec)
        assert a == pytest.approx(b, abs=1e-12)

    def test_known_shift_is_recovered(self):
        # paint a line displaced parallel to the continuation by a known
        # amount (within the center-crossing seed window) inside the bar
        spec = paper_spec()
        img = poggendorff_gratings(spec)
        shift = 2.0  # rows downward
        cols = np.arange(int(spec.bar_left) + 1, int(spec.bar_right))
        for col in cols:
            r = spec.continuation_row(col) + shift
            lo = int(math.floor(r - 1))
            for row in range(lo, lo + 3):
                img[row, col] = min(img[row, col], abs(row - r) / 2.0)
        off = measure_offset(img, spec)
        assert off is not None
        assert off == pytest.approx(shift * math.cos(spec.incidence_angle), abs=0.6)


def quick_config(tmp_path, **overrides):
    model_kw = dict(model="lhe", lam=2.0, alpha=6.0, sigma_mu=1.0,
                    dt=0.15, dtau=0.05, tau=0.25, poly_degree=5,
                    max_iters=60)
    model_kw.update(overrides.pop("model_kw", {}))
    cfg_kw = dict(
        model_cfg=ModelConfig(**model_kw),
        out_dir=str(tmp_path / "run"),
        stimulus=StimulusSpec(n_pixels=48, bar_width=8, grating_period=6,
                              line_thickness=1.5),
        n_orient=8,
        profile_order=3,
        band_halfwidth=4.0,
    )
    cfg_kw.update(overrides)
    return ExperimentConfig(**cfg_kw)


class TestExperimentConfig:
    def test_requires_exactly_one_source(self, tmp_path):
        with pytest.raises(ValueError):
            quick_config(tmp_path, stimulus=None)
        with pytest.raises(ValueError):
            quick_config(tmp_path, input_path="x.pgm")  # stimulus also set

    def test_sweep_values_validated(self, tmp_path):
        with pytest.raises(ValueError):
            quick_config(tmp_path, sweep_param="dt", sweep_values=(0.9,))


class TestRunExperiment:
    def test_writes_artifacts_and_report(self, tmp_path):
        cfg = quick_config(tmp_path)
        report = run_experiment(cfg)
        out = tmp_path / "run"
        for name in ("input.pgm", "output.pgm", "crop.pgm", "trace.csv",
                     "report.txt", "report.json"):
            assert (out / name).exists()
        assert report["model"] == "lhe"
        assert report["iterations"] >= 1
        assert "energy_final" in report
        text = (out / "report.txt").read_text()
        assert f"iterations={report['iterations']}" in text
        parsed = json.loads((out / "report.json").read_text())
        assert parsed["iterations"] == report["iterations"]
        trace = (out / "trace.csv").read_text().splitlines()
        assert trace[0] == "p,relative_change,energy"
        assert len(trace) == report["iterations"] + 1

    def test_deterministic_artifacts(self, tmp_path):
        cfg1 = quick_config(tmp_path, out_dir=str(tmp_path / "a"))
        cfg2 = quick_config(tmp_path, out_dir=str(tmp_path / "b"))
        run_experiment(cfg1)
        run_experiment(cfg2)
        for name in ("input.pgm", "output.pgm", "crop.pgm", "trace.csv",
                     "report.txt", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_input_image_path(self, tmp_path):
        img = poggendorff_gratings(
            StimulusSpec(n_pixels=48, bar_width=8, grating_period=6)
        )
        path = tmp_path / "input.pgm"
        write_pgm(path, img)
        cfg = quick_config(tmp_path, stimulus=None, input_path=str(path))
        report = run_experiment(cfg)
        assert report["stimulus"] == "file"
        assert report["offset_px"] is None  # no geometry to probe


class TestSweep:
    def test_sweep_runs_and_summarizes(self, tmp_path):
        cfg = quick_config(
            tmp_path,
            out_dir=str(tmp_path / "sweep"),
            sweep_param="tau",
            sweep_values=(0.05, 0.25),
        )
        reports = run_sweep(cfg, max_workers=1)
        assert len(reports) == 2
        assert (tmp_path / "sweep" / "tau=0.05" / "report.txt").exists()
        assert (tmp_path / "sweep" / "tau=0.25" / "report.txt").exists()
        summary = (tmp_path / "sweep" / "sweep_summary.txt").read_text()
        assert "tau=0.05" in summary and "tau=0.25" in summary


class TestCli:
    def test_missing_input_file_is_clean_error(self, tmp_path, capsys):
        code = main(["--model", "wc", "--input", str(tmp_path / "nope.pgm"),
                     "--out", str(tmp_path / "o"), "--lambda", "0.5",
                     "--dt", "0.5"])
        assert code == 2
        assert "error" in capsys.readouterr().err.lower()

    def test_usage_error_exit_code_one(self):
        assert main(["--model", "nope"]) == 1

    def test_invalid_config_exit_code_one(self, capsys):
        # dt violates the stability bound for the given lambda
        code = main(["--model", "lhe", "--lambda", "4.0", "--dt", "0.5"])
        assert code == 1
        assert "error" in capsys.readouterr().err.lower()

    def test_small_end_to_end_run(self, tmp_path, capsys):
        code = main([
            "--model", "lhe", "--stimulus", "gratings",
            "--N", "48", "--K", "8", "--bw", "3",
            "--lambda", "2.0", "--alpha", "6.0", "--sigma-mu", "1.0",
            "--dt", "0.15", "--dtau", "0.05", "--tau", "0.25",
            "--poly-degree", "5", "--max-iters", "40",
            "--out", str(tmp_path / "cli"),
        ])
        assert code == 0
        assert (tmp_path / "cli" / "report.txt").exists()
        assert "done:" in capsys.readouterr().out
