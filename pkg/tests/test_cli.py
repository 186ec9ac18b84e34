import math
import os
import subprocess
import sys

import numpy as np
import pytest

from voxsubdiv.cli import main
from voxsubdiv.metrics import FIELDS, MetricsReport
from voxsubdiv.volume import Volume, VolumeHeader, read_volume, write_volume


def run_ok(*argv):
    assert main([str(a) for a in argv]) == 0


def run_usage_error(capsys, *argv):
    with pytest.raises(SystemExit) as exc:
        main([str(a) for a in argv])
    assert exc.value.code == 2
    return capsys.readouterr().err


@pytest.fixture(scope="module")
def phantom64(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "p"
    run_ok("phantom", "--dims", 64, "--out", path)
    return path


@pytest.fixture
def small(tmp_path, rng):
    path = tmp_path / "s"
    write_volume(Volume(rng.random((12, 10, 8))), path)
    return path


class TestPhantom:
    def test_writes_f32(self, phantom64):
        header = VolumeHeader.from_text(phantom64.with_suffix(".meta").read_text())
        assert header.dims == (64, 64, 64) and header.dtype == "f32le"
        v = read_volume(phantom64)
        assert v.data.min() == 0.0 and v.data.max() == 1.0

    def test_too_small(self, capsys, tmp_path):
        err = run_usage_error(capsys, "phantom", "--dims", 16, "--out", tmp_path / "x")
        assert "--dims" in err


class TestSubdivide:
    def test_doubles_dims(self, phantom64, tmp_path):
        run_ok("subdivide", "--in", phantom64, "--out", tmp_path / "o", "--mode", "nonlinear")
        assert read_volume(tmp_path / "o").dims == (128, 128, 128)

    @pytest.mark.parametrize("mode", ["linear", "nonlinear"])
    def test_threads_byte_identical(self, small, tmp_path, mode):
        outs = []
        for threads in (1, 4):
            out = tmp_path / f"o{threads}"
            run_ok("subdivide", "--in", small, "--out", out, "--mode", mode,
                   "--tile", "5,4,3", "--threads", threads)
            outs.append(out)
        for suffix in (".raw", ".meta"):
            a, b = (o.with_suffix(suffix).read_bytes() for o in outs)
            assert a == b

    def test_tau_with_linear_rejected(self, capsys, small, tmp_path):
        err = run_usage_error(capsys, "subdivide", "--in", small, "--out", tmp_path / "o",
                              "--mode", "linear", "--tau", "2")
        assert "--tau" in err
        assert not (tmp_path / "o.raw").exists()

    @pytest.mark.parametrize("flags,name", [
        (["--mode", "nonlinear", "--tau", "0.5"], "--tau"),
        (["--mode", "nonlinear", "--halo", "4"], "--halo"),
        (["--mode", "linear", "--tile", "0,4,4"], "--tile"),
        (["--mode", "linear", "--threads", "0"], "--threads"),
        (["--mode", "linear", "--tile", "4,4"], "--tile"),
    ])
    def test_bad_flags_named(self, capsys, small, tmp_path, flags, name):
        err = run_usage_error(capsys, "subdivide", "--in", small, "--out", tmp_path / "o", *flags)
        assert name in err

    def test_missing_input(self, capsys, tmp_path):
        code = main(["subdivide", "--in", str(tmp_path / "none"), "--out", str(tmp_path / "o"),
                     "--mode", "linear"])
        assert code == 1
        assert "--in" in capsys.readouterr().err


class TestRoundtrip:
    @pytest.mark.parametrize("mode", ["linear", "nonlinear"])
    def test_report_fields(self, phantom64, tmp_path, mode):
        extra = ["--tau", "2"] if mode == "nonlinear" else []
        report = tmp_path / "r.txt"
        run_ok("roundtrip", "--in", phantom64, "--mode", mode, *extra, "--report", report,
               "--out", tmp_path / "up")
        text = report.read_text()
        assert [line.split("=")[0].strip() for line in text.splitlines()] == list(FIELDS)
        rep = MetricsReport.from_text(text)
        assert math.isfinite(rep.psnr_db)
        assert read_volume(tmp_path / "up").dims == (64, 64, 64)

    def test_odd_dims(self, capsys, tmp_path):
        write_volume(Volume(np.ones((5, 4, 4))), tmp_path / "odd")
        code = main(["roundtrip", "--in", str(tmp_path / "odd"), "--mode", "linear",
                     "--report", str(tmp_path / "r")])
        assert code == 1
        assert "--in" in capsys.readouterr().err


class TestMetrics:
    def test_self_comparison(self, phantom64, tmp_path):
        report = tmp_path / "m.txt"
        run_ok("metrics", "--ref", phantom64, "--test", phantom64, "--report", report)
        rep = MetricsReport.from_text(report.read_text())
        assert rep.psnr_db == math.inf
        assert rep.rel_l2_percent == 0.0
        assert rep.rel_tv_percent == 100.0

    def test_dims_mismatch(self, capsys, phantom64, small, tmp_path):
        code = main(["metrics", "--ref", str(phantom64), "--test", str(small),
                     "--report", str(tmp_path / "m")])
        assert code == 1
        assert "--ref/--test" in capsys.readouterr().err


class TestROI:
    def test_cut(self, small, tmp_path):
        run_ok("roi", "--in", small, "--origin", "2,1,0", "--dims", "3,4,5", "--out", tmp_path / "r")
        roi = read_volume(tmp_path / "r")
        full = read_volume(small)
        np.testing.assert_array_equal(roi.data, full.data[2:5, 1:5, 0:5])

    def test_out_of_bounds(self, capsys, small, tmp_path):
        err = run_usage_error(capsys, "roi", "--in", small, "--origin", "10,0,0",
                              "--dims", "3,1,1", "--out", tmp_path / "r")
        assert "--origin" in err


class TestSlice:
    def test_export(self, phantom64, tmp_path):
        run_ok("slice", "--in", phantom64, "--axis", "z", "--index", 10, "--out", tmp_path / "s.pgm")
        assert (tmp_path / "s.pgm").read_bytes().startswith(b"P5\n64 64\n255\n")

    def test_index_range(self, capsys, phantom64, tmp_path):
        err = run_usage_error(capsys, "slice", "--in", phantom64, "--axis", "y", "--index", 64,
                              "--out", tmp_path / "s.pgm")
        assert "--index" in err

    def test_gamma(self, capsys, phantom64, tmp_path):
        err = run_usage_error(capsys, "slice", "--in", phantom64, "--axis", "y", "--index", 0,
                              "--out", tmp_path / "s.pgm", "--gamma", "-1")
        assert "--gamma" in err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "voxsubdiv", "phantom", "--dims", "64",
                           "--out", str(tmp_path / "p")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "p.raw").stat().st_size == 64 ** 3 * 4


def test_pure_python_switch():
    code = "from voxsubdiv import BACKEND; print(BACKEND)"
    env = dict(os.environ, VOXSUBDIV_PURE_PYTHON="1")
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert proc.stdout.strip() == "python", proc.stderr
