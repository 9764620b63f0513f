#!/usr/bin/env python3
"""Smoke test for the finslerpy extension module.

Builds the cdylib with cargo, imports it, and checks a handful of frozen
values. Run from anywhere:

    python3 python/smoke_test.py
"""

import pathlib
import shutil
import subprocess
import sys
import sysconfig
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def build_and_import():
    subprocess.run(["cargo", "build", "-p", "finsler-py"], cwd=ROOT, check=True)
    ext = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    libname = {
        "darwin": "libfinslerpy.dylib",
        "win32": "finslerpy.dll",
    }.get(sys.platform, "libfinslerpy.so")
    built = ROOT / "target" / "debug" / libname
    stage = pathlib.Path(tempfile.mkdtemp(prefix="finslerpy-"))
    shutil.copy2(built, stage / f"finslerpy{ext}")
    sys.path.insert(0, str(stage))
    import finslerpy

    return finslerpy


def approx(a, b, tol=1e-6):
    assert abs(a - b) <= tol * max(1.0, abs(b)), f"{a} !~ {b}"


def main():
    fp = build_and_import()

    names = {e["name"] for e in fp.catalog()}
    assert "funk2" in names and "kropina-const" in names, names

    m = fp.Metric.from_builtin("funk2")
    assert m.dim == 2 and m.kind == "randers"
    approx(m.f([0.3, 0.0], [1.0, 0.0]), 1.4285714285714286, 1e-12)

    cur = m.curvature([0.3, 0.0], [1.0, 0.0], reference="alpha")
    approx(cur["F"], 1.4285714)
    approx(cur["S"], 2.1428571)
    approx(cur["wpric0_minus_ric"], -0.6973795)

    # With the metric's own density as reference, the weighted and plain
    # projective curvatures coincide; for the Funk metric both vanish.
    own = m.curvature([0.3, 0.0], [1.0, 0.0], reference="self")
    assert abs(own["wpric0"] - own["pric"]) < 1e-12
    assert abs(own["pric"]) < 1e-8, own["pric"]

    k = fp.Metric.from_builtin("kropina-const")
    approx(k.volume_density([0.0, 0.0], method="quadrature"), 4.0)
    approx(k.volume_density([0.0, 0.0], method="closed-form"), 4.0, 1e-12)

    assert len(fp.scenario_names()) == 18
    rep = fp.run_scenario("reconstruct-T1", seed=5, samples=40)
    assert rep["pass"] and rep["generator"] == "chacha8", rep

    try:
        fp.Metric.from_builtin("no-such-metric")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for unknown builtin")

    print("smoke test: OK")


if __name__ == "__main__":
    main()
