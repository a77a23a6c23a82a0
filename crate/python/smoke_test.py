"""Smoke test for the imcflab extension module.

Build it first:

    cargo build --release -p imcf-lab-py --features extension-module
    python python/smoke_test.py

The script loads target/release/libimcflab.so (or the path in IMCFLAB_LIB).
"""

import importlib.machinery
import importlib.util
import math
import os
import sys
from pathlib import Path


def load():
    root = Path(__file__).resolve().parent.parent
    default = root / "target" / "release" / ("libimcflab.dylib" if sys.platform == "darwin" else "libimcflab.so")
    path = Path(os.environ.get("IMCFLAB_LIB", default))
    loader = importlib.machinery.ExtensionFileLoader("imcflab", str(path))
    spec = importlib.util.spec_from_file_location("imcflab", path, loader=loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


def main():
    lab = load()

    grid = lab.SphereGrid(3, 64)
    assert len(grid) == 64
    assert math.isclose(grid.quadrature([1.0] * 64), 4 * math.pi, rel_tol=1e-12)
    assert math.isclose(lab.unit_sphere_area(2), 4 * math.pi, rel_tol=1e-14)

    sphere = lab.RadialGraph.from_shape(lab.Shape.centered_sphere(1.0), 3, 128)
    report = sphere.evaluate()
    closed = lab.sphere_closed_forms(1.0, 3)
    assert math.isclose(report.area, closed["A"], rel_tol=1e-10)
    assert math.isclose(report.l, 8 * math.pi, rel_tol=1e-10)
    assert abs(report.af_margin()) < 1e-10
    assert lab.FunctionalReport.columns()[0] == "t"

    off = lab.RadialGraph.from_shape(lab.Shape.offcenter_sphere(0.3, 1.0), 3, 128).evaluate()
    assert off.af_margin() > 0 and off.l > 8 * math.pi

    try:
        lab.RadialGraph.from_shape(lab.Shape.perturbed_sphere(0.3, 0.6, 4), 3, 128)
    except ValueError as e:
        assert "mean convex" in str(e)
    else:
        raise AssertionError("non-mean-convex shape accepted")

    trace = lab.run_flow(sphere, "imcf", 1.0, 0.25, max_dt=0.05)
    assert trace.status == "completed"
    expected = math.asinh(math.sinh(1.0) * math.exp(0.5))
    assert max(abs(u - expected) for u in trace.final_u) < 1e-8
    areas = [r.area for r in trace.reports]
    assert all(math.isclose(a, areas[0] * math.exp(t), rel_tol=1e-8) for a, t in zip(areas, trace.times))

    brendle = lab.run_flow(sphere, "brendle", 2.0, 0.1)
    gd = 2 * math.atan(math.tanh(0.5))
    assert brendle.status == "extinct" and abs(brendle.extinction_time - gd) < 1e-3

    adss = lab.penrose_check(3, "adss", 1.0)
    assert adss["equality"] and abs(adss["mass_formula_total"] - 1.0) < 1e-8
    shell = lab.penrose_check(3, "mass_shell", 1.0, delta_m=0.01, width=1.0)
    assert shell["margin"] > 0.009
    assert math.isclose(lab.horizon_radius(1.0, 3), 1.0, rel_tol=1e-12)

    print("imcflab smoke test: ok")


if __name__ == "__main__":
    main()
