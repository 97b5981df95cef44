"""Smoke test for the lethargy_py extension module.

Build first:

    cargo build --release -p lethargy-py --features extension-module

then run `python3 python/smoke_test.py`. If `lethargy_py` is not importable
(e.g. not installed with maturin), the compiled library is picked up from
target/release or target/debug.
"""

import importlib
import json
import math
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    try:
        return importlib.import_module("lethargy_py")
    except ImportError:
        pass
    for profile in ("release", "debug"):
        lib = ROOT / "target" / profile / "liblethargy_py.so"
        if lib.exists():
            staging = tempfile.mkdtemp(prefix="lethargy_py_")
            shutil.copy(lib, os.path.join(staging, "lethargy_py.so"))
            sys.path.insert(0, staging)
            return importlib.import_module("lethargy_py")
    sys.exit("lethargy_py not built; see the module docstring")


def main():
    lp = load()

    eps = lp.materialize("power:0.5", 15)
    assert len(eps) == 16 and eps[0] == 2 ** -0.5
    assert all(b <= a for a, b in zip(eps, eps[1:]))

    poly = lp.Scheme.polynomial()
    assert poly.phi(4) == 5 and poly.is_haar
    assert lp.Scheme.spline().phi(2) == 27
    assert lp.Scheme.rational([(1, 1), (2, 1)]).phi(1) == 4

    f = lp.LethargyFunction(eps, envelope="mollified:0.25")
    assert f(0.0) == 0.0
    assert f.containment <= 1 / 3
    assert f.lift([0.0, 0.6, 0.0]) == f(0.36)
    t, k, sign = f.candidate_points()[-1]
    assert (t, k, sign) == (1.0, 2, 1)

    certs = f.certify_range(0, 15)
    for cert in certs:
        assert len(cert.points) == cert.m_n + 1
        assert cert.floor > cert.target
        assert f.check(cert) == (True, None)
        ok, reason = f.check(cert.with_target(cert.floor))
        assert not ok and "floor" in reason
    again = lp.Certificate.from_json(certs[3].to_json())
    assert again.points == certs[3].points
    valid, _ = lp.check(f, 0.0, 1.0, certs[3])
    assert valid

    # the best line to t^2 on [-1, 1] is the constant 1/2
    fit = lp.remez(lambda x: x * x, 1)
    assert fit.converged and abs(fit.error - 0.5) < 1e-12
    quartic = lp.remez(lambda x: x ** 4, 3, grid=20001)
    assert abs(quartic.error - 0.125) < 1e-8
    assert math.isclose(lp.cheb_eval([0.0, 0.0, 1.0], 0.5), -0.5)

    code, out, err = lp.run(["--n-hi", "6", "--grid", "2001", "--format", "json"])
    assert code == 0, err
    report = json.loads(out)
    assert report["all_pass"] and len(report["rows"]) == 7

    try:
        f(1.5)
    except lp.LethargyError:
        pass
    else:
        raise AssertionError("evaluation outside the interval should raise")

    print(f"lethargy_py smoke test passed ({len(certs)} certificates)")


if __name__ == "__main__":
    main()
