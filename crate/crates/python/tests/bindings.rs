use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(script: &std::ffi::CStr) {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(lethargy_py::lethargy_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("lp", module).unwrap();
        if let Err(e) = py.run(script, Some(&globals), None) {
            e.print(py);
            panic!("script failed: {e}");
        }
    });
}

#[test]
fn certificates_from_python() {
    run(c"
eps = lp.materialize('power:0.5', 8)
f = lp.LethargyFunction(eps)
certs = f.certify_range(0, 8)
assert [c.n for c in certs] == list(range(9))
assert all(f.check(c)[0] for c in certs)
assert not f.check(certs[2].with_target(certs[2].floor))[0]
assert lp.Certificate.from_json(certs[5].to_json()).magnitudes == certs[5].magnitudes
assert lp.check(lambda t: f(t), 0.0, 1.0, certs[4]) == (True, None)
");
}

#[test]
fn solver_and_errors() {
    run(c"
r = lp.remez(lambda x: abs(x), 2, grid=2001)
assert r.converged and abs(r.error - 0.125) < 1e-6
assert abs(r(0.0) - lp.cheb_eval(r.coefficients, 0.0)) < 1e-15
try:
    lp.materialize('power:-1', 3)
except lp.LethargyError as e:
    assert 'alpha' in str(e) or 'power' in str(e), str(e)
else:
    raise AssertionError('negative exponent accepted')
try:
    lp.check(lambda t: 1 / 0, 0.0, 1.0, lp.LethargyFunction([1.0, 0.5]).search(0))
except ZeroDivisionError:
    pass
else:
    raise AssertionError('callback error swallowed')
code, _, err = lp.run(['--eps', 'geometric:4', '--n-hi', '5', '--grid', '2001'])
assert code == 2, err
");
}
