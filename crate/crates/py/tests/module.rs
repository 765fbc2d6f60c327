//! The module driven from an embedded interpreter.

use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::{PyDict, PyModule};

fn run(code: &str) {
    Python::attach(|py| {
        let m = PyModule::new(py, "bandsamp").unwrap();
        bandsamp_py::register(&m).unwrap();
        let globals = PyDict::new(py);
        globals.set_item("bandsamp", m).unwrap();
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn constants_round_trip() {
    run(r#"
c = bandsamp.constant_c(4, 1)
assert c.branch == "G", c
assert abs(c.value - 1.789026681309037) < 1e-10
assert abs(bandsamp.wirtinger(1).tau_1 - 1.5707963267948966) < 1e-12
assert abs(bandsamp.bunched_constant(0, 1.0) - 0.5766361194388747) < 1e-12
assert bandsamp.parse_fraction("1/16") == 0.0625
"#);
}

#[test]
fn bounds_and_preconditions() {
    run(r#"
b = bandsamp.frame_bounds_dd(0, 2, 0.1, 1.0)
assert b.admissible and b.lower < 1.0 < b.upper
assert not bandsamp.frame_bounds_1d(0, 2.0, 1.0).admissible
assert not bandsamp.perturbed_bounds(1.0, 1.0, 1.0, 5.0).admissible
try:
    bandsamp.perturbed_bounds(2.0, 1.0, 1.0, 0.1)
except ValueError:
    pass
else:
    raise AssertionError("A > B must raise")
"#);
}

#[test]
fn sets_and_reports() {
    run(r#"
s = bandsamp.SamplingSet1D.uniform(1.0, 3)
assert s.points == [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
assert s.window == (-3.5, 3.5)
assert s.weights(1)[3] == [1.0, 1.0 / 12.0]
r = bandsamp.verify_uniform_grid(1.0, 0, 3.0, 200, n_functions=4)
assert r.experiment == "uniform"
assert r.passed() and len(r.ratios) == 4
try:
    bandsamp.SamplingSet1D([1.0, 0.0], (-1.0, 2.0))
except ValueError:
    pass
else:
    raise AssertionError("unsorted points must raise")
"#);
}
