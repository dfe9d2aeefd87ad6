use pyo3::ffi::c_str;
use pyo3::prelude::*;
use rarita_py::rarita_py as module;

#[test]
fn module_round_trip() {
    pyo3::append_to_inittab!(module);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import rarita_py as r
assert r.verify(["check_gamma2"])["all_passed"]
assert r.Expression("tau_{A} - tau_{A}").is_zero()
s = r.characteristic_speeds()
assert abs(s[0] + 1) < 1e-12 and abs(s[-1] - 1) < 1e-12
rows = r.evolve(n=16, steps=20)
assert rows[-1]["step"] == 20
try:
    r.evolve(n=16, warp=1)
    raise SystemExit("unknown key accepted")
except ValueError:
    pass
sim = r.Simulation(n=16)
sim.remove_tau()
assert sim.max_tau() < 1e-12
"#
            ),
            None,
            None,
        )
        .unwrap_or_else(|e| panic!("{e}"));
    });
}
