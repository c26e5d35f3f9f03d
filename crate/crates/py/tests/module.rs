use std::ffi::CString;

use pyo3::prelude::*;
use qreading_py::qreading_py;

fn run(code: &str) {
    pyo3::append_to_inittab!(qreading_py);
    Python::initialize();
    Python::attach(|py| {
        let code = CString::new(code).unwrap();
        if let Err(e) = py.run(&code, None, None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

// One interpreter per process, so everything runs from a single test.
#[test]
fn module_from_python() {
    run(r#"
import math
import qreading as q

mem = q.MemoryModel(0.25, 0.85, 0.01)
assert "r0=0.25" in repr(mem)

rep = q.gain(mem, 100, 0.1)
assert abs(rep.gain - 0.059) < 5e-4, rep
c, qb = q.error_bounds(mem, 100, 0.1)
assert c == rep.c_bound and qb == rep.q_bound and qb < c
assert len(q.reference_table()) == 6

cm = mem.output_cm(1, 0.1)
nu1, nu2 = cm.symplectic_spectrum()
assert nu1 >= 1.0 - 1e-12 and nu2 >= 1.0 - 1e-12
assert len(cm.dense()) == 4

assert abs(q.gp(1.0, 0.5) - 1.0) < 1e-15
assert q.binary_entropy(0.5) == 1.0

try:
    q.MemoryModel(0.9, 0.1, 0.0)
    raise AssertionError("accepted r1 < r0")
except ValueError:
    pass

try:
    q.TwoModeCm(1.0, 1.0, 5.0)
    raise AssertionError("accepted unphysical cm")
except q.NonPhysicalError:
    pass

p = q.critical_m_worst_case(0.0, 0.1)
assert p.m_int == 7 and p.path == "bisection", p
curve = q.critical_curve(3.0, [0.0, 0.3])
assert curve[0] is None and curve[1].m_int >= 1
assert abs(q.asymptote_high_energy(1.0) - math.log(2) / (2 * math.log(2) - 1)) < 1e-15
assert q.asymptote_high_energy(3.0) is None
assert abs(q.kappa_argmax(1.0) - 1.0 / 3.0) < 1e-15

th = q.FockState.thermal(0.5, 60)
assert abs(th.mean_photon_number(0) - 0.5) < 1e-8
out = q.FockState.tmsv(0.2, 20).apply_loss(1, 0.6, 0.1)
assert out.modes == 2 and abs(out.trace() - 1.0) < 1e-9
assert abs(q.fidelity(out, out) - 1.0) < 1e-9
a, b = q.FockState.coherent(0.3 + 0.1j, 20), q.FockState.vacuum(20)
assert abs(q.fidelity(a, b) - math.exp(-0.1)) < 1e-10
assert 0.0 < q.helstrom_error(a, b) < 0.5

try:
    q.FockState.thermal(5.0, 3)
    raise AssertionError("accepted a truncated thermal state")
except q.TruncationError:
    pass

rep = q.certify_cell(q.MemoryModel(0.3, 0.95, 0.1), 0.5)
assert rep["passes"] and rep["worst_abs_error"] < 1e-4, rep
"#);
}
