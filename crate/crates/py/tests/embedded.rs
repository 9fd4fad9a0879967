use isoform_py::isoform_module;
use pyo3::ffi::c_str;
use pyo3::prelude::*;

#[test]
fn module_works_from_embedded_python() {
    pyo3::append_to_inittab!(isoform_module);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            c_str!(
                r#"
import isoform
from fractions import Fraction
h = isoform.QuadraticSpace.hyperbolic(3, 2)
assert len(isoform.enumerate_mis(h)) == 8
assert isoform.dist_a_dn(3, 1) == [Fraction(1, 2), Fraction(1, 2)]
assert isoform.count_mis_closed(5, 30) == eval("*".join(str(5**j + 1) for j in range(30)))
"#
            ),
            None,
            None,
        )
        .unwrap();
    });
}
