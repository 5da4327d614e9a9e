use pyo3::prelude::*;

#[pymodule]
fn tvlap_py(_m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
