use pyo3::prelude::*;

#[pymodule]
fn puca(_py: Python<'_>, _m: &Bound<'_, PyModule>) -> PyResult<()> {
    Ok(())
}
