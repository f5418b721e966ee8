//! Python bindings: S-box predicates, mixing-layer tests and the cipher
//! theorem engine, mirroring the CLI's JSON reports.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tbgroup::cli::fill_cipher_report;
use tbgroup::mixlayer::{is_proper, is_strongly_proper, BrickPartition, LinearLayer};
use tbgroup::permgroup::check_condition_2;
use tbgroup::report::Report;
use tbgroup::sboxprops::{
    anti_invariance_report, differential_uniformity, is_anti_crooked,
    is_strongly_r_anti_invariant,
};
use tbgroup::tbcipher::CipherSpec;
use tbgroup::vboolfn::{anf_degree, nonlinearity, normalize_zero, SBox as CoreSbox};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An m-bit S-box (a permutation table unless stated otherwise).
#[pyclass(name = "Sbox", from_py_object)]
#[derive(Clone)]
struct PySbox {
    inner: CoreSbox,
}

#[pymethods]
impl PySbox {
    /// Build from a table of 2^m entries; m is inferred from the length.
    #[new]
    fn new(table: Vec<u16>) -> PyResult<Self> {
        let len = table.len();
        if !len.is_power_of_two() || len < 4 {
            return Err(value_err(format!("table length {len} is not a power of two >= 4")));
        }
        let m = len.trailing_zeros() as usize;
        Ok(Self { inner: CoreSbox::new(m, table).map_err(value_err)? })
    }

    /// Parse the 16-nibble hex shorthand for 4-bit tables.
    #[staticmethod]
    fn from_hex(hex: &str) -> PyResult<Self> {
        Ok(Self { inner: CoreSbox::from_hex(hex).map_err(value_err)? })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn table(&self) -> Vec<u16> {
        self.inner.table().to_vec()
    }

    /// Maximum entry of the difference distribution table.
    fn delta(&self) -> u32 {
        differential_uniformity(&self.inner).delta()
    }

    fn min_derivative_image(&self) -> u32 {
        differential_uniformity(&self.inner).min_image_size()
    }

    fn is_weakly_uniform(&self, delta: u32) -> bool {
        differential_uniformity(&self.inner).is_weakly_uniform(delta)
    }

    fn nonlinearity(&self) -> u32 {
        nonlinearity(&self.inner)
    }

    fn is_strongly_anti_invariant(&self, r: usize) -> PyResult<bool> {
        Ok(is_strongly_r_anti_invariant(&self.inner, r).map_err(value_err)?.holds)
    }

    /// Largest order of strong anti-invariance (0 when none holds).
    fn max_strong_anti_invariance(&self) -> PyResult<usize> {
        Ok(anti_invariance_report(&self.inner).map_err(value_err)?.max_r_strong)
    }

    /// (holds, witness_direction): witness is a direction whose derivative
    /// image is an affine subspace.
    fn is_anti_crooked(&self) -> (bool, Option<u16>) {
        let res = is_anti_crooked(&self.inner);
        (res.holds, res.witness)
    }

    /// Does <T, f T f^-1> cover the alternating group of the brick space?
    fn conjugate_translation_condition(&self) -> PyResult<bool> {
        let perm = self.inner.as_permutation().map_err(value_err)?;
        check_condition_2(&perm).map_err(value_err)
    }

    fn anf_degrees(&self) -> Vec<usize> {
        (1..self.inner.size() as u16)
            .map(|v| anf_degree(&self.inner.component(v)))
            .collect()
    }

    fn normalize_zero(&self) -> Self {
        Self { inner: normalize_zero(&self.inner) }
    }

    fn __repr__(&self) -> String {
        match self.inner.to_hex() {
            Some(hex) => format!("Sbox(m=4, {hex})"),
            None => format!("Sbox(m={}, {:?})", self.inner.m(), self.inner.table()),
        }
    }
}

/// An invertible linear map on the cipher state.
#[pyclass(name = "MixingLayer", from_py_object)]
#[derive(Clone)]
struct PyLayer {
    inner: LinearLayer,
}

#[pymethods]
impl PyLayer {
    /// Build from a bit permutation: entry i is the output position of
    /// input bit i (bit 0 is the least significant state bit).
    #[new]
    fn new(perm: Vec<u32>) -> PyResult<Self> {
        Ok(Self { inner: LinearLayer::from_bit_permutation(&perm).map_err(value_err)? })
    }

    /// Build from d row-bitmask integers; row i is the image of e_i.
    #[staticmethod]
    fn from_matrix_rows(d: usize, rows: Vec<u64>) -> PyResult<Self> {
        let matrix = tbgroup::gf2::Gf2Matrix::from_row_bits(d, rows).map_err(value_err)?;
        Ok(Self { inner: LinearLayer::from_matrix(matrix).map_err(value_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// (holds, invariant_wall_bricks)
    fn is_proper(&self, m: usize, n: usize) -> PyResult<(bool, Option<Vec<usize>>)> {
        let partition = BrickPartition::new(m, n).map_err(value_err)?;
        let verdict = is_proper(&self.inner, &partition).map_err(value_err)?;
        Ok((verdict.holds, verdict.invariant_wall.map(|w| w.brick_indices())))
    }

    /// (holds, (from_bricks, to_bricks))
    #[allow(clippy::type_complexity)]
    fn is_strongly_proper(
        &self,
        m: usize,
        n: usize,
    ) -> PyResult<(bool, Option<(Vec<usize>, Vec<usize>)>)> {
        let partition = BrickPartition::new(m, n).map_err(value_err)?;
        let verdict = is_strongly_proper(&self.inner, &partition).map_err(value_err)?;
        Ok((
            verdict.holds,
            verdict.witness.map(|(w, w2)| (w.brick_indices(), w2.brick_indices())),
        ))
    }

    fn __repr__(&self) -> String {
        format!("MixingLayer(d={})", self.inner.dim())
    }
}

/// Run the theorem engine (and optionally a reduced direct group check) on
/// a one-round cipher model; returns the analysis report as a JSON string.
#[pyfunction]
#[pyo3(signature = (m, n, bricks, layer, key_schedule_surjective=true, desk_check_n=None, seed=0x7b67))]
fn analyze_cipher(
    m: usize,
    n: usize,
    bricks: Vec<PySbox>,
    layer: PyLayer,
    key_schedule_surjective: bool,
    desk_check_n: Option<usize>,
    seed: u64,
) -> PyResult<String> {
    let tables: Vec<CoreSbox> = bricks.into_iter().map(|b| b.inner).collect();
    let spec = CipherSpec::new(m, n, tables, layer.inner, key_schedule_surjective)
        .map_err(value_err)?;
    let mut report = Report::new("cipher-analysis");
    fill_cipher_report(&mut report, &spec, desk_check_n, seed)
        .map_err(|f| value_err(f.message))?;
    Ok(report.to_json())
}

#[pyfunction]
fn present_sbox() -> PySbox {
    PySbox { inner: tbgroup::fixtures::present_sbox() }
}

#[pyfunction]
fn rectangle_sbox() -> PySbox {
    PySbox { inner: tbgroup::fixtures::rectangle_sbox() }
}

#[pyfunction]
fn printcipher_sbox() -> PySbox {
    PySbox { inner: tbgroup::fixtures::printcipher_sbox() }
}

#[pyfunction]
fn inversion_sbox() -> PySbox {
    PySbox { inner: tbgroup::fixtures::inversion_sbox() }
}

#[pyfunction]
fn present_layer() -> PyLayer {
    PyLayer { inner: tbgroup::fixtures::present_layer() }
}

#[pyfunction]
fn rectangle_layer() -> PyLayer {
    PyLayer { inner: tbgroup::fixtures::rectangle_layer() }
}

#[pyfunction]
fn printcipher_layer() -> PyLayer {
    PyLayer { inner: tbgroup::fixtures::printcipher_layer() }
}

#[pyfunction]
fn block_rotation_layer(m: usize, n: usize) -> PyLayer {
    PyLayer { inner: tbgroup::fixtures::block_rotation_layer(m, n) }
}

#[pymodule]
fn tbgroup_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySbox>()?;
    m.add_class::<PyLayer>()?;
    m.add_function(wrap_pyfunction!(analyze_cipher, m)?)?;
    m.add_function(wrap_pyfunction!(present_sbox, m)?)?;
    m.add_function(wrap_pyfunction!(rectangle_sbox, m)?)?;
    m.add_function(wrap_pyfunction!(printcipher_sbox, m)?)?;
    m.add_function(wrap_pyfunction!(inversion_sbox, m)?)?;
    m.add_function(wrap_pyfunction!(present_layer, m)?)?;
    m.add_function(wrap_pyfunction!(rectangle_layer, m)?)?;
    m.add_function(wrap_pyfunction!(printcipher_layer, m)?)?;
    m.add_function(wrap_pyfunction!(block_rotation_layer, m)?)?;
    Ok(())
}
