//! Python bindings: rules, space parameters, the criterion and error
//! functionals, and the CBC construction.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use foldnet::cbc::{cbc, CbcConfig, CbcMode};
use foldnet::digitspace::{hoplps_points, Rule};
use foldnet::gfpoly::{find_irreducible as find_irreducible_rs, GFPoly, Modulus, PrimeBase};
use foldnet::kernel;
use foldnet::rule_io::RuleFile;

fn py_err(e: foldnet::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Smoothness `alpha`, weights `gamma` and the constant `D`.
#[pyclass(name = "SpaceParams", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PySpaceParams {
    inner: kernel::SpaceParams,
}

#[pymethods]
impl PySpaceParams {
    #[new]
    #[pyo3(signature = (alpha, gamma, d = 1.0))]
    fn new(alpha: u32, gamma: Vec<f64>, d: f64) -> PyResult<Self> {
        Ok(PySpaceParams {
            inner: kernel::SpaceParams::new(alpha, gamma, d).map_err(py_err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> u32 {
        self.inner.alpha
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma.clone()
    }

    #[getter(D)]
    fn d(&self) -> f64 {
        self.inner.d
    }

    fn __repr__(&self) -> String {
        format!(
            "SpaceParams(alpha={}, gamma={:?}, D={})",
            self.inner.alpha, self.inner.gamma, self.inner.d
        )
    }
}

/// Polynomial lattice rule; polynomials are ascending coefficient lists.
#[pyclass(name = "Rule", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyRule {
    inner: Rule,
}

#[pymethods]
impl PyRule {
    #[new]
    fn new(b: u32, p: Vec<u32>, m: usize, q: Vec<Vec<u32>>) -> PyResult<Self> {
        let base = PrimeBase::new(b).map_err(py_err)?;
        let modulus = GFPoly::new(base, p)
            .and_then(Modulus::new)
            .map_err(py_err)?;
        let q = q
            .into_iter()
            .map(|c| GFPoly::new(base, c))
            .collect::<foldnet::Result<Vec<_>>>()
            .map_err(py_err)?;
        Ok(PyRule {
            inner: Rule::new(modulus, m, q).map_err(py_err)?,
        })
    }

    /// Reads a rule file, returning the rule and its space parameters.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<(PyRule, PySpaceParams)> {
        let (rule, params) = RuleFile::from_json(text)
            .and_then(|f| f.to_rule())
            .map_err(py_err)?;
        Ok((PyRule { inner: rule }, PySpaceParams { inner: params }))
    }

    fn to_json(&self, params: &PySpaceParams) -> String {
        RuleFile::new(&self.inner, &params.inner).to_json()
    }

    #[getter]
    fn b(&self) -> u32 {
        self.inner.base().get()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn s(&self) -> usize {
        self.inner.s()
    }

    #[getter]
    fn p(&self) -> Vec<u32> {
        self.inner.modulus().poly().coeffs().to_vec()
    }

    #[getter]
    fn q(&self) -> Vec<Vec<u32>> {
        self.inner.q().iter().map(|q| q.coeffs().to_vec()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.num_points()
    }

    /// Points as floats, optionally after the tent transform.
    #[pyo3(signature = (folded = false))]
    fn points(&self, folded: bool) -> Vec<Vec<f64>> {
        let pts = hoplps_points(&self.inner);
        if folded {
            pts.folded().project_f64()
        } else {
            pts.project_f64()
        }
    }

    /// Points as exact `"numerator/denominator"` strings.
    #[pyo3(signature = (folded = false))]
    fn points_exact(&self, folded: bool) -> Vec<Vec<String>> {
        let mut pts = hoplps_points(&self.inner);
        if folded {
            pts = pts.folded();
        }
        pts.project_exact()
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| format!("{}/{}", r.numer(), r.denom()))
                    .collect()
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Rule(b={}, p={:?}, m={}, q={:?})",
            self.b(),
            self.p(),
            self.m(),
            self.q()
        )
    }
}

#[pyfunction]
fn criterion_b(rule: &PyRule, params: &PySpaceParams) -> PyResult<f64> {
    kernel::criterion_b(&rule.inner, &params.inner).map_err(py_err)
}

/// `(value, truncation_bound)` of the enumerated criterion.
#[pyfunction]
fn criterion_b_brute(
    rule: &PyRule,
    params: &PySpaceParams,
    cutoff_power: u32,
) -> PyResult<(f64, f64)> {
    let r = kernel::criterion_b_brute(&rule.inner, &params.inner, cutoff_power).map_err(py_err)?;
    Ok((r.value, r.truncation_bound))
}

/// Worst-case error of the rule, folded by default.
#[pyfunction]
#[pyo3(signature = (rule, params, folded = true))]
fn worst_case_error(rule: &PyRule, params: &PySpaceParams, folded: bool) -> PyResult<f64> {
    let mut pts = hoplps_points(&rule.inner);
    if folded {
        pts = pts.folded();
    }
    let e2 = kernel::worst_case_error_sq_of(&pts, &params.inner).map_err(py_err)?;
    Ok(e2.max(0.0).sqrt())
}

/// `(A1, A2, bound)`.
#[pyfunction]
fn theoretical_bound(
    b: u32,
    m: usize,
    n: usize,
    params: &PySpaceParams,
    lam: f64,
) -> PyResult<(f64, f64, f64)> {
    let t = kernel::theoretical_bound(b, m, n, &params.inner, lam).map_err(py_err)?;
    Ok((t.a1, t.a2, t.bound))
}

#[pyfunction]
fn chi_phi(b: u32, digits: Vec<u32>, alpha: u32) -> PyResult<f64> {
    let z = foldnet::digitspace::GElem::finite(b, digits).map_err(py_err)?;
    kernel::chi_phi(&z, alpha).map_err(py_err)
}

#[pyfunction]
fn kernel_k1(alpha: u32, x: f64, y: f64) -> PyResult<f64> {
    kernel::kernel_k1(alpha, x, y).map_err(py_err)
}

#[pyfunction]
fn find_irreducible(b: u32, n: usize) -> PyResult<Vec<u32>> {
    let p = PrimeBase::new(b)
        .and_then(|base| find_irreducible_rs(base, n))
        .map_err(py_err)?;
    Ok(p.poly().coeffs().to_vec())
}

/// Component-by-component construction; returns the rule and a trace dict
/// with keys `selected`, `B` and `bound_lambda1`.
#[pyfunction]
#[pyo3(signature = (b, m, params, n = None, mode = "fast"))]
fn construct<'py>(
    py: Python<'py>,
    b: u32,
    m: usize,
    params: &PySpaceParams,
    n: Option<usize>,
    mode: &str,
) -> PyResult<(PyRule, Bound<'py, PyDict>)> {
    let mode = match mode {
        "fast" => CbcMode::Fast,
        "naive" => CbcMode::Naive,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    };
    let base = PrimeBase::new(b).map_err(py_err)?;
    let cfg = CbcConfig::new(base, m, n, params.inner.clone(), mode).map_err(py_err)?;
    let (rule, trace) = py.detach(|| cbc(&cfg)).map_err(py_err)?;
    let dict = PyDict::new(py);
    dict.set_item("selected", trace.selected)?;
    dict.set_item("B", trace.criterion)?;
    dict.set_item("bound_lambda1", trace.bound_lambda1)?;
    Ok((PyRule { inner: rule }, dict))
}

#[pymodule]
fn pyfoldnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpaceParams>()?;
    m.add_class::<PyRule>()?;
    m.add_function(wrap_pyfunction!(criterion_b, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_b_brute, m)?)?;
    m.add_function(wrap_pyfunction!(worst_case_error, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(chi_phi, m)?)?;
    m.add_function(wrap_pyfunction!(kernel_k1, m)?)?;
    m.add_function(wrap_pyfunction!(find_irreducible, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    Ok(())
}
