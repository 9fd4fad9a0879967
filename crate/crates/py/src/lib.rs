//! Python bindings: `import isoform`.

use std::collections::BTreeMap;

use isoform::distributions as dist;
use isoform::enumeration::{self, EnumConfig};
use isoform::montecarlo::TrialPlan;
use isoform::qspace::{self, InvariantKind};
use isoform::{rng, sampler, tower};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

create_exception!(isoform, IsoformError, PyValueError);

fn err(e: isoform::Error) -> PyErr {
    IsoformError::new_err(format!("[{}] {e}", e.code()))
}

fn fraction(num: u32, den: u32) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn json_to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(
    name = "QuadraticSpace",
    module = "isoform",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PySpace(qspace::QuadraticSpace);

#[pyclass(
    name = "Subspace",
    module = "isoform",
    frozen,
    eq,
    hash,
    skip_from_py_object
)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PySubspace(isoform::Subspace);

#[pyclass(name = "Rng", module = "isoform")]
struct PyRng(rng::RngStream);

#[pymethods]
impl PySpace {
    /// `q[i]` and `pairing[i][j]` are numerators over `p * scale`.
    #[new]
    #[pyo3(signature = (p, q, pairing, scale = 1))]
    fn new(p: u64, q: Vec<u32>, pairing: Vec<Vec<u32>>, scale: u8) -> PyResult<Self> {
        qspace::QuadraticSpace::new(p, scale, q, pairing)
            .map(PySpace)
            .map_err(err)
    }

    #[staticmethod]
    fn hyperbolic(p: u64, n: usize) -> PyResult<Self> {
        qspace::make_hyperbolic(p, n).map(PySpace).map_err(err)
    }

    #[staticmethod]
    fn quarter_block(n: usize) -> PyResult<Self> {
        qspace::make_quarter_block(n).map(PySpace).map_err(err)
    }

    #[getter]
    fn p(&self) -> u8 {
        self.0.prime()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn scale(&self) -> u8 {
        self.0.scale()
    }

    #[getter]
    fn nondegenerate(&self) -> bool {
        self.0.is_nondegenerate()
    }

    fn subspace(&self, rows: Vec<Vec<i64>>) -> PyResult<PySubspace> {
        let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
        self.0.subspace(&refs).map(PySubspace).map_err(err)
    }

    /// `Q(v)` as a fraction in `[0, 1)`.
    fn q(&self, v: Vec<i64>) -> PyResult<BigRational> {
        let t = self
            .0
            .eval_q(&self.0.vector(&v).map_err(err)?)
            .map_err(err)?;
        Ok(fraction(t.numerator(), t.modulus()))
    }

    fn pairing(&self, x: Vec<i64>, y: Vec<i64>) -> PyResult<BigRational> {
        let (x, y) = (
            self.0.vector(&x).map_err(err)?,
            self.0.vector(&y).map_err(err)?,
        );
        let t = self.0.pairing(&x, &y).map_err(err)?;
        Ok(fraction(t.numerator(), t.modulus()))
    }

    fn perp(&self, s: &PySubspace) -> PyResult<PySubspace> {
        self.0.perp(&s.0).map(PySubspace).map_err(err)
    }

    fn is_isotropic(&self, s: &PySubspace) -> PyResult<bool> {
        self.0.is_isotropic(&s.0).map_err(err)
    }

    fn is_maximal_isotropic(&self, s: &PySubspace) -> PyResult<bool> {
        self.0.is_maximal_isotropic(&s.0).map_err(err)
    }

    /// `("discriminant" | "arf", 0 | 1)`, where 0 is the class of the hyperbolic space.
    fn invariant(&self) -> PyResult<(&'static str, u8)> {
        let inv = qspace::invariant(&self.0).map_err(err)?;
        let kind = match inv.kind {
            InvariantKind::Discriminant => "discriminant",
            InvariantKind::Arf => "arf",
        };
        Ok((kind, inv.value))
    }

    fn __repr__(&self) -> String {
        format!(
            "QuadraticSpace(p={}, dim={}, scale={})",
            self.0.prime(),
            self.0.dim(),
            self.0.scale()
        )
    }
}

#[pymethods]
impl PySubspace {
    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.0.ambient_dim()
    }

    /// Rows of the reduced echelon basis.
    #[getter]
    fn basis(&self) -> Vec<Vec<u8>> {
        self.0.basis().iter().map(|v| v.coords()).collect()
    }

    fn contains(&self, v: Vec<i64>) -> bool {
        v.len() == self.0.ambient_dim()
            && self
                .0
                .contains(&isoform::FpVec::from_coords(self.0.prime(), &v))
    }

    fn intersection_dim(&self, other: &PySubspace) -> usize {
        self.0.intersection_dim(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("Subspace({})", self.0)
    }
}

#[pymethods]
impl PyRng {
    #[new]
    #[pyo3(signature = (seed, stream = 0))]
    fn new(seed: u64, stream: u64) -> Self {
        PyRng(rng::RngStream::new(seed, stream))
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
}

fn config(max_canonicalizations: Option<u64>) -> EnumConfig {
    match max_canonicalizations {
        Some(cap) => EnumConfig {
            max_canonicalizations: cap,
        },
        None => EnumConfig::from_env(),
    }
}

#[pyfunction]
#[pyo3(signature = (space, max_canonicalizations = None))]
fn enumerate_mis(space: &PySpace, max_canonicalizations: Option<u64>) -> PyResult<Vec<PySubspace>> {
    let all =
        enumeration::enumerate_mis_with(&space.0, &config(max_canonicalizations)).map_err(err)?;
    Ok(all.members().iter().cloned().map(PySubspace).collect())
}

#[pyfunction]
fn count_mis_closed(p: u64, n: u32) -> PyResult<BigUint> {
    enumeration::count_mis_closed(p, n).map_err(err)
}

#[pyfunction]
fn push_mis(space: &PySpace, x: &PySubspace, w: &PySubspace) -> PyResult<PySubspace> {
    qspace::push_mis(&space.0, &x.0, &w.0)
        .map(PySubspace)
        .map_err(err)
}

#[pyfunction]
fn verify_fibers(space: &PySpace, x: &PySubspace) -> PyResult<bool> {
    Ok(enumeration::verify_fibers(&space.0, &x.0)
        .map_err(err)?
        .holds())
}

/// `{d: #{Z : dim(Z ∩ w) = d}}` over all maximal isotropic `Z`.
#[pyfunction]
fn intersection_histogram(space: &PySpace, w: &PySubspace) -> PyResult<BTreeMap<usize, u64>> {
    let h = enumeration::intersection_histogram(&space.0, &w.0).map_err(err)?;
    Ok((0..=h.max_dim())
        .map(|d| (d, h.count(d)))
        .filter(|&(_, c)| c > 0)
        .collect())
}

#[pyfunction]
fn dist_a_dn(p: u64, n: u32) -> PyResult<Vec<BigRational>> {
    Ok(dist::dist_a_dn(p, n)
        .map_err(err)?
        .probs_exact
        .unwrap_or_default())
}

#[pyfunction]
#[pyo3(signature = (p, dmax, precision = dist::DEFAULT_PRECISION))]
fn dist_a_limit(p: u64, dmax: u32, precision: u32) -> PyResult<Vec<f64>> {
    Ok(dist::dist_a_limit(p, dmax, precision)
        .map_err(err)?
        .probs_float)
}

#[pyfunction]
#[pyo3(signature = (p, dmax, precision = dist::DEFAULT_PRECISION))]
fn intro_pmf_s(p: u64, dmax: u32, precision: u32) -> PyResult<Vec<f64>> {
    Ok(dist::intro_pmf_s(p, dmax, precision)
        .map_err(err)?
        .probs_float)
}

/// Probabilities of `dim Sha[p] = 0, 2, .., 2 nmax`.
#[pyfunction]
#[pyo3(signature = (p, r, nmax, precision = dist::DEFAULT_PRECISION))]
fn sha_pmf(p: u64, r: u32, nmax: u32, precision: u32) -> PyResult<Vec<f64>> {
    Ok(dist::sha_pmf(p, r, nmax, precision)
        .map_err(err)?
        .probs_float)
}

#[pyfunction]
#[pyo3(signature = (n, dims, precision = dist::DEFAULT_PRECISION))]
fn seln_pmf(n: u64, dims: BTreeMap<u64, u64>, precision: u32) -> PyResult<f64> {
    dist::seln_pmf(n, &dims, precision).map_err(err)
}

#[pyfunction]
fn moment_finite(p: u64, n: u32, m: u32) -> PyResult<BigRational> {
    dist::moment_finite(p, n, m).map_err(err)
}

#[pyfunction]
fn moment_limit(p: u64, m: u32) -> PyResult<BigUint> {
    dist::moment_limit(p, m).map_err(err)
}

fn parity(name: &str) -> PyResult<dist::Parity> {
    match name {
        "even" => Ok(dist::Parity::Even),
        "odd" => Ok(dist::Parity::Odd),
        _ => Err(PyValueError::new_err("parity must be 'even' or 'odd'")),
    }
}

#[pyfunction]
fn conditional_moment(p: u64, n: u32, m: u32, parity_name: &str) -> PyResult<BigRational> {
    dist::conditional_moment(p, n, m, parity(parity_name)?).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, dmax, precision = dist::DEFAULT_PRECISION))]
fn mixture_residual(p: u64, dmax: u32, precision: u32) -> PyResult<f64> {
    dist::mixture_residual(p, dmax, precision).map_err(err)
}

#[pyfunction]
fn sample_mis_uniform(space: &PySpace, rng: &mut PyRng) -> PyResult<PySubspace> {
    sampler::sample_mis_uniform(&space.0, &mut rng.0)
        .map(PySubspace)
        .map_err(err)
}

#[pyfunction]
fn sample_xn(p: u64, n: usize, rng: &mut PyRng) -> PyResult<usize> {
    sampler::sample_xn(p, n, &mut rng.0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, rng, eps = sampler::DEFAULT_EPS))]
fn sample_xsel(p: u64, rng: &mut PyRng, eps: f64) -> PyResult<usize> {
    sampler::sample_xsel(p, eps, &mut rng.0).map_err(err)
}

/// Counts of `X_n` over `trials` draws, identical for any `workers`.
#[pyfunction]
#[pyo3(signature = (p, n, trials, seed, workers = 1))]
fn xn_histogram(
    py: Python<'_>,
    p: u64,
    n: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Vec<u64>> {
    let sum = sampler::BernoulliSum::new(p, n).map_err(err)?;
    let plan = TrialPlan::new(seed, trials).with_workers(workers);
    Ok(py.detach(|| plan.histogram(|r| sum.sample(r))))
}

/// One compatible chain `Z_1, .., Z_levels`.
#[pyfunction]
fn sample_chain(p: u64, levels: usize, rng: &mut PyRng) -> PyResult<Vec<PySubspace>> {
    let t = tower::build_tower(p, levels).map_err(err)?;
    Ok(tower::sample_chain(&t, &mut rng.0)
        .members
        .into_iter()
        .map(PySubspace)
        .collect())
}

/// The stabilization report of the tower as a dict.
#[pyfunction]
#[pyo3(signature = (p, levels, trials, seed, workers = 1))]
fn estimate_limit_pmf(
    py: Python<'_>,
    p: u64,
    levels: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Py<PyAny>> {
    let t = tower::build_tower(p, levels).map_err(err)?;
    let plan = TrialPlan::new(seed, trials).with_workers(workers);
    let est = py
        .detach(|| tower::estimate_limit_pmf(&t, &plan))
        .map_err(err)?;
    json_to_py(py, &est)
}

#[pymodule]
#[pyo3(name = "isoform")]
pub fn isoform_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("IsoformError", m.py().get_type::<IsoformError>())?;
    m.add_class::<PySpace>()?;
    m.add_class::<PySubspace>()?;
    m.add_class::<PyRng>()?;
    m.add_function(wrap_pyfunction!(enumerate_mis, m)?)?;
    m.add_function(wrap_pyfunction!(count_mis_closed, m)?)?;
    m.add_function(wrap_pyfunction!(push_mis, m)?)?;
    m.add_function(wrap_pyfunction!(verify_fibers, m)?)?;
    m.add_function(wrap_pyfunction!(intersection_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(dist_a_dn, m)?)?;
    m.add_function(wrap_pyfunction!(dist_a_limit, m)?)?;
    m.add_function(wrap_pyfunction!(intro_pmf_s, m)?)?;
    m.add_function(wrap_pyfunction!(sha_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(seln_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(moment_finite, m)?)?;
    m.add_function(wrap_pyfunction!(moment_limit, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_moment, m)?)?;
    m.add_function(wrap_pyfunction!(mixture_residual, m)?)?;
    m.add_function(wrap_pyfunction!(sample_mis_uniform, m)?)?;
    m.add_function(wrap_pyfunction!(sample_xn, m)?)?;
    m.add_function(wrap_pyfunction!(sample_xsel, m)?)?;
    m.add_function(wrap_pyfunction!(xn_histogram, m)?)?;
    m.add_function(wrap_pyfunction!(sample_chain, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_limit_pmf, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
