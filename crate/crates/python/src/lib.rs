//! Python bindings. Exact values cross the boundary as `fractions.Fraction`;
//! structured reports as plain dicts.

use std::path::PathBuf;

use num_bigint::BigInt;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyFloat, PyInt, PyString, PyTuple};
use serde::Serialize;

use floor_relu::bits::{build_bit_locator, build_block_extractor, build_point_fitter};
use floor_relu::bounds::{bound_theorem1, bound_theorem2, DEFAULT_GUARD_BITS};
use floor_relu::construct::{self, BuildOptions};
use floor_relu::io;
use floor_relu::target::{lookup, registry, TargetFunction};
use floor_relu::verify::{self, BitLevel, DEFAULT_RANDOM_POINTS};
use floor_relu::{BitString, Dyadic};

create_exception!(floor_relu, FloorReluError, PyException);

fn err(e: floor_relu::Error) -> PyErr {
    FloorReluError::new_err(e.to_string())
}

fn fraction<'py>(py: Python<'py>, v: &Dyadic) -> PyResult<Bound<'py, PyAny>> {
    let (num, den) = if v.exponent() >= 0 {
        (v.mantissa() << v.exponent() as usize, BigInt::from(1))
    } else {
        (v.mantissa().clone(), BigInt::from(1) << (-v.exponent()) as usize)
    };
    py.import("fractions")?.getattr("Fraction")?.call1((num, den))
}

fn fractions<'py>(py: Python<'py>, vs: &[Dyadic]) -> PyResult<Vec<Bound<'py, PyAny>>> {
    vs.iter().map(|v| fraction(py, v)).collect()
}

/// Accepts `int`, `float`, `str` (`"3/2^4"`, `"0.375"`, …) or a dyadic `Fraction`.
fn to_dyadic(obj: &Bound<'_, PyAny>) -> PyResult<Dyadic> {
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse::<Dyadic>().map_err(|e| err(e.into()));
    }
    if obj.is_instance_of::<PyInt>() {
        return Ok(Dyadic::from(obj.extract::<BigInt>()?));
    }
    if obj.is_instance_of::<PyFloat>() {
        return Dyadic::from_f64(obj.extract::<f64>()?).map_err(|e| err(e.into()));
    }
    let num: BigInt = obj.getattr("numerator")?.extract()?;
    let den: BigInt = obj.getattr("denominator")?.extract()?;
    let q = num_rational::BigRational::new(num, den);
    let bits = q.denom().bits() as i64;
    let d = Dyadic::from_rational(&q, bits, floor_relu::Rounding::Floor);
    if d.to_rational() != q {
        return Err(FloorReluError::new_err(format!("{q} is not a dyadic rational")));
    }
    Ok(d)
}

fn to_point(x: &Bound<'_, PyAny>) -> PyResult<Vec<Dyadic>> {
    x.try_iter()?.map(|v| to_dyadic(&v?)).collect()
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = io::to_json_string(value).map_err(err)?;
    py.import("json")?.getattr("loads")?.call1((s,))
}

/// A Floor-ReLU network with exact dyadic parameters.
#[pyclass(module = "floor_relu", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Network {
    inner: floor_relu::Network,
}

#[pymethods]
impl Network {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Network {
            inner: io::network_from_json(s).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Network {
            inner: io::load_network(&path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        io::network_to_json(&self.inner).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_network(&path, &self.inner).map_err(err)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn audit<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.audit())
    }

    /// Exact evaluation; returns a list of `Fraction`.
    fn eval<'py>(&self, py: Python<'py>, x: &Bound<'py, PyAny>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        let x = to_point(x)?;
        let out = py.detach(|| self.inner.eval_exact(&x)).map_err(err)?;
        fractions(py, &out)
    }

    /// Binary64 evaluation with the same wiring.
    fn eval_float(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.eval_float(&x).map_err(err)
    }

    fn __repr__(&self) -> String {
        let a = self.inner.audit();
        format!(
            "Network(input_dim={}, width={}, depth={}, nonzero_params={})",
            self.inner.input_dim(),
            a.width,
            a.depth,
            a.nonzero_params
        )
    }
}

/// Claims attached to a constructed network.
#[pyclass(module = "floor_relu", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Certificate {
    inner: construct::Certificate,
}

#[pymethods]
impl Certificate {
    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        Ok(Certificate {
            inner: io::from_json_str(s).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Certificate {
            inner: io::load_json(&path).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        io::to_json_string(&self.inner).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        io::save_json(&path, &self.inner).map_err(err)
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner)
    }

    #[getter]
    fn target(&self) -> String {
        self.inner.target.clone()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d
    }

    #[getter]
    fn theorem(&self) -> u8 {
        self.inner.theorem
    }

    #[getter]
    fn bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.bound)
    }

    #[getter]
    fn width_limit(&self) -> u64 {
        self.inner.width_limit
    }

    #[getter]
    fn depth_limit(&self) -> u64 {
        self.inner.depth_limit
    }

    fn __repr__(&self) -> String {
        format!(
            "Certificate(target={:?}, d={}, N={}, L={}, theorem={}, bound≈{})",
            self.inner.target,
            self.inner.d,
            self.inner.n,
            self.inner.l,
            self.inner.theorem,
            self.inner.bound.to_f64()
        )
    }
}

fn half_width(m: Option<&Bound<'_, PyAny>>) -> PyResult<Option<Dyadic>> {
    m.map(to_dyadic).transpose()
}

/// Builds an approximant for a builtin target; returns `(Network, Certificate)`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (target, d, n, l, theorem = 1, m = None, guard_bits = DEFAULT_GUARD_BITS))]
fn build(
    py: Python<'_>,
    target: &str,
    d: usize,
    n: u64,
    l: u64,
    theorem: u8,
    m: Option<&Bound<'_, PyAny>>,
    guard_bits: u32,
) -> PyResult<(Network, Certificate)> {
    let m = half_width(m)?;
    let opts = BuildOptions { guard_bits };
    let f = lookup(target, d, m.as_ref()).map_err(err)?;
    let (net, cert) = py
        .detach(|| match (&m, theorem) {
            (Some(m), th) => construct::wrap_domain(f, m, th, n, l, &opts),
            (None, 1) => construct::build_theorem1(&f, n, l, &opts),
            (None, 2) => construct::build_theorem2(&f, n, l, &opts),
            (None, t) => Err(floor_relu::Error::InvalidArgument(format!("theorem must be 1 or 2, got {t}"))),
        })
        .map_err(err)?;
    Ok((Network { inner: net }, Certificate { inner: cert }))
}

/// Measures `net` against the certificate's target; returns the error report as a dict.
#[pyfunction(name = "verify")]
#[pyo3(signature = (net, cert, grid = None, samples = DEFAULT_RANDOM_POINTS, seed = 0))]
fn py_verify<'py>(
    py: Python<'py>,
    net: &Network,
    cert: &Certificate,
    grid: Option<u32>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let c = &cert.inner;
    let f = lookup(&c.target, c.d, c.domain_half_width.as_ref()).map_err(err)?;
    let (report, _) = py
        .detach(|| verify::check_certificate_with(&net.inner, &f, c, grid, samples, seed))
        .map_err(err)?;
    to_dict(py, &report)
}

fn modulus_of(target: &str, d: usize) -> PyResult<floor_relu::modulus::ModulusSpec> {
    Ok(lookup(target, d, None).map_err(err)?.modulus().clone())
}

/// Error bound of the `N^{−√L}` construction for a builtin target.
#[pyfunction(name = "bound_theorem1")]
#[pyo3(signature = (target, d, n, l, guard_bits = DEFAULT_GUARD_BITS))]
fn py_bound_theorem1<'py>(py: Python<'py>, target: &str, d: usize, n: u64, l: u64, guard_bits: u32) -> PyResult<Bound<'py, PyAny>> {
    let b = bound_theorem1(&modulus_of(target, d)?, d, n, l, guard_bits).map_err(err)?;
    fraction(py, &b)
}

/// Error bound of the `2^{−NL}` construction for a builtin target.
#[pyfunction(name = "bound_theorem2")]
#[pyo3(signature = (target, d, n, l, guard_bits = DEFAULT_GUARD_BITS))]
fn py_bound_theorem2<'py>(py: Python<'py>, target: &str, d: usize, n: u64, l: u64, guard_bits: u32) -> PyResult<Bound<'py, PyAny>> {
    let b = bound_theorem2(&modulus_of(target, d)?, d, n, l, guard_bits).map_err(err)?;
    fraction(py, &b)
}

#[pyfunction]
fn reparameterize(n: u64, l: u64) -> PyResult<(u64, u64)> {
    construct::reparameterize(n, l).map_err(err)
}

fn bit_string(bits: &str) -> PyResult<BitString> {
    bits.parse().map_err(|e: floor_relu::NumericError| err(e.into()))
}

/// Network with `φ(m) = θ_m` for `m = 1..N^L`, where `bits` is `θ` as a 0/1 string.
#[pyfunction]
fn point_fitter(n: usize, l: u32, bits: &str) -> PyResult<Network> {
    Ok(Network {
        inner: build_point_fitter(n, l, &bit_string(bits)?).map_err(err)?,
    })
}

#[pyfunction]
fn block_extractor(n: usize, j: u32) -> PyResult<Network> {
    Ok(Network {
        inner: build_block_extractor(n, j).map_err(err)?,
    })
}

#[pyfunction]
fn bit_locator(n: usize, l: u32) -> PyResult<Network> {
    Ok(Network {
        inner: build_bit_locator(n, l).map_err(err)?,
    })
}

/// `level` is one of `"block"`, `"locator"`, `"fitter"`.
#[pyfunction]
#[pyo3(signature = (level, n, size, cap = 1 << 16, seed = 0))]
fn exhaustive_bit_check<'py>(py: Python<'py>, level: &str, n: usize, size: u32, cap: u64, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let level = match level {
        "block" => BitLevel::Block,
        "locator" => BitLevel::Locator,
        "fitter" => BitLevel::Fitter,
        other => return Err(FloorReluError::new_err(format!("unknown level {other:?}"))),
    };
    let s = py.detach(|| verify::exhaustive_bit_check(level, n, size, cap, seed)).map_err(err)?;
    to_dict(py, &s)
}

#[pyfunction]
#[pyo3(signature = (n, l, seed = 0))]
fn memorization_demo<'py>(py: Python<'py>, n: usize, l: u32, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| verify::memorization_demo(n, l, seed)).map_err(err)?;
    to_dict(py, &r)
}

#[pyfunction]
fn float_divergence_probe<'py>(py: Python<'py>, net: &Network, points: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let pts: Vec<Vec<Dyadic>> = points.try_iter()?.map(|p| to_point(&p?)).collect::<PyResult<_>>()?;
    let r = verify::float_divergence_probe(&net.inner, &pts).map_err(err)?;
    to_dict(py, &r)
}

/// Builtin targets as `(name, formula, parameters, modulus)` tuples.
#[pyfunction]
fn targets<'py>(py: Python<'py>) -> PyResult<Vec<Bound<'py, PyTuple>>> {
    registry()
        .into_iter()
        .map(|t| PyTuple::new(py, [t.name, t.formula, t.parameters, t.modulus]))
        .collect()
}

/// Evaluates a builtin target exactly enough to print; returns a float.
#[pyfunction]
#[pyo3(signature = (target, x, m = None))]
fn target_value(target: &str, x: &Bound<'_, PyAny>, m: Option<&Bound<'_, PyAny>>) -> PyResult<f64> {
    let x = to_point(x)?;
    let m = half_width(m)?;
    let f = lookup(target, x.len(), m.as_ref()).map_err(err)?;
    Ok(f.enclose_dyadic(&x, 64).map_err(err)?.to_f64())
}

#[pymodule(name = "floor_relu")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FloorReluError", m.py().get_type::<FloorReluError>())?;
    m.add("DEFAULT_GUARD_BITS", DEFAULT_GUARD_BITS)?;
    m.add_class::<Network>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(build, m)?)?;
    m.add_function(wrap_pyfunction!(py_verify, m)?)?;
    m.add_function(wrap_pyfunction!(py_bound_theorem1, m)?)?;
    m.add_function(wrap_pyfunction!(py_bound_theorem2, m)?)?;
    m.add_function(wrap_pyfunction!(reparameterize, m)?)?;
    m.add_function(wrap_pyfunction!(point_fitter, m)?)?;
    m.add_function(wrap_pyfunction!(block_extractor, m)?)?;
    m.add_function(wrap_pyfunction!(bit_locator, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_bit_check, m)?)?;
    m.add_function(wrap_pyfunction!(memorization_demo, m)?)?;
    m.add_function(wrap_pyfunction!(float_divergence_probe, m)?)?;
    m.add_function(wrap_pyfunction!(targets, m)?)?;
    m.add_function(wrap_pyfunction!(target_value, m)?)?;
    Ok(())
}
