//! Python bindings: metric construction, pointwise curvature evaluation,
//! volume densities, and the verification scenario runner.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use finsler::geom;
use finsler::metric::{self, parse_metric_str};
use finsler::verify;
use finsler::volume::{self, VolumeSpec};

fn oops(e: finsler::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load(arg: &str) -> Result<metric::Metric, finsler::Error> {
    if let Some(name) = arg.strip_prefix("builtin:") {
        return metric::builtin(name);
    }
    let path = std::path::Path::new(arg);
    if path.is_file() {
        let src = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("file-metric");
        return parse_metric_str(&src, name);
    }
    Err(finsler::Error::invalid(format!(
        "metric `{arg}` is neither `builtin:NAME` nor an existing file"
    )))
}

/// A Finsler metric: a builtin from the catalog, or a parsed metric file.
#[pyclass(frozen, module = "finslerpy")]
struct Metric {
    inner: metric::Metric,
}

#[pymethods]
impl Metric {
    #[staticmethod]
    fn from_builtin(name: &str) -> PyResult<Self> {
        Ok(Metric { inner: metric::builtin(name).map_err(oops)? })
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| oops(e.into()))?;
        let name = std::path::Path::new(path)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("file-metric");
        Ok(Metric { inner: parse_metric_str(&src, name).map_err(oops)? })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn kind(&self) -> &str {
        self.inner.kind()
    }

    /// Metric value F(x, y).
    fn f(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.eval_f(&x[..], &y[..]).map_err(oops)
    }

    /// All curvature invariants at (x, y) as a dict.
    ///
    /// `reference` selects the reference density of the weighted invariants:
    /// "self" (the metric's own density, Σ ≡ 1), "alpha" (the
    /// Riemannian-part density), "builtin:NAME", or a metric file path.
    #[pyo3(signature = (x, y, reference = "self"))]
    fn curvature<'py>(
        &self,
        py: Python<'py>,
        x: Vec<f64>,
        y: Vec<f64>,
        reference: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let vol = VolumeSpec::preferred(&self.inner);
        let bundle = match reference {
            "self" => geom::curvature_bundle(&self.inner, &vol, &vol, &x, &y),
            "alpha" => geom::curvature_bundle(
                &self.inner,
                &vol,
                &VolumeSpec::RiemannianDensity,
                &x,
                &y,
            ),
            other => {
                let rm = load(other).map_err(oops)?;
                let rv = VolumeSpec::preferred(&rm);
                geom::curvature_bundle_with_reference(&self.inner, &vol, &rm, &rv, &x, &y)
            }
        }
        .map_err(oops)?;
        let d = PyDict::new(py);
        d.set_item("F", bundle.f)?;
        d.set_item("g", bundle.g)?;
        d.set_item("spray", bundle.spray)?;
        d.set_item("riemann", bundle.riemann)?;
        d.set_item("ric", bundle.ric)?;
        d.set_item("sigma", bundle.sigma_f)?;
        d.set_item("tau", bundle.tau)?;
        d.set_item("S", bundle.s)?;
        d.set_item("sfrak", bundle.s_frak)?;
        d.set_item("theta", bundle.theta)?;
        d.set_item("pric", bundle.pric)?;
        d.set_item("wpric0", bundle.wpric0)?;
        d.set_item("wpric0_minus_ric", bundle.wpric0 - bundle.ric)?;
        Ok(d)
    }

    /// Volume density σ(x). `method` is "preferred", "quadrature", or
    /// "closed-form".
    #[pyo3(signature = (x, method = "preferred"))]
    fn volume_density(&self, x: Vec<f64>, method: &str) -> PyResult<f64> {
        let spec = match method {
            "preferred" => VolumeSpec::preferred(&self.inner),
            "quadrature" => VolumeSpec::BusemannHausdorff,
            "closed-form" => match self.inner.kind() {
                "riemannian" => VolumeSpec::RiemannianDensity,
                "randers" => VolumeSpec::ClosedFormRanders,
                "kropina" => VolumeSpec::ClosedFormKropina,
                other => {
                    return Err(PyValueError::new_err(format!(
                        "no closed-form density for `{other}` metrics"
                    )))
                }
            },
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown method `{other}`; use preferred, quadrature, or closed-form"
                )))
            }
        };
        volume::density_value(&self.inner, &spec, &x).map_err(oops)
    }

    fn __repr__(&self) -> String {
        format!(
            "Metric(name='{}', kind='{}', dim={})",
            self.inner.name,
            self.inner.kind(),
            self.inner.dim()
        )
    }
}

/// Builtin metric catalog as a list of dicts.
#[pyfunction]
fn catalog(py: Python<'_>) -> PyResult<Bound<'_, PyList>> {
    let out = PyList::empty(py);
    for entry in metric::CATALOG {
        let d = PyDict::new(py);
        d.set_item("name", entry.name)?;
        d.set_item("kind", entry.kind)?;
        d.set_item("dim", entry.dim)?;
        d.set_item("summary", entry.summary)?;
        out.append(d)?;
    }
    Ok(out)
}

/// Registered verification scenario names.
#[pyfunction]
fn scenario_names() -> Vec<&'static str> {
    verify::scenario_names()
}

/// Run one verification scenario; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (name, seed = 0, samples = None, tol = None))]
fn run_scenario<'py>(
    py: Python<'py>,
    name: &str,
    seed: u64,
    samples: Option<usize>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let rep = verify::run_scenario(name, seed, samples, tol).map_err(oops)?;
    let d = PyDict::new(py);
    d.set_item("schema", rep.schema)?;
    d.set_item("scenario", &rep.scenario)?;
    d.set_item("seed", rep.seed)?;
    d.set_item("generator", rep.generator)?;
    d.set_item("samples", rep.samples)?;
    d.set_item("elapsed_ms", rep.elapsed_ms)?;
    d.set_item("pass", rep.pass())?;
    let checks = PyList::empty(py);
    for c in &rep.checks {
        let cd = PyDict::new(py);
        cd.set_item("name", &c.name)?;
        cd.set_item("max_abs", c.max_abs)?;
        cd.set_item("max_rel", c.max_rel)?;
        cd.set_item("tol", c.tol)?;
        cd.set_item("pass", c.pass)?;
        checks.append(cd)?;
    }
    d.set_item("checks", checks)?;
    Ok(d)
}

#[pymodule]
fn finslerpy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Metric>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
