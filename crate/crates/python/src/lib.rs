//! Python bindings for the `gl1n` crate. Matrices come back as nested
//! lists of Python complex numbers; spectra as lists of
//! `(value, multiplicity)` tuples.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use gl1n::chain::{self, ChainConfig, FockState, Observable};
use gl1n::gz::{self, HighestWeight, UnitarityClass};
use gl1n::odd;
use gl1n::rep::{GeneratorSet, OddElement};
use gl1n::scalars::{format_rational, parse_rational};
use gl1n::verify;
use gl1n::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Internal(_) | Error::NotHermitian(_) | Error::Io(_) | Error::Json(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn dense(m: &gl1n::linalg::SparseMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    let d = m.to_dense();
    (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect()).collect()
}

/// Highest weight `[m_{0,n+1}, m_{1,n+1}, ..., m_{n,n+1}]`.
#[pyclass(name = "HighestWeight", module = "pygl1n", frozen)]
struct PyHighestWeight {
    inner: HighestWeight,
}

#[pymethods]
impl PyHighestWeight {
    /// `labels` is either a string such as `"4,2,1,0"` or a list of ints
    /// and rational strings.
    #[new]
    fn new(labels: &Bound<'_, PyAny>) -> PyResult<Self> {
        let inner = if let Ok(s) = labels.extract::<String>() {
            HighestWeight::parse(&s)
        } else {
            let items: Vec<Bound<'_, PyAny>> = labels.extract()?;
            let mut parsed = Vec::with_capacity(items.len());
            for item in items {
                let text = match item.extract::<i64>() {
                    Ok(v) => v.to_string(),
                    Err(_) => item.extract::<String>()?,
                };
                parsed.push(parse_rational(&text).map_err(py_err)?);
            }
            HighestWeight::new(parsed)
        }
        .map_err(py_err)?;
        Ok(PyHighestWeight { inner })
    }

    #[staticmethod]
    fn fock(n: usize, p: i64) -> PyResult<Self> {
        Ok(PyHighestWeight {
            inner: HighestWeight::fock(n, p).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn ladder(n: usize, p: i64) -> PyResult<Self> {
        Ok(PyHighestWeight {
            inner: HighestWeight::ladder(n, p).map_err(py_err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels().iter().map(format_rational).collect()
    }

    /// `"typical"`, `"atypical-k"` or `"not-unitary"`.
    #[getter]
    fn unitarity(&self) -> String {
        match gz::classify_unitary(&self.inner) {
            UnitarityClass::Typical => "typical".into(),
            UnitarityClass::AtypicalOfType(k) => format!("atypical-{k}"),
            UnitarityClass::NotUnitary => "not-unitary".into(),
        }
    }

    fn dim(&self) -> PyResult<usize> {
        gz::count_patterns(&self.inner, gz::dimension_cap().map_err(py_err)?).map_err(py_err)
    }

    /// Restriction to `gl(1|1) + gl(n-1)`, one dict per `gl(n-1)` label.
    fn branch<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let comps = odd::branch(&self.inner).map_err(py_err)?;
        comps
            .iter()
            .map(|c| {
                let d = PyDict::new(py);
                d.set_item("a", format_rational(&c.gl1_weight.0))?;
                d.set_item("b", format_rational(&c.gl1_weight.1))?;
                let label: Vec<String> =
                    c.gln1_label.iter().map(|&z| format_rational(&self.inner.offset_value(z))).collect();
                d.set_item("label", label)?;
                d.set_item("n_free", c.n_free)?;
                d.set_item("dim_v", c.dim_v)?;
                d.set_item("dim", c.dim())?;
                d.set_item("singlet", c.singlet)?;
                Ok(d)
            })
            .collect()
    }

    /// Eigenvalues of `sum alpha_j e_0j + conj(alpha_j) e_j0` from the
    /// branching rule, without building any matrix.
    fn spectrum(&self, alpha: Vec<Complex64>) -> PyResult<(f64, Vec<(f64, usize)>)> {
        let r = odd::spectrum(&self.inner, &alpha).map_err(py_err)?;
        Ok((r.scale, r.levels.iter().map(|l| (l.value, l.multiplicity)).collect()))
    }

    fn __repr__(&self) -> String {
        format!("HighestWeight([{}])", self.labels().join(", "))
    }
}

/// The module with its generator matrices in the Gel'fand-Zetlin basis.
#[pyclass(name = "Module", module = "pygl1n", frozen)]
struct PyModule_ {
    set: GeneratorSet,
}

#[pymethods]
impl PyModule_ {
    #[new]
    fn new(hw: &PyHighestWeight) -> PyResult<Self> {
        let basis = gz::enumerate_basis(&hw.inner).map_err(py_err)?;
        Ok(PyModule_ {
            set: GeneratorSet::new(basis).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.set.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.set.n()
    }

    /// Basis patterns as `labels|row n|...|row 1` strings, in basis order.
    fn patterns(&self) -> Vec<String> {
        let b = self.set.basis();
        b.patterns().iter().map(|p| p.display(b.highest_weight())).collect()
    }

    /// Dense matrix of `e_ij`.
    fn generator(&self, i: usize, j: usize) -> PyResult<Vec<Vec<Complex64>>> {
        let n = self.set.n();
        if i > n || j > n {
            return Err(PyValueError::new_err(format!("indices must be in 0..={n}")));
        }
        Ok(dense(self.set.complex(i, j)))
    }

    fn odd_element(&self, alpha: Vec<Complex64>) -> PyResult<Vec<Vec<Complex64>>> {
        self.check_alpha(&alpha)?;
        Ok(dense(&self.set.odd_element(&OddElement::new(alpha))))
    }

    /// `(eigenvalue, coefficients)` pairs, orthonormal and ordered by
    /// eigenvalue.
    fn eigenvectors(&self, alpha: Vec<Complex64>) -> PyResult<Vec<(f64, Vec<Complex64>)>> {
        self.check_alpha(&alpha)?;
        let sys = odd::eigenvectors(&self.set, &alpha).map_err(py_err)?;
        Ok(sys.vectors.into_iter().map(|v| (v.eigenvalue, v.coefficients)).collect())
    }

    /// Dense diagonalization of the same odd element, for comparison.
    fn oracle_spectrum(&self, alpha: Vec<Complex64>) -> PyResult<(f64, Vec<(f64, usize)>)> {
        self.check_alpha(&alpha)?;
        let scale = alpha.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let m = self.set.odd_element(&OddElement::new(alpha));
        let r = odd::oracle_diagonalize(&m, scale).map_err(py_err)?.report;
        Ok((r.scale, r.levels.iter().map(|l| (l.value, l.multiplicity)).collect()))
    }

    /// Every structural check; returns `(name, passed, checked, max_residual)`.
    #[pyo3(signature = (seed = 0, alphas = 5))]
    fn verify(&self, seed: u64, alphas: usize) -> PyResult<Vec<(String, bool, usize, f64)>> {
        let reports = verify::module_suite(&self.set, seed, alphas).map_err(py_err)?;
        Ok(reports.into_iter().map(|r| (r.name.clone(), r.passed(), r.checked, r.max_residual)).collect())
    }
}

impl PyModule_ {
    fn check_alpha(&self, alpha: &[Complex64]) -> PyResult<()> {
        if alpha.len() != self.set.n() {
            return Err(PyValueError::new_err(format!(
                "alpha needs {} coefficients, got {}",
                self.set.n(),
                alpha.len()
            )));
        }
        Ok(())
    }
}

/// Periodic chain of `n` oscillators with mass `mu`, frequency `omega`,
/// coupling `c`.
#[pyclass(name = "Chain", module = "pygl1n", frozen)]
struct PyChain {
    cfg: ChainConfig,
}

fn observable(name: &str) -> PyResult<Observable> {
    match name {
        "position" => Ok(Observable::Position),
        "momentum" => Ok(Observable::Momentum),
        other => Err(PyValueError::new_err(format!("unknown observable {other:?}"))),
    }
}

#[pymethods]
impl PyChain {
    #[new]
    #[pyo3(signature = (n, mu = 1.0, omega = 1.0, c = 0.0, hbar = 1.0))]
    fn new(n: usize, mu: f64, omega: f64, c: f64, hbar: f64) -> PyResult<Self> {
        let cfg = ChainConfig::new(n, mu, omega, c, hbar).map_err(py_err)?;
        chain::mode_data(&cfg).map_err(py_err)?;
        Ok(PyChain { cfg })
    }

    /// `omega_j`, `beta_j`, `gamma_j`, `gamma` and `beta`.
    fn modes<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let m = chain::mode_data(&self.cfg).map_err(py_err)?;
        let d = PyDict::new(py);
        d.set_item("omega_j", m.omega_j)?;
        d.set_item("beta_j", m.beta_j)?;
        d.set_item("gamma_j", m.gamma_j)?;
        d.set_item("gamma", m.gamma)?;
        d.set_item("beta", m.beta)?;
        Ok(d)
    }

    /// Largest coupling with every `beta_j >= 0`; infinite when none bounds it.
    #[getter]
    fn critical_coupling(&self) -> f64 {
        chain::critical_coupling(self.cfg.n, self.cfg.omega)
    }

    /// Coefficients `alpha_j` of `q_r` or `p_r` and the prefactor.
    #[pyo3(signature = (r, hw, which = "position"))]
    fn operator(&self, r: i64, hw: &PyHighestWeight, which: &str) -> PyResult<(Vec<Complex64>, f64)> {
        let op = chain::chain_operator(&self.cfg, r, &hw.inner, observable(which)?).map_err(py_err)?;
        Ok((op.element.alpha, op.scale))
    }

    /// Stationary energies in basis order.
    fn energies(&self, module: &PyModule_) -> PyResult<Vec<f64>> {
        chain::stationary_energies(&self.cfg, &module.set).map_err(py_err)
    }

    /// Measurement law of `q_r` in the Fock state `phi` of `W(p)`, as
    /// `(value, probability)` pairs.
    fn fock_probabilities(&self, p: i64, phi: Vec<u8>) -> PyResult<Vec<(f64, f64)>> {
        let state = FockState::new(phi, p).map_err(py_err)?;
        let out = chain::fock_probabilities(p, &self.cfg, &state).map_err(py_err)?;
        Ok(out.into_iter().map(|o| (o.value, o.probability)).collect())
    }

    fn triple_relation_defect(&self, module: &PyModule_) -> PyResult<f64> {
        chain::triple_relation_defect(&self.cfg, &module.set).map_err(py_err)
    }
}

/// Exact check of the telescoping identity on rational strings.
#[pyfunction]
fn telescoping_identity(x: Vec<String>, y: Vec<String>, j: usize) -> PyResult<bool> {
    let parse = |v: &[String]| v.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>, _>>();
    let x = parse(&x).map_err(py_err)?;
    let y = parse(&y).map_err(py_err)?;
    odd::telescoping_identity_check(&x, &y, j).map_err(py_err)
}

#[pymodule]
fn pygl1n(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHighestWeight>()?;
    m.add_class::<PyModule_>()?;
    m.add_class::<PyChain>()?;
    m.add_function(wrap_pyfunction!(telescoping_identity, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
