//! Python module `qet`.
//!
//! Results come back as dicts keyed like the `qet` command-line output.
//! Invalid input raises `ValueError`; a failed internal check raises
//! `qet.InvariantError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use qet_core::chain::{
    self as core_chain, qubit_closed_form, qubit_optimal, Boundary, ChainProtocolSpec, KrausKind, NormalizedChain,
    ResidualOptions,
};
use qet_core::field::{self, FieldProtocolSpec, OracleOptions, Theta};
use qet_core::ising::{self, IsingParams};
use qet_core::minimal::{self, MinimalParams};
use qet_core::optimize::SearchOptions;
use qet_core::quantum::{pauli_component, EigenOptions};
use qet_core::C64;

create_exception!(qet, InvariantError, PyRuntimeError);

fn err(e: qet_core::Error) -> PyErr {
    if e.is_invariant_failure() {
        InvariantError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qet_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

fn outcomes<'py>(py: Python<'py>, list: impl Iterator<Item = (f64, f64)>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    list.map(|(alpha, p)| {
        let d = PyDict::new(py);
        d.set_item("alpha", alpha)?;
        d.set_item("p", p)?;
        Ok(d)
    })
    .collect()
}

/// Two-qubit model `H = h(σ_A^z + σ_B^z) + 2k σ_A^x σ_B^x` plus its ground-state shift.
#[pyclass(frozen)]
struct MinimalModel {
    inner: minimal::MinimalModel,
}

#[pymethods]
impl MinimalModel {
    #[new]
    fn new(h: f64, k: f64) -> PyResult<Self> {
        let params = MinimalParams::new(h, k).py()?;
        Ok(Self { inner: minimal::MinimalModel::build(params).py()? })
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.params().h
    }

    #[getter]
    fn k(&self) -> f64 {
        self.inner.params().k
    }

    fn input_energy(&self) -> f64 {
        minimal::input_energy(&self.inner.params())
    }

    fn output_energy(&self, theta: f64) -> f64 {
        minimal::output_energy(&self.inner.params(), theta)
    }

    /// `(θ_opt, E_B_max)`.
    fn optimize(&self) -> (f64, f64) {
        minimal::optimize(&self.inner.params())
    }

    fn hb_evolution(&self, t: f64) -> f64 {
        minimal::hb_evolution(&self.inner.params(), t)
    }

    fn ground_state(&self) -> Vec<C64> {
        self.inner.ground().amplitudes().iter().copied().collect()
    }

    #[pyo3(signature = (theta=None))]
    fn run<'py>(&self, py: Python<'py>, theta: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
        let theta = theta.unwrap_or_else(|| self.optimize().0);
        let r = self.inner.run_protocol(theta).py()?;
        let d = PyDict::new(py);
        d.set_item("theta", r.theta)?;
        d.set_item("E_A", r.e_a)?;
        d.set_item("E_B", r.e_b)?;
        d.set_item("residual_energy", r.residual_energy)?;
        d.set_item("bob_local_energy", r.bob_local_energy)?;
        d.set_item("probabilities", outcomes(py, r.outcomes.iter().map(|o| (o.alpha, o.probability)))?)?;
        Ok(d)
    }

    /// Entropy drop and the extractable-energy bound for the projective measurement at A.
    fn entanglement_bound<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let b = self.inner.entanglement_bound(&self.inner.measurement()).py()?;
        let d = PyDict::new(py);
        d.set_item("delta_S", b.delta_s)?;
        d.set_item("coefficient", minimal::bound_coefficient(&self.inner.params()))?;
        d.set_item("E_B_max", b.max_e_b)?;
        d.set_item("rhs", b.bound_rhs)?;
        d.set_item("holds", b.holds)?;
        d.set_item("E_B_max_general", b.max_e_b_general)?;
        d.set_item("rhs_general", b.bound_rhs_general)?;
        d.set_item("holds_general", b.holds_general)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("MinimalModel(h={}, k={})", self.h(), self.k())
    }
}

/// A spin chain with its ground energy shifted to zero.
#[pyclass(frozen)]
struct Chain {
    inner: NormalizedChain,
}

#[pymethods]
impl Chain {
    /// Parses the model-file format read by `qet chain --model`.
    #[staticmethod]
    #[pyo3(signature = (text, dense_max_sites=8, seed=0))]
    fn from_text(text: &str, dense_max_sites: usize, seed: u64) -> PyResult<Self> {
        let model = core_chain::parse_model(text).py()?;
        let opts = EigenOptions { dense_max_sites, seed, ..Default::default() };
        Ok(Self { inner: model.normalize(&opts).py()? })
    }

    /// Critical transverse-field Ising chain `−J Σ (σ_x σ_x + σ_z)`.
    #[staticmethod]
    #[pyo3(signature = (n_sites, j=1.0, periodic=true, dense_max_sites=8, seed=0))]
    fn ising(n_sites: usize, j: f64, periodic: bool, dense_max_sites: usize, seed: u64) -> PyResult<Self> {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        let params = IsingParams::new(j, n_sites, boundary).py()?;
        let opts = EigenOptions { dense_max_sites, seed, ..Default::default() };
        Ok(Self { inner: ising::normalize(&params, &opts).py()?.chain })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn ground_energy(&self) -> f64 {
        self.inner.ground().energy
    }

    /// `(η, ξ)` for a Pauli measurement `u·σ` at `site_a` and generator `v·σ` at `site_b`.
    #[pyo3(signature = (site_a, site_b, measure=[1.0, 0.0, 0.0], generator=[0.0, 1.0, 0.0]))]
    fn eta_xi(&self, site_a: usize, site_b: usize, measure: [f64; 3], generator: [f64; 3]) -> PyResult<(f64, f64)> {
        let ex = self
            .inner
            .eta_xi(&pauli_component(measure, site_a).py()?, &pauli_component(generator, site_b).py()?)
            .py()?;
        Ok((ex.eta, ex.xi))
    }

    #[pyo3(signature = (site_a, site_b, measure=[1.0, 0.0, 0.0], generator=[0.0, 1.0, 0.0], theta=None))]
    fn run<'py>(
        &self,
        py: Python<'py>,
        site_a: usize,
        site_b: usize,
        measure: [f64; 3],
        generator: [f64; 3],
        theta: Option<f64>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (eta, xi) = self.eta_xi(site_a, site_b, measure, generator)?;
        let (theta_opt, e_b_max) = qubit_optimal(eta, xi).py()?;
        let theta = theta.unwrap_or(theta_opt);
        let spec = ChainProtocolSpec::pauli(site_a, measure, site_b, generator, theta).py()?;
        let r = self.inner.run_protocol(&spec).py()?;
        let d = PyDict::new(py);
        d.set_item("eta", eta)?;
        d.set_item("xi", xi)?;
        d.set_item("theta", theta)?;
        d.set_item("theta_opt", theta_opt)?;
        d.set_item("E_A", r.e_a)?;
        d.set_item("E_B", r.e_b)?;
        d.set_item("E_B_direct", r.e_b_direct)?;
        d.set_item("E_B_closed_form", qubit_closed_form(eta, xi, theta))?;
        d.set_item("E_B_max", e_b_max)?;
        d.set_item("bob_local_energy", r.bob_local_energy)?;
        d.set_item("far_density_max", r.far_density_max)?;
        d.set_item("probabilities", outcomes(py, r.outcomes.iter().map(|o| (o.alpha, o.probability)))?)?;
        d.set_item("warnings", r.warnings)?;
        Ok(d)
    }

    /// Energy left after the best local operation at A given each outcome.
    #[pyo3(signature = (site_a, measure=[1.0, 0.0, 0.0], kraus="unitary", seed=0))]
    fn residual_energy<'py>(
        &self,
        py: Python<'py>,
        site_a: usize,
        measure: [f64; 3],
        kraus: &str,
        seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let kind: KrausKind = kraus.parse().py()?;
        let spec = ChainProtocolSpec::pauli(site_a, measure, site_a, measure, 0.0).py()?;
        let opts = ResidualOptions { kind, search: SearchOptions { seed, ..Default::default() } };
        let r = self.inner.residual_energy(site_a, &spec.measurement, &opts).py()?;
        let d = PyDict::new(py);
        d.set_item("E_r", r.e_r)?;
        d.set_item("E_A", r.e_a)?;
        d.set_item("converged", r.converged)?;
        d.set_item("untouched_energy", r.untouched_energy)?;
        Ok(d)
    }
}

/// Closed-form Ising energies at separation `n`.
#[pyfunction]
#[pyo3(signature = (n, j=1.0, c=ising::C_ASYMPTOTE))]
fn ising_energies<'py>(py: Python<'py>, n: u64, j: f64, c: f64) -> PyResult<Bound<'py, PyDict>> {
    let e = ising::analytic_energies(j, n, c).py()?;
    let (ln_abs_delta, delta_sign) = ising::delta_log(n).py()?;
    let d = PyDict::new(py);
    d.set_item("n", n)?;
    d.set_item("delta_sign", delta_sign)?;
    d.set_item("ln_abs_delta", ln_abs_delta)?;
    d.set_item("E_A", e.e_a)?;
    d.set_item("E_B", e.e_b)?;
    d.set_item("E_B_asymptotic", e.e_b_asymptotic)?;
    d.set_item("E_r", e.e_r)?;
    Ok(d)
}

/// Power-law fit of `E_B(n)` over `n_min..=n_max`.
#[pyfunction]
#[pyo3(signature = (n_min, n_max, j=1.0))]
fn ising_fit<'py>(py: Python<'py>, n_min: u64, n_max: u64, j: f64) -> PyResult<Bound<'py, PyDict>> {
    let f = ising::asymptote_check(j, n_min, n_max).py()?;
    let d = PyDict::new(py);
    d.set_item("exponent", f.exponent)?;
    d.set_item("prefactor", f.prefactor)?;
    d.set_item("c_implied", f.c_implied)?;
    d.set_item("c_implied_fixed", f.c_implied_fixed)?;
    d.set_item("power_residual", f.power_residual)?;
    d.set_item("exponential_residual", f.exponential_residual)?;
    Ok(d)
}

/// A smooth compactly supported profile sampled on a uniform grid.
#[pyclass(frozen)]
struct Profile {
    inner: field::Profile,
}

#[pymethods]
impl Profile {
    /// `eps·sin²(π(x − a)/w)` on `[a, a + w]`.
    #[staticmethod]
    #[pyo3(signature = (eps, a, w, intervals=512))]
    fn sin2(eps: f64, a: f64, w: f64, intervals: usize) -> PyResult<Self> {
        Ok(Self { inner: field::Profile::sin2(eps, a, w, intervals).py()? })
    }

    /// Two-column `x,value` CSV text.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(Self { inner: field::Profile::from_csv(text).py()? })
    }

    #[getter]
    fn support(&self) -> (f64, f64) {
        self.inner.support()
    }

    #[getter]
    fn xs(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|i| self.inner.x(i)).collect()
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.inner.samples().to_vec()
    }

    fn input_energy(&self) -> f64 {
        field::input_energy(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Massless-field protocol with measurement profile `lambda_a` and generator profile `p_b`.
#[pyfunction]
#[pyo3(signature = (lambda_a, p_b, t, theta=None, oracle_modes=16384))]
fn field_output<'py>(
    py: Python<'py>,
    lambda_a: &Profile,
    p_b: &Profile,
    t: f64,
    theta: Option<f64>,
    oracle_modes: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let theta = theta.map_or(Theta::Auto, Theta::Fixed);
    let spec = FieldProtocolSpec::new(lambda_a.inner.clone(), p_b.inner.clone(), t, theta).py()?;
    let opts = OracleOptions { n_modes: oracle_modes, omega_max: None };
    let (r, check) = field::output_energy_checked(&spec, &opts).py()?;
    let d = PyDict::new(py);
    d.set_item("E_A", r.e_a)?;
    d.set_item("eta", r.eta)?;
    d.set_item("xi", r.xi)?;
    d.set_item("theta", r.theta)?;
    d.set_item("theta_opt", r.theta_opt)?;
    d.set_item("E_B", r.e_b)?;
    d.set_item("E_B_max", r.e_b_max)?;
    d.set_item("E_B_final_formula", r.e_b_final_formula)?;
    d.set_item("bob_local_energy", r.bob_local_energy)?;
    d.set_item("overlap", r.overlap)?;
    d.set_item("overlap_agreed", check.agreed)?;
    d.set_item("prob_plus", r.prob_plus)?;
    Ok(d)
}

/// `E_B(θ) = (η/2) sin 2θ − (ξ/2)(1 − cos 2θ)`.
#[pyfunction(name = "qubit_closed_form")]
fn py_qubit_closed_form(eta: f64, xi: f64, theta: f64) -> f64 {
    qubit_closed_form(eta, xi, theta)
}

/// `(θ_opt, E_B_max)` for the closed form.
#[pyfunction(name = "qubit_optimal")]
fn py_qubit_optimal(eta: f64, xi: f64) -> PyResult<(f64, f64)> {
    qubit_optimal(eta, xi).py()
}

#[pymodule]
fn qet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("InvariantError", m.py().get_type::<InvariantError>())?;
    m.add_class::<MinimalModel>()?;
    m.add_class::<Chain>()?;
    m.add_class::<Profile>()?;
    m.add_function(wrap_pyfunction!(ising_energies, m)?)?;
    m.add_function(wrap_pyfunction!(ising_fit, m)?)?;
    m.add_function(wrap_pyfunction!(field_output, m)?)?;
    m.add_function(wrap_pyfunction!(py_qubit_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(py_qubit_optimal, m)?)?;
    Ok(())
}
