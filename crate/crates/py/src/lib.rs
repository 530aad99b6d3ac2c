//! Python bindings. Reports come back as plain dicts.

use foa_core::equilibrium::{self, EquilibriumReport, Mode};
use foa_core::gauss::CovSpec;
use foa_core::mc::{self, SimulationReport};
use foa_core::payoff::{self, GameConfig, Offer};
use foa_core::solver::{self, GridSpec, Side, VerifyOptions};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(foa, FoaError, PyException, "Invalid input or unsupported regime.");
create_exception!(foa, ConvergenceError, FoaError, "A numerical search did not converge.");

fn to_py(e: foa_core::Error) -> PyErr {
    if e.is_convergence() {
        ConvergenceError::new_err(e.to_string())
    } else {
        FoaError::new_err(e.to_string())
    }
}

#[pyclass(name = "Offer", module = "foa", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyOffer(Offer);

#[pymethods]
impl PyOffer {
    #[new]
    fn new(x: f64, y: f64) -> Self {
        PyOffer(Offer::new(x, y))
    }

    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.0.y
    }

    /// Sum of both components, the amount transferred if this offer wins.
    fn net(&self) -> f64 {
        self.0.net()
    }

    fn __neg__(&self) -> Self {
        PyOffer(-self.0)
    }

    fn __repr__(&self) -> String {
        format!("Offer({}, {})", self.0.x, self.0.y)
    }
}

#[pyclass(name = "CovSpec", module = "foa", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyCovSpec(CovSpec);

#[pymethods]
impl PyCovSpec {
    #[new]
    fn new(sigma_x: f64, sigma_y: f64, rho: f64) -> PyResult<Self> {
        CovSpec::new(sigma_x, sigma_y, rho).map(PyCovSpec).map_err(to_py)
    }

    #[getter]
    fn sigma_x(&self) -> f64 {
        self.0.sigma_x()
    }

    #[getter]
    fn sigma_y(&self) -> f64 {
        self.0.sigma_y()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    fn __repr__(&self) -> String {
        format!("CovSpec({}, {}, {})", self.0.sigma_x(), self.0.sigma_y(), self.0.rho())
    }
}

#[pyclass(name = "GameConfig", module = "foa", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyGameConfig(GameConfig);

#[pymethods]
impl PyGameConfig {
    /// `bound` defaults to ten times `sqrt(sigma_x^2 + sigma_y^2)`.
    #[new]
    #[pyo3(signature = (cov, bound = None))]
    fn new(cov: PyRef<'_, PyCovSpec>, bound: Option<f64>) -> PyResult<Self> {
        match bound {
            Some(l) => GameConfig::new(cov.0, l).map(PyGameConfig).map_err(to_py),
            None => Ok(PyGameConfig(GameConfig::with_default_bound(cov.0))),
        }
    }

    #[getter]
    fn cov(&self) -> PyCovSpec {
        PyCovSpec(*self.0.cov())
    }

    #[getter]
    fn bound(&self) -> f64 {
        self.0.bound()
    }

    fn __repr__(&self) -> String {
        let c = self.0.cov();
        format!(
            "GameConfig(CovSpec({}, {}, {}), bound={})",
            c.sigma_x(),
            c.sigma_y(),
            c.rho(),
            self.0.bound()
        )
    }
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode.to_ascii_lowercase().as_str() {
        "ibi" => Ok(Mode::Ibi),
        "wp" => Ok(Mode::Wp),
        _ => Err(PyValueError::new_err(format!("mode must be 'ibi' or 'wp', got {mode:?}"))),
    }
}

fn parse_side(side: &str) -> PyResult<Side> {
    match side.to_ascii_lowercase().as_str() {
        "minimizer" => Ok(Side::Minimizer),
        "maximizer" => Ok(Side::Maximizer),
        _ => Err(PyValueError::new_err(format!(
            "side must be 'minimizer' or 'maximizer', got {side:?}"
        ))),
    }
}

fn equilibrium_dict<'py>(py: Python<'py>, r: &EquilibriumReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("a_star", PyOffer(r.a_star))?;
    d.set_item("b_star", PyOffer(r.b_star))?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("rho_threshold", r.rho_threshold)?;
    d.set_item("local_condition_holds", r.local_condition_holds)?;
    d.set_item("gradient_residual", r.gradient_residual)?;
    d.set_item("z_star", r.z_star)?;
    Ok(d)
}

fn simulation_dict<'py>(py: Python<'py>, r: &SimulationReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", r.n)?;
    d.set_item("mode", r.mode.to_string())?;
    d.set_item("mean_award", r.mean_award)?;
    d.set_item("variance_award", r.variance_award)?;
    d.set_item("win_freq_player1", r.win_freq_player1)?;
    d.set_item("std_error_mean", r.std_error_mean)?;
    d.set_item("std_error_variance", r.std_error_variance)?;
    d.set_item("std_error_win_freq", r.std_error_win_freq)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Expected award to Player II when Player I offers `a` and Player II offers `b`.
#[pyfunction]
fn expected_payoff(game: PyRef<'_, PyGameConfig>, a: PyRef<'_, PyOffer>, b: PyRef<'_, PyOffer>) -> PyResult<f64> {
    payoff::expected_payoff(&game.0, a.0, b.0).map_err(to_py)
}

#[pyfunction]
fn z_score(game: PyRef<'_, PyGameConfig>, a: PyRef<'_, PyOffer>, b: PyRef<'_, PyOffer>) -> PyResult<f64> {
    payoff::z_score(&game.0, a.0, b.0).map_err(to_py)
}

#[pyfunction]
fn win_probability_player1(game: PyRef<'_, PyGameConfig>, a: PyRef<'_, PyOffer>, b: PyRef<'_, PyOffer>) -> PyResult<f64> {
    payoff::win_probability_player1(&game.0, a.0, b.0).map_err(to_py)
}

#[pyfunction]
fn payoff_gradient(game: PyRef<'_, PyGameConfig>, a: PyRef<'_, PyOffer>, b: PyRef<'_, PyOffer>) -> PyResult<[f64; 4]> {
    equilibrium::payoff_gradient(&game.0, a.0, b.0).map_err(to_py)
}

#[pyfunction]
fn ibi_equilibrium<'py>(py: Python<'py>, cov: PyRef<'_, PyCovSpec>) -> PyResult<Bound<'py, PyDict>> {
    equilibrium_dict(py, &equilibrium::ibi_equilibrium(&cov.0))
}

#[pyfunction]
fn wp_equilibrium<'py>(py: Python<'py>, cov: PyRef<'_, PyCovSpec>) -> PyResult<Bound<'py, PyDict>> {
    equilibrium_dict(py, &equilibrium::wp_equilibrium(&cov.0))
}

#[pyfunction]
fn hessian_diagnostics<'py>(py: Python<'py>, game: PyRef<'_, PyGameConfig>) -> PyResult<Bound<'py, PyDict>> {
    let h = equilibrium::hessian_diagnostics(&game.0);
    let d = PyDict::new(py);
    d.set_item("k_x1x1", h.k_x1x1)?;
    d.set_item("k_y1y1", h.k_y1y1)?;
    d.set_item("k_x1y1", h.k_x1y1)?;
    d.set_item("positive_definite", h.positive_definite)?;
    Ok(d)
}

#[pyfunction]
fn variance_report<'py>(py: Python<'py>, cov: PyRef<'_, PyCovSpec>) -> PyResult<Bound<'py, PyDict>> {
    let v = equilibrium::variance_report(&cov.0);
    let d = PyDict::new(py);
    d.set_item("ibi_variance", v.ibi_variance)?;
    d.set_item("wp_variance", v.wp_variance)?;
    d.set_item("ibi_variance_correlated", v.ibi_variance_correlated)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (game, opponent, side = "minimizer"))]
fn best_response<'py>(
    py: Python<'py>,
    game: PyRef<'_, PyGameConfig>,
    opponent: PyRef<'_, PyOffer>,
    side: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let side = parse_side(side)?;
    let (g, opp) = (game.0, opponent.0);
    let br = py.detach(|| solver::best_response(&g, opp, side)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("offer", PyOffer(br.offer))?;
    d.set_item("payoff", br.payoff)?;
    d.set_item("gradient_residual", br.gradient_residual)?;
    d.set_item("iterations", br.iterations)?;
    Ok(d)
}

#[pyfunction]
fn fixed_point_search<'py>(
    py: Python<'py>,
    game: PyRef<'_, PyGameConfig>,
    init_a: PyRef<'_, PyOffer>,
    init_b: PyRef<'_, PyOffer>,
) -> PyResult<Bound<'py, PyDict>> {
    let (g, a, b) = (game.0, init_a.0, init_b.0);
    let fp = py.detach(|| solver::fixed_point_search(&g, a, b)).map_err(to_py)?;
    let d = equilibrium_dict(py, &fp.equilibrium)?;
    d.set_item("rounds", fp.rounds)?;
    Ok(d)
}

/// Grid check that no unilateral deviation beats the whole-package pair.
#[pyfunction]
#[pyo3(signature = (game, grid = 201, allow_nonpositive_rho = false))]
fn verify_global_equilibrium<'py>(
    py: Python<'py>,
    game: PyRef<'_, PyGameConfig>,
    grid: usize,
    allow_nonpositive_rho: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let g = game.0;
    let grid = GridSpec::new(grid, g.bound()).map_err(to_py)?;
    let pair = equilibrium::wp_equilibrium(g.cov());
    let opts = VerifyOptions {
        allow_nonpositive_rho,
        ..Default::default()
    };
    let r = py
        .detach(|| solver::verify_global_equilibrium_with(&g, &pair, &grid, &opts))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("points_evaluated", r.points_evaluated)?;
    d.set_item("min_payoff", r.min_payoff)?;
    d.set_item("argmin", PyOffer(r.argmin))?;
    d.set_item("argmin_distance", r.argmin_distance)?;
    d.set_item("argmin_within_cell", r.argmin_within_cell)?;
    d.set_item("violations", r.violations)?;
    d.set_item("player2_max_payoff", r.player2_max_payoff)?;
    d.set_item("player2_violations", r.player2_violations)?;
    d.set_item("outside_circle", r.lemma_checks.outside_circle)?;
    d.set_item("inside_circle", r.lemma_checks.inside_circle)?;
    d.set_item("on_circle", r.lemma_checks.on_circle)?;
    d.set_item("necessary_region", r.lemma_checks.necessary_region)?;
    d.set_item("hypothesis_satisfied", r.hypothesis_satisfied)?;
    d.set_item("passed", r.passed)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (game, trials = 10_000, seed = 0))]
fn lemma_suite<'py>(py: Python<'py>, game: PyRef<'_, PyGameConfig>, trials: usize, seed: u64) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let checks = solver::lemma_suite(&game.0, trials, seed).map_err(to_py)?;
    checks
        .into_iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("name", c.name)?;
            d.set_item("trials", c.trials)?;
            d.set_item("max_deviation", c.max_deviation)?;
            d.set_item("tolerance", c.tolerance)?;
            d.set_item("passed", c.passed)?;
            Ok(d)
        })
        .collect()
}

#[pyfunction]
#[pyo3(signature = (game, a, b, mode = "wp", n = 1_000_000, seed = 0, workers = None))]
#[allow(clippy::too_many_arguments)]
fn simulate_awards<'py>(
    py: Python<'py>,
    game: PyRef<'_, PyGameConfig>,
    a: PyRef<'_, PyOffer>,
    b: PyRef<'_, PyOffer>,
    mode: &str,
    n: u64,
    seed: u64,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let mode = parse_mode(mode)?;
    let (g, a, b) = (game.0, a.0, b.0);
    let r = py
        .detach(|| match workers {
            Some(w) => mc::simulate_awards_with_workers(&g, a, b, mode, n, seed, w),
            None => mc::simulate_awards(&g, a, b, mode, n, seed),
        })
        .map_err(to_py)?;
    simulation_dict(py, &r)
}

#[pymodule]
fn foa(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FoaError", m.py().get_type::<FoaError>())?;
    m.add("ConvergenceError", m.py().get_type::<ConvergenceError>())?;
    m.add_class::<PyOffer>()?;
    m.add_class::<PyCovSpec>()?;
    m.add_class::<PyGameConfig>()?;
    m.add_function(wrap_pyfunction!(expected_payoff, m)?)?;
    m.add_function(wrap_pyfunction!(z_score, m)?)?;
    m.add_function(wrap_pyfunction!(win_probability_player1, m)?)?;
    m.add_function(wrap_pyfunction!(payoff_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(ibi_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(wp_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(hessian_diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(variance_report, m)?)?;
    m.add_function(wrap_pyfunction!(best_response, m)?)?;
    m.add_function(wrap_pyfunction!(fixed_point_search, m)?)?;
    m.add_function(wrap_pyfunction!(verify_global_equilibrium, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_suite, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_awards, m)?)?;
    Ok(())
}
