//! Fully discrete time steppers for the finite-difference system
//! `du = n^2 D u dt + b(t, x, u) dt + sigma(t, x, u) dF`.
//!
//! All three schemes evaluate `b` and `sigma` at the left endpoint of the step
//! and multiply the noise increment pointwise:
//!
//! * SEXP: `u+ = exp(tau n^2 D) (u + tau b + sigma dF)`
//! * EM:   `u+ = u + tau n^2 D u + tau b + sigma dF`
//! * sEM:  `(I - tau n^2 D) u+ = u + tau b + sigma dF`

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Field, GridSpec};
use crate::noise::IncrementSource;
use crate::spectral::{laplacian_stencil, SpectralPlan};

/// Runs are truncated once any value exceeds this magnitude.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

pub type PointFn = Arc<dyn Fn(f64, &[f64], f64) -> f64 + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Drift `b(t, x, u)`, diffusion `sigma(t, x, u)` and initial datum `u0(x)`.
///
/// The coefficients are assumed globally Lipschitz in `u` with linear growth;
/// `u0` should vanish on the boundary (only interior nodes are sampled).
#[derive(Clone)]
pub struct Coefficients {
    pub drift: PointFn,
    pub diffusion: PointFn,
    pub initial: InitialFn,
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Coefficients { .. }")
    }
}

impl Coefficients {
    pub fn new(
        drift: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64, &[f64], f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            drift: Arc::new(drift),
            diffusion: Arc::new(diffusion),
            initial: Arc::new(initial),
        }
    }

    /// Coefficients depending on `u` only.
    pub fn autonomous(
        drift: impl Fn(f64) -> f64 + Send + Sync + 'static,
        diffusion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        initial: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(move |_, _, u| drift(u), move |_, _, u| diffusion(u), initial)
    }

    /// The deterministic heat equation `b = sigma = 0`.
    pub fn heat(initial: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::autonomous(|_| 0.0, |_| 0.0, initial)
    }

    pub fn initial_field(&self, grid: GridSpec) -> Field {
        Field::from_fn(grid, |x| (self.initial)(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    Sexp,
    Em,
    Sem,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [SchemeKind::Sexp, SchemeKind::Em, SchemeKind::Sem];
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Sexp => "SEXP",
            SchemeKind::Em => "EM",
            SchemeKind::Sem => "sEM",
        })
    }
}

impl serde::Serialize for SchemeKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sexp" => Ok(SchemeKind::Sexp),
            "em" => Ok(SchemeKind::Em),
            "sem" => Ok(SchemeKind::Sem),
            _ => Err(Error::Config(format!("unknown scheme '{s}' (expected SEXP, EM or sEM)"))),
        }
    }
}

/// Reusable buffers for stepping one scheme at one step size.
struct Stepper<'a> {
    plan: &'a SpectralPlan,
    coeffs: &'a Coefficients,
    scheme: SchemeKind,
    tau: f64,
    nodes: Vec<f64>,
    multipliers: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(plan: &'a SpectralPlan, coeffs: &'a Coefficients, scheme: SchemeKind, tau: f64) -> Self {
        let dof = plan.grid().dof();
        let multipliers = match scheme {
            SchemeKind::Sexp => plan.semigroup_multipliers(tau),
            SchemeKind::Sem => plan.resolvent_multipliers(tau),
            SchemeKind::Em => Vec::new(),
        };
        Self {
            plan,
            coeffs,
            scheme,
            tau,
            nodes: plan.grid().nodes(),
            multipliers,
            rhs: vec![0.0; dof],
            scratch: vec![0.0; dof],
        }
    }

    fn step(&mut self, t: f64, u: &mut [f64], increment: &[f64]) {
        let d = self.plan.grid().dim();
        let tau = self.tau;
        for (i, ((r, &ui), &df)) in self.rhs.iter_mut().zip(u.iter()).zip(increment).enumerate() {
            let x = &self.nodes[i * d..(i + 1) * d];
            *r = ui + tau * (self.coeffs.drift)(t, x, ui) + (self.coeffs.diffusion)(t, x, ui) * df;
        }
        match self.scheme {
            SchemeKind::Sexp | SchemeKind::Sem => {
                self.plan
                    .apply_multipliers_in_place(&mut self.rhs, &self.multipliers, &mut self.scratch);
                u.copy_from_slice(&self.rhs);
            }
            SchemeKind::Em => {
                laplacian_stencil(self.plan.grid(), u, &mut self.scratch);
                for ((ui, r), l) in u.iter_mut().zip(&self.rhs).zip(&self.scratch) {
                    *ui = r + tau * l;
                }
            }
        }
    }
}

fn check_step_inputs(plan: &SpectralPlan, u: &Field, tau: f64, increment: &[f64]) -> Result<()> {
    let dof = plan.grid().dof();
    if u.grid() != plan.grid() {
        return Err(Error::GridMismatch {
            expected: dof,
            found: u.grid().dof(),
        });
    }
    if increment.len() != dof {
        return Err(Error::GridMismatch {
            expected: dof,
            found: increment.len(),
        });
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("step size must be positive, got {tau}")));
    }
    Ok(())
}

/// One step of the selected scheme from `(t, u)` with noise increment `increment`.
///
/// Non-finite results are returned as-is; use [`Field::is_finite`] to detect them.
pub fn step(
    scheme: SchemeKind,
    plan: &SpectralPlan,
    coeffs: &Coefficients,
    t: f64,
    u: &Field,
    tau: f64,
    increment: &[f64],
) -> Result<Field> {
    check_step_inputs(plan, u, tau, increment)?;
    let mut stepper = Stepper::new(plan, coeffs, scheme, tau);
    let mut values = u.values().to_vec();
    stepper.step(t, &mut values, increment);
    Field::from_values(plan.grid(), values)
}

pub fn step_sexp(plan: &SpectralPlan, coeffs: &Coefficients, t: f64, u: &Field, tau: f64, increment: &[f64]) -> Result<Field> {
    step(SchemeKind::Sexp, plan, coeffs, t, u, tau, increment)
}

pub fn step_em(plan: &SpectralPlan, coeffs: &Coefficients, t: f64, u: &Field, tau: f64, increment: &[f64]) -> Result<Field> {
    step(SchemeKind::Em, plan, coeffs, t, u, tau, increment)
}

pub fn step_sem(plan: &SpectralPlan, coeffs: &Coefficients, t: f64, u: &Field, tau: f64, increment: &[f64]) -> Result<Field> {
    step(SchemeKind::Sem, plan, coeffs, t, u, tau, increment)
}

/// Outcome of a run driven through [`run_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunStatus {
    pub steps: usize,
    /// First step index `l` (1-based, the state after `l` steps) at which the
    /// solution became non-finite or exceeded [`DIVERGENCE_THRESHOLD`].
    pub diverged_at: Option<usize>,
}

fn is_diverged(u: &[f64]) -> bool {
    u.iter().any(|v| !(v.abs() <= DIVERGENCE_THRESHOLD))
}

/// Iterates a scheme over every row of `increments` on `[0, t_final]`,
/// handing the state after each step to `visit(step, values)`; the initial
/// state is visited as step 0. Stops at the first diverged step, which is not
/// visited.
pub fn run_with(
    scheme: SchemeKind,
    plan: &SpectralPlan,
    coeffs: &Coefficients,
    increments: &(impl IncrementSource + ?Sized),
    t_final: f64,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<RunStatus> {
    let m = increments.steps();
    if m == 0 {
        return Err(Error::Config("a run needs at least one time step".into()));
    }
    if increments.dof() != plan.grid().dof() {
        return Err(Error::GridMismatch {
            expected: plan.grid().dof(),
            found: increments.dof(),
        });
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Config(format!("final time must be positive, got {t_final}")));
    }
    let tau = t_final / m as f64;
    let mut stepper = Stepper::new(plan, coeffs, scheme, tau);
    let mut u = coeffs.initial_field(plan.grid()).into_values();
    let mut df = vec![0.0; u.len()];
    visit(0, &u);
    for l in 0..m {
        increments.fill_row(l, &mut df);
        stepper.step(l as f64 * tau, &mut u, &df);
        if is_diverged(&u) {
            return Ok(RunStatus {
                steps: m,
                diverged_at: Some(l + 1),
            });
        }
        visit(l + 1, &u);
    }
    Ok(RunStatus {
        steps: m,
        diverged_at: None,
    })
}

/// Recorded states of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, Field)>,
    pub diverged_at: Option<usize>,
}

impl Trajectory {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }

    pub fn last(&self) -> Option<&(f64, Field)> {
        self.snapshots.last()
    }
}

/// Maps requested record times onto grid step indices `t = l T / m`.
pub fn record_steps(record_times: &[f64], t_final: f64, m: usize) -> Result<Vec<usize>> {
    record_times
        .iter()
        .map(|&t| {
            let x = t / t_final * m as f64;
            let l = x.round();
            if !(0.0..=m as f64).contains(&l) || (x - l).abs() > 1e-9 * (m as f64).max(1.0) {
                Err(Error::Config(format!(
                    "record time {t} is not a grid time of {m} steps on [0, {t_final}]"
                )))
            } else {
                Ok(l as usize)
            }
        })
        .collect()
}

/// Runs a scheme and keeps snapshots at `record_times` (each a grid time).
pub fn run(
    scheme: SchemeKind,
    plan: &SpectralPlan,
    coeffs: &Coefficients,
    increments: &(impl IncrementSource + ?Sized),
    t_final: f64,
    record_times: &[f64],
) -> Result<Trajectory> {
    let m = increments.steps();
    if m == 0 {
        return Err(Error::Config("a run needs at least one time step".into()));
    }
    let wanted = record_steps(record_times, t_final, m)?;
    let tau = t_final / m as f64;
    let grid = plan.grid();
    let mut snapshots = Vec::new();
    let status = run_with(scheme, plan, coeffs, increments, t_final, |l, u| {
        if wanted.contains(&l) {
            let field = Field::from_values(grid, u.to_vec()).expect("state has dof entries");
            snapshots.push((l as f64 * tau, field));
        }
    })?;
    Ok(Trajectory {
        snapshots,
        diverged_at: status.diverged_at,
    })
}
