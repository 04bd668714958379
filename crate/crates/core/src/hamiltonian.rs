//! Time-dependent Hamiltonian trajectories, the rotating-field spin-half
//! model, and its closed-form solution used as the ground-truth oracle.
//!
//! Conventions: hbar = 1, frequencies in rad per time unit, phases in radians.
//! Level indexing follows the model convention E1 = +omega0/2 (the tracked
//! level comes first), not ascending energy order.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{HermitianOperator, StateVector};

/// Parameters of the rotating-field spin-half model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatingFieldParams {
    /// Level splitting omega0 > 0 (rad/time).
    pub omega0: f64,
    /// Field rotation frequency omega >= 0 (rad/time).
    pub omega: f64,
    /// Cone angle theta in [0, pi] (rad).
    pub theta: f64,
}

impl RotatingFieldParams {
    pub fn new(omega0: f64, omega: f64, theta: f64) -> Result<Self> {
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::InvalidParams(format!("omega0 must be > 0, got {omega0}")));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidParams(format!("omega must be >= 0, got {omega}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParams(format!(
                "theta must lie in [0, pi], got {theta}"
            )));
        }
        Ok(Self { omega0, omega, theta })
    }

    /// The reference working point: omega = 0.01, omega0 = 10, theta = pi/6.
    pub fn reference() -> Self {
        Self {
            omega0: 10.0,
            omega: 0.01,
            theta: PI / 6.0,
        }
    }
}

/// Frequencies derived from the model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedFrequencies {
    /// Exact precession rate sqrt(omega^2 + omega0^2 + 2 omega omega0 cos theta).
    pub omega_bar: f64,
    /// Adiabatic-prediction rate omega0 + omega cos theta.
    pub omega_star: f64,
    /// Field period 2 pi / omega; infinite for a static field.
    pub t0: f64,
}

pub fn derived_frequencies(params: &RotatingFieldParams) -> DerivedFrequencies {
    let RotatingFieldParams { omega0, omega, theta } = *params;
    let omega_bar =
        (omega * omega + omega0 * omega0 + 2.0 * omega * omega0 * theta.cos()).sqrt();
    let omega_star = omega0 + omega * theta.cos();
    let t0 = if omega > 0.0 { 2.0 * PI / omega } else { f64::INFINITY };
    DerivedFrequencies { omega_bar, omega_star, t0 }
}

/// Analytic spectral data at one time, in trajectory level order.
#[derive(Debug, Clone)]
pub struct AnalyticFrame {
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
}

type OperatorFn = dyn Fn(f64) -> HermitianOperator + Send + Sync;
type FrameFn = dyn Fn(f64) -> AnalyticFrame + Send + Sync;

/// Time-parameterized Hermitian operator with an analytic derivative, plus an
/// optional closed-form eigenframe for models that have one.
#[derive(Clone)]
pub struct HamiltonianTrajectory {
    dim: usize,
    value: Arc<OperatorFn>,
    derivative: Arc<OperatorFn>,
    analytic: Option<Arc<FrameFn>>,
}

impl HamiltonianTrajectory {
    pub fn new(
        dim: usize,
        value: impl Fn(f64) -> HermitianOperator + Send + Sync + 'static,
        derivative: impl Fn(f64) -> HermitianOperator + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            analytic: None,
        }
    }

    pub fn with_analytic_frames(
        mut self,
        frames: impl Fn(f64) -> AnalyticFrame + Send + Sync + 'static,
    ) -> Self {
        self.analytic = Some(Arc::new(frames));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, t: f64) -> HermitianOperator {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> HermitianOperator {
        (self.derivative)(t)
    }

    pub fn has_analytic_frames(&self) -> bool {
        self.analytic.is_some()
    }

    pub fn analytic_frame(&self, t: f64) -> Option<AnalyticFrame> {
        self.analytic.as_ref().map(|f| f(t))
    }
}

impl std::fmt::Debug for HamiltonianTrajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HamiltonianTrajectory")
            .field("dim", &self.dim)
            .field("analytic", &self.analytic.is_some())
            .finish()
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn phase(arg: f64) -> C64 {
    C64::new(0.0, arg).exp()
}

/// H(t) = -(omega0/2) [[cos th, sin th e^{-i w t}], [sin th e^{i w t}, -cos th]].
pub fn rotating_field(params: &RotatingFieldParams) -> HamiltonianTrajectory {
    let p = *params;
    let value = move |t: f64| {
        let (s, co) = (p.theta.sin(), p.theta.cos());
        let off = -(p.omega0 / 2.0) * s;
        let diag = -(p.omega0 / 2.0) * co;
        HermitianOperator::new(
            2,
            vec![
                c(diag, 0.0),
                phase(-p.omega * t) * off,
                phase(p.omega * t) * off,
                c(-diag, 0.0),
            ],
        )
        .expect("rotating-field value is Hermitian by construction")
    };
    let deriv = move |t: f64| {
        let s = p.theta.sin();
        let off = -(p.omega0 / 2.0) * s;
        // entrywise d/dt of the off-diagonal phases
        let d01 = phase(-p.omega * t) * c(0.0, -p.omega) * off;
        let d10 = phase(p.omega * t) * c(0.0, p.omega) * off;
        HermitianOperator::new(2, vec![c(0.0, 0.0), d01, d10, c(0.0, 0.0)])
            .expect("derivative of a Hermitian family is Hermitian")
    };
    let frames = move |t: f64| {
        let (e1, e2, v1, v2) = analytic_eigensystem(&p, t);
        AnalyticFrame {
            energies: vec![e1, e2],
            vectors: vec![v1, v2],
        }
    };
    HamiltonianTrajectory::new(2, value, deriv).with_analytic_frames(frames)
}

/// Instantaneous eigensystem in the model's closed form and level order:
/// E1 = +omega0/2 with v1 = (e^{-iwt/2} sin(th/2), -e^{iwt/2} cos(th/2)),
/// E2 = -omega0/2 with v2 = (e^{-iwt/2} cos(th/2), e^{iwt/2} sin(th/2)).
pub fn analytic_eigensystem(
    params: &RotatingFieldParams,
    t: f64,
) -> (f64, f64, StateVector, StateVector) {
    let half = params.theta / 2.0;
    let (sh, ch) = (half.sin(), half.cos());
    let (em, ep) = (phase(-params.omega * t / 2.0), phase(params.omega * t / 2.0));
    let v1 = StateVector::new(vec![em * sh, -ep * ch]).expect("dim 2");
    let v2 = StateVector::new(vec![em * ch, ep * sh]).expect("dim 2");
    (params.omega0 / 2.0, -params.omega0 / 2.0, v1, v2)
}

/// Coefficients of the exact solution on the instantaneous eigenbasis for the
/// initial condition psi(0) = v1(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCoefficients {
    pub a: C64,
    pub b: C64,
}

/// a(t) = cos(wbar t/2) - i (wstar/wbar) sin(wbar t/2),
/// b(t) = i (w sin th / wbar) sin(wbar t/2).
pub fn oracle_coefficients(params: &RotatingFieldParams, t: f64) -> OracleCoefficients {
    let d = derived_frequencies(params);
    let x = d.omega_bar * t / 2.0;
    let a = c(x.cos(), -(d.omega_star / d.omega_bar) * x.sin());
    let b = c(0.0, params.omega * params.theta.sin() / d.omega_bar * x.sin());
    OracleCoefficients { a, b }
}

/// Exact state a(t) v1(t) + b(t) v2(t).
pub fn oracle_state(params: &RotatingFieldParams, t: f64) -> StateVector {
    let OracleCoefficients { a, b } = oracle_coefficients(params, t);
    let (_, _, v1, v2) = analytic_eigensystem(params, t);
    v1.scaled(a).add(&v2.scaled(b)).expect("matching dims")
}

/// Exact evolution of the superposed initial state (v1(0) + v2(0)) / sqrt 2.
///
/// The second propagator column follows from unitarity and the unit
/// determinant of the eigenbasis propagator (H is traceless in both frames):
/// an initial v2(0) evolves to -conj(b) v1(t) + conj(a) v2(t).
pub fn oracle_superposition_state(params: &RotatingFieldParams, t: f64) -> StateVector {
    let OracleCoefficients { a, b } = oracle_coefficients(params, t);
    let (_, _, v1, v2) = analytic_eigensystem(params, t);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let c1 = (a - b.conj()) * inv_sqrt2;
    let c2 = (b + a.conj()) * inv_sqrt2;
    v1.scaled(c1).add(&v2.scaled(c2)).expect("matching dims")
}
