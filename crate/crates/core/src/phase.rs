//! Phase bookkeeping: predicted (dynamical + geometric) phases from frame
//! data, actual phases extracted from evolved states, their gap, and the
//! linearity experiment comparing a naive superposition prediction against
//! the exact state.

use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolutionRecord, IntegratorSpec};
use crate::hamiltonian::{
    analytic_eigensystem, derived_frequencies, oracle_superposition_state, rotating_field,
    RotatingFieldParams,
};
use crate::numerics::{cumulative_quad, inner, StateVector, TimeGrid};
use crate::spectral::{coupling_diag, track_frames, Gauge, SpectralFrameSequence};

/// Minimum tracked-level population for a meaningful single-level phase.
pub const MIN_TRACKED_POPULATION: f64 = 0.9;
/// Internal dense spacing used when extracting phases from integrated states.
pub fn dense_phase_step(params: &RotatingFieldParams) -> f64 {
    PI / (4.0 * derived_frequencies(params).omega_bar)
}

/// Per-sample phase bookkeeping for one tracked level.
#[derive(Debug, Clone)]
pub struct PhaseLedger {
    pub grid: TimeGrid,
    pub level: usize,
    pub dynamical: Vec<f64>,
    pub geometric: Vec<f64>,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
    pub gap: Vec<f64>,
}

/// Continuity-based phase unwrapping: each increment is mapped into
/// (-pi, pi] before accumulation.
pub fn unwrap_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    if raw.is_empty() {
        return out;
    }
    out.push(raw[0]);
    for w in raw.windows(2) {
        let mut d = w[1] - w[0];
        d -= (d / (2.0 * PI)).round() * 2.0 * PI;
        out.push(out.last().unwrap() + d);
    }
    out
}

/// Predicted phase of level `k` along a frame sequence: the dynamical part
/// -int E_k dt and the geometric part Re(i int <E_k|dE_k/dt> dt).
pub fn predicted_phase(
    frames: &SpectralFrameSequence,
    k: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let e_samples: Vec<C64> = frames
        .frames
        .iter()
        .map(|f| C64::new(f.energies[k], 0.0))
        .collect();
    let e_cum = cumulative_quad(&e_samples, frames.grid.step)?;
    let conn = coupling_diag(frames, k)?;
    for (i, c) in conn.iter().enumerate() {
        if c.re.abs() > 1e-6 {
            return Err(Error::Gauge(format!(
                "diagonal connection has real part {:.3e} at t = {}; \
                 frame normalization is broken",
                c.re,
                frames.grid.at(i)
            )));
        }
    }
    let c_cum = cumulative_quad(&conn, frames.grid.step)?;
    let dynamical: Vec<f64> = e_cum.iter().map(|v| -v.re).collect();
    let geometric: Vec<f64> = c_cum.iter().map(|v| -v.im).collect();
    Ok((dynamical, geometric))
}

/// Actual phase of level `k`: the unwrapped argument of <v_k(t), psi(t)>,
/// shifted so the first sample is zero.
pub fn actual_phase(
    states: &[StateVector],
    frames: &SpectralFrameSequence,
    k: usize,
) -> Result<Vec<f64>> {
    if states.len() != frames.frames.len() {
        return Err(Error::GridMismatch(format!(
            "{} states vs {} frames",
            states.len(),
            frames.frames.len()
        )));
    }
    let mut raw = Vec::with_capacity(states.len());
    let mut min_pop = f64::INFINITY;
    for (state, frame) in states.iter().zip(&frames.frames) {
        let c = inner(&frame.vectors[k], state)?;
        min_pop = min_pop.min(c.norm());
        raw.push(c.arg());
    }
    if min_pop < MIN_TRACKED_POPULATION {
        return Err(Error::NotAdiabatic {
            min_overlap: min_pop,
        });
    }
    let mut unwrapped = unwrap_phases(&raw);
    let max_inc = unwrapped
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0_f64, f64::max);
    if max_inc >= FRAC_PI_2 {
        return Err(Error::Undersampled {
            step: frames.grid.step,
            required: frames.grid.step * FRAC_PI_2 / max_inc,
        });
    }
    let base = unwrapped[0];
    for v in unwrapped.iter_mut() {
        *v -= base;
    }
    Ok(unwrapped)
}

/// Assemble a ledger from predicted and actual phase columns.
pub fn phase_ledger(
    grid: TimeGrid,
    level: usize,
    dynamical: Vec<f64>,
    geometric: Vec<f64>,
    actual: Vec<f64>,
) -> Result<PhaseLedger> {
    if dynamical.len() != grid.len || geometric.len() != grid.len || actual.len() != grid.len {
        return Err(Error::GridMismatch("phase column length mismatch".into()));
    }
    let predicted: Vec<f64> = dynamical
        .iter()
        .zip(&geometric)
        .map(|(d, g)| d + g)
        .collect();
    let gap: Vec<f64> = actual.iter().zip(&predicted).map(|(a, p)| a - p).collect();
    Ok(PhaseLedger {
        grid,
        level,
        dynamical,
        geometric,
        predicted,
        actual,
        gap,
    })
}

/// Closed-form predicted phase of the tracked level: -(omega0 + omega cos
/// theta) t / 2.
pub fn oracle_predicted_phase(params: &RotatingFieldParams, t: f64) -> f64 {
    -derived_frequencies(params).omega_star * t / 2.0
}

/// Closed-form continuation of the unwrapped actual phase. Valid only in the
/// near-adiabatic regime omega_star / omega_bar >= 0.9.
pub fn oracle_actual_phase(params: &RotatingFieldParams, t: f64) -> Result<f64> {
    let d = derived_frequencies(params);
    let r = d.omega_star / d.omega_bar;
    if r < MIN_TRACKED_POPULATION {
        return Err(Error::NotAdiabatic { min_overlap: r });
    }
    let x = d.omega_bar * t / 2.0;
    let (s, c) = x.sin_cos();
    // a(t) e^{ix} = cos^2 x + r sin^2 x + i (1 - r) sin x cos x has positive
    // real part for r > 0, so its principal argument is continuous in t.
    let re = c * c + r * s * s;
    let im = (1.0 - r) * s * c;
    Ok(-x + im.atan2(re))
}

/// Closed-form unwrapped gap actual - predicted for the tracked level.
pub fn oracle_gap(params: &RotatingFieldParams, t: f64) -> Result<f64> {
    Ok(oracle_actual_phase(params, t)? - oracle_predicted_phase(params, t))
}

/// Magnitude of the asymptotic gap slope (omega_bar - omega_star) / 2,
/// computed in a cancellation-free form.
pub fn gap_slope_magnitude(params: &RotatingFieldParams) -> f64 {
    let d = derived_frequencies(params);
    let ws = params.omega * params.theta.sin();
    ws * ws / (2.0 * (d.omega_bar + d.omega_star))
}

/// Exact-state provider for the experiments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Closed-form solution of the rotating-field problem.
    Oracle,
    /// Direct numerical integration with the given integrator.
    Integrator(IntegratorSpec),
}

fn fitted_spec(spec: &IntegratorSpec, span: f64) -> IntegratorSpec {
    // shrink the step minimally so it divides the span exactly
    let n = (span / spec.step).ceil().max(1.0);
    IntegratorSpec {
        step: span / n,
        ..*spec
    }
}

fn dense_evolution(
    params: &RotatingFieldParams,
    grid: &TimeGrid,
    spec: &IntegratorSpec,
    gauge: Gauge,
) -> Result<(TimeGrid, usize, EvolutionRecord, SpectralFrameSequence)> {
    let refine = (grid.step / dense_phase_step(params)).ceil().max(1.0) as usize;
    let dense = TimeGrid::new(grid.start, grid.step / refine as f64, (grid.len - 1) * refine + 1)?;
    let traj = rotating_field(params);
    let (_, _, v1, _) = analytic_eigensystem(params, dense.start);
    let spec = fitted_spec(spec, dense.step);
    let record = evolve(&traj, &v1, &dense, &spec)?;
    let frames = track_frames(&traj, &dense, gauge)?;
    Ok((dense, refine, record, frames))
}

/// Phase ledger for the tracked level across `grid`.
///
/// The oracle engine uses closed forms; the integrator engine evolves the
/// state on an internal dense grid (spacing <= pi / (4 omega_bar)) and
/// subsamples the requested output points.
pub fn gap_experiment(
    params: &RotatingFieldParams,
    grid: &TimeGrid,
    engine: Engine,
    gauge: Gauge,
) -> Result<PhaseLedger> {
    match engine {
        Engine::Oracle => {
            let d = derived_frequencies(params);
            let mut dynamical = Vec::with_capacity(grid.len);
            let mut geometric = Vec::with_capacity(grid.len);
            let mut actual = Vec::with_capacity(grid.len);
            for i in 0..grid.len {
                let t = grid.at(i) - grid.start;
                dynamical.push(-params.omega0 * t / 2.0);
                geometric.push(-(d.omega_star - params.omega0) * t / 2.0);
                actual.push(oracle_actual_phase(params, t)?);
            }
            phase_ledger(*grid, 0, dynamical, geometric, actual)
        }
        Engine::Integrator(spec) => {
            let (dense, refine, record, frames) = dense_evolution(params, grid, &spec, gauge)?;
            let (dynamical, geometric) = predicted_phase(&frames, 0)?;
            let actual = actual_phase(&record.states, &frames, 0)?;
            let pick = |v: &[f64]| -> Vec<f64> { v.iter().step_by(refine).copied().collect() };
            debug_assert_eq!(dense.len, (grid.len - 1) * refine + 1);
            phase_ledger(*grid, 0, pick(&dynamical), pick(&geometric), pick(&actual))
        }
    }
}

/// Outcome of the linearity experiment at one horizon.
#[derive(Debug, Clone)]
pub struct LinearityResult {
    pub tau: f64,
    /// Accumulated exponent i int E_1 + int <E_1|dE_1/dt>.
    pub alpha: C64,
    pub predicted_state: StateVector,
    pub exact_state: StateVector,
    pub overlap: C64,
    /// |cos(gap)| at the same horizon, the closed-form comparator for
    /// |overlap|.
    pub cos_gap_comparator: f64,
}

/// Evolve the equal superposition of both levels to horizon `tau` and compare
/// against the naive per-level phase prediction e^{-alpha} v1 + e^{alpha} v2.
pub fn linearity_experiment(
    params: &RotatingFieldParams,
    tau: f64,
    engine: Engine,
) -> Result<LinearityResult> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParams(
            "linearity horizon must be >= 0".into(),
        ));
    }
    let d = derived_frequencies(params);
    let alpha = C64::new(0.0, d.omega_star * tau / 2.0);
    let (_, _, v1, v2) = analytic_eigensystem(params, tau);
    let predicted_state = v1
        .scaled((-alpha).exp() / SQRT_2)
        .add(&v2.scaled(alpha.exp() / SQRT_2))?;
    let exact_state = match engine {
        _ if tau == 0.0 => oracle_superposition_state(params, 0.0),
        Engine::Oracle => oracle_superposition_state(params, tau),
        Engine::Integrator(spec) => {
            let traj = rotating_field(params);
            let (_, _, u1, u2) = analytic_eigensystem(params, 0.0);
            let psi0 = u1.scaled(C64::new(1.0 / SQRT_2, 0.0)).add(&u2.scaled(
                C64::new(1.0 / SQRT_2, 0.0),
            ))?;
            let grid = TimeGrid::new(0.0, tau, 2)?;
            let record = evolve(&traj, &psi0, &grid, &fitted_spec(&spec, tau))?;
            record.states.last().unwrap().clone()
        }
    };
    let overlap = inner(&predicted_state, &exact_state)?;
    let cos_gap_comparator = oracle_gap(params, tau)?.cos().abs();
    Ok(LinearityResult {
        tau,
        alpha,
        predicted_state,
        exact_state,
        overlap,
        cos_gap_comparator,
    })
}
