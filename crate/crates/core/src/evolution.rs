//! Schrodinger integration (classical RK4 and an exactly unitary midpoint
//! exponential) and decomposition of trajectories onto instantaneous
//! eigenframes under three coefficient conventions.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianTrajectory;
use crate::numerics::{
    cumulative_quad, eigh, inner, HermitianOperator, StateVector, TimeGrid,
};
use crate::spectral::{coupling_diag, SpectralFrameSequence};

/// Hard stability refusal: integrator step times the spectral spread.
pub const STABILITY_LIMIT: f64 = 0.2;
/// Recommended step * frequency product for accuracy-critical runs.
pub const RECOMMENDED_STEP_PRODUCT: f64 = 0.02;
const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
    UnitaryMidpoint,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Rk4 => write!(f, "rk4"),
            Method::UnitaryMidpoint => write!(f, "unitary-midpoint"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSpec {
    pub method: Method,
    pub step: f64,
    /// Renormalize the state every this many steps; 0 disables.
    pub renormalize_every: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            method: Method::Rk4,
            step: 2e-3,
            renormalize_every: 1000,
        }
    }
}

/// Integrated state trajectory sampled on a uniform grid, with a norm audit.
#[derive(Debug, Clone)]
pub struct EvolutionRecord {
    pub grid: TimeGrid,
    pub states: Vec<StateVector>,
    /// Max |norm - 1| observed before any renormalization.
    pub norm_drift: f64,
}

fn apply_rhs(h: &HermitianOperator, x: &[C64], out: &mut [C64]) {
    // out = -i H x
    let dim = x.len();
    let entries = h.entries();
    for j in 0..dim {
        let mut acc = C64::new(0.0, 0.0);
        for (k, xk) in x.iter().enumerate() {
            acc += entries[j * dim + k] * xk;
        }
        out[j] = C64::new(acc.im, -acc.re);
    }
}

fn norm_of(x: &[C64]) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn midpoint_propagator(h: &HermitianOperator, dt: f64) -> Result<Vec<C64>> {
    let dim = h.dim();
    if dim == 2 {
        // H = c0 I + B with traceless B; exp(-iHdt) in closed form
        let c0 = 0.5 * (h.get(0, 0).re + h.get(1, 1).re);
        let z = h.get(0, 0).re - c0;
        let b01 = h.get(0, 1);
        let m = (z * z + b01.norm_sqr()).sqrt();
        let global = C64::new(0.0, -c0 * dt).exp();
        if m == 0.0 {
            return Ok(vec![global, C64::new(0.0, 0.0), C64::new(0.0, 0.0), global]);
        }
        let cosm = (m * dt).cos();
        let sinc = (m * dt).sin() / m;
        let factor = C64::new(0.0, -sinc);
        return Ok(vec![
            global * (C64::new(cosm, 0.0) + factor * z),
            global * factor * b01,
            global * factor * b01.conj(),
            global * (C64::new(cosm, 0.0) - factor * z),
        ]);
    }
    // general small dense case: spectral exponential
    let (energies, vectors) = eigh(h)?;
    let mut u = vec![C64::new(0.0, 0.0); dim * dim];
    for (e, v) in energies.iter().zip(&vectors) {
        let phase = C64::new(0.0, -e * dt).exp();
        for j in 0..dim {
            for k in 0..dim {
                u[j * dim + k] += v.amp(j) * phase * v.amp(k).conj();
            }
        }
    }
    Ok(u)
}

fn estimate_max_frequency(trajectory: &HamiltonianTrajectory, grid: &TimeGrid) -> Result<f64> {
    let probes = 9.min(grid.len);
    let mut freq = 0.0_f64;
    for i in 0..probes {
        let idx = i * (grid.len - 1) / (probes - 1).max(1);
        let (energies, _) = eigh(&trajectory.value(grid.at(idx)))?;
        let spread = energies[energies.len() - 1] - energies[0];
        freq = freq.max(spread);
    }
    Ok(freq)
}

/// Integrate i d/dt psi = H(t) psi from `psi0` across `grid`, recording the
/// state at every grid point. `spec.step` must divide the grid spacing.
pub fn evolve(
    trajectory: &HamiltonianTrajectory,
    psi0: &StateVector,
    grid: &TimeGrid,
    spec: &IntegratorSpec,
) -> Result<EvolutionRecord> {
    if !psi0.is_unit(1e-9) {
        return Err(Error::InvalidParams(format!(
            "initial state not normalized (norm {})",
            psi0.norm()
        )));
    }
    if psi0.dim() != trajectory.dim() {
        return Err(Error::DimensionMismatch {
            left: trajectory.dim(),
            right: psi0.dim(),
        });
    }
    if !(spec.step > 0.0) {
        return Err(Error::InvalidParams("integrator step must be > 0".into()));
    }
    let substeps = (grid.step / spec.step).round();
    if substeps < 1.0 || (substeps * spec.step - grid.step).abs() > 1e-9 * grid.step {
        return Err(Error::GridMismatch(format!(
            "integrator step {} does not divide grid spacing {}",
            spec.step, grid.step
        )));
    }
    let substeps = substeps as usize;
    let h = grid.step / substeps as f64;

    let freq = estimate_max_frequency(trajectory, grid)?;
    if spec.step * freq > STABILITY_LIMIT {
        return Err(Error::StabilityRefusal {
            product: spec.step * freq,
        });
    }

    let dim = psi0.dim();
    let mut psi: Vec<C64> = psi0.amps().to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let mut states = Vec::with_capacity(grid.len);
    states.push(StateVector::new(psi.clone())?);
    let mut norm_drift = 0.0_f64;
    let mut steps_done = 0usize;

    for i in 0..(grid.len - 1) {
        let t_base = grid.at(i);
        for s in 0..substeps {
            let t = t_base + s as f64 * h;
            match spec.method {
                Method::Rk4 => {
                    let h_t = trajectory.value(t);
                    let h_mid = trajectory.value(t + 0.5 * h);
                    let h_end = trajectory.value(t + h);
                    apply_rhs(&h_t, &psi, &mut k1);
                    for j in 0..dim {
                        tmp[j] = psi[j] + k1[j] * (0.5 * h);
                    }
                    apply_rhs(&h_mid, &tmp, &mut k2);
                    for j in 0..dim {
                        tmp[j] = psi[j] + k2[j] * (0.5 * h);
                    }
                    apply_rhs(&h_mid, &tmp, &mut k3);
                    for j in 0..dim {
                        tmp[j] = psi[j] + k3[j] * h;
                    }
                    apply_rhs(&h_end, &tmp, &mut k4);
                    for j in 0..dim {
                        psi[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
                    }
                }
                Method::UnitaryMidpoint => {
                    let u = midpoint_propagator(&trajectory.value(t + 0.5 * h), h)?;
                    for j in 0..dim {
                        let mut acc = C64::new(0.0, 0.0);
                        for (k, p) in psi.iter().enumerate() {
                            acc += u[j * dim + k] * p;
                        }
                        tmp[j] = acc;
                    }
                    psi.copy_from_slice(&tmp);
                }
            }
            steps_done += 1;
            if spec.renormalize_every > 0 && steps_done % spec.renormalize_every == 0 {
                let n = norm_of(&psi);
                norm_drift = norm_drift.max((n - 1.0).abs());
                for a in psi.iter_mut() {
                    *a /= n;
                }
            }
        }
        let n = norm_of(&psi);
        norm_drift = norm_drift.max((n - 1.0).abs());
        if spec.renormalize_every == 0 && norm_drift > NORM_DRIFT_LIMIT {
            return Err(Error::AccuracyLoss { drift: norm_drift });
        }
        states.push(StateVector::new(psi.clone())?);
    }

    Ok(EvolutionRecord {
        grid: *grid,
        states,
        norm_drift,
    })
}

/// Coefficient conventions for eigenbasis expansions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Plain projections <v_n(t), psi(t)>.
    Raw,
    /// Dynamical phase peeled off: raw * e^{+i int E_n}.
    DynPeeled,
    /// Dynamical phase and diagonal connection peeled off.
    FullPeeled,
}

/// Per-time eigenbasis coefficients plus the accumulated peel integrals.
#[derive(Debug, Clone)]
pub struct EigenbasisCoefficients {
    pub convention: Convention,
    pub grid: TimeGrid,
    /// values[time][level]
    pub values: Vec<Vec<C64>>,
    /// Accumulated int E_n, per [time][level].
    pub energy_integrals: Vec<Vec<f64>>,
    /// Accumulated int <E_n|dE_n/dt>, per [time][level].
    pub connection_integrals: Vec<Vec<C64>>,
}

impl EigenbasisCoefficients {
    fn peel_exponent(&self, convention: Convention, i: usize, n: usize) -> C64 {
        match convention {
            Convention::Raw => C64::new(0.0, 0.0),
            Convention::DynPeeled => C64::new(0.0, self.energy_integrals[i][n]),
            Convention::FullPeeled => {
                C64::new(0.0, self.energy_integrals[i][n]) + self.connection_integrals[i][n]
            }
        }
    }

    /// Exact phase multiplication between conventions; roundtrips identically.
    pub fn convert(&self, to: Convention) -> Self {
        let mut out = self.clone();
        if to == self.convention {
            return out;
        }
        for i in 0..self.values.len() {
            for n in 0..self.values[i].len() {
                let factor =
                    (self.peel_exponent(to, i, n) - self.peel_exponent(self.convention, i, n)).exp();
                out.values[i][n] = self.values[i][n] * factor;
            }
        }
        out.convention = to;
        out
    }
}

/// Project an evolution record onto a frame sequence sharing its grid.
pub fn decompose(
    record: &EvolutionRecord,
    frames: &SpectralFrameSequence,
    convention: Convention,
) -> Result<EigenbasisCoefficients> {
    if !record.grid.matches(&frames.grid) {
        return Err(Error::GridMismatch(
            "record and frame grids differ".into(),
        ));
    }
    let dim = frames.frames[0].energies.len();
    let len = record.states.len();

    let mut energy_integrals = vec![vec![0.0; dim]; len];
    let mut connection_integrals = vec![vec![C64::new(0.0, 0.0); dim]; len];
    for n in 0..dim {
        let e_samples: Vec<C64> = frames
            .frames
            .iter()
            .map(|f| C64::new(f.energies[n], 0.0))
            .collect();
        let e_cum = cumulative_quad(&e_samples, frames.grid.step)?;
        let conn = coupling_diag(frames, n)?;
        let c_cum = cumulative_quad(&conn, frames.grid.step)?;
        for i in 0..len {
            energy_integrals[i][n] = e_cum[i].re;
            connection_integrals[i][n] = c_cum[i];
        }
    }

    let mut values = Vec::with_capacity(len);
    for (state, frame) in record.states.iter().zip(&frames.frames) {
        let mut row = Vec::with_capacity(dim);
        for v in &frame.vectors {
            row.push(inner(v, state)?);
        }
        values.push(row);
    }

    let raw = EigenbasisCoefficients {
        convention: Convention::Raw,
        grid: record.grid,
        values,
        energy_integrals,
        connection_integrals,
    };
    Ok(raw.convert(convention))
}

/// Rebuild the state sequence from eigenbasis coefficients.
pub fn reconstruct(
    coeffs: &EigenbasisCoefficients,
    frames: &SpectralFrameSequence,
) -> Result<Vec<StateVector>> {
    if !coeffs.grid.matches(&frames.grid) {
        return Err(Error::GridMismatch(
            "coefficient and frame grids differ".into(),
        ));
    }
    let raw = coeffs.convert(Convention::Raw);
    let mut out = Vec::with_capacity(raw.values.len());
    for (row, frame) in raw.values.iter().zip(&frames.frames) {
        let mut psi = frame.vectors[0].scaled(row[0]);
        for (c, v) in row.iter().zip(&frame.vectors).skip(1) {
            psi = psi.add(&v.scaled(*c))?;
        }
        out.push(psi);
    }
    Ok(out)
}
