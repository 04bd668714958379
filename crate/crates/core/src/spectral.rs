//! Gauge-continuous instantaneous eigenframes along a trajectory and the
//! coupling matrix elements <E_n|dE_m/dt> that drive the adiabatic conditions
//! and the residual integrand.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianTrajectory;
use crate::numerics::{eigh, inner, HermitianOperator, StateVector, TimeGrid};

/// Eigenvector phase convention in force along a frame sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gauge {
    /// Deterministic per-frame phase from the raw eigendecomposition.
    Raw,
    /// Consecutive same-level overlaps made real positive.
    ParallelTransport,
    /// Closed-form eigenvectors supplied by the model.
    AnalyticReference,
}

impl std::fmt::Display for Gauge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Gauge::Raw => write!(f, "raw"),
            Gauge::ParallelTransport => write!(f, "transport"),
            Gauge::AnalyticReference => write!(f, "analytic"),
        }
    }
}

/// Instantaneous eigenframe at one grid time, in trajectory-consistent level
/// order (not necessarily ascending energies).
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
    pub gauge: Gauge,
}

/// Frames on a uniform grid plus the worst consecutive-overlap defect
/// max_k (1 - |<v_k(t_i), v_k(t_{i+1})>|).
#[derive(Debug, Clone)]
pub struct SpectralFrameSequence {
    pub grid: TimeGrid,
    pub frames: Vec<SpectralFrame>,
    pub continuity: f64,
}

/// Continuity above this bound makes finite-difference derivatives unreliable.
pub const CONTINUITY_LIMIT: f64 = 0.01;
/// Competing level-assignment overlaps closer than this are ambiguous.
pub const AMBIGUITY_MARGIN: f64 = 0.05;

/// Coupling matrix at one time: values[n][m] = <E_n | dE_m/dt>.
#[derive(Debug, Clone)]
pub struct CouplingMatrix {
    pub t: f64,
    dim: usize,
    values: Vec<C64>,
}

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.values[n * self.dim + m]
    }
}

fn degeneracy_scale(energies: &[f64]) -> f64 {
    energies.iter().fold(1.0_f64, |acc, e| acc.max(e.abs())) * 1e-12
}

fn check_nondegenerate(t: f64, energies: &[f64]) -> Result<()> {
    let scale = degeneracy_scale(energies);
    for i in 0..energies.len() {
        for j in (i + 1)..energies.len() {
            let gap = (energies[i] - energies[j]).abs();
            if gap <= scale {
                return Err(Error::Degeneracy { t, gap });
            }
        }
    }
    Ok(())
}

/// Build gauge-continuous frames along `trajectory` on `grid`.
///
/// Level order is fixed by maximal overlap with the previous frame; the first
/// frame uses the model's own order when closed-form frames exist, ascending
/// energies otherwise.
pub fn track_frames(
    trajectory: &HamiltonianTrajectory,
    grid: &TimeGrid,
    gauge: Gauge,
) -> Result<SpectralFrameSequence> {
    if gauge == Gauge::AnalyticReference {
        let mut frames = Vec::with_capacity(grid.len);
        for t in grid.times() {
            let af = trajectory.analytic_frame(t).ok_or_else(|| {
                Error::Gauge("analytic-reference gauge needs a model with closed-form frames".into())
            })?;
            check_nondegenerate(t, &af.energies)?;
            frames.push(SpectralFrame {
                t,
                energies: af.energies,
                vectors: af.vectors,
                gauge,
            });
        }
        let continuity = continuity_of(&frames)?;
        return Ok(SpectralFrameSequence {
            grid: *grid,
            frames,
            continuity,
        });
    }

    let dim = trajectory.dim();
    let mut frames: Vec<SpectralFrame> = Vec::with_capacity(grid.len);
    for t in grid.times() {
        let (energies, vectors) = eigh(&trajectory.value(t))?;
        check_nondegenerate(t, &energies)?;
        let (energies, mut vectors) = if let Some(prev) = frames.last() {
            reorder_by_overlap(prev, t, energies, vectors)?
        } else if let Some(af) = trajectory.analytic_frame(t) {
            // first frame: adopt the model's level order
            let reference = SpectralFrame {
                t,
                energies: af.energies,
                vectors: af.vectors,
                gauge,
            };
            reorder_by_overlap(&reference, t, energies, vectors)?
        } else {
            (energies, vectors)
        };
        if gauge == Gauge::ParallelTransport {
            if let Some(prev) = frames.last() {
                for (k, v) in vectors.iter_mut().enumerate() {
                    let ov = inner(&prev.vectors[k], v)?;
                    if ov.norm() > 0.0 {
                        *v = v.scaled(ov.conj() / ov.norm());
                    }
                }
            }
        }
        debug_assert_eq!(vectors.len(), dim);
        frames.push(SpectralFrame {
            t,
            energies,
            vectors,
            gauge,
        });
    }
    let continuity = continuity_of(&frames)?;
    Ok(SpectralFrameSequence {
        grid: *grid,
        frames,
        continuity,
    })
}

fn reorder_by_overlap(
    prev: &SpectralFrame,
    t: f64,
    energies: Vec<f64>,
    vectors: Vec<StateVector>,
) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let dim = energies.len();
    let mut taken = vec![false; dim];
    let mut order = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut best = (usize::MAX, -1.0_f64);
        let mut second = -1.0_f64;
        for (j, v) in vectors.iter().enumerate() {
            if taken[j] {
                continue;
            }
            let ov = inner(&prev.vectors[k], v)?.norm();
            if ov > best.1 {
                second = best.1;
                best = (j, ov);
            } else if ov > second {
                second = ov;
            }
        }
        if second >= 0.0 && (best.1 - second) < AMBIGUITY_MARGIN {
            return Err(Error::TrackingAmbiguity {
                t,
                best: best.1,
                second,
            });
        }
        taken[best.0] = true;
        order.push(best.0);
    }
    Ok((
        order.iter().map(|&j| energies[j]).collect(),
        order.iter().map(|&j| vectors[j].clone()).collect(),
    ))
}

fn continuity_of(frames: &[SpectralFrame]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for pair in frames.windows(2) {
        for (a, b) in pair[0].vectors.iter().zip(&pair[1].vectors) {
            worst = worst.max(1.0 - inner(a, b)?.norm());
        }
    }
    Ok(worst)
}

/// Off-diagonal couplings via <E_n|Hdot|E_m> / (E_m - E_n); diagonal left zero.
/// Magnitudes are gauge-invariant.
pub fn coupling_offdiag(frame: &SpectralFrame, hdot: &HermitianOperator) -> Result<CouplingMatrix> {
    let dim = frame.energies.len();
    let scale = degeneracy_scale(&frame.energies).max(1e-12 * hdot.frobenius_norm());
    let mut values = vec![C64::new(0.0, 0.0); dim * dim];
    for n in 0..dim {
        for m in 0..dim {
            if n == m {
                continue;
            }
            let gap = frame.energies[m] - frame.energies[n];
            if gap.abs() <= scale {
                return Err(Error::Degeneracy {
                    t: frame.t,
                    gap: gap.abs(),
                });
            }
            let num = inner(&frame.vectors[n], &hdot.apply(&frame.vectors[m])?)?;
            values[n * dim + m] = num / gap;
        }
    }
    Ok(CouplingMatrix {
        t: frame.t,
        dim,
        values,
    })
}

/// Diagonal connection <v_k | d v_k/dt> by finite differences along the frame
/// sequence: central in the interior, second-order one-sided at the ends.
pub fn coupling_diag(frames: &SpectralFrameSequence, k: usize) -> Result<Vec<C64>> {
    let n = frames.frames.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { got: n, need: 3 });
    }
    if frames.continuity > CONTINUITY_LIMIT {
        return Err(Error::UnreliableDerivative {
            continuity: frames.continuity,
            limit: CONTINUITY_LIMIT,
        });
    }
    let h = frames.grid.step;
    let v = |i: usize| &frames.frames[i].vectors[k];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let deriv = if i == 0 {
            v(0)
                .scaled(C64::new(-3.0, 0.0))
                .add(&v(1).scaled(C64::new(4.0, 0.0)))?
                .add(&v(2).scaled(C64::new(-1.0, 0.0)))?
                .scaled(C64::new(1.0 / (2.0 * h), 0.0))
        } else if i == n - 1 {
            v(n - 1)
                .scaled(C64::new(3.0, 0.0))
                .add(&v(n - 2).scaled(C64::new(-4.0, 0.0)))?
                .add(&v(n - 3).scaled(C64::new(1.0, 0.0)))?
                .scaled(C64::new(1.0 / (2.0 * h), 0.0))
        } else {
            v(i + 1)
                .sub(v(i - 1))?
                .scaled(C64::new(1.0 / (2.0 * h), 0.0))
        };
        out.push(inner(v(i), &deriv)?);
    }
    Ok(out)
}
