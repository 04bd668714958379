//! Minimal complex linear algebra and quadrature shared by the rest of the
//! crate: unit state vectors, small dense Hermitian eigendecomposition, and
//! composite Newton-Cotes quadrature on uniform grids.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const MAX_DENSE_DIM: usize = 16;

/// Uniform time grid `start, start + step, ..., start + (len - 1) * step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "time grid needs finite start and positive step, got start = {start}, step = {step}"
            )));
        }
        if len < 2 {
            return Err(Error::InsufficientSamples { got: len, need: 2 });
        }
        Ok(Self { start, step, len })
    }

    /// Grid of `len` points spanning `[start, end]` inclusive.
    pub fn from_span(start: f64, end: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(Error::InsufficientSamples { got: len, need: 2 });
        }
        if !(end > start) {
            return Err(Error::InvalidParams(format!(
                "time span must have end > start, got [{start}, {end}]"
            )));
        }
        Self::new(start, (end - start) / (len - 1) as f64, len)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|i| self.at(i))
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        let scale = self.step.abs().max(1.0);
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-9 * scale
            && (self.step - other.step).abs() <= 1e-12 * scale
    }
}

/// Complex state vector of dimension >= 2.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "state vector needs dim >= 2, got {}",
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::Invariant("non-finite amplitude".into()));
        }
        Ok(Self { amps })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn amp(&self, i: usize) -> C64 {
        self.amps[i]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= 0.0 {
            return Err(Error::Invariant("cannot normalize zero vector".into()));
        }
        Ok(Self {
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(Self {
            amps: self
                .amps
                .iter()
                .zip(&other.amps)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(self.add(&other.scaled(C64::new(-1.0, 0.0)))?)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Inner product, conjugate-linear in the first argument.
pub fn inner(x: &StateVector, y: &StateVector) -> Result<C64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    Ok(x.amps
        .iter()
        .zip(&y.amps)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Dense Hermitian operator, row-major storage, validated on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianOperator {
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidParams(format!(
                "expected {} entries for dim {}, got {}",
                dim * dim,
                dim,
                entries.len()
            )));
        }
        if entries
            .iter()
            .any(|e| !e.re.is_finite() || !e.im.is_finite())
        {
            return Err(Error::Invariant("non-finite matrix entry".into()));
        }
        let scale = entries
            .iter()
            .map(|e| e.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        for j in 0..dim {
            if entries[j * dim + j].im.abs() > HERMITICITY_TOL * scale {
                return Err(Error::Invariant(format!(
                    "diagonal entry {j} has imaginary part {:.3e}",
                    entries[j * dim + j].im
                )));
            }
            for k in (j + 1)..dim {
                let diff = entries[j * dim + k] - entries[k * dim + j].conj();
                if diff.norm() > HERMITICITY_TOL * scale {
                    return Err(Error::Invariant(format!(
                        "entries ({j},{k})/({k},{j}) break Hermiticity by {:.3e}",
                        diff.norm()
                    )));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            entries[j * dim + j] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.entries[j * self.dim + k]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: x.dim(),
            });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for j in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..self.dim {
                acc += self.get(j, k) * x.amp(k);
            }
            out[j] = acc;
        }
        StateVector::new(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Eigendecomposition of a small dense Hermitian operator.
///
/// Energies come back ascending; eigenvectors are orthonormal columns with the
/// largest-magnitude component made real positive. Dim 2 uses the closed-form
/// solution, dims 3..=16 cyclic Jacobi rotations.
pub fn eigh(h: &HermitianOperator) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let dim = h.dim();
    if dim > MAX_DENSE_DIM {
        return Err(Error::UnsupportedSize { dim });
    }
    let (mut energies, mut vectors) = if dim == 2 {
        eigh2(h)
    } else {
        eigh_jacobi(h)
    };
    // sort ascending, carrying eigenvectors along
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));
    energies = order.iter().map(|&i| energies[i]).collect();
    vectors = order.iter().map(|&i| vectors[i].clone()).collect();
    let vectors = vectors
        .into_iter()
        .map(|v| fix_vector_phase(&v))
        .collect::<Result<Vec<_>>>()?;
    Ok((energies, vectors))
}

/// Rotate a vector so its largest-magnitude component is real positive.
pub fn fix_vector_phase(v: &StateVector) -> Result<StateVector> {
    let (mut best, mut best_mag) = (0, 0.0);
    for (i, a) in v.amps().iter().enumerate() {
        if a.norm() > best_mag {
            best_mag = a.norm();
            best = i;
        }
    }
    if best_mag == 0.0 {
        return Err(Error::Invariant("zero eigenvector".into()));
    }
    let phase = v.amp(best).conj() / best_mag;
    Ok(v.scaled(phase))
}

fn eigh2(h: &HermitianOperator) -> (Vec<f64>, Vec<StateVector>) {
    let a = h.get(0, 0).re;
    let d = h.get(1, 1).re;
    let b = h.get(0, 1);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    let lo = mid - rad;
    let hi = mid + rad;
    if rad == 0.0 || b.norm() == 0.0 {
        // already diagonal
        let (e0, v0, e1, v1) = if a <= d {
            (a, StateVector::basis(2, 0), d, StateVector::basis(2, 1))
        } else {
            (d, StateVector::basis(2, 1), a, StateVector::basis(2, 0))
        };
        return (vec![e0, e1], vec![v0, v1]);
    }
    let vec_for = |e: f64| {
        // (H - E) v = 0; pick the numerically larger of the two null-space forms
        let cand1 = [b, C64::new(e - a, 0.0)];
        let cand2 = [C64::new(e - d, 0.0), b.conj()];
        let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
        let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
        let c = if n1 >= n2 { cand1 } else { cand2 };
        StateVector::new(c.to_vec()).unwrap().normalized().unwrap()
    };
    (vec![lo, hi], vec![vec_for(lo), vec_for(hi)])
}

fn eigh_jacobi(h: &HermitianOperator) -> (Vec<f64>, Vec<StateVector>) {
    let dim = h.dim();
    let mut a = h.entries().to_vec();
    let mut v = HermitianOperator::identity(dim).entries().to_vec();
    let scale = h.frobenius_norm().max(1.0);
    let tol = 1e-15 * scale;

    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..dim {
            for q in (p + 1)..dim {
                off += a[p * dim + q].norm_sqr();
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = a[p * dim + q];
                let g = apq.norm();
                if g <= tol * 1e-2 {
                    continue;
                }
                let omega = apq / g;
                let theta = (a[q * dim + q].re - a[p * dim + p].re) / (2.0 * g);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // unitary update on columns/rows p, q: U = diag(1, conj(omega)) * plane rotation
                let upp = C64::new(c, 0.0);
                let upq = C64::new(s, 0.0);
                let uqp = -omega.conj() * s;
                let uqq = omega.conj() * c;
                // A <- U^dagger A U (columns then rows)
                for r in 0..dim {
                    let arp = a[r * dim + p];
                    let arq = a[r * dim + q];
                    a[r * dim + p] = arp * upp + arq * uqp;
                    a[r * dim + q] = arp * upq + arq * uqq;
                }
                for cidx in 0..dim {
                    let apc = a[p * dim + cidx];
                    let aqc = a[q * dim + cidx];
                    a[p * dim + cidx] = upp.conj() * apc + uqp.conj() * aqc;
                    a[q * dim + cidx] = upq.conj() * apc + uqq.conj() * aqc;
                }
                for r in 0..dim {
                    let vrp = v[r * dim + p];
                    let vrq = v[r * dim + q];
                    v[r * dim + p] = vrp * upp + vrq * uqp;
                    v[r * dim + q] = vrp * upq + vrq * uqq;
                }
            }
        }
    }

    let energies: Vec<f64> = (0..dim).map(|j| a[j * dim + j].re).collect();
    let vectors: Vec<StateVector> = (0..dim)
        .map(|col| {
            StateVector::new((0..dim).map(|r| v[r * dim + col]).collect())
                .unwrap()
                .normalized()
                .unwrap()
        })
        .collect();
    (energies, vectors)
}

/// Integral of uniformly sampled data: composite Simpson, closed with the 3/8
/// rule when the panel count is odd. Exact for polynomials up to degree 3.
pub fn quad_uniform(samples: &[C64], step: f64) -> Result<C64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { got: n, need: 3 });
    }
    let panels = n - 1;
    let h = step;
    let simpson = |s: &[C64]| -> C64 {
        // s has an odd number of points
        let mut acc = s[0] + s[s.len() - 1];
        for (i, x) in s.iter().enumerate().take(s.len() - 1).skip(1) {
            acc += *x * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * (h / 3.0)
    };
    if panels % 2 == 0 {
        Ok(simpson(samples))
    } else {
        // odd panel count (even sample count >= 4): Simpson up to n-4, 3/8 on the tail
        let split = n - 4;
        let head = if split > 0 {
            simpson(&samples[..=split])
        } else {
            C64::new(0.0, 0.0)
        };
        let t = &samples[split..];
        let tail = (t[0] + t[1] * 3.0 + t[2] * 3.0 + t[3]) * (3.0 * h / 8.0);
        Ok(head + tail)
    }
}

/// Prefix integrals on a uniform grid via per-interval cubic Newton-Cotes.
/// `out[i]` approximates the integral from the grid start to sample `i`.
pub fn cumulative_quad(samples: &[C64], step: f64) -> Result<Vec<C64>> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { got: n, need: 3 });
    }
    let h = step;
    let mut out = Vec::with_capacity(n);
    out.push(C64::new(0.0, 0.0));
    if n == 3 {
        let half = (samples[0] * 5.0 + samples[1] * 8.0 - samples[2]) * (h / 12.0);
        out.push(half);
        out.push((samples[0] + samples[1] * 4.0 + samples[2]) * (h / 3.0));
        return Ok(out);
    }
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..(n - 1) {
        let seg = if i == 0 {
            (samples[0] * 9.0 + samples[1] * 19.0 - samples[2] * 5.0 + samples[3]) * (h / 24.0)
        } else if i == n - 2 {
            (samples[n - 1] * 9.0 + samples[n - 2] * 19.0 - samples[n - 3] * 5.0 + samples[n - 4])
                * (h / 24.0)
        } else {
            (-samples[i - 1] + samples[i] * 13.0 + samples[i + 1] * 13.0 - samples[i + 2])
                * (h / 24.0)
        };
        acc += seg;
        out.push(acc);
    }
    Ok(out)
}
