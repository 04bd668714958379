//! Generative property tests complementing the acceptance suite.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use adiagap::evolution::{Convention, EigenbasisCoefficients};
use adiagap::hamiltonian::{oracle_coefficients, RotatingFieldParams};
use adiagap::numerics::{
    cumulative_quad, eigh, inner, quad_uniform, HermitianOperator, StateVector, TimeGrid,
};
use adiagap::phase::unwrap_phases;

fn hermitian_strategy(dim: usize) -> impl Strategy<Value = HermitianOperator> {
    proptest::collection::vec(-1.0..1.0f64, dim * dim * 2).prop_map(move |raw| {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for j in 0..dim {
            entries[j * dim + j] = C64::new(raw[j * dim + j], 0.0);
            for k in (j + 1)..dim {
                let v = C64::new(raw[j * dim + k], raw[dim * dim + j * dim + k]);
                entries[j * dim + k] = v;
                entries[k * dim + j] = v.conj();
            }
        }
        HermitianOperator::new(dim, entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eigh_reconstructs_and_is_orthonormal(
        h in (2usize..=8).prop_flat_map(hermitian_strategy),
    ) {
        let dim = h.dim();
        let (energies, vectors) = eigh(&h).unwrap();
        // ascending energies
        for w in energies.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        // orthonormality
        for (i, vi) in vectors.iter().enumerate() {
            for (j, vj) in vectors.iter().enumerate() {
                let ip = inner(vi, vj).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((ip - C64::new(expect, 0.0)).norm() <= 1e-11);
            }
        }
        // spectral reconstruction
        for j in 0..dim {
            for k in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for (e, v) in energies.iter().zip(&vectors) {
                    acc += v.amp(j) * *e * v.amp(k).conj();
                }
                prop_assert!((acc - h.get(j, k)).norm() <= 1e-11);
            }
        }
    }

    #[test]
    fn quadrature_exact_on_cubics(
        c in proptest::array::uniform4(-2.0..2.0f64),
        n in 5usize..60,
        span in 0.5..10.0f64,
    ) {
        let grid = TimeGrid::from_span(0.0, span, n).unwrap();
        let samples: Vec<C64> = grid
            .times()
            .map(|t| C64::new(c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t, 0.0))
            .collect();
        let exact = c[0] * span
            + c[1] * span.powi(2) / 2.0
            + c[2] * span.powi(3) / 3.0
            + c[3] * span.powi(4) / 4.0;
        let got = quad_uniform(&samples, grid.step).unwrap().re;
        prop_assert!((got - exact).abs() <= 1e-9 * (1.0 + exact.abs()));
        // the cumulative rule is also degree-3 exact at every prefix
        let cum = cumulative_quad(&samples, grid.step).unwrap();
        for (i, v) in cum.iter().enumerate() {
            let t = grid.at(i);
            let e = c[0] * t + c[1] * t.powi(2) / 2.0 + c[2] * t.powi(3) / 3.0
                + c[3] * t.powi(4) / 4.0;
            prop_assert!((v.re - e).abs() <= 1e-9 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn unwrap_tracks_any_slowly_varying_phase(
        slope in -1.0..1.0f64,
        amp in 0.0..1.0f64,
        n in 10usize..200,
    ) {
        let phases: Vec<f64> = (0..n)
            .map(|i| slope * i as f64 + amp * (0.13 * i as f64).sin())
            .collect();
        let wrapped: Vec<f64> = phases.iter().map(|p| C64::new(0.0, *p).exp().arg()).collect();
        let un = unwrap_phases(&wrapped);
        let offset = un[0] - phases[0];
        for (u, p) in un.iter().zip(&phases) {
            prop_assert!((u - offset - p).abs() <= 1e-9);
        }
    }

    #[test]
    fn inner_satisfies_cauchy_schwarz(
        raw in proptest::collection::vec(-1.0..1.0f64, 8),
    ) {
        let x = StateVector::new(vec![
            C64::new(raw[0], raw[1]),
            C64::new(raw[2], raw[3]),
        ]);
        let y = StateVector::new(vec![
            C64::new(raw[4], raw[5]),
            C64::new(raw[6], raw[7]),
        ]);
        if let (Ok(x), Ok(y)) = (x, y) {
            let ip = inner(&x, &y).unwrap();
            prop_assert!(ip.norm() <= x.norm() * y.norm() + 1e-12);
        }
    }

    #[test]
    fn convention_conversion_roundtrips(
        raw in proptest::collection::vec(-1.0..1.0f64, 12),
    ) {
        let grid = TimeGrid::new(0.0, 0.5, 3).unwrap();
        let values: Vec<Vec<C64>> = (0..3)
            .map(|i| vec![C64::new(raw[4 * i], raw[4 * i + 1]), C64::new(raw[4 * i + 2], raw[4 * i + 3])])
            .collect();
        let energy_integrals: Vec<Vec<f64>> = (0..3).map(|i| vec![i as f64, -2.0 * i as f64]).collect();
        let connection_integrals: Vec<Vec<C64>> = (0..3)
            .map(|i| vec![C64::new(0.0, 0.1 * i as f64), C64::new(0.0, -0.3 * i as f64)])
            .collect();
        let coeffs = EigenbasisCoefficients {
            convention: Convention::Raw,
            grid,
            values: values.clone(),
            energy_integrals,
            connection_integrals,
        };
        for target in [Convention::DynPeeled, Convention::FullPeeled] {
            let back = coeffs.convert(target).convert(Convention::Raw);
            for i in 0..3 {
                for n in 0..2 {
                    prop_assert!((back.values[i][n] - values[i][n]).norm() <= 1e-12);
                    // peels are pure phases
                    prop_assert!(
                        (coeffs.convert(target).values[i][n].norm() - values[i][n].norm()).abs()
                            <= 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_coefficients_stay_unitary(
        omega0 in 0.1..20.0f64,
        omega in 0.0..1.0f64,
        theta in 0.0..std::f64::consts::PI,
        t in 0.0..1000.0f64,
    ) {
        let p = RotatingFieldParams::new(omega0, omega, theta).unwrap();
        let c = oracle_coefficients(&p, t);
        prop_assert!((c.a.norm_sqr() + c.b.norm_sqr() - 1.0).abs() <= 1e-12);
        prop_assert!(c.b.re.abs() <= 1e-12);
    }
}

#[test]
fn state_vector_rejects_non_finite_components() {
    assert!(StateVector::new(vec![C64::new(f64::NAN, 0.0), C64::new(1.0, 0.0)]).is_err());
    assert!(StateVector::new(vec![C64::new(f64::INFINITY, 0.0), C64::new(1.0, 0.0)]).is_err());
}
