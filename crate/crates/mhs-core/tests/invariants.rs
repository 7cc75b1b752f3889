//! Property tests for structural invariants: spectral roundtrips, linear
//! algebra, map bijectivity, the transport max principle, and multiplier
//! nonvanishing.

use mhs_core::current2d::closed_form_multiplier;
use mhs_core::field::{BoundaryFourier, SpiralField};
use mhs_core::geometry::{make_grid, AnnulusSpec, DiffeoMap};
use mhs_core::num::dense::CMat;
use mhs_core::num::fft;
use mhs_core::shell3d::multiplier3d;
use mhs_core::transport2d::{footpoints, transport_scalar};
use num_complex::Complex64;
use proptest::prelude::*;

proptest! {
    #[test]
    fn fft_roundtrip_is_identity(
        values in prop::collection::vec(-10.0f64..10.0, 8..=64),
    ) {
        // rustfft handles arbitrary lengths; pad to even to keep the
        // real-inverse Nyquist convention unambiguous
        let mut values = values;
        if values.len() % 2 == 1 {
            values.push(0.0);
        }
        let back = fft::fft_inverse_real(&fft::fft_forward(&values));
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn wavenumber_bin_roundtrip(n_pow in 3u32..=8, k in -60i64..=60) {
        let n = 1usize << n_pow;
        let half = n as i64 / 2;
        prop_assume!(k > -half && k < half);
        let bin = fft::wavenumber_bin(k, n);
        prop_assert_eq!(fft::bin_wavenumber(bin, n), k);
    }

    #[test]
    fn lu_solves_diagonally_dominant_systems(
        entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        rhs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
    ) {
        let n = 4;
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let (re, im) = entries[i * n + j];
                *m.at_mut(i, j) = Complex64::new(re, im);
            }
            // force strict diagonal dominance
            *m.at_mut(i, i) += Complex64::new(8.0, 0.0);
        }
        let b: Vec<Complex64> = rhs.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let x = m.lu().unwrap().solve(&b);
        let ax = m.matvec(&x);
        for (l, r) in ax.iter().zip(&b) {
            prop_assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn boundary_fourier_sampling_roundtrip(
        coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
    ) {
        // real nodal data: c_{-k} = conj(c_k)
        let k_cut = 4usize;
        let mut bf = BoundaryFourier::zeros(k_cut);
        bf.set(0, Complex64::new(coeffs[0].0, 0.0));
        for k in 1..=3i64 {
            let c = Complex64::new(coeffs[k as usize].0, coeffs[k as usize].1);
            bf.set(k, c);
            bf.set(-k, c.conj());
        }
        let n = 32usize;
        let samples: Vec<f64> = (0..n)
            .map(|j| bf.eval(2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        let back = BoundaryFourier::from_samples(&samples, k_cut);
        for k in -(k_cut as i64)..=(k_cut as i64) {
            prop_assert!((back.get(k) - bf.get(k)).norm() < 1e-12);
        }
    }

    #[test]
    fn diffeo_inverse_roundtrip(
        eps in 0.0f64..0.08,
        rotation in -3.0f64..3.0,
        b1 in -0.5f64..0.5,
        r in 1.0f64..2.0,
        theta in 0.0f64..6.28,
    ) {
        let mut map = DiffeoMap::radial_bump(2.0, eps);
        map.rotation = rotation;
        map.sin_coeffs = vec![0.0, b1];
        let p = [r * theta.cos(), r * theta.sin()];
        let q = map.inverse(map.forward(p)).unwrap();
        prop_assert!((p[0] - q[0]).abs() < 1e-10 && (p[1] - q[1]).abs() < 1e-10);
    }

    #[test]
    fn closed_form_multipliers_do_not_vanish(
        l in 1.01f64..10.0,
        k in 0i64..=64,
    ) {
        prop_assert!(closed_form_multiplier(k, l).abs() > 1e-12);
    }

    #[test]
    fn shell_multipliers_do_not_vanish(
        a in 1.01f64..10.0,
        l in 1usize..=32,
    ) {
        prop_assert!(multiplier3d(l, a).abs() > 1e-12);
    }
}

proptest! {
    // the transported scalar is a composition with the footpoint map, so its
    // range cannot exceed the boundary data's range
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn transported_current_obeys_max_principle(
        c1 in (-1.0f64..1.0, -1.0f64..1.0),
        c2 in (-1.0f64..1.0, -1.0f64..1.0),
        beta in 0.1f64..0.8,
    ) {
        let grid = make_grid(AnnulusSpec::new(2.0).unwrap(), 24, 4).unwrap();
        let field = SpiralField { beta };
        let fp = footpoints(&field, &grid).unwrap();
        let mut j0 = BoundaryFourier::zeros(grid.k_cut);
        let (a, b) = (Complex64::new(c1.0, c1.1), Complex64::new(c2.0, c2.1));
        j0.set(1, a);
        j0.set(-1, a.conj());
        j0.set(3, b);
        j0.set(-3, b.conj());
        let transported = transport_scalar(&j0, &fp);
        let bound = (0..4096)
            .map(|i| j0.eval(2.0 * std::f64::consts::PI * i as f64 / 4096.0).abs())
            .fold(0.0f64, f64::max);
        let max_val = transported
            .values
            .a
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        // the sampled bound misses the true extremum by O((k/4096)^2)
        prop_assert!(max_val <= bound * (1.0 + 1e-5) + 1e-12, "{max_val} > {bound}");
    }
}
