use std::f64::consts::PI;

use ncwig::criteria::{hermitian_psd, purity_report, KlmEngine, KlmSpec};
use ncwig::linalg::{CMat, Mat};
use ncwig::measures::{convex_mix, nc_symplectic_transform, ncwm, wigner_pure, WaveFn};
use ncwig::symplectic::{
    pfaffian_expansion, pfaffian_householder, random_nc_symplectic, standard_darboux, verify_darboux, ExtendedSymplecticForm, NCParams,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// (ħ, θ, η) with θη < ħ² by a margin.
fn admissible() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.5f64..2.0, -1.5f64..1.5, -1.5f64..1.5).prop_filter("θη < 0.9ħ²", |(h, t, e)| t * e < 0.9 * h * h)
}

fn ground_state(a1: f64, a2: f64, hbar: f64) -> ncwig::measures::LabeledMeasure {
    let psi = WaveFn::gaussian(a1).unwrap().product(&WaveFn::gaussian(a2).unwrap()).unwrap();
    wigner_pure(&psi, hbar).unwrap()
}

fn antisym(n: usize, v: &[f64]) -> Mat {
    let mut a = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            a[(i, j)] = v[k];
            a[(j, i)] = -v[k];
            k += 1;
        }
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn darboux_maps_j_to_omega((hbar, theta, eta) in admissible(), lambda in 0.3f64..3.0) {
        let s = standard_darboux(hbar, theta, eta, lambda).unwrap();
        let check = verify_darboux(s.s(), s.form()).unwrap();
        prop_assert!(check.ok, "{check:?}");
        prop_assert!((s.det() - (1.0 - theta * eta / (hbar * hbar))).abs() < 1e-10);
    }

    #[test]
    fn admissible_forms_share_the_sign_of_j((hbar, theta, eta) in admissible()) {
        let form = ExtendedSymplecticForm::new(&NCParams::d2(hbar, theta, eta).unwrap()).unwrap();
        prop_assert!(form.pf() < 0.0);
    }

    #[test]
    fn pfaffian_squares_to_determinant(v in prop::collection::vec(-1.0f64..1.0, 15)) {
        let a = antisym(6, &v);
        let (e, h) = (pfaffian_expansion(&a), pfaffian_householder(&a));
        prop_assert!((e - h).abs() < 1e-10 * (1.0 + e.abs()));
        prop_assert!((e * e - a.determinant()).abs() < 1e-9 * (1.0 + e * e));
    }

    #[test]
    fn pure_ncwm_saturates_the_purity_bound(
        (hbar, theta, eta) in admissible(),
        a1 in 0.2f64..2.0,
        a2 in 0.2f64..2.0,
        seed in any::<u64>(),
    ) {
        let s = standard_darboux(hbar, theta, eta, 1.0).unwrap();
        let f = ncwm(&ground_state(a1, a2, hbar), &s).unwrap();
        let report = purity_report(&f).unwrap();
        let bound = 1.0 / ((2.0 * PI * hbar).powi(2) * s.form().pf().abs());
        prop_assert!((report.purity - bound).abs() < 1e-9 * bound);
        prop_assert!(!report.excludes_ncwm());

        let m = random_nc_symplectic(&s, 0.4, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let g = nc_symplectic_transform(&f, &m).unwrap();
        prop_assert!((g.purity().unwrap() - report.purity).abs() < 1e-8 * bound);
        prop_assert!((g.function().integrate().unwrap().re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixing_never_raises_purity(a1 in 0.2f64..2.0, a2 in 0.2f64..2.0, w in 0.0f64..=1.0) {
        let (f, g) = (ground_state(a1, a1, 1.0), ground_state(a2, a2, 1.0));
        let mix = convex_mix(&[f.clone(), g.clone()], &[w, 1.0 - w]).unwrap();
        let top = f.purity().unwrap().max(g.purity().unwrap());
        prop_assert!(mix.purity().unwrap() <= top * (1.0 + 1e-10));
        prop_assert!((mix.function().integrate().unwrap().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn klm_matrices_are_hermitian(
        pts in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 4), 2..6),
        alpha in 0.2f64..1.5,
    ) {
        let form = ExtendedSymplecticForm::commutative(1.0, 2).unwrap();
        let f = ground_state(0.5, 0.5, 1.0);
        let engine = KlmEngine::new(f.function(), KlmSpec::Commutative { alpha }, &form).unwrap();
        let m: CMat = engine.matrix(&pts).unwrap();
        let dev = (&m - m.adjoint()).iter().map(|z: &Complex64| z.norm()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-12);
        if alpha <= 1.0 {
            prop_assert!(hermitian_psd(&m, None).unwrap().is_psd);
        }
    }
}
