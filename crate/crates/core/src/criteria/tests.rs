use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gausspoly::{GaussPoly, GaussSum};
use crate::linalg::{inverse, j_matrix, to_complex, CMat, Mat};
use crate::measures::{catalog, wigner_pure, CatalogConsts, CatalogId, LabeledMeasure, MeasureSet, Region, WaveFn};
use crate::symplectic::{random_symplectic, ExtendedSymplecticForm, NCParams};

fn params() -> NCParams {
    NCParams::d2(1.0, 0.5, 0.5).unwrap()
}

fn form(p: &NCParams) -> ExtendedSymplecticForm {
    ExtendedSymplecticForm::new(p).unwrap()
}

fn cat(id: CatalogId) -> LabeledMeasure {
    catalog(id, &params(), &CatalogConsts::default()).unwrap()
}

fn quad_form(f: &LabeledMeasure) -> Mat {
    f.single().unwrap().real_form().unwrap().0
}

fn ground_state(hbar: f64, p: &NCParams) -> LabeledMeasure {
    let psi = WaveFn::gaussian(0.5).unwrap().product(&WaveFn::gaussian(0.5).unwrap()).unwrap();
    wigner_pure(&psi, hbar).unwrap().with_params(p.clone()).unwrap()
}

fn diag(v: &[f64]) -> Mat {
    Mat::from_diagonal(&nalgebra::DVector::from_column_slice(v))
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let l = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let k: f64 = 10f64.powf(rng.gen_range(-1.5..0.5));
    (&l * l.transpose() + Mat::identity(n, n) * 0.3) * k
}

#[test]
fn psd_trivial_cases() {
    let v = hermitian_psd(&CMat::identity(3, 3), None).unwrap();
    assert!(v.is_psd && (v.min_eigenvalue - 1.0).abs() < 1e-14);
    let v = hermitian_psd(&to_complex(&diag(&[1.0, -0.5])), None).unwrap();
    assert!(!v.is_psd && (v.min_eigenvalue + 0.5).abs() < 1e-14);
}

#[test]
fn non_hermitian_rejected() {
    let mut m = CMat::identity(2, 2);
    m[(0, 1)] = Complex64::new(0.0, 1.0);
    assert!(matches!(hermitian_psd(&m, None), Err(Error::NotHermitian(_))));
}

/// Real roots of λ³ + a λ² + b λ + c by the trigonometric method.
fn cubic_roots(a: f64, b: f64, c: f64) -> [f64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a.powi(3) / 27.0 - a * b / 3.0 + c;
    let r = 2.0 * (-p / 3.0).sqrt();
    let phi = (3.0 * q / (p * r)).clamp(-1.0, 1.0).acos() / 3.0;
    let mut out = [0, 1, 2].map(|k| r * (phi - 2.0 * PI * k as f64 / 3.0).cos() - a / 3.0);
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn eigenvalues_match_cubic_roots() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = CMat::from_fn(3, 3, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = a.adjoint() * &a;
        let minor = |i: usize, j: usize| (m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)]).re;
        let tr = m.trace().re;
        let det = m.determinant().re;
        let roots = cubic_roots(-tr, minor(0, 1) + minor(0, 2) + minor(1, 2), -det);
        let eig = crate::linalg::hermitian_eigenvalues(&m);
        for (x, y) in roots.iter().zip(&eig) {
            assert!((x - y).abs() < 1e-9 * (1.0 + tr), "{roots:?} vs {eig:?}");
        }
        let v = hermitian_psd(&m, None).unwrap();
        assert!(v.is_psd);
        assert!((v.min_eigenvalue - roots[0]).abs() < 1e-9);
    }
}

#[test]
fn gaussian_wigner_examples() {
    for hbar in [1.0, 0.7] {
        let v = gaussian_is_wigner(&(Mat::identity(4, 4) / hbar), hbar).unwrap();
        assert!(v.is_psd && v.min_eigenvalue.abs() < 1e-12, "{v:?}");
    }
    let v = gaussian_is_wigner(&(Mat::identity(4, 4) * 2.0), 1.0).unwrap();
    assert!(!v.is_psd && (v.min_eigenvalue + 0.5).abs() < 1e-12);
    let v = gaussian_is_wigner(&(Mat::identity(4, 4) * 0.5), 1.0).unwrap();
    assert!(v.is_psd && (v.min_eigenvalue - 1.0).abs() < 1e-12);
}

#[test]
fn non_spd_forms_rejected() {
    assert!(matches!(gaussian_is_wigner(&diag(&[1.0, -1.0]), 1.0), Err(Error::NotSPD)));
    let mut m = Mat::identity(2, 2);
    m[(0, 1)] = 0.3;
    assert!(matches!(gaussian_is_wigner(&m, 1.0), Err(Error::NotSPD)));
    let f = form(&params());
    assert!(matches!(gaussian_is_pure(&diag(&[1.0, 1.0, 0.0, 1.0]), PureMode::Ncwm, &f), Err(Error::NotSPD)));
}

#[test]
fn ncwm_test_reduces_to_wigner_test_when_commutative() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let comm = ExtendedSymplecticForm::commutative(0.9, 2).unwrap();
    for _ in 0..20 {
        let a = random_spd(&mut rng, 4);
        assert_eq!(gaussian_is_ncwm(&a, &comm).unwrap(), gaussian_is_wigner(&a, 0.9).unwrap());
    }
}

#[test]
fn product_state_form_is_a_boundary_ncwm() {
    let p = params();
    let c = quad_form(&cat(CatalogId::F6));
    let v = gaussian_is_ncwm(&c, &form(&p)).unwrap();
    assert!(v.is_psd && v.min_eigenvalue.abs() < 1e-9, "{v:?}");
    assert!(!gaussian_is_wigner(&c, p.hbar()).unwrap().is_psd);
    let c3 = quad_form(&cat(CatalogId::F3));
    assert!(!gaussian_is_ncwm(&c3, &form(&p)).unwrap().is_psd);
}

#[test]
fn pure_gaussian_examples() {
    let hbar = 0.8;
    let comm = ExtendedSymplecticForm::commutative(hbar, 2).unwrap();
    let v = gaussian_is_pure(&(Mat::identity(4, 4) / hbar), PureMode::Wigner, &comm).unwrap();
    assert!(v.pure);
    assert!(v.symplectic_spectrum.iter().all(|s| (s - hbar).abs() < 1e-12));
    let v = gaussian_is_pure(&(Mat::identity(4, 4) / (2.0 * hbar)), PureMode::Wigner, &comm).unwrap();
    assert!(!v.pure);
    assert!(v.symplectic_spectrum.iter().all(|s| (s - 2.0 * hbar).abs() < 1e-12));

    let p = params();
    let c = quad_form(&cat(CatalogId::F6));
    assert!(gaussian_is_pure(&c, PureMode::Ncwm, &form(&p)).unwrap().pure);
    assert!(!gaussian_is_pure(&c, PureMode::Wigner, &form(&p)).unwrap().pure);
}

#[test]
fn pure_test_agrees_with_purity_equality() {
    let hbar = 0.6;
    let comm = ExtendedSymplecticForm::commutative(hbar, 2).unwrap();
    let bound = (2.0 * PI * hbar).powi(-2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..10 {
        let s = random_symplectic(2, 0.5, &mut rng);
        let thermal = if k % 2 == 0 { 1.0 } else { 0.6 };
        let a = s.transpose() * &s * (thermal / hbar);
        let verdict = gaussian_is_pure(&a, PureMode::Wigner, &comm).unwrap();
        let purity = GaussSum::from(GaussPoly::normalized_gaussian(&a, &[0.0; 4]).unwrap()).purity().unwrap();
        assert_eq!(verdict.pure, (purity - bound).abs() < 1e-9 * bound, "{verdict:?} purity {purity}");
        assert_eq!(verdict.pure, k % 2 == 0);
    }
}

#[test]
fn uncertainty_examples() {
    assert!(uncertainty_check(&cat(CatalogId::F6)).unwrap().is_psd);
    let p = params();
    let f3 = catalog(CatalogId::F3, &p, &CatalogConsts { a: Some(0.1), b: Some(0.1), ..Default::default() }).unwrap();
    assert!(!uncertainty_check(&f3).unwrap().is_psd);
    let g = ground_state(1.0, &NCParams::commutative(1.0, 2).unwrap());
    let v = uncertainty_check_with(&g, true).unwrap();
    assert!(v.is_psd && v.min_eigenvalue.abs() < 1e-9, "{v:?}");
}

#[test]
fn gaussian_ncwm_test_matches_uncertainty_principle() {
    let p = NCParams::d2(1.0, 0.4, 0.3).unwrap();
    let f = form(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..50 {
        let c = random_spd(&mut rng, 4);
        let g = LabeledMeasure::unlabeled(GaussPoly::normalized_gaussian(&c, &[0.3, -0.1, 0.0, 0.2]).unwrap(), p.clone()).unwrap();
        let a = gaussian_is_ncwm(&c, &f).unwrap().is_psd;
        let b = uncertainty_check(&g).unwrap().is_psd;
        assert_eq!(a, b);
        if a {
            yes += 1
        } else {
            no += 1
        }
    }
    assert!(yes > 5 && no > 5, "{yes} {no}");
}

#[test]
fn purity_report_values() {
    let p = params();
    let zeta = p.zeta();
    let r = purity_report(&cat(CatalogId::F6)).unwrap();
    let nc = 1.0 / (2.0 * PI).powi(2) / (1.0 - zeta);
    assert!((r.purity - nc).abs() < 1e-12 * nc);
    assert!(!r.ncwm_bound.exceeded && r.wigner_bound.exceeded);
    let th = r.theta_purity.unwrap();
    assert!((th.value - 1.0 / PI).abs() < 1e-12 && !th.exceeded);
    let et = r.eta_purity.unwrap();
    assert!((et.value - zeta / (2.0 * PI * 0.5 * (2.0 - zeta))).abs() < 1e-12 && !et.exceeded);
    assert!(!r.excludes_ncwm());

    let r = purity_report(&cat(CatalogId::F3)).unwrap();
    assert!((r.purity - 1.0 / ((2.0 * PI).powi(2) * 0.09)).abs() < 1e-12 * r.purity);
    assert!(r.excludes_wigner() && r.ncwm_bound.exceeded);

    let r = purity_report(&cat(CatalogId::F1)).unwrap();
    let th = r.theta_purity.unwrap();
    assert!((th.value - 1.0 / (2.0 * PI * 0.2)).abs() < 1e-12 && th.exceeded);
}

#[test]
fn single_point_klm_matrix_is_one() {
    let p = params();
    for spec in [KlmSpec::Commutative { alpha: 1.0 }, nc_klm_spec(&p).unwrap()] {
        let w = klm_matrix(cat(CatalogId::F4).function(), &[vec![0.3, -1.0, 0.2, 0.5]], spec, &form(&p)).unwrap();
        assert!((w.matrix.to_cmat()[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(w.is_psd);
    }
}

#[test]
fn klm_matrices_are_hermitian() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<Vec<f64>> = (0..6).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    for id in CatalogId::WITNESSES {
        let w = klm_matrix(cat(id).function(), &pts, nc_klm_spec(&p).unwrap(), &form(&p)).unwrap();
        let m = w.matrix.to_cmat();
        assert!(crate::linalg::hermitian_residual(&m) < 1e-12, "{id}");
    }
}

#[test]
fn lambda_at_tilde_parameters_is_scaled_inverse_form() {
    let p = NCParams::d2(0.9, 0.4, 0.7).unwrap();
    let KlmSpec::Nc { alpha, beta, gamma } = nc_klm_spec(&p).unwrap() else { panic!() };
    let diff = lambda_matrix(alpha, beta, gamma) - form(&p).omega_inv() * p.hbar();
    assert!(diff.abs().max() < 1e-12);
    let comm = lambda_matrix(0.7, 0.0, 0.0) + j_matrix(2) * 0.7;
    assert!(comm.abs().max() == 0.0);
}

#[test]
fn wigner_measures_pass_klm_batteries() {
    let p = params();
    let spec = KlmSpec::Commutative { alpha: p.hbar() };
    for f in [cat(CatalogId::F5), ground_state(1.0, &p)] {
        let bats = klm_batteries(f.function(), spec, &form(&p), 20, 6, 7).unwrap();
        assert!(bats.iter().all(|w| w.is_psd), "{}", f.provenance());
    }
    let bats = klm_batteries(cat(CatalogId::F6).function(), nc_klm_spec(&p).unwrap(), &form(&p), 20, 6, 7).unwrap();
    assert!(bats.iter().all(|w| w.is_psd));
}

#[test]
fn search_finds_witnesses_for_non_members() {
    let p = params();
    let cfg = SearchConfig { m_max: 6, ..Default::default() };
    let spec = KlmSpec::Commutative { alpha: p.hbar() };
    for id in [CatalogId::F3, CatalogId::F6] {
        let w = klm_search_violation(cat(id).function(), spec, &form(&p), &cfg).unwrap();
        let w = w.unwrap_or_else(|| panic!("no witness for {id}"));
        assert!(w.min_eigenvalue < -w.tolerance_used && w.points.len() <= 6);
        // The recorded matrix re-verifies independently.
        assert!(!hermitian_psd(&w.matrix.to_cmat(), None).unwrap().is_psd);
    }
}

#[test]
fn search_finds_nothing_for_ground_state() {
    let p = NCParams::commutative(1.0, 2).unwrap();
    let g = ground_state(1.0, &p);
    let cfg = SearchConfig { trials: 2000, ..Default::default() };
    let spec = KlmSpec::Commutative { alpha: 1.0 };
    assert!(klm_search_violation(g.function(), spec, &form(&p), &cfg).unwrap().is_none());
}

#[test]
fn search_is_reproducible() {
    let p = params();
    let cfg = SearchConfig { m_max: 6, ..Default::default() };
    let spec = KlmSpec::Commutative { alpha: 1.0 };
    let f = cat(CatalogId::F3);
    let a = klm_search_violation(f.function(), spec, &form(&p), &cfg).unwrap();
    let b = klm_search_violation(f.function(), spec, &form(&p), &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn opposite_spectrum_parameters_give_conjugate_matrices() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for id in [CatalogId::F1, CatalogId::F3, CatalogId::F6] {
        let f = cat(id);
        for spec in [KlmSpec::Commutative { alpha: 0.7 }, KlmSpec::Nc { alpha: 1.1, beta: 0.3, gamma: -0.4 }] {
            let pts: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            let neg: Vec<Vec<f64>> = pts.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
            let a = klm_matrix(f.function(), &pts, spec, &form(&p)).unwrap();
            let b = klm_matrix(f.function(), &neg, spec.negated(), &form(&p)).unwrap();
            let diff = a.matrix.to_cmat().map(|z| z.conj()) - b.matrix.to_cmat();
            assert!(crate::linalg::cmax_abs(&diff) < 1e-12);
            assert!((a.min_eigenvalue - b.min_eigenvalue).abs() < 1e-10);
            assert_eq!(a.is_psd, b.is_psd);
        }
    }
}

#[test]
fn sharp_map_examples() {
    let p = params();
    let (h, t, e, z) = (p.hbar(), p.theta(), p.eta(), p.zeta());
    let (a, b, g) = sharp_map(h, 0.0, 0.0, &p).unwrap();
    let s = (1.0 - z).powi(-2);
    assert!((a - s * h * (1.0 + z)).abs() < 1e-14 && (b - s * 2.0 * t).abs() < 1e-14 && (g - s * 2.0 * e).abs() < 1e-14);
    let (a, b, g) = sharp_map(h, t, e, &p).unwrap();
    let s = 1.0 / (1.0 - z);
    assert!((a - s * h).abs() < 1e-14 && (b - s * t).abs() < 1e-14 && (g - s * e).abs() < 1e-14);
}

#[test]
fn sharp_map_round_trip_and_negation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let p = NCParams::d2(1.2, 0.3, 0.8).unwrap();
    let mut n = 0;
    while n < 100 {
        let (a, b, g): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if (a * a - b * g).abs() < 1e-3 {
            continue;
        }
        n += 1;
        let (x, y, z) = sharp_map(a, b, g, &p).unwrap();
        let (a2, b2, g2) = sharp_inverse(x, y, z, &p).unwrap();
        assert!((a - a2).abs() < 1e-12 && (b - b2).abs() < 1e-12 && (g - g2).abs() < 1e-12);
        let (xn, yn, zn) = sharp_map(-a, -b, -g, &p).unwrap();
        assert!((xn + x).abs() < 1e-14 && (yn + y).abs() < 1e-14 && (zn + z).abs() < 1e-14);
    }
}

#[test]
fn zeta_prime_is_dimensionless() {
    let p = params();
    let KlmSpec::Nc { alpha, beta, gamma } = nc_klm_spec(&p).unwrap() else { panic!() };
    assert!((zeta_prime(alpha, beta, gamma).unwrap() - p.zeta()).abs() < 1e-14);
    assert!(zeta_prime(0.0, 1.0, 1.0).is_err());
}

#[test]
fn gaussian_state_spectrum_contains_the_interval() {
    let p = NCParams::commutative(1.0, 2).unwrap();
    let g = ground_state(1.0, &p);
    let cands: Vec<KlmSpec> = [1.0, -1.0, 0.5, -0.5, 0.0].map(|alpha| KlmSpec::Commutative { alpha }).to_vec();
    let cfg = ProbeConfig { search: SearchConfig { trials: 300, ..Default::default() }, ..Default::default() };
    for r in spectrum_probe(g.function(), &cands, &form(&p), &cfg).unwrap() {
        assert!(r.is_consistent(), "{r:?}");
    }
}

#[test]
fn excited_state_refutes_half_hbar() {
    let p = params();
    let cands = [KlmSpec::Commutative { alpha: 0.5 }, KlmSpec::Commutative { alpha: 1.0 }];
    let r = spectrum_probe(cat(CatalogId::F1).function(), &cands, &form(&p), &ProbeConfig::default()).unwrap();
    assert!(!r[0].is_consistent());
    assert!(r[1].is_consistent());
}

#[test]
fn smeared_product_state_is_consistent_at_both_parameters() {
    let p = params();
    let f7 = cat(CatalogId::F7);
    let KlmSpec::Nc { alpha, beta, gamma } = nc_klm_spec(&p).unwrap() else { panic!() };
    let (a2, b2, g2) = sharp_map(p.hbar(), 0.0, 0.0, &p).unwrap();
    let cands = [KlmSpec::Nc { alpha, beta, gamma }, KlmSpec::Nc { alpha: a2, beta: b2, gamma: g2 }];
    let cfg = ProbeConfig { search: SearchConfig { trials: 200, ..Default::default() }, ..Default::default() };
    for r in spectrum_probe(f7.function(), &cands, &form(&p), &cfg).unwrap() {
        assert!(r.is_consistent(), "{r:?}");
    }
}

#[test]
fn catalog_regions_are_exact() {
    let expected = [Region::Omega1, Region::Omega2, Region::Omega3, Region::Omega4, Region::Omega5, Region::Omega6, Region::Omega7];
    for (id, want) in CatalogId::WITNESSES.into_iter().zip(expected) {
        let r = classify(&cat(id), &Budget::default()).unwrap();
        assert_eq!(r.region, Some(want), "{id}");
        assert_eq!(r.certainty, Some(Certainty::Exact), "{id}");
        assert!(r.klm.is_empty(), "{id} needed a search");
    }
}

#[test]
fn catalog_members_survive_klm_and_purity() {
    let p = params();
    let cfg = SearchConfig { trials: 100, ..Default::default() };
    for id in CatalogId::WITNESSES {
        let f = cat(id);
        let r = classify(&f, &Budget::default()).unwrap();
        if r.flag(MeasureSet::Wigner) == Flag::Member {
            assert!(!r.purity.excludes_wigner());
            let w = klm_search_violation(f.function(), KlmSpec::Commutative { alpha: 1.0 }, &form(&p), &cfg).unwrap();
            assert!(w.is_none(), "{id}");
        }
        if r.flag(MeasureSet::Ncwm) == Flag::Member {
            assert!(!r.purity.excludes_ncwm() && r.uncertainty.is_psd, "{id}");
            let w = klm_search_violation(f.function(), nc_klm_spec(&p).unwrap(), &form(&p), &cfg).unwrap();
            assert!(w.is_none(), "{id}");
        }
    }
}

#[test]
fn commutative_ground_state_is_in_all_sets() {
    let p = NCParams::commutative(1.0, 2).unwrap();
    let r = classify(&ground_state(1.0, &p), &Budget::default()).unwrap();
    assert_eq!(r.flag(MeasureSet::Wigner), Flag::Member);
    assert_eq!(r.flag(MeasureSet::Ncwm), r.flag(MeasureSet::Wigner));
    assert_eq!(r.flag(MeasureSet::Liouville), Flag::Member);
    assert_eq!(r.region, Some(Region::Omega7));
}

#[test]
fn unnormalized_input_rejected() {
    let g = GaussPoly::normalized_gaussian(&Mat::identity(4, 4), &[0.0; 4]).unwrap().scale_real(2.0);
    assert!(matches!(LabeledMeasure::unlabeled(g, params()), Err(Error::NotNormalized(_))));
}

#[test]
fn unclaimed_mixture_gets_evidence_only_region() {
    let p = params();
    let f3 = cat(CatalogId::F3);
    let g = GaussPoly::normalized_gaussian(&(Mat::identity(4, 4) * 0.4), &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let mix = GaussSum::new(vec![f3.single().unwrap().scale_real(0.5), g.scale_real(0.5)]).unwrap();
    let f = LabeledMeasure::unlabeled(mix, p).unwrap();
    let budget = Budget { search: SearchConfig { trials: 100, ..Default::default() }, ..Default::default() };
    let r = classify(&f, &budget).unwrap();
    assert_eq!(r.flag(MeasureSet::Liouville), Flag::Consistent);
    assert!(r.certainty != Some(Certainty::Exact));
}

#[test]
fn contradicting_claim_is_reported() {
    let p = params();
    let f3 = cat(CatalogId::F3);
    let bogus = LabeledMeasure::new(
        f3.function().clone(),
        "bogus",
        p,
        vec![crate::measures::Claim::new(crate::measures::Statement::Member(MeasureSet::Wigner), "asserted")],
    )
    .unwrap();
    assert!(matches!(classify(&bogus, &Budget::default()), Err(Error::InternalInconsistency(_))));
}

#[test]
fn report_json_is_stable() {
    let r = classify(&cat(CatalogId::F4), &Budget::default()).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["region"], "Omega4");
    assert_eq!(v["certainty"], "exact");
    assert!(v["negativity"]["value"].as_f64().unwrap() < 0.0);
    let a = serde_json::to_string(&r).unwrap();
    let b = serde_json::to_string(&classify(&cat(CatalogId::F4), &Budget::default()).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn inverse_of_forms_used_consistently() {
    // C⁻¹ of the product state equals twice its covariance.
    let f6 = cat(CatalogId::F6);
    let c = quad_form(&f6);
    let sigma = f6.function().moments().unwrap().covariance_matrix();
    assert!((inverse(&c).unwrap() - sigma * 2.0).abs().max() < 1e-12);
}
