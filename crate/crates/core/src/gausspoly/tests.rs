use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::{max_abs, Mat};
use crate::symplectic::{build_omega, NCParams};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Mat {
    let b = Mat::from_fn(n, n, |_, _| rng.gen_range(-0.6..0.6));
    b.transpose() * b + Mat::identity(n, n) * 0.4
}

/// Random complex-valued member of the class with a degree ≤ 2 prefactor.
fn random_fn(n: usize, rng: &mut ChaCha8Rng) -> GaussPoly {
    let g = random_spd(n, rng);
    let gi = Mat::from_fn(n, n, |_, _| rng.gen_range(-0.2..0.2));
    let gc = CMat::from_fn(n, n, |i, j| Complex64::new(g[(i, j)], 0.5 * (gi[(i, j)] + gi[(j, i)])));
    let h = CVec::from_fn(n, |_, _| Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
    let mut poly = Poly::constant(n, Complex64::new(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5)));
    for i in 0..n {
        let mut e = vec![0u8; n];
        e[i] = 1;
        poly.add_term(e.clone(), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        e[(i + 1) % n] += 1;
        poly.add_term(e, Complex64::new(rng.gen_range(-1.0..1.0), 0.0));
    }
    GaussPoly::from_parts(gc, h, c(rng.gen_range(-0.5..0.5)), poly).unwrap()
}

fn riemann_2d(f: impl Fn(&[f64]) -> Complex64, half: f64, npts: usize) -> Complex64 {
    let dx = 2.0 * half / npts as f64;
    let mut acc = Complex64::default();
    for i in 0..npts {
        for j in 0..npts {
            let z = [-half + (i as f64 + 0.5) * dx, -half + (j as f64 + 0.5) * dx];
            acc += f(&z);
        }
    }
    acc * dx * dx
}

#[test]
fn standard_gaussian_at_origin() {
    let f = GaussPoly::normalized_gaussian(&Mat::identity(2, 2), &[0.0, 0.0]).unwrap();
    assert!((f.eval(&[0.0, 0.0]).re - 1.0 / PI).abs() < 1e-15);
    assert!((f.integrate().unwrap() - c(1.0)).norm() < 1e-14);
}

#[test]
fn second_moment_of_isotropic_gaussian() {
    let sigma2 = 0.37;
    let g = Mat::identity(2, 2) / (2.0 * sigma2);
    let f = GaussPoly::normalized_gaussian(&g, &[0.0, 0.0]).unwrap();
    let z1sq = f.multiply_poly(&Poly::monomial(vec![2, 0], c(1.0))).unwrap();
    assert!((z1sq.integrate().unwrap().re - sigma2).abs() < 1e-14);
}

#[test]
fn integral_matches_quadrature_for_complex_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let f = random_fn(2, &mut rng);
        let exact = f.integrate().unwrap();
        let quad = riemann_2d(|z| f.eval(z), 12.0, 400);
        assert!((exact - quad).norm() < 1e-10 * (1.0 + exact.norm()), "{exact} vs {quad}");
    }
}

#[test]
fn marginal_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = random_fn(3, &mut rng);
    let m = f.marginal(&[2]).unwrap();
    for x in [-0.7, 0.1, 1.3] {
        let quad = riemann_2d(|z| f.eval(&[z[0], z[1], x]), 12.0, 400);
        assert!((m.eval(&[x]) - quad).norm() < 1e-10);
    }
}

#[test]
fn marginal_over_everything_is_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_fn(4, &mut rng);
    let m = f.marginal(&[]).unwrap();
    let total = m.poly().coefficient(&[]) * m.c().exp();
    assert!((total - f.integrate().unwrap()).norm() < 1e-10 * total.norm());
}

#[test]
fn kept_variable_order_is_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random_fn(3, &mut rng);
    let a = f.marginal(&[0, 2]).unwrap();
    let b = f.marginal(&[2, 0]).unwrap();
    assert!((a.eval(&[0.3, -0.4]) - b.eval(&[-0.4, 0.3])).norm() < 1e-13);
}

#[test]
fn gaussian_product_adds_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (g1, g2) = (random_spd(2, &mut rng), random_spd(2, &mut rng));
    let a = GaussPoly::gaussian(&g1, &[0.0, 0.0], 1.0).unwrap();
    let b = GaussPoly::gaussian(&g2, &[0.0, 0.0], 1.0).unwrap();
    let p = a.multiply(&b).unwrap();
    assert!(max_abs(&(p.g().map(|x| x.re) - (&g1 + &g2))) < 1e-15);
    let one = GaussPoly::one(2);
    let same = a.multiply(&one).unwrap();
    assert!((same.eval(&[0.2, 0.9]) - a.eval(&[0.2, 0.9])).norm() < 1e-15);
}

#[test]
fn pullback_jacobian_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let f = random_fn(4, &mut rng);
    let base = f.integrate().unwrap();
    for _ in 0..50 {
        let m = Mat::from_fn(4, 4, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.4..0.4));
        let shift: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = f.affine_pullback(&m, &shift).unwrap();
        let want = base / m.determinant().abs();
        assert!((g.integrate().unwrap() - want).norm() < 1e-9 * want.norm());
        let z = [0.1, -0.2, 0.3, 0.4];
        let mz: Vec<f64> = (0..4).map(|i| (0..4).map(|j| m[(i, j)] * z[j]).sum::<f64>() + shift[i]).collect();
        assert!((g.eval(&z) - f.eval(&mz)).norm() < 1e-12 * (1.0 + f.eval(&mz).norm()));
    }
}

#[test]
fn singular_pullback_rejected() {
    let f = GaussPoly::normalized_gaussian(&Mat::identity(2, 2), &[0.0, 0.0]).unwrap();
    let m = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
    assert!(matches!(f.affine_pullback(&m, &[0.0, 0.0]), Err(Error::SingularMatrix)));
}

#[test]
fn nonintegrable_is_reported() {
    let f = GaussPoly::one(2);
    assert!(matches!(f.integrate(), Err(Error::NotIntegrable(_))));
}

#[test]
fn gaussian_convolution_adds_covariances_and_centers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (s1, s2) = (random_spd(2, &mut rng), random_spd(2, &mut rng));
    let g = |s: &Mat, z0: &[f64]| GaussPoly::normalized_gaussian(&(crate::linalg::inverse(s).unwrap() * 0.5), z0).unwrap();
    let a = g(&s1, &[0.5, -1.0]);
    let b = g(&s2, &[0.25, 2.0]);
    let conv = a.convolve(&b).unwrap();
    let want = g(&(&s1 + &s2), &[0.75, 1.0]);
    for z in [[0.0, 0.0], [1.0, 0.5], [-0.3, 2.2]] {
        assert!((conv.eval(&z) - want.eval(&z)).norm() < 1e-13);
    }
    let m = conv.moments().unwrap();
    assert!((m.mean[0] - 0.75).abs() < 1e-12 && (m.mean[1] - 1.0).abs() < 1e-12);
    assert!(max_abs(&(m.covariance_matrix() - (&s1 + &s2))) < 1e-12);
}

#[test]
fn convolution_matches_quadrature_with_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (a, b) = (random_fn(2, &mut rng), random_fn(2, &mut rng));
    let conv = a.convolve(&b).unwrap();
    let z = [0.4, -0.3];
    let quad = riemann_2d(|w| a.eval(&[z[0] - w[0], z[1] - w[1]]) * b.eval(w), 12.0, 400);
    assert!((conv.eval(&z) - quad).norm() < 1e-10 * (1.0 + quad.norm()));
}

#[test]
fn shifted_gaussian_mean() {
    let f = GaussPoly::normalized_gaussian(&Mat::identity(4, 4), &[1.0, -2.0, 0.5, 3.0]).unwrap();
    let m = f.moments().unwrap();
    for (a, b) in m.mean.iter().zip([1.0, -2.0, 0.5, 3.0]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((m.norm - 1.0).abs() < 1e-12);
    assert!(max_abs(&(m.covariance_matrix() - Mat::identity(4, 4) * 0.5)) < 1e-12);
}

fn forms() -> Vec<FtKind> {
    let nc = build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap();
    vec![FtKind::Commutative, FtKind::Noncommutative(nc)]
}

#[test]
fn transform_at_origin_is_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random_fn(4, &mut rng);
    for kind in forms() {
        let ft = f.symplectic_ft(&kind).unwrap();
        assert!((ft.eval(&[0.0; 4]) - f.integrate().unwrap()).norm() < 1e-12);
    }
}

#[test]
fn transform_matches_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let f = random_fn(2, &mut rng);
    let ft = f.symplectic_ft(&FtKind::Commutative).unwrap();
    let k = FtKind::Commutative.kernel(2);
    for a in [[0.3, -0.8], [1.1, 0.4]] {
        let quad = riemann_2d(
            |z| {
                let phase = (0..2).map(|i| (0..2).map(|j| a[i] * k[(i, j)] * z[j]).sum::<f64>()).sum::<f64>();
                f.eval(z) * Complex64::new(0.0, phase).exp()
            },
            12.0,
            400,
        );
        assert!((ft.eval(&a) - quad).norm() < 1e-10);
    }
}

#[test]
fn transform_turns_convolution_into_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (f, g) = (random_fn(4, &mut rng), random_fn(4, &mut rng));
    let conv = f.convolve(&g).unwrap();
    for kind in forms() {
        let (tf, tg, tc) = (f.symplectic_ft(&kind).unwrap(), g.symplectic_ft(&kind).unwrap(), conv.symplectic_ft(&kind).unwrap());
        for _ in 0..50 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let want = tf.eval(&a) * tg.eval(&a);
            assert!((tc.eval(&a) - want).norm() < 1e-9 * (1.0 + want.norm()));
        }
    }
}

#[test]
fn transform_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = random_fn(4, &mut rng);
    for kind in forms() {
        let back = f.symplectic_ft(&kind).unwrap().inverse_symplectic_ft(&kind).unwrap();
        for _ in 0..50 {
            let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            assert!((back.eval(&z) - f.eval(&z)).norm() < 1e-9 * (1.0 + f.eval(&z).norm()));
        }
    }
}

#[test]
fn real_function_transform_is_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let g = random_spd(4, &mut rng);
    let f = GaussPoly::gaussian(&g, &[0.3, -0.2, 0.1, 0.5], 1.0)
        .unwrap()
        .multiply_poly(&Poly::monomial(vec![1, 1, 0, 0], c(1.0)).add(&Poly::constant(4, c(0.5))))
        .unwrap()
        .tag_real()
        .unwrap();
    for kind in forms() {
        let ft = f.symplectic_ft(&kind).unwrap();
        for _ in 0..20 {
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            assert!((ft.eval(&neg) - ft.eval(&a).conj()).norm() < 1e-12);
        }
    }
}

#[test]
fn descriptor_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let f = random_fn(4, &mut rng);
    let d = Descriptor::from_gausspoly(&f).unwrap();
    let json = serde_json::to_string(&d).unwrap();
    let back: Descriptor = serde_json::from_str(&json).unwrap();
    let g = back.to_gausspoly().unwrap();
    let z = [0.1, 0.2, -0.3, 0.4];
    assert!((g.eval(&z) - f.eval(&z)).norm() < 1e-13);
    assert!(!g.is_real_tagged());
}

#[test]
fn descriptor_of_real_gaussian_is_tagged_real() {
    let f = GaussPoly::normalized_gaussian(&Mat::identity(2, 2), &[0.5, 0.0]).unwrap();
    let d = Descriptor::from_gausspoly(&f).unwrap();
    assert!((d.center[0] - 0.5).abs() < 1e-15);
    assert!(d.to_gausspoly().unwrap().is_real_tagged());
}

#[test]
fn derivative_matches_finite_difference() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let f = random_fn(3, &mut rng);
    let z = [0.2, -0.1, 0.4];
    for i in 0..3 {
        let d = f.derivative(i).unwrap().eval(&z);
        let eps = 1e-5;
        let mut zp = z;
        let mut zm = z;
        zp[i] += eps;
        zm[i] -= eps;
        let fd = (f.eval(&zp) - f.eval(&zm)) / (2.0 * eps);
        assert!((d - fd).norm() < 1e-8);
    }
}

#[test]
fn degree_overflow_on_product() {
    let mut e = vec![0u8; 2];
    e[0] = 5;
    let f = GaussPoly::normalized_gaussian(&Mat::identity(2, 2), &[0.0, 0.0]).unwrap().multiply_poly(&Poly::monomial(e, c(1.0))).unwrap();
    assert!(matches!(f.multiply(&f), Err(Error::DegreeOverflow(10))));
}

mod star_tests {
    use super::*;

    fn ground_state(hbar: f64) -> GaussPoly {
        GaussPoly::normalized_gaussian(&(Mat::identity(4, 4) / hbar), &[0.0; 4]).unwrap()
    }

    #[test]
    fn unit_of_the_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let f = random_fn(4, &mut rng);
        let k = StarKernel::Full(build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap());
        let one = GaussPoly::one(4);
        let z = [0.3, 0.1, -0.5, 0.2];
        for g in [star_exact(&f, &one, &k).unwrap(), star_exact(&one, &f, &k).unwrap()] {
            assert!((g.eval(&z) - f.eval(&z)).norm() < 1e-14);
        }
    }

    #[test]
    fn pure_ground_state_is_idempotent() {
        let hbar = 0.7;
        let f = ground_state(hbar);
        let ff = gaussian_star_gaussian(&f, &f, &StarKernel::Moyal { hbar }).unwrap();
        let factor = (2.0 * PI * hbar).powi(-2);
        for z in [[0.0; 4], [0.3, -0.2, 0.5, 0.1]] {
            assert!((ff.eval(&z) - f.eval(&z) * factor).norm() < 1e-13);
        }
    }

    #[test]
    fn linear_symbol_series_matches_formula() {
        // z_i ⋆ f = z_i f + (i/2) P_{iβ} ∂_β f.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = random_fn(4, &mut rng);
        let form = build_omega(&NCParams::d2(1.0, 0.5, 0.3).unwrap()).unwrap();
        let p = form.poisson();
        let k = StarKernel::Full(form);
        let z = [0.2, -0.4, 0.1, 0.6];
        for i in 0..4 {
            let xi = GaussPoly::polynomial(Poly::var(4, i));
            let lhs = star_exact(&xi, &f, &k).unwrap().eval(&z);
            let mut rhs = f.eval(&z) * z[i];
            for b in 0..4 {
                rhs += 0.5 * I * p[(i, b)] * f.derivative(b).unwrap().eval(&z);
            }
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn series_and_fourier_routes_associate() {
        // (x ⋆ a) ⋆ b uses the Fourier route on a polynomial-weighted Gaussian;
        // x ⋆ (a ⋆ b) uses the series on the Gaussian result.
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let k = StarKernel::Full(build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap());
        let a = GaussPoly::gaussian(&random_spd(4, &mut rng), &[0.1, 0.0, -0.2, 0.3], 1.0).unwrap();
        let b = GaussPoly::gaussian(&random_spd(4, &mut rng), &[0.0, 0.4, 0.1, -0.1], 1.0).unwrap();
        let x = GaussPoly::polynomial(Poly::var(4, 1).add(&Poly::var(4, 2)));
        let left = star_exact(&star_exact(&x, &a, &k).unwrap(), &b, &k).unwrap();
        let right = star_exact(&x, &star_exact(&a, &b, &k).unwrap(), &k).unwrap();
        for z in [[0.0; 4], [0.5, -0.3, 0.2, 0.7]] {
            assert!((left.eval(&z) - right.eval(&z)).norm() < 1e-12 * (1.0 + left.eval(&z).norm()));
        }
    }

    #[test]
    fn fourier_route_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let k = StarKernel::Full(build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap());
        let fs: Vec<GaussPoly> = (0..3).map(|_| random_fn(4, &mut rng)).collect();
        let left = star_exact(&star_exact(&fs[0], &fs[1], &k).unwrap(), &fs[2], &k).unwrap();
        let right = star_exact(&fs[0], &star_exact(&fs[1], &fs[2], &k).unwrap(), &k).unwrap();
        let z = [0.1, 0.2, 0.3, -0.4];
        assert!((left.eval(&z) - right.eval(&z)).norm() < 1e-11 * (1.0 + left.eval(&z).norm()));
    }

    #[test]
    fn commuting_limit_gives_poisson_bracket() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let omega = build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap().omega().clone();
        let a = GaussPoly::gaussian(&random_spd(4, &mut rng), &[0.1, 0.0, -0.2, 0.3], 1.0).unwrap();
        let b = GaussPoly::gaussian(&random_spd(4, &mut rng), &[0.0, 0.4, 0.1, -0.1], 1.0).unwrap();
        let z = [0.2, -0.1, 0.3, 0.05];
        let mut bracket = Complex64::default();
        for i in 0..4 {
            for j in 0..4 {
                bracket += a.derivative(i).unwrap().eval(&z) * omega[(i, j)] * b.derivative(j).unwrap().eval(&z);
            }
        }
        let want = 0.5 * I * bracket;
        let diff = |hbar: f64| {
            let ab = star_exact(&a, &b, &StarKernel::Custom(&omega * hbar)).unwrap();
            (ab.eval(&z) - a.eval(&z) * b.eval(&z)) / hbar
        };
        let (d1, d2) = (diff(1e-3), diff(5e-4));
        // Richardson step removes the O(ħ) correction.
        let extrap = d2 * 2.0 - d1;
        assert!((extrap - want).norm() < 1e-6 * (1.0 + want.norm()), "{extrap} vs {want}");
    }

    #[test]
    fn swapping_operands_flips_the_deformation() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let (a, b) = (random_fn(4, &mut rng), random_fn(4, &mut rng));
        let p = build_omega(&NCParams::d2(1.0, 0.5, 0.5).unwrap()).unwrap().poisson();
        let ab = star_exact(&a, &b, &StarKernel::Custom(p.clone())).unwrap();
        let ba = star_exact(&b, &a, &StarKernel::Custom(-p)).unwrap();
        let z = [0.3, 0.3, -0.1, 0.2];
        assert!((ab.eval(&z) - ba.eval(&z)).norm() < 1e-12 * (1.0 + ab.eval(&z).norm()));
    }

    #[test]
    fn higher_degree_operand_rejected_by_gaussian_wrapper() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        let f = random_fn(4, &mut rng);
        assert!(matches!(gaussian_star_gaussian(&f, &f, &StarKernel::Moyal { hbar: 1.0 }), Err(Error::NotGaussian(2))));
    }

    #[test]
    fn degenerate_theta_kernel_rejected() {
        assert!(matches!(StarKernel::Theta { theta: 0.0 }.poisson(4), Err(Error::DegenerateKernel(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_is_linear(seed in any::<u64>(), wa in -2.0..2.0f64, wb in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_fn(4, &mut rng), random_fn(4, &mut rng));
        let sum = GaussSum::new(vec![a.scale_real(wa), b.scale_real(wb)]).unwrap();
        let want = a.integrate().unwrap() * wa + b.integrate().unwrap() * wb;
        prop_assert!((sum.integrate().unwrap() - want).norm() < 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn marginal_and_transform_are_linear(seed in any::<u64>(), wa in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_fn(4, &mut rng), random_fn(4, &mut rng));
        let sum = GaussSum::new(vec![a.scale_real(wa), b.clone()]).unwrap();
        let z = [0.3, -0.6];
        let m = sum.marginal(&[1, 3]).unwrap().eval(&z);
        let want = a.marginal(&[1, 3]).unwrap().eval(&z) * wa + b.marginal(&[1, 3]).unwrap().eval(&z);
        prop_assert!((m - want).norm() < 1e-10 * (1.0 + want.norm()));
        let k = FtKind::Commutative;
        let w = [0.2, 0.1, -0.4, 0.3];
        let t = sum.symplectic_ft(&k).unwrap().eval(&w);
        let want = a.symplectic_ft(&k).unwrap().eval(&w) * wa + b.symplectic_ft(&k).unwrap().eval(&w);
        prop_assert!((t - want).norm() < 1e-10 * (1.0 + want.norm()));
    }

    #[test]
    fn pullback_preserves_values(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_fn(2, &mut rng);
        let m = Mat::from_fn(2, 2, |i, j| if i == j { 1.5 } else { 0.0 } + rng.gen_range(-0.5..0.5));
        let g = f.affine_pullback(&m, &[0.1, -0.2]).unwrap();
        let want = f.integrate().unwrap() / m.determinant().abs();
        prop_assert!((g.integrate().unwrap() - want).norm() < 1e-10 * (1.0 + want.norm()));
    }
}
