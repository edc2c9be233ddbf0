//! Extended symplectic forms, Pfaffians, Darboux maps and the group Sp_Ω.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{antisymmetry_residual, e2, expm, inverse, j_matrix, max_abs, Mat};

/// Relative tolerance for matrix identities.
pub const MATRIX_TOL: f64 = 1e-10;

/// Deformation data (ħ, Θ, N). Θ and N are stored by their strictly upper
/// triangular entries, row by row, so antisymmetry holds by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct NCParams {
    hbar: f64,
    d: usize,
    theta: Vec<f64>,
    eta: Vec<f64>,
}

fn upper_len(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

fn antisym_from_upper(d: usize, upper: &[f64]) -> Mat {
    let mut m = Mat::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            m[(i, j)] = upper[k];
            m[(j, i)] = -upper[k];
            k += 1;
        }
    }
    m
}

impl NCParams {
    pub fn new(hbar: f64, d: usize, theta: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("d must be positive".into()));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidInput(format!("hbar must be positive, got {hbar}")));
        }
        let len = upper_len(d);
        if theta.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: theta.len() });
        }
        if eta.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: eta.len() });
        }
        if theta.iter().chain(&eta).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite deformation parameter".into()));
        }
        for t in &theta {
            for e in &eta {
                if t * e >= hbar * hbar {
                    return Err(Error::DegenerateForm(format!("θη < ħ² violated ({t}·{e} ≥ {})", hbar * hbar)));
                }
            }
        }
        Ok(Self { hbar, d, theta, eta })
    }

    /// Two degrees of freedom with Θ = θE and N = ηE.
    pub fn d2(hbar: f64, theta: f64, eta: f64) -> Result<Self> {
        Self::new(hbar, 2, vec![theta], vec![eta])
    }

    pub fn commutative(hbar: f64, d: usize) -> Result<Self> {
        Self::new(hbar, d, vec![0.0; upper_len(d)], vec![0.0; upper_len(d)])
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn theta_upper(&self) -> &[f64] {
        &self.theta
    }

    pub fn eta_upper(&self) -> &[f64] {
        &self.eta
    }

    /// θ for d = 2 (zero when d = 1).
    pub fn theta(&self) -> f64 {
        self.theta.first().copied().unwrap_or(0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta.first().copied().unwrap_or(0.0)
    }

    /// ζ = θη/ħ² (meaningful for d = 2).
    pub fn zeta(&self) -> f64 {
        self.theta() * self.eta() / (self.hbar * self.hbar)
    }

    pub fn theta_matrix(&self) -> Mat {
        antisym_from_upper(self.d, &self.theta)
    }

    pub fn eta_matrix(&self) -> Mat {
        antisym_from_upper(self.d, &self.eta)
    }

    pub fn is_commutative(&self) -> bool {
        self.theta.iter().chain(&self.eta).all(|x| *x == 0.0)
    }

    pub fn require_d2(&self) -> Result<()> {
        if self.d != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.d });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Upper {
    Scalar(f64),
    List(Vec<f64>),
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    hbar: f64,
    theta: Upper,
    eta: Upper,
    d: usize,
}

impl Serialize for NCParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let wrap = |v: &Vec<f64>| {
            if self.d == 2 {
                Upper::Scalar(v[0])
            } else {
                Upper::List(v.clone())
            }
        };
        ParamsRepr { hbar: self.hbar, theta: wrap(&self.theta), eta: wrap(&self.eta), d: self.d }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NCParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = ParamsRepr::deserialize(de)?;
        let unwrap = |u: Upper| match u {
            Upper::Scalar(x) => vec![x],
            Upper::List(v) => v,
        };
        NCParams::new(r.hbar, r.d, unwrap(r.theta), unwrap(r.eta)).map_err(serde::de::Error::custom)
    }
}

/// Ω = ħ⁻¹[[Θ, ħI], [−ħI, N]] together with its Pfaffian.
#[derive(Clone, Debug)]
pub struct ExtendedSymplecticForm {
    omega: Mat,
    params: NCParams,
    pf: f64,
}

pub fn build_omega(params: &NCParams) -> Result<ExtendedSymplecticForm> {
    let d = params.d();
    let h = params.hbar();
    let mut omega = j_matrix(d);
    let (t, n) = (params.theta_matrix(), params.eta_matrix());
    for i in 0..d {
        for j in 0..d {
            omega[(i, j)] = t[(i, j)] / h;
            omega[(d + i, d + j)] = n[(i, j)] / h;
        }
    }
    let pf = pfaffian(&omega)?;
    let sign = if (d * (d - 1) / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    if !(pf * sign > 1e-12) {
        // Pairwise products below ħ² do not exclude Pf(Ω) reaching zero for d ≥ 3.
        return Err(Error::DegenerateForm(format!("Pf(Ω) = {pf:.6e} is not of sign (−1)^(d(d−1)/2)")));
    }
    Ok(ExtendedSymplecticForm { omega, params: params.clone(), pf })
}

impl ExtendedSymplecticForm {
    pub fn new(params: &NCParams) -> Result<Self> {
        build_omega(params)
    }

    pub fn commutative(hbar: f64, d: usize) -> Result<Self> {
        build_omega(&NCParams::commutative(hbar, d)?)
    }

    pub fn omega(&self) -> &Mat {
        &self.omega
    }

    pub fn params(&self) -> &NCParams {
        &self.params
    }

    pub fn pf(&self) -> f64 {
        self.pf
    }

    pub fn dim(&self) -> usize {
        2 * self.params.d()
    }

    pub fn omega_inv(&self) -> Mat {
        inverse(&self.omega).expect("Ω is non-degenerate by construction")
    }

    /// Poisson tensor ħΩ used by the star product.
    pub fn poisson(&self) -> Mat {
        &self.omega * self.params.hbar()
    }

    pub fn tolerance(&self) -> f64 {
        MATRIX_TOL * (1.0 + max_abs(&self.omega))
    }
}

impl Serialize for ExtendedSymplecticForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            params: &'a NCParams,
            omega: Vec<f64>,
            pf: f64,
        }
        Repr { params: &self.params, omega: row_major(&self.omega), pf: self.pf }.serialize(s)
    }
}

pub fn row_major(m: &Mat) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

pub fn from_row_major(n: usize, v: &[f64]) -> Result<Mat> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: v.len() });
    }
    Ok(Mat::from_row_slice(n, n, v))
}

fn check_pfaffian_input(a: &Mat) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let res = antisymmetry_residual(a);
    if res > MATRIX_TOL * (1.0 + max_abs(a)) {
        return Err(Error::NotAntisymmetric(res));
    }
    Ok(())
}

/// Pfaffian of an antisymmetric matrix: row expansion up to 6×6,
/// Householder skew tridiagonalization beyond.
pub fn pfaffian(a: &Mat) -> Result<f64> {
    check_pfaffian_input(a)?;
    if a.nrows() <= 6 {
        Ok(pfaffian_expansion(a))
    } else {
        Ok(pfaffian_householder(a))
    }
}

pub fn pfaffian_expansion(a: &Mat) -> f64 {
    let idx: Vec<usize> = (0..a.nrows()).collect();
    expand(a, &idx)
}

fn expand(a: &Mat, idx: &[usize]) -> f64 {
    match idx.len() {
        0 => 1.0,
        2 => a[(idx[0], idx[1])],
        _ => {
            let mut total = 0.0;
            for j in 1..idx.len() {
                let x = a[(idx[0], idx[j])];
                if x == 0.0 {
                    continue;
                }
                let rest: Vec<usize> = idx.iter().enumerate().filter(|(k, _)| *k != 0 && *k != j).map(|(_, v)| *v).collect();
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                total += sign * x * expand(a, &rest);
            }
            total
        }
    }
}

pub fn pfaffian_householder(a: &Mat) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 1.0;
    }
    let mut a = a.clone();
    let mut pf = 1.0;
    for i in 0..n - 2 {
        let x: Vec<f64> = (i + 1..n).map(|r| a[(r, i)]).collect();
        let sigma: f64 = x[1..].iter().map(|v| v * v).sum();
        if sigma == 0.0 {
            if i % 2 == 0 {
                pf *= -x[0];
            }
            continue;
        }
        let norm_x = (x[0] * x[0] + sigma).sqrt();
        let mut v = x.clone();
        let alpha = if x[0] <= 0.0 {
            v[0] -= norm_x;
            norm_x
        } else {
            v[0] += norm_x;
            -norm_x
        };
        let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        v.iter_mut().for_each(|t| *t /= vn);
        a[(i + 1, i)] = alpha;
        a[(i, i + 1)] = -alpha;
        for r in i + 2..n {
            a[(r, i)] = 0.0;
            a[(i, r)] = 0.0;
        }
        let m = n - i - 1;
        let w: Vec<f64> = (0..m).map(|r| 2.0 * (0..m).map(|c| a[(i + 1 + r, i + 1 + c)] * v[c]).sum::<f64>()).collect();
        for r in 0..m {
            for c in 0..m {
                a[(i + 1 + r, i + 1 + c)] += v[r] * w[c] - w[r] * v[c];
            }
        }
        pf *= -1.0;
        if i % 2 == 0 {
            pf *= -alpha;
        }
    }
    pf * a[(n - 2, n - 1)]
}

/// A Darboux map S with S J Sᵀ = Ω.
#[derive(Clone, Debug)]
pub struct DarbouxMap {
    s: Mat,
    s_inv: Mat,
    det: f64,
    form: ExtendedSymplecticForm,
    lambda: Option<f64>,
    mu: Option<f64>,
}

impl DarbouxMap {
    /// Wraps an arbitrary matrix after checking it is a Darboux map for `form`.
    pub fn from_matrix(s: Mat, form: &ExtendedSymplecticForm) -> Result<Self> {
        let check = verify_darboux(&s, form)?;
        if !check.ok {
            return Err(Error::DarbouxMismatch);
        }
        let s_inv = inverse(&s)?;
        let det = s.determinant();
        Ok(Self { s, s_inv, det, form: form.clone(), lambda: None, mu: None })
    }

    pub fn s(&self) -> &Mat {
        &self.s
    }

    pub fn s_inv(&self) -> &Mat {
        &self.s_inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn form(&self) -> &ExtendedSymplecticForm {
        &self.form
    }

    pub fn lambda(&self) -> Option<f64> {
        self.lambda
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    /// Right-multiplies by a symplectic matrix, which yields another Darboux map.
    pub fn compose_symplectic(&self, l: &Mat) -> Result<Self> {
        Self::from_matrix(&self.s * l, &self.form)
    }
}

impl Serialize for DarbouxMap {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            hbar: f64,
            theta: f64,
            eta: f64,
            d: usize,
            lambda: Option<f64>,
            mu: Option<f64>,
            #[serde(rename = "S")]
            s: Vec<f64>,
            #[serde(rename = "S_inv")]
            s_inv: Vec<f64>,
            det: f64,
            pf: f64,
        }
        let p = self.form.params();
        Repr {
            hbar: p.hbar(),
            theta: p.theta(),
            eta: p.eta(),
            d: p.d(),
            lambda: self.lambda,
            mu: self.mu,
            s: row_major(&self.s),
            s_inv: row_major(&self.s_inv),
            det: self.det,
            pf: self.form.pf(),
        }
        .serialize(ser)
    }
}

/// The standard d = 2 family S = [[λI, −(θ/2λħ)E], [(η/2μħ)E, μI]].
pub fn standard_darboux(hbar: f64, theta: f64, eta: f64, lambda: f64) -> Result<DarbouxMap> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("λ must be positive, got {lambda}")));
    }
    let params = NCParams::d2(hbar, theta, eta)?;
    let form = build_omega(&params)?;
    let zeta = params.zeta();
    let root = (1.0 - zeta).sqrt();
    let mu = (1.0 + root) / (2.0 * lambda);
    let e = e2();
    let mut s = Mat::zeros(4, 4);
    let mut s_inv = Mat::zeros(4, 4);
    let a = theta / (2.0 * lambda * hbar);
    let b = eta / (2.0 * mu * hbar);
    for i in 0..2 {
        s[(i, i)] = lambda;
        s[(2 + i, 2 + i)] = mu;
        s_inv[(i, i)] = mu / root;
        s_inv[(2 + i, 2 + i)] = lambda / root;
        for j in 0..2 {
            s[(i, 2 + j)] = -a * e[(i, j)];
            s[(2 + i, j)] = b * e[(i, j)];
            s_inv[(i, 2 + j)] = a * e[(i, j)] / root;
            s_inv[(2 + i, j)] = -b * e[(i, j)] / root;
        }
    }
    let det = s.determinant();
    Ok(DarbouxMap { s, s_inv, det, form, lambda: Some(lambda), mu: Some(mu) })
}

#[derive(Clone, Debug, Serialize)]
pub struct DarbouxCheck {
    pub ok: bool,
    pub symplectic_residual: f64,
    pub det_residual: f64,
}

pub fn verify_darboux(s: &Mat, form: &ExtendedSymplecticForm) -> Result<DarbouxCheck> {
    let n = form.dim();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: s.nrows() });
    }
    let j = j_matrix(form.params().d());
    let symplectic_residual = max_abs(&(s * j * s.transpose() - form.omega()));
    let det_residual = (s.determinant() - form.pf().abs()).abs();
    let ok = symplectic_residual <= form.tolerance() && det_residual <= MATRIX_TOL * form.pf().abs();
    Ok(DarbouxCheck { ok, symplectic_residual, det_residual })
}

pub fn nc_symplectic_residual(m: &Mat, form: &ExtendedSymplecticForm) -> Result<f64> {
    let n = form.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
    }
    Ok(max_abs(&(m * form.omega() * m.transpose() - form.omega())))
}

pub fn is_nc_symplectic(m: &Mat, form: &ExtendedSymplecticForm) -> Result<bool> {
    Ok(nc_symplectic_residual(m, form)? <= form.tolerance())
}

pub fn symplectic_residual(p: &Mat) -> f64 {
    let j = j_matrix(p.nrows() / 2);
    max_abs(&(p * &j * p.transpose() - j))
}

/// φ_S(P) = S P S⁻¹, an isomorphism Sp(2d) → Sp_Ω(2d).
pub fn conjugate_symplectic(p: &Mat, s: &DarbouxMap) -> Result<Mat> {
    let n = s.form().dim();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.nrows() });
    }
    let res = symplectic_residual(p);
    if res > MATRIX_TOL * (1.0 + max_abs(p)).powi(2) {
        return Err(Error::NotSymplectic(res));
    }
    Ok(s.s() * p * s.s_inv())
}

/// Random symplectic matrix exp(J·Sym) with Sym symmetric, entries in [−scale, scale].
pub fn random_symplectic<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Mat {
    let n = 2 * d;
    let mut sym = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x = rng.gen_range(-scale..=scale);
            sym[(i, j)] = x;
            sym[(j, i)] = x;
        }
    }
    expm(&(j_matrix(d) * sym))
}

/// Random element of Sp_Ω as S P S⁻¹.
pub fn random_nc_symplectic<R: Rng + ?Sized>(s: &DarbouxMap, scale: f64, rng: &mut R) -> Result<Mat> {
    let p = random_symplectic(s.form().params().d(), scale, rng);
    conjugate_symplectic(&p, s)
}
