//! Positivity, purity and uncertainty tests, the KLM machinery, and the
//! classification of a labeled measure into the regions Ω₁…Ω₇.

mod classify;
mod klm;

pub use classify::{
    classify, gaussian_exact, Budget, Certainty, EvidenceReport, Flag, GaussianExact, LiouvilleEvidence, NegativityWitness, SetEvidence,
    SetVerdict,
};
pub use klm::{
    klm_batteries, klm_matrix, klm_search_violation, lambda_matrix, nc_klm_spec, sharp_inverse, sharp_map, spectrum_probe, zeta_prime,
    KlmEngine, KlmSpec, KlmWitness, ProbeConfig, ProbeRecord, ProbeVerdict, SearchConfig,
};

use std::f64::consts::PI;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_residual, j_matrix, to_complex, CMat, Mat};
use crate::measures::LabeledMeasure;
use crate::symplectic::ExtendedSymplecticForm;

/// Relative tolerance on purity-bound comparisons and symplectic eigenvalues.
pub const PURITY_RTOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
}

/// Default tolerance 1e−9·(1+‖m‖) with ‖·‖ the Frobenius norm.
pub fn default_tolerance(m: &CMat) -> f64 {
    1e-9 * (1.0 + m.norm())
}

/// Tolerance for matrices that sit on the boundary of the cone (pure Gaussians).
pub fn boundary_tolerance(m: &CMat) -> f64 {
    default_tolerance(m).max(1e-8 * m.norm())
}

/// Minimum eigenvalue test for a Hermitian matrix. `tol = None` uses the default.
pub fn hermitian_psd(m: &CMat, tol: Option<f64>) -> Result<PsdVerdict> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let res = hermitian_residual(m);
    if res > 1e-10 * m.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::NotHermitian(res));
    }
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let min = hermitian_eigenvalues(&h).first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or_else(|| default_tolerance(m));
    Ok(PsdVerdict { is_psd: min >= -tol, min_eigenvalue: min, tolerance_used: tol })
}

fn require_spd(m: &Mat) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if m.nrows() != m.ncols() || !m.nrows().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: m.nrows() + m.nrows() % 2, got: m.ncols() });
    }
    let asym = (m - m.transpose()).abs().max();
    if asym > 1e-12 * (1.0 + m.abs().max()) {
        return Err(Error::NotSPD);
    }
    Cholesky::new((m + m.transpose()) * 0.5).ok_or(Error::NotSPD)
}

fn gaussian_test(form_matrix: &Mat, k: &Mat, hbar: f64) -> Result<PsdVerdict> {
    let chol = require_spd(form_matrix)?;
    if k.nrows() != form_matrix.nrows() {
        return Err(Error::DimensionMismatch { expected: k.nrows(), got: form_matrix.nrows() });
    }
    let inv = chol.inverse();
    let b = to_complex(&inv) + to_complex(k) * Complex64::new(0.0, hbar);
    let tol = boundary_tolerance(&b);
    hermitian_psd(&b, Some(tol))
}

/// f ∝ exp(−ξᵀAξ) is a Wigner measure iff A⁻¹ + iħJ ⪰ 0.
pub fn gaussian_is_wigner(a_form: &Mat, hbar: f64) -> Result<PsdVerdict> {
    gaussian_test(a_form, &j_matrix(a_form.nrows() / 2), hbar)
}

/// f ∝ exp(−zᵀCz) is a noncommutative Wigner measure iff C⁻¹ + iħΩ ⪰ 0.
pub fn gaussian_is_ncwm(c_form: &Mat, form: &ExtendedSymplecticForm) -> Result<PsdVerdict> {
    gaussian_test(c_form, form.omega(), form.params().hbar())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PureMode {
    Wigner,
    Ncwm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityVerdict {
    pub pure: bool,
    pub mode: PureMode,
    /// Symplectic eigenvalues, ascending, one per degree of freedom.
    pub symplectic_spectrum: Vec<f64>,
    pub hbar: f64,
}

/// Pure-state test for a Gaussian quadratic form. The symplectic spectrum is
/// the positive part of eig(i·Lᵀ K⁻¹ L) with LLᵀ the inverse form and K the
/// structure matrix (J or Ω). Pure iff every value equals ħ.
pub fn gaussian_is_pure(form_matrix: &Mat, mode: PureMode, form: &ExtendedSymplecticForm) -> Result<PurityVerdict> {
    let chol = require_spd(form_matrix)?;
    let n = form_matrix.nrows();
    if form.dim() != n {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: n });
    }
    let hbar = form.params().hbar();
    let k_inv = match mode {
        PureMode::Wigner => -j_matrix(n / 2),
        PureMode::Ncwm => form.omega_inv(),
    };
    let l = Cholesky::new(chol.inverse()).ok_or(Error::NotSPD)?.l();
    let m = to_complex(&(l.transpose() * k_inv * &l)) * Complex64::new(0.0, 1.0);
    let eig = hermitian_eigenvalues(&m);
    let spectrum: Vec<f64> = eig[n / 2..].to_vec();
    let pure = spectrum.iter().all(|v| (v - hbar).abs() <= PURITY_RTOL * hbar);
    Ok(PurityVerdict { pure, mode, symplectic_spectrum: spectrum, hbar })
}

/// Robertson–Schrödinger test Σ + (iħ/2)K ⪰ 0 with K = Ω, or J when `commutative`.
pub fn uncertainty_check_with(f: &LabeledMeasure, commutative: bool) -> Result<PsdVerdict> {
    let params = f.params();
    let n = 2 * params.d();
    let k = if commutative { j_matrix(params.d()) } else { ExtendedSymplecticForm::new(params)?.omega().clone() };
    let sigma = f.function().moments()?.covariance_matrix();
    if sigma.iter().any(|x| !x.is_finite()) || sigma.nrows() != n {
        return Err(Error::NotIntegrable("second moments are not finite".into()));
    }
    let m = to_complex(&sigma) + to_complex(&k) * Complex64::new(0.0, 0.5 * params.hbar());
    hermitian_psd(&m, Some(boundary_tolerance(&m)))
}

/// Σ + (iħ/2)Ω ⪰ 0, a necessary condition for membership in F^NC.
pub fn uncertainty_check(f: &LabeledMeasure) -> Result<PsdVerdict> {
    uncertainty_check_with(f, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub value: f64,
    pub bound: f64,
    pub exceeded: bool,
}

impl BoundCheck {
    fn new(value: f64, bound: f64) -> Self {
        Self { value, bound, exceeded: value > bound * (1.0 + PURITY_RTOL) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub purity: f64,
    /// ∫f² against 1/(2πħ)^d.
    pub wigner_bound: BoundCheck,
    /// ∫f² against 1/((2πħ)^d |Pf Ω|).
    pub ncwm_bound: BoundCheck,
    /// ∫P_q² against 1/(2πθ); present for d = 2 with θ > 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_purity: Option<BoundCheck>,
    /// ∫P_p² against 1/(2πη); present for d = 2 with η > 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_purity: Option<BoundCheck>,
}

impl PurityReport {
    /// Non-membership in F^C follows from this report.
    pub fn excludes_wigner(&self) -> bool {
        self.wigner_bound.exceeded
    }

    /// Non-membership in F^NC follows from this report.
    pub fn excludes_ncwm(&self) -> bool {
        self.ncwm_bound.exceeded || self.theta_purity.is_some_and(|b| b.exceeded) || self.eta_purity.is_some_and(|b| b.exceeded)
    }
}

/// Purity and marginal purities with their bound comparisons.
pub fn purity_report(f: &LabeledMeasure) -> Result<PurityReport> {
    let params = f.params();
    let d = params.d();
    let hbar = params.hbar();
    let purity = f.purity()?;
    if !purity.is_finite() {
        return Err(Error::NotIntegrable("purity integral diverges".into()));
    }
    let form = ExtendedSymplecticForm::new(params)?;
    let wigner = (2.0 * PI * hbar).powi(d as i32).recip();
    let marginal = |keep: [usize; 2], s: f64| -> Result<Option<BoundCheck>> {
        if d != 2 || s <= 0.0 {
            return Ok(None);
        }
        let value = f.function().marginal(&keep)?.purity()?;
        Ok(Some(BoundCheck::new(value, 1.0 / (2.0 * PI * s))))
    };
    Ok(PurityReport {
        purity,
        wigner_bound: BoundCheck::new(purity, wigner),
        ncwm_bound: BoundCheck::new(purity, wigner / form.pf().abs()),
        theta_purity: marginal([0, 1], params.theta())?,
        eta_purity: marginal([2, 3], params.eta())?,
    })
}

/// Complex matrix serialized as separate real and imaginary row arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMat> for ComplexMatrix {
    fn from(m: &CMat) -> Self {
        let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        Self { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl ComplexMatrix {
    pub fn to_cmat(&self) -> CMat {
        let n = self.re.len();
        let m = self.re.first().map_or(0, |r| r.len());
        CMat::from_fn(n, m, |i, j| Complex64::new(self.re[i][j], self.im[i][j]))
    }
}

#[cfg(test)]
mod tests;
