//! Phase-space states: Wigner transforms of wavefunctions, their images under
//! Darboux maps, θ- and η-Wigner measures, product states, mixtures and the
//! witness catalog.

mod catalog;

pub use catalog::{catalog, resolved_consts, CatalogConsts, CatalogId};

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausspoly::{FunctionFile, GaussPoly, GaussSum, Poly, StarKernel};
use crate::linalg::{e2, CMat, CVec, Mat, I};
use crate::symplectic::{nc_symplectic_residual, DarbouxMap, ExtendedSymplecticForm, NCParams};

/// Tolerance on ∫f = 1 for labeled measures.
pub const NORM_TOL: f64 = 1e-9;
/// Tolerance on ∫|ψ|² = 1 for wavefunctions.
pub const WAVE_NORM_TOL: f64 = 1e-10;

/// The three sets of phase-space functions being compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureSet {
    #[serde(rename = "F^C")]
    Wigner,
    #[serde(rename = "F^NC")]
    Ncwm,
    #[serde(rename = "L")]
    Liouville,
}

impl MeasureSet {
    pub const ALL: [MeasureSet; 3] = [MeasureSet::Wigner, MeasureSet::Ncwm, MeasureSet::Liouville];

    pub fn symbol(self) -> &'static str {
        match self {
            Self::Wigner => "F^C",
            Self::Ncwm => "F^NC",
            Self::Liouville => "L",
        }
    }
}

/// The seven regions cut out by F^C, F^NC and L, plus the outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    Omega1,
    Omega2,
    Omega3,
    Omega4,
    Omega5,
    Omega6,
    Omega7,
    Outside,
}

impl Region {
    pub fn from_flags(wigner: bool, ncwm: bool, liouville: bool) -> Self {
        match (wigner, ncwm, liouville) {
            (true, false, false) => Self::Omega1,
            (false, true, false) => Self::Omega2,
            (false, false, true) => Self::Omega3,
            (true, true, false) => Self::Omega4,
            (true, false, true) => Self::Omega5,
            (false, true, true) => Self::Omega6,
            (true, true, true) => Self::Omega7,
            (false, false, false) => Self::Outside,
        }
    }

    /// Membership in (F^C, F^NC, L).
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Self::Omega1 => (true, false, false),
            Self::Omega2 => (false, true, false),
            Self::Omega3 => (false, false, true),
            Self::Omega4 => (true, true, false),
            Self::Omega5 => (true, false, true),
            Self::Omega6 => (false, true, true),
            Self::Omega7 => (true, true, true),
            Self::Outside => (false, false, false),
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Omega1 => "Ω1",
            Self::Omega2 => "Ω2",
            Self::Omega3 => "Ω3",
            Self::Omega4 => "Ω4",
            Self::Omega5 => "Ω5",
            Self::Omega6 => "Ω6",
            Self::Omega7 => "Ω7",
            Self::Outside => "outside",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statement {
    Member(MeasureSet),
    NonMember(MeasureSet),
    ThetaPuritySaturated,
    EtaPuritySaturated,
}

/// A fact known from how a function was built, with the construction that backs it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub statement: Statement,
    pub basis: String,
}

impl Claim {
    pub fn new(statement: Statement, basis: impl Into<String>) -> Self {
        Self { statement, basis: basis.into() }
    }
}

/// Normalized wavefunction ψ(R) in the Hermite-polynomial × Gaussian class.
#[derive(Clone, Debug)]
pub struct WaveFn {
    f: GaussPoly,
}

fn norm_squared(f: &GaussPoly) -> Result<f64> {
    Ok(f.conj().multiply(f)?.integrate()?.re)
}

impl WaveFn {
    pub fn new(f: GaussPoly) -> Result<Self> {
        let n = norm_squared(&f)?;
        if (n - 1.0).abs() > WAVE_NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { f })
    }

    /// Rescales f to unit L² norm.
    pub fn normalized(f: GaussPoly) -> Result<Self> {
        let n = norm_squared(&f)?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NotNormalized(n));
        }
        Self::new(f.scale_real(n.sqrt().recip()))
    }

    /// (2a/π)^{1/4} exp(−a x²).
    pub fn gaussian(a: f64) -> Result<Self> {
        let g = Mat::from_element(1, 1, a);
        let f = GaussPoly::gaussian(&g, &[0.0], (2.0 * a / PI).powf(0.25))?;
        Self::new(f)
    }

    /// (32a³/π)^{1/4} x exp(−a x²), the first excited state.
    pub fn hermite1(a: f64) -> Result<Self> {
        let g = Mat::from_element(1, 1, a);
        let f = GaussPoly::gaussian(&g, &[0.0], (32.0 * a.powi(3) / PI).powf(0.25))?.multiply_poly(&Poly::var(1, 0))?;
        Self::new(f)
    }

    /// ψ(x, y) = self(x)·other(y).
    pub fn product(&self, other: &Self) -> Result<Self> {
        Self::new(self.f.tensor(&other.f)?)
    }

    /// ψ̂(k) = (2πs)^{−d/2} ∫ ψ(x) exp(−i k·x/s) dx.
    pub fn fourier(&self, s: f64) -> Result<Self> {
        let d = self.dim();
        let k = Mat::identity(d, d) * (-1.0 / s);
        let f = self.f.linear_transform(&k)?.scale_real((2.0 * PI * s).powf(-(d as f64) / 2.0));
        Self::new(f)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn function(&self) -> &GaussPoly {
        &self.f
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.f.eval(x)
    }
}

/// (π s)^{−d} ∫ exp(−2i y·Π/s) conj ψ(R−y) ψ(R+y) dy as a function of (R, Π).
fn wigner_transform(psi: &GaussPoly, s: f64) -> Result<GaussPoly> {
    let d = psi.dim();
    let n = 3 * d;
    let one = Complex64::new(1.0, 0.0);
    let mut plus = CMat::zeros(d, n);
    let mut minus = CMat::zeros(d, n);
    for i in 0..d {
        plus[(i, i)] = one;
        plus[(i, 2 * d + i)] = one;
        minus[(i, i)] = one;
        minus[(i, 2 * d + i)] = -one;
    }
    let zero = CVec::zeros(d);
    let right = psi.pullback_c(&plus, &zero)?;
    let left = psi.conj().pullback_c(&minus, &zero)?;
    let mut g = CMat::zeros(n, n);
    for i in 0..d {
        g[(d + i, 2 * d + i)] = I / s;
        g[(2 * d + i, d + i)] = I / s;
    }
    let phase = GaussPoly::from_parts(g, CVec::zeros(n), Complex64::default(), Poly::one(n))?;
    let joint = right.multiply(&left)?.multiply(&phase)?;
    let keep: Vec<usize> = (0..2 * d).collect();
    let w = joint.integrate_out(&keep)?.scale_real((PI * s).powi(-(d as i32)));
    Ok(w.assume_real())
}

fn same_params(a: &NCParams, b: &NCParams) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs()));
    a.d() == b.d()
        && close(a.hbar(), b.hbar())
        && a.theta_upper().iter().zip(b.theta_upper()).all(|(x, y)| close(*x, *y))
        && a.eta_upper().iter().zip(b.eta_upper()).all(|(x, y)| close(*x, *y))
}

/// A real, normalized phase-space function together with what is known about it
/// from its construction.
#[derive(Clone, Debug)]
pub struct LabeledMeasure {
    func: GaussSum,
    provenance: String,
    params: NCParams,
    claims: Vec<Claim>,
    expected: Option<Region>,
}

#[derive(Deserialize)]
struct LabeledOwned {
    provenance: String,
    params: NCParams,
    #[serde(default)]
    claims: Vec<Claim>,
    #[serde(default)]
    expected_region: Option<Region>,
    function: FunctionFile,
}

#[derive(Serialize)]
struct LabeledRepr<'a> {
    provenance: &'a str,
    params: &'a NCParams,
    claims: &'a [Claim],
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_region: Option<Region>,
    function: FunctionFile,
}

impl LabeledMeasure {
    pub fn new(func: impl Into<GaussSum>, provenance: impl Into<String>, params: NCParams, claims: Vec<Claim>) -> Result<Self> {
        let func = func.into();
        if func.dim() != 2 * params.d() {
            return Err(Error::DimensionMismatch { expected: 2 * params.d(), got: func.dim() });
        }
        if !func.is_real_tagged() {
            return Err(Error::InvalidInput("measures must be real-valued".into()));
        }
        let total = func.integrate()?;
        if (total.re - 1.0).abs() > NORM_TOL || total.im.abs() > NORM_TOL {
            return Err(Error::NotNormalized(total.re));
        }
        Ok(Self { func, provenance: provenance.into(), params, claims, expected: None })
    }

    /// A function with no construction history.
    pub fn unlabeled(func: impl Into<GaussSum>, params: NCParams) -> Result<Self> {
        Self::new(func, "input", params, Vec::new())
    }

    pub fn with_expected(mut self, region: Region) -> Self {
        self.expected = Some(region);
        self
    }

    /// Re-reads the same function under different deformation parameters with
    /// the same ħ and d. Wigner-measure claims depend only on ħ and survive;
    /// everything tied to θ and η is dropped unless the parameters agree.
    pub fn with_params(self, params: NCParams) -> Result<Self> {
        if params.d() != self.params.d() || (params.hbar() - self.params.hbar()).abs() > 1e-12 * params.hbar() {
            return Err(Error::DarbouxMismatch);
        }
        let keep_all = same_params(&params, &self.params);
        let claims = self
            .claims
            .into_iter()
            .filter(|c| {
                keep_all
                    || matches!(
                        c.statement,
                        Statement::Member(MeasureSet::Wigner | MeasureSet::Liouville)
                            | Statement::NonMember(MeasureSet::Wigner | MeasureSet::Liouville)
                    )
            })
            .collect();
        let expected = if keep_all { self.expected } else { None };
        Ok(Self { params, claims, expected, ..self })
    }

    pub fn function(&self) -> &GaussSum {
        &self.func
    }

    /// The single closed-form term, when the function is not a mixture.
    pub fn single(&self) -> Option<&GaussPoly> {
        self.func.single()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn params(&self) -> &NCParams {
        &self.params
    }

    pub fn claims(&self) -> &[Claim] {
        &self.claims
    }

    pub fn claim(&self, statement: Statement) -> Option<&Claim> {
        self.claims.iter().find(|c| c.statement == statement)
    }

    pub fn expected_region(&self) -> Option<Region> {
        self.expected
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.func.eval(z).re
    }

    pub fn purity(&self) -> Result<f64> {
        self.func.purity()
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        let repr = LabeledRepr {
            provenance: &self.provenance,
            params: &self.params,
            claims: &self.claims,
            expected_region: self.expected,
            function: FunctionFile::from_sum(&self.func)?,
        };
        Ok(serde_json::to_value(repr)?)
    }

    /// Reads the output of [`LabeledMeasure::to_json`]. A bare function file is
    /// accepted as an unlabeled measure under `fallback` parameters. Realness is
    /// re-established by sampling.
    pub fn from_json(v: &serde_json::Value, fallback: &NCParams) -> Result<Self> {
        let real = |f: FunctionFile| f.to_sum()?.map_terms(|t| t.clone().tag_real());
        if v.get("function").is_some() {
            let r: LabeledOwned = serde_json::from_value(v.clone())?;
            let mut out = Self::new(real(r.function)?, r.provenance, r.params, r.claims)?;
            out.expected = r.expected_region;
            Ok(out)
        } else {
            let f: FunctionFile = serde_json::from_value(v.clone())?;
            Self::unlabeled(real(f)?, fallback.clone())
        }
    }
}

/// Wigner measure of a pure state.
pub fn wigner_pure(psi: &WaveFn, hbar: f64) -> Result<LabeledMeasure> {
    let params = NCParams::commutative(hbar, psi.dim())?;
    let f = wigner_transform(psi.function(), hbar)?;
    let claim = Claim::new(Statement::Member(MeasureSet::Wigner), "Wigner transform of a normalized wavefunction");
    LabeledMeasure::new(f, "wigner_pure", params, vec![claim])
}

/// f^NC(z) = f^C(S⁻¹z)/|Pf Ω|.
pub fn ncwm(fc: &LabeledMeasure, s: &DarbouxMap) -> Result<LabeledMeasure> {
    let params = s.form().params().clone();
    if params.d() != fc.params.d() || (params.hbar() - fc.params.hbar()).abs() > 1e-12 * params.hbar() {
        return Err(Error::DarbouxMismatch);
    }
    if fc.claim(Statement::Member(MeasureSet::Wigner)).is_none() {
        return Err(Error::InvalidInput("the input is not a Wigner measure by construction".into()));
    }
    let zero = vec![0.0; 2 * params.d()];
    let f = fc.func.affine_pullback(s.s_inv(), &zero)?.scale_real(1.0 / s.form().pf().abs());
    let claim = Claim::new(Statement::Member(MeasureSet::Ncwm), "Darboux image of a Wigner measure");
    LabeledMeasure::new(f, "ncwm", params, vec![claim])
}

fn require_1d(phi: &WaveFn) -> Result<()> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: phi.dim() });
    }
    Ok(())
}

/// θ-Wigner measure of a one-dimensional wavefunction, as a function of (q₁, q₂).
pub fn theta_wigner(phi: &WaveFn, theta: f64) -> Result<GaussPoly> {
    require_1d(phi)?;
    if !(theta > 0.0) {
        return Err(Error::DegenerateKernel(format!("θ = {theta}")));
    }
    wigner_transform(phi.function(), theta)
}

/// η-Wigner measure of a one-dimensional wavefunction, as a function of (p₁, p₂).
/// Uses the same argument pattern as the θ version, conj χ(p₁−y) χ(p₁+y).
pub fn eta_wigner(chi: &WaveFn, eta: f64) -> Result<GaussPoly> {
    require_1d(chi)?;
    if !(eta > 0.0) {
        return Err(Error::DegenerateKernel(format!("η = {eta}")));
    }
    wigner_transform(chi.function(), eta)
}

/// Builds (1/(1−ζ))(s/ħ)² w₁(u) w₂(v) with u = (v + (s/ħ)·sign·E·w)/√(1−ζ), where v
/// is the plane at `plane` and w the other plane.
fn product_state(w1: &GaussPoly, w2: &GaussPoly, params: &NCParams, s: f64, plane: usize, sign: f64) -> Result<GaussPoly> {
    let zeta = params.zeta();
    let hbar = params.hbar();
    let other = 2 - plane;
    let e = e2();
    let root = (1.0 - zeta).sqrt();
    let mut u = Mat::zeros(2, 4);
    let mut v = Mat::zeros(2, 4);
    for i in 0..2 {
        u[(i, plane + i)] = 1.0 / root;
        v[(i, plane + i)] = 1.0;
        for j in 0..2 {
            u[(i, other + j)] = sign * s / hbar * e[(i, j)] / root;
        }
    }
    let f = w1.linear_pullback(&u)?.multiply(&w2.linear_pullback(&v)?)?;
    Ok(f.scale_real((s / hbar).powi(2) / (1.0 - zeta)).assume_real())
}

fn product_claims(params: &NCParams, saturated: Statement, what: &str) -> Vec<Claim> {
    let mut claims = vec![
        Claim::new(Statement::Member(MeasureSet::Ncwm), format!("{what} product state")),
        Claim::new(saturated, format!("{what} product state")),
    ];
    if params.zeta() > 0.0 {
        claims.push(Claim::new(Statement::NonMember(MeasureSet::Wigner), "product-state purity 1/(2πħ√(1−ζ))² exceeds the Wigner bound"));
    }
    claims
}

/// Product state maximizing the θ-purity.
pub fn theta_product_state(phi1: &WaveFn, phi2: &WaveFn, params: &NCParams) -> Result<LabeledMeasure> {
    params.require_d2()?;
    let theta = params.theta();
    if !(theta > 0.0) {
        return Err(Error::DegenerateForm(format!("θ-product states need θ > 0, got {theta}")));
    }
    let (w1, w2) = (theta_wigner(phi1, theta)?, theta_wigner(phi2, theta)?);
    let f = product_state(&w1, &w2, params, theta, 0, 1.0)?;
    let claims = product_claims(params, Statement::ThetaPuritySaturated, "θ");
    LabeledMeasure::new(f, "theta_product", params.clone(), claims)
}

/// Product state maximizing the η-purity. The mixing term enters as
/// p − (η/ħ)E q; the opposite sign does not give a noncommutative Wigner measure.
pub fn eta_product_state(chi1: &WaveFn, chi2: &WaveFn, params: &NCParams) -> Result<LabeledMeasure> {
    params.require_d2()?;
    let eta = params.eta();
    if !(eta > 0.0) {
        return Err(Error::DegenerateForm(format!("η-product states need η > 0, got {eta}")));
    }
    let (w1, w2) = (eta_wigner(chi1, eta)?, eta_wigner(chi2, eta)?);
    let f = product_state(&w1, &w2, params, eta, 2, -1.0)?;
    let claims = product_claims(params, Statement::EtaPuritySaturated, "η");
    LabeledMeasure::new(f, "eta_product", params.clone(), claims)
}

/// Σ wᵢ fᵢ. Keeps the membership claims shared by every member; all three sets are convex.
pub fn convex_mix(members: &[LabeledMeasure], weights: &[f64]) -> Result<LabeledMeasure> {
    if members.is_empty() || members.len() != weights.len() {
        return Err(Error::WeightError(format!("{} members, {} weights", members.len(), weights.len())));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::WeightError(format!("weight {w} is negative")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::WeightError(format!("weights sum to {total}")));
    }
    let params = members[0].params.clone();
    if members.iter().any(|m| !same_params(&m.params, &params)) {
        return Err(Error::InvalidInput("mixture members use different parameters".into()));
    }
    let mut terms = Vec::new();
    for (m, w) in members.iter().zip(weights) {
        if *w > 0.0 {
            terms.extend(m.func.scale_real(*w).terms().iter().cloned());
        }
    }
    let claims = MeasureSet::ALL
        .into_iter()
        .filter(|s| members.iter().all(|m| m.claim(Statement::Member(*s)).is_some()))
        .map(|s| Claim::new(Statement::Member(s), "convex combination of members"))
        .collect();
    LabeledMeasure::new(GaussSum::new(terms)?, "convex_mix", params, claims)
}

/// z ↦ f(Mz) for M ∈ Sp_Ω. Noncommutative Wigner measures and positivity are
/// preserved; statements about F^C are dropped.
pub fn nc_symplectic_transform(f: &LabeledMeasure, m: &Mat) -> Result<LabeledMeasure> {
    let form = ExtendedSymplecticForm::new(&f.params)?;
    let r = nc_symplectic_residual(m, &form)?;
    if r > form.tolerance() {
        return Err(Error::NotSymplectic(r));
    }
    let zero = vec![0.0; m.nrows()];
    let g = f.func.affine_pullback(m, &zero)?;
    let claims = f
        .claims
        .iter()
        .filter(|c| {
            matches!(
                c.statement,
                Statement::Member(MeasureSet::Ncwm | MeasureSet::Liouville)
                    | Statement::NonMember(MeasureSet::Ncwm | MeasureSet::Liouville)
            )
        })
        .map(|c| Claim::new(c.statement, format!("{}; preserved by Sp_Ω", c.basis)))
        .collect();
    let mut out = LabeledMeasure::new(g, "sp_omega", f.params.clone(), claims)?;
    out.expected = None;
    Ok(out)
}

/// (2/π)√(αβ) exp(−α q² − β p²), a Gaussian with unit L² norm.
pub fn square_root_gaussian(alpha: f64, beta: f64) -> Result<GaussPoly> {
    let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![alpha, alpha, beta, beta]));
    GaussPoly::gaussian(&g, &[0.0; 4], 2.0 / PI * (alpha * beta).sqrt())
}

/// g = conj(b) ⋆_θ ⋆_η b for b with unit L² norm.
pub fn theta_eta_square(b: &GaussPoly, params: &NCParams) -> Result<GaussPoly> {
    params.require_d2()?;
    let n = norm_squared(b)?;
    if (n - 1.0).abs() > WAVE_NORM_TOL {
        return Err(Error::NotNormalized(n));
    }
    let e = e2();
    let mut p = Mat::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            p[(i, j)] = params.theta() * e[(i, j)];
            p[(2 + i, 2 + j)] = params.eta() * e[(i, j)];
        }
    }
    let g = crate::gausspoly::star_exact(&b.conj(), b, &StarKernel::Custom(p))?;
    Ok(g.assume_real())
}

/// f ♮ (b̄ ⋆_θ ⋆_η b) for a noncommutative Wigner measure f: the result is both a
/// Wigner measure and a noncommutative Wigner measure.
pub fn smear_with_square(f: &LabeledMeasure, b: &GaussPoly) -> Result<LabeledMeasure> {
    if f.claim(Statement::Member(MeasureSet::Ncwm)).is_none() {
        return Err(Error::InvalidInput("the input is not a noncommutative Wigner measure by construction".into()));
    }
    let g = GaussSum::from(theta_eta_square(b, &f.params)?);
    let h = f.func.convolve(&g)?;
    let basis = "convolution of a noncommutative Wigner measure with a θη-square";
    let claims = vec![Claim::new(Statement::Member(MeasureSet::Wigner), basis), Claim::new(Statement::Member(MeasureSet::Ncwm), basis)];
    LabeledMeasure::new(h, "convolution", f.params.clone(), claims)
}
