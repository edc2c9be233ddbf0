//! Kastler–Loupias–Miracle-Sole matrices, witness search, the sharp map on
//! spectrum parameters, and spectrum probes.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hermitian_psd, ComplexMatrix, PsdVerdict};
use crate::error::{Error, Result};
use crate::gausspoly::{FtKind, GaussSum};
use crate::linalg::{e2, j_matrix, CMat, Mat};
use crate::symplectic::{ExtendedSymplecticForm, NCParams};

/// Spectrum parameter of a KLM condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KlmSpec {
    /// Phase exp(−(iα/2)aₖᵀJaⱼ) with the commutative transform.
    Commutative { alpha: f64 },
    /// Phase exp((i/2)aₖᵀΛ(α,β,γ)aⱼ) with the Ω transform; d = 2 only.
    Nc { alpha: f64, beta: f64, gamma: f64 },
}

impl KlmSpec {
    pub fn negated(self) -> Self {
        match self {
            Self::Commutative { alpha } => Self::Commutative { alpha: -alpha },
            Self::Nc { alpha, beta, gamma } => Self::Nc { alpha: -alpha, beta: -beta, gamma: -gamma },
        }
    }
}

/// Λ(α,β,γ) = [[γE, −αI], [αI, βE]].
pub fn lambda_matrix(alpha: f64, beta: f64, gamma: f64) -> Mat {
    let e = e2();
    let mut m = Mat::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(&(&e * gamma));
    m.view_mut((2, 2), (2, 2)).copy_from(&(&e * beta));
    for i in 0..2 {
        m[(i, 2 + i)] = -alpha;
        m[(2 + i, i)] = alpha;
    }
    m
}

/// The parameters (ħ̃, θ̃, η̃) = (ħ, θ, η)/(1−ζ) at which every NCWM is of positive type.
pub fn nc_klm_spec(params: &NCParams) -> Result<KlmSpec> {
    params.require_d2()?;
    let s = 1.0 / (1.0 - params.zeta());
    Ok(KlmSpec::Nc { alpha: params.hbar() * s, beta: params.theta() * s, gamma: params.eta() * s })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlmWitness {
    pub points: Vec<Vec<f64>>,
    pub matrix: ComplexMatrix,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
    pub is_psd: bool,
    pub spectrum_params: KlmSpec,
}

impl KlmWitness {
    pub fn verdict(&self) -> PsdVerdict {
        PsdVerdict { is_psd: self.is_psd, min_eigenvalue: self.min_eigenvalue, tolerance_used: self.tolerance_used }
    }
}

/// Randomized witness search. Each trial draws its own generator from
/// `seed ^ trial`, so results do not depend on the thread count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub m_min: usize,
    pub m_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Outer sampling radius; `None` derives it from the transform's envelope.
    pub radius: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { m_min: 2, m_max: 8, trials: 500, seed: 42, radius: None }
    }
}

/// A transformed function ready for repeated KLM matrix assembly.
#[derive(Clone, Debug)]
pub struct KlmEngine {
    ft: GaussSum,
    spec: KlmSpec,
    phase: Mat,
    radius: f64,
    widths: Vec<f64>,
}

impl KlmEngine {
    pub fn new(f: &GaussSum, spec: KlmSpec, form: &ExtendedSymplecticForm) -> Result<Self> {
        if !f.is_real_tagged() {
            return Err(Error::InvalidInput("KLM matrices need a real-valued function".into()));
        }
        let n = f.dim();
        if form.dim() != n {
            return Err(Error::DimensionMismatch { expected: form.dim(), got: n });
        }
        let (kind, phase) = match spec {
            KlmSpec::Commutative { alpha } => (FtKind::Commutative, j_matrix(n / 2) * -alpha),
            KlmSpec::Nc { alpha, beta, gamma } => {
                form.params().require_d2()?;
                (FtKind::Noncommutative(form.clone()), lambda_matrix(alpha, beta, gamma))
            }
        };
        let ft = f.symplectic_ft(&kind)?;
        let mut widths = vec![1e-6f64; n];
        for t in ft.terms() {
            for (w, x) in widths.iter_mut().zip(t.envelope_widths()) {
                *w = w.max(x);
            }
        }
        let radius = widths.iter().copied().fold(0.0, f64::max);
        Ok(Self { ft, spec, phase, radius, widths })
    }

    pub fn spec(&self) -> KlmSpec {
        self.spec
    }

    /// Envelope scale of the transform, the default outer sampling radius.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// M_jk = f̃(aⱼ−aₖ)·exp((i/2)aₖᵀPaⱼ) with P = −αJ or Λ(α,β,γ).
    pub fn matrix(&self, points: &[Vec<f64>]) -> Result<CMat> {
        let n = self.ft.dim();
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        let m = points.len();
        let mut out = CMat::zeros(m, m);
        for j in 0..m {
            for k in 0..m {
                let diff: Vec<f64> = (0..n).map(|i| points[j][i] - points[k][i]).collect();
                let mut q = 0.0;
                for r in 0..n {
                    for c in 0..n {
                        q += points[k][r] * self.phase[(r, c)] * points[j][c];
                    }
                }
                out[(j, k)] = self.ft.eval(&diff) * Complex64::new(0.0, 0.5 * q).exp();
            }
        }
        Ok(out)
    }

    pub fn witness(&self, points: &[Vec<f64>]) -> Result<KlmWitness> {
        let m = self.matrix(points)?;
        let v = hermitian_psd(&m, None)?;
        Ok(KlmWitness {
            points: points.to_vec(),
            matrix: ComplexMatrix::from(&m),
            min_eigenvalue: v.min_eigenvalue,
            tolerance_used: v.tolerance_used,
            is_psd: v.is_psd,
            spectrum_params: self.spec,
        })
    }

    /// `m` points uniform in a ball of radius `r`.
    fn ball_points(&self, rng: &mut ChaCha8Rng, m: usize, r: f64) -> Vec<Vec<f64>> {
        let n = self.ft.dim();
        (0..m)
            .map(|_| {
                let dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                let rad = r * rng.gen::<f64>().powf(1.0 / n as f64);
                dir.iter().map(|x| x * rad / norm).collect()
            })
            .collect()
    }

    /// `m` points of a centered square lattice with spacing `h` in the plane of two axes.
    fn lattice_points(&self, rng: &mut ChaCha8Rng, m: usize, h: f64) -> Vec<Vec<f64>> {
        let n = self.ft.dim();
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let side = (m as f64).sqrt().ceil() as usize;
        let off = (side as f64 - 1.0) / 2.0;
        (0..m)
            .map(|k| {
                let mut p = vec![0.0; n];
                p[i] = h * ((k % side) as f64 - off);
                p[j] = h * ((k / side) as f64 - off);
                p
            })
            .collect()
    }

    /// `m` points uniform in a box in a conjugate plane (qᵢ, pᵢ) whose
    /// half-widths are `s` × the envelope widths along the two axes.
    fn plane_points(&self, rng: &mut ChaCha8Rng, m: usize, s: f64) -> Vec<Vec<f64>> {
        let n = self.ft.dim();
        let i = rng.gen_range(0..n / 2);
        let (hq, hp) = (s * self.widths[i], s * self.widths[i + n / 2]);
        (0..m)
            .map(|_| {
                let mut p = vec![0.0; n];
                p[i] = rng.gen_range(-hq..=hq);
                p[i + n / 2] = rng.gen_range(-hp..=hp);
                p
            })
            .collect()
    }

    /// Points of search trial `t`, cycling through a ball, a lattice and a
    /// conjugate-plane box shaped by the envelope of the transform.
    pub fn trial_points(&self, config: &SearchConfig, t: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ t as u64);
        let lo = config.m_min.max(1);
        let m = rng.gen_range(lo..=config.m_max.max(lo));
        let r = config.radius.unwrap_or(self.radius);
        match t % 3 {
            0 => {
                let scale = r * rng.gen_range(0.05..1.0);
                self.ball_points(&mut rng, m, scale)
            }
            1 => {
                let h = r * rng.gen_range(0.05..0.6);
                self.lattice_points(&mut rng, m, h)
            }
            _ => {
                let s = rng.gen_range(0.5..2.0) * r / self.radius;
                self.plane_points(&mut rng, m, s)
            }
        }
    }

    /// First trial (in index order) whose matrix fails the PSD test.
    pub fn search(&self, config: &SearchConfig) -> Result<Option<(usize, KlmWitness)>> {
        let hit = (0..config.trials)
            .into_par_iter()
            .map(|t| self.witness(&self.trial_points(config, t)).map(|w| (t, w)))
            .find_first(|r| r.as_ref().map_or(true, |(_, w)| !w.is_psd));
        hit.transpose()
    }

    /// `count` point batteries of size 1..=m_max drawn from the ball law.
    pub fn batteries(&self, count: usize, m_max: usize, seed: u64) -> Result<Vec<KlmWitness>> {
        (0..count)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k as u64);
                let m = rng.gen_range(1..=m_max.max(1));
                let r = self.radius * rng.gen_range(0.05..1.0);
                self.witness(&self.ball_points(&mut rng, m, r))
            })
            .collect()
    }
}

/// KLM matrix of `f` at `points` under `spec`.
pub fn klm_matrix(f: &GaussSum, points: &[Vec<f64>], spec: KlmSpec, form: &ExtendedSymplecticForm) -> Result<KlmWitness> {
    KlmEngine::new(f, spec, form)?.witness(points)
}

/// Randomized search for a KLM matrix that is not PSD.
pub fn klm_search_violation(
    f: &GaussSum,
    spec: KlmSpec,
    form: &ExtendedSymplecticForm,
    config: &SearchConfig,
) -> Result<Option<KlmWitness>> {
    Ok(KlmEngine::new(f, spec, form)?.search(config)?.map(|(_, w)| w))
}

/// Frozen point batteries at one spectrum parameter.
pub fn klm_batteries(
    f: &GaussSum,
    spec: KlmSpec,
    form: &ExtendedSymplecticForm,
    count: usize,
    m_max: usize,
    seed: u64,
) -> Result<Vec<KlmWitness>> {
    KlmEngine::new(f, spec, form)?.batteries(count, m_max, seed)
}

fn sharp_matrix(params: &NCParams) -> Result<Matrix3<f64>> {
    params.require_d2()?;
    let (h, t, e, z) = (params.hbar(), params.theta(), params.eta(), params.zeta());
    let s = 1.0 / (1.0 - z);
    let (ht, tt, et) = (h * s, t * s, e * s);
    let h2 = h * h;
    Ok(Matrix3::new(
        ht * (1.0 + z) / (h * (1.0 - z)),
        -et / (h * (1.0 - z)),
        -tt / (h * (1.0 - z)),
        2.0 * ht * tt / h2,
        -ht * ht / h2,
        -tt * tt / h2,
        2.0 * ht * et / h2,
        -et * et / h2,
        -ht * ht / h2,
    ))
}

/// Spectrum parameters (α♯, β♯, γ♯) inherited by a convolution with a θ-η square.
pub fn sharp_map(alpha: f64, beta: f64, gamma: f64, params: &NCParams) -> Result<(f64, f64, f64)> {
    let v = sharp_matrix(params)? * Vector3::new(alpha, beta, gamma);
    Ok((v[0], v[1], v[2]))
}

/// Inverse of [`sharp_map`]; the map is linear, so this solves a 3×3 system.
pub fn sharp_inverse(a: f64, b: f64, g: f64, params: &NCParams) -> Result<(f64, f64, f64)> {
    let m = sharp_matrix(params)?;
    let v = m.lu().solve(&Vector3::new(a, b, g)).ok_or(Error::SingularMatrix)?;
    Ok((v[0], v[1], v[2]))
}

/// ζ′ = βγ/α², the dimensionless analog of ζ = θη/ħ² for a spectrum triple.
pub fn zeta_prime(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    if alpha == 0.0 {
        return Err(Error::InvalidInput("ζ′ needs α ≠ 0".into()));
    }
    Ok(beta * gamma / (alpha * alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub batteries: usize,
    pub battery_m_max: usize,
    pub battery_seed: u64,
    pub search: SearchConfig,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { batteries: 20, battery_m_max: 6, battery_seed: 7, search: SearchConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ProbeVerdict {
    Consistent,
    Refuted { witness: Box<KlmWitness> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub candidate: KlmSpec,
    pub matrices_checked: usize,
    #[serde(flatten)]
    pub verdict: ProbeVerdict,
}

impl ProbeRecord {
    pub fn is_consistent(&self) -> bool {
        matches!(self.verdict, ProbeVerdict::Consistent)
    }
}

/// Tests each candidate spectrum parameter with frozen batteries and a search.
pub fn spectrum_probe(
    f: &GaussSum,
    candidates: &[KlmSpec],
    form: &ExtendedSymplecticForm,
    config: &ProbeConfig,
) -> Result<Vec<ProbeRecord>> {
    candidates
        .iter()
        .map(|&spec| {
            let engine = KlmEngine::new(f, spec, form)?;
            let bat = engine.batteries(config.batteries, config.battery_m_max, config.battery_seed)?;
            let mut checked = bat.len();
            let verdict = if let Some(w) = bat.into_iter().find(|w| !w.is_psd) {
                ProbeVerdict::Refuted { witness: Box::new(w) }
            } else {
                match engine.search(&config.search)? {
                    Some((t, w)) => {
                        checked += t + 1;
                        ProbeVerdict::Refuted { witness: Box::new(w) }
                    }
                    None => {
                        checked += config.search.trials;
                        ProbeVerdict::Consistent
                    }
                }
            };
            Ok(ProbeRecord { candidate: spec, matrices_checked: checked, verdict })
        })
        .collect()
}
