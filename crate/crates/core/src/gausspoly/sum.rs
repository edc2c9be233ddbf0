//! Finite sums of closed-form terms, used for mixtures.

use num_complex::Complex64;

use super::{FtKind, GaussPoly, MomentReport, Poly};
use crate::error::{Error, Result};
use crate::linalg::Mat;

#[derive(Clone, Debug)]
pub struct GaussSum {
    terms: Vec<GaussPoly>,
}

impl From<GaussPoly> for GaussSum {
    fn from(f: GaussPoly) -> Self {
        Self { terms: vec![f] }
    }
}

impl GaussSum {
    pub fn new(terms: Vec<GaussPoly>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidInput("empty sum".into()));
        };
        let n = first.dim();
        if let Some(bad) = terms.iter().find(|t| t.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.dim() });
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[GaussPoly] {
        &self.terms
    }

    pub fn single(&self) -> Option<&GaussPoly> {
        match self.terms.as_slice() {
            [f] => Some(f),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.terms[0].dim()
    }

    pub fn is_real_tagged(&self) -> bool {
        self.terms.iter().all(|t| t.is_real_tagged())
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.degree()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| t.scale_real(s)).collect() }
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(self.terms.iter().chain(&other.terms).cloned().collect())
    }

    pub fn map_terms(&self, f: impl Fn(&GaussPoly) -> Result<GaussPoly>) -> Result<Self> {
        Ok(Self { terms: self.terms.iter().map(f).collect::<Result<_>>()? })
    }

    fn pairwise(&self, other: &Self, f: impl Fn(&GaussPoly, &GaussPoly) -> Result<GaussPoly>) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(f(a, b)?);
            }
        }
        Self::new(out)
    }

    pub fn integrate(&self) -> Result<Complex64> {
        self.terms.iter().map(|t| t.integrate()).sum()
    }

    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        self.map_terms(|t| t.marginal(keep))
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.pairwise(other, |a, b| a.multiply(b))
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.pairwise(other, |a, b| a.convolve(b))
    }

    pub fn affine_pullback(&self, m: &Mat, shift: &[f64]) -> Result<Self> {
        self.map_terms(|t| t.affine_pullback(m, shift))
    }

    pub fn symplectic_ft(&self, kind: &FtKind) -> Result<Self> {
        self.map_terms(|t| t.symplectic_ft(kind))
    }

    /// ∫ f².
    pub fn purity(&self) -> Result<f64> {
        Ok(self.multiply(self)?.integrate()?.re)
    }

    pub fn moments(&self) -> Result<MomentReport> {
        if !self.is_real_tagged() {
            return Err(Error::InvalidInput("moments require a real-valued function".into()));
        }
        let n = self.dim();
        let int_poly = |p: &Poly| -> Result<f64> {
            let mut acc = 0.0;
            for t in &self.terms {
                acc += t.multiply_poly(p)?.integrate()?.re;
            }
            Ok(acc)
        };
        let norm = self.integrate()?.re;
        let mut mean = vec![0.0; n];
        for (i, m) in mean.iter_mut().enumerate() {
            *m = int_poly(&Poly::var(n, i))? / norm;
        }
        let mut cov = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                let second = int_poly(&Poly::monomial(e, Complex64::new(1.0, 0.0)))? / norm;
                let v = second - mean[i] * mean[j];
                cov[i][j] = v;
                cov[j][i] = v;
            }
        }
        Ok(MomentReport { mean, covariance: cov, norm })
    }
}
