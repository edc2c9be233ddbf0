//! JSON interchange format for closed-form functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{GaussPoly, GaussSum, Poly};
use crate::error::{Error, Result};
use crate::linalg::{inverse, CMat, CVec};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DescriptorTerm {
    pub exponents: Vec<u8>,
    pub re: f64,
    pub im: f64,
}

/// f(z) = P(z)·exp(−(z−z₀)ᵀG(z−z₀) + i bᵀz + logscale), matrices row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Descriptor {
    pub dim: usize,
    pub center: Vec<f64>,
    pub g_re: Vec<f64>,
    pub g_im: Vec<f64>,
    pub linphase: Vec<f64>,
    pub poly: Vec<DescriptorTerm>,
    pub logscale_re: f64,
    pub logscale_im: f64,
}

/// A single descriptor or a finite sum of them.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionFile {
    Single(Descriptor),
    Sum { terms: Vec<Descriptor> },
}

impl Descriptor {
    pub fn from_gausspoly(f: &GaussPoly) -> Result<Self> {
        let n = f.dim();
        let re_g = f.g().map(|x| x.re);
        let re_h = f.h().map(|x| x.re);
        let z0: Vec<f64> = match inverse(&(&re_g * 2.0)) {
            Ok(inv) => (inv * re_h).iter().copied().collect(),
            Err(_) if re_h.iter().all(|x| *x == 0.0) => vec![0.0; n],
            Err(_) => return Err(Error::InvalidInput("linear term outside the range of the quadratic form".into())),
        };
        let z = CVec::from_iterator(n, z0.iter().map(|x| Complex64::new(*x, 0.0)));
        let gz = f.g() * &z;
        let linphase: Vec<f64> = (0..n).map(|i| f.h()[i].im - 2.0 * gz[i].im).collect();
        // Move the largest coefficient magnitude into the log scale.
        let top = f.poly().terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
        let shift = if top > 0.0 && top.is_finite() { top.ln() } else { 0.0 };
        let logscale = f.c() + (z.transpose() * &gz)[(0, 0)] + shift;
        let row_major = |m: CMat, part: fn(&Complex64) -> f64| m.transpose().iter().map(part).collect();
        Ok(Self {
            dim: n,
            center: z0,
            g_re: row_major(f.g().clone(), |x| x.re),
            g_im: row_major(f.g().clone(), |x| x.im),
            linphase,
            poly: f
                .poly()
                .terms()
                .map(|(e, c)| {
                    let c = c / shift.exp();
                    DescriptorTerm { exponents: e.clone(), re: c.re, im: c.im }
                })
                .collect(),
            logscale_re: logscale.re,
            logscale_im: logscale.im,
        })
    }

    pub fn to_gausspoly(&self) -> Result<GaussPoly> {
        let n = self.dim;
        for (len, what) in [(self.center.len(), n), (self.linphase.len(), n), (self.g_re.len(), n * n), (self.g_im.len(), n * n)] {
            if len != what {
                return Err(Error::DimensionMismatch { expected: what, got: len });
            }
        }
        let g = CMat::from_fn(n, n, |i, j| Complex64::new(self.g_re[i * n + j], self.g_im[i * n + j]));
        let z = CVec::from_iterator(n, self.center.iter().map(|x| Complex64::new(*x, 0.0)));
        let b = CVec::from_iterator(n, self.linphase.iter().map(|x| Complex64::new(0.0, *x)));
        let h = &g * &z * Complex64::new(2.0, 0.0) + b;
        let c = Complex64::new(self.logscale_re, self.logscale_im) - (z.transpose() * &g * &z)[(0, 0)];
        let poly = Poly::from_terms(n, self.poly.iter().map(|t| (t.exponents.clone(), Complex64::new(t.re, t.im))))?;
        let f = GaussPoly::from_parts(g, h, c, poly)?;
        if f.sampled_real() {
            f.tag_real()
        } else {
            Ok(f)
        }
    }
}

impl FunctionFile {
    pub fn from_sum(f: &GaussSum) -> Result<Self> {
        if f.terms().len() == 1 {
            return Ok(Self::Single(Descriptor::from_gausspoly(&f.terms()[0])?));
        }
        Ok(Self::Sum { terms: f.terms().iter().map(Descriptor::from_gausspoly).collect::<Result<_>>()? })
    }

    pub fn to_sum(&self) -> Result<GaussSum> {
        match self {
            Self::Single(d) => Ok(GaussSum::from(d.to_gausspoly()?)),
            Self::Sum { terms } => GaussSum::new(terms.iter().map(|d| d.to_gausspoly()).collect::<Result<_>>()?),
        }
    }
}
