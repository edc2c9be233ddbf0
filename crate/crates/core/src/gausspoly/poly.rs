//! Sparse multivariate polynomials with complex coefficients.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Maximum total degree carried by the closed-form class.
pub const D_MAX: usize = 8;

pub type Exponents = Vec<u8>;

#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponents, Complex64>,
}

fn degree_of(e: &[u8]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Complex64::new(1.0, 0.0))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponents: Exponents, c: Complex64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    /// Affine form c + Σ coeffs[i]·vᵢ.
    pub fn linear(c: Complex64, coeffs: &[Complex64]) -> Self {
        let n = coeffs.len();
        let mut p = Self::constant(n, c);
        for (i, &a) in coeffs.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 1;
            p.add_term(e, a);
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Exponents, Complex64)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch { expected: nvars, got: e.len() });
            }
            p.add_term(e, c);
        }
        if p.degree() > D_MAX {
            return Err(Error::DegreeOverflow(p.degree()));
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| degree_of(e)).max().unwrap_or(0)
    }

    pub fn coefficient(&self, e: &[u8]) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, e: Exponents, c: Complex64) {
        if c == Complex64::default() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect() }
    }

    pub fn conj(&self) -> Poly {
        Poly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), c.conj())).collect() }
    }

    pub fn map_coefficients(&self, f: impl Fn(Complex64) -> Complex64) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), f(*c));
        }
        out
    }

    /// Product without the degree cap, for intermediate expressions.
    fn mul_unbounded(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        if self.nvars != other.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: other.nvars });
        }
        let deg = self.degree() + other.degree();
        if deg > D_MAX {
            return Err(Error::DegreeOverflow(deg));
        }
        Ok(self.mul_unbounded(other))
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut m = *c;
                for (x, &k) in z.iter().zip(e) {
                    if k > 0 {
                        m *= x.powi(k as i32);
                    }
                }
                m
            })
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * e[i] as f64);
            }
        }
        out
    }

    /// P(M v + s) as a polynomial in the new variables v, where M has one row
    /// per old variable.
    pub fn compose_affine(&self, m: &CMat, s: &[Complex64]) -> Result<Poly> {
        if m.nrows() != self.nvars || s.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, got: m.nrows() });
        }
        let k = m.ncols();
        if self.degree() == 0 {
            return Ok(Poly::constant(k, self.coefficient(&vec![0; self.nvars])));
        }
        let forms: Vec<Poly> = (0..self.nvars).map(|i| Poly::linear(s[i], &m.row(i).iter().copied().collect::<Vec<_>>())).collect();
        let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(self.nvars);
        for (i, f) in forms.iter().enumerate() {
            let maxe = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            let mut v = vec![Poly::one(k)];
            for p in 1..=maxe {
                let next = v[p - 1].mul_unbounded(f);
                v.push(next);
            }
            powers.push(v);
        }
        let mut out = Poly::zero(k);
        for (e, c) in &self.terms {
            let mut t = Poly::constant(k, *c);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    t = t.mul_unbounded(&powers[i][ei as usize]);
                }
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Drops coefficients with modulus at most `tol` times the largest one.
    pub fn prune(&self, tol: f64) -> Poly {
        let big = self.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        Poly { nvars: self.nvars, terms: self.terms.iter().filter(|(_, c)| c.norm() > tol * big).map(|(e, c)| (e.clone(), *c)).collect() }
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Splits variables into the first `k` and the rest, grouping terms by the
    /// trailing exponents.
    pub(crate) fn split_tail(&self, k: usize) -> BTreeMap<Exponents, Vec<(Exponents, Complex64)>> {
        let mut out: BTreeMap<Exponents, Vec<(Exponents, Complex64)>> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(e[k..].to_vec()).or_default().push((e[..k].to_vec(), *c));
        }
        out
    }
}

/// Isserlis moments E[w^β] of a centered Gaussian with (complex) covariance `cov`.
pub struct WickMoments<'a> {
    cov: &'a CMat,
    memo: HashMap<Exponents, Complex64>,
}

impl<'a> WickMoments<'a> {
    pub fn new(cov: &'a CMat) -> Self {
        Self { cov, memo: HashMap::new() }
    }

    pub fn moment(&mut self, beta: &[u8]) -> Complex64 {
        let total = degree_of(beta);
        if total == 0 {
            return Complex64::new(1.0, 0.0);
        }
        if total % 2 == 1 {
            return Complex64::default();
        }
        if let Some(v) = self.memo.get(beta) {
            return *v;
        }
        let i = beta.iter().position(|&b| b > 0).unwrap();
        let mut rest = beta.to_vec();
        rest[i] -= 1;
        let mut acc = Complex64::default();
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let mult = rest[j] as f64;
            let mut r2 = rest.clone();
            r2[j] -= 1;
            acc += self.cov[(i, j)] * mult * self.moment(&r2);
        }
        self.memo.insert(beta.to_vec(), acc);
        acc
    }
}
