//! Closed-form calculus on functions P(z)·exp(c − zᵀGz + hᵀz).
//!
//! G is complex symmetric with positive semidefinite real part; operations that
//! integrate require the real part of the integrated block to be definite.

mod descriptor;
mod poly;
mod star;
mod sum;

pub use descriptor::{Descriptor, DescriptorTerm, FunctionFile};
pub use poly::{Exponents, Poly, WickMoments, D_MAX};
pub use star::{gaussian_star_gaussian, star_exact, StarKernel};
pub use sum::GaussSum;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{cinverse, inverse, is_positive_definite, j_matrix, log_sqrt_det, sym_eigen, to_complex, CMat, CVec, Mat, I};
use crate::symplectic::ExtendedSymplecticForm;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const C1: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug)]
pub struct GaussPoly {
    g: CMat,
    h: CVec,
    c: Complex64,
    poly: Poly,
    real: bool,
}

/// Which symplectic Fourier transform to take.
#[derive(Clone, Debug)]
pub enum FtKind {
    /// f̃(a) = ∫ f(ξ) exp(−i aᵀJξ) dξ.
    Commutative,
    /// f̃(a) = ∫ f(z) exp(i aᵀΩ⁻¹z) dz.
    Noncommutative(ExtendedSymplecticForm),
}

impl FtKind {
    pub fn kernel(&self, n: usize) -> Mat {
        match self {
            FtKind::Commutative => -j_matrix(n / 2),
            FtKind::Noncommutative(f) => f.omega_inv(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
    pub norm: f64,
}

impl MomentReport {
    pub fn covariance_matrix(&self) -> Mat {
        let n = self.mean.len();
        Mat::from_fn(n, n, |i, j| self.covariance[i][j])
    }
}

fn check_symmetric_psd_real(g: &CMat) -> Result<()> {
    let n = g.nrows();
    if g.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.ncols() });
    }
    let asym = (g - g.transpose()).iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let scale = 1.0 + g.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    if asym > 1e-12 * scale {
        return Err(Error::InvalidInput("quadratic form is not symmetric".into()));
    }
    let (vals, _) = sym_eigen(&g.map(|x| x.re));
    if vals.first().is_some_and(|v| *v < -1e-12 * scale) {
        return Err(Error::NotIntegrable("real part of the quadratic form is indefinite".into()));
    }
    Ok(())
}

impl GaussPoly {
    /// General constructor; `h` and `c` are the linear and constant exponent terms.
    pub fn from_parts(g: CMat, h: CVec, c: Complex64, poly: Poly) -> Result<Self> {
        let n = g.nrows();
        if h.len() != n || poly.nvars() != n {
            return Err(Error::DimensionMismatch { expected: n, got: h.len().max(poly.nvars()) });
        }
        if poly.degree() > D_MAX {
            return Err(Error::DegreeOverflow(poly.degree()));
        }
        check_symmetric_psd_real(&g)?;
        Ok(Self { g, h, c, poly, real: false })
    }

    pub(crate) fn raw(g: CMat, h: CVec, c: Complex64, poly: Poly) -> Self {
        Self { g, h, c, poly, real: false }
    }

    /// s·exp(−(z−z₀)ᵀG(z−z₀)) for real symmetric G.
    pub fn gaussian(g: &Mat, center: &[f64], s: f64) -> Result<Self> {
        let n = g.nrows();
        if center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: center.len() });
        }
        let z0 = CVec::from_iterator(n, center.iter().map(|x| Complex64::new(*x, 0.0)));
        let gc = to_complex(g);
        let h = (&gc * &z0) * Complex64::new(2.0, 0.0);
        let c = Complex64::new(s.abs().ln(), 0.0) - (z0.transpose() * &gc * &z0)[(0, 0)];
        let sign = Complex64::new(s.signum(), 0.0);
        let mut f = Self::from_parts(gc, h, c, Poly::constant(n, sign))?;
        f.real = true;
        Ok(f.realify())
    }

    /// Normalized Gaussian exp(−(z−z₀)ᵀG(z−z₀))·√det G / π^{n/2}.
    pub fn normalized_gaussian(g: &Mat, center: &[f64]) -> Result<Self> {
        if !is_positive_definite(g) {
            return Err(Error::NotSPD);
        }
        let n = g.nrows();
        let s = g.determinant().sqrt() / PI.powf(n as f64 / 2.0);
        Self::gaussian(g, center, s)
    }

    /// A pure polynomial symbol (G = 0).
    pub fn polynomial(poly: Poly) -> Self {
        let n = poly.nvars();
        Self { g: CMat::zeros(n, n), h: CVec::zeros(n), c: C0, poly, real: false }
    }

    pub fn one(n: usize) -> Self {
        let mut f = Self::polynomial(Poly::one(n));
        f.real = true;
        f
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn g(&self) -> &CMat {
        &self.g
    }

    pub fn h(&self) -> &CVec {
        &self.h
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn degree(&self) -> usize {
        self.poly.degree()
    }

    pub fn is_real_tagged(&self) -> bool {
        self.real
    }

    pub fn is_polynomial(&self) -> bool {
        self.g.iter().all(|x| *x == C0) && self.h.iter().all(|x| *x == C0)
    }

    pub fn is_pure_gaussian(&self) -> bool {
        self.poly.degree() == 0
    }

    /// Real symmetric Gaussian form when G and h are real, i.e. the function is
    /// P(z)·s·exp(−(z−z₀)ᵀA(z−z₀)).
    pub fn real_form(&self) -> Option<(Mat, Vec<f64>)> {
        if self.g.iter().chain(self.h.iter()).any(|x| x.im.abs() > 1e-12 * (1.0 + x.norm())) {
            return None;
        }
        let a = self.g.map(|x| x.re);
        let z0 = inverse(&(a.clone() * 2.0)).ok()? * self.h.map(|x| x.re);
        Some((a, z0.iter().copied().collect()))
    }

    /// Marks the function as real-valued after confirming it at sample points.
    pub fn tag_real(mut self) -> Result<Self> {
        if !self.sampled_real() {
            return Err(Error::InvalidInput("function is not real-valued at sampled points".into()));
        }
        self.real = true;
        Ok(self.realify())
    }

    pub(crate) fn assume_real(mut self) -> Self {
        self.real = true;
        self.realify()
    }

    /// Drops rounding-level imaginary parts of a function known to be real.
    fn realify(mut self) -> Self {
        self.g = self.g.map(|x| Complex64::new(x.re, 0.0));
        self.h = self.h.map(|x| Complex64::new(x.re, 0.0));
        let phase = Complex64::new(0.0, self.c.im).exp();
        self.c = Complex64::new(self.c.re, 0.0);
        self.poly = self.poly.map_coefficients(|x| Complex64::new((x * phase).re, 0.0));
        self
    }

    /// Checks |Im f| ≤ 1e−12(1+|f|) at 64 Halton points spread over the Gaussian envelope.
    pub fn sampled_real(&self) -> bool {
        let n = self.dim();
        let widths = self.envelope_widths();
        let center = self.envelope_center();
        (0..64).all(|k| {
            let z: Vec<f64> = (0..n).map(|i| center[i] + widths[i] * 3.0 * (2.0 * halton(k + 1, PRIMES[i % PRIMES.len()]) - 1.0)).collect();
            let v = self.eval(&z);
            v.im.abs() <= 1e-12 * (1.0 + v.norm())
        })
    }

    /// Per-axis standard deviations of the Gaussian envelope |exp(−zᵀGz)|.
    pub fn envelope_widths(&self) -> Vec<f64> {
        let n = self.dim();
        let a = self.g.map(|x| x.re);
        match inverse(&a) {
            Ok(inv) => (0..n).map(|i| (0.5 * inv[(i, i)]).max(0.0).sqrt()).collect(),
            Err(_) => vec![1.0; n],
        }
    }

    pub fn envelope_center(&self) -> Vec<f64> {
        let a = self.g.map(|x| x.re) * 2.0;
        match inverse(&a) {
            Ok(inv) => (inv * self.h.map(|x| x.re)).iter().copied().collect(),
            Err(_) => vec![0.0; self.dim()],
        }
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        let n = self.dim();
        let mut q = C0;
        for i in 0..n {
            let mut row = C0;
            for j in 0..n {
                row += self.g[(i, j)] * z[j];
            }
            q += z[i] * row;
        }
        let lin: Complex64 = (0..n).map(|i| self.h[i] * z[i]).sum();
        self.poly.eval(z) * (self.c - q + lin).exp()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut f = self.clone();
        f.poly = f.poly.scale(s);
        f.real = self.real && s.im == 0.0;
        f
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self { g: self.g.map(|x| x.conj()), h: self.h.map(|x| x.conj()), c: self.c.conj(), poly: self.poly.conj(), real: self.real }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut f = Self::raw(&self.g + &other.g, &self.h + &other.h, self.c + other.c, self.poly.mul(&other.poly)?);
        f.real = self.real && other.real;
        Ok(f)
    }

    /// Multiplies by a polynomial in the same variables.
    pub fn multiply_poly(&self, p: &Poly) -> Result<Self> {
        let mut f = self.clone();
        f.poly = self.poly.mul(p)?;
        f.real = false;
        Ok(f)
    }

    /// Sum of two functions sharing the same exponent.
    pub(crate) fn add_same_exponent(&self, other: &Self) -> Result<Self> {
        let same = self.g == other.g && self.h == other.h;
        if !same {
            return Err(Error::InternalInconsistency("adding functions with different exponents".into()));
        }
        let shift = (other.c - self.c).exp();
        let mut f = self.clone();
        f.poly = self.poly.add(&other.poly.scale(shift));
        f.real = self.real && other.real;
        Ok(f)
    }

    /// z ↦ f(m·z + shift) for an invertible real m.
    pub fn affine_pullback(&self, m: &Mat, shift: &[f64]) -> Result<Self> {
        let n = self.dim();
        if m.nrows() != n || m.ncols() != n || shift.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.nrows() });
        }
        inverse(m)?;
        let s = CVec::from_iterator(n, shift.iter().map(|x| Complex64::new(*x, 0.0)));
        let mut f = self.pullback_c(&to_complex(m), &s)?;
        f.real = self.real;
        Ok(f)
    }

    /// v ↦ f(m·v) for a real m with one row per variable of f and any number of columns.
    pub fn linear_pullback(&self, m: &Mat) -> Result<Self> {
        if m.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: m.nrows() });
        }
        let mut f = self.pullback_c(&to_complex(m), &CVec::zeros(self.dim()))?;
        f.real = self.real;
        Ok(f)
    }

    /// (x, y) ↦ f(x)·g(y).
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (n, m) = (self.dim(), other.dim());
        let a = self.embed(n + m, &(0..n).collect::<Vec<_>>())?;
        let b = other.embed(n + m, &(n..n + m).collect::<Vec<_>>())?;
        let mut f = a.multiply(&b)?;
        f.real = self.real && other.real;
        Ok(f)
    }

    /// v ↦ f(m·v + s) where m has one row per variable of f (any number of columns).
    pub(crate) fn pullback_c(&self, m: &CMat, s: &CVec) -> Result<Self> {
        let gs = &self.g * s;
        let g = m.transpose() * &self.g * m;
        let h = m.transpose() * (&self.h - &gs * Complex64::new(2.0, 0.0));
        let c = self.c - (s.transpose() * &gs)[(0, 0)] + (self.h.transpose() * s)[(0, 0)];
        let poly = self.poly.compose_affine(m, s.as_slice())?;
        Ok(Self::raw(g, h, c, poly))
    }

    /// Embeds f into a larger variable set: new variable `pos[i]` carries old variable i.
    pub(crate) fn embed(&self, total: usize, pos: &[usize]) -> Result<Self> {
        let mut m = CMat::zeros(self.dim(), total);
        for (i, &p) in pos.iter().enumerate() {
            m[(i, p)] = C1;
        }
        self.pullback_c(&m, &CVec::zeros(self.dim()))
    }

    /// Integrates out every variable not listed in `keep`; the result is a
    /// function of the kept variables in the given order.
    pub fn integrate_out(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dim();
        if keep.iter().any(|&k| k >= n) {
            return Err(Error::InvalidInput("kept index out of range".into()));
        }
        let ys: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        let (k, m) = (keep.len(), ys.len());
        if m == 0 {
            let mut perm = CMat::zeros(n, n);
            for (j, &i) in keep.iter().enumerate() {
                perm[(i, j)] = C1;
            }
            let mut f = self.pullback_c(&perm, &CVec::zeros(n))?;
            f.real = self.real;
            return Ok(f);
        }
        let sub = |rows: &[usize], cols: &[usize]| CMat::from_fn(rows.len(), cols.len(), |r, c| self.g[(rows[r], cols[c])]);
        let gyy = sub(&ys, &ys);
        let gxy = sub(keep, &ys);
        let gxx = sub(keep, keep);
        let hy = CVec::from_iterator(m, ys.iter().map(|&i| self.h[i]));
        let hx = CVec::from_iterator(k, keep.iter().map(|&i| self.h[i]));
        if !is_positive_definite(&gyy.map(|x| x.re)) {
            return Err(Error::NotIntegrable("real part of the integrated block is not positive definite".into()));
        }
        let kinv = cinverse(&gyy)?;
        let kg = &kinv * gxy.transpose();
        let g2 = &gxx - &gxy * &kg;
        let h2 = &hx - &gxy * (&kinv * &hy);
        let quarter = Complex64::new(0.25, 0.0);
        let c2 =
            self.c + quarter * (hy.transpose() * &kinv * &hy)[(0, 0)] + Complex64::new(0.5 * m as f64 * PI.ln(), 0.0) - log_sqrt_det(&gyy)?;
        let poly = if self.poly.degree() == 0 {
            Poly::constant(k, self.poly.coefficient(&vec![0; n]))
        } else {
            // old x = x; old y = w + ½K h_y − K G_yx x; new variables are (x, w).
            let mut map = CMat::zeros(n, k + m);
            let mut shift = CVec::zeros(n);
            let mu0 = (&kinv * &hy) * Complex64::new(0.5, 0.0);
            for (j, &i) in keep.iter().enumerate() {
                map[(i, j)] = C1;
            }
            for (r, &i) in ys.iter().enumerate() {
                map[(i, k + r)] = C1;
                shift[i] = mu0[r];
                for j in 0..k {
                    map[(i, j)] = -kg[(r, j)];
                }
            }
            let q = self.poly.compose_affine(&map, shift.as_slice())?;
            let cov = &kinv * Complex64::new(0.5, 0.0);
            let mut wick = WickMoments::new(&cov);
            let mut out = Poly::zero(k);
            for (tail, heads) in q.split_tail(k) {
                let mom = wick.moment(&tail);
                if mom == C0 {
                    continue;
                }
                for (e, c) in heads {
                    out.add_term(e, c * mom);
                }
            }
            out
        };
        let f = Self::raw(g2, h2, c2, poly);
        Ok(if self.real { f.assume_real() } else { f })
    }

    pub fn integrate(&self) -> Result<Complex64> {
        let f = self.integrate_out(&[])?;
        Ok(f.poly.coefficient(&[]) * f.c.exp())
    }

    /// Marginal over the variables not in `keep`.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        self.integrate_out(keep)
    }

    pub fn moments(&self) -> Result<MomentReport> {
        if !self.real {
            return Err(Error::InvalidInput("moments require a real-valued function".into()));
        }
        let n = self.dim();
        let norm = self.integrate()?.re;
        let var = |i| Poly::var(n, i);
        let mut mean = vec![0.0; n];
        for (i, m) in mean.iter_mut().enumerate() {
            *m = self.multiply_poly(&var(i))?.integrate()?.re / norm;
        }
        let mut cov = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let p = Poly::linear(Complex64::new(-mean[i], 0.0), &unit(n, i))
                    .mul(&Poly::linear(Complex64::new(-mean[j], 0.0), &unit(n, j)))?;
                let v = self.multiply_poly(&p)?.integrate()?.re / norm;
                cov[i][j] = v;
                cov[j][i] = v;
            }
        }
        Ok(MomentReport { mean, covariance: cov, norm })
    }

    /// (f ♮ g)(z) = ∫ f(z − z′) g(z′) dz′.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: other.dim() });
        }
        let mut m1 = CMat::zeros(n, 2 * n);
        let mut m2 = CMat::zeros(n, 2 * n);
        for i in 0..n {
            m1[(i, i)] = C1;
            m1[(i, n + i)] = -C1;
            m2[(i, n + i)] = C1;
        }
        let zero = CVec::zeros(n);
        let joint = self.pullback_c(&m1, &zero)?.multiply(&other.pullback_c(&m2, &zero)?)?;
        let keep: Vec<usize> = (0..n).collect();
        let f = joint.integrate_out(&keep)?;
        Ok(if self.real && other.real { f.assume_real() } else { f })
    }

    /// a ↦ ∫ f(z) exp(i aᵀK z) dz for a real square K.
    pub fn linear_transform(&self, k: &Mat) -> Result<Self> {
        let n = self.dim();
        if k.nrows() != n || k.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: k.nrows() });
        }
        let pos: Vec<usize> = (n..2 * n).collect();
        let embedded = self.embed(2 * n, &pos)?;
        let mut g = CMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let v = -0.5 * I * k[(i, j)];
                g[(i, n + j)] = v;
                g[(n + j, i)] = v;
            }
        }
        let kernel = Self::raw(g, CVec::zeros(2 * n), C0, Poly::one(2 * n));
        let keep: Vec<usize> = (0..n).collect();
        embedded.multiply(&kernel)?.integrate_out(&keep)
    }

    pub fn symplectic_ft(&self, kind: &FtKind) -> Result<Self> {
        self.linear_transform(&kind.kernel(self.dim()))
    }

    /// Inverse of `symplectic_ft`: f(z) = |det K|/(2π)ⁿ ∫ f̃(a) exp(−i aᵀKz) da.
    pub fn inverse_symplectic_ft(&self, kind: &FtKind) -> Result<Self> {
        let n = self.dim();
        let k = kind.kernel(n);
        let det = k.determinant().abs();
        let back = self.linear_transform(&(-k.transpose()))?;
        Ok(back.scale_real(det / (2.0 * PI).powi(n as i32)))
    }

    /// ∂f/∂zᵢ.
    pub fn derivative(&self, i: usize) -> Result<Self> {
        let n = self.dim();
        let coeffs: Vec<Complex64> = (0..n).map(|j| -(self.g[(i, j)] + self.g[(j, i)])).collect();
        let dq = Poly::linear(self.h[i], &coeffs);
        let poly = self.poly.derivative(i).add(&self.poly.mul(&dq)?);
        let mut f = Self::raw(self.g.clone(), self.h.clone(), self.c, poly);
        f.real = self.real;
        Ok(f)
    }
}

fn unit(n: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![C0; n];
    v[i] = C1;
    v
}

const PRIMES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

pub(crate) fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

#[cfg(test)]
mod tests;
