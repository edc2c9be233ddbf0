//! Exact star products on the closed-form class.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{GaussPoly, Poly};
use crate::error::{Error, Result};
use crate::linalg::{antisymmetry_residual, e2, j_matrix, CMat, CVec, Mat, I};
use crate::symplectic::ExtendedSymplecticForm;

/// The deformation tensor P of a star product A exp((i/2)←∂ᵀP→∂) B.
#[derive(Clone, Debug)]
pub enum StarKernel {
    /// P = ħΩ.
    Full(ExtendedSymplecticForm),
    /// P = ħJ.
    Moyal { hbar: f64 },
    /// P = θE on the position plane.
    Theta { theta: f64 },
    /// P = ηE on the momentum plane.
    Eta { eta: f64 },
    /// P = θE ⊕ ηE, the product of the position and momentum factors.
    ThetaEta { theta: f64, eta: f64 },
    /// Any antisymmetric tensor.
    Custom(Mat),
}

#[derive(Serialize)]
struct KernelRepr {
    kind: &'static str,
    tensor: Vec<f64>,
}

impl StarKernel {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Full(_) => "full",
            Self::Moyal { .. } => "moyal",
            Self::Theta { .. } => "theta",
            Self::Eta { .. } => "eta",
            Self::ThetaEta { .. } => "theta-eta",
            Self::Custom(_) => "custom",
        }
    }

    /// Tensor acting on functions of `dim` variables (2 or 2d).
    pub fn poisson(&self, dim: usize) -> Result<Mat> {
        let nonzero = |x: f64, what: &str| {
            if x == 0.0 || !x.is_finite() {
                Err(Error::DegenerateKernel(format!("{what} = {x}")))
            } else {
                Ok(())
            }
        };
        let block = |p: &mut Mat, off: usize, s: f64| {
            let e = e2();
            for i in 0..2 {
                for j in 0..2 {
                    p[(off + i, off + j)] = s * e[(i, j)];
                }
            }
        };
        let p = match (self, dim) {
            (Self::Full(f), n) if n == f.dim() => f.poisson(),
            (Self::Moyal { hbar }, n) if n % 2 == 0 => {
                nonzero(*hbar, "ħ")?;
                j_matrix(n / 2) * *hbar
            }
            (Self::Theta { theta }, 2 | 4) => {
                nonzero(*theta, "θ")?;
                let mut p = Mat::zeros(dim, dim);
                block(&mut p, 0, *theta);
                p
            }
            (Self::Eta { eta }, 2 | 4) => {
                nonzero(*eta, "η")?;
                let mut p = Mat::zeros(dim, dim);
                block(&mut p, dim - 2, *eta);
                p
            }
            (Self::ThetaEta { theta, eta }, 4) => {
                nonzero(*theta, "θ")?;
                nonzero(*eta, "η")?;
                let mut p = Mat::zeros(4, 4);
                block(&mut p, 0, *theta);
                block(&mut p, 2, *eta);
                p
            }
            (Self::Custom(m), n) if m.nrows() == n => {
                let r = antisymmetry_residual(m);
                if r > 1e-12 {
                    return Err(Error::NotAntisymmetric(r));
                }
                m.clone()
            }
            _ => return Err(Error::DegenerateKernel(format!("{} kernel on {dim} variables", self.name()))),
        };
        Ok(p)
    }

    pub fn describe(&self, dim: usize) -> serde_json::Value {
        let tensor = self.poisson(dim).map(|m| m.transpose().iter().copied().collect()).unwrap_or_default();
        serde_json::to_value(KernelRepr { kind: self.name(), tensor }).unwrap_or_default()
    }
}

/// Exact A ⋆ B. Polynomial operands use the terminating bidifferential series;
/// otherwise both operands are Fourier transformed and the twisted double
/// integral is evaluated in closed form.
pub fn star_exact(a: &GaussPoly, b: &GaussPoly, kernel: &StarKernel) -> Result<GaussPoly> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.dim() });
    }
    let p = kernel.poisson(n)?;
    if a.is_polynomial() || b.is_polynomial() {
        return star_series(a, b, &p);
    }
    let minus_i = -Mat::identity(n, n);
    let fa = a.linear_transform(&minus_i)?;
    let fb = b.linear_transform(&minus_i)?;
    // Variables (z, k1, k2).
    let k1: Vec<usize> = (n..2 * n).collect();
    let k2: Vec<usize> = (2 * n..3 * n).collect();
    let mut g = CMat::zeros(3 * n, 3 * n);
    for i in 0..n {
        let v = -0.5 * I;
        g[(n + i, i)] = v;
        g[(i, n + i)] = v;
        g[(2 * n + i, i)] = v;
        g[(i, 2 * n + i)] = v;
        for j in 0..n {
            let w = 0.25 * I * p[(i, j)];
            g[(n + i, 2 * n + j)] = w;
            g[(2 * n + j, n + i)] = w;
        }
    }
    let twist = GaussPoly::raw(g, CVec::zeros(3 * n), Complex64::default(), Poly::one(3 * n));
    let joint = fa.embed(3 * n, &k1)?.multiply(&fb.embed(3 * n, &k2)?)?.multiply(&twist)?;
    let keep: Vec<usize> = (0..n).collect();
    let out = joint.integrate_out(&keep)?.scale_real((2.0 * PI).powi(-2 * n as i32));
    Ok(out)
}

fn star_series(a: &GaussPoly, b: &GaussPoly, p: &Mat) -> Result<GaussPoly> {
    let n = a.dim();
    let bound = match (a.is_polynomial(), b.is_polynomial()) {
        (true, true) => a.degree().min(b.degree()),
        (true, false) => a.degree(),
        _ => b.degree(),
    };
    let mut total = a.multiply(b)?;
    let mut level = vec![(Complex64::new(1.0, 0.0), a.clone(), b.clone())];
    for r in 1..=bound {
        let mut next = Vec::new();
        for (c, da, db) in &level {
            for alpha in 0..n {
                let xa = da.derivative(alpha)?;
                if xa.poly().is_empty() {
                    continue;
                }
                for beta in 0..n {
                    if p[(alpha, beta)] == 0.0 {
                        continue;
                    }
                    let xb = db.derivative(beta)?;
                    if xb.poly().is_empty() {
                        continue;
                    }
                    next.push((c * 0.5 * I * p[(alpha, beta)] / r as f64, xa.clone(), xb));
                }
            }
        }
        for (c, x, y) in &next {
            total = total.add_same_exponent(&x.multiply(y)?.scale(*c))?;
        }
        level = next;
    }
    Ok(total)
}

/// Closed-form star product of two pure Gaussians.
pub fn gaussian_star_gaussian(a: &GaussPoly, b: &GaussPoly, kernel: &StarKernel) -> Result<GaussPoly> {
    for f in [a, b] {
        if !f.is_pure_gaussian() {
            return Err(Error::NotGaussian(f.degree()));
        }
    }
    star_exact(a, b, kernel)
}
