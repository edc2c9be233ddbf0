//! Sampled phase-space functions on uniform periodic grids: sampling,
//! quadrature, grid star products and file export.

mod io;
mod star;

pub use io::{read_binary, write_binary, write_csv, BINARY_MAGIC, BINARY_VERSION};
pub use star::{
    commensurate_grid, max_commensurate_half_width, positivity_functional, positivity_functional_exact, star_plan, star_product,
    star_product_with, star_reference_at, PositivityReport, StarOptions, StarPlan, StarStats,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausspoly::GaussSum;

/// Default number of standard deviations covered by a sampling box.
pub const DEFAULT_SIGMAS: f64 = 6.0;
/// Fraction of each axis treated as boundary in interior comparisons.
pub const BOUNDARY_FRACTION: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub npts: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.npts as f64
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Cell center of index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.spacing()
    }
}

/// Uniform cell-centered grid on a box in 2 or 4 dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.len() != 2 && axes.len() != 4 {
            return Err(Error::InvalidInput(format!("grids have 2 or 4 axes, got {}", axes.len())));
        }
        for (i, a) in axes.iter().enumerate() {
            if !(a.hi > a.lo) || !a.lo.is_finite() || !a.hi.is_finite() {
                return Err(Error::InvalidInput(format!("axis {i}: need lo < hi, got [{}, {}]", a.lo, a.hi)));
            }
            if a.npts < 16 || !a.npts.is_power_of_two() {
                return Err(Error::InvalidInput(format!("axis {i}: npts must be a power of two ≥ 16, got {}", a.npts)));
            }
        }
        Ok(Self { axes })
    }

    /// The same `npts` and `[c − h, c + h]` on every axis.
    pub fn cube(center: &[f64], half_width: f64, npts: usize) -> Result<Self> {
        Self::new(center.iter().map(|&c| Axis { lo: c - half_width, hi: c + half_width, npts }).collect())
    }

    /// Box centered at the origin whose half-width along axis i is `sigmas` ×
    /// the largest envelope standard deviation on that axis plus the largest
    /// envelope offset, over all terms.
    pub fn enclosing(f: &GaussSum, npts: usize, sigmas: f64) -> Result<Self> {
        let mut reach = vec![0.0f64; f.dim()];
        for t in f.terms() {
            let w = t.envelope_widths();
            let c = t.envelope_center();
            for (i, r) in reach.iter_mut().enumerate() {
                *r = r.max(c[i].abs() + sigmas * w[i]);
            }
        }
        Self::new(reach.iter().map(|&r| Axis { lo: -r, hi: r, npts }).collect())
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.npts).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.npts).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Row-major multi-index of flat index `k` (axis 0 slowest).
    pub fn unflatten(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for (i, a) in self.axes.iter().enumerate().rev() {
            idx[i] = k % a.npts;
            k /= a.npts;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.npts + i)
    }

    pub fn point(&self, k: usize) -> Vec<f64> {
        self.unflatten(k).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    /// Whether flat index `k` lies in the outer `BOUNDARY_FRACTION` of some axis.
    pub fn is_boundary(&self, k: usize) -> bool {
        self.unflatten(k).iter().zip(&self.axes).any(|(&i, a)| {
            let band = ((a.npts as f64) * BOUNDARY_FRACTION).ceil() as usize;
            i < band || i >= a.npts - band
        })
    }
}

/// Values of a function at the cell centers of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFn {
    spec: GridSpec,
    values: Vec<Complex64>,
    pub meta: String,
}

impl GridFn {
    pub fn from_values(spec: GridSpec, values: Vec<Complex64>, meta: impl Into<String>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::DimensionMismatch { expected: spec.len(), got: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite grid value at index {k}")));
        }
        Ok(Self { spec, values, meta: meta.into() })
    }

    pub fn constant(spec: &GridSpec, c: Complex64) -> Self {
        Self { spec: spec.clone(), values: vec![c; spec.len()], meta: "constant".into() }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        Self { spec: self.spec.clone(), values: self.values.par_iter().map(|&v| f(v)).collect(), meta: self.meta.clone() }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64 + Sync) -> Result<Self> {
        self.same_grid(other)?;
        let values = self.values.par_iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { spec: self.spec.clone(), values, meta: self.meta.clone() })
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// max |a − b| over cells outside the boundary band.
    pub fn interior_max_diff(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok((0..self.values.len())
            .into_par_iter()
            .filter(|&k| !self.spec.is_boundary(k))
            .map(|k| (self.values[k] - other.values[k]).norm())
            .reduce(|| 0.0, f64::max))
    }

    /// max |f| over cells outside the boundary band.
    pub fn interior_max_abs(&self) -> f64 {
        (0..self.values.len())
            .into_par_iter()
            .filter(|&k| !self.spec.is_boundary(k))
            .map(|k| self.values[k].norm())
            .reduce(|| 0.0, f64::max)
    }

    /// Share of Σ|f| carried by the boundary band; a proxy for periodization error.
    pub fn tail_mass(&self) -> f64 {
        let (edge, total) = (0..self.values.len())
            .into_par_iter()
            .map(|k| {
                let v = self.values[k].norm();
                (if self.spec.is_boundary(k) { v } else { 0.0 }, v)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }
}

/// Evaluates `f` at the cell centers of `spec`.
pub fn sample(f: &GaussSum, spec: &GridSpec) -> Result<GridFn> {
    if f.dim() != spec.dims() {
        return Err(Error::DimensionMismatch { expected: spec.dims(), got: f.dim() });
    }
    let values: Vec<Complex64> = (0..spec.len()).into_par_iter().map(|k| f.eval(&spec.point(k))).collect();
    GridFn::from_values(spec.clone(), values, "sampled")
}

/// Riemann sum times cell volume.
pub fn integrate_grid(f: &GridFn) -> Complex64 {
    f.values.par_iter().copied().sum::<Complex64>() * f.spec.cell_volume()
}

/// ∫|f|² on the grid.
pub fn grid_purity(f: &GridFn) -> f64 {
    f.values.par_iter().map(|v| v.norm_sqr()).sum::<f64>() * f.spec.cell_volume()
}
