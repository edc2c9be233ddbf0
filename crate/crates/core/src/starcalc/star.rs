//! Grid star products A exp((i/2)←∂ᵀP→∂) B in a mixed representation.
//!
//! Both factors are Fourier transformed along a vertex cover S of the
//! coupling graph of P. Couplings inside S become phases, couplings between S
//! and its complement become translations of the other factor. On a
//! commensurate grid every translation is a whole number of cells, so the
//! product is a sum of rolled, multiplied slices accumulated per output mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{integrate_grid, Axis, GridFn, GridSpec};
use crate::error::{Error, Result};
use crate::gausspoly::{star_exact, GaussPoly, GaussSum, StarKernel};
use crate::linalg::{CMat, Mat};

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// Output modes per work unit of the grid star product.
const TILE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarOptions {
    /// Mode pairs with |â_m|·|b̂_n| below `prune` × the largest such product are skipped.
    pub prune: f64,
}

impl Default for StarOptions {
    fn default() -> Self {
        Self { prune: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarStats {
    /// Axes carried in Fourier space.
    pub cover: Vec<usize>,
    pub pairs_used: u64,
    pub pairs_total: u64,
    pub tail_mass_a: f64,
    pub tail_mass_b: f64,
}

/// Axis split and integer translation tables for one kernel on one grid.
#[derive(Clone, Debug)]
pub struct StarPlan {
    p: Mat,
    cover: Vec<usize>,
    rest: Vec<usize>,
    /// shift_a[i][j]: cells A moves along rest[i] per unit of B's mode on cover[j].
    shift_a: Vec<Vec<i64>>,
    /// shift_b[i][j]: cells B moves along rest[i] per unit of A's mode on cover[j].
    shift_b: Vec<Vec<i64>>,
}

impl StarPlan {
    pub fn cover(&self) -> &[usize] {
        &self.cover
    }
}

fn couplings(p: &Mat) -> Vec<(usize, usize)> {
    let n = p.nrows();
    let scale = p.abs().max();
    let mut out = Vec::new();
    for t in 0..n {
        for u in t + 1..n {
            if p[(t, u)].abs() > 1e-14 * scale || p[(u, t)].abs() > 1e-14 * scale {
                out.push((t, u));
            }
        }
    }
    out
}

/// Smallest vertex cover, ties broken by the lowest axis mask.
fn vertex_cover(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut masks: Vec<u32> = (0..1u32 << n).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let mask = masks.into_iter().find(|m| edges.iter().all(|&(t, u)| m & (1 << t) != 0 || m & (1 << u) != 0)).unwrap_or(0);
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

fn integer(x: f64, what: impl Fn() -> String) -> Result<i64> {
    let r = x.round();
    if (x - r).abs() > 1e-6 * (1.0 + x.abs()) {
        return Err(Error::IncommensurateGrid(format!("{} = {x:.6} is not a whole number of cells", what())));
    }
    Ok(r as i64)
}

/// Prepares the mixed-representation product of `kernel` on `spec`.
pub fn star_plan(spec: &GridSpec, kernel: &StarKernel) -> Result<StarPlan> {
    let n = spec.dims();
    let p = kernel.poisson(n)?;
    let edges = couplings(&p);
    let cover = vertex_cover(n, &edges);
    let rest: Vec<usize> = (0..n).filter(|i| !cover.contains(i)).collect();
    let ax = spec.axes();
    // A translation of −½P k with k = 2πm/L measured in cells of length L/N.
    let cells = |t: usize, u: usize, coef: f64| -> Result<i64> {
        let x = -PI * coef * ax[t].npts as f64 / (ax[t].length() * ax[u].length());
        integer(x, || format!("translation along axis {t} per mode on axis {u}"))
    };
    let mut shift_a = vec![vec![0; cover.len()]; rest.len()];
    let mut shift_b = vec![vec![0; cover.len()]; rest.len()];
    for (i, &r) in rest.iter().enumerate() {
        for (j, &c) in cover.iter().enumerate() {
            shift_a[i][j] = cells(r, c, p[(r, c)])?;
            shift_b[i][j] = cells(r, c, p[(c, r)])?;
        }
    }
    Ok(StarPlan { p, cover, rest, shift_a, shift_b })
}

/// Common unit g of the kernel entries that become cell translations, or
/// `None` when the kernel needs no translations.
fn commensurate_unit(kernel: &StarKernel, n: usize) -> Result<Option<f64>> {
    let p = kernel.poisson(n)?;
    let edges = couplings(&p);
    let cover = vertex_cover(n, &edges);
    let crossing: Vec<f64> = (0..n)
        .flat_map(|t| (0..n).map(move |u| (t, u)))
        .filter(|&(t, u)| cover.contains(&t) != cover.contains(&u))
        .map(|(t, u)| p[(t, u)].abs())
        .filter(|&x| x > 0.0)
        .collect();
    if crossing.is_empty() {
        return Ok(None);
    }
    let min = crossing.iter().copied().fold(f64::INFINITY, f64::min);
    (1..=64)
        .map(|j| min / j as f64)
        .find(|g| crossing.iter().all(|x| ((x / g) - (x / g).round()).abs() < 1e-9 * (x / g)))
        .map(Some)
        .ok_or_else(|| Error::IncommensurateGrid("kernel entries have no common unit".into()))
}

/// Half-width of the widest commensurate cube with `npts` points per axis in
/// `dim` variables; `None` when any width works.
pub fn max_commensurate_half_width(kernel: &StarKernel, dim: usize, npts: usize) -> Result<Option<f64>> {
    Ok(commensurate_unit(kernel, dim)?.map(|g| (PI * npts as f64 * g).sqrt() / 2.0))
}

/// Largest commensurate cube around `center` with half-width at least
/// `min_half_width`: every translation of [`star_product`] is then a whole
/// number of cells.
pub fn commensurate_grid(kernel: &StarKernel, center: &[f64], npts: usize, min_half_width: f64) -> Result<GridSpec> {
    let Some(unit) = commensurate_unit(kernel, center.len())? else {
        return GridSpec::cube(center, min_half_width, npts);
    };
    let area = PI * npts as f64 * unit;
    let need = (2.0 * min_half_width).powi(2);
    let k = (area / need).floor();
    if k < 1.0 {
        return Err(Error::IncommensurateGrid(format!(
            "a box of half-width {min_half_width} needs npts ≥ {:.0}",
            (need / (PI * unit)).ceil()
        )));
    }
    GridSpec::cube(center, (area / k).sqrt() / 2.0, npts)
}

fn signed(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// In-place FFT along `axis` of a row-major array. Forward transforms are
/// divided by the length, so values are Σ_m â_m exp(2πi m j/N).
fn fft_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut planner = FftPlanner::new();
    let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
    let scale = if inverse { 1.0 } else { 1.0 / n as f64 };
    let block = n * stride;
    data.par_chunks_mut(block).take(outer).for_each(|chunk| {
        let mut line = vec![C0; n];
        let mut scratch = vec![C0; fft.get_inplace_scratch_len()];
        for s in 0..stride {
            for i in 0..n {
                line[i] = chunk[i * stride + s];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for i in 0..n {
                chunk[i * stride + s] = line[i] * scale;
            }
        }
    });
}

/// Reorders a row-major array so that `first` axes are outermost, each group
/// keeping its internal order. Returns the flat permutation applied.
fn group_index(shape: &[usize], first: &[usize], second: &[usize]) -> Vec<usize> {
    let total: usize = shape.iter().product();
    let strides: Vec<usize> = (0..shape.len()).map(|i| shape[i + 1..].iter().product()).collect();
    let mut order = Vec::with_capacity(total);
    let lens: Vec<usize> = first.iter().chain(second).map(|&a| shape[a]).collect();
    let axes: Vec<usize> = first.iter().chain(second).copied().collect();
    let mut idx = vec![0usize; axes.len()];
    for _ in 0..total {
        order.push(idx.iter().zip(&axes).map(|(&i, &a)| i * strides[a]).sum());
        for d in (0..idx.len()).rev() {
            idx[d] += 1;
            if idx[d] < lens[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    order
}

/// d += ph·a·b elementwise on split real and imaginary parts, which keeps the
/// loop vectorizable.
#[inline(always)]
fn twisted_run_generic(d: (&mut [f64], &mut [f64]), a: (&[f64], &[f64]), b: (&[f64], &[f64]), ph: Complex64) {
    let n = d.0.len();
    let (dr, di) = (d.0, &mut d.1[..n]);
    let (ar, ai, br, bi) = (&a.0[..n], &a.1[..n], &b.0[..n], &b.1[..n]);
    for c in 0..n {
        let tr = ar[c] * br[c] - ai[c] * bi[c];
        let ti = ar[c] * bi[c] + ai[c] * br[c];
        dr[c] += ph.re * tr - ph.im * ti;
        di[c] += ph.re * ti + ph.im * tr;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn twisted_run_avx2(d: (&mut [f64], &mut [f64]), a: (&[f64], &[f64]), b: (&[f64], &[f64]), ph: Complex64) {
    twisted_run_generic(d, a, b, ph)
}

fn twisted_run(d: (&mut [f64], &mut [f64]), a: (&[f64], &[f64]), b: (&[f64], &[f64]), ph: Complex64) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") && std::arch::is_x86_feature_detected!("fma") {
        // SAFETY: the required CPU features were detected at runtime.
        return unsafe { twisted_run_avx2(d, a, b, ph) };
    }
    twisted_run_generic(d, a, b, ph)
}

/// Grid star product with default options.
pub fn star_product(a: &GridFn, b: &GridFn, kernel: &StarKernel) -> Result<GridFn> {
    Ok(star_product_with(a, b, kernel, &StarOptions::default())?.0)
}

pub fn star_product_with(a: &GridFn, b: &GridFn, kernel: &StarKernel, opts: &StarOptions) -> Result<(GridFn, StarStats)> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch);
    }
    let spec = a.spec();
    let plan = star_plan(spec, kernel)?;
    let stats_base = |used, total| StarStats {
        cover: plan.cover.clone(),
        pairs_used: used,
        pairs_total: total,
        tail_mass_a: a.tail_mass(),
        tail_mass_b: b.tail_mass(),
    };
    if plan.cover.is_empty() {
        let mut out = a.mul(b)?;
        out.meta = format!("{}-star", kernel.name());
        return Ok((out, stats_base(0, 0)));
    }
    let shape = spec.shape();
    let ax = spec.axes();
    let mut ah = a.values().to_vec();
    let mut bh = b.values().to_vec();
    for &c in &plan.cover {
        fft_axis(&mut ah, &shape, c, false);
        fft_axis(&mut bh, &shape, c, false);
    }
    let order = group_index(&shape, &plan.cover, &plan.rest);
    let ag: Vec<Complex64> = order.iter().map(|&k| ah[k]).collect();
    let bg: Vec<Complex64> = order.iter().map(|&k| bh[k]).collect();
    drop((ah, bh));

    let cshape: Vec<usize> = plan.cover.iter().map(|&c| shape[c]).collect();
    let rshape: Vec<usize> = plan.rest.iter().map(|&r| shape[r]).collect();
    let ncov: usize = cshape.iter().product();
    let nrest: usize = rshape.iter().product();
    let cidx = |mut m: usize| -> Vec<usize> {
        let mut v = vec![0; cshape.len()];
        for d in (0..cshape.len()).rev() {
            v[d] = m % cshape[d];
            m /= cshape[d];
        }
        v
    };
    let modes: Vec<Vec<i64>> = (0..ncov).map(|m| cidx(m).iter().zip(&cshape).map(|(&i, &n)| signed(i, n)).collect()).collect();
    let wavenum: Vec<Vec<f64>> =
        modes.iter().map(|sm| sm.iter().zip(&plan.cover).map(|(&s, &c)| 2.0 * PI * s as f64 / ax[c].length()).collect()).collect();
    let slice_max = |g: &[Complex64]| -> Vec<f64> { g.par_chunks(nrest).map(|s| s.iter().fold(0.0f64, |m, v| m.max(v.norm()))).collect() };
    let amax = slice_max(&ag);
    let bmax = slice_max(&bg);
    // Each row becomes [re, re, im, im]: stored twice so a rolled row is one
    // contiguous run, with both parts in one block.
    let nl = *rshape.last().unwrap_or(&1);
    let doubled = |g: Vec<Complex64>| -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * g.len());
        for row in g.chunks(nl) {
            for _ in 0..2 {
                out.extend(row.iter().map(|v| v.re));
            }
            for _ in 0..2 {
                out.extend(row.iter().map(|v| v.im));
            }
        }
        out
    };
    let a4 = doubled(ag);
    let b4 = doubled(bg);
    let top = amax.iter().copied().fold(0.0, f64::max) * bmax.iter().copied().fold(0.0, f64::max);
    let thr = opts.prune * top;
    let bpeak = bmax.iter().copied().fold(0.0, f64::max);
    let live_a: Vec<usize> = (0..ncov).filter(|&m| amax[m] * bpeak >= thr && amax[m] > 0.0).collect();

    // Rows of the complement: every axis except the last, which is looped contiguously.
    let row_shape = &rshape[..rshape.len().saturating_sub(1)];
    let nrows: usize = row_shape.iter().product();
    // Block offsets of all rows after rolling by `shift`, in row-major order.
    let fill_rows = |buf: &mut Vec<usize>, shift: &[i64]| {
        buf.clear();
        buf.push(0);
        for (&n, &s) in row_shape.iter().zip(shift) {
            let len = buf.len();
            for k in 0..len {
                let base = buf[k] * n;
                for c in 0..n {
                    buf.push(base + (c as i64 + s).rem_euclid(n as i64) as usize);
                }
            }
            buf.drain(..len);
        }
        for o in buf.iter_mut() {
            *o *= 4 * nl;
        }
    };
    let ncover = plan.cover.len();
    let pcc: Vec<Vec<f64>> = (0..ncover).map(|t| (0..ncover).map(|u| plan.p[(plan.cover[t], plan.cover[u])]).collect()).collect();

    let mut out_re = vec![0.0; ncov * nrest];
    let mut out_im = vec![0.0; ncov * nrest];
    // Output modes are processed in tiles so each slice of A is reused across
    // the tile and the slices of B slide through cache as m advances.
    let tile = TILE.min(ncov);
    let used: u64 = out_re
        .par_chunks_mut(tile * nrest)
        .zip(out_im.par_chunks_mut(tile * nrest))
        .enumerate()
        .map(|(blk, (acc_re, acc_im))| {
            let mut used = 0u64;
            let mut sn = vec![0i64; ncover];
            let mut sh_a = vec![0i64; plan.rest.len()];
            let mut sh_b = vec![0i64; plan.rest.len()];
            let (mut rows_a, mut rows_b) = (Vec::with_capacity(nrows), Vec::with_capacity(nrows));
            for &m in &live_a {
                for jj in 0..acc_re.len() / nrest {
                    let sj = &modes[blk * tile + jj];
                    let sm = &modes[m];
                    let mut ok = true;
                    let mut nflat = 0usize;
                    for d in 0..ncover {
                        let v = sj[d] - sm[d];
                        let half = (cshape[d] / 2) as i64;
                        if v < -half || v >= half {
                            ok = false;
                            break;
                        }
                        sn[d] = v;
                        nflat = nflat * cshape[d] + v.rem_euclid(cshape[d] as i64) as usize;
                    }
                    if !ok || amax[m] * bmax[nflat] < thr || bmax[nflat] == 0.0 {
                        continue;
                    }
                    used += 1;
                    for i in 0..plan.rest.len() {
                        sh_a[i] = (0..ncover).map(|d| plan.shift_a[i][d] * sn[d]).sum();
                        sh_b[i] = (0..ncover).map(|d| plan.shift_b[i][d] * sm[d]).sum();
                    }
                    let (km, kn) = (&wavenum[m], &wavenum[nflat]);
                    let mut arg = 0.0;
                    for t in 0..ncover {
                        for u in 0..ncover {
                            arg += pcc[t][u] * km[t] * kn[u];
                        }
                    }
                    let ph = Complex64::new(0.0, -0.5 * arg).exp();
                    let (a0, b0) = (4 * m * nrest, 4 * nflat * nrest);
                    let sa = sh_a[sh_a.len() - 1].rem_euclid(nl as i64) as usize;
                    let sb = sh_b[sh_b.len() - 1].rem_euclid(nl as i64) as usize;
                    fill_rows(&mut rows_a, &sh_a[..sh_a.len() - 1]);
                    fill_rows(&mut rows_b, &sh_b[..sh_b.len() - 1]);
                    let acc_r = &mut acc_re[jj * nrest..(jj + 1) * nrest];
                    let acc_i = &mut acc_im[jj * nrest..(jj + 1) * nrest];
                    for (((dr, di), &oa), &ob) in acc_r.chunks_exact_mut(nl).zip(acc_i.chunks_exact_mut(nl)).zip(&rows_a).zip(&rows_b) {
                        let ra = &a4[a0 + oa..a0 + oa + 4 * nl];
                        let rb = &b4[b0 + ob..b0 + ob + 4 * nl];
                        twisted_run(
                            (dr, di),
                            (&ra[sa..sa + nl], &ra[2 * nl + sa..3 * nl + sa]),
                            (&rb[sb..sb + nl], &rb[2 * nl + sb..3 * nl + sb]),
                            ph,
                        );
                    }
                }
            }
            used
        })
        .sum();

    let mut values = vec![C0; out_re.len()];
    for (g, &k) in order.iter().enumerate() {
        values[k] = Complex64::new(out_re[g], out_im[g]);
    }
    for &c in &plan.cover {
        fft_axis(&mut values, &shape, c, true);
    }
    let total = (ncov * ncov) as u64;
    let grid = GridFn::from_values(spec.clone(), values, format!("{}-star", kernel.name()))?;
    Ok((grid, stats_base(used, total)))
}

/// Slow reference: the same mixed representation evaluated at arbitrary
/// points, with translations applied by trigonometric interpolation instead of
/// whole-cell rolls. Needs no commensurability.
pub fn star_reference_at(a: &GridFn, b: &GridFn, kernel: &StarKernel, points: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    if a.spec() != b.spec() {
        return Err(Error::GridMismatch);
    }
    let spec = a.spec();
    let n = spec.dims();
    let p = kernel.poisson(n)?;
    let cover = vertex_cover(n, &couplings(&p));
    let rest: Vec<usize> = (0..n).filter(|i| !cover.contains(i)).collect();
    let shape = spec.shape();
    let ax: &[Axis] = spec.axes();
    let mut ah = a.values().to_vec();
    let mut bh = b.values().to_vec();
    for c in 0..n {
        fft_axis(&mut ah, &shape, c, false);
        fft_axis(&mut bh, &shape, c, false);
    }
    let order = group_index(&shape, &cover, &rest);
    let ag: Vec<Complex64> = order.iter().map(|&k| ah[k]).collect();
    let bg: Vec<Complex64> = order.iter().map(|&k| bh[k]).collect();
    let ncov: usize = cover.iter().map(|&c| shape[c]).product();
    let nrest: usize = rest.iter().map(|&r| shape[r]).product();
    let wave = |axes: &[usize], mut flat: usize| -> Vec<f64> {
        let mut v = vec![0.0; axes.len()];
        for d in (0..axes.len()).rev() {
            let len = shape[axes[d]];
            v[d] = 2.0 * PI * signed(flat % len, len) as f64 / ax[axes[d]].length();
            flat /= len;
        }
        v
    };
    let kc: Vec<Vec<f64>> = (0..ncov).map(|m| wave(&cover, m)).collect();
    let kr: Vec<Vec<f64>> = (0..nrest).map(|q| wave(&rest, q)).collect();
    let origin: Vec<f64> = ax.iter().map(|a| a.coord(0)).collect();

    let am = CMat::from_row_slice(ncov, nrest, &ag);
    let bm = CMat::from_row_slice(ncov, nrest, &bg);
    // Plane waves exp(i k·(x − x₀)) over the rest axes, one column per translated point.
    let waves = |xs: &[Vec<f64>]| -> CMat {
        CMat::from_fn(nrest, xs.len(), |q, col| {
            let arg: f64 = kr[q].iter().zip(&rest).zip(&xs[col]).map(|((k, &r), x)| k * (x - origin[r])).sum();
            Complex64::new(0.0, arg).exp()
        })
    };
    let eval = |z: &[f64]| -> Complex64 {
        let shifted = |t: usize, k: &[f64], row: bool| -> f64 {
            z[t] - 0.5 * cover.iter().zip(k).map(|(&u, ku)| if row { p[(t, u)] } else { p[(u, t)] } * ku).sum::<f64>()
        };
        // A is evaluated at z + δA(n), B at z + δB(m).
        let xa: Vec<Vec<f64>> = kc.iter().map(|l| rest.iter().map(|&t| shifted(t, l, true)).collect()).collect();
        let xb: Vec<Vec<f64>> = kc.iter().map(|k| rest.iter().map(|&u| shifted(u, k, false)).collect()).collect();
        let av = &am * waves(&xa); // [m, n]
        let bv = &bm * waves(&xb); // [n, m]
        (0..ncov)
            .into_par_iter()
            .map(|m| {
                let k = &kc[m];
                let mut s = C0;
                for (nn, l) in kc.iter().enumerate() {
                    let mut arg = 0.0;
                    for (i, &t) in cover.iter().enumerate() {
                        for (j, &u) in cover.iter().enumerate() {
                            arg -= 0.5 * p[(t, u)] * k[i] * l[j];
                        }
                        arg += (k[i] + l[i]) * (z[t] - origin[t]);
                    }
                    s += av[(m, nn)] * bv[(nn, m)] * Complex64::new(0.0, arg).exp();
                }
                s
            })
            .sum()
    };
    Ok(points.iter().map(|z| eval(z)).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    /// Re ∫(ḡ⋆g)f.
    pub value: f64,
    /// Im ∫(ḡ⋆g)f, zero for real f up to rounding.
    pub residual: f64,
    /// |∫ḡ⋆g − ∫|g|²| relative to ∫|g|², when both are finite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cyclic_residual: Option<f64>,
}

/// ∫(ḡ⋆g)f on a grid.
pub fn positivity_functional(g: &GridFn, f: &GridFn, kernel: &StarKernel) -> Result<PositivityReport> {
    if g.spec() != f.spec() {
        return Err(Error::GridMismatch);
    }
    let h = star_product(&g.conj(), g, kernel)?;
    let v = integrate_grid(&h.mul(f)?);
    let lhs = integrate_grid(&h);
    let rhs = integrate_grid(&g.conj().mul(g)?);
    let cyclic = (lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    Ok(PositivityReport { value: v.re, residual: v.im, cyclic_residual: Some(cyclic) })
}

/// ∫(ḡ⋆g)f in closed form. Polynomial symbols are allowed; the cyclic check
/// is skipped when ∫|g|² diverges.
pub fn positivity_functional_exact(g: &GaussPoly, f: &GaussSum, kernel: &StarKernel) -> Result<PositivityReport> {
    let h = star_exact(&g.conj(), g, kernel)?;
    let hs = GaussSum::from(h.clone());
    let v = hs.multiply(f)?.integrate()?;
    let cyclic = match (h.integrate(), g.conj().multiply(g).and_then(|x| x.integrate())) {
        (Ok(l), Ok(r)) => Some((l - r).norm() / r.norm().max(f64::MIN_POSITIVE)),
        _ => None,
    };
    Ok(PositivityReport { value: v.re, residual: v.im, cyclic_residual: cyclic })
}
