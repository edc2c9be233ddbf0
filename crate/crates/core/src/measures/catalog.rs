//! Witness functions, one for each of the seven regions, plus the smearing Gaussian g.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{smear_with_square, square_root_gaussian, theta_eta_square, theta_product_state, wigner_pure, LabeledMeasure, Region, WaveFn};
use crate::error::{Error, Result};
use crate::gausspoly::{GaussPoly, Poly};
use crate::linalg::Mat;
use crate::symplectic::NCParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatalogId {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    F7,
    G,
}

impl CatalogId {
    pub const WITNESSES: [CatalogId; 7] = [Self::F1, Self::F2, Self::F3, Self::F4, Self::F5, Self::F6, Self::F7];

    /// Region the construction places the function in; g has none.
    pub fn expected_region(self) -> Option<Region> {
        match self {
            Self::F1 => Some(Region::Omega1),
            Self::F2 => Some(Region::Omega2),
            Self::F3 => Some(Region::Omega3),
            Self::F4 => Some(Region::Omega4),
            Self::F5 => Some(Region::Omega5),
            Self::F6 => Some(Region::Omega6),
            Self::F7 => Some(Region::Omega7),
            Self::G => None,
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
            Self::F5 => "f5",
            Self::F6 => "f6",
            Self::F7 => "f7",
            Self::G => "g",
        };
        f.write_str(s)
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "f1" => Self::F1,
            "f2" => Self::F2,
            "f3" => Self::F3,
            "f4" => Self::F4,
            "f5" => Self::F5,
            "f6" => Self::F6,
            "f7" => Self::F7,
            "g" => Self::G,
            _ => return Err(Error::InvalidInput(format!("unknown catalog id {s:?}"))),
        })
    }
}

/// Free constants of the catalog formulas. Unset values take per-function defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CatalogConsts {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

fn violated(what: &str) -> Error {
    Error::SideConditionViolated(what.into())
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(violated(what))
    }
}

/// Fills unset constants with the defaults for `id`.
pub fn resolved_consts(id: CatalogId, params: &NCParams, given: &CatalogConsts) -> Result<CatalogConsts> {
    let (theta, eta) = (params.theta(), params.eta());
    let half_inv_theta = || -> Result<f64> {
        require(theta > 0.0, "θ > 0")?;
        Ok(0.5 / theta)
    };
    let unused = |names: &[(&str, Option<f64>)]| -> Result<()> {
        match names.iter().find(|(_, v)| v.is_some()) {
            Some((n, _)) => Err(Error::InvalidInput(format!("{id} takes no constant {n}"))),
            None => Ok(()),
        }
    };
    let r = match id {
        CatalogId::F1 | CatalogId::F5 => {
            unused(&[("b", given.b), ("c", given.c), ("d", given.d)])?;
            CatalogConsts { a: Some(given.a.unwrap_or(0.2)), ..Default::default() }
        }
        CatalogId::F3 => {
            unused(&[("c", given.c), ("d", given.d)])?;
            CatalogConsts { a: Some(given.a.unwrap_or(0.3)), b: Some(given.b.unwrap_or(0.3)), ..Default::default() }
        }
        CatalogId::F2 | CatalogId::F6 => {
            unused(&[("b", given.b), ("c", given.c), ("d", given.d)])?;
            let a = match given.a {
                Some(a) => a,
                None => half_inv_theta()?,
            };
            CatalogConsts { a: Some(a), ..Default::default() }
        }
        CatalogId::F4 => {
            unused(&[("a", given.a), ("b", given.b), ("c", given.c), ("d", given.d)])?;
            CatalogConsts { a: Some(half_inv_theta()?), b: None, c: Some(theta), d: Some(eta) }
        }
        CatalogId::F7 => {
            unused(&[("b", given.b)])?;
            let a = match given.a {
                Some(a) => a,
                None => half_inv_theta()?,
            };
            CatalogConsts { a: Some(a), b: None, c: Some(given.c.unwrap_or(theta)), d: Some(given.d.unwrap_or(eta)) }
        }
        CatalogId::G => {
            unused(&[("a", given.a), ("b", given.b)])?;
            CatalogConsts { c: Some(given.c.unwrap_or(theta)), d: Some(given.d.unwrap_or(eta)), ..Default::default() }
        }
    };
    Ok(r)
}

/// Width α of b with b̄ ⋆_s b = Gaussian of variance parameter c, i.e. the
/// smaller root of c = (1 + α²s²)/(2α).
fn square_root_width(c: f64, s: f64) -> f64 {
    if s == 0.0 {
        0.5 / c
    } else {
        (c - (c * c - s * s).sqrt()) / (s * s)
    }
}

/// The Gaussian b with b̄ ⋆_θ ⋆_η b = exp(−q²/c − p²/d)/(π²cd).
fn smearing_root(params: &NCParams, c: f64, d: f64) -> Result<GaussPoly> {
    let (theta, eta) = (params.theta(), params.eta());
    require(c > 0.0 && c >= theta.abs(), "c ≥ θ")?;
    require(d > 0.0 && d >= eta.abs(), "d ≥ η")?;
    square_root_gaussian(square_root_width(c, theta), square_root_width(d, eta))
}

/// ψ(q) = C·P(q)·exp(−w|q|²) on two variables.
fn wave2(w: f64, scale: f64, poly: Poly) -> Result<WaveFn> {
    let f = GaussPoly::gaussian(&(Mat::identity(2, 2) * w), &[0.0, 0.0], scale)?.multiply_poly(&poly)?;
    WaveFn::new(f)
}

fn labeled(f: LabeledMeasure, id: CatalogId, params: &NCParams) -> Result<LabeledMeasure> {
    let mut f = f.with_params(params.clone())?;
    f.provenance = format!("catalog:{id}");
    Ok(match id.expected_region() {
        Some(r) => f.with_expected(r),
        None => f,
    })
}

/// Builds catalog function `id` under `params` (d = 2).
pub fn catalog(id: CatalogId, params: &NCParams, consts: &CatalogConsts) -> Result<LabeledMeasure> {
    params.require_d2()?;
    let k = resolved_consts(id, params, consts)?;
    let (hbar, theta, zeta) = (params.hbar(), params.theta(), params.zeta());
    let one = Poly::one(2);
    let f = match id {
        CatalogId::F1 => {
            let a = k.a.unwrap_or_default();
            require(0.0 < a && a < theta, "0 < a < θ")?;
            let psi = wave2(2.0 / (3.0 * a), 4.0 / (3.0 * a) * (2.0 / std::f64::consts::PI).sqrt(), Poly::var(2, 0))?;
            wigner_pure(&psi, hbar)?
        }
        CatalogId::F5 => {
            let a = k.a.unwrap_or_default();
            require(0.0 < a && a < theta, "0 < a < θ")?;
            let psi = wave2(0.5 / a, (std::f64::consts::PI * a).sqrt().recip(), one)?;
            wigner_pure(&psi, hbar)?
        }
        CatalogId::F3 => {
            let (a, b) = (k.a.unwrap_or_default(), k.b.unwrap_or_default());
            require(a > 0.0 && b > 0.0, "a, b > 0")?;
            require(a * b < hbar * hbar * (1.0 - zeta), "ab < ħ²(1−ζ)")?;
            let g = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0 / a, 1.0 / a, 1.0 / b, 1.0 / b]));
            LabeledMeasure::new(GaussPoly::normalized_gaussian(&g, &[0.0; 4])?, "gaussian", params.clone(), Vec::new())?
        }
        CatalogId::F2 | CatalogId::F6 => {
            let a = k.a.unwrap_or_default();
            require(a > 0.0, "a > 0")?;
            require(theta > 0.0, "θ > 0")?;
            let second = if id == CatalogId::F2 { WaveFn::hermite1(a)? } else { WaveFn::gaussian(a)? };
            theta_product_state(&WaveFn::gaussian(a)?, &second, params)?
        }
        CatalogId::F4 => {
            let f2 = catalog(CatalogId::F2, params, &CatalogConsts::default())?;
            smear_with_square(&f2, &smearing_root(params, k.c.unwrap_or_default(), k.d.unwrap_or_default())?)?
        }
        CatalogId::F7 => {
            let f6 = catalog(CatalogId::F6, params, &CatalogConsts { a: k.a, ..Default::default() })?;
            smear_with_square(&f6, &smearing_root(params, k.c.unwrap_or_default(), k.d.unwrap_or_default())?)?
        }
        CatalogId::G => {
            let b = smearing_root(params, k.c.unwrap_or_default(), k.d.unwrap_or_default())?;
            LabeledMeasure::new(theta_eta_square(&b, params)?, "theta_eta_square", params.clone(), Vec::new())?
        }
    };
    labeled(f, id, params)
}
