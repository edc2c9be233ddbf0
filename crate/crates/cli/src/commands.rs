use std::fs::File;
use std::io::{BufWriter, Read};
use std::path::Path;

use ncwig::criteria::{
    classify, gaussian_exact, nc_klm_spec, purity_report, uncertainty_check_with, Budget, KlmEngine, KlmSpec, SearchConfig,
};
use ncwig::gausspoly::{gaussian_star_gaussian, FunctionFile, GaussSum, StarKernel};
use ncwig::linalg::Mat;
use ncwig::measures::{catalog, resolved_consts, CatalogConsts, CatalogId, LabeledMeasure};
use ncwig::starcalc::{
    commensurate_grid, grid_purity, max_commensurate_half_width, sample, star_product_with, write_binary, write_csv, GridSpec, StarOptions,
    DEFAULT_SIGMAS,
};
use ncwig::symplectic::{from_row_major, pfaffian, standard_darboux, verify_darboux, ExtendedSymplecticForm, NCParams};
use ncwig::{Error, Result};
use serde_json::{json, Value};

use crate::args::{Command, Format, KernelArg, RunConfig};
use crate::render::Table;

pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_ETA: f64 = 0.5;
/// Grid size for `catalog --csv` when `--npts` is not given.
pub const CATALOG_CSV_NPTS: usize = 16;

/// What a command hands back for rendering.
pub struct Outcome {
    pub command: &'static str,
    pub params: Option<NCParams>,
    pub npts: Option<usize>,
    pub result: Value,
    pub table: Option<Table>,
    pub default_format: Format,
    /// Set when the run completed but its checks failed.
    pub failure: Option<String>,
}

impl Outcome {
    fn json(command: &'static str, params: Option<NCParams>, result: Value) -> Self {
        Self { command, params, npts: None, result, table: None, default_format: Format::Json, failure: None }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn config_params(cfg: &RunConfig) -> Result<NCParams> {
    NCParams::d2(cfg.hbar.unwrap_or(DEFAULT_HBAR), cfg.theta.unwrap_or(DEFAULT_THETA), cfg.eta.unwrap_or(DEFAULT_ETA))
}

fn read_json(path: &Path) -> Result<Value> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(path).map_err(|e| Error::InvalidInput(format!("cannot open {}: {e}", path.display())))?.read_to_string(&mut text)?;
    }
    let mut v: Value = serde_json::from_str(&text)?;
    for key in ["result", "measure"] {
        if let Some(inner) = v.get(key).filter(|x| x.is_object()) {
            v = inner.clone();
        }
    }
    Ok(v)
}

/// Loads a measure. Explicit `--hbar/--theta/--eta` override the file's
/// parameters; a changed ħ drops the construction history.
pub fn load_measure(path: &Path, cfg: &RunConfig) -> Result<LabeledMeasure> {
    let v = read_json(path)?;
    let fallback = config_params(cfg)?;
    let m = match LabeledMeasure::from_json(&v, &fallback) {
        Err(Error::DimensionMismatch { got: 2, .. }) if v.get("function").is_none() => {
            LabeledMeasure::from_json(&v, &NCParams::commutative(fallback.hbar(), 1)?)?
        }
        other => other?,
    };
    if !cfg.overrides_params() || m.params().d() != 2 {
        return Ok(m);
    }
    let old = m.params().clone();
    let params = NCParams::d2(cfg.hbar.unwrap_or(old.hbar()), cfg.theta.unwrap_or(old.theta()), cfg.eta.unwrap_or(old.eta()))?;
    if (params.hbar() - old.hbar()).abs() > 1e-12 * old.hbar() {
        LabeledMeasure::unlabeled(m.function().clone(), params)
    } else {
        m.with_params(params)
    }
}

/// Loads any function descriptor, normalized or not, with the file's parameters if it has them.
fn load_function(path: &Path) -> Result<(GaussSum, Option<NCParams>)> {
    let v = read_json(path)?;
    let params = v.get("params").map(|p| serde_json::from_value::<NCParams>(p.clone())).transpose()?;
    let f = v.get("function").unwrap_or(&v);
    let file: FunctionFile = serde_json::from_value(f.clone())?;
    Ok((file.to_sum()?, params))
}

fn default_npts(dim: usize) -> usize {
    if dim <= 2 {
        256
    } else {
        64
    }
}

fn search_config(cfg: &RunConfig) -> SearchConfig {
    SearchConfig { m_max: cfg.m_max, trials: cfg.trials, seed: cfg.seed, ..SearchConfig::default() }
}

fn budget(cfg: &RunConfig, klm: bool) -> Budget {
    Budget { klm, search: search_config(cfg), ..Budget::default() }
}

pub fn run(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    match cmd {
        Command::Darboux { lambda } => darboux(cfg, *lambda),
        Command::Pfaffian { matrix } => pfaffian_cmd(cfg, matrix.as_deref()),
        Command::Catalog { id, a, b, c, d, csv } => {
            let consts = CatalogConsts { a: *a, b: *b, c: *c, d: *d };
            catalog_cmd(cfg, *id, &consts, csv.as_deref())
        }
        Command::Purity { input, grid } => purity(cfg, input, *grid),
        Command::Marginals { input } => marginals(cfg, input),
        Command::GaussianTest { input } => gaussian_test(cfg, input),
        Command::Uncertainty { input } => uncertainty(cfg, input),
        Command::Klm { input, alpha, beta, gamma, commutative } => klm(cfg, input, *alpha, *beta, *gamma, *commutative),
        Command::Star { a, b, kernel, out, binary, sigmas } => star(cfg, a, b, *kernel, out, *binary, *sigmas),
        Command::Classify { input, no_klm } => classify_cmd(cfg, input, !no_klm),
        Command::Figure1 => figure1(cfg),
    }
}

fn darboux(cfg: &RunConfig, lambda: f64) -> Result<Outcome> {
    let params = config_params(cfg)?;
    let s = standard_darboux(params.hbar(), params.theta(), params.eta(), lambda)?;
    let check = verify_darboux(s.s(), s.form())?;
    if !check.ok {
        return Err(Error::InternalInconsistency(format!("Darboux map fails verification (residual {:.3e})", check.symplectic_residual)));
    }
    let result = json!({
        "lambda": s.lambda(),
        "mu": s.mu(),
        "s": rows(s.s()),
        "s_inv": rows(s.s_inv()),
        "det": s.det(),
        "pf": s.form().pf(),
        "check": to_value(&check)?,
    });
    Ok(Outcome::json("darboux", Some(params), result))
}

fn pfaffian_cmd(cfg: &RunConfig, matrix: Option<&[f64]>) -> Result<Outcome> {
    let params = config_params(cfg)?;
    let (m, source) = match matrix {
        Some(v) => {
            let n = (v.len() as f64).sqrt().round() as usize;
            if n * n != v.len() {
                return Err(Error::InvalidInput(format!("{} entries do not form a square matrix", v.len())));
            }
            (from_row_major(n, v)?, "matrix")
        }
        None => (ExtendedSymplecticForm::new(&params)?.omega().clone(), "omega"),
    };
    let pf = pfaffian(&m)?;
    let det = m.determinant();
    let result = json!({
        "source": source,
        "matrix": rows(&m),
        "pf": pf,
        "det": det,
        "pf_squared_minus_det": pf * pf - det,
    });
    Ok(Outcome::json("pfaffian", Some(params), result))
}

fn catalog_cmd(cfg: &RunConfig, id: CatalogId, consts: &CatalogConsts, csv: Option<&Path>) -> Result<Outcome> {
    let params = config_params(cfg)?;
    let consts = resolved_consts(id, &params, consts)?;
    let m = catalog(id, &params, &consts)?;
    let mut result = json!({
        "id": id.to_string(),
        "consts": to_value(&consts)?,
        "measure": m.to_json()?,
    });
    let mut npts = None;
    if let Some(path) = csv {
        let n = cfg.npts.unwrap_or(CATALOG_CSV_NPTS);
        let grid = sample(m.function(), &GridSpec::enclosing(m.function(), n, DEFAULT_SIGMAS)?)?;
        write_csv(&grid, BufWriter::new(File::create(path)?))?;
        result["csv"] = json!({ "path": path.display().to_string(), "npts": n });
        npts = Some(n);
    }
    let mut out = Outcome::json("catalog", Some(params), result);
    out.npts = npts;
    Ok(out)
}

fn purity(cfg: &RunConfig, input: &Path, grid: bool) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let report = purity_report(&m)?;
    let mut result = json!({ "provenance": m.provenance(), "purity": to_value(&report)? });
    let mut out_npts = None;
    let mut failure = None;
    if grid {
        let n = cfg.npts.unwrap_or(default_npts(m.function().dim()));
        let spec = GridSpec::enclosing(m.function(), n, DEFAULT_SIGMAS)?;
        let value = grid_purity(&sample(m.function(), &spec)?);
        let rel = (value - report.purity).abs() / report.purity.abs();
        let agrees = rel <= cfg.tolerance;
        if !agrees {
            failure = Some(format!("grid purity differs from closed form by {rel:.3e} (tolerance {:.1e})", cfg.tolerance));
        }
        result["grid"] = json!({ "npts": n, "purity": value, "relative_difference": rel, "agrees": agrees });
        out_npts = Some(n);
    }
    let mut out = Outcome::json("purity", Some(m.params().clone()), result);
    out.npts = out_npts;
    out.failure = failure;
    Ok(out)
}

fn marginals(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let params = m.params().clone();
    params.require_d2()?;
    let f = m.function();
    let entry = |keep: &[usize], scale: f64| -> Result<Value> {
        let g = f.marginal(keep)?;
        let purity = g.purity()?;
        let bound = if scale > 0.0 { Some(1.0 / (2.0 * std::f64::consts::PI * scale)) } else { None };
        Ok(json!({
            "axes": keep,
            "function": to_value(&FunctionFile::from_sum(&g)?)?,
            "normalization": g.integrate()?.re,
            "purity": purity,
            "bound": bound,
            "exceeded": bound.map(|b| purity > b * (1.0 + 1e-8)),
        }))
    };
    let result = json!({
        "provenance": m.provenance(),
        "positions": entry(&[0, 1], params.theta())?,
        "momenta": entry(&[2, 3], params.eta())?,
    });
    Ok(Outcome::json("marginals", Some(params), result))
}

fn gaussian_test(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let form = ExtendedSymplecticForm::new(m.params())?;
    let exact = gaussian_exact(&m, &form)?.ok_or(Error::NotGaussian(m.function().max_degree()))?;
    let result = json!({ "provenance": m.provenance(), "gaussian_exact": to_value(&exact)? });
    Ok(Outcome::json("gaussian-test", Some(m.params().clone()), result))
}

fn uncertainty(cfg: &RunConfig, input: &Path) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let result = json!({
        "provenance": m.provenance(),
        "uncertainty": to_value(&uncertainty_check_with(&m, false)?)?,
        "uncertainty_commutative": to_value(&uncertainty_check_with(&m, true)?)?,
    });
    Ok(Outcome::json("uncertainty", Some(m.params().clone()), result))
}

fn klm(cfg: &RunConfig, input: &Path, alpha: Option<f64>, beta: Option<f64>, gamma: Option<f64>, commutative: bool) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let params = m.params().clone();
    let spec = if commutative {
        KlmSpec::Commutative { alpha: alpha.unwrap_or(params.hbar()) }
    } else if alpha.is_some() || beta.is_some() || gamma.is_some() {
        KlmSpec::Nc { alpha: alpha.unwrap_or(params.hbar()), beta: beta.unwrap_or(params.theta()), gamma: gamma.unwrap_or(params.eta()) }
    } else {
        nc_klm_spec(&params)?
    };
    let form = ExtendedSymplecticForm::new(&params)?;
    let search = search_config(cfg);
    let engine = KlmEngine::new(m.function(), spec, &form)?;
    let found = engine.search(&search)?;
    let result = json!({
        "provenance": m.provenance(),
        "spec": to_value(&spec)?,
        "search": to_value(&search)?,
        "radius": engine.radius(),
        "violation_found": found.is_some(),
        "trial": found.as_ref().map(|(t, _)| *t),
        "witness": found.map(|(_, w)| w).map(|w| to_value(&w)).transpose()?,
    });
    Ok(Outcome::json("klm", Some(params), result))
}

fn kernel_for(arg: KernelArg, params: &NCParams) -> Result<StarKernel> {
    Ok(match arg {
        KernelArg::Full => StarKernel::Full(ExtendedSymplecticForm::new(params)?),
        KernelArg::Moyal => StarKernel::Moyal { hbar: params.hbar() },
        KernelArg::Theta => StarKernel::Theta { theta: params.theta() },
        KernelArg::Eta => StarKernel::Eta { eta: params.eta() },
        KernelArg::ThetaEta => StarKernel::ThetaEta { theta: params.theta(), eta: params.eta() },
    })
}

fn reach(f: &GaussSum, sigmas: f64) -> f64 {
    f.terms()
        .iter()
        .flat_map(|t| {
            let w = t.envelope_widths();
            let c = t.envelope_center();
            c.into_iter().zip(w).map(|(c, w)| c.abs() + sigmas * w).collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

fn star(cfg: &RunConfig, a: &Path, b: &Path, kernel: KernelArg, out: &Path, binary: bool, sigmas: Option<f64>) -> Result<Outcome> {
    if let Some(s) = sigmas.filter(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidInput(format!("sigmas must be positive, got {s}")));
    }
    let (fa, pa) = load_function(a)?;
    let (fb, _) = load_function(b)?;
    if fa.dim() != fb.dim() {
        return Err(Error::DimensionMismatch { expected: fa.dim(), got: fb.dim() });
    }
    let base = pa.unwrap_or(config_params(cfg)?);
    let params = if base.d() == 2 {
        NCParams::d2(cfg.hbar.unwrap_or(base.hbar()), cfg.theta.unwrap_or(base.theta()), cfg.eta.unwrap_or(base.eta()))?
    } else {
        base
    };
    let k = kernel_for(kernel, &params)?;
    let dim = fa.dim();
    let n = cfg.npts.unwrap_or(default_npts(dim));
    let unit_reach = reach(&fa, 1.0).max(reach(&fb, 1.0));
    let half = match (sigmas, max_commensurate_half_width(&k, dim, n)?) {
        (Some(s), _) => s * unit_reach,
        (None, Some(widest)) => widest.min(DEFAULT_SIGMAS * unit_reach),
        (None, None) => DEFAULT_SIGMAS * unit_reach,
    };
    let spec = commensurate_grid(&k, &vec![0.0; dim], n, half)?;
    let (ga, gb) = (sample(&fa, &spec)?, sample(&fb, &spec)?);
    let (prod, stats) = star_product_with(&ga, &gb, &k, &StarOptions::default())?;
    let file = BufWriter::new(File::create(out)?);
    if binary {
        write_binary(&prod, file)?;
    } else {
        write_csv(&prod, file)?;
    }
    let closed_form = match (fa.single(), fb.single()) {
        (Some(x), Some(y)) if x.is_pure_gaussian() && y.is_pure_gaussian() => {
            let exact = sample(&GaussSum::from(gaussian_star_gaussian(x, y, &k)?), &spec)?;
            let scale = exact.interior_max_abs().max(f64::MIN_POSITIVE);
            Some(json!({ "interior_max_relative_error": prod.interior_max_diff(&exact)? / scale }))
        }
        _ => None,
    };
    let result = json!({
        "kernel": k.describe(dim),
        "grid": spec.axes().iter().map(|x| json!({ "lo": x.lo, "hi": x.hi, "npts": x.npts })).collect::<Vec<_>>(),
        "stats": to_value(&stats)?,
        "out": { "path": out.display().to_string(), "format": if binary { "binary" } else { "csv" } },
        "sigmas": spec.axes()[0].length() / 2.0 / unit_reach,
        "tail_mass": prod.tail_mass(),
        "closed_form": closed_form,
    });
    let mut o = Outcome::json("star", Some(params), result);
    o.npts = Some(n);
    Ok(o)
}

fn classify_cmd(cfg: &RunConfig, input: &Path, klm: bool) -> Result<Outcome> {
    let m = load_measure(input, cfg)?;
    let report = classify(&m, &budget(cfg, klm))?;
    let mut result = to_value(&report)?;
    result["region_label"] = json!(report.region_label());
    Ok(Outcome::json("classify", Some(m.params().clone()), result))
}

fn figure1(cfg: &RunConfig) -> Result<Outcome> {
    use ncwig::measures::MeasureSet;
    let params = config_params(cfg)?;
    let b = budget(cfg, true);
    let flag = |f: ncwig::criteria::Flag| to_value(&f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    let mut mismatches = Vec::new();
    for id in CatalogId::WITNESSES {
        let m = catalog(id, &params, &CatalogConsts::default())?;
        let r = classify(&m, &b)?;
        let expected = id.expected_region();
        let ok = r.region == expected;
        if !ok {
            mismatches.push(id.to_string());
        }
        let certainty = r.certainty.map(|c| to_value(&c)).transpose()?.and_then(|v| v.as_str().map(str::to_string));
        let flags =
            [MeasureSet::Wigner, MeasureSet::Ncwm, MeasureSet::Liouville].map(|s| format!("{}:{}", s.symbol(), flag(r.flag(s)))).join(" ");
        let p = &r.purity;
        rows.push(vec![
            id.to_string(),
            r.region_label(),
            certainty.clone().unwrap_or_else(|| "-".into()),
            expected.map_or_else(|| "-".into(), |e| e.to_string()),
            flags.clone(),
            format!("{:.6}", p.purity),
            format!("C {:.6} / NC {:.6}", p.wigner_bound.bound, p.ncwm_bound.bound),
        ]);
        entries.push(json!({
            "id": id.to_string(),
            "region": r.region_label(),
            "certainty": certainty,
            "expected": expected.map(|e| e.to_string()),
            "matches": ok,
            "flags": flags,
            "purity": to_value(p)?,
        }));
    }
    let table =
        Table { columns: ["function", "region", "certainty", "expected", "flags", "purity", "bounds"].map(String::from).to_vec(), rows };
    let failure = (!mismatches.is_empty()).then(|| format!("unexpected regions for {}", mismatches.join(", ")));
    let result = json!({ "rows": entries, "all_match": mismatches.is_empty() });
    Ok(Outcome { command: "figure1", params: Some(params), npts: None, result, table: Some(table), default_format: Format::Table, failure })
}
