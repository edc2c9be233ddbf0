//! Evidence collection and region assignment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use super::klm::{nc_klm_spec, KlmEngine, KlmSpec, KlmWitness, SearchConfig};
use super::{
    gaussian_is_ncwm, gaussian_is_pure, gaussian_is_wigner, hermitian_psd, purity_report, uncertainty_check_with, PsdVerdict, PureMode,
    PurityReport, PurityVerdict,
};
use crate::error::{Error, Result};
use crate::gausspoly::{GaussPoly, GaussSum};
use crate::linalg::{sym_eigen, to_complex, Mat};
use crate::measures::{Claim, LabeledMeasure, MeasureSet, Region, Statement, NORM_TOL};
use crate::symplectic::{ExtendedSymplecticForm, NCParams};

/// Search effort spent on sets the exact tests leave open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Run KLM searches for undetermined F^C / F^NC flags.
    pub klm: bool,
    pub search: SearchConfig,
    /// Sample points for the sign scan of functions without a closed-form sign test.
    pub sign_samples: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { klm: true, search: SearchConfig::default(), sign_samples: 20_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flag {
    Member,
    NonMember,
    /// Survived every refutation attempt without being certified.
    Consistent,
    Unknown,
}

impl Flag {
    pub fn is_definitive(self) -> bool {
        matches!(self, Flag::Member | Flag::NonMember)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    Exact,
    EvidenceOnly,
}

/// One piece of evidence about a set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetEvidence {
    pub member: bool,
    pub definitive: bool,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetVerdict {
    pub set: MeasureSet,
    pub flag: Flag,
    pub evidence: Vec<SetEvidence>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityWitness {
    pub point: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleEvidence {
    /// "gaussian", "quadratic-sign", "linear-sign", "constant-sign" or "sampled".
    pub method: String,
    pub flag: Flag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<NegativityWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianExact {
    pub wigner: PsdVerdict,
    pub ncwm: PsdVerdict,
    pub pure_wigner: PurityVerdict,
    pub pure_ncwm: PurityVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlmOutcome {
    pub set: MeasureSet,
    pub spec: KlmSpec,
    pub search: SearchConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<KlmWitness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvidenceReport {
    pub provenance: String,
    pub params: NCParams,
    pub purity: PurityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negativity: Option<NegativityWitness>,
    pub liouville: LiouvilleEvidence,
    pub uncertainty: PsdVerdict,
    pub uncertainty_commutative: PsdVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian_exact: Option<GaussianExact>,
    pub klm: Vec<KlmOutcome>,
    pub provenance_claims: Vec<Claim>,
    pub sets: Vec<SetVerdict>,
    #[serde(serialize_with = "region_or_indeterminate")]
    pub region: Option<Region>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certainty: Option<Certainty>,
}

fn region_or_indeterminate<S: Serializer>(r: &Option<Region>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => r.serialize(s),
        None => s.serialize_str("indeterminate"),
    }
}

impl EvidenceReport {
    pub fn flag(&self, set: MeasureSet) -> Flag {
        self.sets.iter().find(|v| v.set == set).map_or(Flag::Unknown, |v| v.flag)
    }

    /// "Ω4" style label, or "indeterminate".
    pub fn region_label(&self) -> String {
        self.region.map_or_else(|| "indeterminate".to_string(), |r| r.to_string())
    }
}

/// Terms combine into the flag; conflicting definitive evidence is an error.
fn resolve(set: MeasureSet, evidence: Vec<SetEvidence>, searched: bool) -> Result<SetVerdict> {
    let yes = evidence.iter().filter(|e| e.definitive && e.member).map(|e| e.source.as_str()).collect::<Vec<_>>();
    let no = evidence.iter().filter(|e| e.definitive && !e.member).map(|e| e.source.as_str()).collect::<Vec<_>>();
    if !yes.is_empty() && !no.is_empty() {
        return Err(Error::InternalInconsistency(format!(
            "{}: [{}] assert membership but [{}] exclude it",
            set.symbol(),
            yes.join(", "),
            no.join(", ")
        )));
    }
    let flag = if !yes.is_empty() {
        Flag::Member
    } else if !no.is_empty() {
        Flag::NonMember
    } else if searched || evidence.iter().any(|e| e.member) {
        Flag::Consistent
    } else {
        Flag::Unknown
    };
    Ok(SetVerdict { set, flag, evidence })
}

fn ev(member: bool, definitive: bool, source: impl Into<String>) -> SetEvidence {
    SetEvidence { member, definitive, source: source.into() }
}

/// Negative value of `f` at `z`, if it is clearly below rounding level.
fn negative_at(f: &GaussSum, z: &[f64], scale: f64) -> Option<NegativityWitness> {
    let v = f.eval(z).re;
    (v < -1e-12 * scale).then(|| NegativityWitness { point: z.to_vec(), value: v })
}

fn most_negative(f: &GaussSum, candidates: &[Vec<f64>], scale: f64) -> Option<NegativityWitness> {
    candidates.iter().filter_map(|z| negative_at(f, z, scale)).min_by(|a, b| a.value.total_cmp(&b.value))
}

/// Exact sign analysis of P(z)·exp(real quadratic) for deg P ≤ 2.
fn sign_single(t: &GaussPoly, f: &GaussSum) -> Option<LiouvilleEvidence> {
    t.real_form()?;
    if t.c().im.abs() > 1e-12 {
        return None;
    }
    let n = t.dim();
    let p = t.poly();
    let coeff = |e: &[u8]| p.coefficient(e).re;
    let center = t.envelope_center();
    let scale = f.eval(&center).norm().max(1e-300);
    let exact = |method: &str, flag, witness| LiouvilleEvidence { method: method.into(), flag, witness, samples: None };
    match p.degree() {
        0 => {
            let c = coeff(&vec![0; n]);
            let flag = if c > 0.0 { Flag::Member } else { Flag::NonMember };
            let w = (c < 0.0).then(|| NegativityWitness { point: center.clone(), value: f.eval(&center).re });
            Some(exact(if c > 0.0 { "gaussian" } else { "constant-sign" }, flag, w))
        }
        1 => {
            let b: Vec<f64> = (0..n).map(|i| coeff(&unit(n, i, 1))).collect();
            let c = coeff(&vec![0; n]);
            let bb: f64 = b.iter().map(|x| x * x).sum();
            let s = -(c + 1.0) / bb;
            let z: Vec<f64> = b.iter().map(|x| x * s).collect();
            let w = NegativityWitness { value: f.eval(&z).re, point: z };
            Some(exact("linear-sign", Flag::NonMember, Some(w)))
        }
        2 => {
            // Homogenized form [[A, b/2], [bᵀ/2, c]] is PSD iff P ≥ 0 everywhere.
            let mut h = Mat::zeros(n + 1, n + 1);
            for i in 0..n {
                h[(i, i)] = coeff(&unit(n, i, 2));
                for j in i + 1..n {
                    let mut e = unit(n, i, 1);
                    e[j] = 1;
                    h[(i, j)] = 0.5 * coeff(&e);
                    h[(j, i)] = h[(i, j)];
                }
                h[(i, n)] = 0.5 * coeff(&unit(n, i, 1));
                h[(n, i)] = h[(i, n)];
            }
            h[(n, n)] = coeff(&vec![0; n]);
            let hc = to_complex(&h);
            let verdict = hermitian_psd(&hc, Some(1e-12 * (1.0 + hc.norm()))).ok()?;
            if verdict.is_psd {
                return Some(exact("quadratic-sign", Flag::Member, None));
            }
            let (vals, vecs) = sym_eigen(&h);
            let v = vecs.column(0);
            let mut cands = vec![center.clone()];
            if vals[0] < 0.0 && v[n].abs() > 1e-8 {
                cands.push((0..n).map(|i| v[i] / v[n]).collect());
            }
            Some(exact("quadratic-sign", Flag::NonMember, most_negative(f, &cands, scale)))
        }
        _ => None,
    }
}

fn unit(n: usize, i: usize, k: u8) -> Vec<u8> {
    let mut e = vec![0; n];
    e[i] = k;
    e
}

/// Halton sign scan over the union of the term envelopes.
fn sign_sampled(f: &GaussSum, samples: usize) -> LiouvilleEvidence {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    let n = f.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    let mut cands = Vec::new();
    for t in f.terms() {
        let c = t.envelope_center();
        let w = t.envelope_widths();
        for i in 0..n {
            lo[i] = lo[i].min(c[i] - 4.0 * w[i]);
            hi[i] = hi[i].max(c[i] + 4.0 * w[i]);
        }
        cands.push(c);
    }
    let halton = |mut k: u64, b: u64| {
        let (mut r, mut fr) = (0.0, 1.0);
        while k > 0 {
            fr /= b as f64;
            r += fr * (k % b) as f64;
            k /= b;
        }
        r
    };
    for k in 1..=samples as u64 {
        cands.push((0..n).map(|i| lo[i] + (hi[i] - lo[i]) * halton(k, PRIMES[i % 8])).collect());
    }
    let scale = cands.iter().map(|z| f.eval(z).norm()).fold(0.0, f64::max).max(1e-300);
    let w = most_negative(f, &cands, scale);
    let flag = if w.is_some() { Flag::NonMember } else { Flag::Consistent };
    LiouvilleEvidence { method: "sampled".into(), flag, witness: w, samples: Some(cands.len()) }
}

fn liouville_evidence(f: &GaussSum, samples: usize) -> LiouvilleEvidence {
    f.single().and_then(|t| sign_single(t, f)).unwrap_or_else(|| sign_sampled(f, samples))
}

/// Closed-form Gaussian tests, or `None` unless `f` is a single pure Gaussian.
pub fn gaussian_exact(f: &LabeledMeasure, form: &ExtendedSymplecticForm) -> Result<Option<GaussianExact>> {
    let Some(t) = f.single() else { return Ok(None) };
    if !t.is_pure_gaussian() {
        return Ok(None);
    }
    let Some((a, _)) = t.real_form() else { return Ok(None) };
    let hbar = f.params().hbar();
    let commutative = ExtendedSymplecticForm::commutative(hbar, f.params().d())?;
    Ok(Some(GaussianExact {
        wigner: gaussian_is_wigner(&a, hbar)?,
        ncwm: gaussian_is_ncwm(&a, form)?,
        pure_wigner: gaussian_is_pure(&a, PureMode::Wigner, &commutative)?,
        pure_ncwm: gaussian_is_pure(&a, PureMode::Ncwm, form)?,
    }))
}

/// Assigns `f` to a region using claims, closed-form tests, necessary
/// conditions and, for open flags, a KLM search.
pub fn classify(f: &LabeledMeasure, budget: &Budget) -> Result<EvidenceReport> {
    let func = f.function();
    if !func.is_real_tagged() {
        return Err(Error::InvalidInput("classification needs a real-valued function".into()));
    }
    let norm = func.integrate()?;
    if (norm - Complex64::new(1.0, 0.0)).norm() > NORM_TOL {
        return Err(Error::NotNormalized(norm.re));
    }
    let params = f.params();
    let form = ExtendedSymplecticForm::new(params)?;
    let commutative = params.is_commutative();

    let purity = purity_report(f)?;
    let uncertainty = uncertainty_check_with(f, false)?;
    let uncertainty_commutative = uncertainty_check_with(f, true)?;
    let gexact = gaussian_exact(f, &form)?;
    let liouville = liouville_evidence(func, budget.sign_samples);

    let mut c_ev = Vec::new();
    let mut nc_ev = Vec::new();
    let mut l_ev = Vec::new();
    for claim in f.claims() {
        let tag = format!("claim: {}", claim.basis);
        match claim.statement {
            Statement::Member(MeasureSet::Wigner) => c_ev.push(ev(true, true, tag)),
            Statement::NonMember(MeasureSet::Wigner) => c_ev.push(ev(false, true, tag)),
            Statement::Member(MeasureSet::Ncwm) => nc_ev.push(ev(true, true, tag)),
            Statement::NonMember(MeasureSet::Ncwm) => nc_ev.push(ev(false, true, tag)),
            Statement::Member(MeasureSet::Liouville) => l_ev.push(ev(true, true, tag)),
            Statement::NonMember(MeasureSet::Liouville) => l_ev.push(ev(false, true, tag)),
            Statement::ThetaPuritySaturated | Statement::EtaPuritySaturated => {}
        }
    }
    if let Some(g) = &gexact {
        c_ev.push(ev(g.wigner.is_psd, true, "gaussian test A⁻¹ + iħJ"));
        nc_ev.push(ev(g.ncwm.is_psd, true, "gaussian test C⁻¹ + iħΩ"));
    }
    if purity.excludes_wigner() {
        c_ev.push(ev(false, true, "purity above 1/(2πħ)^d"));
    }
    if purity.ncwm_bound.exceeded {
        nc_ev.push(ev(false, true, "purity above 1/((2πħ)^d |Pf Ω|)"));
    }
    if purity.theta_purity.is_some_and(|b| b.exceeded) {
        nc_ev.push(ev(false, true, "θ-marginal purity above 1/(2πθ)"));
    }
    if purity.eta_purity.is_some_and(|b| b.exceeded) {
        nc_ev.push(ev(false, true, "η-marginal purity above 1/(2πη)"));
    }
    if !uncertainty.is_psd {
        nc_ev.push(ev(false, true, "uncertainty Σ + (iħ/2)Ω"));
    }
    if !uncertainty_commutative.is_psd {
        c_ev.push(ev(false, true, "uncertainty Σ + (iħ/2)J"));
    }
    match liouville.flag {
        Flag::Member => l_ev.push(ev(true, true, liouville.method.clone())),
        Flag::NonMember => l_ev.push(ev(false, true, format!("{} negativity", liouville.method))),
        Flag::Consistent => l_ev.push(ev(true, false, "no negative sample")),
        Flag::Unknown => {}
    }
    if commutative {
        // F^NC and F^C coincide when Ω = J.
        let (c, nc) = (c_ev.clone(), nc_ev.clone());
        c_ev.extend(nc.into_iter().map(|e| SetEvidence { source: format!("{} (Ω = J)", e.source), ..e }));
        nc_ev.extend(c.into_iter().map(|e| SetEvidence { source: format!("{} (Ω = J)", e.source), ..e }));
    }

    let mut klm = Vec::new();
    let mut run_klm = |set: MeasureSet, spec: KlmSpec, ev_list: &mut Vec<SetEvidence>| -> Result<bool> {
        if !budget.klm || ev_list.iter().any(|e| e.definitive) {
            return Ok(false);
        }
        let engine = KlmEngine::new(func, spec, &form)?;
        let hit = engine.search(&budget.search)?.map(|(_, w)| w);
        ev_list.push(ev(hit.is_none(), hit.is_some(), format!("KLM search at {spec:?}")));
        klm.push(KlmOutcome { set, spec, search: budget.search, witness: hit });
        Ok(true)
    };
    let c_searched = run_klm(MeasureSet::Wigner, KlmSpec::Commutative { alpha: params.hbar() }, &mut c_ev)?;
    let nc_searched = if commutative {
        if c_searched {
            nc_ev.push(c_ev.last().cloned().expect("search evidence"));
        }
        c_searched
    } else {
        let spec = nc_klm_spec(params)?;
        run_klm(MeasureSet::Ncwm, spec, &mut nc_ev)?
    };

    let sets = vec![
        resolve(MeasureSet::Wigner, c_ev, c_searched)?,
        resolve(MeasureSet::Ncwm, nc_ev, nc_searched)?,
        resolve(MeasureSet::Liouville, l_ev, false)?,
    ];
    let flags: Vec<Flag> = sets.iter().map(|s| s.flag).collect();
    let (region, certainty) = if flags.iter().all(|f| f.is_definitive()) {
        let m = |f: Flag| f == Flag::Member;
        (Some(Region::from_flags(m(flags[0]), m(flags[1]), m(flags[2]))), Some(Certainty::Exact))
    } else if flags.iter().all(|f| *f != Flag::Unknown) {
        let m = |f: Flag| f != Flag::NonMember;
        (Some(Region::from_flags(m(flags[0]), m(flags[1]), m(flags[2]))), Some(Certainty::EvidenceOnly))
    } else {
        (None, None)
    };

    if let Some(expected) = f.expected_region() {
        let (ec, enc, el) = expected.flags();
        for (s, want) in sets.iter().zip([ec, enc, el]) {
            let conflict = match s.flag {
                Flag::Member => !want,
                Flag::NonMember => want,
                _ => false,
            };
            if conflict {
                return Err(Error::InternalInconsistency(format!(
                    "{} flag {:?} contradicts the constructed region {expected}",
                    s.set.symbol(),
                    s.flag
                )));
            }
        }
    }

    Ok(EvidenceReport {
        provenance: f.provenance().to_string(),
        params: params.clone(),
        purity,
        negativity: liouville.witness.clone(),
        liouville,
        uncertainty,
        uncertainty_commutative,
        gaussian_exact: gexact,
        klm,
        provenance_claims: f.claims().to_vec(),
        sets,
        region,
        certainty,
    })
}
