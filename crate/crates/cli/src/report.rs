//! The analysis pipeline behind `bmquad analyze`.

use std::collections::BTreeSet;

use bmquad::arith::format_rational;
use bmquad::arith::integer::factorize;
use bmquad::brauer::{
    classify, d_value, integral_obstruction, mod8_value_check, sa_verdict, sa_verdict_n4, square_root_data,
    tangent_generator, BrQuotient, CaseLabel, FactorSquareness, Mod8Check, ObstructionSummary, QuaternionClass,
    SaVerdict, SaVerdictN4,
};
use bmquad::central::{approximation_witness, central_defect, ApproximationWitness, CentralDefectReport};
use bmquad::localsolve::{
    bad_primes, decide_u_zp, decide_x_zp, real_points, LocalCertificate, SolubilityMode, DEFAULT_DEPTH_BOUND,
};
use bmquad::poly::factor_over_q;
use bmquad::search::{search_integral_points, SearchReport};
use bmquad::{Error, Place, QuadraticForm, Rational, RationalPoly, Result, SquareClass};
use num_traits::Signed;
use serde::Serialize;

/// Bumped whenever a field is added, removed or changes meaning.
pub const SCHEMA_VERSION: &str = "1.0.0";

pub const DEFAULT_BOUND: u64 = 100;

/// Parsed inputs of one analysis.
#[derive(Clone, Debug)]
pub struct AnalysisInput {
    pub q_text: String,
    pub p_text: String,
    pub q: QuadraticForm,
    pub p: RationalPoly,
    pub s: Vec<Place>,
    pub bound: u64,
    /// `None` searches in both modes.
    pub mode: Option<SolubilityMode>,
    pub central_places: Vec<Place>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub q: String,
    pub gram: QuadraticForm,
    pub p: String,
    pub p_coefficients: RationalPoly,
    #[serde(rename = "S")]
    pub s: Vec<Place>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorEntry {
    pub factor: String,
    pub coefficients: RationalPoly,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorizationReport {
    pub c: String,
    pub factors: Vec<FactorEntry>,
    pub text: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DReport {
    /// `-c·det(q)`.
    pub value: String,
    pub factored: String,
    /// Signed squarefree integer in the same square class.
    pub square_class: String,
    pub sign: i8,
    pub is_square: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub case: CaseLabel,
    pub br_u: BrQuotient,
    pub br_xtilde: BrQuotient,
    pub squareness_table: Vec<FactorSquareness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeCertificates {
    pub prime: Place,
    pub u: LocalCertificate,
    pub x: LocalCertificate,
}

#[derive(Clone, Debug, Serialize)]
pub struct RealCertificates {
    pub primitive: LocalCertificate,
    pub any: LocalCertificate,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ObstructionReport {
    /// Against local points of `U`.
    pub primitive: Option<ObstructionSummary>,
    /// Against local points of `X` off the singular line.
    pub any: Option<ObstructionSummary>,
    pub mod8_primitive: Option<Mod8Check>,
    pub mod8_any: Option<Mod8Check>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchSection {
    pub bound: u64,
    pub any: Option<SearchReport>,
    pub primitive: Option<SearchReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CentralEntry {
    #[serde(flatten)]
    pub report: CentralDefectReport,
    pub approximation_witnesses: Vec<ApproximationWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: &'static str,
    pub input: InputEcho,
    pub factorization: FactorizationReport,
    pub d: DReport,
    pub classification: Option<ClassificationReport>,
    pub generator: Option<QuaternionClass>,
    pub bad_primes: Vec<PrimeCertificates>,
    pub real: RealCertificates,
    pub sa_verdict: Option<SaVerdict>,
    pub sa_verdict_rank4: Option<SaVerdictN4>,
    pub obstruction: ObstructionReport,
    pub search: Option<SearchSection>,
    pub central_points: Vec<CentralEntry>,
    pub notes: Vec<String>,
}

/// `2^9` style rendering of a non-zero rational.
pub fn factored_text(a: &Rational) -> String {
    let part = |n: &num_bigint::BigInt| {
        factorize(n)
            .into_iter()
            .map(|(p, e)| if e == 1 { p.to_string() } else { format!("{p}^{e}") })
            .collect::<Vec<_>>()
    };
    let mut num = part(a.numer());
    if num.is_empty() {
        num.push("1".into());
    }
    let sign = if a.is_negative() { "-" } else { "" };
    let den = part(a.denom());
    if den.is_empty() {
        format!("{sign}{}", num.join("*"))
    } else {
        format!("{sign}{}/({})", num.join("*"), den.join("*"))
    }
}

pub fn factorization_text(c: &Rational, factors: &[(RationalPoly, u32)]) -> String {
    let fs: Vec<String> = factors
        .iter()
        .map(|(f, e)| if *e == 1 { format!("({f})") } else { format!("({f})^{e}") })
        .collect();
    let body = if fs.is_empty() { "1".to_string() } else { fs.join("*") };
    format!("c={}, {}", format_rational(c), body.replace(' ', ""))
}

fn local_certificates(q: &QuadraticForm, p: &RationalPoly, notes: &mut Vec<String>) -> Vec<PrimeCertificates> {
    let mut out = Vec::new();
    for prime in bad_primes(q, p) {
        let v = Place::Finite(prime.clone());
        match (decide_u_zp(q, p, &v), decide_x_zp(q, p, &v, DEFAULT_DEPTH_BOUND)) {
            (Ok(u), Ok(x)) => out.push(PrimeCertificates { prime: v, u, x }),
            (Err(e), _) | (_, Err(e)) => notes.push(format!("local solubility at {v} skipped: {e}")),
        }
    }
    out
}

fn obstruction(
    q: &QuadraticForm,
    p: &RationalPoly,
    b: &QuaternionClass,
    notes: &mut Vec<String>,
) -> ObstructionReport {
    let mut rep = ObstructionReport::default();
    let mut record = |what: &str, e: Error| notes.push(format!("{what} skipped: {e}"));
    match integral_obstruction(q, p, b, SolubilityMode::Primitive) {
        Ok(s) => rep.primitive = Some(s),
        Err(e) => record("obstruction on U", e),
    }
    match integral_obstruction(q, p, b, SolubilityMode::Any) {
        Ok(s) => rep.any = Some(s),
        Err(e) => record("obstruction on X", e),
    }
    match mod8_value_check(q, p, b, SolubilityMode::Primitive) {
        Ok(m) => rep.mod8_primitive = Some(m),
        Err(e) => record("mod 8 check on U", e),
    }
    match mod8_value_check(q, p, b, SolubilityMode::Any) {
        Ok(m) => rep.mod8_any = Some(m),
        Err(e) => record("mod 8 check on X", e),
    }
    rep
}

fn central_entries(input: &AnalysisInput, notes: &mut Vec<String>) -> Result<Vec<CentralEntry>> {
    let mut out = Vec::new();
    for v in &input.central_places {
        let report = central_defect(&input.q, &input.p, v)?;
        let mut witnesses = Vec::new();
        for root in &report.roots {
            let Some(alpha) = root.locus.rational() else { continue };
            if root.defect {
                continue;
            }
            match approximation_witness(&input.q, &input.p, alpha, v) {
                Ok(w) => witnesses.push(w),
                Err(e) => notes.push(format!(
                    "approximation witness at {v} for t = {} skipped: {e}",
                    format_rational(alpha)
                )),
            }
        }
        out.push(CentralEntry { report, approximation_witnesses: witnesses });
    }
    Ok(out)
}

/// Runs the full pipeline; errors are input or hypothesis failures.
pub fn analyze(input: &AnalysisInput) -> Result<AnalysisReport> {
    let (q, p) = (&input.q, &input.p);
    if p.is_zero() {
        return Err(Error::InvalidInput("p must be non-zero".into()));
    }
    if input.s.is_empty() {
        return Err(Error::InvalidInput("S must contain at least one place".into()));
    }
    let mut notes = Vec::new();
    let fact = factor_over_q(p);
    let d = d_value(q, &fact.c);
    let dc = SquareClass::new(d.clone())?;
    notes.push(format!(
        "d = -c*det(q) = {} = {}, square class {}",
        format_rational(&d),
        factored_text(&d),
        dc.normalized()
    ));
    let (classification, verdict, verdict4) = if q.n() == 3 {
        let verdict = sa_verdict(q, &fact, &input.s)?;
        let cls = classify(q, &fact)?;
        let rep = ClassificationReport {
            case: cls.case,
            br_u: cls.br_u,
            br_xtilde: cls.br_xtilde,
            squareness_table: cls.squareness_table,
        };
        (Some(rep), Some(verdict), None)
    } else if q.n() >= 4 {
        (None, None, Some(sa_verdict_n4(q, p, &input.s)?))
    } else {
        return Err(Error::InvalidInput(format!("q must have rank at least 3, got {}", q.n())));
    };
    let generator = match (&classification, square_root_data(&fact)) {
        (Some(c), Some((c0, r))) if c.br_u.is_nontrivial() => match tangent_generator(q, &c0, &r) {
            Ok(g) => Some(g),
            Err(e) => {
                notes.push(format!("generator not constructed: {e}"));
                None
            }
        },
        _ => None,
    };
    let integral = q.is_integral() && p.is_integral();
    let bad = if integral {
        local_certificates(q, p, &mut notes)
    } else {
        notes.push("inputs not integral: local integral certificates and search skipped".into());
        Vec::new()
    };
    let real = RealCertificates {
        primitive: real_points(q, p, SolubilityMode::Primitive),
        any: real_points(q, p, SolubilityMode::Any),
    };
    let obstruction = match &generator {
        Some(b) if integral => obstruction(q, p, b, &mut notes),
        _ => ObstructionReport::default(),
    };
    let search = if integral {
        let (any, primitive) = match input.mode {
            Some(SolubilityMode::Primitive) => {
                (None, Some(search_integral_points(q, p, input.bound, SolubilityMode::Primitive)?))
            }
            Some(SolubilityMode::Any) => (Some(search_integral_points(q, p, input.bound, SolubilityMode::Any)?), None),
            None => {
                let any = search_integral_points(q, p, input.bound, SolubilityMode::Any)?;
                let primitive = any.primitive_part();
                (Some(any), Some(primitive))
            }
        };
        Some(SearchSection { bound: input.bound, any, primitive })
    } else {
        None
    };
    let central_points = central_entries(input, &mut notes)?;
    if obstruction.any.as_ref().is_some_and(|o| o.obstructs) {
        notes.push("every family of local integral points pairs to 1/2 with B: no integral points".into());
    } else if obstruction.primitive.as_ref().is_some_and(|o| o.obstructs) {
        notes.push("every family of local points of U pairs to 1/2 with B: no primitive integral points".into());
    }
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION,
        input: InputEcho {
            q: input.q_text.clone(),
            gram: q.clone(),
            p: input.p_text.clone(),
            p_coefficients: p.clone(),
            s: input.s.clone(),
        },
        factorization: FactorizationReport {
            c: format_rational(&fact.c),
            factors: fact
                .factors
                .iter()
                .map(|(f, e)| FactorEntry { factor: f.to_string(), coefficients: f.clone(), multiplicity: *e })
                .collect(),
            text: factorization_text(&fact.c, &fact.factors),
        },
        d: DReport {
            value: format_rational(&d),
            factored: factored_text(&d),
            square_class: dc.normalized().to_string(),
            sign: if d.is_negative() { -1 } else { 1 },
            is_square: dc.is_square(),
        },
        classification,
        generator,
        bad_primes: bad,
        real,
        sa_verdict: verdict,
        sa_verdict_rank4: verdict4,
        obstruction,
        search,
        central_points,
        notes,
    })
}

/// Places listed as `"real,2,5"`.
pub fn parse_places(s: &str) -> Result<Vec<Place>> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        out.insert(part.parse::<Place>()?);
    }
    Ok(out.into_iter().collect())
}
