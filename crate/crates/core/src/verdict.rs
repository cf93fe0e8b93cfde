//! Rule-based conclusions about the shift, its inverse, their algebra and the
//! commutant, and the end-to-end analysis report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{
    build_certificate, full_spectrum_radius, orbit_witness_noncompact, suggested_c, CompactnessCertificate,
    CoveringReport, OrbitWitness, WitnessOutcome, CAUCHY_SLACK, WITNESS_SEPARATION,
};
use crate::scalar::Real;
use crate::spectral::{local_radius, spectral_profile, SpectralProfile};
use crate::weights::{WeightRule, WeightSequence};


pub const REPORT_SCHEMA: &str = "wshift-report/1";

/// Strict inequalities `a < b` are accepted when `a + τ < b` with `τ = TAU_RELATIVE · r`.
pub const TAU_RELATIVE: f64 = 1e-6;

pub const DEFAULT_WITNESS_HORIZON: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerdictError {
    #[error("profile is inconsistent: {0}")]
    InconsistentProfile(String),
    #[error("rules {positive} and {negative} both fire for {subject}")]
    Conflict { subject: Subject, positive: Rule, negative: Rule },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subject {
    W,
    #[serde(rename = "W_inverse")]
    WInverse,
    #[serde(rename = "algebra_W_and_inverse")]
    AlgebraWAndInverse,
    #[serde(rename = "commutant_W")]
    CommutantW,
}

impl Subject {
    pub const ALL: [Subject; 4] = [Subject::W, Subject::WInverse, Subject::AlgebraWAndInverse, Subject::CommutantW];

    pub fn name(self) -> &'static str {
        match self {
            Subject::W => "W",
            Subject::WInverse => "W_inverse",
            Subject::AlgebraWAndInverse => "algebra_W_and_inverse",
            Subject::CommutantW => "commutant_W",
        }
    }
}

impl std::fmt::Display for Subject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    StronglyCompact,
    NotStronglyCompact,
    Inconclusive,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "R1_thm_shift")]
    R1,
    #[serde(rename = "R2_cor_inverse")]
    R2,
    #[serde(rename = "R3_thm_rational")]
    R3,
    #[serde(rename = "R4_commutant_quoted")]
    R4,
    #[serde(rename = "R5_orbit_witness")]
    R5,
    #[serde(rename = "none")]
    None,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::R1 => "R1_thm_shift",
            Rule::R2 => "R2_cor_inverse",
            Rule::R3 => "R3_thm_rational",
            Rule::R4 => "R4_commutant_quoted",
            Rule::R5 => "R5_orbit_witness",
            Rule::None => "none",
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Signed gap `b - a` of a rule's inequality `a < b`, and whether it cleared `τ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct RuleMargin<T> {
    pub rule: Rule,
    pub margin: T,
    pub fired: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Verdict<T> {
    pub subject: Subject,
    pub conclusion: Conclusion,
    pub rule: Rule,
    /// Margin of the deciding rule; for inconclusive verdicts the largest
    /// blocking margin (zero when no rule applies).
    pub margin: T,
    /// Rules that were evaluated for this subject and did not fire.
    pub blocking: Vec<RuleMargin<T>>,
    pub caveats: Vec<String>,
}

/// All rule margins for a profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct RuleMargins<T> {
    pub tau: T,
    pub r1: RuleMargin<T>,
    pub r2: RuleMargin<T>,
    pub r3: RuleMargin<T>,
    pub r4: RuleMargin<T>,
}

fn gap<T: Real>(rule: Rule, lhs: T, rhs: T, tau: T) -> RuleMargin<T> {
    let margin = rhs - lhs;
    RuleMargin { rule, margin, fired: margin > tau }
}

fn check_profile<T: Real>(p: &SpectralProfile<T>) -> Result<(), VerdictError> {
    let tol = T::chain_tolerance();
    let chains = [
        ("minus", p.r1_minus.estimate, p.r2_minus.estimate, p.r3_minus.estimate, p.r_minus.estimate),
        ("plus", p.r1_plus.estimate, p.r2_plus.estimate, p.r3_plus.estimate, p.r_plus.estimate),
    ];
    for (side, r1, r2, r3, r) in chains {
        if !(r1 <= r2 + tol && r2 <= r3 + tol && r3 <= r + tol) {
            return Err(VerdictError::InconsistentProfile(format!(
                "{side} side: expected r1 <= r2 <= r3 <= r, got {r1}, {r2}, {r3}, {r}"
            )));
        }
    }
    let r = p.r_minus.estimate.max(p.r_plus.estimate);
    let r1 = p.r1_minus.estimate.min(p.r1_plus.estimate);
    if p.r != r || p.r1 != r1 {
        return Err(VerdictError::InconsistentProfile("r or r1 disagrees with its side estimates".into()));
    }
    Ok(())
}

pub fn rule_margins<T: Real>(profile: &SpectralProfile<T>) -> RuleMargins<T> {
    let tau = T::lit(TAU_RELATIVE) * profile.r;
    let r3p = profile.r3_plus.estimate;
    let r2m = profile.r2_minus.estimate;
    let r1 = gap(Rule::R1, r3p, profile.r, tau);
    let mut r2 = gap(Rule::R2, profile.r1, r2m, tau);
    r2.fired &= profile.invertible;
    let r3 = RuleMargin { rule: Rule::R3, margin: r1.margin.min(r2.margin), fired: r1.fired && r2.fired };
    let r4 = gap(Rule::R4, r3p, r2m, tau);
    RuleMargins { tau, r1, r2, r3, r4 }
}

fn horizon_caveat<T: Real>(p: &SpectralProfile<T>) -> String {
    format!(
        "finite-horizon estimates (horizon_n = {}, horizon_k = {}); not a proof",
        p.horizon_n, p.horizon_k
    )
}

fn positive<T: Real>(subject: Subject, m: &RuleMargin<T>, caveats: Vec<String>) -> Verdict<T> {
    Verdict { subject, conclusion: Conclusion::StronglyCompact, rule: m.rule, margin: m.margin, blocking: vec![], caveats }
}

fn inconclusive<T: Real>(subject: Subject, blocking: Vec<RuleMargin<T>>, caveats: Vec<String>) -> Verdict<T> {
    let margin = blocking.iter().map(|m| m.margin).fold(T::neg_infinity(), T::max);
    let margin = if margin.is_finite() { margin } else { T::zero() };
    Verdict { subject, conclusion: Conclusion::Inconclusive, rule: Rule::None, margin, blocking, caveats }
}

/// Applies R1–R5 to a profile. `witness` is an inverse-orbit witness for `W^{-1}`.
pub fn decide<T: Real>(
    profile: &SpectralProfile<T>,
    witness: Option<&OrbitWitness<T>>,
) -> Result<Vec<Verdict<T>>, VerdictError> {
    check_profile(profile)?;
    let m = rule_margins(profile);
    let base = horizon_caveat(profile);

    let w = if m.r1.fired {
        positive(
            Subject::W,
            &m.r1,
            vec![base.clone(), "r3_plus is a limsup proxy; underestimating it would overstate the margin".into()],
        )
    } else {
        inconclusive(Subject::W, vec![m.r1.clone()], vec![base.clone()])
    };

    let w_inv = match (m.r2.fired, witness) {
        (true, Some(_)) => {
            return Err(VerdictError::Conflict { subject: Subject::WInverse, positive: Rule::R2, negative: Rule::R5 });
        }
        (true, None) => positive(
            Subject::WInverse,
            &m.r2,
            vec![base.clone(), "r2_minus is a liminf proxy; overestimating it would overstate the margin".into()],
        ),
        (false, Some(wit)) => Verdict {
            subject: Subject::WInverse,
            conclusion: Conclusion::NotStronglyCompact,
            rule: Rule::R5,
            margin: wit.min_pairwise_distance - wit.separation,
            blocking: vec![m.r2.clone()],
            caveats: vec![format!(
                "inverse orbit of e_0 checked for n <= {}: pairwise distances >= {}",
                wit.horizon, wit.min_pairwise_distance
            )],
        },
        (false, None) => {
            let mut caveats = vec![base.clone()];
            if !profile.invertible {
                caveats.push("W is not invertible".into());
            }
            inconclusive(Subject::WInverse, vec![m.r2.clone()], caveats)
        }
    };

    let algebra = if m.r3.fired {
        positive(Subject::AlgebraWAndInverse, &m.r3, vec![base.clone()])
    } else {
        inconclusive(Subject::AlgebraWAndInverse, vec![m.r1.clone(), m.r2.clone()], vec![base.clone()])
    };

    let commutant = if m.r4.fired {
        positive(
            Subject::CommutantW,
            &m.r4,
            vec![base, "condition r3_plus < r2_minus is quoted from prior work, not proved here".into()],
        )
    } else {
        inconclusive(Subject::CommutantW, vec![m.r4.clone()], vec![base])
    };

    Ok(vec![w, w_inv, algebra, commutant])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CertificateRequest<T> {
    pub basis_index: i64,
    pub epsilon: T,
    /// Defaults to the midpoint of the local radius and `d`.
    pub c: Option<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnalysisOptions<T> {
    pub horizon_n: usize,
    pub horizon_k: usize,
    pub certificates: Vec<CertificateRequest<T>>,
    pub witness: bool,
    pub witness_horizon: usize,
}

impl<T: Real> Default for AnalysisOptions<T> {
    fn default() -> Self {
        AnalysisOptions {
            horizon_n: 1 << 12,
            horizon_k: 1 << 12,
            certificates: vec![],
            witness: false,
            witness_horizon: DEFAULT_WITNESS_HORIZON,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case", bound = "T: Real")]
pub enum CertificateOutcome<T> {
    Built(CompactnessCertificate<T>),
    NotAttempted { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct CertificateEntry<T> {
    pub request: CertificateRequest<T>,
    pub outcome: CertificateOutcome<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct Policy<T> {
    pub tau_relative: f64,
    pub tau: T,
    pub witness_separation: f64,
    pub cauchy_slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Real")]
pub struct AnalysisReport<T> {
    pub schema: String,
    pub tool_version: String,
    pub rule: WeightRule<T>,
    pub options: AnalysisOptions<T>,
    pub policy: Policy<T>,
    pub profile: SpectralProfile<T>,
    pub margins: RuleMargins<T>,
    pub verdicts: Vec<Verdict<T>>,
    pub certificates: Vec<CertificateEntry<T>>,
    pub witness: Option<WitnessOutcome<T>>,
    pub coverings: Vec<CoveringReport<T>>,
}

impl<T: Real> AnalysisReport<T> {
    pub fn verdict(&self, subject: Subject) -> &Verdict<T> {
        self.verdicts.iter().find(|v| v.subject == subject).expect("every subject has a verdict")
    }
}

/// Profile, optional witness scan, rules, then certificates when R1 fires.
pub fn analyze<T: Real>(rule: WeightRule<T>, options: &AnalysisOptions<T>) -> Result<AnalysisReport<T>, crate::Error> {
    let w = WeightSequence::new(rule.clone())?;
    let profile = spectral_profile(&w, options.horizon_n, options.horizon_k)?;
    let margins = rule_margins(&profile);

    let witness = if !options.witness {
        None
    } else if !w.is_invertible() {
        Some(WitnessOutcome::NotFound { reason: "W is not invertible".into(), min_pairwise_distance: None })
    } else {
        Some(orbit_witness_noncompact(&w, options.witness_horizon)?)
    };
    let verdicts = decide(&profile, witness.as_ref().and_then(WitnessOutcome::witness))?;

    let mut certificates = Vec::with_capacity(options.certificates.len());
    for request in &options.certificates {
        let outcome = if !margins.r1.fired {
            CertificateOutcome::NotAttempted {
                reason: format!("R1 blocked: r - r3_plus = {} does not exceed tau = {}", margins.r1.margin, margins.tau),
            }
        } else {
            let d = full_spectrum_radius(&profile)?;
            let c = match request.c {
                Some(c) => c,
                None => suggested_c(local_radius(&w, request.basis_index, options.horizon_n)?.estimate, d),
            };
            CertificateOutcome::Built(build_certificate(&w, request.basis_index, c, d, request.epsilon, options.horizon_n)?)
        };
        certificates.push(CertificateEntry { request: request.clone(), outcome });
    }

    Ok(AnalysisReport {
        schema: REPORT_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        rule,
        options: options.clone(),
        policy: Policy {
            tau_relative: TAU_RELATIVE,
            tau: margins.tau,
            witness_separation: WITNESS_SEPARATION,
            cauchy_slack: CAUCHY_SLACK,
        },
        profile,
        margins,
        verdicts,
        certificates,
        witness,
        coverings: vec![],
    })
}

/// Options used by the bundled paper example.
pub fn paper_example_options<T: Real>() -> AnalysisOptions<T> {
    AnalysisOptions {
        horizon_n: 1 << 16,
        horizon_k: 1 << 16,
        certificates: vec![CertificateRequest { basis_index: 0, epsilon: T::lit(1e-3), c: None }],
        witness: true,
        witness_horizon: DEFAULT_WITNESS_HORIZON,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(rule: WeightRule<f64>, n: usize, witness: bool) -> AnalysisReport<f64> {
        let opts = AnalysisOptions { horizon_n: n, horizon_k: n, witness, ..AnalysisOptions::default() };
        analyze(rule, &opts).unwrap()
    }

    fn conclusions(r: &AnalysisReport<f64>) -> Vec<(Conclusion, Rule)> {
        r.verdicts.iter().map(|v| (v.conclusion, v.rule)).collect()
    }

    #[test]
    fn two_sided_step_fires_r1_to_r4() {
        let r = report(WeightRule::two_sided_step(2.0, 1.0), 256, false);
        use Conclusion::StronglyCompact as S;
        assert_eq!(conclusions(&r), vec![(S, Rule::R1), (S, Rule::R2), (S, Rule::R3), (S, Rule::R4)]);
        for v in &r.verdicts {
            assert!((v.margin - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_one_is_inconclusive() {
        let r = report(WeightRule::constant(1.0), 64, false);
        for v in &r.verdicts {
            assert_eq!((v.conclusion, v.rule), (Conclusion::Inconclusive, Rule::None));
            assert!(v.margin.abs() < 1e-12);
        }
        // the witness rule fires for the inverse orbit all the same
        let r = report(WeightRule::constant(1.0), 64, true);
        assert_eq!(r.verdict(Subject::WInverse).rule, Rule::R5);
        assert_eq!(r.verdict(Subject::W).conclusion, Conclusion::Inconclusive);
    }

    #[test]
    fn constant_one_skips_certificates() {
        let opts = AnalysisOptions {
            horizon_n: 64,
            horizon_k: 64,
            certificates: vec![CertificateRequest { basis_index: 0, epsilon: 1e-3, c: None }],
            ..AnalysisOptions::default()
        };
        let r = analyze(WeightRule::constant(1.0), &opts).unwrap();
        assert!(matches!(&r.certificates[0].outcome, CertificateOutcome::NotAttempted { reason } if reason.contains("R1 blocked")));
    }

    #[test]
    fn periodic_is_inconclusive() {
        let r = report(WeightRule::periodic(&[2.0, 1.0]), 1 << 12, false);
        assert!(r.verdicts.iter().all(|v| v.conclusion == Conclusion::Inconclusive));
    }

    #[test]
    fn lacunary_example_verdicts() {
        let opts = AnalysisOptions { horizon_n: 1 << 12, horizon_k: 1 << 12, ..paper_example_options() };
        let r = analyze(WeightRule::lacunary_blocks(2.0, 1.0), &opts).unwrap();
        let w = r.verdict(Subject::W);
        assert_eq!((w.conclusion, w.rule), (Conclusion::StronglyCompact, Rule::R1));
        assert!(w.margin >= 0.98);
        let inv = r.verdict(Subject::WInverse);
        assert_eq!((inv.conclusion, inv.rule), (Conclusion::NotStronglyCompact, Rule::R5));
        assert!(matches!(&r.certificates[0].outcome, CertificateOutcome::Built(c) if c.n0 > 0));
    }

    #[test]
    fn witness_with_r2_is_a_conflict() {
        let w = WeightSequence::new(WeightRule::two_sided_step(2.0, 1.0)).unwrap();
        let p = spectral_profile(&w, 256, 256).unwrap();
        let fake = OrbitWitness { horizon: 10, m_of_w: 1.0, min_pairwise_distance: 1.0, separation: 0.5 };
        assert!(matches!(decide(&p, Some(&fake)), Err(VerdictError::Conflict { subject: Subject::WInverse, .. })));
    }

    #[test]
    fn inconsistent_profile_is_rejected() {
        let w = WeightSequence::new(WeightRule::two_sided_step(2.0, 1.0)).unwrap();
        let mut p = spectral_profile(&w, 256, 256).unwrap();
        p.r3_plus.estimate = 5.0;
        assert!(matches!(decide(&p, None), Err(VerdictError::InconsistentProfile(_))));
    }

    #[test]
    fn report_serializes_with_schema() {
        let r = report(WeightRule::two_sided_step(2.0, 1.0), 64, true);
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["schema"], REPORT_SCHEMA);
        assert_eq!(v["verdicts"][0]["subject"], "W");
        assert_eq!(v["verdicts"][0]["rule"], "R1_thm_shift");
        assert_eq!(v["verdicts"][1]["conclusion"], "strongly_compact");
        assert_eq!(v["rule"]["kind"], "two_sided_step");
    }

    fn table_rule() -> impl Strategy<Value = WeightRule<f64>> {
        (prop::collection::vec(-1.4f64..1.4, 1..24), -30i64..30, -1.4f64..1.4, -1.4f64..1.4).prop_map(
            |(logs, offset, l, r)| {
                let entries: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
                WeightRule::table(offset, &entries, l.exp(), r.exp())
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn r4_implies_r1(rule in table_rule()) {
            let w = WeightSequence::new(rule).unwrap();
            let p = spectral_profile(&w, 128, 256).unwrap();
            let m = rule_margins(&p);
            prop_assert!(!m.r4.fired || m.r1.fired);
            prop_assert!(!m.r3.fired || (m.r1.fired && m.r2.fired));
            let verdicts = decide(&p, None).unwrap();
            prop_assert_eq!(verdicts.len(), 4);
            for v in &verdicts {
                prop_assert!(v.conclusion != Conclusion::StronglyCompact || v.margin > m.tau);
                prop_assert!(v.conclusion != Conclusion::NotStronglyCompact);
            }
        }
    }
}
