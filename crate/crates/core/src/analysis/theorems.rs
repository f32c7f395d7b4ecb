//! Mechanical checks of the existence and multiplicity conditions.
//!
//! Each result is split into structural sub-cases (patterns over the exponent
//! classes) plus numeric hypotheses. A sub-case is reported only when its
//! pattern matches; its pointwise-in-t hypotheses are then evaluated as
//! worst-case margins on a uniform time grid. Every margin is oriented so
//! that "holds" means `margin >= margin_floor`.

use std::fmt::{self, Write as _};

use rayon::prelude::*;

use super::{alpha_weights, beta_weights, GammaRange, TimeGrid, DEFAULT_MARGIN_FLOOR, DEFAULT_T_POINTS};
use crate::error::{Error, Result};
use crate::model::{ExponentClass, GrowthCase, Model, TermClassification};
use crate::numeric::exp_ratio;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub t_points: usize,
    pub margin_floor: f64,
    /// Search grid for "there exists a constant gamma" hypotheses.
    pub gamma_range: GammaRange,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            t_points: DEFAULT_T_POINTS,
            margin_floor: DEFAULT_MARGIN_FLOOR,
            gamma_range: GammaRange::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremId {
    ExistenceSuperlinear,
    ExistenceSublinear,
    ExistenceAsymptoticallyLinear,
    MultiplicitySuperlinear,
    MultiplicitySublinear,
    MultiplicityAsymptoticallyLinear,
}

impl TheoremId {
    fn existence(case: GrowthCase) -> Self {
        match case {
            GrowthCase::Superlinear => Self::ExistenceSuperlinear,
            GrowthCase::Sublinear => Self::ExistenceSublinear,
            GrowthCase::AsymptoticallyLinear => Self::ExistenceAsymptoticallyLinear,
        }
    }

    fn multiplicity(case: GrowthCase) -> Self {
        match case {
            GrowthCase::Superlinear => Self::MultiplicitySuperlinear,
            GrowthCase::Sublinear => Self::MultiplicitySublinear,
            GrowthCase::AsymptoticallyLinear => Self::MultiplicityAsymptoticallyLinear,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ExistenceSuperlinear => "existence/superlinear",
            Self::ExistenceSublinear => "existence/sublinear",
            Self::ExistenceAsymptoticallyLinear => "existence/asymptotically_linear",
            Self::MultiplicitySuperlinear => "multiplicity/superlinear",
            Self::MultiplicitySublinear => "multiplicity/sublinear",
            Self::MultiplicityAsymptoticallyLinear => "multiplicity/asymptotically_linear",
        })
    }
}

/// Required sign of the checked quantity over every grid time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Requirement {
    Positive,
    Negative,
}

impl fmt::Display for Requirement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Requirement::Positive => "> 0 for all t",
            Requirement::Negative => "< 0 for all t",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub description: String,
    pub requirement: Requirement,
    /// Worst-case slack over the time grid; positive when the sign holds.
    pub margin: f64,
    /// Gamma at which the hypothesis was evaluated, if it involves one.
    pub gamma: Option<f64>,
    /// The gamma was found by search rather than supplied.
    pub searched: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated,
    /// An existential hypothesis found no witness in the search range. This
    /// does not disprove it.
    NoWitness,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::NoWitness => "no witness found in range",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub case: &'static str,
    pub pattern: &'static str,
    pub hypotheses: Vec<Hypothesis>,
    pub gammas: Vec<f64>,
    pub verdict: Verdict,
    pub predicted_solution_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub growth: GrowthCase,
    /// Structurally matching sub-cases, in order.
    pub cases: Vec<CaseReport>,
    pub verdict: Verdict,
    pub predicted_solution_count: usize,
}

impl TheoremReport {
    fn assemble(theorem: TheoremId, growth: GrowthCase, cases: Vec<CaseReport>) -> Self {
        let verdict = if cases.iter().any(|c| c.verdict == Verdict::Satisfied) {
            Verdict::Satisfied
        } else if cases.iter().any(|c| c.verdict == Verdict::NoWitness) {
            Verdict::NoWitness
        } else {
            Verdict::Violated
        };
        let predicted_solution_count = cases
            .iter()
            .filter(|c| c.verdict == Verdict::Satisfied)
            .map(|c| c.predicted_solution_count)
            .max()
            .unwrap_or(0);
        Self {
            theorem,
            growth,
            cases,
            verdict,
            predicted_solution_count,
        }
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }

    pub fn satisfied_cases(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| c.verdict == Verdict::Satisfied)
    }

    pub fn case(&self, label: &str) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.case == label)
    }

    /// Key-value text, one line per hypothesis. The output parses as TOML.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "theorem = \"{}\"", self.theorem);
        let _ = writeln!(s, "growth_case = \"{}\"", self.growth);
        let _ = writeln!(s, "verdict = \"{}\"", self.verdict);
        let _ = writeln!(s, "predicted_solution_count = {}", self.predicted_solution_count);
        for case in &self.cases {
            let _ = writeln!(s, "\n[[cases]]");
            let _ = writeln!(s, "case = \"{}\"", case.case);
            let _ = writeln!(s, "pattern = {:?}", case.pattern);
            let gammas: Vec<String> = case.gammas.iter().map(|g| fmt_num(*g)).collect();
            let _ = writeln!(s, "gammas = [{}]", gammas.join(", "));
            let _ = writeln!(s, "verdict = \"{}\"", case.verdict);
            let _ = writeln!(s, "predicted_solution_count = {}", case.predicted_solution_count);
            let _ = writeln!(s, "hypotheses = [");
            for h in &case.hypotheses {
                let _ = writeln!(
                    s,
                    "  {{ description = {:?}, required = \"{}\", margin = {}, gamma = {}, verdict = \"{}\" }},",
                    h.description,
                    h.requirement,
                    fmt_num(h.margin),
                    h.gamma.map(fmt_num).unwrap_or_else(|| "nan".into()),
                    if h.holds { "pass" } else { "fail" },
                );
            }
            let _ = writeln!(s, "]");
        }
        s
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.9e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Shared evaluation context.
struct Checker<'a> {
    model: &'a Model,
    classes: TermClassification,
    grid: TimeGrid,
    config: CheckConfig,
    c: f64,
}

impl<'a> Checker<'a> {
    fn new(model: &'a Model, config: CheckConfig) -> Self {
        Self {
            model,
            classes: model.classify(),
            grid: TimeGrid::new(model, config.t_points),
            config,
            c: model.decay_integral(),
        }
    }

    fn margin(&self, weights: &[f64], req: Requirement) -> f64 {
        let (lo, hi) = self.grid.excess_extrema(weights);
        match req {
            Requirement::Positive => lo,
            Requirement::Negative => -hi,
        }
    }

    fn hypothesis(&self, description: String, weights: &[f64], req: Requirement, gamma: Option<f64>) -> Hypothesis {
        let margin = self.margin(weights, req);
        Hypothesis {
            description,
            requirement: req,
            margin,
            gamma,
            searched: false,
            holds: margin >= self.config.margin_floor,
        }
    }

    /// Weights `w_k` on one class, zero elsewhere.
    fn class_weights<F: Fn(f64, f64) -> f64>(&self, class: ExponentClass, w: F) -> Vec<f64> {
        self.model
            .terms()
            .iter()
            .enumerate()
            .map(|(k, t)| {
                if self.classes.class_of(k) == class {
                    w(t.m, t.n)
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// `sum over class of lambda r(t) w - b(t)` with the given sign.
    fn class_sum(&self, class: ExponentClass, label: &str, req: Requirement, w: impl Fn(f64, f64) -> f64) -> Hypothesis {
        let rel = match req {
            Requirement::Positive => ">",
            Requirement::Negative => "<",
        };
        let desc = format!("sum over M{} of lambda_k r_k(t){label} {rel} b(t)", class.index());
        let weights = self.class_weights(class, w);
        self.hypothesis(desc, &weights, req, None)
    }

    fn alpha(&self, gamma: f64) -> Hypothesis {
        let w = alpha_weights(self.model, gamma);
        self.hypothesis(format!("alpha({gamma}, t) > 0"), &w, Requirement::Positive, Some(gamma))
    }

    fn beta(&self, gamma: f64) -> Hypothesis {
        let w = beta_weights(self.model, gamma);
        self.hypothesis(format!("beta({gamma}, t) < 0"), &w, Requirement::Negative, Some(gamma))
    }

    /// Best witness over the gamma search grid for an existential hypothesis.
    fn search<F>(&self, description: &str, req: Requirement, weights: F) -> Hypothesis
    where
        F: Fn(f64) -> Vec<f64> + Sync,
    {
        let best = self
            .config
            .gamma_range
            .values()
            .par_iter()
            .map(|&g| (g, self.margin(&weights(g), req)))
            .reduce(
                || (f64::NAN, f64::NEG_INFINITY),
                |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a },
            );
        Hypothesis {
            description: description.to_string(),
            requirement: req,
            margin: best.1,
            gamma: best.0.is_finite().then_some(best.0),
            searched: true,
            holds: best.1 >= self.config.margin_floor,
        }
    }

    fn case(&self, case: &'static str, pattern: &'static str, hypotheses: Vec<Hypothesis>, gammas: Vec<f64>, count: usize) -> CaseReport {
        let verdict = if hypotheses.iter().all(|h| h.holds) {
            Verdict::Satisfied
        } else if hypotheses.iter().any(|h| !h.holds && h.searched)
            && hypotheses.iter().all(|h| h.holds || h.searched)
        {
            Verdict::NoWitness
        } else {
            Verdict::Violated
        };
        CaseReport {
            case,
            pattern,
            hypotheses,
            gammas,
            verdict,
            predicted_solution_count: if verdict == Verdict::Satisfied { count } else { 0 },
        }
    }
}

/// Selects the existence result by growth case and checks every
/// structurally matching sub-case.
pub fn check_existence(model: &Model, config: &CheckConfig) -> TheoremReport {
    use ExponentClass::*;
    use Requirement::*;
    let ck = Checker::new(model, *config);
    let cl = &ck.classes;
    let c = ck.c;
    let mut cases = Vec::new();
    let growth = cl.case;

    match growth {
        GrowthCase::Superlinear => {
            if cl.all_m_above_one() {
                cases.push(ck.case("1", "m_k > 1 for all k", vec![], vec![], 1));
            }
            if cl.m_at_least_one_with_unit() {
                let h = ck.class_sum(M2, " e^C", Negative, |_, _| c.exp());
                cases.push(ck.case("2", "m_k >= 1 for all k, m_i = 1 for some i", vec![h], vec![], 1));
            }
            if cl.has(M1) {
                let h = ck.search(
                    "sum_k lambda_k r_k(t) e^((m_k-1) g) e^(m_k C) / (1 + e^(n_k g)) < b(t)",
                    Negative,
                    |g| model.terms().iter().map(|t| exp_ratio((t.m - 1.0) * g + t.m * c, t.n * g)).collect(),
                );
                let gammas = h.gamma.into_iter().collect();
                cases.push(ck.case("3", "m_i < 1 for some i", vec![h], gammas, 1));
            }
        }
        GrowthCase::Sublinear => {
            if cl.has(M1) {
                cases.push(ck.case("1", "m_i < 1 for some i", vec![], vec![], 1));
            }
            if cl.m_at_least_one_with_unit() {
                let h = ck.class_sum(M2, "", Positive, |_, _| 1.0);
                cases.push(ck.case("2", "m_k >= 1 for all k, m_i = 1 for some i", vec![h], vec![], 1));
            }
            if cl.all_m_above_one() {
                let h = ck.search(
                    "sum_k lambda_k r_k(t) e^((m_k-1) g) / (1 + e^(n_k (g + C))) > b(t)",
                    Positive,
                    |g| model.terms().iter().map(|t| exp_ratio((t.m - 1.0) * g, t.n * (g + c))).collect(),
                );
                let gammas = h.gamma.into_iter().collect();
                cases.push(ck.case("3", "m_k > 1 for all k", vec![h], gammas, 1));
            }
        }
        GrowthCase::AsymptoticallyLinear => {
            let m4_low = || ck.class_sum(M4, " e^(-C m_k)", Positive, |m, _| (-c * m).exp());
            let m4_high = || ck.class_sum(M4, " e^(C n_k)", Negative, |_, n| (c * n).exp());
            if cl.all_m_above_one() {
                cases.push(ck.case("1", "m_k > 1 for all k", vec![m4_low()], vec![], 1));
            }
            if cl.m_at_least_one_with_unit() {
                let m2_high = ck.class_sum(M2, " e^C", Negative, |_, _| c.exp());
                cases.push(ck.case(
                    "2",
                    "m_k >= 1 for all k, m_i = 1 for some i",
                    vec![m4_low(), m2_high],
                    vec![],
                    1,
                ));
                let m2_low = ck.class_sum(M2, "", Positive, |_, _| 1.0);
                cases.push(ck.case(
                    "2'",
                    "m_k >= 1 for all k, m_i = 1 for some i",
                    vec![m4_high(), m2_low],
                    vec![],
                    1,
                ));
            }
            if cl.has(M1) {
                cases.push(ck.case("3", "0 < m_i < 1 for some i", vec![m4_high()], vec![], 1));
            }
        }
    }
    TheoremReport::assemble(TheoremId::existence(growth), growth, cases)
}

/// Which envelope is checked at each supplied gamma, in increasing order.
#[derive(Clone, Copy)]
enum Env {
    Alpha,
    Beta,
}

/// Selects the multiplicity result by growth case, matches the sub-case by
/// exponent pattern and verifies its hypotheses at the supplied gammas.
///
/// Each sub-case consumes exactly as many gammas as its statement names; a
/// different count fails that sub-case.
pub fn check_multiplicity(model: &Model, gammas: &[f64], config: &CheckConfig) -> Result<TheoremReport> {
    if gammas.is_empty() || gammas.windows(2).any(|w| w[1] <= w[0]) || gammas.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonIncreasingGammas(gammas.to_vec()));
    }
    use Env::*;
    use ExponentClass::*;
    use Requirement::*;
    let ck = Checker::new(model, *config);
    let cl = &ck.classes;
    let c = ck.c;
    let growth = cl.case;
    let m3 = cl.has(M3);

    let run = |case: &'static str, pattern: &'static str, mut extra: Vec<Hypothesis>, envs: &[Env], count: usize| {
        if gammas.len() != envs.len() {
            extra.push(Hypothesis {
                description: format!("requires exactly {} gamma constant(s), got {}", envs.len(), gammas.len()),
                requirement: Positive,
                margin: f64::NEG_INFINITY,
                gamma: None,
                searched: false,
                holds: false,
            });
        } else {
            for (env, &g) in envs.iter().zip(gammas) {
                extra.push(match env {
                    Alpha => ck.alpha(g),
                    Beta => ck.beta(g),
                });
            }
        }
        ck.case(case, pattern, extra, gammas.to_vec(), count)
    };
    let m2_above_b = || ck.class_sum(M2, "", Positive, |_, _| 1.0);
    let m2_below_b = || ck.class_sum(M2, " e^C", Negative, |_, _| c.exp());
    let m4_high = || ck.class_sum(M4, " e^(C n_k)", Negative, |_, n| (c * n).exp());
    let m4_low = || ck.class_sum(M4, " e^(-C m_k)", Positive, |m, _| (-c * m).exp());

    let mut cases = Vec::new();
    match growth {
        GrowthCase::Superlinear => {
            if cl.all_m_above_one() && m3 {
                cases.push(run("1", "m_k > 1 for all k, 1 < m_i < n_i + 1 for some i", vec![], &[Alpha, Beta], 3));
            }
            if cl.m_at_least_one_with_unit() && !m3 {
                cases.push(run(
                    "2",
                    "m_k >= 1 for all k, m_i = 1 for some i, no m_k in (1, n_k + 1)",
                    vec![m2_above_b()],
                    &[Beta],
                    2,
                ));
            }
            if cl.m_at_least_one_with_unit() && m3 {
                cases.push(run(
                    "3",
                    "m_k >= 1 for all k, m_i = 1 for some i, 1 < m_s < n_s + 1 for some s",
                    vec![m2_below_b()],
                    &[Alpha, Beta],
                    3,
                ));
            }
            if cl.has(M1) && !m3 {
                cases.push(run("4", "m_i < 1 for some i, no m_k in (1, n_k + 1)", vec![], &[Beta], 2));
            }
            if cl.has(M1) && m3 {
                cases.push(run(
                    "5",
                    "m_i < 1 for some i, 1 < m_s < n_s + 1 for some s",
                    vec![],
                    &[Beta, Alpha, Beta],
                    4,
                ));
            }
        }
        GrowthCase::Sublinear => {
            if cl.all_m_above_one() {
                cases.push(run("1", "m_k > 1 for all k", vec![], &[Alpha], 2));
            }
            if cl.m_at_least_one_with_unit() && cl.some_m_above_one() {
                cases.push(run(
                    "2",
                    "m_k >= 1 for all k, m_i = 1 and m_j > 1 for some i, j",
                    vec![m2_below_b()],
                    &[Alpha],
                    2,
                ));
            }
            if cl.has(M1) && cl.some_m_above_one() {
                cases.push(run("3", "0 < m_i < 1 and m_j > 1 for some i, j", vec![], &[Beta, Alpha], 3));
            }
        }
        GrowthCase::AsymptoticallyLinear => {
            if cl.all_m_above_one() && m3 {
                cases.push(run(
                    "1",
                    "m_k > 1 for all k, 1 < m_i < n_i + 1 for some i",
                    vec![m4_high()],
                    &[Alpha],
                    2,
                ));
            }
            if cl.has(M1) && !m3 {
                cases.push(run(
                    "2",
                    "0 < m_i < 1 for some i, no m_k in (1, n_k + 1)",
                    vec![m4_low()],
                    &[Beta],
                    2,
                ));
            }
            if cl.has(M1) && m3 {
                cases.push(run(
                    "3",
                    "0 < m_i < 1 and 1 < m_s < n_s + 1 for some i, s",
                    vec![m4_high()],
                    &[Beta, Alpha],
                    3,
                ));
            }
        }
    }
    Ok(TheoremReport::assemble(TheoremId::multiplicity(growth), growth, cases))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Term;
    use crate::periodic::PeriodicFn;

    fn config() -> CheckConfig {
        CheckConfig {
            t_points: 64,
            gamma_range: GammaRange::new(-10.0, 10.0, 0.05).unwrap(),
            ..CheckConfig::default()
        }
    }

    #[test]
    fn sublinear_unit_exponent_case_two() {
        let model = Model::constant_coefficients(1.0, 1.0, &[(4.0, 1.0, 2.0, 0.0, 0.0)]).unwrap();
        let report = check_existence(&model, &config());
        assert_eq!(report.theorem, TheoremId::ExistenceSublinear);
        let case = report.case("2").unwrap();
        assert_eq!(case.verdict, Verdict::Satisfied);
        assert!((case.hypotheses[0].margin - 3.0).abs() < 1e-12);
        assert!(report.is_satisfied());
        assert_eq!(report.predicted_solution_count, 1);
    }

    #[test]
    fn asymptotically_linear_case_one_fails() {
        let model = Model::constant_coefficients(0.7, 1.0, &[(1.0, 2.0, 1.0, 0.0, 0.0)]).unwrap();
        let report = check_existence(&model, &config());
        assert_eq!(report.theorem, TheoremId::ExistenceAsymptoticallyLinear);
        let case = report.case("1").unwrap();
        assert_eq!(case.verdict, Verdict::Violated);
        let expected = (-2.0 * 0.7f64).exp() - 1.0;
        assert!((case.hypotheses[0].margin - expected).abs() < 1e-12);
        assert_eq!(report.verdict, Verdict::Violated);
    }

    #[test]
    fn structural_only_case() {
        let model = Model::constant_coefficients(1.0, 1.0, &[(1.0, 3.0, 1.0, 0.0, 0.0), (1.0, 1.5, 2.0, 0.0, 0.0)]).unwrap();
        let report = check_existence(&model, &config());
        assert_eq!(report.theorem, TheoremId::ExistenceSuperlinear);
        assert_eq!(report.cases.len(), 1);
        assert_eq!(report.cases[0].case, "1");
        assert!(report.is_satisfied());
    }

    #[test]
    fn missing_witness_is_not_a_violation() {
        // all m > 1, sublinear: needs sum > b somewhere; tiny production never does
        let model = Model::constant_coefficients(1.0, 1.0, &[(1e-3, 1.5, 2.0, 0.0, 0.0)]).unwrap();
        let report = check_existence(&model, &config());
        let case = report.case("3").unwrap();
        assert_eq!(case.verdict, Verdict::NoWitness);
        assert_eq!(report.verdict, Verdict::NoWitness);
        assert!(report.to_text().contains("no witness found in range"));
    }

    #[test]
    fn multiplicity_rejects_bad_gamma_lists() {
        let model = Model::constant_coefficients(1.0, 1.0, &[(4.0, 1.0, 2.0, 0.0, 0.0)]).unwrap();
        assert!(matches!(
            check_multiplicity(&model, &[], &config()),
            Err(Error::NonIncreasingGammas(_))
        ));
        assert!(check_multiplicity(&model, &[0.2, -0.3, -5.0], &config()).is_err());
        assert!(check_multiplicity(&model, &[1.0, 1.0], &config()).is_err());
    }

    #[test]
    fn wrong_gamma_count_fails_the_case() {
        let p = 1.0;
        let b = PeriodicFn::constant(p, 1.0).unwrap();
        let terms = vec![Term::constant(p, 1.0, 1.5, 3.0, 40.0, 0.0, 0.0).unwrap()];
        let model = Model::new(p, b, terms).unwrap();
        let report = check_multiplicity(&model, &[-1.0, 1.0], &config()).unwrap();
        assert_eq!(report.theorem, TheoremId::MultiplicitySublinear);
        assert_eq!(report.verdict, Verdict::Violated);
        let ok = check_multiplicity(&model, &[-1.0], &config()).unwrap();
        assert!(ok.is_satisfied());
        assert_eq!(ok.predicted_solution_count, 2);
    }

    #[test]
    fn report_text_parses_as_toml() {
        let model = Model::constant_coefficients(1.0, 1.0, &[(4.0, 1.0, 2.0, 0.0, 0.0)]).unwrap();
        let text = check_existence(&model, &config()).to_text();
        let parsed: toml::Table = text.parse().unwrap();
        assert_eq!(parsed["verdict"].as_str(), Some("satisfied"));
    }
}
