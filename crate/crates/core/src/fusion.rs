//! Combination rules: Dempster, Bayes, and minimum information gain.
//!
//! All three build the same scaffolding. Each bpa becomes an abstract
//! evidence body, the pair gets a joint compatibility relation, and a joint
//! distribution over `S × S'` is chosen. The combined bpa collects the joint's
//! cells by the target set each pair is compatible with. The rules differ
//! only in how the joint is chosen.

use std::fmt;
use std::str::FromStr;

use crate::bpa::{Bpa, MASS_TOLERANCE};
use crate::constraints::{
    assemble, check_feasible, Conditional, Feasibility, FEASIBILITY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::evidence::{
    abstract_evidence, default_joint_compatibility, EvidenceBody, JointCompatibility,
};
use crate::infomeasures::InformationReport;
use crate::maxent::{solve_maxent, JointDistribution, SolverOptions, SolverReport};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Dempster,
    Bayes,
    MinGain,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Dempster => "dempster",
            Rule::Bayes => "bayes",
            Rule::MinGain => "mingain",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "dempster" => Ok(Rule::Dempster),
            "bayes" => Ok(Rule::Bayes),
            "mingain" => Ok(Rule::MinGain),
            other => Err(format!("unknown rule `{other}`")),
        }
    }
}

/// Outcome of combining two bpas.
#[derive(Clone, Debug)]
pub struct CombinedResult {
    pub bpa: Bpa,
    pub joint: JointDistribution,
    pub rule: Rule,
    /// Dempster's `K`; 1 for the other rules.
    pub normalization: f64,
    /// Product mass on dead pairs discarded by Dempster's rule; 0 otherwise.
    pub conflict_mass: f64,
    pub measures: InformationReport,
    /// Present for the minimum-gain rule.
    pub solver: Option<SolverReport>,
    pub left: EvidenceBody,
    pub right: EvidenceBody,
    pub compatibility: JointCompatibility,
}

/// Collects joint mass by the target set of each pair.
pub fn bpa_from_joint(joint: &JointDistribution, compat: &JointCompatibility) -> Result<Bpa> {
    if joint.left() != compat.left() || joint.right() != compat.right() {
        return Err(Error::FrameMismatch);
    }
    let mut masses = Vec::new();
    for i in 0..joint.n_rows() {
        for j in 0..joint.n_cols() {
            let p = joint.get(i, j);
            if p <= 0.0 {
                continue;
            }
            if compat.is_dead(i, j) {
                return Err(Error::InvalidProbability(format!(
                    "mass {p} on ({}, {}), which is compatible with no target element",
                    joint.left().label(i),
                    joint.right().label(j)
                )));
            }
            masses.push((compat.targets(i, j).clone(), p));
        }
    }
    Bpa::from_accumulated(compat.target(), masses)
}

fn bodies(b1: &Bpa, b2: &Bpa) -> Result<(EvidenceBody, EvidenceBody)> {
    if b1.frame() != b2.frame() {
        return Err(Error::FrameMismatch);
    }
    Ok((abstract_evidence(b1), abstract_evidence(b2)))
}

/// Dempster's rule: the product joint, renormalized over pairs that agree on
/// at least one target element.
pub fn dempster_combine(b1: &Bpa, b2: &Bpa) -> Result<CombinedResult> {
    let (left, right) = bodies(b1, b2)?;
    let compat = default_joint_compatibility(left.relation(), right.relation())?;
    let product = JointDistribution::product(left.prob(), right.prob());
    let (n, m) = (left.len(), right.len());

    let mut live = 0.0;
    let mut conflict_mass = 0.0;
    for i in 0..n {
        for j in 0..m {
            if compat.is_dead(i, j) {
                conflict_mass += product.get(i, j);
            } else {
                live += product.get(i, j);
            }
        }
    }
    if live <= 0.0 {
        return Err(Error::TotalConflict);
    }
    let cells = (0..n)
        .flat_map(|i| (0..m).map(move |j| (i, j)))
        .map(|(i, j)| {
            if compat.is_dead(i, j) {
                0.0
            } else {
                product.get(i, j) / live
            }
        })
        .collect();
    let joint = JointDistribution::new(left.frame(), right.frame(), cells)?;
    let bpa = bpa_from_joint(&joint, &compat)?;
    let measures = InformationReport::new(&joint, left.prob(), right.prob())?;
    Ok(CombinedResult {
        bpa,
        joint,
        rule: Rule::Dempster,
        normalization: 1.0 / live,
        conflict_mass,
        measures,
        solver: None,
        left,
        right,
        compatibility: compat,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinGainOptions {
    /// `P(s'|s)` by index into the two abstract frames.
    pub conditionals: Vec<Conditional>,
    /// Replaces the default joint compatibility when the actual one is known.
    pub joint_relation: Option<JointCompatibility>,
    pub solver: SolverOptions,
    pub feasibility_tol: f64,
}

impl Default for MinGainOptions {
    fn default() -> Self {
        MinGainOptions {
            conditionals: Vec::new(),
            joint_relation: None,
            solver: SolverOptions::default(),
            feasibility_tol: FEASIBILITY_TOLERANCE,
        }
    }
}

/// The joint with the least information gain among those consistent with
/// both marginals, the compatibility relation, and any conditionals.
///
/// Fails with [`Error::ConflictDetected`] when no such joint exists.
pub fn min_gain_combine(b1: &Bpa, b2: &Bpa, opts: &MinGainOptions) -> Result<CombinedResult> {
    let (left, right) = bodies(b1, b2)?;
    let compat = match &opts.joint_relation {
        Some(rel) => {
            if rel.left() != left.frame()
                || rel.right() != right.frame()
                || rel.target() != b1.frame()
            {
                return Err(Error::FrameMismatch);
            }
            rel.clone()
        }
        None => default_joint_compatibility(left.relation(), right.relation())?,
    };
    let cs = assemble(&left, &right, &compat, &opts.conditionals)?;
    if let Feasibility::Conflict(cert) = check_feasible(&cs, opts.feasibility_tol) {
        return Err(Error::ConflictDetected(Box::new(cert)));
    }
    let (joint, report) = solve_maxent(&cs, &opts.solver)?;
    let bpa = bpa_from_joint(&joint, &compat)?;
    let measures = InformationReport::new(&joint, left.prob(), right.prob())?;
    Ok(CombinedResult {
        bpa,
        joint,
        rule: Rule::MinGain,
        normalization: 1.0,
        conflict_mass: 0.0,
        measures,
        solver: Some(report),
        left,
        right,
        compatibility: compat,
    })
}

/// Bayes conditionalization: `P(s, s') = P(s) · P(s'|s)`.
///
/// Every row `s` needs conditionals summing to 1; unlisted pairs in a row are 0.
/// The resulting joint must reproduce the column marginals and leave dead
/// pairs empty.
pub fn bayes_combine(b1: &Bpa, b2: &Bpa, conditionals: &[Conditional]) -> Result<CombinedResult> {
    let (left, right) = bodies(b1, b2)?;
    let compat = default_joint_compatibility(left.relation(), right.relation())?;
    let (n, m) = (left.len(), right.len());
    let (lf, rf) = (left.frame(), right.frame());

    let mut table: Vec<Option<f64>> = vec![None; n * m];
    for c in conditionals {
        if c.given >= n {
            return Err(Error::UnknownElement(format!("given index {}", c.given)));
        }
        if c.then >= m {
            return Err(Error::UnknownElement(format!("then index {}", c.then)));
        }
        let name = format!("P({} | {})", rf.label(c.then), lf.label(c.given));
        if !(0.0..=1.0).contains(&c.prob) {
            return Err(Error::InconsistentConditional(format!(
                "{name} = {} outside [0, 1]",
                c.prob
            )));
        }
        if table[c.given * m + c.then].replace(c.prob).is_some() {
            return Err(Error::InconsistentConditional(format!(
                "{name} given twice"
            )));
        }
        if c.prob > 0.0 && compat.is_dead(c.given, c.then) {
            return Err(Error::InconsistentConditional(format!(
                "{name} = {} but the pair is compatible with no target element",
                c.prob
            )));
        }
    }
    for i in 0..n {
        let row = &table[i * m..(i + 1) * m];
        if row.iter().all(Option::is_none) {
            return Err(Error::IncompleteConditionals(format!(
                "no conditionals given {}",
                lf.label(i)
            )));
        }
        let total: f64 = row.iter().flatten().sum();
        if total < 1.0 - MASS_TOLERANCE {
            return Err(Error::IncompleteConditionals(format!(
                "conditionals given {} sum to {total}",
                lf.label(i)
            )));
        }
        if total > 1.0 + MASS_TOLERANCE {
            return Err(Error::InconsistentConditional(format!(
                "conditionals given {} sum to {total}",
                lf.label(i)
            )));
        }
    }

    let cells: Vec<f64> = (0..n * m)
        .map(|k| left.prob().get(k / m) * table[k].unwrap_or(0.0))
        .collect();
    for j in 0..m {
        let col: f64 = (0..n).map(|i| cells[i * m + j]).sum();
        let want = right.prob().get(j);
        if (col - want).abs() > MASS_TOLERANCE {
            return Err(Error::InconsistentConditional(format!(
                "conditionals give {} total mass {col}, but its probability is {want}",
                rf.label(j)
            )));
        }
    }
    let joint = JointDistribution::new(lf, rf, cells)?;
    let bpa = bpa_from_joint(&joint, &compat)?;
    let measures = InformationReport::new(&joint, left.prob(), right.prob())?;
    Ok(CombinedResult {
        bpa,
        joint,
        rule: Rule::Bayes,
        normalization: 1.0,
        conflict_mass: 0.0,
        measures,
        solver: None,
        left,
        right,
        compatibility: compat,
    })
}

/// Settings for [`combine_pair`] and [`combine_all`]. Conditionals and an
/// explicit joint relation apply to the first pairwise step only.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CombineOptions {
    pub mingain: MinGainOptions,
}

/// One pairwise step with the selected rule.
pub fn combine_pair(
    b1: &Bpa,
    b2: &Bpa,
    rule: Rule,
    opts: &MinGainOptions,
) -> Result<CombinedResult> {
    match rule {
        Rule::Dempster => dempster_combine(b1, b2),
        Rule::Bayes => bayes_combine(b1, b2, &opts.conditionals),
        Rule::MinGain => min_gain_combine(b1, b2, opts),
    }
}

#[derive(Clone, Debug)]
pub struct FoldResult {
    pub bpa: Bpa,
    pub steps: Vec<CombinedResult>,
}

/// Left fold in input order. The minimum-gain rule is order-sensitive.
pub fn combine_all(bodies: &[Bpa], rule: Rule, opts: &CombineOptions) -> Result<FoldResult> {
    let (first, rest) = bodies.split_first().ok_or(Error::NoEvidence)?;
    let later = MinGainOptions {
        conditionals: Vec::new(),
        joint_relation: None,
        ..opts.mingain.clone()
    };
    let mut acc = first.clone();
    let mut steps = Vec::with_capacity(rest.len());
    for (k, next) in rest.iter().enumerate() {
        let step_opts = if k == 0 { &opts.mingain } else { &later };
        let result = combine_pair(&acc, next, rule, step_opts)?;
        acc = result.bpa.clone();
        steps.push(result);
    }
    Ok(FoldResult { bpa: acc, steps })
}

/// Combines independent pairs, in parallel when the `parallel` feature is on.
pub fn combine_batch(
    pairs: &[(Bpa, Bpa)],
    rule: Rule,
    opts: &MinGainOptions,
) -> Vec<Result<CombinedResult>> {
    par::map(pairs, |(a, b)| combine_pair(a, b, rule, opts))
}

/// Sequential [`combine_batch`].
pub fn combine_batch_seq(
    pairs: &[(Bpa, Bpa)],
    rule: Rule,
    opts: &MinGainOptions,
) -> Vec<Result<CombinedResult>> {
    par::seq_map(pairs, |(a, b)| combine_pair(a, b, rule, opts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Frame;

    fn t3() -> Frame {
        Frame::new(["t1", "t2", "t3"]).unwrap()
    }

    fn bpa_a(f: &Frame) -> Bpa {
        Bpa::from_labels(f, [(vec!["t1", "t2"], 0.8), (vec!["t1", "t2", "t3"], 0.2)]).unwrap()
    }

    fn bpa_b(f: &Frame) -> Bpa {
        Bpa::from_labels(
            f,
            [
                (vec!["t2", "t3"], 0.7),
                (vec!["t3"], 0.2),
                (vec!["t1", "t2", "t3"], 0.1),
            ],
        )
        .unwrap()
    }

    fn m(b: &Bpa, labels: &[&str]) -> f64 {
        b.mass(&b.frame().proposition(labels).unwrap())
    }

    #[test]
    fn dempster_pair_ab() {
        let f = t3();
        let r = dempster_combine(&bpa_a(&f), &bpa_b(&f)).unwrap();
        for (set, want) in [
            (&["t2"][..], 0.667),
            (&["t3"], 0.048),
            (&["t1", "t2"], 0.095),
            (&["t2", "t3"], 0.166),
            (&["t1", "t2", "t3"], 0.024),
        ] {
            assert!((m(&r.bpa, set) - want).abs() <= 1e-3, "{set:?}");
        }
        assert!((r.conflict_mass - 0.16).abs() < 1e-12);
        assert!((r.normalization - 1.0 / 0.84).abs() < 1e-12);
        let bel = r.bpa.bel(&f.proposition(["t1", "t2"]).unwrap()).unwrap();
        assert!((bel - 0.762).abs() <= 1e-3 && bel < 0.8);
    }

    #[test]
    fn dempster_with_vacuous_is_identity() {
        let f = t3();
        let b = bpa_b(&f);
        let r = dempster_combine(&b, &Bpa::vacuous(&f)).unwrap();
        assert!(r.bpa.approx_eq(&b, 1e-15));
        assert!((r.normalization - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dempster_total_conflict() {
        let f = t3();
        let a = Bpa::from_labels(&f, [(vec!["t1"], 1.0)]).unwrap();
        let b = Bpa::from_labels(&f, [(vec!["t2"], 1.0)]).unwrap();
        assert!(matches!(
            dempster_combine(&a, &b),
            Err(Error::TotalConflict)
        ));
    }

    #[test]
    fn min_gain_pair_ab() {
        let f = t3();
        let r = min_gain_combine(&bpa_a(&f), &bpa_b(&f), &MinGainOptions::default()).unwrap();
        assert_eq!(r.bpa.len(), 3);
        assert!((m(&r.bpa, &["t2"]) - 0.7).abs() < 1e-12);
        assert!((m(&r.bpa, &["t3"]) - 0.2).abs() < 1e-12);
        assert!((m(&r.bpa, &["t1", "t2"]) - 0.1).abs() < 1e-12);
        for a in f.power_set() {
            let bel = r.bpa.bel(&a).unwrap();
            assert!(bel >= bpa_a(&f).bel(&a).unwrap() - 1e-12);
            assert!(bel >= bpa_b(&f).bel(&a).unwrap() - 1e-12);
        }
    }

    #[test]
    fn min_gain_with_vacuous_is_identity() {
        let f = t3();
        let b = bpa_a(&f);
        let r = min_gain_combine(&b, &Bpa::vacuous(&f), &MinGainOptions::default()).unwrap();
        assert!(r.bpa.approx_eq(&b, 1e-12));
        let r = min_gain_combine(&Bpa::vacuous(&f), &b, &MinGainOptions::default()).unwrap();
        assert!(r.bpa.approx_eq(&b, 1e-12));
    }

    #[test]
    fn min_gain_conflict() {
        let f = t3();
        let a = Bpa::from_labels(&f, [(vec!["t1"], 1.0)]).unwrap();
        let b = Bpa::from_labels(&f, [(vec!["t2"], 1.0)]).unwrap();
        match min_gain_combine(&a, &b, &MinGainOptions::default()) {
            Err(Error::ConflictDetected(cert)) => assert_eq!(cert.row_mass, 1.0),
            other => panic!("expected conflict, got {other:?}"),
        }
    }

    #[test]
    fn bayes_reproduces_pair_ab() {
        let f = t3();
        let conds = [
            Conditional {
                given: 0,
                then: 0,
                prob: 0.875,
            },
            Conditional {
                given: 0,
                then: 2,
                prob: 0.125,
            },
            Conditional {
                given: 1,
                then: 1,
                prob: 1.0,
            },
        ];
        let r = bayes_combine(&bpa_a(&f), &bpa_b(&f), &conds).unwrap();
        let want = [0.7, 0.0, 0.1, 0.0, 0.2, 0.0];
        for (got, want) in r.joint.cells().iter().zip(want) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn bayes_errors() {
        let f = t3();
        let (a, b) = (bpa_a(&f), bpa_b(&f));
        let dead = [
            Conditional {
                given: 0,
                then: 1,
                prob: 0.5,
            },
            Conditional {
                given: 0,
                then: 0,
                prob: 0.5,
            },
            Conditional {
                given: 1,
                then: 1,
                prob: 1.0,
            },
        ];
        assert!(matches!(
            bayes_combine(&a, &b, &dead),
            Err(Error::InconsistentConditional(_))
        ));
        let missing = [Conditional {
            given: 0,
            then: 0,
            prob: 1.0,
        }];
        assert!(matches!(
            bayes_combine(&a, &b, &missing),
            Err(Error::IncompleteConditionals(_))
        ));
        let columns_off = [
            Conditional {
                given: 0,
                then: 0,
                prob: 1.0,
            },
            Conditional {
                given: 1,
                then: 1,
                prob: 1.0,
            },
        ];
        assert!(matches!(
            bayes_combine(&a, &b, &columns_off),
            Err(Error::InconsistentConditional(_))
        ));
    }

    #[test]
    fn fold_examples() {
        let f = t3();
        let b = bpa_b(&f);
        let v = Bpa::vacuous(&f);
        let opts = CombineOptions::default();
        let single = combine_all(std::slice::from_ref(&b), Rule::MinGain, &opts).unwrap();
        assert!(single.bpa.approx_eq(&b, 0.0) && single.steps.is_empty());
        for rule in [Rule::MinGain, Rule::Dempster] {
            let r = combine_all(&[b.clone(), v.clone(), v.clone()], rule, &opts).unwrap();
            assert!(r.bpa.approx_eq(&b, 1e-12));
            assert_eq!(r.steps.len(), 2);
        }
        let r = combine_all(&[bpa_a(&f), b], Rule::MinGain, &opts).unwrap();
        assert!((m(&r.bpa, &["t2"]) - 0.7).abs() < 1e-12);
        assert!(matches!(
            combine_all(&[], Rule::MinGain, &opts),
            Err(Error::NoEvidence)
        ));
    }

    #[test]
    fn explicit_joint_relation_overrides_default() {
        let f = t3();
        let (a, b) = (bpa_a(&f), bpa_b(&f));
        let (l, r) = (abstract_evidence(&a), abstract_evidence(&b));
        // Every pair compatible with t2 only.
        let triples: Vec<(String, String)> = (1..=2)
            .flat_map(|i| (1..=3).map(move |j| (format!("s{i}"), format!("s{j}"))))
            .collect();
        let rel = JointCompatibility::from_triples(
            l.frame(),
            r.frame(),
            &f,
            triples.iter().map(|(x, y)| (x.as_str(), y.as_str(), "t2")),
        )
        .unwrap();
        let opts = MinGainOptions {
            joint_relation: Some(rel),
            ..Default::default()
        };
        let res = min_gain_combine(&a, &b, &opts).unwrap();
        assert!((m(&res.bpa, &["t2"]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batch_matches_sequential() {
        let f = t3();
        let pairs = vec![
            (bpa_a(&f), bpa_b(&f)),
            (bpa_b(&f), bpa_a(&f)),
            (bpa_b(&f), Bpa::vacuous(&f)),
        ];
        let opts = MinGainOptions::default();
        let a = combine_batch(&pairs, Rule::MinGain, &opts);
        let b = combine_batch_seq(&pairs, Rule::MinGain, &opts);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.as_ref().unwrap().joint, y.as_ref().unwrap().joint);
        }
    }
}
