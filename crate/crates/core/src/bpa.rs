//! Basic probability assignments, belief and plausibility.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::frame::{Frame, Proposition};
use crate::par;

/// Allowed deviation of a mass or probability total from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

// Totals that are off only by summation rounding are left alone, so exact
// inputs such as (0.7, 0.2, 0.1) keep their literal values.
fn needs_rescale(total: f64, terms: usize) -> bool {
    (total - 1.0).abs() > f64::EPSILON * terms.max(1) as f64
}

/// A mass function over the propositions of a frame.
///
/// Only focal elements (strictly positive mass) are stored. Focal elements
/// keep the order in which they were supplied; that order names the
/// elements of the abstract evidence frame built from this assignment.
#[derive(Clone, Debug)]
pub struct Bpa {
    frame: Frame,
    focal: Vec<(Proposition, f64)>,
}

impl Bpa {
    /// Validates a list of `(proposition, mass)` pairs.
    ///
    /// Zero masses are dropped. Totals within [`MASS_TOLERANCE`] of 1 are
    /// rescaled to sum to 1.
    pub fn new(frame: &Frame, assignments: Vec<(Proposition, f64)>) -> Result<Self> {
        let mut seen = HashMap::with_capacity(assignments.len());
        let mut focal = Vec::with_capacity(assignments.len());
        for (set, mass) in assignments {
            if set.frame() != frame {
                return Err(Error::FrameMismatch);
            }
            if !mass.is_finite() {
                return Err(Error::NonFiniteMass(mass));
            }
            if mass < 0.0 {
                return Err(Error::NegativeMass(mass));
            }
            if set.is_empty() && mass > 0.0 {
                return Err(Error::EmptySetMass);
            }
            if seen.insert(set.clone(), ()).is_some() {
                return Err(Error::DuplicateFocal(set.to_string()));
            }
            if mass > 0.0 {
                focal.push((set, mass));
            }
        }
        let total: f64 = focal.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassSumViolation(total));
        }
        if needs_rescale(total, focal.len()) {
            for (_, m) in &mut focal {
                *m /= total;
            }
        }
        Ok(Bpa {
            frame: frame.clone(),
            focal,
        })
    }

    /// Builds from label sets, e.g. `[(vec!["t1", "t2"], 0.8), (vec!["t1", "t2", "t3"], 0.2)]`.
    pub fn from_labels<A, L, S>(frame: &Frame, assignments: A) -> Result<Self>
    where
        A: IntoIterator<Item = (L, f64)>,
        L: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let pairs = assignments
            .into_iter()
            .map(|(labels, m)| Ok((frame.proposition(labels)?, m)))
            .collect::<Result<Vec<_>>>()?;
        Bpa::new(frame, pairs)
    }

    /// Sums masses landing on the same proposition and stores the result in
    /// canonical (ascending bit pattern) order. Used for derived assignments.
    pub fn from_accumulated<I>(frame: &Frame, masses: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Proposition, f64)>,
    {
        let mut acc: HashMap<Proposition, f64> = HashMap::new();
        for (set, mass) in masses {
            if mass == 0.0 {
                continue;
            }
            *acc.entry(set).or_insert(0.0) += mass;
        }
        let mut pairs: Vec<_> = acc.into_iter().collect();
        if pairs.iter().map(|(_, m)| m).sum::<f64>() <= 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        Bpa::new(frame, pairs)
    }

    /// Total ignorance: all mass on the whole frame.
    pub fn vacuous(frame: &Frame) -> Self {
        Bpa {
            frame: frame.clone(),
            focal: vec![(frame.full_set(), 1.0)],
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn focal(&self) -> &[(Proposition, f64)] {
        &self.focal
    }

    pub fn len(&self) -> usize {
        self.focal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.focal.is_empty()
    }

    pub fn is_vacuous(&self) -> bool {
        self.focal.len() == 1 && self.focal[0].0 == self.frame.full_set()
    }

    pub fn mass(&self, a: &Proposition) -> f64 {
        self.focal
            .iter()
            .find(|(f, _)| f == a)
            .map_or(0.0, |(_, m)| *m)
    }

    /// Total mass of focal elements contained in `a`.
    pub fn bel(&self, a: &Proposition) -> Result<f64> {
        if a.frame() != &self.frame {
            return Err(Error::FrameMismatch);
        }
        Ok(self.bel_unchecked(a))
    }

    /// `1 - bel(¬a)`.
    pub fn pl(&self, a: &Proposition) -> Result<f64> {
        if a.frame() != &self.frame {
            return Err(Error::FrameMismatch);
        }
        Ok(1.0 - self.bel_unchecked(&!a))
    }

    fn bel_unchecked(&self, a: &Proposition) -> f64 {
        self.focal
            .iter()
            .filter(|(f, _)| f.is_subset_of(a))
            .map(|(_, m)| m)
            .sum()
    }

    /// Copy with focal elements in ascending bit-pattern order.
    pub fn canonical(&self) -> Bpa {
        let mut focal = self.focal.clone();
        focal.sort_by(|a, b| a.0.cmp(&b.0));
        Bpa {
            frame: self.frame.clone(),
            focal,
        }
    }

    /// Same focal sets with masses within `tol`, regardless of order.
    pub fn approx_eq(&self, other: &Bpa, tol: f64) -> bool {
        self.frame == other.frame
            && self.focal.len() == other.focal.len()
            && self.focal.iter().all(|(f, m)| {
                other
                    .focal
                    .iter()
                    .any(|(g, n)| f == g && (m - n).abs() <= tol)
            })
    }

    /// Largest per-proposition mass difference over the union of focal sets.
    pub fn max_mass_diff(&self, other: &Bpa) -> f64 {
        self.focal
            .iter()
            .chain(other.focal.iter())
            .map(|(f, _)| (self.mass(f) - other.mass(f)).abs())
            .fold(0.0, f64::max)
    }
}

/// Bel and Pl of one proposition.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefRow {
    pub set: Proposition,
    pub bel: f64,
    pub pl: f64,
}

/// Bel/Pl for every proposition of the frame, in ascending bit order.
pub fn belief_table(bpa: &Bpa) -> Vec<BeliefRow> {
    let frame = bpa.frame();
    assert!(
        frame.len() <= 20,
        "belief table over 2^{} propositions",
        frame.len()
    );
    par::map_range(1usize << frame.len(), |m| {
        let set = frame.proposition_from_mask(m as u64);
        BeliefRow {
            bel: bpa.bel_unchecked(&set),
            pl: 1.0 - bpa.bel_unchecked(&!&set),
            set,
        }
    })
}

/// A probability distribution over the elements of a frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityFunction {
    frame: Frame,
    probs: Vec<f64>,
}

impl ProbabilityFunction {
    pub fn new(frame: &Frame, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != frame.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a {}-element frame",
                probs.len(),
                frame.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbability(format!(
                "entry {p} is not a nonnegative number"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidProbability(format!("entries sum to {total}")));
        }
        Ok(ProbabilityFunction {
            frame: frame.clone(),
            probs: if needs_rescale(total, probs.len()) {
                probs.into_iter().map(|p| p / total).collect()
            } else {
                probs
            },
        })
    }

    pub fn uniform(frame: &Frame) -> Self {
        let n = frame.len();
        ProbabilityFunction {
            frame: frame.clone(),
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn make_bpa_examples() {
        let f = t3();
        assert_eq!(bpa_a(&f).len(), 2);

        let empty: Vec<&str> = vec![];
        let e = Bpa::from_labels(&f, [(empty, 0.1), (vec!["t1", "t2", "t3"], 0.9)]);
        assert_eq!(e.unwrap_err(), Error::EmptySetMass);

        let e = Bpa::from_labels(&f, [(vec!["t1"], 0.5), (vec!["t2"], 0.49)]);
        assert!(matches!(e, Err(Error::MassSumViolation(s)) if (s - 0.99).abs() < 1e-12));
    }

    #[test]
    fn make_bpa_errors() {
        let f = t3();
        let e = Bpa::from_labels(&f, [(vec!["t1"], -0.5), (vec!["t2"], 1.5)]);
        assert_eq!(e.unwrap_err(), Error::NegativeMass(-0.5));
        let e = Bpa::from_labels(&f, [(vec!["t9"], 1.0)]);
        assert_eq!(e.unwrap_err(), Error::UnknownLabel("t9".into()));
        let e = Bpa::from_labels(&f, [(vec!["t1"], 0.5), (vec!["t1"], 0.5)]);
        assert_eq!(e.unwrap_err(), Error::DuplicateFocal("{t1}".into()));
        let e = Bpa::from_labels(&f, [(vec!["t1"], f64::NAN)]);
        assert!(matches!(e, Err(Error::NonFiniteMass(_))));
    }

    #[test]
    fn zero_masses_dropped_and_sum_renormalized() {
        let f = t3();
        let b = Bpa::from_labels(
            &f,
            [
                (vec!["t1"], 0.0),
                (vec!["t2"], 0.6),
                (vec!["t3"], 0.4 + 5e-10),
            ],
        )
        .unwrap();
        assert_eq!(b.len(), 2);
        let total: f64 = b.focal().iter().map(|(_, m)| m).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bel_examples() {
        let f = t3();
        let t12 = f.proposition(["t1", "t2"]).unwrap();
        assert!((bpa_a(&f).bel(&t12).unwrap() - 0.8).abs() < 1e-15);
        assert!((bpa_a(&f).bel(&f.full_set()).unwrap() - 1.0).abs() < 1e-15);
        assert!((bpa_b(&f).bel(&f.proposition(["t3"]).unwrap()).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn pl_examples() {
        let f = t3();
        let t12 = f.proposition(["t1", "t2"]).unwrap();
        // 1 - Bel({t3}) = 1 - 0.2
        assert!((bpa_b(&f).pl(&t12).unwrap() - 0.8).abs() < 1e-12);
        assert!((bpa_a(&f).pl(&t12).unwrap() - 1.0).abs() < 1e-12);
        assert!(bpa_b(&f).pl(&f.empty_set()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn frame_mismatch() {
        let f = t3();
        let g = Frame::new(["a", "b", "c"]).unwrap();
        assert_eq!(bpa_a(&f).bel(&g.full_set()), Err(Error::FrameMismatch));
        assert_eq!(bpa_a(&f).pl(&g.full_set()), Err(Error::FrameMismatch));
    }

    #[test]
    fn vacuous() {
        let f = t3();
        let v = Bpa::vacuous(&f);
        assert!(v.is_vacuous());
        assert_eq!(v.focal(), &[(f.full_set(), 1.0)]);
        for a in f.power_set() {
            let bel = v.bel(&a).unwrap();
            let pl = v.pl(&a).unwrap();
            if a != f.full_set() {
                assert_eq!(bel, 0.0);
            }
            if !a.is_empty() {
                assert_eq!(pl, 1.0);
            }
        }
    }

    #[test]
    fn belief_table_matches_pointwise() {
        let f = t3();
        let b = bpa_b(&f);
        let table = belief_table(&b);
        assert_eq!(table.len(), 8);
        for row in table {
            assert_eq!(row.bel, b.bel(&row.set).unwrap());
            assert!((row.pl - b.pl(&row.set).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn probability_function_validation() {
        let f = t3();
        assert!(ProbabilityFunction::new(&f, vec![0.5, 0.5]).is_err());
        assert!(ProbabilityFunction::new(&f, vec![0.5, 0.6, -0.1]).is_err());
        assert!(ProbabilityFunction::new(&f, vec![0.5, 0.4, 0.0]).is_err());
        let p = ProbabilityFunction::new(&f, vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.5, 0.0]);
    }
}
