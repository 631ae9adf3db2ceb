//! Compatibility relations between an evidence frame and a target frame,
//! abstract evidence frames, and the transfer of probability across them.

use crate::bpa::{Bpa, ProbabilityFunction};
use crate::error::{Error, Result};
use crate::frame::{Frame, Proposition};

/// `s C t`: source element `s` does not rule out target element `t`.
///
/// Stored row-wise: `rows[s]` is the set of target elements compatible with `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompatibilityRelation {
    source: Frame,
    target: Frame,
    rows: Vec<Proposition>,
}

impl CompatibilityRelation {
    /// Every source element must be compatible with at least one target element.
    pub fn new(source: &Frame, target: &Frame, rows: Vec<Proposition>) -> Result<Self> {
        if rows.len() != source.len() {
            return Err(Error::InvalidRelation(format!(
                "{} rows for a {}-element source frame",
                rows.len(),
                source.len()
            )));
        }
        for (s, row) in rows.iter().enumerate() {
            if row.frame() != target {
                return Err(Error::FrameMismatch);
            }
            if row.is_empty() {
                return Err(Error::InvalidRelation(format!(
                    "`{}` is compatible with no target element",
                    source.label(s)
                )));
            }
        }
        Ok(CompatibilityRelation {
            source: source.clone(),
            target: target.clone(),
            rows,
        })
    }

    /// From explicit `(source label, target label)` pairs.
    pub fn from_pairs<'a, I>(source: &Frame, target: &Frame, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut rows = vec![target.empty_set(); source.len()];
        for (s, t) in pairs {
            let si = source
                .index_of(s)
                .ok_or_else(|| Error::UnknownElement(s.to_string()))?;
            let ti = target
                .index_of(t)
                .ok_or_else(|| Error::UnknownLabel(t.to_string()))?;
            rows[si].insert(ti);
        }
        CompatibilityRelation::new(source, target, rows)
    }

    pub fn source(&self) -> &Frame {
        &self.source
    }

    pub fn target(&self) -> &Frame {
        &self.target
    }

    pub fn compatible(&self, s: usize, t: usize) -> bool {
        self.rows[s].contains(t)
    }

    /// Target elements compatible with source element `s`.
    pub fn row(&self, s: usize) -> &Proposition {
        &self.rows[s]
    }

    /// Source elements compatible with target element `t` (the transpose).
    pub fn sources_of(&self, t: usize) -> Proposition {
        self.source
            .proposition_from_indices((0..self.source.len()).filter(|&s| self.rows[s].contains(t)))
    }

    /// Target elements compatible with no source element.
    pub fn uncovered_targets(&self) -> Proposition {
        let covered = self
            .rows
            .iter()
            .fold(self.target.empty_set(), |acc, r| &acc | r);
        !&covered
    }

    /// The smallest target proposition implied by `a`: every target element
    /// compatible with some member of `a`.
    pub fn implies(&self, a: &Proposition) -> Result<Proposition> {
        if a.frame() != &self.source {
            return Err(Error::FrameMismatch);
        }
        Ok(a.iter()
            .fold(self.target.empty_set(), |acc, s| &acc | &self.rows[s]))
    }

    /// For a relation-induced implication the implied set is already minimal,
    /// so this coincides with [`implies`](Self::implies).
    pub fn exactly_implies(&self, a: &Proposition) -> Result<Proposition> {
        self.implies(a)
    }

    /// All `(source, target)` index pairs in the relation, row-major.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.source.len())
            .flat_map(|s| self.rows[s].iter().map(move |t| (s, t)))
            .collect()
    }
}

/// A probability function on an evidence frame plus its relation to the target.
#[derive(Clone, Debug, PartialEq)]
pub struct EvidenceBody {
    prob: ProbabilityFunction,
    relation: CompatibilityRelation,
}

impl EvidenceBody {
    /// Source elements with zero probability are rejected.
    pub fn new(prob: ProbabilityFunction, relation: CompatibilityRelation) -> Result<Self> {
        if prob.frame() != relation.source() {
            return Err(Error::FrameMismatch);
        }
        if let Some(s) = prob.probs().iter().position(|&p| p <= 0.0) {
            return Err(Error::InvalidProbability(format!(
                "evidence element `{}` has zero probability",
                prob.frame().label(s)
            )));
        }
        Ok(EvidenceBody { prob, relation })
    }

    pub fn frame(&self) -> &Frame {
        self.prob.frame()
    }

    pub fn target(&self) -> &Frame {
        self.relation.target()
    }

    pub fn prob(&self) -> &ProbabilityFunction {
        &self.prob
    }

    pub fn relation(&self) -> &CompatibilityRelation {
        &self.relation
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }
}

/// Builds the abstract evidence frame of a bpa: element `s{i}` stands for
/// the i-th focal element (in the bpa's focal order), is compatible with
/// exactly its members, and carries its mass as probability.
pub fn abstract_evidence(bpa: &Bpa) -> EvidenceBody {
    let frame =
        Frame::numbered("s", bpa.len()).expect("a valid bpa has at least one focal element");
    let rows = bpa.focal().iter().map(|(f, _)| f.clone()).collect();
    let probs = bpa.focal().iter().map(|(_, m)| *m).collect();
    let relation =
        CompatibilityRelation::new(&frame, bpa.frame(), rows).expect("focal elements are nonempty");
    let prob = ProbabilityFunction::new(&frame, probs).expect("bpa masses sum to 1");
    EvidenceBody::new(prob, relation).expect("focal masses are positive")
}

/// Transfers an evidence body's probability to the target frame:
/// `m(F)` is the total probability of the source elements exactly implying `F`.
pub fn bpa_from_evidence(body: &EvidenceBody) -> Result<Bpa> {
    let rel = body.relation();
    Bpa::from_accumulated(
        body.target(),
        body.prob()
            .probs()
            .iter()
            .enumerate()
            .map(|(s, &p)| (rel.row(s).clone(), p)),
    )
}

/// Compatibility between pairs `(s, s')` of two evidence frames and the target.
///
/// `cells[s * |S'| + s']` is the set of target elements compatible with the
/// pair. An empty set marks a dead pair, which must carry no probability.
#[derive(Clone, Debug, PartialEq)]
pub struct JointCompatibility {
    left: Frame,
    right: Frame,
    target: Frame,
    cells: Vec<Proposition>,
}

impl JointCompatibility {
    /// From explicit `(left element, right element, target element)` triples.
    /// Pairs that appear in no triple are dead.
    pub fn from_triples<'a, I>(
        left: &Frame,
        right: &Frame,
        target: &Frame,
        triples: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str, &'a str)>,
    {
        let mut cells = vec![target.empty_set(); left.len() * right.len()];
        for (s, s2, t) in triples {
            let i = left
                .index_of(s)
                .ok_or_else(|| Error::UnknownElement(s.to_string()))?;
            let j = right
                .index_of(s2)
                .ok_or_else(|| Error::UnknownElement(s2.to_string()))?;
            let k = target
                .index_of(t)
                .ok_or_else(|| Error::UnknownLabel(t.to_string()))?;
            cells[i * right.len() + j].insert(k);
        }
        Ok(JointCompatibility {
            left: left.clone(),
            right: right.clone(),
            target: target.clone(),
            cells,
        })
    }

    pub fn left(&self) -> &Frame {
        &self.left
    }

    pub fn right(&self) -> &Frame {
        &self.right
    }

    pub fn target(&self) -> &Frame {
        &self.target
    }

    /// Target elements compatible with the pair `(s, s')`.
    pub fn targets(&self, s: usize, s2: usize) -> &Proposition {
        &self.cells[s * self.right.len() + s2]
    }

    pub fn compatible(&self, s: usize, s2: usize, t: usize) -> bool {
        self.targets(s, s2).contains(t)
    }

    pub fn is_dead(&self, s: usize, s2: usize) -> bool {
        self.targets(s, s2).is_empty()
    }

    pub fn dead_pairs(&self) -> Vec<(usize, usize)> {
        (0..self.left.len())
            .flat_map(|i| (0..self.right.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| self.is_dead(i, j))
            .collect()
    }

    /// All `(s, s', t)` index triples, row-major.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.left.len() {
            for j in 0..self.right.len() {
                out.extend(self.targets(i, j).iter().map(|k| (i, j, k)));
            }
        }
        out
    }

    /// Transposed view: pairs `(s', s)`.
    pub fn transpose(&self) -> JointCompatibility {
        let (n, m) = (self.left.len(), self.right.len());
        let cells = (0..m)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| self.cells[i * m + j].clone())
            .collect();
        JointCompatibility {
            left: self.right.clone(),
            right: self.left.clone(),
            target: self.target.clone(),
            cells,
        }
    }
}

/// `(s, s') ~ t` iff `s C t` and `s' C' t`.
pub fn default_joint_compatibility(
    c: &CompatibilityRelation,
    c2: &CompatibilityRelation,
) -> Result<JointCompatibility> {
    if c.target() != c2.target() {
        return Err(Error::FrameMismatch);
    }
    let mut cells = Vec::with_capacity(c.source().len() * c2.source().len());
    for i in 0..c.source().len() {
        for j in 0..c2.source().len() {
            cells.push(c.row(i) & c2.row(j));
        }
    }
    Ok(JointCompatibility {
        left: c.source().clone(),
        right: c2.source().clone(),
        target: c.target().clone(),
        cells,
    })
}
