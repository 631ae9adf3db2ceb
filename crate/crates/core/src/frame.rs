//! Frames of discernment and the propositions they discern.
//!
//! A [`Frame`] is an ordered list of distinct labels. Element order is fixed
//! at construction and defines the bit encoding of every [`Proposition`]
//! over that frame: element `i` is bit `i`. Frames of up to 64 elements fit
//! in one inline word; larger frames spill to the heap.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitAnd, BitOr, Not};
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 1]>;

#[derive(Debug)]
struct FrameInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

/// An ordered finite set of mutually exclusive answers.
///
/// Cloning is cheap; clones share the label table.
#[derive(Clone)]
pub struct Frame(Arc<FrameInner>);

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidFrame(
                "a frame needs at least one element".into(),
            ));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidFrame(format!(
                    "element {} has an empty label",
                    i + 1
                )));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidFrame(format!("duplicate label `{label}`")));
            }
        }
        Ok(Frame(Arc::new(FrameInner { labels, index })))
    }

    /// Frame with labels `{prefix}1 .. {prefix}n`.
    pub fn numbered(prefix: &str, n: usize) -> Result<Self> {
        Frame::new((1..=n).map(|i| format!("{prefix}{i}")))
    }

    pub fn len(&self) -> usize {
        self.0.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.index.get(label).copied()
    }

    fn words(&self) -> usize {
        self.len().div_ceil(64)
    }

    pub fn empty_set(&self) -> Proposition {
        Proposition {
            frame: self.clone(),
            bits: smallvec![0; self.words()],
        }
    }

    pub fn full_set(&self) -> Proposition {
        !&self.empty_set()
    }

    pub fn singleton(&self, i: usize) -> Proposition {
        let mut p = self.empty_set();
        p.insert(i);
        p
    }

    pub fn proposition_from_indices<I: IntoIterator<Item = usize>>(
        &self,
        indices: I,
    ) -> Proposition {
        let mut p = self.empty_set();
        for i in indices {
            p.insert(i);
        }
        p
    }

    /// Builds a proposition from element labels.
    pub fn proposition<I, S>(&self, labels: I) -> Result<Proposition>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut p = self.empty_set();
        for label in labels {
            let label = label.as_ref();
            let i = self
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            p.insert(i);
        }
        Ok(p)
    }

    /// Proposition whose bit pattern is the low `len()` bits of `mask`.
    pub fn proposition_from_mask(&self, mask: u64) -> Proposition {
        let mut p = self.empty_set();
        p.bits[0] = mask;
        p.trim();
        p
    }

    /// All `2^n` propositions in ascending bit order. Only sensible for small frames.
    pub fn power_set(&self) -> impl Iterator<Item = Proposition> + '_ {
        assert!(
            self.len() < 32,
            "power set of a {}-element frame",
            self.len()
        );
        (0..(1u64 << self.len())).map(move |m| self.proposition_from_mask(m))
    }
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.labels == other.0.labels
    }
}

impl Eq for Frame {}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Frame").field(&self.0.labels).finish()
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.labels.join(","))
    }
}

/// A subset of a frame, stored as a fixed-width bit pattern.
///
/// Set operators (`&`, `|`, `!`) panic if the operands come from different
/// frames; the fallible entry points in [`crate::bpa`] check frames first.
#[derive(Clone)]
pub struct Proposition {
    frame: Frame,
    bits: Words,
}

impl Proposition {
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.frame.len() && self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(
            i < self.frame.len(),
            "element {i} outside a {}-element frame",
            self.frame.len()
        );
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_subset_of(&self, other: &Proposition) -> bool {
        self.same_frame(other);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Proposition) -> bool {
        self.same_frame(other);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.frame.len()).filter(move |&i| self.contains(i))
    }

    pub fn labels(&self) -> Vec<&str> {
        self.iter().map(|i| self.frame.label(i)).collect()
    }

    /// Low word of the bit pattern; exact for frames of at most 64 elements.
    pub fn mask(&self) -> u64 {
        self.bits[0]
    }

    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    fn trim(&mut self) {
        let n = self.frame.len();
        let last = self.bits.len() - 1;
        let used = n - last * 64;
        if used < 64 {
            self.bits[last] &= (1u64 << used) - 1;
        }
    }

    fn same_frame(&self, other: &Proposition) {
        assert!(
            self.frame == other.frame,
            "set operation across frames {} and {}",
            self.frame,
            other.frame
        );
    }

    fn zip_with(&self, other: &Proposition, f: impl Fn(u64, u64) -> u64) -> Proposition {
        self.same_frame(other);
        Proposition {
            frame: self.frame.clone(),
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl BitAnd for &Proposition {
    type Output = Proposition;
    fn bitand(self, rhs: &Proposition) -> Proposition {
        self.zip_with(rhs, |a, b| a & b)
    }
}

impl BitOr for &Proposition {
    type Output = Proposition;
    fn bitor(self, rhs: &Proposition) -> Proposition {
        self.zip_with(rhs, |a, b| a | b)
    }
}

impl Not for &Proposition {
    type Output = Proposition;
    fn not(self) -> Proposition {
        let mut p = Proposition {
            frame: self.frame.clone(),
            bits: self.bits.iter().map(|w| !w).collect(),
        };
        p.trim();
        p
    }
}

impl PartialEq for Proposition {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits && self.frame == other.frame
    }
}

impl Eq for Proposition {}

impl Hash for Proposition {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}

/// Ascending numeric value of the bit pattern.
impl Ord for Proposition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bits.iter().rev().cmp(other.bits.iter().rev())
    }
}

impl PartialOrd for Proposition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("∅");
        }
        write!(f, "{{{}}}", self.labels().join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t3() -> Frame {
        Frame::new(["t1", "t2", "t3"]).unwrap()
    }

    #[test]
    fn rejects_bad_labels() {
        assert!(matches!(
            Frame::new(Vec::<String>::new()),
            Err(Error::InvalidFrame(_))
        ));
        assert!(matches!(
            Frame::new(["a", "a"]),
            Err(Error::InvalidFrame(_))
        ));
        assert!(matches!(Frame::new(["a", ""]), Err(Error::InvalidFrame(_))));
    }

    #[test]
    fn set_algebra() {
        let f = t3();
        let a = f.proposition(["t1", "t2"]).unwrap();
        let b = f.proposition(["t2", "t3"]).unwrap();
        assert_eq!(&a & &b, f.proposition(["t2"]).unwrap());
        assert_eq!(&a | &b, f.full_set());
        assert_eq!(!&a, f.proposition(["t3"]).unwrap());
        assert!(f.empty_set().is_subset_of(&a));
        assert!(a.is_subset_of(&f.full_set()));
        assert!(!a.is_subset_of(&b));
        assert_eq!(!&f.full_set(), f.empty_set());
        assert_eq!(a.len(), 2);
        assert_eq!(a.to_string(), "{t1,t2}");
        assert_eq!(f.empty_set().to_string(), "∅");
    }

    #[test]
    fn unknown_label() {
        assert_eq!(
            t3().proposition(["t4"]),
            Err(Error::UnknownLabel("t4".into()))
        );
    }

    #[test]
    fn wide_frames_use_several_words() {
        let f = Frame::numbered("e", 130).unwrap();
        let mut p = f.empty_set();
        p.insert(0);
        p.insert(129);
        assert_eq!(p.words().len(), 3);
        let c = !&p;
        assert_eq!(c.len(), 128);
        assert!(!c.contains(129));
        assert!(!c.contains(130));
        assert_eq!(&c | &p, f.full_set());
        assert!(p > f.singleton(128));
    }

    #[test]
    fn ordering_is_numeric() {
        let f = t3();
        let mut v: Vec<_> = f.power_set().collect();
        v.reverse();
        v.sort();
        let masks: Vec<u64> = v.iter().map(Proposition::mask).collect();
        assert_eq!(masks, (0..8).collect::<Vec<_>>());
    }

    #[test]
    #[should_panic(expected = "set operation across frames")]
    fn cross_frame_ops_panic() {
        let a = t3().full_set();
        let b = Frame::new(["x", "y", "z"]).unwrap().full_set();
        let _ = &a & &b;
    }
}
