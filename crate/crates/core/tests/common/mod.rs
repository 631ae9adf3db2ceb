#![allow(dead_code)]

use mingain::{Bpa, Frame};
use rand::Rng;

pub fn t3() -> Frame {
    Frame::new(["t1", "t2", "t3"]).unwrap()
}

/// {t1,t2}: 0.8, {t1,t2,t3}: 0.2
pub fn bpa_a(f: &Frame) -> Bpa {
    Bpa::from_labels(f, [(vec!["t1", "t2"], 0.8), (vec!["t1", "t2", "t3"], 0.2)]).unwrap()
}

/// {t2,t3}: 0.7, {t3}: 0.2, {t1,t2,t3}: 0.1
pub fn bpa_b(f: &Frame) -> Bpa {
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

/// A bpa with 1..=max_focal distinct random focal sets.
pub fn random_bpa<R: Rng>(rng: &mut R, frame: &Frame, max_focal: usize) -> Bpa {
    let n = frame.len();
    let subsets = (1u64 << n) - 1;
    let k = rng.gen_range(1..=max_focal.min(subsets as usize));
    let mut masks: Vec<u64> = Vec::with_capacity(k);
    while masks.len() < k {
        let m = rng.gen_range(1..=subsets);
        if !masks.contains(&m) {
            masks.push(m);
        }
    }
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let pairs = masks
        .iter()
        .zip(&weights)
        .map(|(&m, w)| (frame.proposition_from_mask(m), w / total))
        .collect();
    Bpa::new(frame, pairs).unwrap()
}

/// Dempster's rule straight from the focal sets: m(A) ∝ Σ_{B∩C=A} m1(B) m2(C).
/// Returns `(mask, mass)` sorted by mask, or `None` on total conflict.
pub fn classical_dempster(b1: &Bpa, b2: &Bpa) -> Option<Vec<(u64, f64)>> {
    let mut acc: Vec<(u64, f64)> = Vec::new();
    let mut conflict = 0.0;
    for (b, mb) in b1.focal() {
        for (c, mc) in b2.focal() {
            let a = b.mask() & c.mask();
            if a == 0 {
                conflict += mb * mc;
                continue;
            }
            match acc.iter_mut().find(|(m, _)| *m == a) {
                Some((_, v)) => *v += mb * mc,
                None => acc.push((a, mb * mc)),
            }
        }
    }
    let live = 1.0 - conflict;
    if acc.is_empty() {
        return None;
    }
    acc.sort_by_key(|(m, _)| *m);
    Some(acc.into_iter().map(|(m, v)| (m, v / live)).collect())
}
