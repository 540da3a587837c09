//! Permutations of `{1..k}` in one-line notation.
//!
//! Internally images are stored 0-indexed; all constructors and display
//! functions speak the 1-indexed convention used everywhere else in the
//! crate (vertex labels, cycle notation, fixtures).

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// A permutation of `{1..k}`, stored as the 0-indexed image table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(k: usize) -> Self {
        Perm {
            images: (0..k as u32).collect(),
        }
    }

    /// Builds from 1-indexed one-line notation, validating bijectivity.
    pub fn from_images_one_indexed(images: &[usize]) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        let mut raw = Vec::with_capacity(k);
        for (pos, &im) in images.iter().enumerate() {
            if im == 0 || im > k || seen[im - 1] {
                return Err(Error::InvalidPermutation {
                    image: im,
                    position: pos + 1,
                });
            }
            seen[im - 1] = true;
            raw.push((im - 1) as u32);
        }
        Ok(Perm { images: raw })
    }

    /// Builds a degree-`k` permutation from disjoint cycles in 1-indexed
    /// notation; points not mentioned are fixed.
    pub fn from_cycles(k: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (1..=k).collect();
        let mut touched = vec![false; k];
        for cycle in cycles {
            for (i, &a) in cycle.iter().enumerate() {
                if a == 0 || a > k {
                    return Err(Error::InvalidPermutation {
                        image: a,
                        position: i + 1,
                    });
                }
                if touched[a - 1] {
                    return Err(Error::InvalidPermutation {
                        image: a,
                        position: i + 1,
                    });
                }
                touched[a - 1] = true;
                let b = cycle[(i + 1) % cycle.len()];
                images[a - 1] = b;
            }
        }
        Perm::from_images_one_indexed(&images)
    }

    /// Full cycle `(1 2 ... k)`.
    pub fn full_cycle(k: usize) -> Self {
        let images: Vec<u32> = (0..k as u32).map(|i| (i + 1) % k as u32).collect();
        Perm { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// 0-indexed image.
    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    /// The raw 0-indexed image table.
    pub fn images(&self) -> &[u32] {
        &self.images
    }

    /// 1-indexed one-line notation.
    pub fn one_line(&self) -> Vec<usize> {
        self.images.iter().map(|&i| i as usize + 1).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &im)| i as u32 == im)
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm {
            images: other.images.iter().map(|&i| self.images[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &im) in self.images.iter().enumerate() {
            inv[im as usize] = i as u32;
        }
        Perm { images: inv }
    }

    pub fn pow(&self, e: usize) -> Perm {
        let mut out = Perm::identity(self.degree());
        for _ in 0..e {
            out = self.compose(&out);
        }
        out
    }

    /// Number of disjoint cycles (fixed points count as cycles).
    pub fn cycle_count(&self) -> usize {
        let k = self.images.len();
        let mut seen = vec![false; k];
        let mut count = 0;
        for start in 0..k {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x] as usize;
            }
        }
        count
    }

    /// Disjoint cycles, 1-indexed, each starting at its least element,
    /// sorted by least element; fixed points included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let k = self.images.len();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x] as usize;
            }
            out.push(cycle);
        }
        out
    }

    /// Cayley distance `k − #(self ∘ other⁻¹)`.
    pub fn cayley_distance(&self, other: &Perm) -> Result<usize> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                left: self.degree(),
                right: other.degree(),
            });
        }
        Ok(self.degree() - self.compose(&other.inverse()).cycle_count())
    }

    pub fn random<R: Rng>(k: usize, rng: &mut R) -> Perm {
        let mut images: Vec<u32> = (0..k as u32).collect();
        images.shuffle(rng);
        Perm { images }
    }

    /// All permutations of degree `k` in lexicographic one-line order.
    pub fn all(k: usize) -> PermIter {
        PermIter::new(k)
    }

    /// Cycle notation such as `(1 2 3)(4 5)`; identity prints `()`.
    pub fn cycle_notation(&self) -> String {
        let nontrivial: Vec<Vec<usize>> =
            self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if nontrivial.is_empty() {
            return "()".to_string();
        }
        nontrivial
            .iter()
            .map(|c| {
                let inner = c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                format!("({inner})")
            })
            .collect()
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_notation())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_notation())
    }
}

/// Lexicographic enumeration of S_k via the next-permutation step.
pub struct PermIter {
    state: Vec<u32>,
    done: bool,
}

impl PermIter {
    fn new(k: usize) -> Self {
        PermIter {
            state: (0..k as u32).collect(),
            done: false,
        }
    }
}

impl Iterator for PermIter {
    type Item = Perm;

    fn next(&mut self) -> Option<Perm> {
        if self.done {
            return None;
        }
        let current = Perm {
            images: self.state.clone(),
        };
        // Advance to the lexicographic successor.
        let n = self.state.len();
        if n < 2 {
            self.done = true;
            return Some(current);
        }
        let mut i = n - 1;
        while i > 0 && self.state[i - 1] >= self.state[i] {
            i -= 1;
        }
        if i == 0 {
            self.done = true;
        } else {
            let mut j = n - 1;
            while self.state[j] <= self.state[i - 1] {
                j -= 1;
            }
            self.state.swap(i - 1, j);
            self.state[i..].reverse();
        }
        Some(current)
    }
}

/// Parses cycle notation like `(1 2 3)(4 5)` or `()`; `k` fixes the degree.
pub fn parse_cycle_notation(k: usize, text: &str) -> Result<Perm> {
    let text = text.trim();
    let mut cycles = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let rest2 = rest.trim_start();
        if rest2.is_empty() {
            break;
        }
        if !rest2.starts_with('(') {
            return Err(Error::InvalidFamilySpec(format!(
                "expected '(' in cycle notation, found {rest2:?}"
            )));
        }
        let close = rest2.find(')').ok_or_else(|| {
            Error::InvalidFamilySpec("unbalanced parenthesis in cycle notation".into())
        })?;
        let inner = &rest2[1..close];
        let entries: Vec<usize> = inner
            .split([' ', ','])
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidFamilySpec(format!("bad cycle entry {s:?}"))
                })
            })
            .collect::<Result<_>>()?;
        if !entries.is_empty() {
            cycles.push(entries);
        }
        rest = &rest2[close + 1..];
    }
    Perm::from_cycles(k, &cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_cycle_count_is_degree() {
        assert_eq!(Perm::identity(5).cycle_count(), 5);
    }

    #[test]
    fn explicit_cycle_type() {
        let p = Perm::from_cycles(5, &[vec![1, 2, 3], vec![4, 5]]).unwrap();
        assert_eq!(p.cycle_count(), 2);
    }

    #[test]
    fn tau_squared_is_single_cycle() {
        let tau = Perm::from_cycles(3, &[vec![1, 2, 3]]).unwrap();
        let tau2 = tau.compose(&tau);
        assert_eq!(tau2, Perm::from_cycles(3, &[vec![1, 3, 2]]).unwrap());
        assert_eq!(tau2.cycle_count(), 1);
    }

    #[test]
    fn cayley_distance_examples() {
        let id4 = Perm::identity(4);
        assert_eq!(id4.cayley_distance(&id4).unwrap(), 0);
        let tau = Perm::from_cycles(3, &[vec![1, 2, 3]]).unwrap();
        let id3 = Perm::identity(3);
        assert_eq!(tau.cayley_distance(&id3).unwrap(), 2);
        let tau_inv = tau.inverse();
        assert_eq!(tau.cayley_distance(&tau_inv).unwrap(), 2);
    }

    #[test]
    fn degree_mismatch_is_error() {
        let a = Perm::identity(3);
        let b = Perm::identity(4);
        assert!(a.cayley_distance(&b).is_err());
    }

    #[test]
    fn repeated_image_rejected() {
        let err = Perm::from_images_one_indexed(&[1, 2, 2]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidPermutation {
                image: 2,
                position: 3
            }
        );
    }

    #[test]
    fn all_is_lexicographic_and_complete() {
        let perms: Vec<Perm> = Perm::all(3).collect();
        assert_eq!(perms.len(), 6);
        assert_eq!(perms[0], Perm::identity(3));
        for w in perms.windows(2) {
            assert!(w[0].one_line() < w[1].one_line());
        }
    }

    #[test]
    fn parse_cycle_notation_roundtrip() {
        let p = parse_cycle_notation(9, "(1 2 3 4 5 6 7)(8 9)").unwrap();
        assert_eq!(p.cycle_count(), 2);
        assert_eq!(parse_cycle_notation(9, &p.cycle_notation()).unwrap(), p);
        assert_eq!(parse_cycle_notation(4, "()").unwrap(), Perm::identity(4));
    }

    proptest! {
        #[test]
        fn compose_inverse_is_identity(seed in 0u64..1000, k in 1usize..9) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = Perm::random(k, &mut rng);
            prop_assert!(p.compose(&p.inverse()).is_identity());
            prop_assert!(p.inverse().compose(&p).is_identity());
        }

        #[test]
        fn cayley_is_a_metric(seed in 0u64..1000, k in 1usize..9) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = Perm::random(k, &mut rng);
            let q = Perm::random(k, &mut rng);
            let r = Perm::random(k, &mut rng);
            let dpq = p.cayley_distance(&q).unwrap();
            prop_assert_eq!(dpq, q.cayley_distance(&p).unwrap());
            prop_assert_eq!(p.cayley_distance(&p).unwrap(), 0);
            prop_assert!(dpq <= p.cayley_distance(&r).unwrap() + r.cayley_distance(&q).unwrap());
        }
    }

    use rand::SeedableRng;
}
