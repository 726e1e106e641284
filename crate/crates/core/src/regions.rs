//! Venn regions of a fixed set-variable order.
//!
//! For set variables `x_0..x_{n-1}` there are `2^n` regions, one per
//! signature `β` where bit `i` of `β` records membership in `x_i`. Every set
//! term denotes a union of regions, computed here by evaluating the term as a
//! boolean function of the signature bits.

use crate::ast::SetTerm;
use std::collections::HashMap;

/// Hard cap on the number of set variables for which full region sets are
/// materialized; `2^n` signatures must fit comfortably in memory.
pub const MAX_REGION_VARS: usize = 24;

/// A set of region signatures over `n` variables, stored as a bitmask of
/// length `2^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionSet {
    n: usize,
    words: Vec<u64>,
}

impl RegionSet {
    pub fn empty(n: usize) -> Self {
        assert!(n <= MAX_REGION_VARS, "too many set variables for region masks");
        let nbits = 1usize << n;
        RegionSet {
            n,
            words: vec![0; nbits.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut rs = RegionSet::empty(n);
        let nbits = 1usize << n;
        for (i, w) in rs.words.iter_mut().enumerate() {
            let lo = i * 64;
            let in_range = nbits.saturating_sub(lo).min(64);
            *w = if in_range == 64 { !0 } else { (1u64 << in_range) - 1 };
        }
        rs
    }

    /// Number of set variables (the mask has `2^n` bits).
    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn contains(&self, beta: u64) -> bool {
        let idx = beta as usize;
        self.words[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn insert(&mut self, beta: u64) {
        let idx = beta as usize;
        self.words[idx / 64] |= 1 << (idx % 64);
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn union(&self, other: &RegionSet) -> RegionSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn inter(&self, other: &RegionSet) -> RegionSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &RegionSet) -> RegionSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn sym_diff(&self, other: &RegionSet) -> RegionSet {
        self.zip(other, |a, b| a ^ b)
    }

    pub fn complement(&self) -> RegionSet {
        let mut out = RegionSet::full(self.n);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out
    }

    fn zip(&self, other: &RegionSet, f: impl Fn(u64, u64) -> u64) -> RegionSet {
        assert_eq!(self.n, other.n);
        RegionSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// Signatures in the set, ascending.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.words.iter().enumerate().flat_map(|(i, w)| {
            let mut w = *w;
            let base = (i * 64) as u64;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as u64;
                    w &= w - 1;
                    Some(base + b)
                }
            })
        })
    }
}

/// Fixed variable order with precomputed per-variable region masks.
pub struct RegionCtx {
    var_index: HashMap<String, usize>,
    var_masks: Vec<RegionSet>,
    n: usize,
}

impl RegionCtx {
    pub fn new(var_order: &[String]) -> Self {
        let n = var_order.len();
        let var_index: HashMap<String, usize> = var_order
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();
        let mut var_masks = Vec::with_capacity(n);
        for i in 0..n {
            let mut mask = RegionSet::empty(n);
            for beta in 0..(1u64 << n) {
                if beta >> i & 1 == 1 {
                    mask.insert(beta);
                }
            }
            var_masks.push(mask);
        }
        RegionCtx { var_index, var_masks, n }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn num_regions(&self) -> u64 {
        1u64 << self.n
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    /// The set of signatures a term denotes: `β` is in the result iff
    /// evaluating the term with variable `i` mapped to bit `i` of `β` yields
    /// true.
    pub fn region_set(&self, s: &SetTerm) -> RegionSet {
        match s {
            SetTerm::Var(name) => {
                let i = *self
                    .var_index
                    .get(name)
                    .unwrap_or_else(|| panic!("set variable `{name}` not in region order"));
                self.var_masks[i].clone()
            }
            SetTerm::Empty => RegionSet::empty(self.n),
            SetTerm::Univ => RegionSet::full(self.n),
            SetTerm::Union(a, b) => self.region_set(a).union(&self.region_set(b)),
            SetTerm::Inter(a, b) => self.region_set(a).inter(&self.region_set(b)),
            SetTerm::Compl(a) => self.region_set(a).complement(),
            SetTerm::Minus(a, b) => self.region_set(a).difference(&self.region_set(b)),
        }
    }

    /// Membership of a single signature, without materializing the full mask.
    /// Used by the sparse strategy, which only ever looks at the admitted
    /// signatures.
    pub fn sig_models(&self, s: &SetTerm, beta: u64) -> bool {
        match s {
            SetTerm::Var(name) => {
                let i = *self
                    .var_index
                    .get(name)
                    .unwrap_or_else(|| panic!("set variable `{name}` not in region order"));
                beta >> i & 1 == 1
            }
            SetTerm::Empty => false,
            SetTerm::Univ => true,
            SetTerm::Union(a, b) => self.sig_models(a, beta) || self.sig_models(b, beta),
            SetTerm::Inter(a, b) => self.sig_models(a, beta) && self.sig_models(b, beta),
            SetTerm::Compl(a) => !self.sig_models(a, beta),
            SetTerm::Minus(a, b) => self.sig_models(a, beta) && !self.sig_models(b, beta),
        }
    }
}

/// Renders a signature as a bit string in variable order, e.g. `10` for
/// "in the first variable, not in the second".
pub fn signature_string(beta: u64, n: usize) -> String {
    (0..n)
        .map(|i| if beta >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::SetTerm;

    fn order(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn union_regions() {
        let ctx = RegionCtx::new(&order(&["A", "B"]));
        let rs = ctx.region_set(&SetTerm::union(SetTerm::var("A"), SetTerm::var("B")));
        // Signatures 01, 10, 11 in (A, B) bit order = indices 1, 2, 3.
        assert_eq!(rs.iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn contradiction_has_no_regions() {
        let ctx = RegionCtx::new(&order(&["A", "B"]));
        let rs = ctx.region_set(&SetTerm::inter(
            SetTerm::var("A"),
            SetTerm::compl(SetTerm::var("A")),
        ));
        assert!(rs.is_empty());
    }

    #[test]
    fn complement_of_empty_is_all_regions() {
        for n in 0..=3 {
            let names: Vec<String> = (0..n).map(|i| format!("S{i}")).collect();
            let ctx = RegionCtx::new(&names);
            let rs = ctx.region_set(&SetTerm::compl(SetTerm::Empty));
            assert_eq!(rs.iter().count() as u64, 1u64 << n);
        }
    }

    #[test]
    fn sig_models_matches_region_set() {
        let ctx = RegionCtx::new(&order(&["A", "B", "C"]));
        let term = SetTerm::minus(
            SetTerm::union(SetTerm::var("A"), SetTerm::inter(SetTerm::var("B"), SetTerm::var("C"))),
            SetTerm::compl(SetTerm::var("C")),
        );
        let rs = ctx.region_set(&term);
        for beta in 0..8 {
            assert_eq!(rs.contains(beta), ctx.sig_models(&term, beta));
        }
    }

    #[test]
    fn signature_rendering() {
        assert_eq!(signature_string(1, 2), "10");
        assert_eq!(signature_string(2, 2), "01");
        assert_eq!(signature_string(3, 2), "11");
    }
}
