//! Ground-truth semantics: explicit finite models, formula evaluation, and
//! the exhaustive bounded oracle.
//!
//! A model fixes a finite universe `{0..N-1}`, one subset per set variable
//! and one integer per integer variable. Models are stored canonically as
//! Venn-region counts; explicit element sets are materialized on demand with
//! a deterministic layout (region signatures in ascending index order, each
//! occupying a contiguous block of fresh elements).
//!
//! [`oracle_sat`] decides satisfiability by enumerating every region-count
//! vector and integer assignment within the given bounds and evaluating the
//! formula in each resulting model. It is deliberately brute force: the rest
//! of the crate is differentially tested against it.

use crate::ast::{Atom, Formula, IntTerm, Problem, SetTerm, Sort};
use crate::regions::RegionCtx;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Largest universe for which explicit element sets are materialized.
pub const MATERIALIZE_MAX: u64 = 1 << 20;

/// Per-variable region counts under a fixed variable order.
///
/// `counts` has length `2^n`; bit `i` of the index records membership in
/// `var_order[i]`. The universe size is the sum of all counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionVector {
    var_order: Vec<String>,
    counts: Vec<BigUint>,
}

impl RegionVector {
    pub fn new(var_order: Vec<String>, counts: Vec<BigUint>) -> Self {
        assert_eq!(
            counts.len(),
            1usize << var_order.len(),
            "region vector must have 2^n counts"
        );
        RegionVector { var_order, counts }
    }

    pub fn var_order(&self) -> &[String] {
        &self.var_order
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn universe_size(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

/// A finite model: region counts plus integer assignments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    regions: RegionVector,
    ints: BTreeMap<String, BigInt>,
}

/// Constructs the model determined by a region vector and an integer
/// assignment. Concrete sets are laid out deterministically: signatures in
/// ascending index order, each contributing a contiguous block of fresh
/// elements belonging to exactly the variables with bit 1 in the signature.
pub fn model_from_regions(rv: RegionVector, ints: BTreeMap<String, BigInt>) -> Model {
    Model { regions: rv, ints }
}

impl Model {
    pub fn regions(&self) -> &RegionVector {
        &self.regions
    }

    pub fn ints(&self) -> &BTreeMap<String, BigInt> {
        &self.ints
    }

    pub fn universe_size(&self) -> BigUint {
        self.regions.universe_size()
    }

    pub fn int_value(&self, name: &str) -> Option<&BigInt> {
        self.ints.get(name)
    }

    /// Whether the universe is small enough to lay out explicitly.
    pub fn is_materializable(&self) -> bool {
        self.universe_size() <= BigUint::from(MATERIALIZE_MAX)
    }

    /// Cardinality of a set variable, straight from the region counts.
    pub fn set_card(&self, name: &str) -> Option<BigUint> {
        let i = self.regions.var_order.iter().position(|v| v == name)?;
        let mut total = BigUint::zero();
        for (beta, c) in self.regions.counts.iter().enumerate() {
            if beta >> i & 1 == 1 {
                total += c;
            }
        }
        Some(total)
    }

    /// Explicit elements of a set variable under the deterministic layout,
    /// or `None` if the variable is unknown or the universe is too large.
    pub fn set_elements(&self, name: &str) -> Option<Vec<u64>> {
        if !self.is_materializable() {
            return None;
        }
        let i = self.regions.var_order.iter().position(|v| v == name)?;
        let mut elems = Vec::new();
        let mut offset = 0u64;
        for (beta, c) in self.regions.counts.iter().enumerate() {
            let c = c.to_u64().expect("materializable count fits u64");
            if beta >> i & 1 == 1 {
                elems.extend(offset..offset + c);
            }
            offset += c;
        }
        Some(elems)
    }

    /// Builds a model from explicit sets by counting elements per region
    /// signature. Elements must be `< universe`; variables without an entry
    /// in `sets` are empty.
    pub fn from_explicit_sets(
        var_order: Vec<String>,
        universe: u64,
        sets: &BTreeMap<String, Vec<u64>>,
        ints: BTreeMap<String, BigInt>,
    ) -> Model {
        let n = var_order.len();
        let mut member: Vec<Vec<bool>> = vec![vec![false; universe as usize]; n];
        for (i, name) in var_order.iter().enumerate() {
            if let Some(elems) = sets.get(name) {
                for &e in elems {
                    assert!(e < universe, "element {e} outside universe {universe}");
                    member[i][e as usize] = true;
                }
            }
        }
        let mut counts = vec![BigUint::zero(); 1 << n];
        for e in 0..universe as usize {
            let mut beta = 0usize;
            for (i, m) in member.iter().enumerate() {
                if m[e] {
                    beta |= 1 << i;
                }
            }
            counts[beta] += BigUint::one();
        }
        Model {
            regions: RegionVector::new(var_order, counts),
            ints,
        }
    }
}

/// Evaluation failure: the model does not assign a variable the formula uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnassignedVariable {
    pub name: String,
    pub sort: Sort,
}

impl fmt::Display for UnassignedVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model does not assign {} variable `{}`", self.sort, self.name)
    }
}

impl std::error::Error for UnassignedVariable {}

// ---------------------------------------------------------------------------
// Explicit evaluation (reference semantics)
// ---------------------------------------------------------------------------

/// Characteristic bit vector of a subset of `{0..nbits-1}`.
#[derive(Clone, PartialEq, Eq)]
struct BitSet {
    nbits: u64,
    words: Vec<u64>,
}

impl BitSet {
    fn zeros(nbits: u64) -> Self {
        BitSet {
            nbits,
            words: vec![0; (nbits as usize).div_ceil(64)],
        }
    }

    fn set_range(&mut self, lo: u64, hi: u64) {
        for e in lo..hi {
            self.words[(e / 64) as usize] |= 1 << (e % 64);
        }
    }

    fn zip(&self, other: &BitSet, f: impl Fn(u64, u64) -> u64) -> BitSet {
        BitSet {
            nbits: self.nbits,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn complement(&self) -> BitSet {
        let mut out = BitSet {
            nbits: self.nbits,
            words: self.words.iter().map(|w| !w).collect(),
        };
        let tail = self.nbits % 64;
        if tail != 0 {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out
    }

    fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    fn is_subset_of(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

struct ExplicitEnv<'m> {
    model: &'m Model,
    universe: u64,
    var_sets: Vec<BitSet>,
}

impl<'m> ExplicitEnv<'m> {
    fn new(model: &'m Model) -> Self {
        let universe = model
            .universe_size()
            .to_u64()
            .expect("explicit evaluation requires a materializable universe");
        let n = model.regions.var_order.len();
        let mut var_sets = vec![BitSet::zeros(universe); n];
        let mut offset = 0u64;
        for (beta, c) in model.regions.counts.iter().enumerate() {
            let c = c.to_u64().unwrap();
            for (i, set) in var_sets.iter_mut().enumerate() {
                if beta >> i & 1 == 1 {
                    set.set_range(offset, offset + c);
                }
            }
            offset += c;
        }
        ExplicitEnv { model, universe, var_sets }
    }

    fn eval_set(&self, s: &SetTerm) -> Result<BitSet, UnassignedVariable> {
        Ok(match s {
            SetTerm::Var(name) => {
                let i = self
                    .model
                    .regions
                    .var_order
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| UnassignedVariable {
                        name: name.clone(),
                        sort: Sort::Set,
                    })?;
                self.var_sets[i].clone()
            }
            SetTerm::Empty => BitSet::zeros(self.universe),
            SetTerm::Univ => BitSet::zeros(self.universe).complement(),
            SetTerm::Union(a, b) => self.eval_set(a)?.zip(&self.eval_set(b)?, |x, y| x | y),
            SetTerm::Inter(a, b) => self.eval_set(a)?.zip(&self.eval_set(b)?, |x, y| x & y),
            SetTerm::Compl(a) => self.eval_set(a)?.complement(),
            SetTerm::Minus(a, b) => self.eval_set(a)?.zip(&self.eval_set(b)?, |x, y| x & !y),
        })
    }

    fn eval_int(&self, t: &IntTerm) -> Result<BigInt, UnassignedVariable> {
        Ok(match t {
            IntTerm::Const(c) => BigInt::from(c.clone()),
            IntTerm::Var(name) => self
                .model
                .ints
                .get(name)
                .cloned()
                .ok_or_else(|| UnassignedVariable {
                    name: name.clone(),
                    sort: Sort::Int,
                })?,
            IntTerm::Add(a, b) => self.eval_int(a)? + self.eval_int(b)?,
            IntTerm::MulConst(c, inner) => BigInt::from(c.clone()) * self.eval_int(inner)?,
            IntTerm::Card(s) => BigInt::from(self.eval_set(s)?.count()),
            IntTerm::MaxC => BigInt::from(self.universe),
        })
    }

    fn eval_atom(&self, a: &Atom) -> Result<bool, UnassignedVariable> {
        Ok(match a {
            Atom::SetEq(s1, s2) => self.eval_set(s1)? == self.eval_set(s2)?,
            Atom::Subset(s1, s2) => self.eval_set(s1)?.is_subset_of(&self.eval_set(s2)?),
            Atom::IntEq(t1, t2) => self.eval_int(t1)? == self.eval_int(t2)?,
            Atom::IntLe(t1, t2) => self.eval_int(t1)? <= self.eval_int(t2)?,
            Atom::IntLt(t1, t2) => self.eval_int(t1)? < self.eval_int(t2)?,
            Atom::Dvd(d, t) => {
                let v = self.eval_int(t)?;
                v.is_multiple_of(&BigInt::from(d.clone()))
            }
        })
    }
}

// ---------------------------------------------------------------------------
// Region-arithmetic evaluation (for universes too large to lay out)
// ---------------------------------------------------------------------------

struct RegionEnv<'m> {
    model: &'m Model,
    ctx: RegionCtx,
    universe: BigInt,
}

impl<'m> RegionEnv<'m> {
    fn new(model: &'m Model) -> Self {
        let ctx = RegionCtx::new(&model.regions.var_order);
        let universe = BigInt::from(model.universe_size());
        RegionEnv { model, ctx, universe }
    }

    fn check_set_vars(&self, s: &SetTerm) -> Result<(), UnassignedVariable> {
        match s {
            SetTerm::Var(name) => {
                if self.ctx.var_index(name).is_none() {
                    return Err(UnassignedVariable { name: name.clone(), sort: Sort::Set });
                }
            }
            SetTerm::Empty | SetTerm::Univ => {}
            SetTerm::Union(a, b) | SetTerm::Inter(a, b) | SetTerm::Minus(a, b) => {
                self.check_set_vars(a)?;
                self.check_set_vars(b)?;
            }
            SetTerm::Compl(a) => self.check_set_vars(a)?,
        }
        Ok(())
    }

    fn card(&self, s: &SetTerm) -> Result<BigInt, UnassignedVariable> {
        self.check_set_vars(s)?;
        let rs = self.ctx.region_set(s);
        let mut total = BigUint::zero();
        for beta in rs.iter() {
            total += &self.model.regions.counts[beta as usize];
        }
        Ok(BigInt::from(total))
    }

    fn eval_int(&self, t: &IntTerm) -> Result<BigInt, UnassignedVariable> {
        Ok(match t {
            IntTerm::Const(c) => BigInt::from(c.clone()),
            IntTerm::Var(name) => self
                .model
                .ints
                .get(name)
                .cloned()
                .ok_or_else(|| UnassignedVariable {
                    name: name.clone(),
                    sort: Sort::Int,
                })?,
            IntTerm::Add(a, b) => self.eval_int(a)? + self.eval_int(b)?,
            IntTerm::MulConst(c, inner) => BigInt::from(c.clone()) * self.eval_int(inner)?,
            IntTerm::Card(s) => self.card(s)?,
            IntTerm::MaxC => self.universe.clone(),
        })
    }

    fn eval_atom(&self, a: &Atom) -> Result<bool, UnassignedVariable> {
        Ok(match a {
            Atom::SetEq(s1, s2) => {
                self.check_set_vars(s1)?;
                self.check_set_vars(s2)?;
                let d = self.ctx.region_set(s1).sym_diff(&self.ctx.region_set(s2));
                let all_zero =
                    d.iter().all(|beta| self.model.regions.counts[beta as usize].is_zero());
                all_zero
            }
            Atom::Subset(s1, s2) => {
                self.check_set_vars(s1)?;
                self.check_set_vars(s2)?;
                let d = self.ctx.region_set(s1).difference(&self.ctx.region_set(s2));
                let all_zero =
                    d.iter().all(|beta| self.model.regions.counts[beta as usize].is_zero());
                all_zero
            }
            Atom::IntEq(t1, t2) => self.eval_int(t1)? == self.eval_int(t2)?,
            Atom::IntLe(t1, t2) => self.eval_int(t1)? <= self.eval_int(t2)?,
            Atom::IntLt(t1, t2) => self.eval_int(t1)? < self.eval_int(t2)?,
            Atom::Dvd(d, t) => {
                let v = self.eval_int(t)?;
                v.is_multiple_of(&BigInt::from(d.clone()))
            }
        })
    }
}

fn eval_with(
    f: &Formula,
    atom: &impl Fn(&Atom) -> Result<bool, UnassignedVariable>,
) -> Result<bool, UnassignedVariable> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => atom(a)?,
        Formula::And(fs) => {
            let mut all = true;
            for g in fs {
                // No short circuit: unassigned variables are reported even in
                // branches that cannot change the outcome.
                all &= eval_with(g, atom)?;
            }
            all
        }
        Formula::Or(fs) => {
            let mut any = false;
            for g in fs {
                any |= eval_with(g, atom)?;
            }
            any
        }
        Formula::Not(g) => !eval_with(g, atom)?,
    })
}

/// Evaluates a formula in a model under the standard semantics: set operators
/// act on explicit subsets of `{0..N-1}`, `card` is subset size, `maxc` is
/// `N`, and integer atoms use exact arbitrary-precision arithmetic.
///
/// Universes larger than [`MATERIALIZE_MAX`] are evaluated through region
/// arithmetic instead of element layouts; atom truth only depends on the
/// region counts, so the two routes agree (this is itself property-tested).
pub fn eval_formula(f: &Formula, m: &Model) -> Result<bool, UnassignedVariable> {
    if m.is_materializable() {
        eval_formula_explicit(f, m)
    } else {
        eval_formula_regions(f, m)
    }
}

/// Explicit-layout evaluation; requires a materializable universe.
pub fn eval_formula_explicit(f: &Formula, m: &Model) -> Result<bool, UnassignedVariable> {
    let env = ExplicitEnv::new(m);
    eval_with(f, &|a| env.eval_atom(a))
}

/// Region-arithmetic evaluation; works at any universe size.
pub fn eval_formula_regions(f: &Formula, m: &Model) -> Result<bool, UnassignedVariable> {
    let env = RegionEnv::new(m);
    eval_with(f, &|a| env.eval_atom(a))
}

// ---------------------------------------------------------------------------
// Bounded exhaustive oracle
// ---------------------------------------------------------------------------

/// Default ceiling on enumerated candidate vectors.
pub const DEFAULT_ORACLE_BUDGET: u64 = 100_000_000;

/// Verdict of the bounded oracle. Completeness holds only within the bounds,
/// hence the names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleVerdict {
    SatWithin(Box<Model>),
    UnsatWithin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// The candidate enumeration hit the configured ceiling.
    BudgetExceeded { budget: u64 },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BudgetExceeded { budget } => {
                write!(f, "oracle enumeration exceeded the budget of {budget} candidates")
            }
        }
    }
}

impl std::error::Error for OracleError {}

/// Exhaustively enumerates every region vector with counts in
/// `0..=region_bound` and every integer assignment with values in
/// `-int_bound..=int_bound`, in lexicographic order, and returns the first
/// satisfying model. Uses [`DEFAULT_ORACLE_BUDGET`] as the candidate ceiling.
pub fn oracle_sat(
    p: &Problem,
    region_bound: u64,
    int_bound: u64,
) -> Result<OracleVerdict, OracleError> {
    oracle_sat_with_budget(p, region_bound, int_bound, DEFAULT_ORACLE_BUDGET)
}

/// [`oracle_sat`] with an explicit candidate ceiling.
pub fn oracle_sat_with_budget(
    p: &Problem,
    region_bound: u64,
    int_bound: u64,
    budget: u64,
) -> Result<OracleVerdict, OracleError> {
    let n = p.set_vars.len();
    let k = p.int_vars.len();
    assert!(n <= 16, "oracle enumeration is only sensible for small n");
    let num_regions = 1usize << n;

    // Candidates per region vector: (2*int_bound + 1)^k, saturating.
    let per_rv = (0..k).fold(1u128, |acc, _| {
        acc.saturating_mul(2u128 * int_bound as u128 + 1)
    });

    let fast = FastEval::try_new(p, region_bound, int_bound);

    let mut counts = vec![0u64; num_regions];
    let mut consumed: u128 = 0;
    loop {
        consumed = consumed.saturating_add(per_rv);
        if consumed > budget as u128 {
            return Err(OracleError::BudgetExceeded { budget });
        }

        let found = match &fast {
            Some(fe) => fe.search_region_vector(&counts),
            None => slow_search_region_vector(p, &counts, int_bound),
        };
        if let Some(ints) = found {
            let rv = RegionVector::new(
                p.set_vars.clone(),
                counts.iter().map(|&c| BigUint::from(c)).collect(),
            );
            let int_map: BTreeMap<String, BigInt> = p
                .int_vars
                .iter()
                .cloned()
                .zip(ints.iter().map(|&v| BigInt::from(v)))
                .collect();
            let model = model_from_regions(rv, int_map);
            debug_assert_eq!(eval_formula(&p.formula, &model), Ok(true));
            return Ok(OracleVerdict::SatWithin(Box::new(model)));
        }

        // Advance the region odometer; index 0 is most significant.
        let mut i = num_regions;
        loop {
            if i == 0 {
                return Ok(OracleVerdict::UnsatWithin);
            }
            i -= 1;
            if counts[i] < region_bound {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
        }
    }
}

/// Iterates integer assignments for a fixed region vector via full model
/// construction. Correct at any magnitude; used when the fast path bails.
fn slow_search_region_vector(p: &Problem, counts: &[u64], int_bound: u64) -> Option<Vec<i64>> {
    let k = p.int_vars.len();
    let bound = int_bound as i64;
    let mut vals = vec![-bound; k];
    loop {
        let rv = RegionVector::new(
            p.set_vars.clone(),
            counts.iter().map(|&c| BigUint::from(c)).collect(),
        );
        let ints: BTreeMap<String, BigInt> = p
            .int_vars
            .iter()
            .cloned()
            .zip(vals.iter().map(|&v| BigInt::from(v)))
            .collect();
        let model = model_from_regions(rv, ints);
        if eval_formula(&p.formula, &model) == Ok(true) {
            return Some(vals);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if vals[i] < bound {
                vals[i] += 1;
                break;
            }
            vals[i] = -bound;
        }
    }
}

// ---------------------------------------------------------------------------
// Fast path: u64 element masks and i64 linear residues
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
enum Cmp {
    Eq,
    Le,
    Lt,
}

/// `c + coeffs · ints`, all guaranteed not to overflow i64 by `try_new`.
#[derive(Clone)]
struct Lin {
    c: i64,
    coeffs: Vec<i64>,
}

impl Lin {
    fn constant(c: i64) -> Self {
        Lin { c, coeffs: Vec::new() }
    }

    fn value(&self, ints: &[i64]) -> i64 {
        let mut v = self.c;
        for (co, x) in self.coeffs.iter().zip(ints) {
            v += co * x;
        }
        v
    }
}

enum Resid {
    Const(bool),
    Cmp(Cmp, Lin),
    Dvd(u64, Lin),
    And(Vec<Resid>),
    Or(Vec<Resid>),
    Not(Box<Resid>),
}

impl Resid {
    fn eval(&self, ints: &[i64]) -> bool {
        match self {
            Resid::Const(b) => *b,
            Resid::Cmp(op, lin) => {
                let v = lin.value(ints);
                match op {
                    Cmp::Eq => v == 0,
                    Cmp::Le => v <= 0,
                    Cmp::Lt => v < 0,
                }
            }
            Resid::Dvd(d, lin) => lin.value(ints).rem_euclid(*d as i64) == 0,
            Resid::And(rs) => rs.iter().all(|r| r.eval(ints)),
            Resid::Or(rs) => rs.iter().any(|r| r.eval(ints)),
            Resid::Not(r) => !r.eval(ints),
        }
    }
}

struct FastEval<'p> {
    problem: &'p Problem,
    int_bound: i64,
}

/// Conservative magnitude cap: any linear residue evaluated at values within
/// the bound stays far away from i64 overflow.
const FAST_MAG_CAP: i64 = i64::MAX / 8;

impl<'p> FastEval<'p> {
    fn try_new(p: &'p Problem, region_bound: u64, int_bound: u64) -> Option<Self> {
        let n = p.set_vars.len();
        // All elements of the largest candidate universe must fit one u64 mask.
        let max_universe = region_bound.checked_mul(1u64 << n)?;
        if max_universe > 64 || int_bound > (FAST_MAG_CAP / 4) as u64 {
            return None;
        }
        let fe = FastEval {
            problem: p,
            int_bound: int_bound as i64,
        };
        // Dry-run compile against the all-zero region vector to verify every
        // constant fits the fast path.
        let counts = vec![0u64; 1 << n];
        fe.compile(&counts).map(|_| fe)
    }

    fn search_region_vector(&self, counts: &[u64]) -> Option<Vec<i64>> {
        let resid = self.compile(counts).expect("dry-run validated constants");
        if let Resid::Const(b) = resid {
            return if b {
                Some(vec![-self.int_bound; self.problem.int_vars.len()])
            } else {
                None
            };
        }
        let k = self.problem.int_vars.len();
        let mut vals = vec![-self.int_bound; k];
        loop {
            if resid.eval(&vals) {
                return Some(vals);
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return None;
                }
                i -= 1;
                if vals[i] < self.int_bound {
                    vals[i] += 1;
                    break;
                }
                vals[i] = -self.int_bound;
            }
        }
    }

    fn compile(&self, counts: &[u64]) -> Option<Resid> {
        let n = self.problem.set_vars.len();
        let universe: u64 = counts.iter().sum();
        let mut var_masks = vec![0u64; n];
        let mut offset = 0u64;
        for (beta, &c) in counts.iter().enumerate() {
            let block = if c == 0 {
                0
            } else if offset + c >= 64 {
                (!0u64) << offset
            } else {
                ((1u64 << c) - 1) << offset
            };
            for (i, m) in var_masks.iter_mut().enumerate() {
                if beta >> i & 1 == 1 {
                    *m |= block;
                }
            }
            offset += c;
        }
        let univ_mask = if universe == 64 {
            !0u64
        } else {
            (1u64 << universe) - 1
        };
        let env = MaskEnv {
            problem: self.problem,
            var_masks,
            univ_mask,
            universe,
        };
        env.compile_formula(&self.problem.formula)
    }
}

struct MaskEnv<'p> {
    problem: &'p Problem,
    var_masks: Vec<u64>,
    univ_mask: u64,
    universe: u64,
}

impl<'p> MaskEnv<'p> {
    fn set_mask(&self, s: &SetTerm) -> u64 {
        match s {
            SetTerm::Var(name) => {
                let i = self
                    .problem
                    .set_vars
                    .iter()
                    .position(|v| v == name)
                    .expect("type-checked problem");
                self.var_masks[i]
            }
            SetTerm::Empty => 0,
            SetTerm::Univ => self.univ_mask,
            SetTerm::Union(a, b) => self.set_mask(a) | self.set_mask(b),
            SetTerm::Inter(a, b) => self.set_mask(a) & self.set_mask(b),
            SetTerm::Compl(a) => !self.set_mask(a) & self.univ_mask,
            SetTerm::Minus(a, b) => self.set_mask(a) & !self.set_mask(b),
        }
    }

    fn compile_int(&self, t: &IntTerm) -> Option<Lin> {
        let k = self.problem.int_vars.len();
        Some(match t {
            IntTerm::Const(c) => Lin::constant(c.to_i64().filter(|v| *v <= FAST_MAG_CAP)?),
            IntTerm::Var(name) => {
                let i = self
                    .problem
                    .int_vars
                    .iter()
                    .position(|v| v == name)
                    .expect("type-checked problem");
                let mut coeffs = vec![0i64; k];
                coeffs[i] = 1;
                Lin { c: 0, coeffs }
            }
            IntTerm::Add(a, b) => {
                let (a, b) = (self.compile_int(a)?, self.compile_int(b)?);
                let mut coeffs = vec![0i64; k];
                for (i, co) in coeffs.iter_mut().enumerate() {
                    let ca = a.coeffs.get(i).copied().unwrap_or(0);
                    let cb = b.coeffs.get(i).copied().unwrap_or(0);
                    *co = ca.checked_add(cb).filter(|v| v.abs() <= FAST_MAG_CAP)?;
                }
                Lin {
                    c: a.c.checked_add(b.c).filter(|v| v.abs() <= FAST_MAG_CAP)?,
                    coeffs,
                }
            }
            IntTerm::MulConst(c, inner) => {
                let c = c.to_i64().filter(|v| *v <= FAST_MAG_CAP)?;
                let inner = self.compile_int(inner)?;
                let mut coeffs = Vec::with_capacity(k);
                for co in &inner.coeffs {
                    coeffs.push(co.checked_mul(c).filter(|v| v.abs() <= FAST_MAG_CAP)?);
                }
                coeffs.resize(k, 0);
                Lin {
                    c: inner.c.checked_mul(c).filter(|v| v.abs() <= FAST_MAG_CAP)?,
                    coeffs,
                }
            }
            IntTerm::Card(s) => Lin::constant(self.set_mask(s).count_ones() as i64),
            IntTerm::MaxC => Lin::constant(self.universe as i64),
        })
    }

    fn diff(&self, t1: &IntTerm, t2: &IntTerm) -> Option<Lin> {
        let (a, b) = (self.compile_int(t1)?, self.compile_int(t2)?);
        let k = self.problem.int_vars.len();
        let mut coeffs = vec![0i64; k];
        for (i, co) in coeffs.iter_mut().enumerate() {
            let ca = a.coeffs.get(i).copied().unwrap_or(0);
            let cb = b.coeffs.get(i).copied().unwrap_or(0);
            *co = ca.checked_sub(cb).filter(|v| v.abs() <= FAST_MAG_CAP)?;
        }
        Some(Lin {
            c: a.c.checked_sub(b.c).filter(|v| v.abs() <= FAST_MAG_CAP)?,
            coeffs,
        })
    }

    fn compile_atom(&self, a: &Atom) -> Option<Resid> {
        Some(match a {
            Atom::SetEq(s1, s2) => Resid::Const(self.set_mask(s1) == self.set_mask(s2)),
            Atom::Subset(s1, s2) => {
                Resid::Const(self.set_mask(s1) & !self.set_mask(s2) == 0)
            }
            Atom::IntEq(t1, t2) => self.fold_cmp(Cmp::Eq, self.diff(t1, t2)?),
            Atom::IntLe(t1, t2) => self.fold_cmp(Cmp::Le, self.diff(t1, t2)?),
            Atom::IntLt(t1, t2) => self.fold_cmp(Cmp::Lt, self.diff(t1, t2)?),
            Atom::Dvd(d, t) => {
                let d = d.to_u64().filter(|v| *v <= FAST_MAG_CAP as u64)?;
                let lin = self.compile_int(t)?;
                if lin.coeffs.iter().all(|c| *c == 0) {
                    Resid::Const(lin.c.rem_euclid(d as i64) == 0)
                } else {
                    Resid::Dvd(d, lin)
                }
            }
        })
    }

    fn fold_cmp(&self, op: Cmp, lin: Lin) -> Resid {
        if lin.coeffs.iter().all(|c| *c == 0) {
            Resid::Const(match op {
                Cmp::Eq => lin.c == 0,
                Cmp::Le => lin.c <= 0,
                Cmp::Lt => lin.c < 0,
            })
        } else {
            Resid::Cmp(op, lin)
        }
    }

    fn compile_formula(&self, f: &Formula) -> Option<Resid> {
        Some(match f {
            Formula::True => Resid::Const(true),
            Formula::False => Resid::Const(false),
            Formula::Atom(a) => self.compile_atom(a)?,
            Formula::And(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                let mut all_const = true;
                let mut acc = true;
                for g in fs {
                    let r = self.compile_formula(g)?;
                    if let Resid::Const(b) = r {
                        acc &= b;
                    } else {
                        all_const = false;
                    }
                    parts.push(r);
                }
                if all_const {
                    Resid::Const(acc)
                } else if !acc {
                    Resid::Const(false)
                } else {
                    Resid::And(parts)
                }
            }
            Formula::Or(fs) => {
                let mut parts = Vec::with_capacity(fs.len());
                let mut all_const = true;
                let mut acc = false;
                for g in fs {
                    let r = self.compile_formula(g)?;
                    if let Resid::Const(b) = r {
                        acc |= b;
                    } else {
                        all_const = false;
                    }
                    parts.push(r);
                }
                if all_const {
                    Resid::Const(acc)
                } else if acc {
                    Resid::Const(true)
                } else {
                    Resid::Or(parts)
                }
            }
            Formula::Not(g) => match self.compile_formula(g)? {
                Resid::Const(b) => Resid::Const(!b),
                r => Resid::Not(Box::new(r)),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{free_vars, type_check};

    fn model_1var(outside: u64, inside: u64) -> Model {
        model_from_regions(
            RegionVector::new(
                vec!["A".to_string()],
                vec![BigUint::from(outside), BigUint::from(inside)],
            ),
            BTreeMap::new(),
        )
    }

    #[test]
    fn layout_one_var() {
        // counts = [2, 3]: 2 elements outside A, 3 inside.
        let m = model_1var(2, 3);
        assert_eq!(m.universe_size(), BigUint::from(5u32));
        assert_eq!(m.set_elements("A").unwrap(), vec![2, 3, 4]);
    }

    #[test]
    fn layout_all_zero() {
        let m = model_1var(0, 0);
        assert_eq!(m.universe_size(), BigUint::zero());
        assert_eq!(m.set_elements("A").unwrap(), Vec::<u64>::new());
    }

    #[test]
    fn layout_two_vars_shared_region() {
        let mut counts = vec![BigUint::zero(); 4];
        counts[3] = BigUint::one();
        let m = model_from_regions(
            RegionVector::new(vec!["A".to_string(), "B".to_string()], counts),
            BTreeMap::new(),
        );
        assert_eq!(m.universe_size(), BigUint::one());
        assert_eq!(m.set_elements("A").unwrap(), vec![0]);
        assert_eq!(m.set_elements("B").unwrap(), vec![0]);
    }

    #[test]
    fn empty_set_has_card_zero() {
        let f = Formula::Atom(Atom::IntEq(IntTerm::card(SetTerm::Empty), IntTerm::nat(0)));
        let m = model_1var(1, 2);
        assert_eq!(eval_formula(&f, &m), Ok(true));
    }

    #[test]
    fn inclusion_exclusion_holds_in_every_model() {
        // |A ∪ B| + |A ∩ B| = |A| + |B|, subtraction moved to the other side.
        let a = SetTerm::var("A");
        let b = SetTerm::var("B");
        let f = Formula::Atom(Atom::IntEq(
            IntTerm::add(
                IntTerm::card(SetTerm::union(a.clone(), b.clone())),
                IntTerm::card(SetTerm::inter(a.clone(), b.clone())),
            ),
            IntTerm::add(IntTerm::card(a.clone()), IntTerm::card(b.clone())),
        ));
        for c0 in 0..3u64 {
            for c1 in 0..3u64 {
                for c2 in 0..3u64 {
                    for c3 in 0..3u64 {
                        let m = model_from_regions(
                            RegionVector::new(
                                vec!["A".to_string(), "B".to_string()],
                                vec![c0, c1, c2, c3].into_iter().map(BigUint::from).collect(),
                            ),
                            BTreeMap::new(),
                        );
                        assert_eq!(eval_formula(&f, &m), Ok(true));
                    }
                }
            }
        }
    }

    #[test]
    fn union_equality_direct_evaluation() {
        // A = B ∪ C with N = 3, A = {0,1}, B = {0}, C = {1} is true;
        // with C = {2} it is false.
        let f = Formula::Atom(Atom::SetEq(
            SetTerm::var("A"),
            SetTerm::union(SetTerm::var("B"), SetTerm::var("C")),
        ));
        let vars = vec!["A".to_string(), "B".to_string(), "C".to_string()];
        let mut sets = BTreeMap::new();
        sets.insert("A".to_string(), vec![0, 1]);
        sets.insert("B".to_string(), vec![0]);
        sets.insert("C".to_string(), vec![1]);
        let m = Model::from_explicit_sets(vars.clone(), 3, &sets, BTreeMap::new());
        assert_eq!(eval_formula(&f, &m), Ok(true));

        sets.insert("C".to_string(), vec![2]);
        let m = Model::from_explicit_sets(vars, 3, &sets, BTreeMap::new());
        assert_eq!(eval_formula(&f, &m), Ok(false));
    }

    #[test]
    fn eval_reports_unassigned() {
        let f = Formula::Atom(Atom::Subset(SetTerm::var("Z"), SetTerm::Univ));
        let m = model_1var(1, 1);
        assert_eq!(
            eval_formula(&f, &m),
            Err(UnassignedVariable { name: "Z".to_string(), sort: Sort::Set })
        );
    }

    #[test]
    fn explicit_and_region_routes_agree() {
        let f = Formula::And(vec![
            Formula::Atom(Atom::Subset(
                SetTerm::inter(SetTerm::var("A"), SetTerm::var("B")),
                SetTerm::var("A"),
            )),
            Formula::Atom(Atom::IntLt(
                IntTerm::card(SetTerm::minus(SetTerm::var("A"), SetTerm::var("B"))),
                IntTerm::add(IntTerm::MaxC, IntTerm::nat(1)),
            )),
            Formula::not(Formula::Atom(Atom::SetEq(SetTerm::var("A"), SetTerm::var("B")))),
        ]);
        for seed in 0..81u64 {
            let counts: Vec<BigUint> = (0..4).map(|i| BigUint::from(seed >> (2 * i) & 3)).collect();
            let m = model_from_regions(
                RegionVector::new(vec!["A".to_string(), "B".to_string()], counts),
                BTreeMap::new(),
            );
            assert_eq!(
                eval_formula_explicit(&f, &m),
                eval_formula_regions(&f, &m),
                "disagreement at seed {seed}"
            );
        }
    }

    fn card_eq(s: SetTerm, v: u64) -> Formula {
        Formula::Atom(Atom::IntEq(IntTerm::card(s), IntTerm::nat(v)))
    }

    fn card_le(s: SetTerm, v: u64) -> Formula {
        Formula::Atom(Atom::IntLe(IntTerm::card(s), IntTerm::nat(v)))
    }

    #[test]
    fn oracle_union_of_small_parts_cannot_reach_five() {
        // |A|=5 ∧ A=B∪C ∧ |B|<=2 ∧ |C|<=2 is unsatisfiable within bound 6
        // (and in fact everywhere: |A| <= |B| + |C| <= 4).
        let p = Problem::new(
            vec!["A", "B", "C"],
            Vec::<String>::new(),
            Formula::And(vec![
                card_eq(SetTerm::var("A"), 5),
                Formula::Atom(Atom::SetEq(
                    SetTerm::var("A"),
                    SetTerm::union(SetTerm::var("B"), SetTerm::var("C")),
                )),
                card_le(SetTerm::var("B"), 2),
                card_le(SetTerm::var("C"), 2),
            ]),
        );
        assert!(type_check(&p).is_ok());
        assert_eq!(oracle_sat(&p, 6, 6), Ok(OracleVerdict::UnsatWithin));
    }

    #[test]
    fn oracle_finds_overlap_model() {
        // A=B∪C ∧ |B|=2 ∧ |C|=2 ∧ |A|=3 forces |B∩C| = 1.
        let p = Problem::new(
            vec!["A", "B", "C"],
            Vec::<String>::new(),
            Formula::And(vec![
                Formula::Atom(Atom::SetEq(
                    SetTerm::var("A"),
                    SetTerm::union(SetTerm::var("B"), SetTerm::var("C")),
                )),
                card_eq(SetTerm::var("B"), 2),
                card_eq(SetTerm::var("C"), 2),
                card_eq(SetTerm::var("A"), 3),
            ]),
        );
        match oracle_sat(&p, 4, 4).unwrap() {
            OracleVerdict::SatWithin(m) => {
                let overlap = IntTerm::card(SetTerm::inter(SetTerm::var("B"), SetTerm::var("C")));
                let check = Formula::Atom(Atom::IntEq(overlap, IntTerm::nat(1)));
                assert_eq!(eval_formula(&check, &m), Ok(true));
                // Lexicographically first region solution: only the free
                // count c_0 = 0, then c_3 = c_5 = c_7 = 1.
                let expected: Vec<BigUint> =
                    [0u32, 0, 0, 1, 0, 1, 0, 1].iter().map(|&c| BigUint::from(c)).collect();
                assert_eq!(m.regions().counts(), &expected[..]);
            }
            v => panic!("expected SatWithin, got {v:?}"),
        }
    }

    #[test]
    fn oracle_empty_universe() {
        let p = Problem::new(
            Vec::<String>::new(),
            Vec::<String>::new(),
            Formula::Atom(Atom::IntEq(IntTerm::MaxC, IntTerm::nat(0))),
        );
        match oracle_sat(&p, 3, 3).unwrap() {
            OracleVerdict::SatWithin(m) => assert_eq!(m.universe_size(), BigUint::zero()),
            v => panic!("expected SatWithin, got {v:?}"),
        }
    }

    #[test]
    fn oracle_budget_exceeded() {
        let p = Problem::new(
            vec!["A", "B"],
            vec!["k"],
            Formula::Atom(Atom::IntLt(IntTerm::card(SetTerm::var("A")), IntTerm::var("k"))),
        );
        let err = oracle_sat_with_budget(&p, 6, 6, 10).unwrap_err();
        assert_eq!(err, OracleError::BudgetExceeded { budget: 10 });
    }

    #[test]
    fn oracle_monotone_in_bounds() {
        let p = Problem::new(
            vec!["A"],
            Vec::<String>::new(),
            card_eq(SetTerm::var("A"), 3),
        );
        assert_eq!(oracle_sat(&p, 2, 0), Ok(OracleVerdict::UnsatWithin));
        let v3 = oracle_sat(&p, 3, 0).unwrap();
        let v5 = oracle_sat(&p, 5, 2).unwrap();
        assert!(matches!(v3, OracleVerdict::SatWithin(_)));
        assert!(matches!(v5, OracleVerdict::SatWithin(_)));
    }

    #[test]
    fn region_roundtrip_through_layout() {
        let counts: Vec<BigUint> = [1u32, 0, 2, 3].iter().map(|&c| BigUint::from(c)).collect();
        let rv = RegionVector::new(vec!["A".to_string(), "B".to_string()], counts);
        let m = model_from_regions(rv.clone(), BTreeMap::new());
        let universe = m.universe_size().to_u64().unwrap();
        let mut sets = BTreeMap::new();
        for v in rv.var_order() {
            sets.insert(v.clone(), m.set_elements(v).unwrap());
        }
        let back = Model::from_explicit_sets(
            rv.var_order().to_vec(),
            universe,
            &sets,
            BTreeMap::new(),
        );
        assert_eq!(back.regions(), &rv);
    }

    #[test]
    fn free_vars_of_oracle_examples_are_declared() {
        let p = Problem::new(
            vec!["A", "B", "C"],
            vec!["k"],
            Formula::And(vec![
                card_le(SetTerm::var("B"), 2),
                Formula::Atom(Atom::IntLe(IntTerm::var("k"), IntTerm::card(SetTerm::var("A")))),
                Formula::Atom(Atom::Subset(SetTerm::var("C"), SetTerm::var("A"))),
            ]),
        );
        let (s, i) = free_vars(&p.formula);
        assert!(s.iter().all(|v| p.set_vars.contains(v)));
        assert!(i.iter().all(|v| p.int_vars.contains(v)));
    }
}
