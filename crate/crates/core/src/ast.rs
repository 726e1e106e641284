//! Abstract syntax for quantifier-free constraints on a boolean algebra of
//! finite sets with cardinality arithmetic.
//!
//! Terms come in two disjoint sorts: [`SetTerm`] denotes a subset of a finite
//! universe, [`IntTerm`] denotes an integer. Integer constants are
//! arbitrary-precision naturals and are never truncated to a machine word.
//! [`Formula`] combines atoms with `and`/`or`/`not`; there is no quantifier
//! node, so every formula is quantifier-free by construction.
//!
//! All values are immutable after construction and safe to share across
//! threads.

use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::HashSet;
use std::fmt;

/// A term denoting a subset of the (finite) universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SetTerm {
    /// A declared set variable.
    Var(String),
    /// The empty set.
    Empty,
    /// The whole universe.
    Univ,
    Union(Box<SetTerm>, Box<SetTerm>),
    Inter(Box<SetTerm>, Box<SetTerm>),
    Compl(Box<SetTerm>),
    /// Set difference; normalization rewrites `minus(a, b)` to
    /// `inter(a, compl(b))`.
    Minus(Box<SetTerm>, Box<SetTerm>),
}

impl SetTerm {
    pub fn var(name: impl Into<String>) -> Self {
        SetTerm::Var(name.into())
    }
    pub fn union(a: SetTerm, b: SetTerm) -> Self {
        SetTerm::Union(Box::new(a), Box::new(b))
    }
    pub fn inter(a: SetTerm, b: SetTerm) -> Self {
        SetTerm::Inter(Box::new(a), Box::new(b))
    }
    pub fn compl(a: SetTerm) -> Self {
        SetTerm::Compl(Box::new(a))
    }
    pub fn minus(a: SetTerm, b: SetTerm) -> Self {
        SetTerm::Minus(Box::new(a), Box::new(b))
    }

    /// Symmetric difference, spelled out as `(a ∩ bᶜ) ∪ (b ∩ aᶜ)`.
    pub fn sym_diff(a: SetTerm, b: SetTerm) -> Self {
        SetTerm::union(
            SetTerm::inter(a.clone(), SetTerm::compl(b.clone())),
            SetTerm::inter(b, SetTerm::compl(a)),
        )
    }

    /// Rewrites every `Minus(a, b)` into `Inter(a, Compl(b))`.
    pub fn without_minus(&self) -> SetTerm {
        match self {
            SetTerm::Var(_) | SetTerm::Empty | SetTerm::Univ => self.clone(),
            SetTerm::Union(a, b) => SetTerm::union(a.without_minus(), b.without_minus()),
            SetTerm::Inter(a, b) => SetTerm::inter(a.without_minus(), b.without_minus()),
            SetTerm::Compl(a) => SetTerm::compl(a.without_minus()),
            SetTerm::Minus(a, b) => {
                SetTerm::inter(a.without_minus(), SetTerm::compl(b.without_minus()))
            }
        }
    }
}

/// A term denoting an integer.
///
/// `Card` measures a set term, `MaxC` is the cardinality of the universe.
/// Multiplication is restricted to constant coefficients, which keeps the
/// arithmetic linear.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntTerm {
    /// An unbounded natural constant.
    Const(BigUint),
    /// A declared integer variable.
    Var(String),
    Add(Box<IntTerm>, Box<IntTerm>),
    /// `coeff * inner` with a constant natural coefficient.
    MulConst(BigUint, Box<IntTerm>),
    /// Cardinality of a set term.
    Card(Box<SetTerm>),
    /// Cardinality of the universe.
    MaxC,
}

impl IntTerm {
    pub fn nat(value: u64) -> Self {
        IntTerm::Const(BigUint::from(value))
    }
    pub fn var(name: impl Into<String>) -> Self {
        IntTerm::Var(name.into())
    }
    pub fn add(a: IntTerm, b: IntTerm) -> Self {
        IntTerm::Add(Box::new(a), Box::new(b))
    }
    pub fn mul_const(coeff: BigUint, inner: IntTerm) -> Self {
        IntTerm::MulConst(coeff, Box::new(inner))
    }
    pub fn card(s: SetTerm) -> Self {
        IntTerm::Card(Box::new(s))
    }

    fn without_minus(&self) -> IntTerm {
        match self {
            IntTerm::Const(_) | IntTerm::Var(_) | IntTerm::MaxC => self.clone(),
            IntTerm::Add(a, b) => IntTerm::add(a.without_minus(), b.without_minus()),
            IntTerm::MulConst(c, t) => IntTerm::mul_const(c.clone(), t.without_minus()),
            IntTerm::Card(s) => IntTerm::card(s.without_minus()),
        }
    }
}

/// An atomic constraint.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    SetEq(SetTerm, SetTerm),
    Subset(SetTerm, SetTerm),
    IntEq(IntTerm, IntTerm),
    /// `t1 <= t2`.
    IntLe(IntTerm, IntTerm),
    /// `t1 < t2`.
    IntLt(IntTerm, IntTerm),
    /// `divisor | t` with a constant divisor >= 1.
    Dvd(BigUint, IntTerm),
}

impl Atom {
    fn without_minus(&self) -> Atom {
        match self {
            Atom::SetEq(a, b) => Atom::SetEq(a.without_minus(), b.without_minus()),
            Atom::Subset(a, b) => Atom::Subset(a.without_minus(), b.without_minus()),
            Atom::IntEq(a, b) => Atom::IntEq(a.without_minus(), b.without_minus()),
            Atom::IntLe(a, b) => Atom::IntLe(a.without_minus(), b.without_minus()),
            Atom::IntLt(a, b) => Atom::IntLt(a.without_minus(), b.without_minus()),
            Atom::Dvd(d, t) => Atom::Dvd(d.clone(), t.without_minus()),
        }
    }
}

/// A quantifier-free formula. `And`/`Or` lists are nonempty by invariant;
/// [`type_check`] rejects empty connectives.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Self {
        Formula::Atom(a)
    }
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction that collapses the degenerate cases instead of building
    /// empty or single-element `And` lists.
    pub fn and(mut fs: Vec<Formula>) -> Self {
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    pub fn or(mut fs: Vec<Formula>) -> Self {
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }
}

/// A problem: declared variables plus one formula.
///
/// The declaration order is fixed and drives all region indexing, so two
/// problems with the same formula but differently ordered declarations are
/// distinct values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub set_vars: Vec<String>,
    pub int_vars: Vec<String>,
    pub formula: Formula,
}

impl Problem {
    pub fn new(
        set_vars: Vec<impl Into<String>>,
        int_vars: Vec<impl Into<String>>,
        formula: Formula,
    ) -> Self {
        Problem {
            set_vars: set_vars.into_iter().map(Into::into).collect(),
            int_vars: int_vars.into_iter().map(Into::into).collect(),
            formula,
        }
    }
}

/// Variable sort, used in error reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Set,
    Int,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Set => write!(f, "set"),
            Sort::Int => write!(f, "int"),
        }
    }
}

/// A well-formedness violation found by [`type_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeError {
    UndeclaredVariable { name: String, sort: Sort },
    /// The same name is declared or used in both namespaces.
    SortClash { name: String },
    /// A `dvd` divisor of zero; `atom_index` is the preorder index of the
    /// offending atom in the formula.
    BadDivisor { atom_index: usize },
    /// An `and`/`or` node with an empty argument list.
    EmptyConnective,
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeError::UndeclaredVariable { name, sort } => {
                write!(f, "undeclared {sort} variable `{name}`")
            }
            TypeError::SortClash { name } => {
                write!(f, "`{name}` is used as both a set and an integer variable")
            }
            TypeError::BadDivisor { atom_index } => {
                write!(f, "divisor must be >= 1 (atom #{atom_index})")
            }
            TypeError::EmptyConnective => write!(f, "empty and/or"),
        }
    }
}

impl std::error::Error for TypeError {}

/// Collects free variables of a formula in first-occurrence order.
///
/// Returns each name exactly once; the two lists follow the two sorts.
pub fn free_vars(f: &Formula) -> (Vec<String>, Vec<String>) {
    let mut sets = Vec::new();
    let mut ints = Vec::new();
    let mut seen_sets = HashSet::new();
    let mut seen_ints = HashSet::new();
    walk_formula(f, &mut |atom| {
        collect_atom_vars(atom, &mut sets, &mut ints, &mut seen_sets, &mut seen_ints);
    });
    (sets, ints)
}

fn walk_formula(f: &Formula, on_atom: &mut impl FnMut(&Atom)) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => on_atom(a),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                walk_formula(g, on_atom);
            }
        }
        Formula::Not(g) => walk_formula(g, on_atom),
    }
}

fn collect_atom_vars(
    atom: &Atom,
    sets: &mut Vec<String>,
    ints: &mut Vec<String>,
    seen_sets: &mut HashSet<String>,
    seen_ints: &mut HashSet<String>,
) {
    let mut on_set = |s: &SetTerm| collect_set_vars(s, sets, seen_sets);
    match atom {
        Atom::SetEq(a, b) | Atom::Subset(a, b) => {
            on_set(a);
            on_set(b);
        }
        Atom::IntEq(a, b) | Atom::IntLe(a, b) | Atom::IntLt(a, b) => {
            collect_int_vars(a, sets, ints, seen_sets, seen_ints);
            collect_int_vars(b, sets, ints, seen_sets, seen_ints);
        }
        Atom::Dvd(_, t) => collect_int_vars(t, sets, ints, seen_sets, seen_ints),
    }
}

fn collect_set_vars(s: &SetTerm, out: &mut Vec<String>, seen: &mut HashSet<String>) {
    match s {
        SetTerm::Var(name) => {
            if seen.insert(name.clone()) {
                out.push(name.clone());
            }
        }
        SetTerm::Empty | SetTerm::Univ => {}
        SetTerm::Union(a, b) | SetTerm::Inter(a, b) | SetTerm::Minus(a, b) => {
            collect_set_vars(a, out, seen);
            collect_set_vars(b, out, seen);
        }
        SetTerm::Compl(a) => collect_set_vars(a, out, seen),
    }
}

fn collect_int_vars(
    t: &IntTerm,
    sets: &mut Vec<String>,
    ints: &mut Vec<String>,
    seen_sets: &mut HashSet<String>,
    seen_ints: &mut HashSet<String>,
) {
    match t {
        IntTerm::Const(_) | IntTerm::MaxC => {}
        IntTerm::Var(name) => {
            if seen_ints.insert(name.clone()) {
                ints.push(name.clone());
            }
        }
        IntTerm::Add(a, b) => {
            collect_int_vars(a, sets, ints, seen_sets, seen_ints);
            collect_int_vars(b, sets, ints, seen_sets, seen_ints);
        }
        IntTerm::MulConst(_, inner) => collect_int_vars(inner, sets, ints, seen_sets, seen_ints),
        IntTerm::Card(s) => collect_set_vars(s, sets, seen_sets),
    }
}

/// Checks that every used variable is declared with the right sort, that the
/// two namespaces are disjoint, that every `dvd` divisor is >= 1, and that no
/// connective has an empty argument list.
pub fn type_check(p: &Problem) -> Result<(), Vec<TypeError>> {
    let mut errors = Vec::new();
    let declared_sets: HashSet<&str> = p.set_vars.iter().map(String::as_str).collect();
    let declared_ints: HashSet<&str> = p.int_vars.iter().map(String::as_str).collect();
    if declared_sets.len() != p.set_vars.len() || declared_ints.len() != p.int_vars.len() {
        // Duplicate declarations collapse to a clash on the repeated name.
        let mut seen = HashSet::new();
        for name in p.set_vars.iter().chain(p.int_vars.iter()) {
            if !seen.insert(name.as_str()) {
                errors.push(TypeError::SortClash { name: name.clone() });
            }
        }
    }
    for name in &p.set_vars {
        if declared_ints.contains(name.as_str()) {
            errors.push(TypeError::SortClash { name: name.clone() });
        }
    }

    let mut atom_index = 0usize;
    check_formula(
        &p.formula,
        &declared_sets,
        &declared_ints,
        &mut atom_index,
        &mut errors,
    );

    errors.dedup();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn check_formula(
    f: &Formula,
    sets: &HashSet<&str>,
    ints: &HashSet<&str>,
    atom_index: &mut usize,
    errors: &mut Vec<TypeError>,
) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom(a) => {
            check_atom(a, *atom_index, sets, ints, errors);
            *atom_index += 1;
        }
        Formula::And(fs) | Formula::Or(fs) => {
            if fs.is_empty() {
                errors.push(TypeError::EmptyConnective);
            }
            for g in fs {
                check_formula(g, sets, ints, atom_index, errors);
            }
        }
        Formula::Not(g) => check_formula(g, sets, ints, atom_index, errors),
    }
}

fn check_atom(
    a: &Atom,
    atom_index: usize,
    sets: &HashSet<&str>,
    ints: &HashSet<&str>,
    errors: &mut Vec<TypeError>,
) {
    match a {
        Atom::SetEq(s1, s2) | Atom::Subset(s1, s2) => {
            check_set_term(s1, sets, ints, errors);
            check_set_term(s2, sets, ints, errors);
        }
        Atom::IntEq(t1, t2) | Atom::IntLe(t1, t2) | Atom::IntLt(t1, t2) => {
            check_int_term(t1, sets, ints, errors);
            check_int_term(t2, sets, ints, errors);
        }
        Atom::Dvd(d, t) => {
            if d.is_zero() {
                errors.push(TypeError::BadDivisor { atom_index });
            }
            check_int_term(t, sets, ints, errors);
        }
    }
}

fn check_set_term(
    s: &SetTerm,
    sets: &HashSet<&str>,
    ints: &HashSet<&str>,
    errors: &mut Vec<TypeError>,
) {
    match s {
        SetTerm::Var(name) => {
            if !sets.contains(name.as_str()) {
                if ints.contains(name.as_str()) {
                    errors.push(TypeError::SortClash { name: name.clone() });
                } else {
                    errors.push(TypeError::UndeclaredVariable {
                        name: name.clone(),
                        sort: Sort::Set,
                    });
                }
            }
        }
        SetTerm::Empty | SetTerm::Univ => {}
        SetTerm::Union(a, b) | SetTerm::Inter(a, b) | SetTerm::Minus(a, b) => {
            check_set_term(a, sets, ints, errors);
            check_set_term(b, sets, ints, errors);
        }
        SetTerm::Compl(a) => check_set_term(a, sets, ints, errors),
    }
}

fn check_int_term(
    t: &IntTerm,
    sets: &HashSet<&str>,
    ints: &HashSet<&str>,
    errors: &mut Vec<TypeError>,
) {
    match t {
        IntTerm::Const(_) | IntTerm::MaxC => {}
        IntTerm::Var(name) => {
            if !ints.contains(name.as_str()) {
                if sets.contains(name.as_str()) {
                    errors.push(TypeError::SortClash { name: name.clone() });
                } else {
                    errors.push(TypeError::UndeclaredVariable {
                        name: name.clone(),
                        sort: Sort::Int,
                    });
                }
            }
        }
        IntTerm::Add(a, b) => {
            check_int_term(a, sets, ints, errors);
            check_int_term(b, sets, ints, errors);
        }
        IntTerm::MulConst(_, inner) => check_int_term(inner, sets, ints, errors),
        IntTerm::Card(s) => check_set_term(s, sets, ints, errors),
    }
}

/// Negation normal form.
///
/// Pushes negations down to the atoms and rewrites every negated atom except
/// `dvd`, which stays as a marked negative atom (`Not` directly above the
/// atom). `minus` is rewritten away everywhere. The result is semantically
/// equivalent to the input and `to_nnf` is idempotent.
///
/// Negated atoms become:
/// - `not (t1 <= t2)`  ->  `t2 < t1`
/// - `not (t1 < t2)`   ->  `t2 <= t1`
/// - `not (t1 = t2)`   ->  `t1 < t2  or  t2 < t1`
/// - `not (s1 = s2)`   ->  `1 <= |s1 Δ s2|`
/// - `not (s1 ⊆ s2)`   ->  `1 <= |s1 ∩ s2ᶜ|`
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, true)
}

fn nnf(f: &Formula, positive: bool) -> Formula {
    match f {
        Formula::True => {
            if positive {
                Formula::True
            } else {
                Formula::False
            }
        }
        Formula::False => {
            if positive {
                Formula::False
            } else {
                Formula::True
            }
        }
        Formula::Not(g) => nnf(g, !positive),
        Formula::And(fs) => {
            let mapped: Vec<Formula> = fs.iter().map(|g| nnf(g, positive)).collect();
            if positive {
                Formula::And(mapped)
            } else {
                Formula::Or(mapped)
            }
        }
        Formula::Or(fs) => {
            let mapped: Vec<Formula> = fs.iter().map(|g| nnf(g, positive)).collect();
            if positive {
                Formula::Or(mapped)
            } else {
                Formula::And(mapped)
            }
        }
        Formula::Atom(a) => {
            let a = a.without_minus();
            if positive {
                Formula::Atom(a)
            } else {
                negate_atom(&a)
            }
        }
    }
}

fn one_le_card(s: SetTerm) -> Formula {
    Formula::Atom(Atom::IntLe(IntTerm::nat(1), IntTerm::card(s)))
}

fn negate_atom(a: &Atom) -> Formula {
    match a {
        Atom::IntLe(t1, t2) => Formula::Atom(Atom::IntLt(t2.clone(), t1.clone())),
        Atom::IntLt(t1, t2) => Formula::Atom(Atom::IntLe(t2.clone(), t1.clone())),
        Atom::IntEq(t1, t2) => Formula::Or(vec![
            Formula::Atom(Atom::IntLt(t1.clone(), t2.clone())),
            Formula::Atom(Atom::IntLt(t2.clone(), t1.clone())),
        ]),
        Atom::SetEq(s1, s2) => one_le_card(SetTerm::sym_diff(s1.clone(), s2.clone())),
        Atom::Subset(s1, s2) => one_le_card(SetTerm::inter(s1.clone(), SetTerm::compl(s2.clone()))),
        Atom::Dvd(_, _) => Formula::not(Formula::Atom(a.clone())),
    }
}
