//! Formula AST shared by every engine.
//!
//! Until modalities optionally carry a counting constraint: a Boolean
//! combination of atoms `a1*#f1 + ... + am*#fm ~ k` evaluated over the strict
//! prefix of a run (`#f` is the number of prefix states satisfying `f`; the
//! empty prefix has every count 0). Freeze variables (`z[f]. body`) and
//! linear atoms over them cover the variable-binding dialect, `N` covers the
//! cumulative one.
//!
//! Derived forms are parser sugar and normalize away:
//! `EX f` = `E (TT U{#TT = 1} f)`, `EF{C} f` = `E (TT U{C} f)`,
//! `EG{C} f` = `!AF{C} !f`, and mirror images for `A`; `a -> b` = `!a | b`.
//! The X-shaped until (left-hand side `TT`, constraint exactly `#TT = 1`) is
//! treated as the plain CTL next operator everywhere: it contributes no
//! counting flags and the CTL engines evaluate it natively.
//!
//! Nodes are reference-counted with a cached structural hash, so equality is
//! pointer-first and memo keys stay cheap on heavily shared DAGs.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

mod parse;
mod print;

pub use parse::parse_formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Cmp {
    pub fn eval(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

/// One counting atom `a1*#f1 + ... + am*#fm ~ k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CountAtom {
    pub terms: Vec<(i64, Formula)>,
    pub cmp: Cmp,
    pub bound: i64,
}

impl CountAtom {
    /// Evaluates the atom on explicit per-term counts (no caps).
    pub fn eval_counts(&self, counts: &[i64]) -> bool {
        debug_assert_eq!(counts.len(), self.terms.len());
        let sum: i64 = self
            .terms
            .iter()
            .zip(counts)
            .map(|((a, _), n)| a.checked_mul(*n).expect("count overflow"))
            .fold(0i64, |acc, x| acc.checked_add(x).expect("count overflow"));
        self.cmp.eval(sum, self.bound)
    }
}

/// Boolean combination of counting atoms attached to an until modality.
/// `True`/`False` only arise from simplification, never from the parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    True,
    False,
    Atom(CountAtom),
    Not(Box<Constraint>),
    And(Box<Constraint>, Box<Constraint>),
    Or(Box<Constraint>, Box<Constraint>),
}

/// Linear atom `a1*z1 + ... + am*zm ~ c` over freeze variables, used as a
/// formula in the variable-binding dialect.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarAtom {
    pub terms: Vec<(i64, String)>,
    pub cmp: Cmp,
    pub bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Until {
    pub lhs: Formula,
    pub constraint: Option<Constraint>,
    pub rhs: Formula,
}

#[derive(Debug, PartialEq, Eq, Hash)]
pub enum Node {
    True,
    False,
    Atom(String),
    Not(Formula),
    And(Formula, Formula),
    Or(Formula, Formula),
    ExistsUntil(Until),
    ForallUntil(Until),
    /// `var[counted]. body`
    Bind {
        var: String,
        counted: Formula,
        body: Formula,
    },
    VarConstraint(VarAtom),
    /// Cumulative-semantics reset (`N f`): evaluate `f` with empty history.
    Now(Formula),
}

struct Inner {
    hash: u64,
    node: Node,
}

/// A formula; cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct Formula(Arc<Inner>);

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn mk(node: Node) -> Formula {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    node.hash(&mut h);
    Formula(Arc::new(Inner { hash: h.finish(), node }))
}

impl Formula {
    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Stable per-allocation identity, usable as a memo key alongside
    /// structural equality.
    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn tt() -> Formula {
        mk(Node::True)
    }

    pub fn ff() -> Formula {
        mk(Node::False)
    }

    pub fn atom(name: impl Into<String>) -> Formula {
        mk(Node::Atom(name.into()))
    }

    pub fn is_true(&self) -> bool {
        matches!(self.node(), Node::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(self.node(), Node::False)
    }

    /// Negation with constant folding and double-negation elimination.
    pub fn not(f: Formula) -> Formula {
        match f.node() {
            Node::True => Formula::ff(),
            Node::False => Formula::tt(),
            Node::Not(g) => g.clone(),
            _ => mk(Node::Not(f)),
        }
    }

    /// Conjunction with constant folding.
    pub fn and(a: Formula, b: Formula) -> Formula {
        if a.is_false() || b.is_false() {
            return Formula::ff();
        }
        if a.is_true() {
            return b;
        }
        if b.is_true() {
            return a;
        }
        mk(Node::And(a, b))
    }

    /// Disjunction with constant folding.
    pub fn or(a: Formula, b: Formula) -> Formula {
        if a.is_true() || b.is_true() {
            return Formula::tt();
        }
        if a.is_false() {
            return b;
        }
        if b.is_false() {
            return a;
        }
        mk(Node::Or(a, b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn and_all(mut items: Vec<Formula>) -> Formula {
        let mut acc = match items.pop() {
            Some(f) => f,
            None => return Formula::tt(),
        };
        while let Some(f) = items.pop() {
            acc = Formula::and(f, acc);
        }
        acc
    }

    pub fn or_all(mut items: Vec<Formula>) -> Formula {
        let mut acc = match items.pop() {
            Some(f) => f,
            None => return Formula::ff(),
        };
        while let Some(f) = items.pop() {
            acc = Formula::or(f, acc);
        }
        acc
    }

    /// `E (lhs U{constraint} rhs)`. Only the vacuous right-hand side folds;
    /// everything else is kept because constraint truth depends on the
    /// evaluation semantics.
    pub fn exists_until(lhs: Formula, constraint: Option<Constraint>, rhs: Formula) -> Formula {
        if rhs.is_false() {
            return Formula::ff();
        }
        if matches!(constraint, Some(Constraint::False)) {
            return Formula::ff();
        }
        mk(Node::ExistsUntil(Until { lhs, constraint, rhs }))
    }

    pub fn forall_until(lhs: Formula, constraint: Option<Constraint>, rhs: Formula) -> Formula {
        if rhs.is_false() {
            return Formula::ff();
        }
        if matches!(constraint, Some(Constraint::False)) {
            return Formula::ff();
        }
        mk(Node::ForallUntil(Until { lhs, constraint, rhs }))
    }

    fn next_constraint() -> Constraint {
        Constraint::Atom(CountAtom { terms: vec![(1, Formula::tt())], cmp: Cmp::Eq, bound: 1 })
    }

    /// `EX f`, encoded as `E (TT U{#TT = 1} f)`.
    pub fn ex(f: Formula) -> Formula {
        if f.is_false() {
            return Formula::ff();
        }
        if f.is_true() {
            return Formula::tt();
        }
        Formula::exists_until(Formula::tt(), Some(Self::next_constraint()), f)
    }

    /// `AX f`, encoded as `A (TT U{#TT = 1} f)`.
    pub fn ax(f: Formula) -> Formula {
        if f.is_false() {
            return Formula::ff();
        }
        if f.is_true() {
            return Formula::tt();
        }
        Formula::forall_until(Formula::tt(), Some(Self::next_constraint()), f)
    }

    pub fn ef(constraint: Option<Constraint>, f: Formula) -> Formula {
        Formula::exists_until(Formula::tt(), constraint, f)
    }

    pub fn af(constraint: Option<Constraint>, f: Formula) -> Formula {
        Formula::forall_until(Formula::tt(), constraint, f)
    }

    /// `EG{C} f` = `!AF{C} !f`.
    pub fn eg(constraint: Option<Constraint>, f: Formula) -> Formula {
        Formula::not(Formula::af(constraint, Formula::not(f)))
    }

    /// `AG{C} f` = `!EF{C} !f`.
    pub fn ag(constraint: Option<Constraint>, f: Formula) -> Formula {
        Formula::not(Formula::ef(constraint, Formula::not(f)))
    }

    pub fn bind(var: impl Into<String>, counted: Formula, body: Formula) -> Formula {
        mk(Node::Bind { var: var.into(), counted, body })
    }

    pub fn var_constraint(terms: Vec<(i64, String)>, cmp: Cmp, bound: i64) -> Formula {
        mk(Node::VarConstraint(VarAtom { terms, cmp, bound }))
    }

    pub fn now(f: Formula) -> Formula {
        mk(Node::Now(f))
    }
}

/// True for the until payload encoding the next operator.
pub fn is_next_pattern(until: &Until) -> bool {
    if !until.lhs.is_true() {
        return false;
    }
    match &until.constraint {
        Some(Constraint::Atom(CountAtom { terms, cmp: Cmp::Eq, bound: 1 })) => {
            terms.len() == 1 && terms[0].0 == 1 && terms[0].1.is_true()
        }
        _ => false,
    }
}

impl Formula {
    /// Number of structurally distinct subformulas, counted through shared
    /// nodes and through formulas embedded in counting constraints.
    pub fn dag_size(&self) -> usize {
        fn walk(f: &Formula, seen: &mut HashSet<Formula>) {
            if !seen.insert(f.clone()) {
                return;
            }
            match f.node() {
                Node::True | Node::False | Node::Atom(_) | Node::VarConstraint(_) => {}
                Node::Not(g) | Node::Now(g) => walk(g, seen),
                Node::And(a, b) | Node::Or(a, b) => {
                    walk(a, seen);
                    walk(b, seen);
                }
                Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                    walk(&u.lhs, seen);
                    walk(&u.rhs, seen);
                    if let Some(c) = &u.constraint {
                        for_constraint_formulas(c, &mut |g| walk(g, seen));
                    }
                }
                Node::Bind { counted, body, .. } => {
                    walk(counted, seen);
                    walk(body, seen);
                }
            }
        }
        let mut seen = HashSet::new();
        walk(self, &mut seen);
        seen.len()
    }

    /// Tree size with integer constants contributing their bit width; used
    /// for the translation blow-up bound. Saturating, since shared nodes can
    /// make a tree astronomically larger than its DAG.
    pub fn size(&self) -> u64 {
        fn bits(n: i64) -> u64 {
            1 + (64 - n.unsigned_abs().leading_zeros().min(63)) as u64
        }
        fn constraint_size(c: &Constraint, memo: &mut HashMap<Formula, u64>) -> u64 {
            match c {
                Constraint::True | Constraint::False => 1,
                Constraint::Atom(a) => a
                    .terms
                    .iter()
                    .map(|(k, f)| bits(*k).saturating_add(walk(f, memo)))
                    .fold(bits(a.bound), u64::saturating_add),
                Constraint::Not(x) => constraint_size(x, memo).saturating_add(1),
                Constraint::And(x, y) | Constraint::Or(x, y) => constraint_size(x, memo)
                    .saturating_add(constraint_size(y, memo))
                    .saturating_add(1),
            }
        }
        fn walk(f: &Formula, memo: &mut HashMap<Formula, u64>) -> u64 {
            if let Some(&n) = memo.get(f) {
                return n;
            }
            let n = match f.node() {
                Node::True | Node::False | Node::Atom(_) => 1,
                Node::VarConstraint(a) => a
                    .terms
                    .iter()
                    .map(|(k, _)| bits(*k).saturating_add(1))
                    .fold(bits(a.bound), u64::saturating_add),
                Node::Not(g) | Node::Now(g) => walk(g, memo).saturating_add(1),
                Node::And(a, b) | Node::Or(a, b) => {
                    walk(a, memo).saturating_add(walk(b, memo)).saturating_add(1)
                }
                Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                    let mut n = walk(&u.lhs, memo).saturating_add(walk(&u.rhs, memo)).saturating_add(1);
                    if let Some(c) = &u.constraint {
                        n = n.saturating_add(constraint_size(c, memo));
                    }
                    n
                }
                Node::Bind { counted, body, .. } => {
                    walk(counted, memo).saturating_add(walk(body, memo)).saturating_add(1)
                }
            };
            memo.insert(f.clone(), n);
            n
        }
        walk(self, &mut HashMap::new())
    }

    /// All atomic proposition names occurring anywhere, constraints included.
    pub fn proposition_names(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut visited = HashSet::new();
        fn walk(
            f: &Formula,
            seen: &mut HashSet<String>,
            out: &mut Vec<String>,
            visited: &mut HashSet<Formula>,
        ) {
            if !visited.insert(f.clone()) {
                return;
            }
            match f.node() {
                Node::Atom(p) => {
                    if seen.insert(p.clone()) {
                        out.push(p.clone());
                    }
                }
                Node::True | Node::False | Node::VarConstraint(_) => {}
                Node::Not(g) | Node::Now(g) => walk(g, seen, out, visited),
                Node::And(a, b) | Node::Or(a, b) => {
                    walk(a, seen, out, visited);
                    walk(b, seen, out, visited);
                }
                Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                    walk(&u.lhs, seen, out, visited);
                    walk(&u.rhs, seen, out, visited);
                    if let Some(c) = &u.constraint {
                        for_constraint_formulas(c, &mut |g| walk(g, seen, out, visited));
                    }
                }
                Node::Bind { counted, body, .. } => {
                    walk(counted, seen, out, visited);
                    walk(body, seen, out, visited);
                }
            }
        }
        walk(self, &mut seen, &mut out, &mut visited);
        out
    }
}

/// Calls `f` on every formula embedded in the constraint's atoms.
pub fn for_constraint_formulas(c: &Constraint, f: &mut impl FnMut(&Formula)) {
    match c {
        Constraint::True | Constraint::False => {}
        Constraint::Atom(a) => {
            for (_, g) in &a.terms {
                f(g);
            }
        }
        Constraint::Not(x) => for_constraint_formulas(x, f),
        Constraint::And(x, y) | Constraint::Or(x, y) => {
            for_constraint_formulas(x, f);
            for_constraint_formulas(y, f);
        }
    }
}

/// Flattens the constraint's atoms in left-to-right order.
pub fn constraint_atoms(c: &Constraint) -> Vec<&CountAtom> {
    fn walk<'a>(c: &'a Constraint, out: &mut Vec<&'a CountAtom>) {
        match c {
            Constraint::True | Constraint::False => {}
            Constraint::Atom(a) => out.push(a),
            Constraint::Not(x) => walk(x, out),
            Constraint::And(x, y) | Constraint::Or(x, y) => {
                walk(x, out);
                walk(y, out);
            }
        }
    }
    let mut out = Vec::new();
    walk(c, &mut out);
    out
}

/// Evaluates a constraint given the truth of each atom, in the same
/// left-to-right order as [`constraint_atoms`].
pub fn eval_constraint_with(c: &Constraint, atom_truth: &[bool]) -> bool {
    fn walk(c: &Constraint, truth: &[bool], idx: &mut usize) -> bool {
        match c {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Atom(_) => {
                let v = truth[*idx];
                *idx += 1;
                v
            }
            Constraint::Not(x) => !walk(x, truth, idx),
            Constraint::And(x, y) => {
                let a = walk(x, truth, idx);
                let b = walk(y, truth, idx);
                a && b
            }
            Constraint::Or(x, y) => {
                let a = walk(x, truth, idx);
                let b = walk(y, truth, idx);
                a || b
            }
        }
    }
    let mut idx = 0;
    walk(c, atom_truth, &mut idx)
}

/// True iff the empty prefix satisfies the constraint (every count is 0).
pub fn empty_prefix_satisfies(c: &Constraint) -> bool {
    let truth: Vec<bool> = constraint_atoms(c)
        .iter()
        .map(|a| a.cmp.eval(0, a.bound))
        .collect();
    eval_constraint_with(c, &truth)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("variable `{0}` is bound more than once")]
    DuplicateBinder(String),
    #[error("no variable order exists: binder dependencies are cyclic through `{0}`")]
    CyclicVariableOrder(String),
    #[error("variable term `{0}` inside a counting constraint")]
    VariableInCountingConstraint(String),
    #[error("counted term `#{0}` inside a variable constraint")]
    CountInVariableConstraint(String),
    #[error("atom index {0} out of range")]
    AtomIndexOutOfRange(usize),
    #[error("term index {1} out of range in atom {0}")]
    TermIndexOutOfRange(usize, usize),
    #[error("constant overflow while decrementing atom {0}")]
    DecrOverflow(usize),
    #[error("rewrite requires a fragment without negative coefficients, got {0}")]
    RewriteFragment(String),
    #[error("rewrite does not apply to variable-binding or cumulative formulas")]
    RewriteDialect,
}

/// Collects binder variables in pre-order; errors on duplicates.
pub fn binder_map(f: &Formula) -> Result<HashMap<String, Formula>, FormulaError> {
    fn walk(f: &Formula, map: &mut HashMap<String, Formula>) -> Result<(), FormulaError> {
        match f.node() {
            Node::True | Node::False | Node::Atom(_) | Node::VarConstraint(_) => Ok(()),
            Node::Not(g) | Node::Now(g) => walk(g, map),
            Node::And(a, b) | Node::Or(a, b) => {
                walk(a, map)?;
                walk(b, map)
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                walk(&u.lhs, map)?;
                walk(&u.rhs, map)?;
                let mut err = None;
                if let Some(c) = &u.constraint {
                    for_constraint_formulas(c, &mut |g| {
                        if err.is_none() {
                            err = walk(g, map).err();
                        }
                    });
                }
                match err {
                    Some(e) => Err(e),
                    None => Ok(()),
                }
            }
            Node::Bind { var, counted, body } => {
                if map.insert(var.clone(), counted.clone()).is_some() {
                    return Err(FormulaError::DuplicateBinder(var.clone()));
                }
                walk(counted, map)?;
                walk(body, map)
            }
        }
    }
    let mut map = HashMap::new();
    walk(f, &mut map)?;
    Ok(map)
}

/// All variable names mentioned in `f` (in atoms or binders).
pub fn mentioned_vars(f: &Formula) -> HashSet<String> {
    let mut out = HashSet::new();
    fn walk(f: &Formula, out: &mut HashSet<String>) {
        match f.node() {
            Node::True | Node::False | Node::Atom(_) => {}
            Node::VarConstraint(a) => {
                for (_, z) in &a.terms {
                    out.insert(z.clone());
                }
            }
            Node::Not(g) | Node::Now(g) => walk(g, out),
            Node::And(a, b) | Node::Or(a, b) => {
                walk(a, out);
                walk(b, out);
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                walk(&u.lhs, out);
                walk(&u.rhs, out);
                if let Some(c) = &u.constraint {
                    for_constraint_formulas(c, &mut |g| walk(g, out));
                }
            }
            Node::Bind { var, counted, body } => {
                out.insert(var.clone());
                walk(counted, out);
                walk(body, out);
            }
        }
    }
    walk(f, &mut out);
    out
}

/// Free variable occurrences: atom variables not under their binder.
pub fn free_vars(f: &Formula) -> HashSet<String> {
    fn walk(f: &Formula, scope: &mut Vec<String>, out: &mut HashSet<String>) {
        match f.node() {
            Node::True | Node::False | Node::Atom(_) => {}
            Node::VarConstraint(a) => {
                for (_, z) in &a.terms {
                    if !scope.iter().any(|s| s == z) {
                        out.insert(z.clone());
                    }
                }
            }
            Node::Not(g) | Node::Now(g) => walk(g, scope, out),
            Node::And(a, b) | Node::Or(a, b) => {
                walk(a, scope, out);
                walk(b, scope, out);
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                walk(&u.lhs, scope, out);
                walk(&u.rhs, scope, out);
                if let Some(c) = &u.constraint {
                    for_constraint_formulas(c, &mut |g| walk(g, scope, out));
                }
            }
            Node::Bind { var, counted, body } => {
                // The counted formula sits outside the binder's own scope.
                walk(counted, scope, out);
                scope.push(var.clone());
                walk(body, scope, out);
                scope.pop();
            }
        }
    }
    let mut out = HashSet::new();
    walk(f, &mut Vec::new(), &mut out);
    out
}

/// Well-formedness of the variable-binding dialect: every variable bound at
/// most once, and a strict total order exists in which each binder's formula
/// mentions only smaller variables.
pub fn check_wellformed(f: &Formula) -> Result<(), FormulaError> {
    let binders = binder_map(f)?;
    // Edge z -> z' for every bound z' mentioned by the formula bound to z;
    // an order exists iff this graph is acyclic.
    let mut mark: HashMap<&str, u8> = HashMap::new(); // 1 = visiting, 2 = done
    fn visit<'a>(
        z: &'a str,
        binders: &'a HashMap<String, Formula>,
        mark: &mut HashMap<&'a str, u8>,
    ) -> Result<(), FormulaError> {
        match mark.get(z) {
            Some(1) => return Err(FormulaError::CyclicVariableOrder(z.to_string())),
            Some(2) => return Ok(()),
            _ => {}
        }
        mark.insert(z, 1);
        if let Some(def) = binders.get(z) {
            for dep in mentioned_vars(def) {
                if let Some((key, _)) = binders.get_key_value(dep.as_str()) {
                    visit(key, binders, mark)?;
                }
            }
        }
        mark.insert(z, 2);
        Ok(())
    }
    for z in binders.keys() {
        visit(z, &binders, &mut mark)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FragmentName {
    Ctl,
    Cctl { boolean: bool, unit: bool, negative: bool },
    Cctlv { negative: bool },
    Cctlc { boolean: bool, unit: bool, negative: bool },
}

impl fmt::Display for FragmentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentName::Ctl => write!(f, "CTL"),
            FragmentName::Cctl { boolean, unit, negative } => {
                write!(
                    f,
                    "CCTL{}{}{}",
                    if *boolean { "b" } else { "" },
                    if *negative { "±" } else { "" },
                    if *unit { "1" } else { "" }
                )
            }
            FragmentName::Cctlv { negative } => {
                write!(f, "CCTLv{}", if *negative { "±" } else { "" })
            }
            FragmentName::Cctlc { boolean, unit, negative } => {
                write!(
                    f,
                    "CCTLc{}{}{}",
                    if *boolean { "b" } else { "" },
                    if *negative { "±" } else { "" },
                    if *unit { "1" } else { "" }
                )
            }
        }
    }
}

/// How a decision problem fares on the fragment: solvable by one of the
/// engines here, solvable only pseudo-polynomially (cost chains expanded in
/// unary), or undecidable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionStatus {
    DecidableWithEngine,
    PseudoPolynomial,
    Undecidable,
}

impl fmt::Display for DecisionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionStatus::DecidableWithEngine => write!(f, "decidable-with-engine"),
            DecisionStatus::PseudoPolynomial => write!(f, "pseudo-polynomial"),
            DecisionStatus::Undecidable => write!(f, "undecidable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragmentDescriptor {
    pub fragment: FragmentName,
    pub boolean_constraints: bool,
    pub non_unit_coefficients: bool,
    pub negative_coefficients: bool,
    pub has_counting: bool,
    pub uses_variables: bool,
    pub uses_cumulative: bool,
    pub closed: bool,
    pub mc_status: DecisionStatus,
    pub sat_status: DecisionStatus,
}

/// Least fragment containing the formula, with routing statuses.
///
/// The X-shaped until contributes no counting flags. Mixed formulas (counting
/// constraints together with binder variables) take the variable/cumulative
/// name; every engine rejects them.
pub fn classify_fragment(f: &Formula) -> FragmentDescriptor {
    struct Flags {
        boolean: bool,
        non_unit: bool,
        negative: bool,
        counting: bool,
        vars: bool,
        cumulative: bool,
    }
    fn scan_constraint(c: &Constraint, flags: &mut Flags) {
        flags.counting = true;
        if !matches!(c, Constraint::Atom(_)) {
            flags.boolean = true;
        }
        for a in constraint_atoms(c) {
            for (k, _) in &a.terms {
                if k.unsigned_abs() != 1 {
                    flags.non_unit = true;
                }
                if *k < 0 {
                    flags.negative = true;
                }
            }
        }
    }
    fn walk(f: &Formula, flags: &mut Flags) {
        match f.node() {
            Node::True | Node::False | Node::Atom(_) => {}
            Node::VarConstraint(a) => {
                flags.vars = true;
                for (k, _) in &a.terms {
                    if k.unsigned_abs() != 1 {
                        flags.non_unit = true;
                    }
                    if *k < 0 {
                        flags.negative = true;
                    }
                }
            }
            Node::Not(g) => walk(g, flags),
            Node::Now(g) => {
                flags.cumulative = true;
                walk(g, flags);
            }
            Node::And(a, b) | Node::Or(a, b) => {
                walk(a, flags);
                walk(b, flags);
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                walk(&u.lhs, flags);
                walk(&u.rhs, flags);
                if let Some(c) = &u.constraint {
                    if !is_next_pattern(u) {
                        scan_constraint(c, flags);
                        for_constraint_formulas(c, &mut |g| walk(g, flags));
                    }
                }
            }
            Node::Bind { counted, body, .. } => {
                flags.vars = true;
                walk(counted, flags);
                walk(body, flags);
            }
        }
    }
    let mut flags = Flags {
        boolean: false,
        non_unit: false,
        negative: false,
        counting: false,
        vars: false,
        cumulative: false,
    };
    walk(f, &mut flags);
    let closed = free_vars(f).is_empty();
    let unit = !flags.non_unit;
    let fragment = if flags.cumulative {
        FragmentName::Cctlc { boolean: flags.boolean, unit, negative: flags.negative }
    } else if flags.vars {
        FragmentName::Cctlv { negative: flags.negative }
    } else if flags.counting {
        FragmentName::Cctl { boolean: flags.boolean, unit, negative: flags.negative }
    } else {
        FragmentName::Ctl
    };
    let mc_status = match fragment {
        FragmentName::Ctl => DecisionStatus::DecidableWithEngine,
        FragmentName::Cctl { boolean, unit, negative } => {
            if negative && boolean {
                DecisionStatus::Undecidable
            } else if negative && !unit {
                DecisionStatus::PseudoPolynomial
            } else {
                DecisionStatus::DecidableWithEngine
            }
        }
        FragmentName::Cctlv { negative } | FragmentName::Cctlc { negative, .. } => {
            if negative {
                DecisionStatus::Undecidable
            } else {
                DecisionStatus::DecidableWithEngine
            }
        }
    };
    let sat_status = if flags.negative {
        DecisionStatus::Undecidable
    } else {
        DecisionStatus::DecidableWithEngine
    };
    FragmentDescriptor {
        fragment,
        boolean_constraints: flags.boolean,
        non_unit_coefficients: flags.non_unit,
        negative_coefficients: flags.negative,
        has_counting: flags.counting,
        uses_variables: flags.vars,
        uses_cumulative: flags.cumulative,
        closed,
        mc_status,
        sat_status,
    }
}

/// Rewrites every constrained until into constrained-F form:
/// `E (f U{C} g)` becomes `E (TT U{C & #(!f) = 0} g)`. Untils without a
/// constraint and X-shaped untils stay as they are (both are plain CTL).
///
/// The result lands in the Boolean-constraint closure of the input fragment,
/// so inputs with negative coefficients are rejected (their Boolean closure
/// is not decidable), as are variable-binding and cumulative formulas.
pub fn rewrite_until_to_f(f: &Formula) -> Result<Formula, FormulaError> {
    let desc = classify_fragment(f);
    if desc.negative_coefficients {
        return Err(FormulaError::RewriteFragment(desc.fragment.to_string()));
    }
    if desc.uses_variables || desc.uses_cumulative {
        return Err(FormulaError::RewriteDialect);
    }
    fn map_constraint(c: &Constraint, memo: &mut HashMap<Formula, Formula>) -> Constraint {
        match c {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Atom(a) => Constraint::Atom(CountAtom {
                terms: a.terms.iter().map(|(k, g)| (*k, walk(g, memo))).collect(),
                cmp: a.cmp,
                bound: a.bound,
            }),
            Constraint::Not(x) => Constraint::Not(Box::new(map_constraint(x, memo))),
            Constraint::And(x, y) => Constraint::And(
                Box::new(map_constraint(x, memo)),
                Box::new(map_constraint(y, memo)),
            ),
            Constraint::Or(x, y) => Constraint::Or(
                Box::new(map_constraint(x, memo)),
                Box::new(map_constraint(y, memo)),
            ),
        }
    }
    fn walk(f: &Formula, memo: &mut HashMap<Formula, Formula>) -> Formula {
        if let Some(g) = memo.get(f) {
            return g.clone();
        }
        let out = match f.node() {
            Node::True | Node::False | Node::Atom(_) | Node::VarConstraint(_) => f.clone(),
            Node::Not(g) => Formula::not(walk(g, memo)),
            Node::Now(g) => Formula::now(walk(g, memo)),
            Node::And(a, b) => Formula::and(walk(a, memo), walk(b, memo)),
            Node::Or(a, b) => Formula::or(walk(a, memo), walk(b, memo)),
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                let exists = matches!(f.node(), Node::ExistsUntil(_));
                let lhs = walk(&u.lhs, memo);
                let rhs = walk(&u.rhs, memo);
                let constraint = if is_next_pattern(u) {
                    u.constraint.clone()
                } else {
                    match &u.constraint {
                        None => None,
                        Some(c) => {
                            let guard = Constraint::Atom(CountAtom {
                                terms: vec![(1, Formula::not(lhs.clone()))],
                                cmp: Cmp::Eq,
                                bound: 0,
                            });
                            Some(Constraint::And(Box::new(map_constraint(c, memo)), Box::new(guard)))
                        }
                    }
                };
                let (lhs, rhs) = if constraint.is_some() && !is_next_pattern(u) {
                    (Formula::tt(), rhs)
                } else {
                    (lhs, rhs)
                };
                if exists {
                    Formula::exists_until(lhs, constraint, rhs)
                } else {
                    Formula::forall_until(lhs, constraint, rhs)
                }
            }
            Node::Bind { var, counted, body } => {
                Formula::bind(var.clone(), walk(counted, memo), walk(body, memo))
            }
        };
        memo.insert(f.clone(), out.clone());
        out
    }
    Ok(walk(f, &mut HashMap::new()))
}

/// Subtracts the j-th coefficient of the i-th atom (both 0-based, atoms in
/// left-to-right order) from that atom's constant. Checked arithmetic:
/// overflow is an error, never wraparound.
pub fn constraint_decr(c: &Constraint, i: usize, j: usize) -> Result<Constraint, FormulaError> {
    fn walk(
        c: &Constraint,
        i: usize,
        j: usize,
        idx: &mut usize,
    ) -> Result<Constraint, FormulaError> {
        Ok(match c {
            Constraint::True => Constraint::True,
            Constraint::False => Constraint::False,
            Constraint::Atom(a) => {
                let here = *idx;
                *idx += 1;
                if here == i {
                    let (coeff, _) = a
                        .terms
                        .get(j)
                        .ok_or(FormulaError::TermIndexOutOfRange(i, j))?;
                    let bound = a
                        .bound
                        .checked_sub(*coeff)
                        .ok_or(FormulaError::DecrOverflow(i))?;
                    Constraint::Atom(CountAtom { terms: a.terms.clone(), cmp: a.cmp, bound })
                } else {
                    Constraint::Atom(a.clone())
                }
            }
            Constraint::Not(x) => Constraint::Not(Box::new(walk(x, i, j, idx)?)),
            Constraint::And(x, y) => {
                Constraint::And(Box::new(walk(x, i, j, idx)?), Box::new(walk(y, i, j, idx)?))
            }
            Constraint::Or(x, y) => {
                Constraint::Or(Box::new(walk(x, i, j, idx)?), Box::new(walk(y, i, j, idx)?))
            }
        })
    }
    let mut idx = 0;
    let out = walk(c, i, j, &mut idx)?;
    if i >= idx {
        return Err(FormulaError::AtomIndexOutOfRange(i));
    }
    Ok(out)
}

/// Replaces trivially true/false atoms by constants and folds Boolean
/// constants away. The result is `True`, `False`, or contains neither.
/// An atom is trivial when the sign of every coefficient already decides the
/// comparison (e.g. `S >= 0` or `S > -3` with nonnegative coefficients).
pub fn constraint_simp(c: &Constraint) -> Constraint {
    fn simp_atom(a: &CountAtom) -> Constraint {
        let nonneg = a.terms.iter().all(|(k, _)| *k >= 0);
        let nonpos = a.terms.iter().all(|(k, _)| *k <= 0);
        if nonneg {
            // The sum ranges over [0, +inf).
            match a.cmp {
                Cmp::Ge if a.bound <= 0 => return Constraint::True,
                Cmp::Gt if a.bound < 0 => return Constraint::True,
                Cmp::Lt if a.bound <= 0 => return Constraint::False,
                Cmp::Le if a.bound < 0 => return Constraint::False,
                Cmp::Eq if a.bound < 0 => return Constraint::False,
                _ => {}
            }
        }
        if nonpos {
            // The sum ranges over (-inf, 0].
            match a.cmp {
                Cmp::Le if a.bound >= 0 => return Constraint::True,
                Cmp::Lt if a.bound > 0 => return Constraint::True,
                Cmp::Gt if a.bound >= 0 => return Constraint::False,
                Cmp::Ge if a.bound > 0 => return Constraint::False,
                Cmp::Eq if a.bound > 0 => return Constraint::False,
                _ => {}
            }
        }
        Constraint::Atom(a.clone())
    }
    match c {
        Constraint::True => Constraint::True,
        Constraint::False => Constraint::False,
        Constraint::Atom(a) => simp_atom(a),
        Constraint::Not(x) => match constraint_simp(x) {
            Constraint::True => Constraint::False,
            Constraint::False => Constraint::True,
            Constraint::Not(inner) => *inner,
            other => Constraint::Not(Box::new(other)),
        },
        Constraint::And(x, y) => match (constraint_simp(x), constraint_simp(y)) {
            (Constraint::False, _) | (_, Constraint::False) => Constraint::False,
            (Constraint::True, other) | (other, Constraint::True) => other,
            (a, b) => Constraint::And(Box::new(a), Box::new(b)),
        },
        Constraint::Or(x, y) => match (constraint_simp(x), constraint_simp(y)) {
            (Constraint::True, _) | (_, Constraint::True) => Constraint::True,
            (Constraint::False, other) | (other, Constraint::False) => other,
            (a, b) => Constraint::Or(Box::new(a), Box::new(b)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> Formula {
        Formula::atom(name)
    }

    fn single_atom(terms: Vec<(i64, Formula)>, cmp: Cmp, bound: i64) -> Constraint {
        Constraint::Atom(CountAtom { terms, cmp, bound })
    }

    #[test]
    fn next_pattern_shape() {
        let ex = Formula::ex(p("p"));
        match ex.node() {
            Node::ExistsUntil(u) => assert!(is_next_pattern(u)),
            _ => panic!("EX should normalize to an until"),
        }
    }

    #[test]
    fn classify_plain_boolean_is_ctl() {
        let f = Formula::and(p("p"), Formula::not(p("q")));
        let d = classify_fragment(&f);
        assert_eq!(d.fragment, FragmentName::Ctl);
        assert_eq!(d.mc_status, DecisionStatus::DecidableWithEngine);
    }

    #[test]
    fn classify_next_is_ctl() {
        let d = classify_fragment(&Formula::ex(p("p")));
        assert_eq!(d.fragment, FragmentName::Ctl);
    }

    #[test]
    fn classify_unit_sum_is_cctl1() {
        // E (TT U{#P + #Q = 10} P'')
        let c = single_atom(vec![(1, p("P")), (1, p("Q"))], Cmp::Eq, 10);
        let f = Formula::ef(Some(c), p("P''"));
        let d = classify_fragment(&f);
        assert_eq!(d.fragment, FragmentName::Cctl { boolean: false, unit: true, negative: false });
        assert_eq!(d.mc_status, DecisionStatus::DecidableWithEngine);
        assert_eq!(d.sat_status, DecisionStatus::DecidableWithEngine);
    }

    #[test]
    fn classify_negative_non_unit_is_pm() {
        // EF{#P - 3*#P' = 10} P''
        let c = single_atom(vec![(1, p("P")), (-3, p("P'"))], Cmp::Eq, 10);
        let f = Formula::ef(Some(c), p("P''"));
        let d = classify_fragment(&f);
        assert_eq!(d.fragment, FragmentName::Cctl { boolean: false, unit: false, negative: true });
        assert_eq!(d.mc_status, DecisionStatus::PseudoPolynomial);
        assert_eq!(d.sat_status, DecisionStatus::Undecidable);
    }

    #[test]
    fn classify_boolean_negative_is_undecidable() {
        let a = single_atom(vec![(1, p("P")), (-1, p("Q"))], Cmp::Eq, 0);
        let c = Constraint::Or(Box::new(a.clone()), Box::new(a));
        let f = Formula::ef(Some(c), p("R"));
        let d = classify_fragment(&f);
        assert_eq!(d.mc_status, DecisionStatus::Undecidable);
    }

    #[test]
    fn classify_bind_is_cctlv() {
        let f = Formula::bind("z", p("P"), Formula::var_constraint(vec![(1, "z".into())], Cmp::Ge, 2));
        let d = classify_fragment(&f);
        assert_eq!(d.fragment, FragmentName::Cctlv { negative: false });
        assert!(d.closed);
    }

    #[test]
    fn free_vars_spot_open_formulas() {
        let open = Formula::var_constraint(vec![(1, "z".into())], Cmp::Ge, 1);
        assert!(!classify_fragment(&open).closed);
        assert_eq!(free_vars(&open).len(), 1);
    }

    #[test]
    fn wellformed_rejects_double_binding() {
        let inner = Formula::bind("z", p("Q"), p("R"));
        let f = Formula::bind("z", p("P"), inner);
        assert_eq!(check_wellformed(&f), Err(FormulaError::DuplicateBinder("z".into())));
    }

    #[test]
    fn wellformed_rejects_cyclic_order() {
        // z counts a formula mentioning w, and w counts a formula mentioning z.
        let zc = Formula::var_constraint(vec![(1, "w".into())], Cmp::Ge, 1);
        let wc = Formula::var_constraint(vec![(1, "z".into())], Cmp::Ge, 1);
        let f = Formula::bind("z", zc, Formula::bind("w", wc, p("P")));
        assert!(matches!(check_wellformed(&f), Err(FormulaError::CyclicVariableOrder(_))));
    }

    #[test]
    fn decr_subtracts_one_coefficient() {
        let c = single_atom(vec![(1, p("p1")), (1, p("p2"))], Cmp::Eq, 2);
        let d = constraint_decr(&c, 0, 0).unwrap();
        match d {
            Constraint::Atom(a) => assert_eq!(a.bound, 1),
            _ => panic!(),
        }
        assert!(constraint_decr(&c, 1, 0).is_err());
        assert!(constraint_decr(&c, 0, 2).is_err());
    }

    #[test]
    fn simp_folds_trivial_atoms() {
        let t = single_atom(vec![(1, p("p"))], Cmp::Ge, 0);
        assert_eq!(constraint_simp(&t), Constraint::True);
        let f = single_atom(vec![(1, p("p")), (2, p("q"))], Cmp::Eq, -1);
        assert_eq!(constraint_simp(&f), Constraint::False);
        let or = Constraint::Or(
            Box::new(single_atom(vec![(1, p("p"))], Cmp::Eq, 1)),
            Box::new(f),
        );
        assert_eq!(constraint_simp(&or), single_atom(vec![(1, p("p"))], Cmp::Eq, 1));
        let neg = single_atom(vec![(-2, p("p"))], Cmp::Le, 0);
        assert_eq!(constraint_simp(&neg), Constraint::True);
    }

    #[test]
    fn simp_untouched_atoms_survive() {
        let a = single_atom(vec![(1, p("p")), (-1, p("q"))], Cmp::Ge, 0);
        assert_eq!(constraint_simp(&a), a);
    }

    #[test]
    fn rewrite_moves_lhs_into_constraint() {
        let c = single_atom(vec![(1, p("q"))], Cmp::Le, 2);
        let f = Formula::exists_until(p("a"), Some(c.clone()), p("b"));
        let r = rewrite_until_to_f(&f).unwrap();
        match r.node() {
            Node::ExistsUntil(u) => {
                assert!(u.lhs.is_true());
                match u.constraint.as_ref().unwrap() {
                    Constraint::And(l, g) => {
                        assert_eq!(**l, c);
                        match &**g {
                            Constraint::Atom(a) => {
                                assert_eq!(a.terms.len(), 1);
                                assert_eq!(a.terms[0].1, Formula::not(p("a")));
                                assert_eq!((a.cmp, a.bound), (Cmp::Eq, 0));
                            }
                            _ => panic!(),
                        }
                    }
                    _ => panic!(),
                }
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rewrite_keeps_top_guard_for_true_lhs() {
        // E (TT U{C} psi) gains a vacuous #FF = 0 conjunct, same meaning.
        let c = single_atom(vec![(1, p("q"))], Cmp::Le, 2);
        let f = Formula::ef(Some(c), p("b"));
        let r = rewrite_until_to_f(&f).unwrap();
        match r.node() {
            Node::ExistsUntil(u) => match u.constraint.as_ref().unwrap() {
                Constraint::And(_, g) => match &**g {
                    Constraint::Atom(a) => assert!(a.terms[0].1.is_false()),
                    _ => panic!(),
                },
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn rewrite_rejects_negative_and_dialects() {
        let c = single_atom(vec![(-1, p("q"))], Cmp::Le, 2);
        assert!(rewrite_until_to_f(&Formula::ef(Some(c), p("b"))).is_err());
        assert!(rewrite_until_to_f(&Formula::now(p("b"))).is_err());
    }

    #[test]
    fn dag_size_shares_structure() {
        let shared = Formula::ef(None, p("p"));
        let f = Formula::and(shared.clone(), Formula::or(shared.clone(), p("q")));
        // Distinct: f, and-children (shared EF, or), or-children (shared EF
        // dedups, q), p, TT? EF has lhs TT.
        assert_eq!(f.dag_size(), 6);
    }

    #[test]
    fn empty_prefix_evaluation() {
        let c = single_atom(vec![(1, p("p"))], Cmp::Eq, 0);
        assert!(empty_prefix_satisfies(&c));
        let c2 = single_atom(vec![(1, p("p"))], Cmp::Ge, 1);
        assert!(!empty_prefix_satisfies(&c2));
    }
}
