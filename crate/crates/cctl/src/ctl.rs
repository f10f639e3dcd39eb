//! Plain branching-time checking: bitset state sets, the labeling-table
//! model checker, and tableau satisfiability with witness extraction.

use std::collections::HashMap;
use std::fmt;

use crate::formula::{classify_fragment, is_next_pattern, Formula, FragmentName, Node};
use crate::model::{KripkeStructure, KsBuilder};

// ---------------------------------------------------------------------------
// State sets

/// Fixed-capacity bitset over state indices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct StateSet {
    n: usize,
    words: Vec<u64>,
}

impl StateSet {
    pub fn new(n: usize) -> Self {
        StateSet { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = StateSet::new(n);
        s.insert_all();
        s
    }

    pub fn domain_size(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.words[i >> 6] |= 1 << (i & 63);
    }

    pub fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    pub fn insert_all(&mut self) {
        for w in &mut self.words {
            *w = !0;
        }
        self.trim();
    }

    pub fn clear(&mut self) {
        for w in &mut self.words {
            *w = 0;
        }
    }

    // Clears the unused bits of the last word so that equality, counting and
    // inversion stay exact.
    fn trim(&mut self) {
        let tail = self.n & 63;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn union_with(&mut self, other: &StateSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let next = *a | b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    pub fn intersect_with(&mut self, other: &StateSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let next = *a & b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    pub fn subtract(&mut self, other: &StateSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        let mut changed = false;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            let next = *a & !b;
            changed |= next != *a;
            *a = next;
        }
        changed
    }

    pub fn inverted(&self) -> StateSet {
        let mut out = self.clone();
        for w in &mut out.words {
            *w = !*w;
        }
        out.trim();
        out
    }

    pub fn intersects(&self, other: &StateSet) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn first(&self) -> Option<usize> {
        for (wi, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some((wi << 6) + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// First element of `self & other` without materializing it.
    pub fn first_common(&self, other: &StateSet) -> Option<usize> {
        for (wi, (a, b)) in self.words.iter().zip(&other.words).enumerate() {
            let w = a & b;
            if w != 0 {
                return Some((wi << 6) + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub fn iter(&self) -> StateSetIter<'_> {
        StateSetIter { set: self, word: 0, bits: self.words.first().copied().unwrap_or(0) }
    }
}

pub struct StateSetIter<'a> {
    set: &'a StateSet,
    word: usize,
    bits: u64,
}

impl Iterator for StateSetIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.bits != 0 {
                let b = self.bits.trailing_zeros() as usize;
                self.bits &= self.bits - 1;
                return Some((self.word << 6) + b);
            }
            self.word += 1;
            if self.word >= self.set.words.len() {
                return None;
            }
            self.bits = self.set.words[self.word];
        }
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

// ---------------------------------------------------------------------------
// Model checking

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CtlError {
    #[error("formula is not plain branching-time (classified as {0})")]
    NotPlainCtl(String),
    #[error("satisfiability needs {atoms} decision atoms, over the cap of {cap} (2^{cap} candidate sets)")]
    AtomBudget { atoms: usize, cap: usize },
}

/// Result of a model-checking run: one state set per distinct subformula.
pub struct LabelingTable {
    n: usize,
    sets: HashMap<Formula, StateSet>,
}

impl LabelingTable {
    pub(crate) fn from_sets(n: usize, sets: HashMap<Formula, StateSet>) -> Self {
        LabelingTable { n, sets }
    }

    pub fn set(&self, f: &Formula) -> Option<&StateSet> {
        self.sets.get(f)
    }

    pub fn holds(&self, f: &Formula, state: usize) -> bool {
        self.sets.get(f).is_some_and(|s| s.contains(state))
    }

    pub fn n_states(&self) -> usize {
        self.n
    }
}

/// States with at least one successor in `z`.
pub fn pre_exists(ks: &KripkeStructure, z: &StateSet) -> StateSet {
    let mut out = StateSet::new(ks.n_states());
    for s in 0..ks.n_states() {
        if ks.succ(s).iter().any(|&d| z.contains(d)) {
            out.insert(s);
        }
    }
    out
}

/// States all of whose successors are in `z` (structures are total, so this
/// is the usual universal next).
pub fn pre_forall(ks: &KripkeStructure, z: &StateSet) -> StateSet {
    let mut out = StateSet::new(ks.n_states());
    for s in 0..ks.n_states() {
        if ks.succ(s).iter().all(|&d| z.contains(d)) {
            out.insert(s);
        }
    }
    out
}

/// Least fixpoint of `Z = rhs | (lhs & EX Z)` by backward propagation.
pub fn eu_set(ks: &KripkeStructure, lhs: &StateSet, rhs: &StateSet) -> StateSet {
    let mut z = rhs.clone();
    let mut stack: Vec<usize> = z.iter().collect();
    while let Some(s) = stack.pop() {
        for &p in ks.pred(s) {
            if !z.contains(p) && lhs.contains(p) {
                z.insert(p);
                stack.push(p);
            }
        }
    }
    z
}

/// Least fixpoint of `Z = rhs | (lhs & AX Z)` by successor counting.
pub fn au_set(ks: &KripkeStructure, lhs: &StateSet, rhs: &StateSet) -> StateSet {
    let n = ks.n_states();
    let mut remaining: Vec<usize> = (0..n).map(|s| ks.succ(s).len()).collect();
    let mut z = rhs.clone();
    let mut stack: Vec<usize> = z.iter().collect();
    while let Some(s) = stack.pop() {
        for &p in ks.pred(s) {
            remaining[p] -= 1;
            if remaining[p] == 0 && !z.contains(p) && lhs.contains(p) {
                z.insert(p);
                stack.push(p);
            }
        }
    }
    z
}

fn eval_ctl(ks: &KripkeStructure, f: &Formula, memo: &mut HashMap<Formula, StateSet>) -> StateSet {
    if let Some(s) = memo.get(f) {
        return s.clone();
    }
    let n = ks.n_states();
    let set = match f.node() {
        Node::True => StateSet::full(n),
        Node::False => StateSet::new(n),
        Node::Atom(p) => {
            let mut s = StateSet::new(n);
            for q in 0..n {
                if ks.has_prop(q, p) {
                    s.insert(q);
                }
            }
            s
        }
        Node::Not(g) => eval_ctl(ks, g, memo).inverted(),
        Node::And(a, b) => {
            let mut s = eval_ctl(ks, a, memo);
            s.intersect_with(&eval_ctl(ks, b, memo));
            s
        }
        Node::Or(a, b) => {
            let mut s = eval_ctl(ks, a, memo);
            s.union_with(&eval_ctl(ks, b, memo));
            s
        }
        Node::ExistsUntil(u) => {
            let rhs = eval_ctl(ks, &u.rhs, memo);
            if is_next_pattern(u) {
                pre_exists(ks, &rhs)
            } else {
                debug_assert!(u.constraint.is_none());
                let lhs = eval_ctl(ks, &u.lhs, memo);
                eu_set(ks, &lhs, &rhs)
            }
        }
        Node::ForallUntil(u) => {
            let rhs = eval_ctl(ks, &u.rhs, memo);
            if is_next_pattern(u) {
                pre_forall(ks, &rhs)
            } else {
                debug_assert!(u.constraint.is_none());
                let lhs = eval_ctl(ks, &u.lhs, memo);
                au_set(ks, &lhs, &rhs)
            }
        }
        Node::Bind { .. } | Node::VarConstraint(_) | Node::Now(_) => {
            unreachable!("fragment check lets only plain formulas in")
        }
    };
    memo.insert(f.clone(), set.clone());
    set
}

/// Labels every state with every subformula. Propositions missing from the
/// model are false everywhere.
pub fn mc_ctl(ks: &KripkeStructure, f: &Formula) -> Result<LabelingTable, CtlError> {
    let d = classify_fragment(f);
    if d.fragment != FragmentName::Ctl {
        return Err(CtlError::NotPlainCtl(d.fragment.to_string()));
    }
    let mut memo = HashMap::new();
    eval_ctl(ks, f, &mut memo);
    Ok(LabelingTable { n: ks.n_states(), sets: memo })
}

/// The set of states satisfying `f`.
pub fn mc_ctl_states(ks: &KripkeStructure, f: &Formula) -> Result<StateSet, CtlError> {
    let table = mc_ctl(ks, f)?;
    Ok(table.sets[f].clone())
}

// ---------------------------------------------------------------------------
// Satisfiability
//
// Decision atoms are the propositions plus one step atom per modality:
// `(E, g)` for an existential next obligation (either a next operator on g,
// or the continuation of an existential until g itself), `(A, h)` for the
// universal mirror. A candidate state is a truth assignment to these atoms;
// the truth of every closure formula is *derived* from an assignment via the
// usual expansions
//
//     E (a U b)  =  b | (a & <(E, self)>)
//     A (a U b)  =  b | (a & <(A, self)>)
//
// Assignment H steps to H' when H's false existential atoms stay false at H'
// and its true universal atoms stay true. Candidates are then deleted until
// stable:
//
//   nosucc:   H has no surviving successor;
//   ewitness: a true (E, g) atom has no surviving successor deriving g;
//   awitness: a false (A, h) atom has no surviving successor refuting h;
//   eu:       an existential until derived true is not fulfilled — no
//             surviving a-chain to a b-state;
//   au:       a universal until derived true is outside the least fixpoint F
//             built from b-states by adding H when every step obligation of
//             H can pick its witness inside F.
//
// The au rule is the one that makes universal eventualities honest: rank in
// F bounds the number of steps every extracted path needs to reach b, which
// a plain reachability check cannot promise.
//
// A surviving assignment deriving the input formula yields a witness: states
// are (assignment, eventuality index) pairs, where the index is a
// round-robin focus; the focused eventuality, when pending, drives successor
// choice down its rank so that it is really fulfilled; all other obligations
// get their witnesses alongside and hand the focus on. The witness is then
// re-model-checked, so a satisfiable verdict is self-certifying.

pub const DEFAULT_SAT_ATOM_CAP: usize = 14;

#[derive(Debug)]
pub enum CtlSat {
    Satisfiable { model: KripkeStructure, state: usize },
    Unsatisfiable,
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum ElemAtom {
    Prop(String),
    Step { universal: bool, target: Formula },
}

/// Distinct subformulas, children before parents, constraints skipped (plain
/// formulas only carry the next-pattern constraint, which holds no atoms).
fn closure(f: &Formula) -> Vec<Formula> {
    fn walk(f: &Formula, seen: &mut HashMap<Formula, ()>, out: &mut Vec<Formula>) {
        if seen.contains_key(f) {
            return;
        }
        seen.insert(f.clone(), ());
        match f.node() {
            Node::True | Node::False | Node::Atom(_) => {}
            Node::Not(g) => walk(g, seen, out),
            Node::And(a, b) | Node::Or(a, b) => {
                walk(a, seen, out);
                walk(b, seen, out);
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                walk(&u.lhs, seen, out);
                walk(&u.rhs, seen, out);
            }
            Node::Bind { .. } | Node::VarConstraint(_) | Node::Now(_) => {
                unreachable!("fragment check lets only plain formulas in")
            }
        }
        out.push(f.clone());
    }
    let mut out = Vec::new();
    walk(f, &mut HashMap::new(), &mut out);
    out
}

struct Tableau {
    n: usize,
    atoms: Vec<ElemAtom>,
    /// Derived truth of each closure formula over all assignments.
    val: HashMap<Formula, StateSet>,
    succ: Vec<StateSet>,
    alive: StateSet,
    /// Non-next untils in closure order; the eventualities.
    eventualities: Vec<Formula>,
    /// Fulfillment rank per eventuality (`u32::MAX` = unfulfilled), aligned
    /// with `eventualities`; recomputed every pruning round.
    ranks: Vec<Vec<u32>>,
}

fn atom_pattern(n: usize, bit: usize) -> StateSet {
    let mut s = StateSet::new(n);
    for h in 0..n {
        if (h >> bit) & 1 == 1 {
            s.insert(h);
        }
    }
    s
}

fn build_tableau(f: &Formula, atom_cap: usize) -> Result<Tableau, CtlError> {
    let cl = closure(f);
    let mut atoms: Vec<ElemAtom> = Vec::new();
    let mut atom_ix: HashMap<ElemAtom, usize> = HashMap::new();
    let mut add_atom = |a: ElemAtom, atoms: &mut Vec<ElemAtom>| {
        if let Some(&i) = atom_ix.get(&a) {
            i
        } else {
            let i = atoms.len();
            atom_ix.insert(a.clone(), i);
            atoms.push(a);
            i
        }
    };
    // Two passes keep atom indices stable before sizing the assignment space.
    for g in &cl {
        match g.node() {
            Node::Atom(p) => {
                add_atom(ElemAtom::Prop(p.clone()), &mut atoms);
            }
            Node::ExistsUntil(u) => {
                let target = if is_next_pattern(u) { u.rhs.clone() } else { g.clone() };
                add_atom(ElemAtom::Step { universal: false, target }, &mut atoms);
            }
            Node::ForallUntil(u) => {
                let target = if is_next_pattern(u) { u.rhs.clone() } else { g.clone() };
                add_atom(ElemAtom::Step { universal: true, target }, &mut atoms);
            }
            _ => {}
        }
    }
    if atoms.len() > atom_cap {
        return Err(CtlError::AtomBudget { atoms: atoms.len(), cap: atom_cap });
    }
    let n = 1usize << atoms.len();

    let step_ix = |universal: bool, target: &Formula| -> usize {
        atoms
            .iter()
            .position(|a| matches!(a, ElemAtom::Step { universal: u2, target: t } if *u2 == universal && t == target))
            .expect("step atom registered above")
    };

    let mut val: HashMap<Formula, StateSet> = HashMap::new();
    for g in &cl {
        let set = match g.node() {
            Node::True => StateSet::full(n),
            Node::False => StateSet::new(n),
            Node::Atom(p) => {
                let j = atoms
                    .iter()
                    .position(|a| matches!(a, ElemAtom::Prop(q) if q == p))
                    .expect("prop atom registered above");
                atom_pattern(n, j)
            }
            Node::Not(x) => val[x].inverted(),
            Node::And(a, b) => {
                let mut s = val[a].clone();
                s.intersect_with(&val[b]);
                s
            }
            Node::Or(a, b) => {
                let mut s = val[a].clone();
                s.union_with(&val[b]);
                s
            }
            Node::ExistsUntil(u) | Node::ForallUntil(u) => {
                let universal = matches!(g.node(), Node::ForallUntil(_));
                if is_next_pattern(u) {
                    atom_pattern(n, step_ix(universal, &u.rhs))
                } else {
                    let mut cont = val[&u.lhs].clone();
                    cont.intersect_with(&atom_pattern(n, step_ix(universal, g)));
                    cont.union_with(&val[&u.rhs]);
                    cont
                }
            }
            _ => unreachable!(),
        };
        val.insert(g.clone(), set);
    }

    // Step relation: assignment-indexed masks over the shared val sets.
    let inv: Vec<Option<StateSet>> = atoms
        .iter()
        .map(|a| match a {
            ElemAtom::Step { universal: false, target } => Some(val[target].inverted()),
            _ => None,
        })
        .collect();
    let succ: Vec<StateSet> = crate::par::map_indexed(n, |h| {
        let mut mask = StateSet::full(n);
        for (j, a) in atoms.iter().enumerate() {
            match a {
                ElemAtom::Prop(_) => {}
                ElemAtom::Step { universal: false, target: _ } => {
                    if (h >> j) & 1 == 0 {
                        mask.intersect_with(inv[j].as_ref().expect("built above"));
                    }
                }
                ElemAtom::Step { universal: true, target } => {
                    if (h >> j) & 1 == 1 {
                        mask.intersect_with(&val[target]);
                    }
                }
            }
        }
        mask
    });

    let eventualities: Vec<Formula> = cl
        .iter()
        .filter(|g| match g.node() {
            Node::ExistsUntil(u) | Node::ForallUntil(u) => !is_next_pattern(u),
            _ => false,
        })
        .cloned()
        .collect();
    let ranks = vec![Vec::new(); eventualities.len()];

    Ok(Tableau { n, atoms, val, succ, alive: StateSet::full(n), eventualities, ranks })
}

impl Tableau {
    fn until_parts(ev: &Formula) -> (&Formula, &Formula, bool) {
        match ev.node() {
            Node::ExistsUntil(u) => (&u.lhs, &u.rhs, false),
            Node::ForallUntil(u) => (&u.lhs, &u.rhs, true),
            _ => unreachable!(),
        }
    }

    /// One pass of the local rules; true when something was deleted.
    fn prune_local(&mut self) -> bool {
        let mut doomed = Vec::new();
        'next_h: for h in self.alive.iter() {
            if self.succ[h].first_common(&self.alive).is_none() {
                doomed.push(h);
                continue;
            }
            for (j, a) in self.atoms.iter().enumerate() {
                if let ElemAtom::Step { universal, target } = a {
                    let bit = (h >> j) & 1 == 1;
                    // true (E, g) needs a witness; false (A, h) needs a
                    // refuting successor.
                    let (needs, want_true) = if *universal { (!bit, false) } else { (bit, true) };
                    if !needs {
                        continue;
                    }
                    let tv = &self.val[target];
                    let found = self.succ[h]
                        .iter()
                        .any(|s| self.alive.contains(s) && tv.contains(s) == want_true);
                    if !found {
                        doomed.push(h);
                        continue 'next_h;
                    }
                }
            }
        }
        let changed = !doomed.is_empty();
        for h in doomed {
            self.alive.remove(h);
        }
        changed
    }

    /// Recomputes fulfillment ranks for eventuality `ei` over the current
    /// alive set and deletes assignments that derive it but cannot fulfill
    /// it; true when something was deleted.
    fn prune_eventuality(&mut self, ei: usize) -> bool {
        let ev = self.eventualities[ei].clone();
        let (lhs, rhs, universal) = Self::until_parts(&ev);
        let mut rank = vec![u32::MAX; self.n];
        let mut fulfilled = self.val[rhs].clone();
        fulfilled.intersect_with(&self.alive);
        for h in fulfilled.iter() {
            rank[h] = 0;
        }
        let lhs_val = self.val[lhs].clone();
        let ev_val = self.val[&ev].clone();
        let mut level = 0u32;
        loop {
            level += 1;
            let mut added = Vec::new();
            for h in self.alive.iter() {
                if rank[h] != u32::MAX || !lhs_val.contains(h) {
                    continue;
                }
                if !universal && !ev_val.contains(h) {
                    continue;
                }
                let ok = if universal {
                    self.au_step_ok(h, &fulfilled)
                } else {
                    self.succ[h].first_common(&fulfilled).is_some()
                };
                if ok {
                    added.push(h);
                }
            }
            if added.is_empty() {
                break;
            }
            for h in added {
                rank[h] = level;
                fulfilled.insert(h);
            }
        }
        let mut doomed = ev_val;
        doomed.intersect_with(&self.alive);
        doomed.subtract(&fulfilled);
        let changed = !doomed.is_empty();
        for h in doomed.iter() {
            self.alive.remove(h);
        }
        self.ranks[ei] = rank;
        changed
    }

    /// Every step obligation of `h` must find its witness inside `pool`
    /// (universal untils must shrink toward fulfillment on all branches, so
    /// every chosen successor has to sit strictly below in rank).
    fn au_step_ok(&self, h: usize, pool: &StateSet) -> bool {
        if self.succ[h].first_common(pool).is_none() {
            return false;
        }
        for (j, a) in self.atoms.iter().enumerate() {
            if let ElemAtom::Step { universal, target } = a {
                let bit = (h >> j) & 1 == 1;
                let (needs, want_true) = if *universal { (!bit, false) } else { (bit, true) };
                if !needs {
                    continue;
                }
                let tv = &self.val[target];
                let found = self.succ[h]
                    .iter()
                    .any(|s| pool.contains(s) && tv.contains(s) == want_true);
                if !found {
                    return false;
                }
            }
        }
        true
    }

    fn prune(&mut self) {
        loop {
            let mut changed = self.prune_local();
            for ei in 0..self.eventualities.len() {
                changed |= self.prune_eventuality(ei);
            }
            if !changed {
                break;
            }
        }
        // Ranks must describe the final alive set for extraction.
        for ei in 0..self.eventualities.len() {
            self.prune_eventuality(ei);
        }
    }

    fn props_of(&self, h: usize) -> Vec<&str> {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(j, a)| match a {
                ElemAtom::Prop(p) if (h >> j) & 1 == 1 => Some(p.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Witnesses for the step obligations of `h`, restricted to `pool`.
    fn obligation_witnesses(&self, h: usize, pool: &StateSet) -> Vec<usize> {
        let mut out = Vec::new();
        for (j, a) in self.atoms.iter().enumerate() {
            if let ElemAtom::Step { universal, target } = a {
                let bit = (h >> j) & 1 == 1;
                let (needs, want_true) = if *universal { (!bit, false) } else { (bit, true) };
                if !needs {
                    continue;
                }
                let tv = &self.val[target];
                let w = self.succ[h]
                    .iter()
                    .find(|&s| pool.contains(s) && tv.contains(s) == want_true)
                    .expect("pruning guaranteed a witness");
                out.push(w);
            }
        }
        out
    }

    /// Builds the model reachable from assignment `h0`.
    fn extract(&self, h0: usize) -> (KripkeStructure, usize) {
        let m = self.eventualities.len().max(1);
        let pending: Vec<StateSet> = self
            .eventualities
            .iter()
            .map(|ev| {
                let (_, rhs, _) = Self::until_parts(ev);
                let mut p = self.val[ev].clone();
                p.subtract(&self.val[rhs]);
                p.intersect_with(&self.alive);
                p
            })
            .collect();

        let mut b = KsBuilder::new();
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue: Vec<(usize, usize)> = Vec::new();
        let intern = |key: (usize, usize),
                          b: &mut KsBuilder,
                          queue: &mut Vec<(usize, usize)>,
                          ids: &mut HashMap<(usize, usize), usize>|
         -> usize {
            if let Some(&id) = ids.get(&key) {
                return id;
            }
            let id = b
                .state(format!("s{}", ids.len()), self.props_of(key.0))
                .expect("fresh names");
            ids.insert(key, id);
            queue.push(key);
            id
        };
        let root = intern((h0, 0), &mut b, &mut queue, &mut ids);
        let mut qi = 0;
        while qi < queue.len() {
            let (h, fi) = queue[qi];
            qi += 1;
            let src = ids[&(h, fi)];
            let next_fi = (fi + 1) % m;
            let mut targets: Vec<(usize, usize)> = Vec::new();
            if !self.eventualities.is_empty() && pending[fi].contains(h) {
                let rank = &self.ranks[fi];
                debug_assert!(rank[h] != u32::MAX && rank[h] > 0);
                let below: StateSet = {
                    let mut s = StateSet::new(self.n);
                    for x in self.alive.iter() {
                        if rank[x] < rank[h] {
                            s.insert(x);
                        }
                    }
                    s
                };
                let (_, _, universal) = Self::until_parts(&self.eventualities[fi]);
                if universal {
                    // Everything stays focused and strictly descends.
                    for w in self.obligation_witnesses(h, &below) {
                        targets.push((w, fi));
                    }
                    if targets.is_empty() {
                        let w = self.succ[h].first_common(&below).expect("rank witness");
                        targets.push((w, fi));
                    }
                } else {
                    // One designated successor descends; the other
                    // obligations advance the focus.
                    let w = self.succ[h].first_common(&below).expect("rank witness");
                    targets.push((w, fi));
                    for w in self.obligation_witnesses(h, &self.alive) {
                        targets.push((w, next_fi));
                    }
                }
            } else {
                let mut ws = self.obligation_witnesses(h, &self.alive);
                if ws.is_empty() {
                    ws.push(self.succ[h].first_common(&self.alive).expect("totality"));
                }
                for w in ws {
                    targets.push((w, next_fi));
                }
            }
            for key in targets {
                let dst = intern(key, &mut b, &mut queue, &mut ids);
                b.edge(src, dst);
            }
        }
        let ks = b.build().expect("extraction keeps totality");
        (ks, root)
    }
}

/// Drops states one at a time (highest index first) while the structure
/// stays total and the verdict at the initial state survives.
fn minimize_witness(model: KripkeStructure, init: usize, f: &Formula) -> (KripkeStructure, usize) {
    let names: Vec<String> = (0..model.n_states()).map(|s| model.name(s).to_string()).collect();
    let mut keep: Vec<bool> = vec![true; model.n_states()];
    let rebuild = |keep: &[bool], names: &[String]| -> Option<(KripkeStructure, usize)> {
        let mut b = KsBuilder::new();
        let mut map: HashMap<usize, usize> = HashMap::new();
        for s in 0..model.n_states() {
            if keep[s] {
                let id = b.state(names[s].clone(), model.props(s).iter().map(String::as_str)).ok()?;
                map.insert(s, id);
            }
        }
        for s in 0..model.n_states() {
            if !keep[s] {
                continue;
            }
            for &d in model.succ(s) {
                if keep[d] {
                    b.edge(map[&s], map[&d]);
                }
            }
        }
        let init2 = *map.get(&init)?;
        b.init(init2);
        b.build().ok().map(|ks| (ks, init2))
    };
    let mut best = rebuild(&keep, &names).expect("identity rebuild");
    for s in (0..model.n_states()).rev() {
        if s == init {
            continue;
        }
        keep[s] = false;
        match rebuild(&keep, &names) {
            Some((ks, i2))
                if mc_ctl_states(&ks, f).map(|set| set.contains(i2)).unwrap_or(false) =>
            {
                best = (ks, i2);
            }
            _ => {
                keep[s] = true;
            }
        }
    }
    best
}

/// Decides satisfiability of a plain branching-time formula; a positive
/// answer carries a model that has been re-checked against the input.
pub fn sat_ctl(f: &Formula, atom_cap: usize) -> Result<CtlSat, CtlError> {
    let d = classify_fragment(f);
    if d.fragment != FragmentName::Ctl {
        return Err(CtlError::NotPlainCtl(d.fragment.to_string()));
    }
    let mut tab = build_tableau(f, atom_cap)?;
    tab.prune();
    let mut seeds = tab.val[f].clone();
    seeds.intersect_with(&tab.alive);
    let Some(h0) = seeds.first() else {
        return Ok(CtlSat::Unsatisfiable);
    };
    let (model, root) = tab.extract(h0);
    let holds = mc_ctl_states(&model, f).expect("extracted model is checkable").contains(root);
    assert!(holds, "internal error: extracted structure fails its own formula");
    let (model, root) = if model.n_states() <= 400 {
        minimize_witness(model, root, f)
    } else {
        (model, root)
    };
    Ok(CtlSat::Satisfiable { model, state: root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::model::{parse_model, Model};

    fn ks(text: &str) -> KripkeStructure {
        match parse_model(text).unwrap() {
            Model::Kripke(ks) => ks,
            _ => panic!("expected unweighted"),
        }
    }

    fn holds(ks: &KripkeStructure, state: &str, f: &str) -> bool {
        let f = parse_formula(f).unwrap();
        let set = mc_ctl_states(ks, &f).unwrap();
        set.contains(ks.state_index(state).unwrap())
    }

    const LINEAR: &str = "
        state a : p
        state b : p
        state c : q
        a -> b
        b -> c
        c -> c
    ";

    #[test]
    fn stateset_ops() {
        let mut s = StateSet::new(70);
        s.insert(0);
        s.insert(65);
        s.insert(69);
        assert_eq!(s.len(), 3);
        assert!(s.contains(65) && !s.contains(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 65, 69]);
        let inv = s.inverted();
        assert_eq!(inv.len(), 67);
        assert!(!inv.contains(65));
        let mut t = StateSet::new(70);
        t.insert(65);
        assert!(s.intersects(&t));
        assert!(t.is_subset_of(&s));
        assert_eq!(s.first(), Some(0));
        assert_eq!(t.first_common(&s), Some(65));
        let full = StateSet::full(70);
        assert_eq!(full.len(), 70);
    }

    #[test]
    fn mc_basics() {
        let m = ks(LINEAR);
        assert!(holds(&m, "a", "EX p"));
        assert!(holds(&m, "b", "EX q"));
        assert!(!holds(&m, "a", "EX q"));
        assert!(holds(&m, "a", "E (p U q)"));
        assert!(holds(&m, "a", "A (p U q)"));
        assert!(holds(&m, "a", "EF q"));
        assert!(holds(&m, "a", "AF q"));
        assert!(!holds(&m, "a", "EG p"));
        assert!(holds(&m, "c", "AG q"));
        assert!(holds(&m, "a", "AX (p & EX q)"));
    }

    #[test]
    fn mc_branching() {
        let m = ks("
            state a : p
            state b : p
            state c : q
            a -> b c
            b -> b
            c -> c
        ");
        assert!(holds(&m, "a", "EF q"));
        assert!(!holds(&m, "a", "AF q"));
        assert!(holds(&m, "a", "EG p"));
        assert!(!holds(&m, "a", "AG p"));
        assert!(holds(&m, "a", "E (p U q)"));
        assert!(!holds(&m, "a", "A (p U q)"));
    }

    #[test]
    fn mc_rejects_counting() {
        let m = ks(LINEAR);
        let f = parse_formula("EF{#p = 2} q").unwrap();
        assert!(matches!(mc_ctl(&m, &f), Err(CtlError::NotPlainCtl(_))));
    }

    fn sat(src: &str) -> CtlSat {
        sat_ctl(&parse_formula(src).unwrap(), DEFAULT_SAT_ATOM_CAP).unwrap()
    }

    #[test]
    fn sat_simple() {
        assert!(matches!(sat("P"), CtlSat::Satisfiable { .. }));
        assert!(matches!(sat("TT"), CtlSat::Satisfiable { .. }));
        assert!(matches!(sat("FF"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("P & !P"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("EX P & AX !P"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("EX (P & !Q)"), CtlSat::Satisfiable { .. }));
    }

    #[test]
    fn sat_eventuality_conflicts() {
        assert!(matches!(sat("AF P & EG !P"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("E (P U Q) & AG !Q"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("A (P U Q) & EG !Q"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("AF P & AG !P"), CtlSat::Unsatisfiable));
    }

    // Universal eventualities are where naive set-based tableaux go wrong:
    // both of these are satisfiable but need fulfillment-aware extraction.
    #[test]
    fn sat_universal_eventualities() {
        match sat("!EG P & P") {
            CtlSat::Satisfiable { model, state } => {
                let f = parse_formula("!EG P & P").unwrap();
                assert!(mc_ctl_states(&model, &f).unwrap().contains(state));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(sat("A (P U Q) & P & !Q"), CtlSat::Satisfiable { .. }));
        assert!(matches!(sat("AF P & !P & EX !P"), CtlSat::Satisfiable { .. }));
    }

    #[test]
    fn sat_witness_is_small_and_valid() {
        match sat("E (P U Q) & !Q") {
            CtlSat::Satisfiable { model, state } => {
                let f = parse_formula("E (P U Q) & !Q").unwrap();
                assert!(mc_ctl_states(&model, &f).unwrap().contains(state));
                assert!(model.n_states() <= 8, "witness has {} states", model.n_states());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sat_atom_budget() {
        // 15 distinct propositions exceed a cap of 14.
        let src = (1..=15).map(|i| format!("p{i}")).collect::<Vec<_>>().join(" & ");
        match sat_ctl(&parse_formula(&src).unwrap(), DEFAULT_SAT_ATOM_CAP) {
            Err(CtlError::AtomBudget { atoms: 15, cap: 14 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sat_nested() {
        assert!(matches!(sat("AG (P -> EX Q) & P"), CtlSat::Satisfiable { .. }));
        assert!(matches!(sat("AG (P -> EX Q) & AG !Q & P"), CtlSat::Unsatisfiable));
        assert!(matches!(sat("EG (EF P) & AG !P"), CtlSat::Unsatisfiable));
    }
}
