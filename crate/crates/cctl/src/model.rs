//! Finite total Kripke structures and their integer-weighted variant.
//!
//! Text format, one declaration per line (`#` starts a comment):
//!
//! ```text
//! state q0 : p q      # declares a state with its labels
//! state q1
//! init q0             # optional, defaults to the first declared state
//! q0 -> q1 q0         # transitions, fan-out allowed
//! q1 -[2]-> q0        # weighted transition (weighted models only)
//! ```
//!
//! Every structure must be total: a state without successors is rejected and
//! named in the error. A file mixes `->` and `-[w]->` at its peril — the two
//! kinds are different model types and cannot appear together.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("state `{0}` is declared twice")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no outgoing transition (structures must be total)")]
    NotTotal(String),
    #[error("weighted and unweighted transitions in the same model")]
    MixedEdgeKinds,
    #[error("model declares no states")]
    Empty,
    #[error("run prefix is empty")]
    EmptyPrefix,
    #[error("no transition from `{0}` to `{1}`")]
    NotAnEdge(String, String),
    #[error("no transition from `{0}` to `{1}` with weight {2}")]
    NotAWeightedEdge(String, String, i64),
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

// ---------------------------------------------------------------------------
// Unweighted structures

#[derive(Debug, Clone)]
pub struct KripkeStructure {
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    initial: usize,
}

pub struct KsBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    edges: Vec<(usize, usize)>,
    initial: Option<usize>,
}

impl Default for KsBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl KsBuilder {
    pub fn new() -> Self {
        KsBuilder {
            names: Vec::new(),
            index: HashMap::new(),
            labels: Vec::new(),
            edges: Vec::new(),
            initial: None,
        }
    }

    pub fn state<'a>(
        &mut self,
        name: impl Into<String>,
        props: impl IntoIterator<Item = &'a str>,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(ModelError::DuplicateState(name));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.labels.push(props.into_iter().map(str::to_owned).collect());
        Ok(id)
    }

    pub fn add_prop(&mut self, state: usize, prop: impl Into<String>) {
        self.labels[state].insert(prop.into());
    }

    pub fn edge(&mut self, src: usize, dst: usize) {
        self.edges.push((src, dst));
    }

    pub fn init(&mut self, state: usize) {
        self.initial = Some(state);
    }

    pub fn build(self) -> Result<KripkeStructure, ModelError> {
        if self.names.is_empty() {
            return Err(ModelError::Empty);
        }
        let n = self.names.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for (s, d) in self.edges {
            if !succ[s].contains(&d) {
                succ[s].push(d);
                pred[d].push(s);
            }
        }
        if let Some(dead) = succ.iter().position(|v| v.is_empty()) {
            return Err(ModelError::NotTotal(self.names[dead].clone()));
        }
        Ok(KripkeStructure {
            names: self.names,
            index: self.index,
            labels: self.labels,
            succ,
            pred,
            initial: self.initial.unwrap_or(0),
        })
    }
}

impl KripkeStructure {
    pub fn n_states(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn props(&self, state: usize) -> &BTreeSet<String> {
        &self.labels[state]
    }

    pub fn has_prop(&self, state: usize, prop: &str) -> bool {
        self.labels[state].contains(prop)
    }

    pub fn succ(&self, state: usize) -> &[usize] {
        &self.succ[state]
    }

    pub fn pred(&self, state: usize) -> &[usize] {
        &self.pred[state]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn n_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn prop_names(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    /// Checks that consecutive prefix states are joined by transitions.
    pub fn validate_prefix(&self, prefix: &RunPrefix) -> Result<(), ModelError> {
        if prefix.states.is_empty() {
            return Err(ModelError::EmptyPrefix);
        }
        for pair in prefix.states.windows(2) {
            if !self.succ[pair[0]].contains(&pair[1]) {
                return Err(ModelError::NotAnEdge(
                    self.names[pair[0]].clone(),
                    self.names[pair[1]].clone(),
                ));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            out.push_str("state ");
            out.push_str(name);
            if !self.labels[i].is_empty() {
                out.push_str(" :");
                for p in &self.labels[i] {
                    out.push(' ');
                    out.push_str(p);
                }
            }
            out.push('\n');
        }
        if self.initial != 0 {
            out.push_str(&format!("init {}\n", self.names[self.initial]));
        }
        for (s, dsts) in self.succ.iter().enumerate() {
            if dsts.is_empty() {
                continue;
            }
            out.push_str(&self.names[s]);
            out.push_str(" ->");
            for d in dsts {
                out.push(' ');
                out.push_str(&self.names[*d]);
            }
            out.push('\n');
        }
        out
    }
}

/// A finite prefix of a run, as state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPrefix {
    pub states: Vec<usize>,
}

impl RunPrefix {
    pub fn new(states: Vec<usize>) -> Self {
        RunPrefix { states }
    }

    pub fn render(&self, ks: &KripkeStructure) -> String {
        self.states
            .iter()
            .map(|&s| ks.name(s))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

// ---------------------------------------------------------------------------
// Weighted structures

/// How the edge weights of a weighted structure are shaped; some engines only
/// apply to the restricted classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightClass {
    AllOne,
    ZeroOne,
    MinusZeroOne,
    Arbitrary,
}

impl fmt::Display for WeightClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightClass::AllOne => write!(f, "{{1}}"),
            WeightClass::ZeroOne => write!(f, "{{0,1}}"),
            WeightClass::MinusZeroOne => write!(f, "{{-1,0,1}}"),
            WeightClass::Arbitrary => write!(f, "arbitrary"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DurationalKs {
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    /// (destination, weight) in insertion order; parallel edges with
    /// different weights are allowed.
    succ: Vec<Vec<(usize, i64)>>,
    initial: usize,
}

pub struct DksBuilder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    labels: Vec<BTreeSet<String>>,
    edges: Vec<(usize, i64, usize)>,
    initial: Option<usize>,
}

impl Default for DksBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl DksBuilder {
    pub fn new() -> Self {
        DksBuilder {
            names: Vec::new(),
            index: HashMap::new(),
            labels: Vec::new(),
            edges: Vec::new(),
            initial: None,
        }
    }

    pub fn state<'a>(
        &mut self,
        name: impl Into<String>,
        props: impl IntoIterator<Item = &'a str>,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(ModelError::DuplicateState(name));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.labels.push(props.into_iter().map(str::to_owned).collect());
        Ok(id)
    }

    pub fn add_prop(&mut self, state: usize, prop: impl Into<String>) {
        self.labels[state].insert(prop.into());
    }

    pub fn edge(&mut self, src: usize, weight: i64, dst: usize) {
        self.edges.push((src, weight, dst));
    }

    pub fn init(&mut self, state: usize) {
        self.initial = Some(state);
    }

    pub fn build(self) -> Result<DurationalKs, ModelError> {
        if self.names.is_empty() {
            return Err(ModelError::Empty);
        }
        let n = self.names.len();
        let mut succ: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        for (s, w, d) in self.edges {
            if !succ[s].contains(&(d, w)) {
                succ[s].push((d, w));
            }
        }
        if let Some(dead) = succ.iter().position(|v| v.is_empty()) {
            return Err(ModelError::NotTotal(self.names[dead].clone()));
        }
        Ok(DurationalKs {
            names: self.names,
            index: self.index,
            labels: self.labels,
            succ,
            initial: self.initial.unwrap_or(0),
        })
    }
}

impl DurationalKs {
    pub fn n_states(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn props(&self, state: usize) -> &BTreeSet<String> {
        &self.labels[state]
    }

    pub fn has_prop(&self, state: usize, prop: &str) -> bool {
        self.labels[state].contains(prop)
    }

    pub fn succ(&self, state: usize) -> &[(usize, i64)] {
        &self.succ[state]
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn n_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn prop_names(&self) -> BTreeSet<String> {
        self.labels.iter().flatten().cloned().collect()
    }

    pub fn weight_class(&self) -> WeightClass {
        let mut all_one = true;
        let mut zero_one = true;
        let mut minus_zero_one = true;
        for edges in &self.succ {
            for &(_, w) in edges {
                all_one &= w == 1;
                zero_one &= w == 0 || w == 1;
                minus_zero_one &= (-1..=1).contains(&w);
            }
        }
        if all_one {
            WeightClass::AllOne
        } else if zero_one {
            WeightClass::ZeroOne
        } else if minus_zero_one {
            WeightClass::MinusZeroOne
        } else {
            WeightClass::Arbitrary
        }
    }

    pub fn validate_prefix(&self, prefix: &WeightedPrefix) -> Result<(), ModelError> {
        let mut here = prefix.start;
        for &(w, next) in &prefix.steps {
            if !self.succ[here].contains(&(next, w)) {
                return Err(ModelError::NotAWeightedEdge(
                    self.names[here].clone(),
                    self.names[next].clone(),
                    w,
                ));
            }
            here = next;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            out.push_str("state ");
            out.push_str(name);
            if !self.labels[i].is_empty() {
                out.push_str(" :");
                for p in &self.labels[i] {
                    out.push(' ');
                    out.push_str(p);
                }
            }
            out.push('\n');
        }
        if self.initial != 0 {
            out.push_str(&format!("init {}\n", self.names[self.initial]));
        }
        for (s, edges) in self.succ.iter().enumerate() {
            for &(d, w) in edges {
                out.push_str(&format!("{} -[{}]-> {}\n", self.names[s], w, self.names[d]));
            }
        }
        out
    }
}

/// A finite prefix of a weighted run: a start state followed by
/// (edge weight, next state) steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedPrefix {
    pub start: usize,
    pub steps: Vec<(i64, usize)>,
}

impl WeightedPrefix {
    pub fn weight(&self) -> i64 {
        self.steps.iter().map(|&(w, _)| w).sum()
    }

    pub fn render(&self, dks: &DurationalKs) -> String {
        let mut out = dks.name(self.start).to_string();
        for &(w, next) in &self.steps {
            out.push_str(&format!(" -[{}]-> {}", w, dks.name(next)));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Text format

#[derive(Debug, Clone)]
pub enum Model {
    Kripke(KripkeStructure),
    Durational(DurationalKs),
}

impl Model {
    pub fn to_text(&self) -> String {
        match self {
            Model::Kripke(ks) => ks.to_text(),
            Model::Durational(dks) => dks.to_text(),
        }
    }
}

struct RawModel {
    states: Vec<(String, Vec<String>)>,
    plain_edges: Vec<(String, String)>,
    weighted_edges: Vec<(String, i64, String)>,
    init: Option<String>,
}

fn parse_raw(text: &str) -> Result<RawModel, ModelError> {
    let mut raw = RawModel {
        states: Vec::new(),
        plain_edges: Vec::new(),
        weighted_edges: Vec::new(),
        init: None,
    };
    for (lineno, line) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let perr = |msg: String| ModelError::Parse { line: line_no, msg };
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "state" => {
                if toks.len() < 2 {
                    return Err(perr("`state` needs a name".into()));
                }
                let mut name = toks[1];
                let mut rest = &toks[2..];
                if let Some(stripped) = name.strip_suffix(':') {
                    name = stripped;
                } else if rest.first() == Some(&":") {
                    rest = &rest[1..];
                } else if !rest.is_empty() {
                    return Err(perr(format!(
                        "expected `:` before the labels of state `{name}`"
                    )));
                }
                if !valid_name(name) {
                    return Err(perr(format!("invalid state name `{name}`")));
                }
                let mut props = Vec::new();
                for p in rest {
                    if !valid_name(p) {
                        return Err(perr(format!("invalid proposition name `{p}`")));
                    }
                    props.push((*p).to_owned());
                }
                raw.states.push((name.to_owned(), props));
            }
            "init" => {
                if toks.len() != 2 {
                    return Err(perr("`init` needs exactly one state name".into()));
                }
                if raw.init.is_some() {
                    return Err(perr("`init` declared twice".into()));
                }
                raw.init = Some(toks[1].to_owned());
            }
            src => {
                if !valid_name(src) {
                    return Err(perr(format!("invalid state name `{src}`")));
                }
                if toks.len() < 3 {
                    return Err(perr("a transition needs a source, an arrow and a target".into()));
                }
                let arrow = toks[1];
                if arrow == "->" {
                    for dst in &toks[2..] {
                        if !valid_name(dst) {
                            return Err(perr(format!("invalid state name `{dst}`")));
                        }
                        raw.plain_edges.push((src.to_owned(), (*dst).to_owned()));
                    }
                } else if let Some(w) = arrow
                    .strip_prefix("-[")
                    .and_then(|s| s.strip_suffix("]->"))
                {
                    let w: i64 = w
                        .parse()
                        .map_err(|_| perr(format!("invalid weight `{w}`")))?;
                    for dst in &toks[2..] {
                        if !valid_name(dst) {
                            return Err(perr(format!("invalid state name `{dst}`")));
                        }
                        raw.weighted_edges.push((src.to_owned(), w, (*dst).to_owned()));
                    }
                } else {
                    return Err(perr(format!(
                        "expected `->` or `-[w]->` after `{src}`, found `{arrow}`"
                    )));
                }
            }
        }
    }
    Ok(raw)
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let raw = parse_raw(text)?;
    if !raw.plain_edges.is_empty() && !raw.weighted_edges.is_empty() {
        return Err(ModelError::MixedEdgeKinds);
    }
    if raw.weighted_edges.is_empty() {
        let mut b = KsBuilder::new();
        for (name, props) in &raw.states {
            b.state(name.clone(), props.iter().map(String::as_str))?;
        }
        for (s, d) in &raw.plain_edges {
            let s = b.index.get(s).copied().ok_or_else(|| ModelError::UnknownState(s.clone()))?;
            let d = b.index.get(d).copied().ok_or_else(|| ModelError::UnknownState(d.clone()))?;
            b.edge(s, d);
        }
        if let Some(init) = &raw.init {
            let i = b
                .index
                .get(init)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(init.clone()))?;
            b.init(i);
        }
        Ok(Model::Kripke(b.build()?))
    } else {
        let mut b = DksBuilder::new();
        for (name, props) in &raw.states {
            b.state(name.clone(), props.iter().map(String::as_str))?;
        }
        for (s, w, d) in &raw.weighted_edges {
            let s = b.index.get(s).copied().ok_or_else(|| ModelError::UnknownState(s.clone()))?;
            let d = b.index.get(d).copied().ok_or_else(|| ModelError::UnknownState(d.clone()))?;
            b.edge(s, *w, d);
        }
        if let Some(init) = &raw.init {
            let i = b
                .index
                .get(init)
                .copied()
                .ok_or_else(|| ModelError::UnknownState(init.clone()))?;
            b.init(i);
        }
        Ok(Model::Durational(b.build()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        # two-state flip-flop
        state q0 : p
        state q1 : q
        q0 -> q1
        q1 -> q0 q1
    ";

    #[test]
    fn parses_and_prints_kripke() {
        let Model::Kripke(ks) = parse_model(SMALL).unwrap() else {
            panic!("expected an unweighted model");
        };
        assert_eq!(ks.n_states(), 2);
        assert_eq!(ks.succ(1), &[0, 1]);
        assert!(ks.has_prop(0, "p"));
        assert_eq!(ks.initial(), 0);
        let reparsed = parse_model(&ks.to_text()).unwrap();
        let Model::Kripke(ks2) = reparsed else { panic!() };
        assert_eq!(ks2.to_text(), ks.to_text());
    }

    #[test]
    fn parses_weighted() {
        let text = "
            state a : p
            state b
            init b
            a -[2]-> b
            b -[-1]-> a
            b -[0]-> b
        ";
        let Model::Durational(d) = parse_model(text).unwrap() else {
            panic!("expected a weighted model");
        };
        assert_eq!(d.weight_class(), WeightClass::Arbitrary);
        assert_eq!(d.initial(), 1);
        assert_eq!(d.succ(1), &[(0, -1), (1, 0)]);
        let Model::Durational(d2) = parse_model(&d.to_text()).unwrap() else { panic!() };
        assert_eq!(d2.to_text(), d.to_text());
    }

    #[test]
    fn weight_classes() {
        let mk = |ws: &[i64]| {
            let mut b = DksBuilder::new();
            let q = b.state("q", []).unwrap();
            for &w in ws {
                b.edge(q, w, q);
            }
            b.build().unwrap().weight_class()
        };
        assert_eq!(mk(&[1, 1]), WeightClass::AllOne);
        assert_eq!(mk(&[0, 1]), WeightClass::ZeroOne);
        assert_eq!(mk(&[-1, 1]), WeightClass::MinusZeroOne);
        assert_eq!(mk(&[2]), WeightClass::Arbitrary);
    }

    #[test]
    fn rejects_deadlock_named() {
        let text = "
            state a
            state dead
            a -> a dead
        ";
        assert_eq!(parse_model(text).unwrap_err(), ModelError::NotTotal("dead".into()));
    }

    #[test]
    fn rejects_mixed_edges() {
        let text = "
            state a
            a -> a
            a -[1]-> a
        ";
        assert_eq!(parse_model(text).unwrap_err(), ModelError::MixedEdgeKinds);
    }

    #[test]
    fn rejects_unknown_and_duplicate() {
        assert_eq!(
            parse_model("state a\na -> b\n").unwrap_err(),
            ModelError::UnknownState("b".into())
        );
        assert_eq!(
            parse_model("state a\nstate a\na -> a\n").unwrap_err(),
            ModelError::DuplicateState("a".into())
        );
    }

    #[test]
    fn validates_prefixes() {
        let Model::Kripke(ks) = parse_model(SMALL).unwrap() else { panic!() };
        assert!(ks.validate_prefix(&RunPrefix::new(vec![0, 1, 1, 0])).is_ok());
        assert_eq!(
            ks.validate_prefix(&RunPrefix::new(vec![0, 0])),
            Err(ModelError::NotAnEdge("q0".into(), "q0".into()))
        );
    }

    #[test]
    fn weighted_prefix_weight() {
        let text = "state a\na -[2]-> a\na -[-1]-> a\n";
        let Model::Durational(d) = parse_model(text).unwrap() else { panic!() };
        let p = WeightedPrefix { start: 0, steps: vec![(2, 0), (-1, 0), (2, 0)] };
        d.validate_prefix(&p).unwrap();
        assert_eq!(p.weight(), 3);
        let bad = WeightedPrefix { start: 0, steps: vec![(5, 0)] };
        assert!(d.validate_prefix(&bad).is_err());
    }
}
