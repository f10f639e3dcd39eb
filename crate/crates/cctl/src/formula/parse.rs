//! Hand-written lexer and recursive-descent parser.
//!
//! ```text
//! formula  := or ('->' formula)?            right-assoc, desugars to !a | b
//! or       := and ('|' and)*
//! and      := unary ('&' unary)*
//! unary    := '!' unary
//!           | 'E' '(' formula 'U' braces? formula ')'
//!           | 'A' '(' formula 'U' braces? formula ')'
//!           | ('EF'|'AF'|'EG'|'AG') braces? unary
//!           | ('EX'|'AX'|'N') unary
//!           | primary
//! primary  := 'TT' | 'FF' | '(' formula ')'
//!           | ident '[' formula ']' '.' formula      binder, maximal scope
//!           | varatom | ident
//! varatom  := '-'? vterm (('+'|'-') vterm)* cmp int  e.g. 2*z + w >= 3
//! vterm    := int '*' ident | ident
//! braces   := '{' constr '}'
//! constr   := cor ('->' constr)?
//! cor      := cand ('|' cand)*
//! cand     := cunary ('&' cunary)*
//! cunary   := '!' cunary | '(' constr ')' | catom
//! catom    := '-'? cterm (('+'|'-') cterm)* cmp int  e.g. #p - 2*#(q & r) < 4
//! cterm    := (int '*')? '#' ('TT' | 'FF' | ident | '(' formula ')')
//! cmp      := '<' | '<=' | '=' | '>=' | '>'
//! int      := digits, optionally preceded by '-' where a bound is expected
//! ```
//!
//! An identifier followed by a comparison, `+`, or `-` starts a variable
//! atom, so no backtracking is needed. Identifiers may contain primes
//! (`P'`). `TT FF E A U EF AF EG AG EX AX N` are reserved.

use super::*;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Dot,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Plus,
    Minus,
    Star,
    Hash,
    Lt,
    Le,
    EqTok,
    Ge,
    Gt,
    Int(i64),
    Ident(String),
    Tt,
    Ff,
    KwE,
    KwA,
    KwU,
    KwEf,
    KwAf,
    KwEg,
    KwAg,
    KwEx,
    KwAx,
    KwNow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Hash => "`#`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::EqTok => "`=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Tt => "`TT`".into(),
            Tok::Ff => "`FF`".into(),
            Tok::KwE => "`E`".into(),
            Tok::KwA => "`A`".into(),
            Tok::KwU => "`U`".into(),
            Tok::KwEf => "`EF`".into(),
            Tok::KwAf => "`AF`".into(),
            Tok::KwEg => "`EG`".into(),
            Tok::KwAg => "`AG`".into(),
            Tok::KwEx => "`EX`".into(),
            Tok::KwAx => "`AX`".into(),
            Tok::KwNow => "`N`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(input: &str) -> Result<Vec<Lexed>, FormulaError> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    macro_rules! push {
        ($tok:expr, $len:expr) => {{
            out.push(Lexed { tok: $tok, line, col });
            i += $len;
            col += $len;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '(' => push!(Tok::LParen, 1),
            ')' => push!(Tok::RParen, 1),
            '{' => push!(Tok::LBrace, 1),
            '}' => push!(Tok::RBrace, 1),
            '[' => push!(Tok::LBracket, 1),
            ']' => push!(Tok::RBracket, 1),
            '.' => push!(Tok::Dot, 1),
            '!' => push!(Tok::Bang, 1),
            '&' => push!(Tok::Amp, 1),
            '|' => push!(Tok::Pipe, 1),
            '+' => push!(Tok::Plus, 1),
            '*' => push!(Tok::Star, 1),
            '#' => push!(Tok::Hash, 1),
            '-' => {
                if chars.get(i + 1) == Some(&'>') {
                    push!(Tok::Arrow, 2);
                } else {
                    push!(Tok::Minus, 1);
                }
            }
            '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Le, 2);
                } else {
                    push!(Tok::Lt, 1);
                }
            }
            '>' => {
                if chars.get(i + 1) == Some(&'=') {
                    push!(Tok::Ge, 2);
                } else {
                    push!(Tok::Gt, 1);
                }
            }
            '=' => push!(Tok::EqTok, 1),
            '0'..='9' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n: i64 = text.parse().map_err(|_| FormulaError::Parse {
                    line,
                    col,
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                out.push(Lexed { tok: Tok::Int(n), line, col });
                col += i - start;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let tok = match text.as_str() {
                    "TT" => Tok::Tt,
                    "FF" => Tok::Ff,
                    "E" => Tok::KwE,
                    "A" => Tok::KwA,
                    "U" => Tok::KwU,
                    "EF" => Tok::KwEf,
                    "AF" => Tok::KwAf,
                    "EG" => Tok::KwEg,
                    "AG" => Tok::KwAg,
                    "EX" => Tok::KwEx,
                    "AX" => Tok::KwAx,
                    "N" => Tok::KwNow,
                    _ => Tok::Ident(text),
                };
                out.push(Lexed { tok, line, col });
                col += i - start;
            }
            other => {
                return Err(FormulaError::Parse {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Lexed { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err(&self, msg: impl Into<String>) -> FormulaError {
        let here = &self.toks[self.pos];
        FormulaError::Parse { line: here.line, col: here.col, msg: msg.into() }
    }

    fn expect(&mut self, t: Tok, ctx: &str) -> Result<(), FormulaError> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(format!("expected {} {}, found {}", t.describe(), ctx, self.peek().describe())))
        }
    }

    fn formula(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or_level()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.formula()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or_level(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.and_level()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and_level()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_level(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn opt_braces(&mut self) -> Result<Option<Constraint>, FormulaError> {
        if !self.eat(&Tok::LBrace) {
            return Ok(None);
        }
        let c = self.constr()?;
        self.expect(Tok::RBrace, "to close the constraint")?;
        Ok(Some(c))
    }

    fn until_body(&mut self, exists: bool) -> Result<Formula, FormulaError> {
        self.expect(Tok::LParen, "after the path quantifier")?;
        let lhs = self.formula()?;
        self.expect(Tok::KwU, "in the until body")?;
        let constraint = self.opt_braces()?;
        let rhs = self.formula()?;
        self.expect(Tok::RParen, "to close the until body")?;
        Ok(if exists {
            Formula::exists_until(lhs, constraint, rhs)
        } else {
            Formula::forall_until(lhs, constraint, rhs)
        })
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::KwE => {
                self.bump();
                self.until_body(true)
            }
            Tok::KwA => {
                self.bump();
                self.until_body(false)
            }
            Tok::KwEf => {
                self.bump();
                let c = self.opt_braces()?;
                Ok(Formula::ef(c, self.unary()?))
            }
            Tok::KwAf => {
                self.bump();
                let c = self.opt_braces()?;
                Ok(Formula::af(c, self.unary()?))
            }
            Tok::KwEg => {
                self.bump();
                let c = self.opt_braces()?;
                Ok(Formula::eg(c, self.unary()?))
            }
            Tok::KwAg => {
                self.bump();
                let c = self.opt_braces()?;
                Ok(Formula::ag(c, self.unary()?))
            }
            Tok::KwEx => {
                self.bump();
                Ok(Formula::ex(self.unary()?))
            }
            Tok::KwAx => {
                self.bump();
                Ok(Formula::ax(self.unary()?))
            }
            Tok::KwNow => {
                self.bump();
                Ok(Formula::now(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().clone() {
            Tok::Tt => {
                self.bump();
                Ok(Formula::tt())
            }
            Tok::Ff => {
                self.bump();
                Ok(Formula::ff())
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "to close the parenthesized formula")?;
                Ok(f)
            }
            Tok::Int(_) => {
                let t = self.var_term(1)?;
                self.var_atom_rest(t)
            }
            Tok::Minus => {
                self.bump();
                let t = self.var_term(-1)?;
                self.var_atom_rest(t)
            }
            Tok::Hash => {
                self.bump();
                let operand = self.count_operand()?;
                Err(FormulaError::CountInVariableConstraint(format!("{operand}")))
            }
            Tok::Ident(name) => {
                self.bump();
                match self.peek() {
                    Tok::LBracket => {
                        self.bump();
                        let counted = self.formula()?;
                        self.expect(Tok::RBracket, "to close the binder")?;
                        self.expect(Tok::Dot, "after the binder")?;
                        let body = self.formula()?;
                        Ok(Formula::bind(name, counted, body))
                    }
                    Tok::Plus | Tok::Minus | Tok::Lt | Tok::Le | Tok::EqTok | Tok::Ge | Tok::Gt => {
                        self.var_atom_rest((1, name))
                    }
                    _ => Ok(Formula::atom(name)),
                }
            }
            other => Err(self.err(format!("expected a formula, found {}", other.describe()))),
        }
    }

    fn var_term(&mut self, sign: i64) -> Result<(i64, String), FormulaError> {
        match self.bump() {
            Tok::Int(k) => {
                self.expect(Tok::Star, "after the coefficient")?;
                match self.bump() {
                    Tok::Ident(name) => Ok((sign * k, name)),
                    Tok::Hash => {
                        let operand = self.count_operand()?;
                        Err(FormulaError::CountInVariableConstraint(format!("{operand}")))
                    }
                    other => {
                        self.pos -= 1;
                        Err(self.err(format!("expected a variable name, found {}", other.describe())))
                    }
                }
            }
            Tok::Ident(name) => Ok((sign, name)),
            Tok::Hash => {
                let operand = self.count_operand()?;
                Err(FormulaError::CountInVariableConstraint(format!("{operand}")))
            }
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected a variable term, found {}", other.describe())))
            }
        }
    }

    fn var_atom_rest(&mut self, first: (i64, String)) -> Result<Formula, FormulaError> {
        let mut terms = vec![first];
        loop {
            let sign = if self.eat(&Tok::Plus) {
                1
            } else if self.eat(&Tok::Minus) {
                -1
            } else {
                break;
            };
            terms.push(self.var_term(sign)?);
        }
        let cmp = self.cmp_tok()?;
        let bound = self.signed_int()?;
        Ok(Formula::var_constraint(terms, cmp, bound))
    }

    fn cmp_tok(&mut self) -> Result<Cmp, FormulaError> {
        let c = match self.peek() {
            Tok::Lt => Cmp::Lt,
            Tok::Le => Cmp::Le,
            Tok::EqTok => Cmp::Eq,
            Tok::Ge => Cmp::Ge,
            Tok::Gt => Cmp::Gt,
            other => {
                return Err(self.err(format!(
                    "expected a comparison (`<`, `<=`, `=`, `>=`, `>`), found {}",
                    other.describe()
                )))
            }
        };
        self.bump();
        Ok(c)
    }

    fn signed_int(&mut self) -> Result<i64, FormulaError> {
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Tok::Int(n) => Ok(if neg { -n } else { n }),
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected an integer bound, found {}", other.describe())))
            }
        }
    }

    fn constr(&mut self) -> Result<Constraint, FormulaError> {
        let lhs = self.c_or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.constr()?;
            Ok(Constraint::Or(Box::new(Constraint::Not(Box::new(lhs))), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn c_or(&mut self) -> Result<Constraint, FormulaError> {
        let mut lhs = self.c_and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.c_and()?;
            lhs = Constraint::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn c_and(&mut self) -> Result<Constraint, FormulaError> {
        let mut lhs = self.c_unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.c_unary()?;
            lhs = Constraint::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn c_unary(&mut self) -> Result<Constraint, FormulaError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Constraint::Not(Box::new(self.c_unary()?)))
            }
            Tok::LParen => {
                self.bump();
                let c = self.constr()?;
                self.expect(Tok::RParen, "to close the grouped constraint")?;
                Ok(c)
            }
            _ => self.c_atom(),
        }
    }

    fn c_atom(&mut self) -> Result<Constraint, FormulaError> {
        let first_sign = if self.eat(&Tok::Minus) { -1 } else { 1 };
        let mut terms = vec![self.count_term(first_sign)?];
        loop {
            let sign = if self.eat(&Tok::Plus) {
                1
            } else if self.eat(&Tok::Minus) {
                -1
            } else {
                break;
            };
            terms.push(self.count_term(sign)?);
        }
        let cmp = self.cmp_tok()?;
        let bound = self.signed_int()?;
        Ok(Constraint::Atom(CountAtom { terms, cmp, bound }))
    }

    fn count_term(&mut self, sign: i64) -> Result<(i64, Formula), FormulaError> {
        let coeff = match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                self.expect(Tok::Star, "after the coefficient")?;
                k
            }
            _ => 1,
        };
        match self.peek().clone() {
            Tok::Hash => {
                self.bump();
                let f = self.count_operand()?;
                Ok((sign * coeff, f))
            }
            Tok::Ident(name) => Err(FormulaError::VariableInCountingConstraint(name)),
            other => Err(self.err(format!("expected a counted term `#f`, found {}", other.describe()))),
        }
    }

    fn count_operand(&mut self) -> Result<Formula, FormulaError> {
        match self.bump() {
            Tok::Tt => Ok(Formula::tt()),
            Tok::Ff => Ok(Formula::ff()),
            Tok::Ident(name) => Ok(Formula::atom(name)),
            Tok::LParen => {
                let f = self.formula()?;
                self.expect(Tok::RParen, "to close the counted formula")?;
                Ok(f)
            }
            other => {
                self.pos -= 1;
                Err(self.err(format!("expected a formula after `#`, found {}", other.describe())))
            }
        }
    }
}

/// Parses a formula, then checks binder well-formedness.
pub fn parse_formula(input: &str) -> Result<Formula, FormulaError> {
    let toks = lex(input)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.formula()?;
    if p.peek() != &Tok::Eof {
        return Err(p.err(format!("unexpected {} after the formula", p.peek().describe())));
    }
    check_wellformed(&f)?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str) {
        let f = parse_formula(src).unwrap_or_else(|e| panic!("parse `{src}`: {e}"));
        let printed = format!("{f}");
        let g = parse_formula(&printed).unwrap_or_else(|e| panic!("reparse `{printed}`: {e}"));
        assert_eq!(f, g, "not stable: `{src}` -> `{printed}`");
    }

    #[test]
    fn roundtrip_corpus() {
        for src in [
            "P",
            "TT",
            "FF",
            "!P",
            "P & !Q | R -> P'",
            "EX (P & !Q)",
            "AX !P",
            "EF P",
            "EF{#P = 2} TT",
            "AF{#P >= 1} Q",
            "EG{#P <= 1} TT",
            "AG{#P >= 1} Q",
            "E (TT U{#error <= 2} lock)",
            "E (P U{#Q = 0} R)",
            "A (P U Q)",
            "E (P U Q)",
            "EF{#P1 + #P2 = 10} P3",
            "EF{2*#P - #Q >= 3} TT",
            "EF{#P = 1 & #P = 2} TT",
            "EF{(#P = 1 | #Q = 2) & !(#R < 5)} TT",
            "EF{#(!P) = 0 & #(P & Q) <= 4} R",
            "E (TT U{#TT < 0} P)",
            "EF{#TT = 1} P",
            "z[P]. EF (z >= 2)",
            "z[P]. (z >= 1)",
            "z[P]. w[Q]. EF (z - w = 0 | 2*z + 3*w >= 4)",
            "N P",
            "N (E (FF U{#P = 1} TT))",
            "z[P & Q]. AG (z <= 5)",
            "EF{#P - #Q = 0} TT",
            "AG{#TT >= 0} FF",
            "E ((E (P U Q)) U{#P = 1} R)",
            "EX EX EF P'",
            "-z + w >= -2",
        ] {
            roundtrip(src);
        }
    }

    #[test]
    fn parses_next_pattern_as_written() {
        let a = parse_formula("EX P").unwrap();
        let b = parse_formula("E (TT U{#TT = 1} P)").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_forms_normalize() {
        let eg = parse_formula("EG{#P <= 1} Q").unwrap();
        let neg = parse_formula("!AF{#P <= 1} !Q").unwrap();
        assert_eq!(eg, neg);
        let ag = parse_formula("AG P").unwrap();
        let nef = parse_formula("!EF !P").unwrap();
        assert_eq!(ag, nef);
        let imp = parse_formula("P -> Q").unwrap();
        let or = parse_formula("!P | Q").unwrap();
        assert_eq!(imp, or);
    }

    #[test]
    fn precedence_shapes() {
        let f = parse_formula("P & Q | R").unwrap();
        match f.node() {
            Node::Or(l, _) => assert!(matches!(l.node(), Node::And(_, _))),
            _ => panic!(),
        }
        let g = parse_formula("P -> Q -> R").unwrap();
        // right-assoc: !P | (!Q | R)
        match g.node() {
            Node::Or(l, r) => {
                assert!(matches!(l.node(), Node::Not(_)));
                assert!(matches!(r.node(), Node::Or(_, _)));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn binder_scope_is_maximal() {
        let f = parse_formula("z[P]. z >= 1 & Q").unwrap();
        match f.node() {
            Node::Bind { body, .. } => assert!(matches!(body.node(), Node::And(_, _))),
            _ => panic!("binder should swallow the conjunction"),
        }
    }

    #[test]
    fn rejects_count_outside_braces() {
        assert_eq!(
            parse_formula("#P = 1"),
            Err(FormulaError::CountInVariableConstraint("P".into()))
        );
        assert!(matches!(
            parse_formula("EF (2*#P >= 1)"),
            Err(FormulaError::CountInVariableConstraint(_))
        ));
    }

    #[test]
    fn rejects_variable_inside_braces() {
        assert_eq!(
            parse_formula("z[P]. EF{z = 1} TT"),
            Err(FormulaError::VariableInCountingConstraint("z".into()))
        );
    }

    #[test]
    fn rejects_duplicate_and_cyclic_binders() {
        assert_eq!(
            parse_formula("z[P]. z[Q]. (z >= 1)"),
            Err(FormulaError::DuplicateBinder("z".into()))
        );
        assert!(matches!(
            parse_formula("z[w >= 1]. w[z >= 1]. P"),
            Err(FormulaError::CyclicVariableOrder(_))
        ));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_formula("P &\n& Q") {
            Err(FormulaError::Parse { line, col, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(col, 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_trailing_input() {
        assert!(matches!(parse_formula("P Q"), Err(FormulaError::Parse { .. })));
        assert!(matches!(parse_formula(""), Err(FormulaError::Parse { .. })));
        assert!(matches!(parse_formula("E (P U Q) )"), Err(FormulaError::Parse { .. })));
    }

    #[test]
    fn negative_bounds_and_coefficients() {
        let f = parse_formula("EF{-2*#P + #Q <= -3} TT").unwrap();
        match f.node() {
            Node::ExistsUntil(u) => match u.constraint.as_ref().unwrap() {
                Constraint::Atom(a) => {
                    assert_eq!(a.terms[0].0, -2);
                    assert_eq!(a.terms[1].0, 1);
                    assert_eq!(a.bound, -3);
                    assert_eq!(a.cmp, Cmp::Le);
                }
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn constraint_implication_desugars() {
        let f = parse_formula("EF{#P = 1 -> #Q = 2} TT").unwrap();
        match f.node() {
            Node::ExistsUntil(u) => match u.constraint.as_ref().unwrap() {
                Constraint::Or(l, _) => assert!(matches!(**l, Constraint::Not(_))),
                other => panic!("{other:?}"),
            },
            _ => panic!(),
        }
    }
}
