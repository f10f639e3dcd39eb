//! Precedence-aware printing. `parse(print(f)) == f` for every formula the
//! parser can produce; derived forms are printed back as sugar (`EX`, `EF`,
//! `EG`, `AG`, ...) whenever the node matches their normal form.
//!
//! `Constraint::True`/`False` never come out of the parser, so they print as
//! the canonical atoms `#TT >= 0` / `#TT < 0`; reparsing yields those atoms,
//! equivalent but not identical.

use super::*;

// Precedence contexts: 0 lowest (top level, parens, binder bodies),
// 1 = or-operand, 2 = and-operand, 3 = operand of a prefix operator.
fn fmt_prec(f: &Formula, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f.node() {
        Node::True => write!(out, "TT"),
        Node::False => write!(out, "FF"),
        Node::Atom(name) => write!(out, "{name}"),
        Node::Not(g) => match g.node() {
            // !E (TT U{C} !f) is AG{C} f, !A (TT U{C} !f) is EG{C} f; the
            // smart constructors fold the inner double negation back away.
            Node::ExistsUntil(u) if u.lhs.is_true() && !is_next_pattern(u) => {
                write!(out, "AG")?;
                fmt_opt_constraint(&u.constraint, out)?;
                write!(out, " ")?;
                fmt_prec(&Formula::not(u.rhs.clone()), 3, out)
            }
            Node::ForallUntil(u) if u.lhs.is_true() && !is_next_pattern(u) => {
                write!(out, "EG")?;
                fmt_opt_constraint(&u.constraint, out)?;
                write!(out, " ")?;
                fmt_prec(&Formula::not(u.rhs.clone()), 3, out)
            }
            _ => {
                write!(out, "!")?;
                fmt_prec(g, 3, out)
            }
        },
        Node::And(a, b) => {
            if prec > 2 {
                write!(out, "(")?;
            }
            fmt_prec(a, 2, out)?;
            write!(out, " & ")?;
            fmt_prec(b, 3, out)?;
            if prec > 2 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Node::Or(a, b) => {
            if prec > 1 {
                write!(out, "(")?;
            }
            fmt_prec(a, 1, out)?;
            write!(out, " | ")?;
            fmt_prec(b, 2, out)?;
            if prec > 1 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Node::ExistsUntil(u) => fmt_until(u, true, out),
        Node::ForallUntil(u) => fmt_until(u, false, out),
        Node::Bind { var, counted, body } => {
            if prec > 0 {
                write!(out, "(")?;
            }
            write!(out, "{var}[")?;
            fmt_prec(counted, 0, out)?;
            write!(out, "]. ")?;
            fmt_prec(body, 0, out)?;
            if prec > 0 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Node::VarConstraint(a) => {
            if prec > 0 {
                write!(out, "(")?;
            }
            for (idx, (coeff, name)) in a.terms.iter().enumerate() {
                fmt_term_prefix(idx, *coeff, out)?;
                write!(out, "{name}")?;
            }
            write!(out, " {} {}", a.cmp.symbol(), a.bound)?;
            if prec > 0 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Node::Now(g) => {
            write!(out, "N ")?;
            fmt_prec(g, 3, out)
        }
    }
}

fn fmt_until(u: &Until, exists: bool, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if is_next_pattern(u) {
        write!(out, "{}X ", if exists { "E" } else { "A" })?;
        return fmt_prec(&u.rhs, 3, out);
    }
    if u.lhs.is_true() {
        write!(out, "{}F", if exists { "E" } else { "A" })?;
        fmt_opt_constraint(&u.constraint, out)?;
        write!(out, " ")?;
        return fmt_prec(&u.rhs, 3, out);
    }
    write!(out, "{} (", if exists { "E" } else { "A" })?;
    fmt_prec(&u.lhs, 0, out)?;
    write!(out, " U")?;
    fmt_opt_constraint(&u.constraint, out)?;
    write!(out, " ")?;
    fmt_prec(&u.rhs, 0, out)?;
    write!(out, ")")
}

fn fmt_opt_constraint(c: &Option<Constraint>, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if let Some(c) = c {
        write!(out, "{{")?;
        fmt_constraint(c, 0, out)?;
        write!(out, "}}")?;
    }
    Ok(())
}

// Same precedence scheme as formulas; atoms are self-delimiting because a
// comparison and bound always end them.
fn fmt_constraint(c: &Constraint, prec: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match c {
        Constraint::True => write!(out, "#TT >= 0"),
        Constraint::False => write!(out, "#TT < 0"),
        Constraint::Atom(a) => {
            if prec > 2 {
                write!(out, "(")?;
            }
            for (idx, (coeff, f)) in a.terms.iter().enumerate() {
                fmt_term_prefix(idx, *coeff, out)?;
                write!(out, "#")?;
                match f.node() {
                    Node::True => write!(out, "TT")?,
                    Node::False => write!(out, "FF")?,
                    Node::Atom(name) => write!(out, "{name}")?,
                    _ => {
                        write!(out, "(")?;
                        fmt_prec(f, 0, out)?;
                        write!(out, ")")?;
                    }
                }
            }
            write!(out, " {} {}", a.cmp.symbol(), a.bound)?;
            if prec > 2 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Constraint::Not(x) => {
            write!(out, "!")?;
            fmt_constraint(x, 3, out)
        }
        Constraint::And(x, y) => {
            if prec > 2 {
                write!(out, "(")?;
            }
            fmt_constraint(x, 2, out)?;
            write!(out, " & ")?;
            fmt_constraint(y, 3, out)?;
            if prec > 2 {
                write!(out, ")")?;
            }
            Ok(())
        }
        Constraint::Or(x, y) => {
            if prec > 1 {
                write!(out, "(")?;
            }
            fmt_constraint(x, 1, out)?;
            write!(out, " | ")?;
            fmt_constraint(y, 2, out)?;
            if prec > 1 {
                write!(out, ")")?;
            }
            Ok(())
        }
    }
}

// "" / "-" on the first term, " + " / " - " afterwards, coefficient shown
// only when its magnitude is not 1.
fn fmt_term_prefix(idx: usize, coeff: i64, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if idx == 0 {
        if coeff < 0 {
            write!(out, "-")?;
        }
    } else if coeff < 0 {
        write!(out, " - ")?;
    } else {
        write!(out, " + ")?;
    }
    let mag = coeff.unsigned_abs();
    if mag != 1 {
        write!(out, "{mag}*")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, f)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_constraint(self, 0, f)
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sugar_comes_back_out() {
        for (src, expect) in [
            ("E (TT U{#TT = 1} P)", "EX P"),
            ("EF{#P = 2} TT", "EF{#P = 2} TT"),
            ("!EF !P", "AG P"),
            ("!AF{#P <= 1} !Q", "EG{#P <= 1} Q"),
            ("P -> Q", "!P | Q"),
            ("EX (P & !Q)", "EX (P & !Q)"),
            ("AG{#P >= 1} Q", "AG{#P >= 1} Q"),
            ("E (P U{#Q = 0} R)", "E (P U{#Q = 0} R)"),
            ("z[P]. EF (z >= 2)", "z[P]. EF (z >= 2)"),
            ("N (P & Q)", "N (P & Q)"),
            ("EF{2*#P - #Q >= 3} TT", "EF{2*#P - #Q >= 3} TT"),
            ("EF{#(P | Q) = 1} R", "EF{#(P | Q) = 1} R"),
            ("P & (Q & R)", "P & (Q & R)"),
            ("P & Q & R", "P & Q & R"),
        ] {
            let f = parse_formula(src).unwrap();
            assert_eq!(format!("{f}"), expect, "printing `{src}`");
        }
    }

    #[test]
    fn simp_constants_print_as_atoms() {
        assert_eq!(format!("{}", Constraint::True), "#TT >= 0");
        assert_eq!(format!("{}", Constraint::False), "#TT < 0");
    }
}
