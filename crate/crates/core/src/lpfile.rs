//! Writer for the algebraic LP text format (CPLEX LP dialect).
//!
//! Grammar of the emitted documents:
//!
//! ```text
//! \ <comment>
//! Minimize
//!  obj: <terms>
//! Subject To
//!  <name>: <terms> <sense> <integer>
//! Bounds
//!  <var> >= <integer> | <var> <= <integer> | <lo> <= <var> <= <hi>
//! Binaries
//!  <var> ...
//! End
//! ```
//!
//! `<terms>` is a sum of `[coef] <var>` with integer coefficients, a
//! coefficient of 1 being omitted. Long expressions wrap onto continuation
//! lines that start with a space. Lines end with LF.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(i64, String)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default)]
pub struct LpDocument {
    pub comment: Vec<String>,
    pub objective: Vec<(i64, String)>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<String>,
    pub binaries: Vec<String>,
}

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, terms: &[(i64, String)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (idx, (coef, var)) in terms.iter().enumerate() {
        if idx > 0 && idx % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if *coef < 0 { "-" } else { "+" };
        let mag = coef.unsigned_abs();
        if idx == 0 && *coef >= 0 {
            out.push(' ');
        } else {
            let _ = write!(out, " {sign} ");
        }
        if mag != 1 {
            let _ = write!(out, "{mag} ");
        }
        out.push_str(var);
    }
}

impl LpDocument {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.comment {
            let _ = writeln!(out, "\\ {line}");
        }
        out.push_str("Minimize\n obj:");
        write_terms(&mut out, &self.objective);
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.name);
            write_terms(&mut out, &c.terms);
            let _ = writeln!(out, " {} {}", c.sense.symbol(), c.rhs);
        }
        if !self.bounds.is_empty() {
            out.push_str("Bounds\n");
            for b in &self.bounds {
                let _ = writeln!(out, " {b}");
            }
        }
        if !self.binaries.is_empty() {
            out.push_str("Binaries\n");
            for chunk in self.binaries.chunks(TERMS_PER_LINE) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_terms_and_sections() {
        let doc = LpDocument {
            comment: vec!["tiny".into()],
            objective: vec![(1, "a".into()), (3, "b".into())],
            constraints: vec![Constraint {
                name: "r1".into(),
                terms: vec![(-1, "a".into()), (2, "b".into()), (-4, "c".into())],
                sense: Sense::Ge,
                rhs: -3,
            }],
            bounds: vec![],
            binaries: vec!["a".into()],
        };
        assert_eq!(
            doc.render(),
            "\\ tiny\nMinimize\n obj: a + 3 b\nSubject To\n r1: - a + 2 b - 4 c >= -3\nBinaries\n a\nEnd\n"
        );
    }

    #[test]
    fn long_rows_wrap() {
        let terms: Vec<(i64, String)> = (0..10).map(|i| (1, format!("x{i}"))).collect();
        let mut out = String::new();
        write_terms(&mut out, &terms);
        assert_eq!(out.lines().count(), 2);
    }
}
