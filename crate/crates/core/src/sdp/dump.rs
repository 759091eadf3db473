//! Plain-text dump of a problem for debugging.
//!
//! Format, one record per line:
//!
//! ```text
//! sense <minimize|maximize>
//! block <index> <size> <label>
//! constant <value>
//! row <index> <eq|ineq> <rhs> <tag>
//! entry <obj|row index> <block> <i> <j> <re> <im>
//! ```
//!
//! Only entries with `i ≤ j` are written; the lower triangle follows by
//! Hermitian symmetry. `ineq` rows read `Σ ⟨A, X⟩ ≥ rhs`.

use std::fmt::Write as _;

use super::problem::{Sense, SdpProblem, Tag, Term};

fn write_terms(out: &mut String, owner: &str, terms: &[Term]) {
    for t in terms {
        let n = t.coeff.dim();
        for i in 0..n {
            for j in i..n {
                let z = t.coeff.get(i, j);
                if z.re != 0.0 || z.im != 0.0 {
                    let _ = writeln!(out, "entry {owner} {} {i} {j} {:e} {:e}", t.block, z.re, z.im);
                }
            }
        }
    }
}

fn tag_name(tag: Tag) -> String {
    match tag {
        Tag::Normalization => "normalization".into(),
        Tag::Feature(f) => format!("feature:{f}"),
        Tag::Structural => "structural".into(),
    }
}

pub fn to_text(problem: &SdpProblem) -> String {
    let mut out = String::new();
    let sense = match problem.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    let _ = writeln!(out, "sense {sense}");
    for (i, b) in problem.blocks.iter().enumerate() {
        let _ = writeln!(out, "block {i} {} {}", b.size, b.label);
    }
    let _ = writeln!(out, "constant {:e}", problem.objective.constant);
    write_terms(&mut out, "obj", &problem.objective.terms);
    for k in 0..problem.num_constraints() {
        let c = problem.constraint(k);
        let kind = if problem.is_inequality(k) { "ineq" } else { "eq" };
        let _ = writeln!(out, "row {k} {kind} {:e} {}", c.rhs, tag_name(c.tag));
        write_terms(&mut out, &k.to_string(), &c.terms);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::HermitianOperator;

    #[test]
    fn dump_lists_every_record() {
        let mut p = SdpProblem::new(Sense::Maximize);
        let b = p.add_block("M", 2);
        p.add_objective_term(b, HermitianOperator::pauli_x());
        p.add_inequality(vec![Term { block: b, coeff: HermitianOperator::identity(2) }], 0.5, Tag::Feature(1));
        let text = to_text(&p);
        assert!(text.starts_with("sense maximize\nblock 0 2 M\n"));
        assert!(text.contains("entry obj 0 0 1 1e0 0e0"));
        assert!(text.contains("row 0 ineq 5e-1 feature:1"));
        assert_eq!(text.matches("entry 0 0").count(), 2);
    }
}
