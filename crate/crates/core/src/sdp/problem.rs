//! Block-structured semidefinite programs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matops::{frobenius_inner, HermitianOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub label: String,
    pub size: usize,
}

/// One coefficient matrix paired with the block it multiplies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub block: usize,
    pub coeff: HermitianOperator,
}

/// What a constraint row stands for, used to read off affine coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tag {
    Normalization,
    Feature(usize),
    Structural,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub rhs: f64,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub terms: Vec<Term>,
    pub constant: f64,
}

/// A direction in multiplier space along which dual slacks can be raised.
///
/// Moving by `s ≥ 0` subtracts `s` from every listed equality multiplier,
/// which adds `s · Σ A_k` to each dual slack block. `Lift` targets a single
/// block; `Global` targets every block where that sum is positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RepairMove {
    Lift { rows: Vec<usize>, block: usize },
    Global { rows: Vec<usize> },
}

/// Placement of a `d × d` coefficient inside a larger block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Diagonal sub-block starting at the given offset.
    Diagonal(usize),
    /// Off-diagonal pair: `B/2` at `(row, col)` and `B†/2` at `(col, row)`,
    /// so the pairing reads `Re Tr[B · X_{col,row}]`.
    OffDiagonal { row: usize, col: usize },
}

/// A block reference inside a matrix-valued constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub block: usize,
    pub placement: Placement,
    pub scale: f64,
}

impl Part {
    pub fn new(block: usize, placement: Placement, scale: f64) -> Self {
        Self { block, placement, scale }
    }

    pub fn whole(block: usize) -> Self {
        Self::new(block, Placement::Diagonal(0), 1.0)
    }
}

/// Row indices produced by a matrix-valued equality.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRows {
    pub dim: usize,
    /// One row per basis element, in [`hermitian_basis`] order.
    pub rows: Vec<usize>,
    /// The rows pairing with diagonal units `E_ii`.
    pub diagonal: Vec<usize>,
}

/// Orthogonal Hermitian basis `E_ii`, `E_ij + E_ji`, `i(E_ji − E_ij)`.
pub fn hermitian_basis(d: usize) -> Vec<HermitianOperator> {
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        basis.push(HermitianOperator::symmetric_unit(d, i, i));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            basis.push(HermitianOperator::symmetric_unit(d, i, j));
            basis.push(HermitianOperator::antisymmetric_unit(d, i, j));
        }
    }
    basis
}

/// Traceless Hermitian basis: `E_ii − E_dd` followed by the off-diagonal units.
pub fn traceless_basis(d: usize) -> Vec<HermitianOperator> {
    let full = hermitian_basis(d);
    let mut basis = Vec::with_capacity(d * d - 1);
    for item in full.iter().take(d - 1) {
        basis.push(item.sub(&full[d - 1]));
    }
    basis.extend(full.into_iter().skip(d));
    basis
}

/// Embeds a `d × d` coefficient into a block of size `size`.
pub fn place(size: usize, coeff: &HermitianOperator, placement: Placement) -> HermitianOperator {
    let d = coeff.dim();
    let mut out = crate::matops::ComplexMatrix::zeros(size);
    match placement {
        Placement::Diagonal(off) => {
            assert!(off + d <= size, "placement exceeds block");
            for i in 0..d {
                for j in 0..d {
                    out.set(off + i, off + j, coeff.get(i, j));
                }
            }
        }
        Placement::OffDiagonal { row, col } => {
            assert!(row + d <= size && col + d <= size, "placement exceeds block");
            assert!(row.abs_diff(col) >= d, "off-diagonal placement overlaps the diagonal");
            for i in 0..d {
                for j in 0..d {
                    out.set(row + i, col + j, coeff.get(i, j) * 0.5);
                    out.set(col + j, row + i, coeff.get(i, j).conj() * 0.5);
                }
            }
        }
    }
    HermitianOperator::new(out).expect("placement preserves Hermiticity")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub sense: Sense,
    pub blocks: Vec<BlockSpec>,
    pub objective: Objective,
    pub equalities: Vec<Constraint>,
    /// Rows of the form `Σ ⟨A, X⟩ ≥ rhs`.
    pub inequalities: Vec<Constraint>,
    pub repairs: Vec<RepairMove>,
    /// Multiplier vectors `y` with `Σ y_k A_k ⪰ 0` and `Σ y_k b_k = 0`, used
    /// to restrict blocks to the face every feasible point lives on.
    #[serde(default)]
    pub exposing_hints: Vec<Vec<(usize, f64)>>,
    /// Matrix equalities recorded for face propagation.
    #[serde(default)]
    pub links: Vec<Link>,
}

/// Rows imposing `Σ_parts scale · X_part = rhs` over the full Hermitian basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub parts: Vec<Part>,
    pub rows: Vec<usize>,
    pub dim: usize,
}

impl SdpProblem {
    pub fn new(sense: Sense) -> Self {
        Self {
            sense,
            blocks: Vec::new(),
            objective: Objective { terms: Vec::new(), constant: 0.0 },
            equalities: Vec::new(),
            inequalities: Vec::new(),
            repairs: Vec::new(),
            exposing_hints: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn add_block(&mut self, label: impl Into<String>, size: usize) -> usize {
        self.blocks.push(BlockSpec { label: label.into(), size });
        self.blocks.len() - 1
    }

    pub fn block_size(&self, block: usize) -> usize {
        self.blocks[block].size
    }

    /// Multiplier count: equalities first, then inequalities.
    pub fn num_constraints(&self) -> usize {
        self.equalities.len() + self.inequalities.len()
    }

    /// Constraint `k` in multiplier order.
    pub fn constraint(&self, k: usize) -> &Constraint {
        if k < self.equalities.len() {
            &self.equalities[k]
        } else {
            &self.inequalities[k - self.equalities.len()]
        }
    }

    pub fn is_inequality(&self, k: usize) -> bool {
        k >= self.equalities.len()
    }

    pub fn add_objective_term(&mut self, block: usize, coeff: HermitianOperator) {
        self.objective.terms.push(Term { block, coeff });
    }

    pub fn set_objective_constant(&mut self, constant: f64) {
        self.objective.constant = constant;
    }

    pub fn add_equality(&mut self, terms: Vec<Term>, rhs: f64, tag: Tag) -> usize {
        self.equalities.push(Constraint { terms, rhs, tag });
        self.equalities.len() - 1
    }

    /// Adds `Σ ⟨A, X⟩ ≥ rhs`; returns its multiplier index.
    pub fn add_inequality(&mut self, terms: Vec<Term>, rhs: f64, tag: Tag) -> usize {
        self.inequalities.push(Constraint { terms, rhs, tag });
        self.equalities.len() + self.inequalities.len() - 1
    }

    fn rows_from_basis(
        &mut self,
        parts: &[Part],
        basis: &[HermitianOperator],
        rhs: impl Fn(&HermitianOperator) -> f64,
        tag: Tag,
    ) -> Vec<usize> {
        let mut rows = Vec::with_capacity(basis.len());
        for e in basis {
            let terms = parts
                .iter()
                .map(|p| Term { block: p.block, coeff: place(self.blocks[p.block].size, &e.scale(p.scale), p.placement) })
                .collect();
            let r = rhs(e);
            rows.push(self.add_equality(terms, r, tag));
        }
        rows
    }

    /// Imposes `Σ_parts scale · X_part = rhs` entrywise.
    pub fn add_matrix_equality(&mut self, parts: &[Part], rhs: &HermitianOperator, tag: Tag) -> MatrixRows {
        let d = rhs.dim();
        let basis = hermitian_basis(d);
        let rows = self.rows_from_basis(parts, &basis, |e| frobenius_inner(e, rhs).expect("basis size"), tag);
        self.links.push(Link { parts: parts.to_vec(), rows: rows.clone(), dim: d });
        MatrixRows { dim: d, diagonal: rows[..d].to_vec(), rows }
    }

    /// Imposes that `Σ_parts scale · X_part` is proportional to the identity.
    pub fn add_traceless_equality(&mut self, parts: &[Part], d: usize, tag: Tag) -> MatrixRows {
        let basis = traceless_basis(d);
        let rows = self.rows_from_basis(parts, &basis, |_| 0.0, tag);
        MatrixRows { dim: d, diagonal: Vec::new(), rows }
    }

    /// Forces the `d × d` sub-block at `(row, col)` of `block` to be Hermitian.
    pub fn add_hermitian_subblock(&mut self, block: usize, row: usize, col: usize, d: usize, tag: Tag) -> Vec<usize> {
        let size = self.blocks[block].size;
        let unit = |i: usize, j: usize| HermitianOperator::symmetric_unit(size, i, j);
        let imag = |i: usize, j: usize| HermitianOperator::antisymmetric_unit(size, i, j);
        let mut rows = Vec::new();
        for i in 0..d {
            rows.push(self.add_equality(vec![Term { block, coeff: imag(row + i, col + i) }], 0.0, tag));
            for j in (i + 1)..d {
                let re = unit(row + i, col + j).sub(&unit(row + j, col + i));
                rows.push(self.add_equality(vec![Term { block, coeff: re }], 0.0, tag));
                let im = imag(row + i, col + j).add(&imag(row + j, col + i));
                rows.push(self.add_equality(vec![Term { block, coeff: im }], 0.0, tag));
            }
        }
        rows
    }

    pub fn add_repair(&mut self, repair: RepairMove) {
        self.repairs.push(repair);
    }

    pub fn add_exposing_hint(&mut self, y: Vec<(usize, f64)>) {
        self.exposing_hints.push(y);
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::MalformedProblem("no variable blocks".into()));
        }
        if self.num_constraints() == 0 {
            return Err(Error::MalformedProblem("no constraints".into()));
        }
        if let Some(b) = self.blocks.iter().find(|b| b.size == 0) {
            return Err(Error::MalformedProblem(format!("block {} has size 0", b.label)));
        }
        let check = |terms: &[Term], what: &str| -> Result<()> {
            for t in terms {
                let Some(spec) = self.blocks.get(t.block) else {
                    return Err(Error::MalformedProblem(format!("{what} references unknown block {}", t.block)));
                };
                if t.coeff.dim() != spec.size {
                    return Err(Error::MalformedProblem(format!(
                        "{what}: coefficient of size {} on block {} of size {}",
                        t.coeff.dim(),
                        spec.label,
                        spec.size
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective.terms, "objective")?;
        for (k, c) in self.equalities.iter().chain(&self.inequalities).enumerate() {
            check(&c.terms, &format!("constraint {k}"))?;
            if !c.rhs.is_finite() {
                return Err(Error::MalformedProblem(format!("constraint {k} has non-finite rhs")));
            }
        }
        let m = self.equalities.len();
        for r in &self.repairs {
            let (rows, block) = match r {
                RepairMove::Lift { rows, block } => (rows, Some(*block)),
                RepairMove::Global { rows } => (rows, None),
            };
            if rows.iter().any(|&k| k >= m) || block.is_some_and(|b| b >= self.blocks.len()) {
                return Err(Error::MalformedProblem("repair move references unknown row or block".into()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matops::{ComplexMatrix, C64};

    #[test]
    fn basis_expansion_recovers_matrix() {
        let m = ComplexMatrix::new(
            2,
            vec![C64::new(0.7, 0.0), C64::new(0.2, -0.3), C64::new(0.2, 0.3), C64::new(-0.1, 0.0)],
        )
        .unwrap();
        let h = HermitianOperator::new(m).unwrap();
        let basis = hermitian_basis(2);
        let mut rebuilt = HermitianOperator::zeros(2);
        for e in &basis {
            let norm = frobenius_inner(e, e).unwrap();
            rebuilt.axpy(frobenius_inner(e, &h).unwrap() / norm, e);
        }
        assert!(rebuilt.matrix().max_abs_diff(h.matrix()) < 1e-15);
        assert!(traceless_basis(2).iter().all(|e| e.trace().abs() < 1e-15));
    }

    #[test]
    fn off_diagonal_pairing() {
        let b = HermitianOperator::pauli_z();
        let a = place(4, &b, Placement::OffDiagonal { row: 0, col: 2 });
        let mut x = ComplexMatrix::zeros(4);
        x.set(0, 2, C64::new(3.0, 0.0));
        x.set(2, 0, C64::new(3.0, 0.0));
        x.set(1, 3, C64::new(1.0, 0.0));
        x.set(3, 1, C64::new(1.0, 0.0));
        let x = HermitianOperator::new(x).unwrap();
        assert!((frobenius_inner(&a, &x).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn validation_catches_shape_errors() {
        let mut p = SdpProblem::new(Sense::Minimize);
        let b = p.add_block("x", 2);
        p.add_equality(vec![Term { block: b, coeff: HermitianOperator::identity(3) }], 1.0, Tag::Normalization);
        assert!(matches!(p.validate(), Err(Error::MalformedProblem(_))));
    }
}
