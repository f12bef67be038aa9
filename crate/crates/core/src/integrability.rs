//! Twisted differentials, integrability predicates for spinor pairs, the
//! linear solver for families of 3-forms `H`, and the cubic obstruction to
//! closed G₂-structures.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::form::{blades_of_grade, Blade, Form, FormError};
use crate::g2::SpinorPair;
use crate::lie::{LieAlgebra, LieError, SpanIdeal};
use crate::linalg::{self, RationalMatrix};
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntegrabilityError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("H must be a 3-form")]
    NotThreeForm,
    #[error("constraints are inconsistent; certificate combines {} rows", .certificate.len())]
    Infeasible { certificate: Vec<(String, Scalar)> },
    #[error("z = e{z} is outside dimension {dim}")]
    BadIndex { z: usize, dim: usize },
}

pub type Result<T, E = IntegrabilityError> = std::result::Result<T, E>;

fn require_three_form(h: &Form) -> Result<()> {
    if h.is_homogeneous_of(3) {
        Ok(())
    } else {
        Err(IntegrabilityError::NotThreeForm)
    }
}

/// `d_H σ = dσ + H∧σ`.
pub fn twisted_differential(g: &LieAlgebra, h: &Form, sigma: &Form) -> Result<Form> {
    require_three_form(h)?;
    Ok(&g.differential(sigma)? + &h.wedge(sigma)?)
}

/// `Some(λ)` with `a = λ·b` and `λ ≠ 0`.
pub fn proportionality(a: &Form, b: &Form) -> Option<Scalar> {
    if a.is_zero() || b.is_zero() || a.len() != b.len() {
        return None;
    }
    let mut ratio: Option<Scalar> = None;
    for (blade, cb) in b.terms() {
        let ca = a.coefficient(blade);
        if ca.is_zero() {
            return None;
        }
        let r = ca / cb;
        match &ratio {
            None => ratio = Some(r),
            Some(q) if *q == r => {}
            Some(_) => return None,
        }
    }
    ratio
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IntegrabilityReport {
    pub d_h_rho: Form,
    pub d_h_rho_hat: Form,
    pub h_closed: bool,
    pub strongly_integrable: bool,
    pub closed: bool,
    pub coclosed: bool,
    #[serde(serialize_with = "crate::report::ser_opt_scalar")]
    pub weak_odd: Option<Scalar>,
    #[serde(serialize_with = "crate::report::ser_opt_scalar")]
    pub weak_even: Option<Scalar>,
}

pub fn integrability_report(g: &LieAlgebra, h: &Form, pair: &SpinorPair) -> Result<IntegrabilityReport> {
    let d_h_rho = twisted_differential(g, h, &pair.rho)?;
    let d_h_rho_hat = twisted_differential(g, h, &pair.rho_hat)?;
    let h_closed = g.differential(h)?.is_zero();
    let closed = d_h_rho_hat.is_zero();
    let coclosed = d_h_rho.is_zero();
    Ok(IntegrabilityReport {
        weak_odd: proportionality(&d_h_rho_hat, &pair.rho),
        weak_even: proportionality(&d_h_rho, &pair.rho_hat),
        strongly_integrable: closed && coclosed,
        h_closed,
        closed,
        coclosed,
        d_h_rho,
        d_h_rho_hat,
    })
}

/// A constraint `L(H) + c = 0` that is affine in the unknown 3-form `H`,
/// possibly with several form-valued components.
pub trait HConstraint {
    fn name(&self) -> String;
    /// Linear part evaluated on `H`.
    fn linear(&self, g: &LieAlgebra, h: &Form) -> Result<Vec<Form>>;
    /// Value at `H = 0`.
    fn offset(&self, g: &LieAlgebra) -> Result<Vec<Form>>;
}

/// `dH = 0`.
#[derive(Debug, Clone)]
pub struct Closed;

impl HConstraint for Closed {
    fn name(&self) -> String {
        "dH".into()
    }

    fn linear(&self, g: &LieAlgebra, h: &Form) -> Result<Vec<Form>> {
        Ok(vec![g.differential(h)?])
    }

    fn offset(&self, g: &LieAlgebra) -> Result<Vec<Form>> {
        Ok(vec![Form::zero(g.dim())])
    }
}

/// `dρ̂ + H∧ρ̂ = 0`.
#[derive(Debug, Clone)]
pub struct ClosedStructure(pub Form);

impl HConstraint for ClosedStructure {
    fn name(&self) -> String {
        "d_H rho_hat".into()
    }

    fn linear(&self, _: &LieAlgebra, h: &Form) -> Result<Vec<Form>> {
        Ok(vec![h.wedge(&self.0)?])
    }

    fn offset(&self, g: &LieAlgebra) -> Result<Vec<Form>> {
        Ok(vec![g.differential(&self.0)?])
    }
}

/// `dρ + H∧ρ = 0`.
#[derive(Debug, Clone)]
pub struct CoclosedStructure(pub Form);

impl HConstraint for CoclosedStructure {
    fn name(&self) -> String {
        "d_H rho".into()
    }

    fn linear(&self, _: &LieAlgebra, h: &Form) -> Result<Vec<Form>> {
        Ok(vec![h.wedge(&self.0)?])
    }

    fn offset(&self, g: &LieAlgebra) -> Result<Vec<Form>> {
        Ok(vec![g.differential(&self.0)?])
    }
}

/// `H(x, y, ·) = 0` for fiber generators `x < y`.
#[derive(Debug, Clone)]
pub struct Admissible(pub SpanIdeal);

impl HConstraint for Admissible {
    fn name(&self) -> String {
        "H(x,y,.)".into()
    }

    fn linear(&self, _: &LieAlgebra, h: &Form) -> Result<Vec<Form>> {
        let gens = self.0.generators();
        let mut out = Vec::new();
        for (a, &x) in gens.iter().enumerate() {
            for &y in &gens[a + 1..] {
                out.push(h.interior(x)?.interior(y)?);
            }
        }
        Ok(out)
    }

    fn offset(&self, g: &LieAlgebra) -> Result<Vec<Form>> {
        let m = self.0.len();
        Ok(vec![Form::zero(g.dim()); m * m.saturating_sub(1) / 2])
    }
}

/// The assembled system `M·h = b` over grade-3 coefficients in lexicographic
/// blade order.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub dim: usize,
    pub columns: Vec<Blade>,
    pub matrix: RationalMatrix,
    pub rhs: Vec<Scalar>,
    /// `(constraint name, component, blade)` per row.
    pub row_labels: Vec<(String, usize, Blade)>,
}

impl ConstraintSystem {
    pub fn assemble(g: &LieAlgebra, constraints: &[&dyn HConstraint]) -> Result<Self> {
        let n = g.dim();
        let columns = blades_of_grade(n, 3);
        let mut rows: BTreeMap<(usize, usize, Blade), (Vec<Scalar>, Scalar)> = BTreeMap::new();
        for (ci, constraint) in constraints.iter().enumerate() {
            for (col, &blade) in columns.iter().enumerate() {
                let h = Form::monomial(n, blade, scalar::one());
                for (comp, image) in constraint.linear(g, &h)?.into_iter().enumerate() {
                    for (b, c) in image.terms() {
                        let row = rows
                            .entry((ci, comp, b))
                            .or_insert_with(|| (vec![scalar::zero(); columns.len()], scalar::zero()));
                        row.0[col] = c.clone();
                    }
                }
            }
            for (comp, offset) in constraint.offset(g)?.into_iter().enumerate() {
                for (b, c) in offset.terms() {
                    let row = rows
                        .entry((ci, comp, b))
                        .or_insert_with(|| (vec![scalar::zero(); columns.len()], scalar::zero()));
                    row.1 = -c.clone();
                }
            }
        }
        let mut matrix_rows = Vec::with_capacity(rows.len());
        let mut rhs = Vec::with_capacity(rows.len());
        let mut row_labels = Vec::with_capacity(rows.len());
        for ((ci, comp, blade), (row, b)) in rows {
            matrix_rows.push(row);
            rhs.push(b);
            row_labels.push((constraints[ci].name(), comp, blade));
        }
        Ok(ConstraintSystem {
            dim: n,
            matrix: RationalMatrix::from_rows(columns.len(), matrix_rows),
            columns,
            rhs,
            row_labels,
        })
    }

    pub fn vector_to_form(&self, v: &[Scalar]) -> Form {
        let mut out = Form::zero(self.dim);
        for (blade, c) in self.columns.iter().zip(v) {
            out.add_term(*blade, c.clone());
        }
        out
    }

    pub fn form_to_vector(&self, h: &Form) -> Vec<Scalar> {
        self.columns.iter().map(|&b| h.coefficient(b)).collect()
    }

    pub fn solve(&self) -> Result<AffineSolutionSpace> {
        match self.matrix.solve_affine_with_certificate(&self.rhs) {
            Ok(sol) => Ok(AffineSolutionSpace {
                particular: self.vector_to_form(&sol.particular),
                dimension: sol.kernel.len(),
                kernel_basis: sol.kernel.iter().map(|k| self.vector_to_form(k)).collect(),
            }),
            Err(y) => Err(IntegrabilityError::Infeasible {
                certificate: y
                    .into_iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(r, c)| {
                        let (name, comp, blade) = &self.row_labels[r];
                        let mut label = format!("{name}#{comp} ");
                        crate::literal::write_blade(&mut label, *blade, self.dim > crate::literal::SHORTHAND_MAX_DIM)
                            .expect("string write");
                        (label, c)
                    })
                    .collect(),
            }),
        }
    }
}

/// `particular + span(kernel_basis)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineSolutionSpace {
    pub particular: Form,
    pub kernel_basis: Vec<Form>,
    pub dimension: usize,
}

impl AffineSolutionSpace {
    pub fn contains(&self, h: &Form) -> bool {
        let diff = h - &self.particular;
        if diff.is_zero() {
            return true;
        }
        let columns = blades_of_grade(h.dim(), 3);
        let vec = |f: &Form| columns.iter().map(|&b| f.coefficient(b)).collect::<Vec<_>>();
        if !diff.is_homogeneous_of(3) {
            return false;
        }
        let basis: Vec<Vec<Scalar>> = self.kernel_basis.iter().map(vec).collect();
        linalg::in_span(&basis, &vec(&diff))
    }

    /// `particular + Σ coeffs[i]·kernel_basis[i]`.
    pub fn member(&self, coeffs: &[Scalar]) -> Form {
        let mut out = self.particular.clone();
        for (k, c) in self.kernel_basis.iter().zip(coeffs) {
            out += &(k * c);
        }
        out
    }
}

pub fn solve_h_space(g: &LieAlgebra, constraints: &[&dyn HConstraint]) -> Result<AffineSolutionSpace> {
    ConstraintSystem::assemble(g, constraints)?.solve()
}

/// Result of testing whether `(ι_z σ)³` vanishes on all closed 3-forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ObstructionReport {
    Vanishes { closed_dimension: usize },
    Witness { closed_dimension: usize, sigma: Form, cube: Form },
}

impl ObstructionReport {
    pub fn vanishes(&self) -> bool {
        matches!(self, ObstructionReport::Vanishes { .. })
    }
}

/// Evaluates `T(a,b,c) = ι_z a ∧ ι_z b ∧ ι_z c` on a basis of closed
/// 3-forms; the cube vanishes identically iff every `T` on sorted triples does.
pub fn cubic_obstruction(g: &LieAlgebra, z: usize) -> Result<ObstructionReport> {
    if z == 0 || z > g.dim() {
        return Err(IntegrabilityError::BadIndex { z, dim: g.dim() });
    }
    let closed = solve_h_space(g, &[&Closed])?;
    let basis = closed.kernel_basis;
    let closed_dimension = basis.len();
    let contracted: Vec<Form> = basis.iter().map(|b| b.interior(z)).collect::<Result<_, _>>()?;
    let squares: Vec<Form> = contracted.iter().map(|c| c ^ c).collect();

    let witness = |sigma: Form| -> Result<ObstructionReport> {
        let c = sigma.interior(z)?;
        let cube = &(&c ^ &c) ^ &c;
        debug_assert!(!cube.is_zero());
        Ok(ObstructionReport::Witness {
            closed_dimension,
            sigma,
            cube,
        })
    };

    for (i, sq) in squares.iter().enumerate() {
        if !(sq ^ &contracted[i]).is_zero() {
            return witness(basis[i].clone());
        }
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let iij = &squares[i] ^ &contracted[j];
            let ijj = &squares[j] ^ &contracted[i];
            if iij.is_zero() && ijj.is_zero() {
                continue;
            }
            // singles vanish, so (B_i + t B_j)^3 = 3t·T_iij + 3t²·T_ijj
            let t = if (&iij + &ijj).is_zero() { -1 } else { 1 };
            return witness(&basis[i] + &(&basis[j] * &scalar::int(t)));
        }
    }
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let ij = &contracted[i] ^ &contracted[j];
            if ij.is_zero() {
                continue;
            }
            for k in j + 1..basis.len() {
                if !(&ij ^ &contracted[k]).is_zero() {
                    return witness(&(&basis[i] + &basis[j]) + &basis[k]);
                }
            }
        }
    }
    Ok(ObstructionReport::Vanishes { closed_dimension })
}
