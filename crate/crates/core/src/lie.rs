//! Finite-dimensional Lie algebras given by structure constants, their
//! Chevalley–Eilenberg differential, and the quotient / extension
//! constructions used for fiberwise duality.
//!
//! Convention: `dα(x, y) = −α([x, y])`, so for `[e_i, e_j] = Σ_k c^k_ij e_k`
//! the dual basis satisfies `de^k = −Σ_{i<j} c^k_ij e^{ij}`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::form::{Blade, Form, FormError, MAX_DIM};
use crate::linalg::RationalMatrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("bracket [e{0}, e{0}] is identically zero and cannot be assigned")]
    SelfBracket(usize),
    #[error("bracket [e{i}, e{j}] assigned twice")]
    DuplicateBracket { i: usize, j: usize },
    #[error("differential of e{0} must be a 2-form")]
    NotTwoForm(usize),
    #[error("span of {generators:?} is not an ideal: [e{generator}, e{other}] = {witness}")]
    NotAnIdeal {
        generators: Vec<usize>,
        generator: usize,
        other: usize,
        witness: Form,
    },
    #[error("extension cocycle #{index} is not closed: d = {residual}")]
    NotClosed { index: usize, residual: Form },
    #[error("matrix is not a derivation: Leibniz fails on (e{i}, e{j}) with residual {residual:?}")]
    NotADerivation {
        i: usize,
        j: usize,
        residual: Vec<String>,
    },
    #[error("form is not admissible: H(e{x}, e{y}, ·) = {residual}")]
    NotAdmissible { x: usize, y: usize, residual: Form },
    #[error("{what} is not basic: {witness}")]
    NotBasic { what: String, witness: Form },
    #[error("change-of-basis matrix is singular")]
    Singular,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("invalid fiber: {0}")]
    InvalidFiber(String),
}

pub type Result<T, E = LieError> = std::result::Result<T, E>;

/// Structure constants `[e_i, e_j] = Σ_k c^k_ij e_k`, stored for `i < j`.
#[derive(Clone, PartialEq, Eq)]
pub struct LieAlgebra {
    dim: usize,
    brackets: BTreeMap<(usize, usize), BTreeMap<usize, Scalar>>,
    /// `de^k` at position `k - 1`.
    differentials: Vec<Form>,
    jacobi: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JacobiReport {
    Pass,
    Fail {
        triple: (usize, usize, usize),
        residual: Vec<Scalar>,
    },
}

impl JacobiReport {
    pub fn passed(&self) -> bool {
        matches!(self, JacobiReport::Pass)
    }
}

fn check_index(index: usize, dim: usize) -> Result<()> {
    if index == 0 || index > dim {
        Err(LieError::IndexOutOfRange { index, dim })
    } else {
        Ok(())
    }
}

impl LieAlgebra {
    pub fn abelian(dim: usize) -> Self {
        LieAlgebra::build(dim, BTreeMap::new())
    }

    fn build(dim: usize, mut brackets: BTreeMap<(usize, usize), BTreeMap<usize, Scalar>>) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        brackets.retain(|_, v| {
            v.retain(|_, c| !c.is_zero());
            !v.is_empty()
        });
        let mut differentials = vec![Form::zero(dim); dim];
        for (&(i, j), out) in &brackets {
            let blade = Blade::basis(i).wedge(Blade::basis(j)).expect("i < j").1;
            for (&k, c) in out {
                differentials[k - 1].add_term(blade, -c.clone());
            }
        }
        let mut algebra = LieAlgebra {
            dim,
            brackets,
            differentials,
            jacobi: true,
        };
        algebra.jacobi = algebra.jacobi_check().passed();
        algebra
    }

    /// `[e_i, e_j] = v` for each `(i, j, v)`; pairs with `i > j` are stored
    /// antisymmetrically.
    pub fn from_brackets(dim: usize, brackets: impl IntoIterator<Item = (usize, usize, Vec<Scalar>)>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(FormError::DimensionTooLarge(dim).into());
        }
        let mut table: BTreeMap<(usize, usize), BTreeMap<usize, Scalar>> = BTreeMap::new();
        for (i, j, v) in brackets {
            check_index(i, dim)?;
            check_index(j, dim)?;
            if i == j {
                return Err(LieError::SelfBracket(i));
            }
            if v.len() != dim {
                return Err(LieError::DimensionMismatch {
                    left: v.len(),
                    right: dim,
                });
            }
            let (key, negate) = if i < j { ((i, j), false) } else { ((j, i), true) };
            if table.contains_key(&key) {
                return Err(LieError::DuplicateBracket { i: key.0, j: key.1 });
            }
            let entry = table.entry(key).or_default();
            for (k, c) in v.into_iter().enumerate() {
                if !c.is_zero() {
                    entry.insert(k + 1, if negate { -c } else { c });
                }
            }
        }
        Ok(LieAlgebra::build(dim, table))
    }

    /// Integer shorthand: each `(i, j, k, c)` adds `c·e_k` to `[e_i, e_j]`.
    pub fn from_i64_brackets(dim: usize, entries: &[(usize, usize, usize, i64)]) -> Result<Self> {
        let mut grouped: BTreeMap<(usize, usize), Vec<Scalar>> = BTreeMap::new();
        for &(i, j, k, c) in entries {
            check_index(k, dim)?;
            let v = grouped.entry((i, j)).or_insert_with(|| vec![scalar::zero(); dim]);
            v[k - 1] += scalar::int(c);
        }
        LieAlgebra::from_brackets(dim, grouped.into_iter().map(|((i, j), v)| (i, j, v)))
    }

    /// From the differentials `de^k` of the dual basis (unlisted ones are zero).
    pub fn from_differentials(dim: usize, differentials: impl IntoIterator<Item = (usize, Form)>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(FormError::DimensionTooLarge(dim).into());
        }
        let mut table: BTreeMap<(usize, usize), BTreeMap<usize, Scalar>> = BTreeMap::new();
        let mut seen = vec![false; dim];
        for (k, form) in differentials {
            check_index(k, dim)?;
            if form.dim() != dim {
                return Err(LieError::DimensionMismatch {
                    left: form.dim(),
                    right: dim,
                });
            }
            if !form.is_homogeneous_of(2) {
                return Err(LieError::NotTwoForm(k));
            }
            if std::mem::replace(&mut seen[k - 1], true) {
                return Err(LieError::DuplicateBracket { i: k, j: k });
            }
            for (blade, c) in form.terms() {
                let mut idx = blade.indices();
                let (i, j) = (idx.next().unwrap(), idx.next().unwrap());
                table.entry((i, j)).or_default().insert(k, -c.clone());
            }
        }
        Ok(LieAlgebra::build(dim, table))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when the Jacobi identity held at construction.
    pub fn is_jacobi(&self) -> bool {
        self.jacobi
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.is_empty()
    }

    /// `c^k_ij` for any ordered pair.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Scalar {
        if i == j {
            return scalar::zero();
        }
        let (key, negate) = if i < j { ((i, j), false) } else { ((j, i), true) };
        match self.brackets.get(&key).and_then(|m| m.get(&k)) {
            Some(c) if negate => -c.clone(),
            Some(c) => c.clone(),
            None => scalar::zero(),
        }
    }

    /// Coordinates of `[e_i, e_j]`.
    pub fn bracket(&self, i: usize, j: usize) -> Vec<Scalar> {
        let mut out = vec![scalar::zero(); self.dim];
        if i == j {
            return out;
        }
        let (key, negate) = if i < j { ((i, j), false) } else { ((j, i), true) };
        if let Some(m) = self.brackets.get(&key) {
            for (&k, c) in m {
                out[k - 1] = if negate { -c.clone() } else { c.clone() };
            }
        }
        out
    }

    /// Nonzero brackets `([e_i, e_j], i < j)` in lexicographic order.
    pub fn nonzero_brackets(&self) -> impl Iterator<Item = ((usize, usize), Vec<Scalar>)> + '_ {
        self.brackets.keys().map(|&(i, j)| ((i, j), self.bracket(i, j)))
    }

    /// Bracket of arbitrary coordinate vectors.
    pub fn bracket_vectors(&self, u: &[Scalar], v: &[Scalar]) -> Vec<Scalar> {
        let mut out = vec![scalar::zero(); self.dim];
        for (&(i, j), m) in &self.brackets {
            let coeff = &u[i - 1] * &v[j - 1] - &u[j - 1] * &v[i - 1];
            if coeff.is_zero() {
                continue;
            }
            for (&k, c) in m {
                out[k - 1] += &coeff * c;
            }
        }
        out
    }

    /// `de^k`.
    pub fn basis_differential(&self, k: usize) -> &Form {
        &self.differentials[k - 1]
    }

    pub fn basis_differentials(&self) -> &[Form] {
        &self.differentials
    }

    /// Chevalley–Eilenberg differential, extended from `de^k` as an odd derivation.
    pub fn differential(&self, form: &Form) -> Result<Form> {
        if form.dim() != self.dim {
            return Err(LieError::DimensionMismatch {
                left: form.dim(),
                right: self.dim,
            });
        }
        let mut out = Form::zero(self.dim);
        for (blade, c) in form.terms() {
            for (p, i) in blade.indices().enumerate() {
                let rest = blade.without(i);
                for (b2, c2) in self.differentials[i - 1].terms() {
                    if let Some((odd, merged)) = b2.wedge(rest) {
                        let v = c * c2;
                        out.add_term(merged, if odd != (p % 2 == 1) { -v } else { v });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn jacobi_check(&self) -> JacobiReport {
        let n = self.dim;
        let unit = |i: usize| {
            let mut v = vec![scalar::zero(); n];
            v[i - 1] = scalar::one();
            v
        };
        for i in 1..=n {
            for j in i + 1..=n {
                let ij = self.bracket(i, j);
                for k in j + 1..=n {
                    let mut r = self.bracket_vectors(&ij, &unit(k));
                    let jk = self.bracket_vectors(&self.bracket(j, k), &unit(i));
                    let ki = self.bracket_vectors(&self.bracket(k, i), &unit(j));
                    for (a, (b, c)) in r.iter_mut().zip(jk.into_iter().zip(ki)) {
                        *a += b + c;
                    }
                    if r.iter().any(|c| !c.is_zero()) {
                        return JacobiReport::Fail {
                            triple: (i, j, k),
                            residual: r,
                        };
                    }
                }
            }
        }
        JacobiReport::Pass
    }

    /// Basis of the center as coordinate vectors (kernel of all `ad`).
    pub fn center(&self) -> Vec<Vec<Scalar>> {
        let n = self.dim;
        let mut rows = Vec::new();
        for j in 1..=n {
            for k in 1..=n {
                let row: Vec<Scalar> = (1..=n).map(|i| self.structure_constant(i, j, k)).collect();
                if row.iter().any(|c| !c.is_zero()) {
                    rows.push(row);
                }
            }
        }
        RationalMatrix::from_rows(n, rows).kernel_basis()
    }

    /// `tr(ad e_i)` for each basis vector; all zero iff unimodular.
    pub fn ad_traces(&self) -> Vec<Scalar> {
        (1..=self.dim)
            .map(|i| {
                (1..=self.dim).fold(scalar::zero(), |acc, j| acc + self.structure_constant(i, j, j))
            })
            .collect()
    }

    pub fn quotient(&self, ideal: &SpanIdeal) -> Result<Quotient> {
        ideal.check_dim(self.dim)?;
        ideal.require_ideal(self)?;
        let lift: Vec<usize> = (1..=self.dim).filter(|i| !ideal.contains(*i)).collect();
        let mut project = vec![None; self.dim];
        for (new, &old) in lift.iter().enumerate() {
            project[old - 1] = Some(new + 1);
        }
        let mut brackets = Vec::new();
        for (a, &i) in lift.iter().enumerate() {
            for &j in &lift[a + 1..] {
                let v: Vec<Scalar> = lift.iter().map(|&k| self.structure_constant(i, j, k)).collect();
                if v.iter().any(|c| !c.is_zero()) {
                    brackets.push((project[i - 1].unwrap(), project[j - 1].unwrap(), v));
                }
            }
        }
        let algebra = LieAlgebra::from_brackets(lift.len(), brackets)?;
        Ok(Quotient {
            algebra,
            lift,
            project,
        })
    }

    /// Central extension by closed 2-forms `Ψ_k`, adjoining generators
    /// `z_k` after the existing basis with `dz̃^k = Ψ_k`.
    pub fn central_extension(&self, psis: &[Form]) -> Result<LieAlgebra> {
        let slots: Vec<usize> = (self.dim + 1..=self.dim + psis.len()).collect();
        Ok(self.central_extension_in_slots(psis, &slots)?.0)
    }

    /// Central extension placing `z_k` at index `slots[k]` of the result; the
    /// old basis fills the remaining indices in order. Also returns the map
    /// old index → new index.
    pub fn central_extension_in_slots(&self, psis: &[Form], slots: &[usize]) -> Result<(LieAlgebra, Vec<usize>)> {
        if psis.len() != slots.len() {
            return Err(LieError::DimensionMismatch {
                left: psis.len(),
                right: slots.len(),
            });
        }
        let total = self.dim + psis.len();
        let mut taken = vec![false; total];
        for &s in slots {
            check_index(s, total)?;
            if std::mem::replace(&mut taken[s - 1], true) {
                return Err(LieError::InvalidFiber(format!("slot {s} used twice")));
            }
        }
        let embed: Vec<usize> = (1..=total).filter(|i| !taken[i - 1]).collect();
        for (k, psi) in psis.iter().enumerate() {
            if psi.dim() != self.dim {
                return Err(LieError::DimensionMismatch {
                    left: psi.dim(),
                    right: self.dim,
                });
            }
            if !psi.is_homogeneous_of(2) {
                return Err(LieError::NotTwoForm(slots[k]));
            }
            let residual = self.differential(psi)?;
            if !residual.is_zero() {
                return Err(LieError::NotClosed { index: k + 1, residual });
            }
        }
        let relabel = |f: &Form| f.relabel(total, |i| embed.get(i - 1).copied());
        let mut diffs = Vec::new();
        for (k, de) in self.differentials.iter().enumerate() {
            diffs.push((embed[k], relabel(de)?));
        }
        for (psi, &s) in psis.iter().zip(slots) {
            diffs.push((s, relabel(psi)?));
        }
        Ok((LieAlgebra::from_differentials(total, diffs)?, embed))
    }

    /// Semidirect extension by a derivation: appends `e_{n+1}` with
    /// `[e_{n+1}, v] = Dv`.
    pub fn extension_by_derivation(&self, derivation: &Derivation) -> Result<LieAlgebra> {
        derivation.check(self)?;
        let n = self.dim;
        let mut brackets = Vec::new();
        for ((i, j), v) in self.nonzero_brackets() {
            let mut w = v;
            w.push(scalar::zero());
            brackets.push((i, j, w));
        }
        for j in 1..=n {
            let image: Vec<Scalar> = (0..n).map(|i| derivation.matrix[(i, j - 1)].clone()).collect();
            if image.iter().all(Zero::is_zero) {
                continue;
            }
            // [e_j, e_{n+1}] = −D e_j
            let mut w: Vec<Scalar> = image.into_iter().map(|c| -c).collect();
            w.push(scalar::zero());
            brackets.push((j, n + 1, w));
        }
        LieAlgebra::from_brackets(n + 1, brackets)
    }

    /// Rewrites the algebra in the basis `f_j = Σ_i P_ij e_i` (columns of `P`).
    pub fn change_basis(&self, p: &RationalMatrix) -> Result<LieAlgebra> {
        let n = self.dim;
        if p.rows() != n || p.cols() != n {
            return Err(LieError::DimensionMismatch { left: p.rows(), right: n });
        }
        let inverse = invert(p).ok_or(LieError::Singular)?;
        let mut brackets = Vec::new();
        for a in 1..=n {
            for b in a + 1..=n {
                let w = self.bracket_vectors(&p.column(a - 1), &p.column(b - 1));
                let coords = inverse.mul_vec(&w);
                if coords.iter().any(|c| !c.is_zero()) {
                    brackets.push((a, b, coords));
                }
            }
        }
        LieAlgebra::from_brackets(n, brackets)
    }

    /// Splits `h` along a central basis-aligned fiber:
    /// `h = Σ_k e^{x_k} ∧ ι_{x_k}h + δ`, with `δ` and each contraction basic.
    pub fn basic_decomposition(&self, fiber: &SpanIdeal, h: &Form) -> Result<BasicDecomposition> {
        fiber.check_dim(self.dim)?;
        if h.dim() != self.dim {
            return Err(LieError::DimensionMismatch {
                left: h.dim(),
                right: self.dim,
            });
        }
        let gens = fiber.generators();
        for (a, &x) in gens.iter().enumerate() {
            for &y in &gens[a + 1..] {
                let residual = h.interior(x)?.interior(y)?;
                if !residual.is_zero() {
                    return Err(LieError::NotAdmissible { x, y, residual });
                }
            }
        }
        let mut contractions = Vec::with_capacity(gens.len());
        let mut fiber_part = Form::zero(self.dim);
        for &x in gens {
            let psi = h.interior(x)?;
            fiber_part += &(&Form::basis(self.dim, x) ^ &psi);
            contractions.push(psi);
        }
        let basic_part = h - &fiber_part;
        self.require_basic(fiber, &basic_part, "basic component")?;
        for (k, psi) in contractions.iter().enumerate() {
            self.require_basic(fiber, psi, &format!("contraction with e{}", gens[k]))?;
        }
        Ok(BasicDecomposition {
            fiber_part,
            basic_part,
            fiber_contractions: contractions,
        })
    }

    /// `Err(witness)` unless `ι_x β = 0` and `ι_x dβ = 0` for every fiber generator.
    pub fn basic_witness(&self, fiber: &SpanIdeal, beta: &Form) -> Result<Option<Form>> {
        let d_beta = self.differential(beta)?;
        for &x in fiber.generators() {
            let w = beta.interior(x)?;
            if !w.is_zero() {
                return Ok(Some(w));
            }
            let w = d_beta.interior(x)?;
            if !w.is_zero() {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    pub fn is_basic(&self, fiber: &SpanIdeal, beta: &Form) -> Result<bool> {
        Ok(self.basic_witness(fiber, beta)?.is_none())
    }

    fn require_basic(&self, fiber: &SpanIdeal, beta: &Form, what: &str) -> Result<()> {
        match self.basic_witness(fiber, beta)? {
            None => Ok(()),
            Some(witness) => Err(LieError::NotBasic {
                what: what.to_string(),
                witness,
            }),
        }
    }
}

fn invert(p: &RationalMatrix) -> Option<RationalMatrix> {
    let (rref, e) = p.rref_with_transform();
    (rref.rank == p.rows()).then_some(e)
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra(dim {}", self.dim)?;
        for (k, de) in self.differentials.iter().enumerate() {
            if !de.is_zero() {
                write!(f, "; de{} = {de}", k + 1)?;
            }
        }
        write!(f, ")")
    }
}

/// A span of basis vectors `e_i`, used as ideal or fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanIdeal {
    dim: usize,
    generators: Vec<usize>,
}

impl SpanIdeal {
    pub fn new(dim: usize, generators: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut gens: Vec<usize> = generators.into_iter().collect();
        let count = gens.len();
        gens.sort_unstable();
        gens.dedup();
        if gens.len() != count {
            return Err(LieError::InvalidFiber("repeated generator".into()));
        }
        for &g in &gens {
            check_index(g, dim)?;
        }
        Ok(SpanIdeal { dim, generators: gens })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Generator indices in increasing order.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.generators.binary_search(&index).is_ok()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(LieError::DimensionMismatch {
                left: self.dim,
                right: dim,
            })
        }
    }

    fn ideal_witness(&self, g: &LieAlgebra) -> Option<(usize, usize, Vec<Scalar>)> {
        for &a in &self.generators {
            for j in 1..=g.dim() {
                let v = g.bracket(a, j);
                if v.iter().enumerate().any(|(k, c)| !c.is_zero() && !self.contains(k + 1)) {
                    return Some((a, j, v));
                }
            }
        }
        None
    }

    pub fn is_ideal(&self, g: &LieAlgebra) -> bool {
        self.dim == g.dim() && self.ideal_witness(g).is_none()
    }

    fn require_ideal(&self, g: &LieAlgebra) -> Result<()> {
        match self.ideal_witness(g) {
            None => Ok(()),
            Some((generator, other, v)) => Err(LieError::NotAnIdeal {
                generators: self.generators.clone(),
                generator,
                other,
                witness: vector_as_form(&v),
            }),
        }
    }

    pub fn is_abelian(&self, g: &LieAlgebra) -> bool {
        self.generators.iter().all(|&a| {
            self.generators
                .iter()
                .all(|&b| g.bracket(a, b).iter().all(Zero::is_zero))
        })
    }

    pub fn is_central(&self, g: &LieAlgebra) -> bool {
        self.generators
            .iter()
            .all(|&a| (1..=g.dim()).all(|j| g.bracket(a, j).iter().all(Zero::is_zero)))
    }
}

/// Coordinates `(v_1, ..., v_n)` written as the 1-form `Σ v_i e^i`
/// (used only for display of vectors).
pub fn vector_as_form(v: &[Scalar]) -> Form {
    let mut out = Form::zero(v.len());
    for (i, c) in v.iter().enumerate() {
        out.add_term(Blade::basis(i + 1), c.clone());
    }
    out
}

/// `g / a` with the index bookkeeping between the two bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub algebra: LieAlgebra,
    /// quotient index `k` (at `k - 1`) → original index
    pub lift: Vec<usize>,
    /// original index `i` (at `i - 1`) → quotient index, `None` on the ideal
    pub project: Vec<Option<usize>>,
}

impl Quotient {
    /// Rewrites a form on `g` that avoids the ideal covectors as a form on `g/a`.
    pub fn push_forward(&self, form: &Form) -> Result<Form> {
        Ok(form.relabel(self.algebra.dim(), |i| self.project.get(i - 1).copied().flatten())?)
    }

    pub fn pull_back(&self, form: &Form) -> Result<Form> {
        Ok(form.relabel(self.project.len(), |i| self.lift.get(i - 1).copied())?)
    }
}

/// A linear map `D` on the algebra with `D[x, y] = [Dx, y] + [x, Dy]`.
/// Column `j` of `matrix` holds `D e_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    matrix: RationalMatrix,
}

impl Derivation {
    pub fn new(g: &LieAlgebra, matrix: RationalMatrix) -> Result<Self> {
        let d = Derivation { matrix };
        d.check(g)?;
        Ok(d)
    }

    pub fn zero(dim: usize) -> Self {
        Derivation {
            matrix: RationalMatrix::zeros(dim, dim),
        }
    }

    pub fn matrix(&self) -> &RationalMatrix {
        &self.matrix
    }

    fn check(&self, g: &LieAlgebra) -> Result<()> {
        let n = g.dim();
        if self.matrix.rows() != n || self.matrix.cols() != n {
            return Err(LieError::DimensionMismatch {
                left: self.matrix.rows(),
                right: n,
            });
        }
        let unit = |i: usize| {
            let mut v = vec![scalar::zero(); n];
            v[i - 1] = scalar::one();
            v
        };
        for i in 1..=n {
            for j in i + 1..=n {
                let lhs = self.matrix.mul_vec(&g.bracket(i, j));
                let a = g.bracket_vectors(&self.matrix.column(i - 1), &unit(j));
                let b = g.bracket_vectors(&unit(i), &self.matrix.column(j - 1));
                let residual: Vec<Scalar> = lhs
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(l, (x, y))| l - x - y)
                    .collect();
                if residual.iter().any(|c| !c.is_zero()) {
                    return Err(LieError::NotADerivation {
                        i,
                        j,
                        residual: residual.iter().map(|c| c.to_string()).collect(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// `h = fiber_part + basic_part`, `fiber_part = Σ_k e^{x_k} ∧ ι_{x_k}h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicDecomposition {
    pub fiber_part: Form,
    pub basic_part: Form,
    /// `ι_{x_k} h` in fiber order.
    pub fiber_contractions: Vec<Form>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn f(dim: usize, terms: &[(i64, &[usize])]) -> Form {
        Form::from_terms(dim, terms.iter().map(|(c, i)| (*c, *i))).unwrap()
    }

    fn example1() -> LieAlgebra {
        LieAlgebra::from_i64_brackets(7, &[(1, 7, 3, -1), (1, 5, 4, -1), (2, 7, 4, -1), (1, 3, 6, -1)]).unwrap()
    }

    fn example2() -> LieAlgebra {
        LieAlgebra::from_i64_brackets(7, &[(2, 5, 6, -1), (4, 5, 7, 1)]).unwrap()
    }

    fn heisenberg() -> LieAlgebra {
        LieAlgebra::from_i64_brackets(3, &[(1, 2, 3, 1)]).unwrap()
    }

    fn unit(dim: usize, i: usize) -> Vec<Scalar> {
        let mut v = vec![int(0); dim];
        v[i - 1] = int(1);
        v
    }

    #[test]
    fn jacobi_reports() {
        assert!(example1().jacobi_check().passed());
        let so3 = LieAlgebra::from_i64_brackets(3, &[(1, 2, 3, 1), (2, 3, 1, 1), (3, 1, 2, 1)]).unwrap();
        assert!(so3.is_jacobi());
        let bad = LieAlgebra::from_i64_brackets(3, &[(1, 2, 2, 1), (1, 3, 3, 1), (2, 3, 1, 1)]).unwrap();
        assert!(!bad.is_jacobi());
        assert_eq!(
            bad.jacobi_check(),
            JacobiReport::Fail {
                triple: (1, 2, 3),
                residual: vec![int(2), int(0), int(0)]
            }
        );
    }

    #[test]
    fn differentials_follow_the_sign_convention() {
        let g = example1();
        assert_eq!(g.basis_differential(3), &f(7, &[(1, &[1, 7])]));
        assert_eq!(g.basis_differential(4), &f(7, &[(1, &[1, 5]), (1, &[2, 7])]));
        assert_eq!(g.basis_differential(6), &f(7, &[(1, &[1, 3])]));
        let h = example2();
        assert_eq!(h.differential(&f(7, &[(1, &[1, 2, 7])])).unwrap(), f(7, &[(-1, &[1, 2, 4, 5])]));
    }

    #[test]
    fn brackets_and_differentials_interconvert() {
        let g = example1();
        let diffs: Vec<(usize, Form)> = (1..=7).map(|k| (k, g.basis_differential(k).clone())).collect();
        assert_eq!(LieAlgebra::from_differentials(7, diffs).unwrap(), g);
    }

    #[test]
    fn centers() {
        assert_eq!(example1().center(), vec![unit(7, 4), unit(7, 6)]);
        assert_eq!(example2().center(), vec![unit(7, 1), unit(7, 3), unit(7, 6), unit(7, 7)]);
        assert_eq!(LieAlgebra::abelian(3).center().len(), 3);
        let g = example2();
        for z in g.center() {
            for j in 1..=7 {
                assert!(g.bracket_vectors(&z, &unit(7, j)).iter().all(Zero::is_zero));
            }
        }
    }

    #[test]
    fn quotient_of_example1_by_e6() {
        let g = example1();
        let q = g.quotient(&SpanIdeal::new(7, [6]).unwrap()).unwrap();
        assert_eq!(q.lift, vec![1, 2, 3, 4, 5, 7]);
        let n = &q.algebra;
        let back = |k: usize| q.pull_back(n.basis_differential(k)).unwrap();
        assert_eq!(back(3), f(7, &[(1, &[1, 7])]));
        assert_eq!(back(4), f(7, &[(1, &[1, 5]), (1, &[2, 7])]));
        for k in [1, 2, 5, 6] {
            assert!(n.basis_differential(k).is_zero());
        }
    }

    #[test]
    fn quotient_rejects_non_ideals() {
        let err = heisenberg().quotient(&SpanIdeal::new(3, [1]).unwrap()).unwrap_err();
        assert!(matches!(err, LieError::NotAnIdeal { generator: 1, other: 2, .. }));
    }

    #[test]
    fn central_extension_adds_closed_cocycles() {
        let ab = LieAlgebra::abelian(2);
        let ext = ab.central_extension(&[f(2, &[(1, &[1, 2])])]).unwrap();
        assert_eq!(ext, LieAlgebra::from_differentials(3, [(3, f(3, &[(1, &[1, 2])]))]).unwrap());
        let trivial = ab.central_extension(&[Form::zero(2)]).unwrap();
        assert_eq!(trivial, LieAlgebra::abelian(3));
    }

    #[test]
    fn central_extension_rejects_non_closed_cocycles() {
        // de^1 = e^34: d(e^12) = e^342 = e^234
        let n = LieAlgebra::from_differentials(4, [(1, f(4, &[(1, &[3, 4])]))]).unwrap();
        let err = n.central_extension(&[f(4, &[(1, &[1, 2])])]).unwrap_err();
        assert_eq!(
            err,
            LieError::NotClosed {
                index: 1,
                residual: f(4, &[(1, &[2, 3, 4])])
            }
        );
    }

    #[test]
    fn derivation_extension_builds_the_two_fiber_example() {
        let h = LieAlgebra::from_differentials(6, [(1, f(6, &[(1, &[3, 5]), (1, &[4, 6])]))]).unwrap();
        // D e_{3+i} = e_{6-i}
        let mut m = RationalMatrix::zeros(6, 6);
        for i in 0..=3 {
            m[(6 - i - 1, 3 + i - 1)] = int(1);
        }
        let d = Derivation::new(&h, m).unwrap();
        let g = h.extension_by_derivation(&d).unwrap();
        let expected = LieAlgebra::from_differentials(
            7,
            [
                (1, f(7, &[(1, &[3, 5]), (1, &[4, 6])])),
                (3, f(7, &[(1, &[6, 7])])),
                (4, f(7, &[(1, &[5, 7])])),
                (5, f(7, &[(1, &[4, 7])])),
                (6, f(7, &[(1, &[3, 7])])),
            ],
        )
        .unwrap();
        assert_eq!(g, expected);
        assert!(g.is_jacobi());
    }

    #[test]
    fn zero_derivation_gives_direct_sum() {
        let h = heisenberg();
        let g = h.extension_by_derivation(&Derivation::zero(3)).unwrap();
        assert_eq!(g, LieAlgebra::from_i64_brackets(4, &[(1, 2, 3, 1)]).unwrap());
    }

    #[test]
    fn non_derivations_are_rejected() {
        // elementary matrix D e_1 = e_1 on the Heisenberg algebra: D[e1,e2] = 0 but [De1,e2] = e3
        let mut m = RationalMatrix::zeros(3, 3);
        m[(0, 0)] = int(1);
        assert!(matches!(
            Derivation::new(&heisenberg(), m),
            Err(LieError::NotADerivation { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn basic_decomposition_examples() {
        let g = example1();
        let a = SpanIdeal::new(7, [6]).unwrap();
        let h = f(7, &[(1, &[1, 6, 7]), (-1, &[2, 5, 7])]);
        let dec = g.basic_decomposition(&a, &h).unwrap();
        assert_eq!(dec.fiber_part, f(7, &[(1, &[1, 6, 7])]));
        assert_eq!(dec.basic_part, f(7, &[(-1, &[2, 5, 7])]));
        assert_eq!(dec.fiber_contractions, vec![f(7, &[(-1, &[1, 7])])]);
        assert!(!g.is_basic(&a, &Form::basis(7, 6)).unwrap());
    }

    #[test]
    fn basic_decomposition_rejects_fiber_components() {
        let g = LieAlgebra::abelian(4);
        let a = SpanIdeal::new(4, [1, 2]).unwrap();
        let err = g.basic_decomposition(&a, &f(4, &[(1, &[1, 2, 3])])).unwrap_err();
        assert!(matches!(err, LieError::NotAdmissible { x: 1, y: 2, .. }));
    }

    #[test]
    fn change_of_basis_round_trip() {
        let g = heisenberg();
        // f1 = e1 + e2, f2 = e2, f3 = 2 e3
        let p = RationalMatrix::from_i64(&[&[1, 0, 0], &[1, 1, 0], &[0, 0, 2]]);
        let h = g.change_basis(&p).unwrap();
        // [f1, f2] = [e1, e2] = e3 = 1/2 f3
        assert_eq!(h.bracket(1, 2), vec![int(0), int(0), crate::scalar::ratio(1, 2)]);
        assert!(matches!(g.change_basis(&RationalMatrix::zeros(3, 3)), Err(LieError::Singular)));
    }

    #[test]
    fn ad_traces_detect_non_unimodular() {
        let aff = LieAlgebra::from_i64_brackets(2, &[(1, 2, 2, 1)]).unwrap();
        assert_eq!(aff.ad_traces(), vec![int(1), int(0)]);
        assert!(example1().ad_traces().iter().all(Zero::is_zero));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        /// Random bracket tables on up to 4 generators; most fail Jacobi.
        fn table() -> impl Strategy<Value = LieAlgebra> {
            (2usize..5).prop_flat_map(|n| {
                let pairs = n * (n - 1) / 2;
                proptest::collection::vec(prop_oneof![4 => Just(0i64), 1 => -2i64..3], pairs * n).prop_map(
                    move |vals| {
                        let mut entries = Vec::new();
                        let mut it = vals.into_iter();
                        for i in 1..=n {
                            for j in i + 1..=n {
                                for k in 1..=n {
                                    let c = it.next().unwrap();
                                    if c != 0 {
                                        entries.push((i, j, k, c));
                                    }
                                }
                            }
                        }
                        LieAlgebra::from_i64_brackets(n, &entries).unwrap()
                    },
                )
            })
        }

        fn d_squared_vanishes(g: &LieAlgebra) -> bool {
            (1..=g.dim()).all(|k| {
                let de = g.basis_differential(k);
                g.differential(de).unwrap().is_zero()
            })
        }

        proptest! {
            #[test]
            fn d_squared_zero_iff_jacobi(g in table()) {
                prop_assert_eq!(d_squared_vanishes(&g), g.is_jacobi());
            }

            #[test]
            fn d_squared_zero_on_all_forms_for_lie_algebras(g in table(), blade in 0u32..16) {
                prop_assume!(g.is_jacobi());
                let n = g.dim();
                let form = Form::monomial(n, Blade::from_bits(blade & ((1 << n) - 1)), int(1));
                prop_assert!(g.differential(&g.differential(&form).unwrap()).unwrap().is_zero());
            }
        }
    }
}
