//! Mixed-degree exterior forms with exact coefficients on an ordered
//! orthonormal basis `e^1, ..., e^n`.
//!
//! Basis monomials are stored as bitsets ([`Blade`]); bit `i - 1` stands for
//! the covector `e^i`. Every sign in this module comes from counting
//! inversions with masked popcounts.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, BitXor, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::scalar::{self, Scalar};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("duplicate index {0} in a monomial")]
    DuplicateIndex(usize),
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("expected a form of pure grade {expected}, found grades {found:?}")]
    NotHomogeneous { expected: usize, found: Vec<usize> },
    #[error("index {0} has no image under the relabeling")]
    Unmapped(usize),
    #[error("vector has {found} components, expected {expected}")]
    VectorLength { expected: usize, found: usize },
}

pub type Result<T, E = FormError> = std::result::Result<T, E>;

/// A basis monomial `e^{i_1 ... i_k}` with strictly increasing indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Blade(u32);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    pub const fn from_bits(bits: u32) -> Self {
        Blade(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// `e^i` for a 1-based index.
    pub fn basis(index: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&index), "basis index {index} out of range");
        Blade(1 << (index - 1))
    }

    /// Sorts `indices` into a blade. Returns `true` alongside it when the
    /// sorting permutation is odd.
    pub fn from_indices(indices: &[usize]) -> Result<(bool, Blade)> {
        let mut bits = 0u32;
        let mut odd = false;
        for &i in indices {
            if i == 0 || i > MAX_DIM {
                return Err(FormError::IndexOutOfRange { index: i, dim: MAX_DIM });
            }
            let bit = 1u32 << (i - 1);
            if bits & bit != 0 {
                return Err(FormError::DuplicateIndex(i));
            }
            // every earlier index larger than i is one inversion
            odd ^= (bits & !((bit << 1) - 1)).count_ones() % 2 == 1;
            bits |= bit;
        }
        Ok((odd, Blade(bits)))
    }

    /// The blade containing `indices`, discarding the sorting sign.
    pub fn from_set(indices: &[usize]) -> Result<Blade> {
        Blade::from_indices(indices).map(|(_, blade)| blade)
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        (1..=MAX_DIM).contains(&index) && self.0 & (1 << (index - 1)) != 0
    }

    pub fn is_disjoint(self, other: Blade) -> bool {
        self.0 & other.0 == 0
    }

    /// Indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..MAX_DIM).filter(move |b| bits & (1 << b) != 0).map(|b| b + 1)
    }

    pub fn max_index(self) -> usize {
        (u32::BITS - self.0.leading_zeros()) as usize
    }

    /// `e^I ∧ e^J`: `None` when the blades overlap, otherwise the merged blade
    /// and whether the merge permutation is odd.
    pub fn wedge(self, other: Blade) -> Option<(bool, Blade)> {
        if !self.is_disjoint(other) {
            return None;
        }
        Some((merge_parity(self.0, other.0), Blade(self.0 | other.0)))
    }

    /// Number of indices of this blade strictly below `index`.
    pub fn count_below(self, index: usize) -> usize {
        (self.0 & ((1u32 << (index - 1)) - 1)).count_ones() as usize
    }

    pub fn without(self, index: usize) -> Blade {
        Blade(self.0 & !(1 << (index - 1)))
    }

    pub fn complement(self, dim: usize) -> Blade {
        Blade(!self.0 & full_mask(dim))
    }

    /// The volume blade `e^{1...n}`.
    pub fn top(dim: usize) -> Blade {
        Blade(full_mask(dim))
    }
}

/// Odd iff `#{(a, b) : a in lhs, b in rhs, a > b}` is odd.
fn merge_parity(lhs: u32, rhs: u32) -> bool {
    let mut count = 0u32;
    let mut rest = rhs;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        count += (lhs & !((low << 1).wrapping_sub(1))).count_ones();
        rest &= rest - 1;
    }
    count % 2 == 1
}

fn full_mask(dim: usize) -> u32 {
    if dim >= 32 {
        u32::MAX
    } else {
        (1u32 << dim) - 1
    }
}

impl Ord for Blade {
    /// Grade first, then lexicographic on the increasing index tuple.
    fn cmp(&self, other: &Self) -> Ordering {
        self.grade().cmp(&other.grade()).then_with(|| {
            let diff = self.0 ^ other.0;
            if diff == 0 {
                Ordering::Equal
            } else if self.0 & diff & diff.wrapping_neg() != 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        })
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// All blades of one grade in dimension `dim`, in canonical order.
pub fn blades_of_grade(dim: usize, grade: usize) -> Vec<Blade> {
    fn rec(start: usize, dim: usize, left: usize, acc: u32, out: &mut Vec<Blade>) {
        if left == 0 {
            out.push(Blade(acc));
            return;
        }
        for i in start..=dim {
            if dim - i + 1 < left {
                break;
            }
            rec(i + 1, dim, left - 1, acc | (1 << (i - 1)), out);
        }
    }
    let mut out = Vec::new();
    if grade <= dim {
        rec(1, dim, grade, 0, &mut out);
    }
    out
}

/// A finite sum of blades with nonzero rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Form {
    dim: usize,
    terms: BTreeMap<Blade, Scalar>,
}

impl Form {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        Form {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: Scalar) -> Self {
        Form::monomial(dim, Blade::SCALAR, value)
    }

    pub fn one(dim: usize) -> Self {
        Form::scalar(dim, scalar::one())
    }

    /// The covector `e^i`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!((1..=dim).contains(&index), "basis index {index} out of range 1..={dim}");
        Form::monomial(dim, Blade::basis(index), scalar::one())
    }

    /// The volume form `e^{1...n}`.
    pub fn volume(dim: usize) -> Self {
        Form::monomial(dim, Blade::top(dim), scalar::one())
    }

    pub fn monomial(dim: usize, blade: Blade, coeff: Scalar) -> Self {
        let mut form = Form::zero(dim);
        form.add_term(blade, coeff);
        form
    }

    /// `coeff · e^{i_1} ∧ ... ∧ e^{i_k}` for indices in any order.
    pub fn term(dim: usize, coeff: Scalar, indices: &[usize]) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(FormError::DimensionTooLarge(dim));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i == 0 || i > dim) {
            return Err(FormError::IndexOutOfRange { index: bad, dim });
        }
        let (odd, blade) = Blade::from_indices(indices)?;
        Ok(Form::monomial(dim, blade, if odd { -coeff } else { coeff }))
    }

    /// Sum of `(coefficient, increasing indices)` pairs; test and fixture helper.
    pub fn from_terms<'a>(dim: usize, terms: impl IntoIterator<Item = (i64, &'a [usize])>) -> Result<Self> {
        let mut out = Form::zero(dim);
        for (c, idx) in terms {
            out += &Form::term(dim, scalar::int(c), idx)?;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &Scalar)> + '_ {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn coefficient(&self, blade: Blade) -> Scalar {
        self.terms.get(&blade).cloned().unwrap_or_else(scalar::zero)
    }

    pub fn add_term(&mut self, blade: Blade, coeff: Scalar) {
        assert!(
            blade.max_index() <= self.dim,
            "blade {blade:?} does not fit in dimension {}",
            self.dim
        );
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(blade) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn grades(&self) -> BTreeSet<usize> {
        self.terms.keys().map(|b| b.grade()).collect()
    }

    pub fn grade_part(&self, grade: usize) -> Form {
        Form {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(b, _)| b.grade() == grade)
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// True for zero and for forms whose terms all have `grade`.
    pub fn is_homogeneous_of(&self, grade: usize) -> bool {
        self.terms.keys().all(|b| b.grade() == grade)
    }

    pub fn require_grade(&self, grade: usize) -> Result<()> {
        if self.is_homogeneous_of(grade) {
            Ok(())
        } else {
            Err(FormError::NotHomogeneous {
                expected: grade,
                found: self.grades().into_iter().collect(),
            })
        }
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|b| b.grade() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|b| b.grade() % 2 == 1)
    }

    pub fn scale(&self, factor: &Scalar) -> Form {
        if factor.is_zero() {
            return Form::zero(self.dim);
        }
        Form {
            dim: self.dim,
            terms: self.terms.iter().map(|(b, c)| (*b, c * factor)).collect(),
        }
    }

    fn check_dim(&self, other: &Form) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(FormError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    pub fn wedge(&self, other: &Form) -> Result<Form> {
        self.check_dim(other)?;
        let mut out = Form::zero(self.dim);
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                if let Some((odd, merged)) = a.wedge(*b) {
                    let c = x * y;
                    out.add_term(merged, if odd { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Contraction with the basis vector `e_i`:
    /// `ι_{e_i} e^I = (-1)^{p-1} e^{I \ {i}}` where `i` is the `p`-th index of `I`.
    pub fn interior(&self, index: usize) -> Result<Form> {
        if index == 0 || index > self.dim {
            return Err(FormError::IndexOutOfRange { index, dim: self.dim });
        }
        let mut out = Form::zero(self.dim);
        for (b, c) in &self.terms {
            if b.contains(index) {
                let c = c.clone();
                out.add_term(
                    b.without(index),
                    if b.count_below(index) % 2 == 1 { -c } else { c },
                );
            }
        }
        Ok(out)
    }

    /// Contraction with `Σ v_i e_i`.
    pub fn interior_vector(&self, vector: &[Scalar]) -> Result<Form> {
        if vector.len() != self.dim {
            return Err(FormError::VectorLength {
                expected: self.dim,
                found: vector.len(),
            });
        }
        let mut out = Form::zero(self.dim);
        for (i, v) in vector.iter().enumerate() {
            if !v.is_zero() {
                out += &self.interior(i + 1)?.scale(v);
            }
        }
        Ok(out)
    }

    /// Hodge star for the orthonormal basis with orientation `e^{1...n}`:
    /// `⋆e^I = sgn(I, I^c) e^{I^c}`.
    pub fn hodge_star(&self) -> Form {
        let mut out = Form::zero(self.dim);
        for (b, c) in &self.terms {
            let comp = b.complement(self.dim);
            let odd = merge_parity(b.bits(), comp.bits());
            let c = c.clone();
            out.add_term(comp, if odd { -c } else { c });
        }
        out
    }

    /// `Σ_k F^k / k!` for a pure 2-form `F`.
    pub fn exp_two_form(&self) -> Result<Form> {
        self.require_grade(2)?;
        let mut out = Form::one(self.dim);
        let mut power = Form::one(self.dim);
        let mut k = 1usize;
        loop {
            power = power.wedge(self)?;
            if power.is_zero() {
                return Ok(out);
            }
            out += &power.scale(&(scalar::one() / scalar::factorial(k)));
            k += 1;
        }
    }

    /// Moves every index `i` to `map(i)` in a space of dimension `dim`,
    /// re-sorting blades with the permutation sign.
    pub fn relabel(&self, dim: usize, map: impl Fn(usize) -> Option<usize>) -> Result<Form> {
        if dim > MAX_DIM {
            return Err(FormError::DimensionTooLarge(dim));
        }
        let mut out = Form::zero(dim);
        let mut image = Vec::new();
        for (b, c) in &self.terms {
            image.clear();
            for i in b.indices() {
                let j = map(i).ok_or(FormError::Unmapped(i))?;
                if j == 0 || j > dim {
                    return Err(FormError::IndexOutOfRange { index: j, dim });
                }
                image.push(j);
            }
            let (odd, blade) = Blade::from_indices(&image)?;
            let c = c.clone();
            out.add_term(blade, if odd { -c } else { c });
        }
        Ok(out)
    }

    /// Same coefficients viewed in a different ambient dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Form> {
        self.relabel(dim, Some)
    }

    /// Largest index used by any term (0 for scalars and zero).
    pub fn max_index(&self) -> usize {
        self.terms.keys().map(|b| b.max_index()).max().unwrap_or(0)
    }

    /// True when no term involves any of `indices`.
    pub fn avoids(&self, indices: &[usize]) -> bool {
        self.terms
            .keys()
            .all(|b| indices.iter().all(|&i| !b.contains(i)))
    }

    /// Coefficient of `e^{1...n}`.
    pub fn top_coefficient(&self) -> Scalar {
        self.coefficient(Blade::top(self.dim))
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coefficient(Blade::SCALAR).is_one()
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        crate::literal::write_form(f, self)
    }
}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form[{}]({self})", self.dim)
    }
}

impl serde::Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl AddAssign<&Form> for Form {
    fn add_assign(&mut self, rhs: &Form) {
        assert_eq!(self.dim, rhs.dim, "form dimension mismatch");
        for (b, c) in &rhs.terms {
            self.add_term(*b, c.clone());
        }
    }
}

impl SubAssign<&Form> for Form {
    fn sub_assign(&mut self, rhs: &Form) {
        assert_eq!(self.dim, rhs.dim, "form dimension mismatch");
        for (b, c) in &rhs.terms {
            self.add_term(*b, -c.clone());
        }
    }
}

impl Add for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Form {
    type Output = Form;
    fn add(mut self, rhs: Form) -> Form {
        self += &rhs;
        self
    }
}

impl Sub for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(mut self, rhs: Form) -> Form {
        self -= &rhs;
        self
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        Form {
            dim: self.dim,
            terms: self.terms.iter().map(|(b, c)| (*b, -c)).collect(),
        }
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

impl Mul<&Scalar> for &Form {
    type Output = Form;
    fn mul(self, rhs: &Scalar) -> Form {
        self.scale(rhs)
    }
}

/// Wedge product; panics on dimension mismatch (use [`Form::wedge`] to get an error).
impl BitXor for &Form {
    type Output = Form;
    fn bitxor(self, rhs: &Form) -> Form {
        self.wedge(rhs).expect("wedge of forms with different dimensions")
    }
}

impl BitXor for Form {
    type Output = Form;
    fn bitxor(self, rhs: Form) -> Form {
        &self ^ &rhs
    }
}
