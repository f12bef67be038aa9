//! Admissible triples, the dual triple over a central basis-aligned fiber,
//! the correspondence space with its 2-form `F`, and spinor transport.
//!
//! Index layout. For `g` of dimension `N` with fiber `x_1 < … < x_m`:
//! the dual `g∨` has the same dimension and puts `z_k` at index `x_k`, so
//! labels off the fiber agree on both sides. The correspondence space `c`
//! has dimension `N + m`: indices `1..=N` are those of `g` and `z_k` sits at
//! `N + k`.

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::form::{Form, FormError};
use crate::integrability::{self, IntegrabilityError};
use crate::lie::{LieAlgebra, LieError, Quotient, SpanIdeal};
use crate::linalg::RationalMatrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DualityError {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Integrability(#[from] IntegrabilityError),
    #[error("triple is not admissible with central fiber: {0}")]
    InvalidTriple(String),
    #[error("dual triple fails revalidation: {0}")]
    DualInvalid(String),
    #[error("correspondence space inconsistent: {0}")]
    Inconsistent(String),
    #[error("F is degenerate on the fibers")]
    DegenerateF,
    #[error("transported form is not basic along e{index}: {witness}")]
    NotBasic { index: usize, witness: Form },
    #[error("form has dimension {found}, expected {expected}")]
    WrongDimension { expected: usize, found: usize },
}

pub type Result<T, E = DualityError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TripleChecks {
    pub h_closed: bool,
    pub fiber_abelian_ideal: bool,
    pub fiber_central: bool,
    pub h_fiber_degenerate: bool,
}

impl TripleChecks {
    pub fn all(&self) -> bool {
        self.h_closed && self.fiber_abelian_ideal && self.fiber_central && self.h_fiber_degenerate
    }

    fn failures(&self) -> String {
        let mut out = Vec::new();
        for (ok, name) in [
            (self.h_closed, "H not closed"),
            (self.fiber_abelian_ideal, "fiber not an abelian ideal"),
            (self.fiber_central, "fiber not central"),
            (self.h_fiber_degenerate, "H(x,y,.) nonzero on the fiber"),
        ] {
            if !ok {
                out.push(name);
            }
        }
        out.join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdmissibleTriple {
    pub algebra: LieAlgebra,
    pub fiber: SpanIdeal,
    pub h: Form,
    pub checks: TripleChecks,
}

impl AdmissibleTriple {
    pub fn is_valid(&self) -> bool {
        self.checks.all()
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }
}

pub fn validate_admissible(g: &LieAlgebra, fiber: &SpanIdeal, h: &Form) -> Result<AdmissibleTriple> {
    if h.dim() != g.dim() {
        return Err(DualityError::WrongDimension {
            expected: g.dim(),
            found: h.dim(),
        });
    }
    if fiber.dim() != g.dim() {
        return Err(DualityError::WrongDimension {
            expected: g.dim(),
            found: fiber.dim(),
        });
    }
    if !h.is_homogeneous_of(3) {
        return Err(IntegrabilityError::NotThreeForm.into());
    }
    let gens = fiber.generators();
    let mut h_fiber_degenerate = true;
    if gens.len() > 1 {
        'scan: for (a, &x) in gens.iter().enumerate() {
            for &y in &gens[a + 1..] {
                if !h.interior(x)?.interior(y)?.is_zero() {
                    h_fiber_degenerate = false;
                    break 'scan;
                }
            }
        }
    }
    let checks = TripleChecks {
        h_closed: g.differential(h)?.is_zero(),
        fiber_abelian_ideal: fiber.is_ideal(g) && fiber.is_abelian(g),
        fiber_central: fiber.is_central(g),
        h_fiber_degenerate,
    };
    Ok(AdmissibleTriple {
        algebra: g.clone(),
        fiber: fiber.clone(),
        h: h.clone(),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualResult {
    pub dual: AdmissibleTriple,
    /// `ι_{x_k}H`, written on `g` (they avoid the fiber, so the same labels
    /// serve on `n`-lifts and on `g∨`).
    pub psis: Vec<Form>,
    pub delta: Form,
    /// `(x_k, z_k)` index pairs; equal by the layout convention.
    pub fiber_map: Vec<(usize, usize)>,
    pub quotient: Quotient,
}

/// Dual triple: `g∨ = (g/a)_{Ψ∨}`, `H∨ = Σ z̃^k∧dx^k + δ`.
pub fn dualize(t: &AdmissibleTriple) -> Result<DualResult> {
    if !t.is_valid() {
        return Err(DualityError::InvalidTriple(t.checks.failures()));
    }
    let g = &t.algebra;
    let n_dim = g.dim();
    let gens = t.fiber.generators().to_vec();
    let decomposition = g.basic_decomposition(&t.fiber, &t.h)?;
    let quotient = g.quotient(&t.fiber)?;
    let psis_n: Vec<Form> = decomposition
        .fiber_contractions
        .iter()
        .map(|psi| quotient.push_forward(psi))
        .collect::<Result<_, _>>()?;
    let (dual_algebra, embed) = quotient.algebra.central_extension_in_slots(&psis_n, &gens)?;
    debug_assert_eq!(embed, quotient.lift);

    let mut h_dual = decomposition.basic_part.clone();
    for &x in &gens {
        let dx = g.differential(&Form::basis(n_dim, x))?;
        if let Some(witness) = g.basic_witness(&t.fiber, &dx)? {
            return Err(LieError::NotBasic {
                what: format!("de{x}"),
                witness,
            }
            .into());
        }
        h_dual += &(&Form::basis(n_dim, x) ^ &dx);
    }
    let dual_fiber = SpanIdeal::new(n_dim, gens.iter().copied())?;
    let dual = validate_admissible(&dual_algebra, &dual_fiber, &h_dual)?;
    if !dual.is_valid() {
        return Err(DualityError::DualInvalid(dual.checks.failures()));
    }
    Ok(DualResult {
        dual,
        psis: decomposition.fiber_contractions,
        delta: decomposition.basic_part,
        fiber_map: gens.iter().map(|&x| (x, x)).collect(),
        quotient,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrespondenceSpace {
    pub algebra: LieAlgebra,
    /// dimension of `g` (and of `g∨`)
    pub base_dim: usize,
    /// fiber generators `x_k` of `g`
    pub fiber: Vec<usize>,
    /// `F = Σ_k z̃^k ∧ e^{x_k}`
    pub f: Form,
}

impl CorrespondenceSpace {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn m(&self) -> usize {
        self.fiber.len()
    }

    /// Index of `z_k` in `c` for the fiber slot `x`.
    fn dual_slot(&self, x: usize) -> Option<usize> {
        self.fiber.iter().position(|&y| y == x).map(|k| self.base_dim + k + 1)
    }

    /// `p*`: forms on `g` keep their labels.
    pub fn pull_back_from_g(&self, form: &Form) -> Result<Form> {
        self.check_base(form)?;
        Ok(form.with_dim(self.dim())?)
    }

    /// `p∨*`: the fiber slot `x_k` of `g∨` becomes `N + k`.
    pub fn pull_back_from_dual(&self, form: &Form) -> Result<Form> {
        self.check_base(form)?;
        Ok(form.relabel(self.dim(), |i| Some(self.dual_slot(i).unwrap_or(i)))?)
    }

    /// Inverse of `p∨*` on forms that avoid the `g`-fiber covectors.
    pub fn push_to_dual(&self, form: &Form) -> Result<Form> {
        let n = self.base_dim;
        Ok(form.relabel(n, |i| {
            if i > n {
                self.fiber.get(i - n - 1).copied()
            } else if self.fiber.contains(&i) {
                None
            } else {
                Some(i)
            }
        })?)
    }

    fn check_base(&self, form: &Form) -> Result<()> {
        if form.dim() == self.base_dim {
            Ok(())
        } else {
            Err(DualityError::WrongDimension {
                expected: self.base_dim,
                found: form.dim(),
            })
        }
    }

    /// Replaces `F` (e.g. to test that a flipped sign breaks the certificate).
    pub fn with_f(&self, f: Form) -> Self {
        CorrespondenceSpace { f, ..self.clone() }
    }

    /// Matrix `F(x_k, z_l)`; nondegenerate in the fibers iff invertible.
    pub fn fiber_pairing(&self) -> Result<RationalMatrix> {
        let m = self.m();
        let mut out = RationalMatrix::zeros(m, m);
        for (k, &x) in self.fiber.iter().enumerate() {
            let fx = self.f.interior(x)?;
            for l in 0..m {
                out[(k, l)] = fx.interior(self.base_dim + l + 1)?.coefficient(crate::form::Blade::SCALAR);
            }
        }
        Ok(out)
    }

    pub fn f_nondegenerate(&self) -> Result<bool> {
        Ok(!self.fiber_pairing()?.determinant().is_zero())
    }

    /// `τ(σ) = ι_{x_m}⋯ι_{x_1}(e^F ∧ p*σ)`, re-expressed on `g∨`.
    pub fn transport(&self, sigma: &Form) -> Result<Form> {
        let mut out = &self.f.exp_two_form()? ^ &self.pull_back_from_g(sigma)?;
        for &x in &self.fiber {
            out = out.interior(x)?;
        }
        for &x in &self.fiber {
            let witness = out.interior(x)?;
            if !witness.is_zero() {
                return Err(DualityError::NotBasic { index: x, witness });
            }
        }
        self.push_to_dual(&out)
    }
}

/// Builds `c ⊂ g ⊕ g∨` and `F = Σ z̃^k∧α^k`, checking that both projections
/// are homomorphisms and that `F` pairs the fibers.
pub fn correspondence(t: &AdmissibleTriple, d: &DualResult) -> Result<CorrespondenceSpace> {
    let g = &t.algebra;
    let n = g.dim();
    let gens = t.fiber.generators().to_vec();
    let m = gens.len();
    let total = n + m;
    let mut diffs = Vec::with_capacity(total);
    for k in 1..=n {
        diffs.push((k, g.basis_differential(k).with_dim(total)?));
    }
    for (k, psi) in d.psis.iter().enumerate() {
        diffs.push((n + k + 1, psi.with_dim(total)?));
    }
    let algebra = LieAlgebra::from_differentials(total, diffs)?;
    let mut f = Form::zero(total);
    for (k, &x) in gens.iter().enumerate() {
        f += &(&Form::basis(total, n + k + 1) ^ &Form::basis(total, x));
    }
    let cs = CorrespondenceSpace {
        algebra,
        base_dim: n,
        fiber: gens,
        f,
    };
    // p and p∨ are homomorphisms: pull-back commutes with d on 1-forms
    for k in 1..=n {
        let e = Form::basis(n, k);
        let lhs = cs.algebra.differential(&cs.pull_back_from_g(&e)?)?;
        if lhs != cs.pull_back_from_g(&g.differential(&e)?)? {
            return Err(DualityError::Inconsistent(format!("p fails on e{k}")));
        }
        let lhs = cs.algebra.differential(&cs.pull_back_from_dual(&e)?)?;
        if lhs != cs.pull_back_from_dual(&d.dual.algebra.differential(&e)?)? {
            return Err(DualityError::Inconsistent(format!("p∨ fails on e{k}")));
        }
    }
    if !cs.algebra.is_jacobi() {
        return Err(DualityError::Inconsistent("Jacobi fails on c".into()));
    }
    if !cs.f_nondegenerate()? {
        return Err(DualityError::DegenerateF);
    }
    Ok(cs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualityCertificate {
    pub lhs: Form,
    pub rhs: Form,
    pub residual: Form,
    pub pass: bool,
}

/// Compares `p*H − p∨*H∨` with `dF` on `c`.
pub fn verify_duality_certificate(cs: &CorrespondenceSpace, h: &Form, h_dual: &Form) -> Result<DualityCertificate> {
    let lhs = &cs.pull_back_from_g(h)? - &cs.pull_back_from_dual(h_dual)?;
    let rhs = cs.algebra.differential(&cs.f)?;
    let residual = &lhs - &rhs;
    Ok(DualityCertificate {
        pass: residual.is_zero(),
        lhs,
        rhs,
        residual,
    })
}

/// Dualizes, builds the correspondence space and returns the certificate.
pub fn certify(t: &AdmissibleTriple) -> Result<(DualResult, CorrespondenceSpace, DualityCertificate)> {
    let d = dualize(t)?;
    let cs = correspondence(t, &d)?;
    let cert = verify_duality_certificate(&cs, &t.h, &d.dual.h)?;
    Ok((d, cs, cert))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoubleDualReport {
    pub algebra_matches: bool,
    pub fiber_matches: bool,
    pub h_matches: bool,
    /// human-readable differences
    pub differences: Vec<String>,
}

impl DoubleDualReport {
    pub fn pass(&self) -> bool {
        self.algebra_matches && self.fiber_matches && self.h_matches
    }
}

pub fn double_dual_check(t: &AdmissibleTriple) -> Result<DoubleDualReport> {
    let first = dualize(t)?;
    let second = dualize(&first.dual)?;
    let back = &second.dual;
    let mut differences = Vec::new();
    let algebra_matches = back.algebra == t.algebra;
    if !algebra_matches {
        for k in 1..=t.dim() {
            let (a, b) = (t.algebra.basis_differential(k), back.algebra.basis_differential(k));
            if a != b {
                differences.push(format!("de{k}: {a} vs {b}"));
            }
        }
    }
    let fiber_matches = back.fiber == t.fiber;
    if !fiber_matches {
        differences.push(format!(
            "fiber: {:?} vs {:?}",
            t.fiber.generators(),
            back.fiber.generators()
        ));
    }
    let h_matches = back.h == t.h;
    if !h_matches {
        differences.push(format!("H: {} vs {}", t.h, back.h));
    }
    Ok(DoubleDualReport {
        algebra_matches,
        fiber_matches,
        h_matches,
        differences,
    })
}

/// `Some(ε)` with `τ∨(τ(σ)) = ε·σ` for all supplied `σ`, where `τ∨` is the
/// transport of the dual triple.
pub fn transport_round_trip_sign(t: &AdmissibleTriple, samples: &[Form]) -> Result<Option<Scalar>> {
    let (d, cs, _) = certify(t)?;
    let (_, cs_back, _) = certify(&d.dual)?;
    let mut sign: Option<Scalar> = None;
    for sigma in samples {
        let back = cs_back.transport(&cs.transport(sigma)?)?;
        if sigma.is_zero() {
            if !back.is_zero() {
                return Ok(None);
            }
            continue;
        }
        for candidate in [scalar::one(), -scalar::one()] {
            if back == sigma * &candidate {
                match &sign {
                    None => sign = Some(candidate.clone()),
                    Some(s) if *s == candidate => {}
                    Some(_) => return Ok(None),
                }
            }
        }
        if sign.is_none() {
            return Ok(None);
        }
    }
    Ok(sign)
}

/// `τ(d_Hσ)` and `d_{H∨}τ(σ)`.
pub fn commutation_pair(t: &AdmissibleTriple, cs: &CorrespondenceSpace, d: &DualResult, sigma: &Form) -> Result<(Form, Form)> {
    let left = cs.transport(&integrability::twisted_differential(&t.algebra, &t.h, sigma)?)?;
    let right = integrability::twisted_differential(&d.dual.algebra, &d.dual.h, &cs.transport(sigma)?)?;
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::g2::{su3_split, usual_spinors, G2Structure};
    use crate::literal::parse_form;
    use crate::scalar::{int, ratio};

    fn p(text: &str) -> Form {
        parse_form(text, 7).unwrap()
    }

    fn example1() -> LieAlgebra {
        LieAlgebra::from_i64_brackets(7, &[(1, 7, 3, -1), (1, 5, 4, -1), (2, 7, 4, -1), (1, 3, 6, -1)]).unwrap()
    }

    fn example2() -> LieAlgebra {
        LieAlgebra::from_i64_brackets(7, &[(2, 5, 6, -1), (4, 5, 7, 1)]).unwrap()
    }

    fn co_closed() -> LieAlgebra {
        LieAlgebra::from_differentials(
            7,
            [
                (1, p("e35 + e46")),
                (3, p("e67")),
                (4, p("e57")),
                (5, p("e47")),
                (6, p("e37")),
            ],
        )
        .unwrap()
    }

    fn fiber(gens: &[usize]) -> SpanIdeal {
        SpanIdeal::new(7, gens.iter().copied()).unwrap()
    }

    fn triple(g: LieAlgebra, gens: &[usize], h: &str) -> AdmissibleTriple {
        let t = validate_admissible(&g, &fiber(gens), &p(h)).unwrap();
        assert!(t.is_valid(), "{:?}", t.checks);
        t
    }

    fn example2_h() -> Form {
        p("e124 - e456 + e125 - e345 - e134 + e156 + e135 + e145 - e235 + e145 + e246 + e234 - e256 + e245")
    }

    #[test]
    fn admissibility_flags() {
        let t = validate_admissible(&LieAlgebra::abelian(7), &fiber(&[1, 2]), &p("e123")).unwrap();
        assert!(!t.checks.h_fiber_degenerate);
        assert!(t.checks.h_closed && t.checks.fiber_central);
        triple(co_closed(), &[1, 2], "0");
        triple(example1(), &[6], "e167 - e257");
        let t = validate_admissible(&example1(), &fiber(&[3]), &Form::zero(7)).unwrap();
        assert!(!t.checks.fiber_abelian_ideal && !t.checks.fiber_central);
        assert!(matches!(dualize(&t), Err(DualityError::InvalidTriple(_))));
    }

    #[test]
    fn example_two_dual() {
        let t = validate_admissible(&example2(), &fiber(&[7]), &example2_h()).unwrap();
        assert!(t.is_valid());
        let d = dualize(&t).unwrap();
        let expected = LieAlgebra::from_i64_brackets(7, &[(2, 5, 6, -1)]).unwrap();
        assert_eq!(d.dual.algebra, expected);
        assert_eq!(d.dual.h, &p("-e457") + &example2_h());
        assert!(d.psis[0].is_zero());
    }

    #[test]
    fn co_closed_dual() {
        let t = triple(co_closed(), &[1, 2], "0");
        let d = dualize(&t).unwrap();
        assert_eq!(d.dual.h, p("e135 + e146"));
        let expected = LieAlgebra::from_differentials(
            7,
            [(3, p("e67")), (4, p("e57")), (5, p("e47")), (6, p("e37"))],
        )
        .unwrap();
        assert_eq!(d.dual.algebra, expected);
    }

    #[test]
    fn example_one_dual_with_zero_h() {
        let d = dualize(&triple(example1(), &[6], "0")).unwrap();
        let expected = LieAlgebra::from_i64_brackets(7, &[(1, 7, 3, -1), (1, 5, 4, -1), (2, 7, 4, -1)]).unwrap();
        assert_eq!(d.dual.algebra, expected);
        assert_eq!(d.dual.h, p("e136"));
    }

    #[test]
    fn example_one_dual_differential_is_the_contraction() {
        let h = "e146 + e236";
        let d = dualize(&triple(example1(), &[6], h)).unwrap();
        assert_eq!(d.dual.algebra.basis_differential(6), &p("e14 + e23"));
        assert_eq!(d.dual.algebra.basis_differential(6), &p(h).interior(6).unwrap());
    }

    #[test]
    fn certificates_pass_and_detect_perturbations() {
        for t in [
            triple(example1(), &[6], "e136 + e137 - e145 + e247"),
            validate_admissible(&example2(), &fiber(&[7]), &example2_h()).unwrap(),
            triple(co_closed(), &[1, 2], "0"),
        ] {
            let (d, cs, cert) = certify(&t).unwrap();
            assert!(cert.pass, "{:?}", cert.residual);
            let flipped = cs.with_f(-cs.f.clone());
            assert!(!verify_duality_certificate(&flipped, &t.h, &d.dual.h).unwrap().pass);
            let bumped = &d.dual.h + &p("e123");
            let bad = verify_duality_certificate(&cs, &t.h, &bumped).unwrap();
            assert!(!bad.pass);
            assert_eq!(bad.residual, -cs.pull_back_from_dual(&p("e123")).unwrap());
        }
    }

    #[test]
    fn certificate_for_trivial_data() {
        let t = triple(LieAlgebra::abelian(7), &[7], "0");
        let (_, cs, cert) = certify(&t).unwrap();
        assert!(cert.pass && cert.lhs.is_zero());
        assert_eq!(cs.dim(), 8);
    }

    #[test]
    fn correspondence_dimensions() {
        let (_, cs, _) = certify(&triple(example1(), &[6], "e146 + e236")).unwrap();
        assert_eq!(cs.dim(), 8);
        let (_, cs, _) = certify(&triple(co_closed(), &[1, 2], "0")).unwrap();
        assert_eq!(cs.dim(), 9);
        assert_eq!(cs.fiber_pairing().unwrap(), RationalMatrix::from_i64(&[&[-1, 0], &[0, -1]]));
    }

    #[test]
    fn transport_of_example_one_spinors() {
        let g2 = G2Structure::standard();
        let su3 = su3_split(&g2, 6).unwrap();
        let pair = usual_spinors(&g2).unwrap();
        let (d, cs, _) = certify(&triple(example1(), &[6], "e146 + e236")).unwrap();
        let f6 = Form::basis(7, 6);
        let w = &su3.omega;
        let w2 = w ^ w;
        let rho_hat_dual = cs.transport(&pair.rho_hat).unwrap();
        let expected = &(&(-w.clone()) + &(&f6 ^ &su3.psi_plus)) + &(&(&w2 ^ w) * &ratio(1, 6));
        assert_eq!(rho_hat_dual, expected);
        assert_eq!(
            rho_hat_dual,
            p("e14 + e23 + e57 + e2456 + e1267 + e3467 - e1356 - e123457")
        );
        let rho_dual = cs.transport(&pair.rho).unwrap();
        let expected = &(&(-f6.clone()) + &su3.psi_minus) + &(&(&f6 ^ &w2) * &ratio(1, 2));
        assert_eq!(rho_dual, expected);
        let h_dual = &d.dual.h;
        assert!(integrability::twisted_differential(&d.dual.algebra, h_dual, &rho_hat_dual)
            .unwrap()
            .is_zero());
        assert!(cs.transport(&Form::zero(7)).unwrap().is_zero());
    }

    #[test]
    fn transport_of_co_closed_rho() {
        let g2 = G2Structure::adapted(p("e127 + e347 + e567 - e136 - e145 - e235 + e246")).unwrap();
        let pair = usual_spinors(&g2).unwrap();
        let (d, cs, _) = certify(&triple(co_closed(), &[1, 2], "0")).unwrap();
        let rho_dual = cs.transport(&pair.rho).unwrap();
        let reference = p("-e12 - e34 - e56 + e1367 + e1457 + e2357 - e2467 + e123456");
        assert_eq!(rho_dual, reference);
        assert!(integrability::twisted_differential(&d.dual.algebra, &d.dual.h, &rho_dual)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn double_duals_recover_the_triples() {
        for t in [
            triple(example1(), &[6], "e136 + e137 - e145 + e247"),
            triple(example1(), &[6], "e146 + e236"),
            validate_admissible(&example2(), &fiber(&[7]), &example2_h()).unwrap(),
            triple(co_closed(), &[1, 2], "0"),
        ] {
            let report = double_dual_check(&t).unwrap();
            assert!(report.pass(), "{:?}", report.differences);
        }
    }

    #[test]
    fn transport_round_trip_signs() {
        let samples = [p("1 + e1234 - e57"), p("e127 + e6"), p("e1234567 + e35")];
        let t1 = triple(example1(), &[6], "e146 + e236");
        assert_eq!(transport_round_trip_sign(&t1, &samples).unwrap(), Some(-int(1)));
        let t2 = triple(co_closed(), &[1, 2], "0");
        assert_eq!(transport_round_trip_sign(&t2, &samples).unwrap(), Some(-int(1)));
    }

    #[test]
    fn transport_parity() {
        let sigma = p("1 + e1234 + e35");
        let (_, cs1, _) = certify(&triple(example1(), &[6], "0")).unwrap();
        assert!(cs1.transport(&sigma).unwrap().is_odd());
        let (_, cs2, _) = certify(&triple(co_closed(), &[1, 2], "0")).unwrap();
        assert!(cs2.transport(&sigma).unwrap().is_even());
    }

    mod props {
        use super::*;
        use crate::form::Blade;
        use proptest::prelude::*;

        fn small_form() -> impl Strategy<Value = Form> {
            proptest::collection::vec((0u32..128, -3i64..4), 0..6).prop_map(|terms| {
                let mut f = Form::zero(7);
                for (bits, c) in terms {
                    f.add_term(Blade::from_bits(bits), int(c));
                }
                f
            })
        }

        fn triples() -> Vec<AdmissibleTriple> {
            vec![
                triple(example1(), &[6], "e146 + e236 + e167 - e257"),
                validate_admissible(&example2(), &fiber(&[7]), &example2_h()).unwrap(),
                triple(co_closed(), &[1, 2], "0"),
            ]
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn signed_commutation(sigma in small_form()) {
                for t in triples() {
                    let (d, cs, _) = certify(&t).unwrap();
                    let (left, right) = commutation_pair(&t, &cs, &d, &sigma).unwrap();
                    let sign = if cs.m() % 2 == 1 { -int(1) } else { int(1) };
                    prop_assert_eq!(left, &right * &sign);
                }
            }

            #[test]
            fn parity_flip(sigma in small_form()) {
                for t in triples() {
                    let (_, cs, _) = certify(&t).unwrap();
                    let even = cs.transport(&sigma.grades().iter().filter(|g| *g % 2 == 0).fold(Form::zero(7), |acc, &g| &acc + &sigma.grade_part(g))).unwrap();
                    if cs.m() % 2 == 1 {
                        prop_assert!(even.is_odd());
                    } else {
                        prop_assert!(even.is_even());
                    }
                }
            }

            #[test]
            fn certificate_on_random_closed_h(coeffs in proptest::collection::vec(-2i64..3, 16)) {
                let g = example1();
                let closed = integrability::solve_h_space(&g, &[&integrability::Closed]).unwrap();
                let h = closed.member(&coeffs.into_iter().map(int).collect::<Vec<_>>());
                let t = validate_admissible(&g, &fiber(&[6]), &h).unwrap();
                prop_assert!(t.is_valid());
                let (d, _, cert) = certify(&t).unwrap();
                prop_assert!(cert.pass);
                prop_assert!(d.dual.is_valid());
            }
        }
    }
}
