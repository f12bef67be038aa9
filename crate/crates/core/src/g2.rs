//! G₂- and SU(3)-structure data in adapted bases and the spinor pairs of
//! generalized G₂-structures.

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::form::{Form, FormError};
use crate::linalg::RationalMatrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum G2Error {
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("a G2 form lives in dimension 7, got {0}")]
    WrongDimension(usize),
    #[error("phi must be a 3-form")]
    NotThreeForm,
    #[error("phi is degenerate (induced bilinear form is singular)")]
    Degenerate,
    #[error("basis is not adapted to phi (induced bilinear form is not a positive multiple of the identity)")]
    NotAdapted,
    #[error("angle ({s}, {c}) does not satisfy s^2 + c^2 = 1")]
    BadAngle { s: String, c: String },
    #[error("SU(3) reconstruction fails along e{index}: {identity} off by {residual}")]
    Reconstruction {
        index: usize,
        identity: &'static str,
        residual: Form,
    },
}

pub type Result<T, E = G2Error> = std::result::Result<T, E>;

pub const G2_DIM: usize = 7;

/// `B_ij` with `ι_{e_i}φ ∧ ι_{e_j}φ ∧ φ = B_ij e^{1…7}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InducedBilinear {
    pub matrix: RationalMatrix,
    #[serde(serialize_with = "crate::report::ser_scalar")]
    pub determinant: Scalar,
    #[serde(serialize_with = "crate::report::ser_scalars")]
    pub leading_minors: Vec<Scalar>,
}

impl InducedBilinear {
    pub fn is_nondegenerate(&self) -> bool {
        !self.determinant.is_zero()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.leading_minors.iter().all(Signed::is_positive)
    }

    /// `Some(c)` when the matrix is `c·I` with `c > 0`.
    pub fn positive_identity_multiple(&self) -> Option<Scalar> {
        self.matrix.scalar_multiple_of_identity().filter(Signed::is_positive)
    }
}

pub fn induced_bilinear(phi: &Form) -> Result<InducedBilinear> {
    if phi.dim() != G2_DIM {
        return Err(G2Error::WrongDimension(phi.dim()));
    }
    if !phi.is_homogeneous_of(3) {
        return Err(G2Error::NotThreeForm);
    }
    let contractions: Vec<Form> = (1..=G2_DIM).map(|i| phi.interior(i)).collect::<Result<_, _>>()?;
    let mut matrix = RationalMatrix::zeros(G2_DIM, G2_DIM);
    for i in 0..G2_DIM {
        let left = contractions[i].wedge(phi)?;
        for j in i..G2_DIM {
            let value = contractions[j].wedge(&left)?.top_coefficient();
            matrix[(i, j)] = value.clone();
            matrix[(j, i)] = value;
        }
    }
    Ok(InducedBilinear {
        determinant: matrix.determinant(),
        leading_minors: matrix.leading_minors(),
        matrix,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct G2Structure {
    phi: Form,
    adapted: bool,
}

impl G2Structure {
    /// `e^{127}+e^{347}+e^{567}+e^{135}−e^{236}−e^{146}−e^{245}`.
    pub fn standard() -> Self {
        let phi = Form::from_terms(
            G2_DIM,
            [
                (1, &[1, 2, 7][..]),
                (1, &[3, 4, 7]),
                (1, &[5, 6, 7]),
                (1, &[1, 3, 5]),
                (-1, &[2, 3, 6]),
                (-1, &[1, 4, 6]),
                (-1, &[2, 4, 5]),
            ],
        )
        .expect("static form");
        G2Structure { phi, adapted: true }
    }

    /// Checks nondegeneracy; `adapted` records whether the basis is orthonormal
    /// for the induced metric.
    pub fn new(phi: Form) -> Result<Self> {
        let b = induced_bilinear(&phi)?;
        if !b.is_nondegenerate() {
            return Err(G2Error::Degenerate);
        }
        let adapted = b.positive_identity_multiple().is_some();
        Ok(G2Structure { phi, adapted })
    }

    /// Like [`G2Structure::new`] but rejects non-adapted bases.
    pub fn adapted(phi: Form) -> Result<Self> {
        let g = G2Structure::new(phi)?;
        if g.adapted {
            Ok(g)
        } else {
            Err(G2Error::NotAdapted)
        }
    }

    pub fn phi(&self) -> &Form {
        &self.phi
    }

    pub fn is_adapted(&self) -> bool {
        self.adapted
    }

    pub fn star_phi(&self) -> Form {
        self.phi.hodge_star()
    }

    pub fn bilinear(&self) -> InducedBilinear {
        induced_bilinear(&self.phi).expect("validated at construction")
    }

    fn require_adapted(&self) -> Result<()> {
        if self.adapted {
            Ok(())
        } else {
            Err(G2Error::NotAdapted)
        }
    }
}

/// Even spinor `rho`, odd spinor `rho_hat` and the angle `(s, c)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpinorPair {
    pub rho: Form,
    pub rho_hat: Form,
    #[serde(serialize_with = "crate::report::ser_scalar")]
    pub s: Scalar,
    #[serde(serialize_with = "crate::report::ser_scalar")]
    pub c: Scalar,
}

impl SpinorPair {
    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn parity_ok(&self) -> bool {
        self.rho.is_even() && self.rho_hat.is_odd()
    }
}

/// `ρ = 1 − ⋆φ`, `ρ̂ = −φ + e^{1…7}`.
pub fn usual_spinors(g2: &G2Structure) -> Result<SpinorPair> {
    g2.require_adapted()?;
    let rho = Form::one(G2_DIM) - g2.star_phi();
    let rho_hat = Form::volume(G2_DIM) - g2.phi().clone();
    Ok(SpinorPair {
        rho,
        rho_hat,
        s: scalar::zero(),
        c: scalar::one(),
    })
}

/// ρ = c − c⋆φ + s⋆(α∧⋆φ) − sα∧φ − s⋆α,
/// ρ̂ = sα − cφ − s⋆(α∧φ) − sα∧⋆φ + (c/7)φ∧⋆φ, with `α = e^{alpha_index}`.
pub fn generalized_spinors(g2: &G2Structure, alpha_index: usize, s: Scalar, c: Scalar) -> Result<SpinorPair> {
    g2.require_adapted()?;
    if &s * &s + &c * &c != scalar::one() {
        return Err(G2Error::BadAngle { s: s.to_string(), c: c.to_string() });
    }
    if alpha_index == 0 || alpha_index > G2_DIM {
        return Err(FormError::IndexOutOfRange {
            index: alpha_index,
            dim: G2_DIM,
        }
        .into());
    }
    let phi = g2.phi();
    let star_phi = g2.star_phi();
    let alpha = Form::basis(G2_DIM, alpha_index);
    let a_phi = &alpha ^ phi;
    let a_star_phi = &alpha ^ &star_phi;

    let mut rho = Form::scalar(G2_DIM, c.clone());
    rho -= &(&star_phi * &c);
    rho += &(&a_star_phi.hodge_star() * &s);
    rho -= &(&a_phi * &s);
    rho -= &(&alpha.hodge_star() * &s);

    let mut rho_hat = &alpha * &s;
    rho_hat -= &(phi * &c);
    rho_hat -= &(&a_phi.hodge_star() * &s);
    rho_hat -= &(&a_star_phi * &s);
    rho_hat += &(&(phi ^ &star_phi) * &(c.clone() / scalar::int(7)));

    Ok(SpinorPair { rho, rho_hat, s, c })
}

/// `φ = α∧ω + ψ₊` and `⋆φ = ½ω² + ψ₋∧α` along `α = e^{alpha_index}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Su3Data {
    pub alpha_index: usize,
    pub omega: Form,
    pub psi_plus: Form,
    pub psi_minus: Form,
}

pub fn su3_split(g2: &G2Structure, x: usize) -> Result<Su3Data> {
    g2.require_adapted()?;
    let phi = g2.phi();
    let alpha = Form::basis(G2_DIM, x);
    let omega = phi.interior(x)?;
    let psi_plus = phi - &(&alpha ^ &omega);
    let psi_minus = -g2.star_phi().interior(x)?;

    let fail = |identity, residual: Form| {
        if residual.is_zero() {
            Ok(())
        } else {
            Err(G2Error::Reconstruction {
                index: x,
                identity,
                residual,
            })
        }
    };
    for (name, form) in [("iota omega", &omega), ("iota psi+", &psi_plus), ("iota psi-", &psi_minus)] {
        fail(name, form.interior(x)?)?;
    }
    fail("alpha^omega + psi+ = phi", &(&(&alpha ^ &omega) + &psi_plus) - phi)?;
    let half_omega_sq = &(&omega ^ &omega) * &scalar::ratio(1, 2);
    fail(
        "omega^2/2 + psi- ^ alpha = *phi",
        &(&half_omega_sq + &(&psi_minus ^ &alpha)) - &g2.star_phi(),
    )?;
    Ok(Su3Data {
        alpha_index: x,
        omega,
        psi_plus,
        psi_minus,
    })
}
