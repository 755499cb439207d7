//! Free-dimension bookkeeping for interpolated free group factors.
//!
//! A tracial factor built from a diffuse hyperfinite piece, interpolated
//! free group factors `L F_r` with trace weights `t_i`, and matrix blocks
//! `M_n` with trace weights `w_j` has free-dimension parameter
//!
//! `d = 1 + Σ_i t_i²(r_i − 1) − Σ_j (w_j/n_j)²`.
//!
//! Amalgamated free products over a finite-dimensional subalgebra combine
//! parameters additively: if the two sides have parameters `d₁`, `d₂` and
//! the amalgam has parameter `d`, the product (when it is a non-amenable
//! factor) is `L F_r ⊗ (diffuse part)` with `r = d₁ + d₂ − d`. The
//! factoriality gate below whitelists the amalgamation patterns for which
//! the centres of the two sides are known to meet the amalgam only in
//! scalars, which is what licenses that formula.

use crate::extent::{ExtRational, Extent, ExtentError};
use crate::rep::Representation;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreedimError {
    #[error("summand weights must be positive and sum to 1")]
    InvalidWeights,
    #[error("interpolated free group parameter must exceed 1")]
    InvalidParameter,
    #[error(transparent)]
    IndeterminateInfinity(#[from] ExtentError),
    #[error("amalgamation pattern not covered by the factoriality criteria: {0}")]
    UnsupportedPattern(String),
    #[error("representation is not periodic (it must be non-faithful and almost periodic)")]
    NotPeriodic,
}

/// One direct summand of a tracial von Neumann algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Summand {
    /// Interpolated free group factor `L F_r` (`r > 1`, possibly `∞`).
    Interpolated { r: ExtRational, weight: BigRational },
    /// Full matrix block `M_size`.
    MatrixBlock { size: u128, weight: BigRational },
    /// A diffuse hyperfinite piece (contributes nothing beyond the base 1).
    DiffuseHyperfinite { weight: BigRational },
}

impl Summand {
    fn weight(&self) -> &BigRational {
        match self {
            Summand::Interpolated { weight, .. }
            | Summand::MatrixBlock { weight, .. }
            | Summand::DiffuseHyperfinite { weight } => weight,
        }
    }
}

/// A finite direct sum of summands with trace weights adding to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorDescriptor {
    pub summands: Vec<Summand>,
}

impl FactorDescriptor {
    pub fn new(summands: Vec<Summand>) -> FactorDescriptor {
        FactorDescriptor { summands }
    }

    fn validate(&self) -> Result<(), FreedimError> {
        let mut total = BigRational::zero();
        for s in &self.summands {
            if !s.weight().is_positive() {
                return Err(FreedimError::InvalidWeights);
            }
            total += s.weight();
            if let Summand::Interpolated { r, .. } = s {
                match r {
                    ExtRational::Finite(q) if *q <= BigRational::one() => {
                        return Err(FreedimError::InvalidParameter)
                    }
                    _ => {}
                }
            }
        }
        if total != BigRational::one() {
            return Err(FreedimError::InvalidWeights);
        }
        Ok(())
    }
}

/// Free-dimension parameter of a descriptor.
pub fn free_dimension(desc: &FactorDescriptor) -> Result<ExtRational, FreedimError> {
    desc.validate()?;
    let mut d = BigRational::one();
    for s in &desc.summands {
        match s {
            Summand::Interpolated { r, weight } => match r {
                ExtRational::Infinite => return Ok(ExtRational::Infinite),
                ExtRational::Finite(r) => {
                    d += weight * weight * (r - BigRational::one());
                }
            },
            Summand::MatrixBlock { size, weight } => {
                let s = weight / BigRational::from_integer((*size).into());
                d -= &s * &s;
            }
            Summand::DiffuseHyperfinite { .. } => {}
        }
    }
    Ok(ExtRational::Finite(d))
}

/// Parameter of an amalgamated free product over a finite-dimensional
/// amalgam: `d₁ + d₂ − d_amalgam`. Only valid once a factoriality gate has
/// confirmed the pattern.
pub fn afp_free_dimension(
    d1: &ExtRational,
    d2: &ExtRational,
    d_amalgam: &ExtRational,
) -> Result<ExtRational, FreedimError> {
    Ok(d1.add(d2).sub(d_amalgam)?)
}

/// Amalgamation shapes whose factoriality status is settled.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AfpPattern {
    /// `(L Z ⊗ C^T) *_{C^T} (L∞[0,1] ⊗ M_T)`: the matrix corners sweep the
    /// diagonal amalgam transitively.
    HaarCornersOverCt { t: u128 },
    /// `(L F_n ⊗ C^T) *_{C^T} N` with `N` a diffuse factor containing the
    /// amalgam with scalar central intersection.
    FreeTensorCtWithFactor { t: u128 },
    /// Both sides contain a common central projection lying over the
    /// amalgam; the product splits.
    SharedCentralProjection,
}

/// Decides whether the pattern yields a non-amenable factor, so the
/// additive parameter formula applies. The positive cases are exactly the
/// ones where the centres of the two sides intersect the amalgam only in
/// scalars; a shared central projection defeats factoriality.
pub fn factoriality_gate(pattern: &AfpPattern) -> Result<bool, FreedimError> {
    match pattern {
        AfpPattern::HaarCornersOverCt { t } | AfpPattern::FreeTensorCtWithFactor { t } => {
            if *t >= 2 {
                Ok(true)
            } else {
                Err(FreedimError::UnsupportedPattern(format!(
                    "amalgam C^{t} is scalar; nothing to gate"
                )))
            }
        }
        AfpPattern::SharedCentralProjection => Ok(false),
    }
}

/// Normal form of the crossed product of a periodic representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PeriodicShape {
    /// Zero-dimensional representation.
    Empty,
    /// Trivial representation (kernel is everything).
    TrivialOnly,
    /// One-dimensional sign representation.
    SignOneDim,
    /// Dimension at least two with kernel of index `t ≥ 2`.
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicForm {
    pub t: u128,
    pub dim: Extent,
    pub r: ExtRational,
    pub shape: PeriodicShape,
    /// The canonical position of the invariant abelian subalgebra.
    pub subalgebra: String,
    /// Independent recomputation of `r` through the presentation +
    /// free-dimension route (populated for generic finite dimensions).
    pub route_r: Option<ExtRational>,
}

fn lf_tensor_ct(n: u128, t: u128) -> Result<ExtRational, FreedimError> {
    // L F_n ⊗ C^T: T weighted copies of L F_n (diffuse abelian when n = 1).
    let w = BigRational::new(1.into(), t.into());
    let summands = if n == 1 {
        vec![Summand::DiffuseHyperfinite {
            weight: BigRational::one(),
        }]
    } else {
        (0..t)
            .map(|_| Summand::Interpolated {
                r: ExtRational::Finite(BigRational::from_integer(n.into())),
                weight: w.clone(),
            })
            .collect()
    };
    free_dimension(&FactorDescriptor::new(summands))
}

fn diagonal_ct(t: u128) -> Result<ExtRational, FreedimError> {
    let w = BigRational::new(1.into(), t.into());
    let summands = (0..t)
        .map(|_| Summand::MatrixBlock {
            size: 1,
            weight: w.clone(),
        })
        .collect();
    free_dimension(&FactorDescriptor::new(summands))
}

/// Recomputes the periodic parameter by presenting the crossed product as
/// an amalgamated free product and adding free dimensions.
fn periodic_route(t: u128, dim: u128) -> Result<ExtRational, FreedimError> {
    assert!(t >= 2 && dim >= 2);
    let dam = diagonal_ct(t)?;
    let hyperfinite = free_dimension(&FactorDescriptor::new(vec![Summand::DiffuseHyperfinite {
        weight: BigRational::one(),
    }]))?;
    if t == 2 {
        // Base piece is the sign representation: a hyperfinite corner
        // algebra of parameter 1; the extra trivial summands contribute a
        // free factor tensored with the diagonal.
        assert!(factoriality_gate(&AfpPattern::HaarCornersOverCt { t })?);
        let d1 = lf_tensor_ct(dim - 1, t)?;
        assert!(factoriality_gate(&AfpPattern::FreeTensorCtWithFactor { t })?);
        afp_free_dimension(&d1, &hyperfinite, &dam)
    } else {
        // Base piece is the two-dimensional rotation of order t.
        assert!(factoriality_gate(&AfpPattern::HaarCornersOverCt { t })?);
        let r0 = afp_free_dimension(&hyperfinite, &hyperfinite, &dam)?;
        if dim == 2 {
            return Ok(r0);
        }
        let d1 = lf_tensor_ct(dim - 2, t)?;
        assert!(factoriality_gate(&AfpPattern::FreeTensorCtWithFactor { t })?);
        afp_free_dimension(&d1, &r0, &dam)
    }
}

/// Computes the `(T, r)` invariant of a periodic (non-faithful, almost
/// periodic) representation: the crossed product is `L F_r ⊗ L∞[0,1]` with
/// `r = 1 + (dim − 1)/T`, `T` the index of the kernel. Dimensions at most
/// one produce the degenerate shapes instead.
pub fn periodic_invariant(rep: &Representation) -> Result<PeriodicForm, FreedimError> {
    if rep.has_wm() || rep.is_faithful() {
        return Err(FreedimError::NotPeriodic);
    }
    let t = match rep.kernel_index() {
        Extent::Finite(t) => t,
        Extent::Infinite => return Err(FreedimError::NotPeriodic),
    };
    let dim = rep.dimension();

    let (shape, subalgebra) = match (&dim, t) {
        (Extent::Finite(0), _) => (PeriodicShape::Empty, "trivial".to_string()),
        (_, 1) => (
            PeriodicShape::TrivialOnly,
            format!("1 ⊗ L∞[0,1] ⊂ L F_{dim} ⊗ L∞[0,1]"),
        ),
        (Extent::Finite(1), 2) => (
            PeriodicShape::SignOneDim,
            "C^2 ⊗ 1 ⊗ L∞[0,1] ⊂ M_2 ⊗ L∞[0,1] ⊗ L∞[0,1]".to_string(),
        ),
        _ => (PeriodicShape::Generic, String::new()),
    };

    // r = 1 + (dim − 1)/t, read in the extended rationals.
    let r = match dim {
        Extent::Infinite => ExtRational::Infinite,
        Extent::Finite(0) => ExtRational::from_int(0),
        Extent::Finite(d) => ExtRational::Finite(
            BigRational::one()
                + BigRational::new((d as i128 - 1).into(), (t as i128).into()),
        ),
    };

    let subalgebra = if matches!(shape, PeriodicShape::Generic) {
        format!("C^{t} ⊗ L∞[0,1] ⊂ L F_{r} ⊗ L∞[0,1] (diagonal of the period)")
    } else {
        subalgebra
    };

    let route_r = match (&shape, dim) {
        (PeriodicShape::Generic, Extent::Finite(d)) => {
            let rr = periodic_route(t, d)?;
            assert_eq!(
                rr, r,
                "free-dimension route disagrees with the closed formula"
            );
            Some(rr)
        }
        _ => None,
    };

    Ok(PeriodicForm {
        t,
        dim,
        r,
        shape,
        subalgebra,
        route_r,
    })
}
