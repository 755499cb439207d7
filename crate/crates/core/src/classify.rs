//! The verdict engine: rigidity classes, solidity status, factoriality,
//! and pairwise comparison of representations with re-checkable
//! certificates.
//!
//! `compare` walks a fixed decision ladder, Distinct rules first, and
//! returns `Unknown` with a named obstruction exactly where no rule
//! decides the question.

use crate::circle::CirclePoint;
use crate::extent::Extent;
use crate::freedim::{periodic_invariant, PeriodicForm};
use crate::presentation::{
    afp_presentation, ap_weighted_basis, cocycle_presentation, relative_commutant,
};
use crate::rep::{Representation, Rigid2Dim, WmKind};
use crate::spectral::{bimodule_type, coarse_fiber_class, separating_invariant, BimoduleInvariant, CoarseClass};
use crate::words::{rebase, Automorphism, WeightedBasis};
use serde_json::{json, Value};
use std::fmt;

/// Named reason a comparison is left undecided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obstruction {
    FreeGroupFactorProblem,
    Conjecture46,
    Conjecture55,
    NoRuleApplies,
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Obstruction::FreeGroupFactorProblem => "FreeGroupFactorProblem",
            Obstruction::Conjecture46 => "Conjecture46",
            Obstruction::Conjecture55 => "Conjecture55",
            Obstruction::NoRuleApplies => "NoRuleApplies",
        };
        write!(f, "{s}")
    }
}

/// One of the seven structural classes, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RigidityClass {
    pub index: Option<u8>,
}

impl fmt::Display for RigidityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "class {i}"),
            None => write!(f, "unclassified"),
        }
    }
}

/// Assigns a representation to one of seven structural classes.
///
/// Classes 1/2: the weakly mixing part is a multiple of the left regular
/// representation and the almost periodic dimension is at least two, split
/// by faithfulness of the almost periodic part. Classes 3/4: same split
/// with a singular-closed weakly mixing part. Classes 5/6: purely almost
/// periodic of dimension at least two, same split. Class 7: mixing weakly
/// mixing part with almost periodic dimension at most one.
pub fn rigidity_class(rep: &Representation) -> RigidityClass {
    let ap_dim = rep.ap_dimension();
    let big_ap = ap_dim >= Extent::Finite(2);
    let ap_faithful = rep.decompose().0.is_faithful();
    let split = |faithful_class: u8| {
        if ap_faithful {
            faithful_class
        } else {
            faithful_class + 1
        }
    };
    let index = if rep.has_wm() {
        let all_left_regular = rep
            .wm_parts()
            .iter()
            .all(|p| matches!(p.kind, WmKind::LeftRegular(_)));
        let all_singular = rep
            .wm_parts()
            .iter()
            .all(|p| p.kind == WmKind::SingularClosed);
        let all_mixing = rep.wm_parts().iter().all(|p| p.mixing);
        if all_left_regular && big_ap {
            Some(split(1))
        } else if all_singular && big_ap {
            Some(split(3))
        } else if all_mixing && ap_dim <= Extent::Finite(1) {
            Some(7)
        } else {
            None
        }
    } else if big_ap {
        Some(split(5))
    } else {
        None
    };
    RigidityClass { index }
}

/// Solidity status of the crossed product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solidity {
    StronglySolid,
    /// Carries a witness: a two-dimensional rigid subspace.
    NotSolid(String),
    Unknown(Obstruction),
}

impl fmt::Display for Solidity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Solidity::StronglySolid => write!(f, "strongly solid"),
            Solidity::NotSolid(_) => write!(f, "not solid"),
            Solidity::Unknown(o) => write!(f, "unknown ({o})"),
        }
    }
}

/// Strongly solid when every weakly mixing part is mixing and the almost
/// periodic dimension is at most one; not solid when a two-dimensional
/// rigid subspace exists; otherwise unknown.
pub fn solidity(rep: &Representation) -> Solidity {
    let all_mixing = rep.wm_parts().iter().all(|p| p.mixing);
    if all_mixing && rep.ap_dimension() <= Extent::Finite(1) {
        return Solidity::StronglySolid;
    }
    match rep.has_rigid_2dim() {
        Rigid2Dim::Yes(witness) => Solidity::NotSolid(witness),
        _ => Solidity::Unknown(Obstruction::Conjecture55),
    }
}

/// Whether the crossed product is a factor, with a description of its
/// center: trivial exactly when the representation is faithful, otherwise
/// the group algebra of the kernel.
pub fn factoriality(rep: &Representation) -> (bool, String) {
    if rep.is_faithful() {
        (true, "trivial".to_string())
    } else {
        let t = rep
            .kernel_index()
            .as_finite()
            .expect("non-faithful kernel has finite index");
        (false, format!("L({t}Z), the group algebra of the kernel {t}Z"))
    }
}

/// The rule of the decision ladder that produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Rule {
    Factoriality,
    SolidityContrast,
    RigidityClasses,
    SpectralType,
    FreeGroupFactorTwo,
    PeriodicNormalForm,
    BasisChange,
    SingleInfinitePair,
    FreeFactorGap,
    SubgroupRigidityOpen,
    NoRuleApplies,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Factoriality => "factoriality",
            Rule::SolidityContrast => "solidity-contrast",
            Rule::RigidityClasses => "rigidity-classes",
            Rule::SpectralType => "spectral-type",
            Rule::FreeGroupFactorTwo => "free-group-factor-two",
            Rule::PeriodicNormalForm => "periodic-normal-form",
            Rule::BasisChange => "basis-change",
            Rule::SingleInfinitePair => "single-infinite-pair",
            Rule::FreeFactorGap => "free-factor-gap",
            Rule::SubgroupRigidityOpen => "subgroup-rigidity-open",
            Rule::NoRuleApplies => "no-rule-applies",
        }
    }

    /// The verdict kind this rule emits when it fires.
    pub fn emits(self) -> &'static str {
        match self {
            Rule::Factoriality
            | Rule::SolidityContrast
            | Rule::RigidityClasses
            | Rule::SpectralType => "distinct",
            Rule::FreeGroupFactorTwo
            | Rule::PeriodicNormalForm
            | Rule::BasisChange
            | Rule::SingleInfinitePair => "isomorphic",
            Rule::FreeFactorGap | Rule::SubgroupRigidityOpen | Rule::NoRuleApplies => "unknown",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// A basis-change witness: the source free basis, the target weight list,
/// and the automorphism of the free group carrying one to the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisChangeWitness {
    pub source: WeightedBasis,
    pub target_weights: Vec<CirclePoint>,
    pub automorphism: Automorphism,
    pub rebased: WeightedBasis,
}

impl BasisChangeWitness {
    /// Re-runs the automorphism and weight checks.
    pub fn check(&self) -> bool {
        if !self.automorphism.is_valid() {
            return false;
        }
        for (word, want) in self
            .automorphism
            .forward()
            .iter()
            .zip(self.rebased.weights())
        {
            if &self.source.weight_of(word) != want {
                return false;
            }
        }
        let mut produced: Vec<CirclePoint> = self.rebased.weights().to_vec();
        let mut wanted = self.target_weights.clone();
        produced.sort();
        wanted.sort();
        produced == wanted
    }
}

/// Machine-checkable evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Factoriality differs; both center descriptions.
    Factoriality {
        left: (bool, String),
        right: (bool, String),
    },
    /// One strongly solid, the other not solid (with its witness).
    SolidityContrast { left: Solidity, right: Solidity },
    /// Both rigidity classes assigned and unequal.
    RigidityClasses { left: u8, right: u8 },
    /// Coarse spectral fiber types differ.
    SpectralType { left: CoarseClass, right: CoarseClass },
    /// Both crossed products are the free group factor on two generators.
    FreeGroupFactorTwo { left_shape: String, right_shape: String },
    /// Equal periodic normal form.
    PeriodicNormalForm { t: u128, r: String },
    /// Identical weakly mixing descriptors, equal almost periodic
    /// dimensions, concretely equal eigenvalue subgroups; finite cases
    /// carry an explicit automorphism witness.
    BasisChange {
        subgroup: String,
        witness: Option<BasisChangeWitness>,
    },
    /// Both are a single infinite-order eigenvalue pair (plus trivial
    /// padding) of equal total dimension.
    SingleInfinitePair {
        left_angle: String,
        right_angle: String,
        dimension: String,
    },
    /// Both periodic with unequal normal forms; deciding isomorphism here
    /// is the free group factor problem.
    FreeFactorGap {
        left: (u128, String),
        right: (u128, String),
    },
    /// Abstractly isomorphic but concretely different eigenvalue
    /// subgroups of faithful infinite-dimensional almost periodic parts.
    SubgroupRigidityOpen {
        left: String,
        right: String,
        free_rank: usize,
        torsion_order: u128,
    },
    /// Fallback: no rule fires.
    None,
}

/// Outcome of a comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictKind {
    Isomorphic,
    Distinct,
    Unknown(Obstruction),
}

impl fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictKind::Isomorphic => write!(f, "isomorphic"),
            VerdictKind::Distinct => write!(f, "distinct"),
            VerdictKind::Unknown(o) => write!(f, "unknown ({o})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub rule: Rule,
    pub certificate: Certificate,
    pub human_summary: String,
}

fn auto_json(a: &Automorphism) -> Value {
    json!({
        "forward": a.forward().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "backward": a.backward().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    })
}

impl Verdict {
    pub fn to_json(&self) -> Value {
        let kind = match &self.kind {
            VerdictKind::Isomorphic => "isomorphic".to_string(),
            VerdictKind::Distinct => "distinct".to_string(),
            VerdictKind::Unknown(o) => format!("unknown:{o}"),
        };
        json!({
            "kind": kind,
            "rule": self.rule.name(),
            "certificate": certificate_json(&self.certificate),
            "human_summary": self.human_summary,
        })
    }

    pub fn render_text(&self) -> String {
        format!("verdict: {}\nrule: {}\n{}\n", self.kind, self.rule, self.human_summary)
    }

    /// Re-checks the certificate against the two inputs: separating
    /// invariants must recompute to unequal values, witnesses must pass
    /// their consistency checks, matched normal forms must recompute
    /// equal.
    pub fn reverify(&self, r1: &Representation, r2: &Representation) -> bool {
        match (&self.rule, &self.certificate) {
            (Rule::Factoriality, Certificate::Factoriality { left, right }) => {
                let f1 = factoriality(r1);
                let f2 = factoriality(r2);
                f1.0 != f2.0 && f1 == *left && f2 == *right
            }
            (Rule::SolidityContrast, Certificate::SolidityContrast { left, right }) => {
                let s1 = solidity(r1);
                let s2 = solidity(r2);
                s1 == *left
                    && s2 == *right
                    && matches!(
                        (&s1, &s2),
                        (Solidity::StronglySolid, Solidity::NotSolid(_))
                            | (Solidity::NotSolid(_), Solidity::StronglySolid)
                    )
            }
            (Rule::RigidityClasses, Certificate::RigidityClasses { left, right }) => {
                rigidity_class(r1).index == Some(*left)
                    && rigidity_class(r2).index == Some(*right)
                    && left != right
            }
            (Rule::SpectralType, Certificate::SpectralType { left, right }) => {
                coarse_fiber_class(r1) == *left
                    && coarse_fiber_class(r2) == *right
                    && separating_invariant(r1, r2).is_some()
            }
            (Rule::FreeGroupFactorTwo, Certificate::FreeGroupFactorTwo { .. }) => {
                lf2_shape(r1).is_some() && lf2_shape(r2).is_some()
            }
            (Rule::PeriodicNormalForm, Certificate::PeriodicNormalForm { t, r }) => {
                match (periodic_invariant(r1), periodic_invariant(r2)) {
                    (Ok(p1), Ok(p2)) => {
                        p1.t == p2.t
                            && p1.r == p2.r
                            && p1.t == *t
                            && p1.r.to_string() == *r
                    }
                    _ => false,
                }
            }
            (Rule::BasisChange, Certificate::BasisChange { witness, .. }) => {
                let hypotheses = r1.wm_parts() == r2.wm_parts()
                    && r1.ap_dimension() == r2.ap_dimension()
                    && r1.symbols() == r2.symbols()
                    && r1
                        .eigenvalue_subgroup()
                        .subgroup_equal(&r2.eigenvalue_subgroup())
                        .unwrap_or(false);
                hypotheses && witness.as_ref().map_or(true, |w| w.check())
            }
            (Rule::SingleInfinitePair, Certificate::SingleInfinitePair { .. }) => {
                single_infinite_pair(r1).is_some()
                    && single_infinite_pair(r2).is_some()
                    && r1.ap_dimension() == r2.ap_dimension()
            }
            (Rule::FreeFactorGap, Certificate::FreeFactorGap { left, right }) => {
                match (periodic_invariant(r1), periodic_invariant(r2)) {
                    (Ok(p1), Ok(p2)) => {
                        (p1.t, &p1.r) != (p2.t, &p2.r)
                            && (p1.t, p1.r.to_string()) == *left
                            && (p2.t, p2.r.to_string()) == *right
                    }
                    _ => false,
                }
            }
            (Rule::SubgroupRigidityOpen, Certificate::SubgroupRigidityOpen { .. }) => {
                let g1 = r1.eigenvalue_subgroup();
                let g2 = r2.eigenvalue_subgroup();
                g1.abstractly_isomorphic(&g2) && !g1.subgroup_equal(&g2).unwrap_or(false)
            }
            (Rule::NoRuleApplies, Certificate::None) => true,
            _ => false,
        }
    }
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::Factoriality { left, right } => json!({
            "left": { "factor": left.0, "center": left.1 },
            "right": { "factor": right.0, "center": right.1 },
        }),
        Certificate::SolidityContrast { left, right } => json!({
            "left": left.to_string(),
            "right": right.to_string(),
        }),
        Certificate::RigidityClasses { left, right } => json!({
            "left": left,
            "right": right,
        }),
        Certificate::SpectralType { left, right } => json!({
            "left": left.to_string(),
            "right": right.to_string(),
        }),
        Certificate::FreeGroupFactorTwo {
            left_shape,
            right_shape,
        } => json!({
            "left_shape": left_shape,
            "right_shape": right_shape,
            "common_factor": "L F_2",
        }),
        Certificate::PeriodicNormalForm { t, r } => json!({
            "t": t.to_string(),
            "r": r,
        }),
        Certificate::BasisChange { subgroup, witness } => json!({
            "subgroup": subgroup,
            "witness": witness.as_ref().map(|w| json!({
                "names": w.source.names(),
                "source_weights": w.source.weights().iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "target_weights": w.target_weights.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "automorphism": auto_json(&w.automorphism),
            })),
        }),
        Certificate::SingleInfinitePair {
            left_angle,
            right_angle,
            dimension,
        } => json!({
            "left_angle": left_angle,
            "right_angle": right_angle,
            "dimension": dimension,
        }),
        Certificate::FreeFactorGap { left, right } => json!({
            "left": { "t": left.0.to_string(), "r": left.1 },
            "right": { "t": right.0.to_string(), "r": right.1 },
        }),
        Certificate::SubgroupRigidityOpen {
            left,
            right,
            free_rank,
            torsion_order,
        } => json!({
            "left": left,
            "right": right,
            "free_rank": free_rank,
            "torsion_order": torsion_order.to_string(),
        }),
        Certificate::None => Value::Null,
    }
}

/// Shape check for the two-generator free group factor: a single copy of
/// the left regular representation, possibly plus one trivial summand.
fn lf2_shape(rep: &Representation) -> Option<&'static str> {
    if rep.wm_parts().len() != 1 {
        return None;
    }
    if rep.wm_parts()[0].kind != WmKind::LeftRegular(Extent::Finite(1)) {
        return None;
    }
    match rep.ap_atoms() {
        [] => Some("left_regular"),
        [(p, m)] if p.is_identity() && *m == Extent::Finite(1) => Some("left_regular + trivial"),
        _ => None,
    }
}

/// A purely almost periodic representation consisting of exactly one
/// non-real eigenvalue pair of infinite order with multiplicity one,
/// with all remaining atoms trivial. Returns the angle.
fn single_infinite_pair(rep: &Representation) -> Option<CirclePoint> {
    if rep.has_wm() {
        return None;
    }
    let mut pair = None;
    for (p, mult) in rep.ap_atoms() {
        if p.is_identity() {
            continue;
        }
        if p.is_real()
            || *mult != Extent::Finite(1)
            || p.order() != Extent::Infinite
            || pair.is_some()
        {
            return None;
        }
        pair = Some(p.clone());
    }
    pair
}

fn basis_change_witness(
    r1: &Representation,
    r2: &Representation,
) -> Option<BasisChangeWitness> {
    let source = ap_weighted_basis(r1)?;
    let target = ap_weighted_basis(r2)?;
    let target_weights = target.weights().to_vec();
    let (automorphism, rebased) = rebase(&source, &target_weights).ok()?;
    Some(BasisChangeWitness {
        source,
        target_weights,
        automorphism,
        rebased,
    })
}

fn rule_match(rule: Rule, r1: &Representation, r2: &Representation) -> Option<Certificate> {
    match rule {
        Rule::Factoriality => {
            let f1 = factoriality(r1);
            let f2 = factoriality(r2);
            (f1.0 != f2.0).then(|| Certificate::Factoriality { left: f1, right: f2 })
        }
        Rule::SolidityContrast => {
            let s1 = solidity(r1);
            let s2 = solidity(r2);
            matches!(
                (&s1, &s2),
                (Solidity::StronglySolid, Solidity::NotSolid(_))
                    | (Solidity::NotSolid(_), Solidity::StronglySolid)
            )
            .then(|| Certificate::SolidityContrast { left: s1, right: s2 })
        }
        Rule::RigidityClasses => {
            let c1 = rigidity_class(r1).index?;
            let c2 = rigidity_class(r2).index?;
            (c1 != c2).then_some(Certificate::RigidityClasses { left: c1, right: c2 })
        }
        Rule::SpectralType => separating_invariant(r1, r2).map(|s| Certificate::SpectralType {
            left: s.left,
            right: s.right,
        }),
        Rule::FreeGroupFactorTwo => {
            let s1 = lf2_shape(r1)?;
            let s2 = lf2_shape(r2)?;
            Some(Certificate::FreeGroupFactorTwo {
                left_shape: s1.to_string(),
                right_shape: s2.to_string(),
            })
        }
        Rule::PeriodicNormalForm => {
            let p1 = periodic_invariant(r1).ok()?;
            let p2 = periodic_invariant(r2).ok()?;
            ((p1.t, &p1.r) == (p2.t, &p2.r)).then(|| Certificate::PeriodicNormalForm {
                t: p1.t,
                r: p1.r.to_string(),
            })
        }
        Rule::BasisChange => {
            if r1.wm_parts() != r2.wm_parts()
                || r1.ap_dimension() != r2.ap_dimension()
                || r1.symbols() != r2.symbols()
            {
                return None;
            }
            let g1 = r1.eigenvalue_subgroup();
            let g2 = r2.eigenvalue_subgroup();
            if !g1.subgroup_equal(&g2).unwrap_or(false) {
                return None;
            }
            Some(Certificate::BasisChange {
                subgroup: g1.to_string(),
                witness: basis_change_witness(r1, r2),
            })
        }
        Rule::SingleInfinitePair => {
            let p1 = single_infinite_pair(r1)?;
            let p2 = single_infinite_pair(r2)?;
            (r1.ap_dimension() == r2.ap_dimension()).then(|| Certificate::SingleInfinitePair {
                left_angle: p1.to_string(),
                right_angle: p2.to_string(),
                dimension: r1.ap_dimension().to_string(),
            })
        }
        Rule::FreeFactorGap => {
            let p1 = periodic_invariant(r1).ok()?;
            let p2 = periodic_invariant(r2).ok()?;
            ((p1.t, &p1.r) != (p2.t, &p2.r)).then(|| Certificate::FreeFactorGap {
                left: (p1.t, p1.r.to_string()),
                right: (p2.t, p2.r.to_string()),
            })
        }
        Rule::SubgroupRigidityOpen => {
            if !(r1.is_faithful()
                && r2.is_faithful()
                && r1.is_ap_only()
                && r2.is_ap_only()
                && r1.dimension() == Extent::Infinite
                && r2.dimension() == Extent::Infinite)
            {
                return None;
            }
            let g1 = r1.eigenvalue_subgroup();
            let g2 = r2.eigenvalue_subgroup();
            if !g1.abstractly_isomorphic(&g2) || g1.subgroup_equal(&g2).unwrap_or(false) {
                return None;
            }
            Some(Certificate::SubgroupRigidityOpen {
                left: g1.to_string(),
                right: g2.to_string(),
                free_rank: g1.free_rank(),
                torsion_order: g1.torsion_order(),
            })
        }
        Rule::NoRuleApplies => Some(Certificate::None),
    }
}

const LADDER: [Rule; 11] = [
    Rule::Factoriality,
    Rule::SolidityContrast,
    Rule::RigidityClasses,
    Rule::SpectralType,
    Rule::FreeGroupFactorTwo,
    Rule::PeriodicNormalForm,
    Rule::BasisChange,
    Rule::SingleInfinitePair,
    Rule::FreeFactorGap,
    Rule::SubgroupRigidityOpen,
    Rule::NoRuleApplies,
];

fn summarize(rule: Rule, cert: &Certificate, r1: &Representation, r2: &Representation) -> String {
    let (a, b) = (r1.name(), r2.name());
    match (rule, cert) {
        (Rule::Factoriality, Certificate::Factoriality { left, right }) => format!(
            "{a} gives a {} (center {}) while {b} gives a {} (center {}).",
            if left.0 { "factor" } else { "non-factor" },
            left.1,
            if right.0 { "factor" } else { "non-factor" },
            right.1
        ),
        (Rule::SolidityContrast, Certificate::SolidityContrast { left, right }) => {
            format!("{a} is {left} while {b} is {right}.")
        }
        (Rule::RigidityClasses, Certificate::RigidityClasses { left, right }) => format!(
            "{a} lies in structural class {left} and {b} in class {right}; \
             distinct classes never give isomorphic crossed products."
        ),
        (Rule::SpectralType, Certificate::SpectralType { left, right }) => format!(
            "the bimodule fibers have different coarse spectral types: {left} for {a}, {right} for {b}."
        ),
        (Rule::FreeGroupFactorTwo, Certificate::FreeGroupFactorTwo { left_shape, right_shape }) => {
            format!(
                "both crossed products are the free group factor L F_2 \
                 ({a}: {left_shape}, {b}: {right_shape})."
            )
        }
        (Rule::PeriodicNormalForm, Certificate::PeriodicNormalForm { t, r }) => format!(
            "both are periodic with kernel index {t} and parameter r = {r}; \
             the common normal form is L F_{r} ⊗ L∞[0,1]."
        ),
        (Rule::BasisChange, Certificate::BasisChange { subgroup, witness }) => format!(
            "identical weakly mixing parts and a common concrete eigenvalue subgroup {subgroup}; \
             a free basis change carries one weighted basis to the other{}.",
            if witness.is_some() {
                " (explicit automorphism attached)"
            } else {
                " (infinite multiplicities: no finite witness)"
            }
        ),
        (
            Rule::SingleInfinitePair,
            Certificate::SingleInfinitePair {
                left_angle,
                right_angle,
                dimension,
            },
        ) => format!(
            "each is a single infinite-order eigenvalue pair ({left_angle} and {right_angle}) \
             with trivial padding to dimension {dimension}; the crossed product does not \
             depend on the angle."
        ),
        (Rule::FreeFactorGap, Certificate::FreeFactorGap { left, right }) => format!(
            "both are periodic but with different normal forms: (T, r) = ({}, {}) for {a} and \
             ({}, {}) for {b}; deciding isomorphism of L F_{} ⊗ L∞[0,1] and L F_{} ⊗ L∞[0,1] \
             is the free group factor isomorphism problem.",
            left.0, left.1, right.0, right.1, left.1, right.1
        ),
        (Rule::SubgroupRigidityOpen, Certificate::SubgroupRigidityOpen { left, right, .. }) => {
            format!(
                "the eigenvalue subgroups {left} and {right} are abstractly isomorphic but \
                 concretely different; whether the concrete subgroup is a complete invariant \
                 is open."
            )
        }
        _ => format!("no decision rule applies to {a} and {b}."),
    }
}

/// Walks the decision ladder and returns the first verdict, Distinct
/// rules before Isomorphic rules before the named open problems.
pub fn compare(r1: &Representation, r2: &Representation) -> Verdict {
    for rule in LADDER {
        if let Some(certificate) = rule_match(rule, r1, r2) {
            let kind = match rule.emits() {
                "distinct" => VerdictKind::Distinct,
                "isomorphic" => VerdictKind::Isomorphic,
                _ => VerdictKind::Unknown(match rule {
                    Rule::FreeFactorGap => Obstruction::FreeGroupFactorProblem,
                    Rule::SubgroupRigidityOpen => Obstruction::Conjecture46,
                    _ => Obstruction::NoRuleApplies,
                }),
            };
            let human_summary = summarize(rule, &certificate, r1, r2);
            return Verdict {
                kind,
                rule,
                certificate,
                human_summary,
            };
        }
    }
    unreachable!("the fallback rule always fires")
}

/// All rules whose hypotheses hold for the pair, in ladder order; used to
/// check that no pair matches both an Isomorphic and a Distinct rule.
pub fn matching_rules(r1: &Representation, r2: &Representation) -> Vec<Rule> {
    LADDER
        .iter()
        .copied()
        .filter(|r| *r != Rule::NoRuleApplies && rule_match(*r, r1, r2).is_some())
        .collect()
}

/// Full structural report on a single representation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dossier {
    pub name: String,
    pub dimension: Extent,
    pub ap_dimension: Extent,
    pub kernel_index: Extent,
    pub factorial: bool,
    pub center: String,
    pub periodic: Option<PeriodicForm>,
    pub presentation: Option<String>,
    pub commutant: Option<String>,
    pub cocycle: Option<String>,
    pub bimodule: BimoduleInvariant,
    pub coarse: CoarseClass,
    pub solidity: Solidity,
    pub rigidity: RigidityClass,
    pub notes: Vec<String>,
}

pub fn dossier(rep: &Representation) -> Dossier {
    let (factorial, center) = factoriality(rep);
    let periodic = periodic_invariant(rep).ok();
    let presentation = afp_presentation(rep).ok().map(|p| p.describe());
    let commutant = relative_commutant(rep).ok().map(|c| c.description);
    let cocycle = cocycle_presentation(rep).ok().map(|c| c.description);
    let bimodule = bimodule_type(rep);
    let coarse = coarse_fiber_class(rep);
    let solidity = solidity(rep);
    let rigidity = rigidity_class(rep);

    let mut notes = Vec::new();
    if lf2_shape(rep).is_some() {
        notes.push("the crossed product is the free group factor L F_2".to_string());
    }
    if let Some(p) = &periodic {
        notes.push(format!(
            "periodic normal form: L F_{} ⊗ L∞[0,1] with T = {}",
            p.r, p.t
        ));
    }
    if rep.dimension() == Extent::Finite(0) {
        notes.push("degenerate: the zero-dimensional representation".to_string());
    }

    Dossier {
        name: rep.name().to_string(),
        dimension: rep.dimension(),
        ap_dimension: rep.ap_dimension(),
        kernel_index: rep.kernel_index(),
        factorial,
        center,
        periodic,
        presentation,
        commutant,
        cocycle,
        bimodule,
        coarse,
        solidity,
        rigidity,
        notes,
    }
}

impl Dossier {
    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "dimension": self.dimension.to_string(),
            "ap_dimension": self.ap_dimension.to_string(),
            "kernel_index": self.kernel_index.to_string(),
            "factorial": self.factorial,
            "center": self.center,
            "periodic": self.periodic.as_ref().map(|p| json!({
                "t": p.t.to_string(),
                "dim": p.dim.to_string(),
                "r": p.r.to_string(),
                "subalgebra": p.subalgebra,
            })),
            "presentation": self.presentation,
            "commutant": self.commutant,
            "cocycle": self.cocycle,
            "bimodule": {
                "base": self.bimodule.base.to_string(),
                "fiber": self.bimodule.fiber.class.to_string(),
                "fiber_iterations": self.bimodule.fiber.iterations,
                "fiber_truncated": self.bimodule.fiber.truncated,
                "multiplicity": match self.bimodule.multiplicity {
                    crate::spectral::Multiplicity::Infinite => "infinite",
                    crate::spectral::Multiplicity::NotAsserted => "not asserted",
                },
            },
            "coarse_class": self.coarse.to_string(),
            "solidity": self.solidity.to_string(),
            "rigidity": self.rigidity.to_string(),
            "notes": self.notes,
        })
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("representation {}\n", self.name));
        s.push_str(&format!(
            "  dimension {} (almost periodic {})\n",
            self.dimension, self.ap_dimension
        ));
        s.push_str(&format!("  kernel index {}\n", self.kernel_index));
        s.push_str(&format!(
            "  {} with center {}\n",
            if self.factorial { "factor" } else { "not a factor" },
            self.center
        ));
        if let Some(p) = &self.periodic {
            s.push_str(&format!(
                "  periodic: T = {}, r = {}, subalgebra {}\n",
                p.t, p.r, p.subalgebra
            ));
        }
        if let Some(p) = &self.presentation {
            s.push_str(&format!("  presentation {p}\n"));
        }
        if let Some(c) = &self.commutant {
            s.push_str(&format!("  commutant {c}\n"));
        }
        if let Some(c) = &self.cocycle {
            s.push_str(&format!("  cocycle {c}\n"));
        }
        s.push_str(&format!(
            "  bimodule base {}; fiber {} ({})\n",
            self.bimodule.base, self.bimodule.fiber.class, self.coarse
        ));
        s.push_str(&format!("  solidity: {}\n", self.solidity));
        s.push_str(&format!("  rigidity: {}\n", self.rigidity));
        for n in &self.notes {
            s.push_str(&format!("  note: {n}\n"));
        }
        s
    }
}
