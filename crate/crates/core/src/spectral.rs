//! Symbolic measure classes on the circle and the bimodule fiber invariant.
//!
//! A [`MeasureClass`] tracks an atomic part (a finite set of atoms, or the
//! uniform class on a finite subgroup, or a marker for atoms spread over an
//! infinite finitely generated subgroup) plus a coarse continuous class.
//! Convolution follows the absorption table: the Lebesgue class absorbs
//! every nonzero class, the convolution of two singular classes supported
//! on closed null-translate sets stays singular, and anything else
//! atomless is left unpinned (`GenericAtomless`). A singular-atomless
//! class without the closed-support provenance is represented as
//! `GenericAtomless`, since the provenance is exactly what the convolution
//! rule consumes.
//!
//! The fiber invariant of a representation is the convolution closure
//! `Σ_{n≥0} μ^{*n}` of its spectral class (the `n = 0` term contributes
//! `δ_0`); its coarse type separates crossed products whose invariant
//! bimodule fibers are respectively atomic, Lebesgue, or singular.

use crate::circle::{CirclePoint, CircleSubgroup, SymbolTable};
use crate::rep::{Representation, WmKind};
use std::collections::BTreeSet;
use std::fmt;

/// Cap on closure iterations before giving up.
pub const CLOSURE_CAP: u32 = 64;
/// Largest finite subgroup expanded into explicit atoms during convolution.
const HAAR_EXPAND: u128 = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AtomicPart {
    Points(BTreeSet<CirclePoint>),
    /// Uniform (Haar) class on a finite subgroup.
    SubgroupHaar(CircleSubgroup),
    /// Atoms supported on an infinite finitely generated subgroup.
    InfiniteSubgroup(CircleSubgroup),
}

/// Coarse continuous classes, ordered by absorption rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContinuousPart {
    None,
    /// Singular atomless, supported on a closed set meeting every
    /// translate of every atom set in measure zero.
    SingularClosed,
    /// Atomless with no pinned absolute-continuity type.
    GenericAtomless,
    LebesgueAC,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureClass {
    pub atoms: AtomicPart,
    pub continuous: ContinuousPart,
}

impl fmt::Display for MeasureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.atoms {
            AtomicPart::Points(s) if s.is_empty() => write!(f, "no atoms")?,
            AtomicPart::Points(s) => {
                write!(f, "atoms {{")?;
                for (i, p) in s.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "}}")?;
            }
            AtomicPart::SubgroupHaar(g) => write!(f, "haar on {g}")?,
            AtomicPart::InfiniteSubgroup(g) => write!(f, "atoms spread over {g}")?,
        }
        match self.continuous {
            ContinuousPart::None => Ok(()),
            ContinuousPart::SingularClosed => write!(f, " + singular-atomless (closed)"),
            ContinuousPart::GenericAtomless => write!(f, " + atomless (unpinned)"),
            ContinuousPart::LebesgueAC => write!(f, " + lebesgue"),
        }
    }
}

impl MeasureClass {
    pub fn delta(p: CirclePoint) -> MeasureClass {
        MeasureClass {
            atoms: AtomicPart::Points(BTreeSet::from([p])),
            continuous: ContinuousPart::None,
        }
    }

    pub fn from_atoms<I: IntoIterator<Item = CirclePoint>>(atoms: I) -> MeasureClass {
        MeasureClass {
            atoms: AtomicPart::Points(atoms.into_iter().collect()),
            continuous: ContinuousPart::None,
        }
    }

    pub fn continuous_only(c: ContinuousPart) -> MeasureClass {
        MeasureClass {
            atoms: AtomicPart::Points(BTreeSet::new()),
            continuous: c,
        }
    }

    pub fn has_atoms(&self) -> bool {
        match &self.atoms {
            AtomicPart::Points(s) => !s.is_empty(),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        !self.has_atoms() && self.continuous == ContinuousPart::None
    }

    /// Spectral class of a representation on the real Hilbert space: every
    /// eigenvalue contributes an atom together with its conjugate, and the
    /// weakly mixing summands contribute their continuous classes.
    pub fn of_representation(rep: &Representation) -> MeasureClass {
        let mut atoms = BTreeSet::new();
        for (p, _) in rep.ap_atoms() {
            atoms.insert(p.clone());
            atoms.insert(p.conjugate());
        }
        let mut continuous = ContinuousPart::None;
        for part in rep.wm_parts() {
            let c = match part.kind {
                WmKind::LeftRegular(_) => ContinuousPart::LebesgueAC,
                WmKind::SingularClosed => ContinuousPart::SingularClosed,
                WmKind::AtomlessGeneric => ContinuousPart::GenericAtomless,
            };
            continuous = continuous.max(c);
        }
        MeasureClass {
            atoms: AtomicPart::Points(atoms),
            continuous,
        }
    }
}

fn atom_points(part: &AtomicPart) -> Option<&BTreeSet<CirclePoint>> {
    match part {
        AtomicPart::Points(s) => Some(s),
        _ => None,
    }
}

fn expand_haar(g: &CircleSubgroup) -> Option<BTreeSet<CirclePoint>> {
    if g.is_finite() && g.torsion_order() <= HAAR_EXPAND {
        g.elements().map(|v| v.into_iter().collect())
    } else {
        None
    }
}

fn subgroup_of_atoms(part: &AtomicPart, table: &SymbolTable) -> CircleSubgroup {
    match part {
        AtomicPart::Points(s) => {
            let pts: Vec<CirclePoint> = s.iter().cloned().collect();
            CircleSubgroup::generate(&pts, table).expect("atoms over the ambient table")
        }
        AtomicPart::SubgroupHaar(g) | AtomicPart::InfiniteSubgroup(g) => g.clone(),
    }
}

/// Convolution of atomic parts. Exact for point sets and for Haar classes
/// whose translates stay inside the subgroup; otherwise the sum of the two
/// supporting subgroups is used.
fn convolve_atoms(a: &AtomicPart, b: &AtomicPart, table: &SymbolTable) -> AtomicPart {
    // Expand small Haar classes into explicit points.
    let expand = |p: &AtomicPart| -> AtomicPart {
        if let AtomicPart::SubgroupHaar(g) = p {
            if let Some(s) = expand_haar(g) {
                return AtomicPart::Points(s);
            }
        }
        p.clone()
    };
    let a = expand(a);
    let b = expand(b);
    match (&a, &b) {
        (AtomicPart::Points(s1), AtomicPart::Points(s2)) => {
            if s1.is_empty() || s2.is_empty() {
                return AtomicPart::Points(BTreeSet::new());
            }
            let mut out = BTreeSet::new();
            for p in s1 {
                for q in s2 {
                    out.insert(p.multiply(q));
                }
            }
            AtomicPart::Points(out)
        }
        _ => {
            if let AtomicPart::Points(s) = &a {
                if s.is_empty() {
                    return AtomicPart::Points(BTreeSet::new());
                }
            }
            if let AtomicPart::Points(s) = &b {
                if s.is_empty() {
                    return AtomicPart::Points(BTreeSet::new());
                }
            }
            // Sum of supports generates the joint subgroup; exact whenever
            // the point sets lie inside the subgroups.
            let ga = subgroup_of_atoms(&a, table);
            let gb = subgroup_of_atoms(&b, table);
            let mut gens: Vec<CirclePoint> = ga.basis().to_vec();
            gens.extend(gb.basis().iter().cloned());
            if ga.torsion_order() > 1 {
                gens.push(CirclePoint::rational(1, ga.torsion_order() as i64));
            }
            if gb.torsion_order() > 1 {
                gens.push(CirclePoint::rational(1, gb.torsion_order() as i64));
            }
            if let Some(s) = atom_points(&a) {
                gens.extend(s.iter().cloned());
            }
            if let Some(s) = atom_points(&b) {
                gens.extend(s.iter().cloned());
            }
            let joint = CircleSubgroup::generate(&gens, table).expect("joint subgroup");
            if joint.is_finite() {
                AtomicPart::SubgroupHaar(joint)
            } else {
                AtomicPart::InfiniteSubgroup(joint)
            }
        }
    }
}

/// Folds a point set that fills a nontrivial finite subgroup back into its
/// Haar class, so that expanded and unexpanded forms compare equal.
fn canonicalize_atoms(part: AtomicPart, table: &SymbolTable) -> AtomicPart {
    if let AtomicPart::Points(s) = &part {
        if s.len() > 1 {
            let g = subgroup_of_atoms(&part, table);
            if let Some(all) = expand_haar(&g) {
                if *s == all {
                    return AtomicPart::SubgroupHaar(g);
                }
            }
        }
    }
    part
}

/// Convolution of two nonzero continuous classes.
fn convolve_continuous(a: ContinuousPart, b: ContinuousPart) -> ContinuousPart {
    use ContinuousPart::*;
    match (a, b) {
        (None, _) | (_, None) => None,
        (LebesgueAC, _) | (_, LebesgueAC) => LebesgueAC,
        (SingularClosed, SingularClosed) => SingularClosed,
        _ => GenericAtomless,
    }
}

/// Convolution of measure classes.
pub fn convolve(a: &MeasureClass, b: &MeasureClass, table: &SymbolTable) -> MeasureClass {
    let atoms = canonicalize_atoms(convolve_atoms(&a.atoms, &b.atoms, table), table);
    let mut continuous = ContinuousPart::None;
    // Atom translates preserve a continuous class.
    if a.continuous != ContinuousPart::None && b.has_atoms() {
        continuous = continuous.max(a.continuous);
    }
    if b.continuous != ContinuousPart::None && a.has_atoms() {
        continuous = continuous.max(b.continuous);
    }
    if a.continuous != ContinuousPart::None && b.continuous != ContinuousPart::None {
        continuous = continuous.max(convolve_continuous(a.continuous, b.continuous));
    }
    MeasureClass { atoms, continuous }
}

/// Class of the sum of two measures.
pub fn union(a: &MeasureClass, b: &MeasureClass, table: &SymbolTable) -> MeasureClass {
    let atoms = match (&a.atoms, &b.atoms) {
        (AtomicPart::Points(s1), AtomicPart::Points(s2)) => {
            AtomicPart::Points(s1.union(s2).cloned().collect())
        }
        (x, AtomicPart::Points(s)) | (AtomicPart::Points(s), x) if s.is_empty() => x.clone(),
        (x, y) => {
            let gx = subgroup_of_atoms(x, table);
            let gy = subgroup_of_atoms(y, table);
            let mut gens: Vec<CirclePoint> = gx.basis().to_vec();
            gens.extend(gy.basis().iter().cloned());
            if gx.torsion_order() > 1 {
                gens.push(CirclePoint::rational(1, gx.torsion_order() as i64));
            }
            if gy.torsion_order() > 1 {
                gens.push(CirclePoint::rational(1, gy.torsion_order() as i64));
            }
            if let Some(s) = atom_points(x) {
                gens.extend(s.iter().cloned());
            }
            if let Some(s) = atom_points(y) {
                gens.extend(s.iter().cloned());
            }
            let joint = CircleSubgroup::generate(&gens, table).expect("joint subgroup");
            if joint.is_finite() {
                AtomicPart::SubgroupHaar(joint)
            } else {
                AtomicPart::InfiniteSubgroup(joint)
            }
        }
    };
    MeasureClass {
        atoms: canonicalize_atoms(atoms, table),
        continuous: a.continuous.max(b.continuous),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureResult {
    pub class: MeasureClass,
    /// Convolve-and-union steps until stabilization.
    pub iterations: u32,
    pub truncated: bool,
}

/// Convolution closure `Σ_{n≥0} μ^{*n}`, including the `δ_0` term.
pub fn convolution_closure(m: &MeasureClass, table: &SymbolTable) -> ClosureResult {
    let delta0 = MeasureClass::delta(CirclePoint::identity());
    // Atoms of infinite order never stabilize pointwise: collapse the
    // atomic part to its supporting subgroup up front.
    let mut seed = m.clone();
    if let AtomicPart::Points(s) = &m.atoms {
        if !s.is_empty() {
            let g = subgroup_of_atoms(&m.atoms, table);
            if !g.is_finite() {
                seed.atoms = AtomicPart::InfiniteSubgroup(g);
            }
        }
    }
    let mut acc = delta0.clone();
    let mut power = delta0;
    let mut iterations = 0u32;
    let mut truncated = true;
    while iterations < CLOSURE_CAP {
        iterations += 1;
        power = convolve(&power, &seed, table);
        let next = union(&acc, &power, table);
        if next == acc {
            iterations -= 1; // the last step added nothing
            truncated = false;
            break;
        }
        acc = next;
    }
    acc.atoms = canonicalize_atoms(acc.atoms, table);
    ClosureResult {
        class: acc,
        iterations,
        truncated,
    }
}

/// Multiplicity of the invariant bimodule decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Infinite,
    NotAsserted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimoduleInvariant {
    pub base: MeasureClass,
    pub fiber: ClosureResult,
    pub multiplicity: Multiplicity,
}

/// Base spectral class, its convolution closure (the fiber over the
/// invariant subalgebra), and the fiber multiplicity, which is infinite
/// exactly when the spectral measure has at least one atom.
pub fn bimodule_type(rep: &Representation) -> BimoduleInvariant {
    let base = MeasureClass::of_representation(rep);
    let fiber = convolution_closure(&base, rep.symbols());
    let multiplicity = if base.has_atoms() {
        Multiplicity::Infinite
    } else {
        Multiplicity::NotAsserted
    };
    BimoduleInvariant {
        base,
        fiber,
        multiplicity,
    }
}

/// Coarse fiber type used for separation verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarseClass {
    PurelyAtomic,
    Lebesgue,
    Singular,
    /// Atomless but with no pinned type: no separation claims.
    Unpinned,
}

impl fmt::Display for CoarseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoarseClass::PurelyAtomic => "purely atomic",
            CoarseClass::Lebesgue => "lebesgue",
            CoarseClass::Singular => "singular",
            CoarseClass::Unpinned => "unpinned",
        };
        write!(f, "{s}")
    }
}

pub fn coarse_fiber_class(rep: &Representation) -> CoarseClass {
    let inv = bimodule_type(rep);
    match inv.fiber.class.continuous {
        ContinuousPart::None => CoarseClass::PurelyAtomic,
        ContinuousPart::LebesgueAC => CoarseClass::Lebesgue,
        ContinuousPart::SingularClosed => CoarseClass::Singular,
        ContinuousPart::GenericAtomless => CoarseClass::Unpinned,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralSeparation {
    pub left: CoarseClass,
    pub right: CoarseClass,
}

/// Separates two representations by the coarse type of their bimodule
/// fibers: atomic versus Lebesgue versus singular. Unpinned classes never
/// separate anything.
pub fn separating_invariant(
    r1: &Representation,
    r2: &Representation,
) -> Option<SpectralSeparation> {
    let c1 = coarse_fiber_class(r1);
    let c2 = coarse_fiber_class(r2);
    if c1 == CoarseClass::Unpinned || c2 == CoarseClass::Unpinned || c1 == c2 {
        return None;
    }
    Some(SpectralSeparation { left: c1, right: c2 })
}
