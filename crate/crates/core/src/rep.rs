//! Symbolic descriptions of orthogonal representations of the integers.
//!
//! A representation is a finite direct sum of almost periodic atoms
//! (conjugate pairs of circle eigenvalues with multiplicities, possibly
//! infinite) and weakly mixing summands described by archetype plus mixing
//! flags. Everything is kept in a canonical form so that equality of
//! descriptors is literal equality.

use crate::circle::{CircleError, CirclePoint, CircleSubgroup, SymbolTable};
use crate::extent::Extent;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepError {
    #[error("multiplicities must be at least 1")]
    InvalidMultiplicity,
    #[error("conflicting mixing flags: {0}")]
    ConflictingFlags(String),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

/// Archetype of a weakly mixing summand.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum WmKind {
    /// Multiple of the left regular (Lebesgue) representation.
    LeftRegular(Extent),
    /// Singular atomless spectral measure supported on a closed set
    /// meeting every atom-translate in measure zero.
    SingularClosed,
    /// Atomless spectral measure with no pinned absolute-continuity class.
    AtomlessGeneric,
}

/// A weakly mixing summand with its dynamical flags.
///
/// Invariants: `mixing ⇒ mildly_mixing`, `rigid ⇒ ¬mildly_mixing`, and a
/// left regular part is always mixing and never rigid.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WmPart {
    pub kind: WmKind,
    pub mixing: bool,
    pub mildly_mixing: bool,
    pub rigid: bool,
}

impl WmPart {
    pub fn new(
        kind: WmKind,
        mixing: bool,
        mildly_mixing: bool,
        rigid: bool,
    ) -> Result<WmPart, RepError> {
        if let WmKind::LeftRegular(mult) = &kind {
            if mult.is_zero() {
                return Err(RepError::InvalidMultiplicity);
            }
            if rigid {
                return Err(RepError::ConflictingFlags(
                    "a left regular part cannot be rigid".into(),
                ));
            }
            return Ok(WmPart {
                kind,
                mixing: true,
                mildly_mixing: true,
                rigid: false,
            });
        }
        if rigid && (mixing || mildly_mixing) {
            return Err(RepError::ConflictingFlags(
                "rigid excludes mixing and mildly_mixing".into(),
            ));
        }
        Ok(WmPart {
            kind,
            mixing,
            mildly_mixing: mildly_mixing || mixing,
            rigid,
        })
    }

    pub fn left_regular(mult: Extent) -> WmPart {
        WmPart::new(WmKind::LeftRegular(mult), true, true, false).expect("valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rigid2Dim {
    Yes(String),
    No,
    Unknown,
}

/// Canonical representation descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    name: String,
    symbols: SymbolTable,
    ap_atoms: Vec<(CirclePoint, Extent)>,
    wm_parts: Vec<WmPart>,
}

impl Representation {
    pub fn new(
        name: &str,
        atoms: Vec<(CirclePoint, Extent)>,
        wm_parts: Vec<WmPart>,
        symbols: SymbolTable,
    ) -> Result<Representation, RepError> {
        let mut merged: std::collections::BTreeMap<CirclePoint, Extent> = Default::default();
        for (p, mult) in atoms {
            p.check_symbols(&symbols)?;
            if mult.is_zero() {
                return Err(RepError::InvalidMultiplicity);
            }
            let rep = p.pair_representative();
            let e = merged.entry(rep).or_insert(Extent::Finite(0));
            *e = e.add(mult);
        }
        let mut wm = wm_parts;
        wm.sort();
        Ok(Representation {
            name: name.to_string(),
            symbols,
            ap_atoms: merged.into_iter().collect(),
            wm_parts: wm,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// Atoms as conjugate-pair representatives with multiplicities.
    pub fn ap_atoms(&self) -> &[(CirclePoint, Extent)] {
        &self.ap_atoms
    }

    pub fn wm_parts(&self) -> &[WmPart] {
        &self.wm_parts
    }

    pub fn is_ap_only(&self) -> bool {
        self.wm_parts.is_empty()
    }

    pub fn has_wm(&self) -> bool {
        !self.wm_parts.is_empty()
    }

    /// Real dimension of the almost periodic part: a self-conjugate atom
    /// contributes its multiplicity, a proper pair twice that.
    pub fn ap_dimension(&self) -> Extent {
        let mut dim = Extent::Finite(0);
        for (p, mult) in &self.ap_atoms {
            let per = if p.is_real() { 1 } else { 2 };
            dim = dim.add(mult.mul(Extent::Finite(per)));
        }
        dim
    }

    /// Total dimension; any weakly mixing part is infinite-dimensional.
    pub fn dimension(&self) -> Extent {
        if self.has_wm() {
            Extent::Infinite
        } else {
            self.ap_dimension()
        }
    }

    /// Subgroup of the circle generated by all eigenvalues.
    pub fn eigenvalue_subgroup(&self) -> CircleSubgroup {
        let points: Vec<CirclePoint> = self.ap_atoms.iter().map(|(p, _)| p.clone()).collect();
        CircleSubgroup::generate(&points, &self.symbols).expect("atoms already symbol-checked")
    }

    /// Index of the kernel of the representation in the integers.
    ///
    /// A weakly mixing part has trivial kernel, hence infinite index;
    /// otherwise the index equals the order of the eigenvalue subgroup.
    pub fn kernel_index(&self) -> Extent {
        if self.has_wm() {
            Extent::Infinite
        } else {
            self.eigenvalue_subgroup().order()
        }
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel_index() == Extent::Infinite
    }

    /// Splits into the almost periodic and weakly mixing subrepresentations.
    pub fn decompose(&self) -> (Representation, Representation) {
        let ap = Representation {
            name: format!("{}.ap", self.name),
            symbols: self.symbols.clone(),
            ap_atoms: self.ap_atoms.clone(),
            wm_parts: Vec::new(),
        };
        let wm = Representation {
            name: format!("{}.wm", self.name),
            symbols: self.symbols.clone(),
            ap_atoms: Vec::new(),
            wm_parts: self.wm_parts.clone(),
        };
        (ap, wm)
    }

    /// Whether the representation restricts rigidly to some two-dimensional
    /// invariant subspace.
    pub fn has_rigid_2dim(&self) -> Rigid2Dim {
        if self.ap_dimension() >= Extent::Finite(2) {
            return Rigid2Dim::Yes(
                "the almost periodic part contains a two-dimensional invariant subspace, \
                 on which the restriction is almost periodic hence rigid"
                    .into(),
            );
        }
        if let Some(part) = self.wm_parts.iter().find(|p| p.rigid) {
            return Rigid2Dim::Yes(format!(
                "a weakly mixing summand ({:?}) is flagged rigid",
                part.kind
            ));
        }
        if self.wm_parts.iter().all(|p| p.mildly_mixing) {
            return Rigid2Dim::No;
        }
        Rigid2Dim::Unknown
    }

    /// Canonical textual form in the input grammar.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rep {} {{", self.name);
        for (p, mult) in &self.ap_atoms {
            let angle = if p.is_identity() {
                "1".to_string()
            } else if p.is_half() {
                "-1".to_string()
            } else {
                p.to_string()
            };
            let _ = writeln!(s, "  atom {angle} mult {mult}");
        }
        for part in &self.wm_parts {
            let kind = match &part.kind {
                WmKind::LeftRegular(mult) => format!("left_regular mult {mult}"),
                WmKind::SingularClosed => "singular_closed".to_string(),
                WmKind::AtomlessGeneric => "atomless".to_string(),
            };
            let mut flags = Vec::new();
            if part.mixing {
                flags.push("mixing");
            }
            if part.mildly_mixing {
                flags.push("mildly_mixing");
            }
            if part.rigid {
                flags.push("rigid");
            }
            if flags.is_empty() {
                let _ = writeln!(s, "  wm {kind}");
            } else {
                let _ = writeln!(s, "  wm {kind} flags {}", flags.join(" "));
            }
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str]) -> SymbolTable {
        SymbolTable::new(names.iter().map(|s| s.to_string())).unwrap()
    }

    fn fin(n: u128) -> Extent {
        Extent::Finite(n)
    }

    #[test]
    fn atoms_fold_to_pair_representatives() {
        let tb = table(&[]);
        let r = Representation::new(
            "r",
            vec![
                (CirclePoint::rational(3, 5), fin(1)),
                (CirclePoint::rational(2, 5), fin(2)),
            ],
            vec![],
            tb,
        )
        .unwrap();
        assert_eq!(r.ap_atoms().len(), 1);
        assert_eq!(r.ap_atoms()[0], (CirclePoint::rational(2, 5), fin(3)));
        assert_eq!(r.ap_dimension(), fin(6));
    }

    #[test]
    fn dimension_counts_real_atoms_once() {
        let tb = table(&["t"]);
        let r = Representation::new(
            "r",
            vec![
                (CirclePoint::identity(), fin(2)),
                (CirclePoint::half(), fin(1)),
                (CirclePoint::symbol("t"), fin(1)),
            ],
            vec![],
            tb,
        )
        .unwrap();
        assert_eq!(r.ap_dimension(), fin(5));
        assert_eq!(r.dimension(), fin(5));
        assert!(r.is_faithful());
        assert_eq!(r.kernel_index(), Extent::Infinite);
    }

    #[test]
    fn kernel_index_of_periodic_rep() {
        let tb = table(&[]);
        let r = Representation::new(
            "r",
            vec![(CirclePoint::rational(1, 5), fin(1))],
            vec![],
            tb.clone(),
        )
        .unwrap();
        assert_eq!(r.kernel_index(), fin(5));
        assert!(!r.is_faithful());

        let with_wm = Representation::new(
            "r2",
            vec![(CirclePoint::rational(1, 5), fin(1))],
            vec![WmPart::left_regular(fin(1))],
            tb,
        )
        .unwrap();
        assert_eq!(with_wm.kernel_index(), Extent::Infinite);
        assert_eq!(with_wm.dimension(), Extent::Infinite);
    }

    #[test]
    fn wm_flag_rules() {
        let lr = WmPart::left_regular(fin(1));
        assert!(lr.mixing && lr.mildly_mixing && !lr.rigid);
        assert!(matches!(
            WmPart::new(WmKind::LeftRegular(fin(1)), false, false, true),
            Err(RepError::ConflictingFlags(_))
        ));
        assert!(matches!(
            WmPart::new(WmKind::SingularClosed, true, false, true),
            Err(RepError::ConflictingFlags(_))
        ));
        let s = WmPart::new(WmKind::SingularClosed, true, false, false).unwrap();
        assert!(s.mildly_mixing, "mixing implies mildly mixing");
        let r = WmPart::new(WmKind::AtomlessGeneric, false, false, true).unwrap();
        assert!(r.rigid && !r.mildly_mixing);
    }

    #[test]
    fn rigid_two_dim_detection() {
        let tb = table(&["t"]);
        let two_dim = Representation::new(
            "a",
            vec![(CirclePoint::symbol("t"), fin(1))],
            vec![],
            tb.clone(),
        )
        .unwrap();
        assert!(matches!(two_dim.has_rigid_2dim(), Rigid2Dim::Yes(_)));

        let mixing_only = Representation::new(
            "b",
            vec![(CirclePoint::identity(), fin(1))],
            vec![WmPart::left_regular(fin(1))],
            tb.clone(),
        )
        .unwrap();
        assert_eq!(mixing_only.has_rigid_2dim(), Rigid2Dim::No);

        let unflagged = Representation::new(
            "c",
            vec![],
            vec![WmPart::new(WmKind::AtomlessGeneric, false, false, false).unwrap()],
            tb,
        )
        .unwrap();
        assert_eq!(unflagged.has_rigid_2dim(), Rigid2Dim::Unknown);
    }

    #[test]
    fn zero_multiplicity_rejected() {
        let tb = table(&[]);
        assert_eq!(
            Representation::new(
                "r",
                vec![(CirclePoint::identity(), fin(0))],
                vec![],
                tb
            )
            .unwrap_err(),
            RepError::InvalidMultiplicity
        );
    }
}
