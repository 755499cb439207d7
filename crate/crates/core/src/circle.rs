//! Exact arithmetic on the circle group `R/Z` with symbolic irrationals.
//!
//! A [`CirclePoint`] is `t + sum_i c_i * s_i (mod 1)` where `t` is a reduced
//! rational in `[0,1)` and each `s_i` is a named angle symbol standing for an
//! irrational number of turns. The symbols are assumed rationally independent
//! from `1` and from each other, so equality of points is decidable by
//! comparing canonical forms.
//!
//! A [`CircleSubgroup`] is a finitely generated subgroup of `Q/Z ⊕ Z^S`,
//! stored canonically: the symbolic coefficient matrix of the generators is
//! put in Hermite normal form (carrying torsion components along), the pure
//! torsion part collapses to the cyclic group generated by `1/L`, and each
//! basis row's torsion is reduced into `[0, 1/L)`. Two subgroups over the
//! same symbol table are equal iff their canonical fields coincide.

use crate::extent::Extent;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircleError {
    #[error("symbol table mismatch: {0}")]
    SymbolTableMismatch(String),
    #[error("target is not in the subgroup generated by the given points")]
    NotInSubgroup,
}

/// Ordered registry of irrational angle symbols (sorted, unique).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolTable {
    symbols: Vec<String>,
}

impl SymbolTable {
    pub fn empty() -> SymbolTable {
        SymbolTable { symbols: Vec::new() }
    }

    /// Builds a table from declared names; sorts and rejects duplicates.
    pub fn new<I: IntoIterator<Item = String>>(names: I) -> Result<SymbolTable, CircleError> {
        let mut symbols: Vec<String> = names.into_iter().collect();
        symbols.sort();
        for w in symbols.windows(2) {
            if w[0] == w[1] {
                return Err(CircleError::SymbolTableMismatch(format!(
                    "symbol `{}` declared twice",
                    w[0]
                )));
            }
        }
        Ok(SymbolTable { symbols })
    }

    pub fn names(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols.binary_search_by(|s| s.as_str().cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }
}

fn mod1(q: &BigRational) -> BigRational {
    q - q.floor()
}

/// A point of the circle group in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CirclePoint {
    torsion: BigRational,
    symbolic: BTreeMap<String, BigInt>,
}

impl CirclePoint {
    pub fn identity() -> CirclePoint {
        CirclePoint {
            torsion: BigRational::zero(),
            symbolic: BTreeMap::new(),
        }
    }

    /// The half turn (eigenvalue −1).
    pub fn half() -> CirclePoint {
        CirclePoint::rational(1, 2)
    }

    pub fn rational(num: i64, den: i64) -> CirclePoint {
        assert!(den != 0, "zero denominator");
        CirclePoint {
            torsion: mod1(&BigRational::new(num.into(), den.into())),
            symbolic: BTreeMap::new(),
        }
    }

    pub fn symbol(name: &str) -> CirclePoint {
        let mut symbolic = BTreeMap::new();
        symbolic.insert(name.to_string(), BigInt::one());
        CirclePoint {
            torsion: BigRational::zero(),
            symbolic,
        }
    }

    pub fn from_parts(torsion: BigRational, symbolic: BTreeMap<String, BigInt>) -> CirclePoint {
        CirclePoint {
            torsion: mod1(&torsion),
            symbolic: symbolic.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn torsion(&self) -> &BigRational {
        &self.torsion
    }

    pub fn symbolic(&self) -> &BTreeMap<String, BigInt> {
        &self.symbolic
    }

    pub fn is_identity(&self) -> bool {
        self.torsion.is_zero() && self.symbolic.is_empty()
    }

    pub fn is_half(&self) -> bool {
        self.symbolic.is_empty() && self.torsion == BigRational::new(1.into(), 2.into())
    }

    /// Real eigenvalues are exactly the fixed points of conjugation.
    pub fn is_real(&self) -> bool {
        self.is_identity() || self.is_half()
    }

    pub fn multiply(&self, other: &CirclePoint) -> CirclePoint {
        let mut symbolic = self.symbolic.clone();
        for (name, c) in &other.symbolic {
            let entry = symbolic.entry(name.clone()).or_insert_with(BigInt::zero);
            *entry += c;
        }
        symbolic.retain(|_, c| !c.is_zero());
        CirclePoint {
            torsion: mod1(&(&self.torsion + &other.torsion)),
            symbolic,
        }
    }

    /// Group inverse; for an eigenvalue atom this is complex conjugation.
    pub fn conjugate(&self) -> CirclePoint {
        CirclePoint {
            torsion: mod1(&(-&self.torsion)),
            symbolic: self.symbolic.iter().map(|(n, c)| (n.clone(), -c)).collect(),
        }
    }

    pub fn pow(&self, k: &BigInt) -> CirclePoint {
        CirclePoint {
            torsion: mod1(&(&self.torsion * BigRational::from_integer(k.clone()))),
            symbolic: self
                .symbolic
                .iter()
                .map(|(n, c)| (n.clone(), c * k))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn pow_i64(&self, k: i64) -> CirclePoint {
        self.pow(&BigInt::from(k))
    }

    /// Order of the point in the circle group.
    pub fn order(&self) -> Extent {
        if self.symbolic.is_empty() {
            let den: u128 = self
                .torsion
                .denom()
                .try_into()
                .expect("torsion denominator exceeds u128");
            Extent::Finite(den)
        } else {
            Extent::Infinite
        }
    }

    /// Canonical representative of the conjugate pair `{p, p̄}`.
    ///
    /// For a purely rational point this lands in `[0, 1/2]` turns; for a
    /// symbolic point the leading symbol coefficient is made positive.
    pub fn pair_representative(&self) -> CirclePoint {
        let conj = self.conjugate();
        if let Some((_, c)) = self.symbolic.iter().next() {
            return if c.is_positive() { self.clone() } else { conj };
        }
        if *self <= conj {
            self.clone()
        } else {
            conj
        }
    }

    pub fn check_symbols(&self, table: &SymbolTable) -> Result<(), CircleError> {
        for name in self.symbolic.keys() {
            if !table.contains(name) {
                return Err(CircleError::SymbolTableMismatch(format!(
                    "symbol `{name}` is not declared"
                )));
            }
        }
        Ok(())
    }

    fn coeff_row(&self, table: &SymbolTable) -> Vec<BigInt> {
        let mut row = vec![BigInt::zero(); table.len()];
        for (name, c) in &self.symbolic {
            let idx = table.index_of(name).expect("symbol checked against table");
            row[idx] = c.clone();
        }
        row
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.torsion.is_zero() || self.symbolic.is_empty() {
            if self.torsion.denom().is_one() {
                write!(f, "{}", self.torsion.numer())?;
            } else {
                write!(f, "{}/{}", self.torsion.numer(), self.torsion.denom())?;
            }
            first = false;
        }
        for (name, c) in &self.symbolic {
            if c.is_negative() {
                write!(f, "-")?;
            } else if !first {
                write!(f, "+")?;
            }
            let a = c.abs();
            if !a.is_one() {
                write!(f, "{a}*")?;
            }
            write!(f, "sym:{name}")?;
            first = false;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Integer matrix utilities (row-style Hermite normal form with transform).
// ---------------------------------------------------------------------------

fn identity_matrix(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

/// Row Hermite normal form. Returns `(h, u, rank)` with `u · a = h`,
/// `u` unimodular, the first `rank` rows of `h` the nonzero echelon rows
/// (positive pivots, entries above a pivot reduced into `[0, pivot)`),
/// and the remaining rows zero.
pub(crate) fn hnf_with_transform(
    mut a: Vec<Vec<BigInt>>,
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, usize) {
    let nrows = a.len();
    let ncols = a.first().map(|r| r.len()).unwrap_or(0);
    let mut u = identity_matrix(nrows);
    let mut r = 0usize;
    for c in 0..ncols {
        if r >= nrows {
            break;
        }
        // Gcd-eliminate column c among rows r.. down to a single pivot.
        loop {
            let mut piv: Option<usize> = None;
            for i in r..nrows {
                if !a[i][c].is_zero() {
                    piv = match piv {
                        None => Some(i),
                        Some(p) if a[i][c].abs() < a[p][c].abs() => Some(i),
                        keep => keep,
                    };
                }
            }
            let Some(p) = piv else { break };
            a.swap(r, p);
            u.swap(r, p);
            let mut clean = true;
            for i in (r + 1)..nrows {
                if !a[i][c].is_zero() {
                    let q = a[i][c].div_floor(&a[r][c]);
                    if !q.is_zero() {
                        for j in 0..ncols {
                            let t = &a[r][j] * &q;
                            a[i][j] -= t;
                        }
                        for j in 0..nrows {
                            let t = &u[r][j] * &q;
                            u[i][j] -= t;
                        }
                    }
                    if !a[i][c].is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for j in 0..ncols {
                a[r][j] = -a[r][j].clone();
            }
            for j in 0..nrows {
                u[r][j] = -u[r][j].clone();
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if !q.is_zero() {
                for j in 0..ncols {
                    let t = &a[r][j] * &q;
                    a[i][j] -= t;
                }
                for j in 0..nrows {
                    let t = &u[r][j] * &q;
                    u[i][j] -= t;
                }
            }
        }
        r += 1;
    }
    (a, u, r)
}

/// Expresses `b` as an integer combination of the first `rank` rows of the
/// HNF matrix `h`, or `None` if `b` is outside their row lattice.
fn solve_in_hnf(h: &[Vec<BigInt>], rank: usize, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let ncols = b.len();
    let mut v = b.to_vec();
    let mut y = vec![BigInt::zero(); rank];
    for (i, item) in y.iter_mut().enumerate().take(rank) {
        let pivot_col = h[i].iter().position(|x| !x.is_zero())?;
        // Columns before this pivot must already be exhausted.
        for (c, vc) in v.iter().enumerate().take(pivot_col) {
            if !vc.is_zero() {
                let _ = c;
                return None;
            }
        }
        let (q, rem) = v[pivot_col].div_rem(&h[i][pivot_col]);
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for j in 0..ncols {
                let t = &h[i][j] * &q;
                v[j] -= t;
            }
        }
        *item = q;
    }
    if v.iter().all(|x| x.is_zero()) {
        Some(y)
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

/// A finitely generated subgroup of the circle in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CircleSubgroup {
    symbols: SymbolTable,
    torsion_order: u128,
    basis: Vec<CirclePoint>,
}

impl CircleSubgroup {
    pub fn trivial(table: &SymbolTable) -> CircleSubgroup {
        CircleSubgroup {
            symbols: table.clone(),
            torsion_order: 1,
            basis: Vec::new(),
        }
    }

    /// Canonical subgroup generated by `points` inside the ambient table.
    pub fn generate(
        points: &[CirclePoint],
        table: &SymbolTable,
    ) -> Result<CircleSubgroup, CircleError> {
        for p in points {
            p.check_symbols(table)?;
        }
        let rows: Vec<Vec<BigInt>> = points.iter().map(|p| p.coeff_row(table)).collect();
        let torsions: Vec<BigRational> = points.iter().map(|p| p.torsion.clone()).collect();
        let (h, u, rank) = hnf_with_transform(rows);

        let combined_torsion = |coeffs: &[BigInt]| -> BigRational {
            let mut t = BigRational::zero();
            for (c, tj) in coeffs.iter().zip(&torsions) {
                t += tj * BigRational::from_integer(c.clone());
            }
            mod1(&t)
        };

        // Pure torsion part: generated by the torsions of the kernel rows.
        let mut l = BigInt::one();
        for row in u.iter().skip(rank) {
            let t = combined_torsion(row);
            if !t.is_zero() {
                l = l.lcm(t.denom());
            }
        }
        let torsion_order: u128 = l.clone().try_into().expect("torsion order exceeds u128");
        let step = BigRational::new(BigInt::one(), l);

        let mut basis = Vec::with_capacity(rank);
        for i in 0..rank {
            let t = combined_torsion(&u[i]);
            // Reduce the carried torsion modulo the pure torsion subgroup.
            let t = &t - (&t / &step).floor() * &step;
            let mut symbolic = BTreeMap::new();
            for (j, name) in table.names().iter().enumerate() {
                if !h[i][j].is_zero() {
                    symbolic.insert(name.clone(), h[i][j].clone());
                }
            }
            basis.push(CirclePoint::from_parts(t, symbolic));
        }

        Ok(CircleSubgroup {
            symbols: table.clone(),
            torsion_order,
            basis,
        })
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    /// Order of the intersection with the rational circle `Q/Z`.
    pub fn torsion_order(&self) -> u128 {
        self.torsion_order
    }

    /// Rank of the free part.
    pub fn free_rank(&self) -> usize {
        self.basis.len()
    }

    /// Canonical basis of the free (symbol-carrying) part.
    pub fn basis(&self) -> &[CirclePoint] {
        &self.basis
    }

    pub fn order(&self) -> Extent {
        if self.basis.is_empty() {
            Extent::Finite(self.torsion_order)
        } else {
            Extent::Infinite
        }
    }

    pub fn is_finite(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty() && self.torsion_order == 1
    }

    /// Infinite cyclic means free rank 1 with trivial torsion.
    pub fn is_infinite_cyclic(&self) -> bool {
        self.basis.len() == 1 && self.torsion_order == 1
    }

    /// All elements, when the subgroup is finite.
    pub fn elements(&self) -> Option<Vec<CirclePoint>> {
        if !self.is_finite() {
            return None;
        }
        let l = i64::try_from(self.torsion_order).ok()?;
        Some((0..l).map(|k| CirclePoint::rational(k, l)).collect())
    }

    /// Residue of a finite-subgroup member modulo `torsion_order`.
    ///
    /// The finite part is cyclic generated by `1/L`; a member `p/q` with
    /// `q | L` maps to `p·(L/q) mod L`.
    pub fn residue(&self, point: &CirclePoint) -> Option<u128> {
        if !point.symbolic.is_empty() {
            return None;
        }
        let l = BigInt::from(self.torsion_order);
        let den = point.torsion.denom();
        if !(&l % den).is_zero() {
            return None;
        }
        let scaled = point.torsion.numer() * (&l / den);
        let r = scaled.mod_floor(&l);
        Some(r.try_into().expect("residue fits"))
    }

    pub fn member(&self, point: &CirclePoint) -> Result<bool, CircleError> {
        point.check_symbols(&self.symbols)?;
        let v = point.coeff_row(&self.symbols);
        let h: Vec<Vec<BigInt>> = self
            .basis
            .iter()
            .map(|p| p.coeff_row(&self.symbols))
            .collect();
        let Some(y) = solve_in_hnf(&h, h.len(), &v) else {
            return Ok(false);
        };
        let mut t = point.torsion.clone();
        for (c, b) in y.iter().zip(&self.basis) {
            t -= &b.torsion * BigRational::from_integer(c.clone());
        }
        let t = mod1(&t);
        if t.is_zero() {
            return Ok(true);
        }
        let den: u128 = t.denom().try_into().expect("denominator fits");
        Ok(self.torsion_order % den == 0)
    }

    /// Equality of canonical forms; errors when the ambient tables differ.
    pub fn subgroup_equal(&self, other: &CircleSubgroup) -> Result<bool, CircleError> {
        if self.symbols != other.symbols {
            return Err(CircleError::SymbolTableMismatch(
                "subgroups live over different symbol tables".into(),
            ));
        }
        Ok(self.torsion_order == other.torsion_order && self.basis == other.basis)
    }

    /// Abstract (unlabelled) isomorphism type: free rank plus torsion order.
    pub fn abstractly_isomorphic(&self, other: &CircleSubgroup) -> bool {
        self.free_rank() == other.free_rank() && self.torsion_order == other.torsion_order
    }
}

impl fmt::Display for CircleSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        let mut first = true;
        if self.torsion_order > 1 {
            write!(f, "1/{}", self.torsion_order)?;
            first = false;
        }
        for b in &self.basis {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ">")
    }
}

/// Finds integer coefficients `c` with `sum_j c_j · gens_j = target`.
///
/// Any valid solution is acceptable; this implementation returns a
/// deterministic size-reduced one (a particular solution reduced against a
/// basis of the relation lattice).
pub fn express(
    target: &CirclePoint,
    gens: &[CirclePoint],
    table: &SymbolTable,
) -> Result<Vec<BigInt>, CircleError> {
    target.check_symbols(table)?;
    for g in gens {
        g.check_symbols(table)?;
    }
    let n = gens.len();
    let mut d = BigInt::one();
    for g in gens {
        d = d.lcm(g.torsion.denom());
    }
    d = d.lcm(target.torsion.denom());

    let scale = |t: &BigRational| -> BigInt {
        let s = t * BigRational::from_integer(d.clone());
        assert!(s.denom().is_one());
        s.numer().clone()
    };

    // Unknowns: c_1..c_n plus one wrap-around counter for the torsion
    // congruence modulo 1.
    let ncols = table.len() + 1;
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for g in gens {
        let mut row = g.coeff_row(table);
        row.push(scale(&g.torsion));
        rows.push(row);
    }
    let mut wrap = vec![BigInt::zero(); ncols];
    wrap[ncols - 1] = d.clone();
    rows.push(wrap);

    let (h, u, rank) = hnf_with_transform(rows);
    let mut b = target.coeff_row(table);
    b.push(scale(&target.torsion));
    let y = solve_in_hnf(&h, rank, &b).ok_or(CircleError::NotInSubgroup)?;

    let mut full = vec![BigInt::zero(); n + 1];
    for (i, yi) in y.iter().enumerate() {
        if !yi.is_zero() {
            for j in 0..(n + 1) {
                full[j] += yi * &u[i][j];
            }
        }
    }
    let mut coeffs: Vec<BigInt> = full[..n].to_vec();

    // Size-reduce against the relation lattice (kernel rows of the HNF
    // transform, projected away from the wrap counter).
    let kernel: Vec<Vec<BigInt>> = u[rank..]
        .iter()
        .map(|row| row[..n].to_vec())
        .filter(|row| row.iter().any(|x| !x.is_zero()))
        .collect();
    let norm = |v: &[BigInt]| -> BigInt { v.iter().map(|x| x * x).sum() };
    for _ in 0..64 {
        let mut improved = false;
        for k in &kernel {
            let dot: BigInt = coeffs.iter().zip(k).map(|(a, b)| a * b).sum();
            let kk = norm(k);
            if kk.is_zero() {
                continue;
            }
            // Nearest integer to dot/kk.
            let q = (BigInt::from(2) * &dot + &kk).div_floor(&(BigInt::from(2) * &kk));
            if q.is_zero() {
                continue;
            }
            let candidate: Vec<BigInt> =
                coeffs.iter().zip(k).map(|(a, b)| a - &q * b).collect();
            if norm(&candidate) < norm(&coeffs) {
                coeffs = candidate;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(names: &[&str]) -> SymbolTable {
        SymbolTable::new(names.iter().map(|s| s.to_string())).unwrap()
    }

    fn zeta(num: i64, den: i64) -> CirclePoint {
        CirclePoint::rational(num, den)
    }

    #[test]
    fn point_canonical_form() {
        assert_eq!(zeta(7, 5), zeta(2, 5));
        assert_eq!(zeta(-1, 5), zeta(4, 5));
        assert_eq!(zeta(4, 2), CirclePoint::identity());
        let t = CirclePoint::symbol("t");
        assert_eq!(t.multiply(&t.conjugate()), CirclePoint::identity());
        assert!(CirclePoint::half().is_real());
        assert!(!t.is_real());
    }

    #[test]
    fn point_orders() {
        assert_eq!(zeta(2, 5).order(), Extent::Finite(5));
        assert_eq!(CirclePoint::identity().order(), Extent::Finite(1));
        assert_eq!(CirclePoint::symbol("t").order(), Extent::Infinite);
    }

    #[test]
    fn pair_representative_is_conjugation_invariant() {
        let p = zeta(3, 5);
        assert_eq!(p.pair_representative(), zeta(2, 5));
        assert_eq!(p.conjugate().pair_representative(), zeta(2, 5));
        assert_eq!(zeta(1, 2).pair_representative(), zeta(1, 2));
    }

    /// Oracle: brute-force closure of a finite generating set by repeated
    /// multiplication, for rational generators only.
    fn brute_force_elements(gens: &[CirclePoint]) -> Vec<CirclePoint> {
        let mut set = std::collections::BTreeSet::new();
        set.insert(CirclePoint::identity());
        loop {
            let mut next = set.clone();
            for a in &set {
                for g in gens {
                    next.insert(a.multiply(g));
                    next.insert(a.multiply(&g.conjugate()));
                }
            }
            if next == set {
                return set.into_iter().collect();
            }
            set = next;
        }
    }

    #[test]
    fn finite_subgroup_matches_brute_force_closure() {
        let tb = table(&[]);
        let gens = vec![zeta(1, 6), zeta(3, 4)];
        let g = CircleSubgroup::generate(&gens, &tb).unwrap();
        let brute = brute_force_elements(&gens);
        assert_eq!(g.order(), Extent::Finite(brute.len() as u128));
        assert_eq!(g.torsion_order(), 12);
        let mut elems = g.elements().unwrap();
        elems.sort();
        assert_eq!(elems, brute);
        for e in &brute {
            assert!(g.member(e).unwrap());
        }
        assert!(!g.member(&zeta(1, 5)).unwrap());
    }

    #[test]
    fn mixed_generators_fold_via_pivot_clearing() {
        // <1/4 + t, t> contains 1/4 purely rationally.
        let tb = table(&["t"]);
        let mixed = zeta(1, 4).multiply(&CirclePoint::symbol("t"));
        let g = CircleSubgroup::generate(&[mixed.clone(), CirclePoint::symbol("t")], &tb).unwrap();
        assert_eq!(g.torsion_order(), 4);
        assert_eq!(g.free_rank(), 1);
        assert!(g.member(&zeta(1, 4)).unwrap());
        assert!(g.member(&CirclePoint::symbol("t")).unwrap());
        assert!(!g.member(&zeta(1, 8)).unwrap());

        // Same subgroup described differently.
        let g2 = CircleSubgroup::generate(&[zeta(1, 4), CirclePoint::symbol("t")], &tb).unwrap();
        assert!(g.subgroup_equal(&g2).unwrap());
    }

    #[test]
    fn canonical_form_is_generator_order_independent() {
        let tb = table(&["s", "t"]);
        let a = CirclePoint::symbol("s").multiply(&zeta(1, 3));
        let b = CirclePoint::symbol("t").pow_i64(2);
        let c = CirclePoint::symbol("s").multiply(&CirclePoint::symbol("t"));
        let g1 = CircleSubgroup::generate(&[a.clone(), b.clone(), c.clone()], &tb).unwrap();
        let g2 = CircleSubgroup::generate(&[c, a, b], &tb).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn index_two_sublattice_is_distinguished() {
        let tb = table(&["t"]);
        let t = CirclePoint::symbol("t");
        let g1 = CircleSubgroup::generate(&[t.clone()], &tb).unwrap();
        let g2 = CircleSubgroup::generate(&[t.pow_i64(2)], &tb).unwrap();
        assert!(!g1.subgroup_equal(&g2).unwrap());
        assert!(g1.abstractly_isomorphic(&g2));
        assert!(g1.member(&t.pow_i64(2)).unwrap());
        assert!(!g2.member(&t).unwrap());
    }

    #[test]
    fn symbol_table_mismatch_is_reported() {
        let tb = table(&[]);
        let err = CircleSubgroup::generate(&[CirclePoint::symbol("t")], &tb).unwrap_err();
        assert!(matches!(err, CircleError::SymbolTableMismatch(_)));
    }

    #[test]
    fn express_simple_rational() {
        let tb = table(&[]);
        // 2/5 = 2 · (1/5)
        let c = express(&zeta(2, 5), &[zeta(1, 5)], &tb).unwrap();
        assert_eq!(c, vec![BigInt::from(2)]);
        // Check by substitution (the generic oracle used below).
        check_express(&zeta(2, 5), &[zeta(1, 5)], &tb);
    }

    fn check_express(target: &CirclePoint, gens: &[CirclePoint], tb: &SymbolTable) {
        let c = express(target, gens, tb).unwrap();
        let mut acc = CirclePoint::identity();
        for (ci, g) in c.iter().zip(gens) {
            acc = acc.multiply(&g.pow(ci));
        }
        assert_eq!(&acc, target, "express returned a non-solution");
    }

    #[test]
    fn express_mixed_generators() {
        let tb = table(&["s", "t"]);
        let s = CirclePoint::symbol("s");
        let t = CirclePoint::symbol("t");
        let gens = vec![
            s.multiply(&zeta(1, 3)),
            t.clone(),
            s.multiply(&t.conjugate()),
        ];
        check_express(&zeta(1, 3), &gens, &tb);
        check_express(&s.pow_i64(3).multiply(&t), &gens, &tb);
        check_express(&CirclePoint::identity(), &gens, &tb);
    }

    #[test]
    fn express_rejects_outsiders() {
        let tb = table(&["t"]);
        let t = CirclePoint::symbol("t");
        assert_eq!(
            express(&t, &[t.pow_i64(2)], &tb),
            Err(CircleError::NotInSubgroup)
        );
        assert_eq!(
            express(&zeta(1, 2), &[zeta(1, 5)], &tb),
            Err(CircleError::NotInSubgroup)
        );
    }

    #[test]
    fn membership_of_torsion_translates() {
        // Basis row carrying torsion: <1/4 + t> with torsion part trivial.
        let tb = table(&["t"]);
        let gen = zeta(1, 4).multiply(&CirclePoint::symbol("t"));
        let g = CircleSubgroup::generate(&[gen.clone()], &tb).unwrap();
        assert_eq!(g.torsion_order(), 1);
        assert!(g.member(&gen).unwrap());
        assert!(g.member(&gen.pow_i64(4)).unwrap());
        assert!(!g.member(&CirclePoint::symbol("t")).unwrap());
        assert!(!g.member(&zeta(1, 4)).unwrap());
    }

    #[test]
    fn residue_mapping() {
        let tb = table(&[]);
        let g = CircleSubgroup::generate(&[zeta(1, 6)], &tb).unwrap();
        assert_eq!(g.residue(&zeta(1, 6)), Some(1));
        assert_eq!(g.residue(&zeta(1, 2)), Some(3));
        assert_eq!(g.residue(&zeta(5, 6)), Some(5));
        assert_eq!(g.residue(&zeta(1, 4)), None);
    }
}
