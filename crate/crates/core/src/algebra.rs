//! Canonical computation in the free Boolean algebra on `n ≤ 16` generators.
//!
//! An element is stored as its set of atoms. The atom `a_I` is the region that
//! lies inside every `x_j` with `j ∉ I` and outside every `x_i` with `i ∈ I`;
//! `I` is the **excluded** index set. Atom `a_I` lives at bit position `b`
//! where bit `i-1` of `b` is set iff `i ∈ I`. So `a_∅` (bit 0) is the
//! intersection of all variables, and `a_[n]` (the last bit) is the outside
//! of every variable.

use std::fmt;
use std::ops::{Add, Neg};

use crate::error::{Error, Result};
use crate::expr::BoolExpr;

pub const MAX_VARS: usize = 16;

/// A subset of `{1..=16}`, stored as a bitmask with bit `i-1` for index `i`.
///
/// Methods taking or returning positions use 0-based positions; `Display`
/// prints 1-based indices, e.g. `{1,3}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        IndexSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// `{1..=n}`.
    pub fn full(n: usize) -> Self {
        IndexSet(((1u64 << n) - 1) as u32)
    }

    pub fn from_positions<I: IntoIterator<Item = usize>>(positions: I) -> Self {
        IndexSet(positions.into_iter().fold(0, |acc, p| acc | (1 << p)))
    }

    pub fn singleton(position: usize) -> Self {
        IndexSet(1 << position)
    }

    pub fn contains(self, position: usize) -> bool {
        self.0 >> position & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: IndexSet) -> Self {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(self, other: IndexSet) -> Self {
        IndexSet(self.0 & other.0)
    }

    pub fn minus(self, other: IndexSet) -> Self {
        IndexSet(self.0 & !other.0)
    }

    /// 0-based positions in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let p = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(p)
        })
    }

    /// All subsets of `self`, including `∅` and `self`, in increasing mask order.
    pub fn subsets(self) -> impl Iterator<Item = IndexSet> {
        let mask = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask {
                None
            } else {
                Some((cur.wrapping_sub(mask)) & mask)
            };
            Some(IndexSet(cur))
        })
    }

    /// All subsets of `{1..=n}` of size `k`, in increasing mask order.
    pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = IndexSet> {
        (0u32..(1u32 << n))
            .filter(move |m| m.count_ones() as usize == k)
            .map(IndexSet)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", p + 1)?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// Bit t of PARITY is set iff t has an odd number of one bits.
const PARITY: u64 = 0x6996_9669_9669_6996;

// VAR_PATTERN[p] has bit t set iff bit p of t is clear, i.e. the atoms inside x_{p+1}.
const VAR_PATTERN: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

/// Element of the free Boolean algebra `B_n`, as a bitset over its `2^n` atoms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AtomSet {
    n: usize,
    words: Vec<u64>,
}

fn check_n(n: usize) -> Result<()> {
    if (1..=MAX_VARS).contains(&n) {
        Ok(())
    } else {
        Err(Error::VariableCount(n))
    }
}

impl AtomSet {
    fn word_count(n: usize) -> usize {
        (1usize << n).div_ceil(64)
    }

    fn tail_mask(&self) -> u64 {
        let atoms = 1usize << self.n;
        if atoms >= 64 {
            u64::MAX
        } else {
            (1u64 << atoms) - 1
        }
    }

    fn normalize(mut self) -> Self {
        let mask = self.tail_mask();
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
        self
    }

    pub fn empty(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(AtomSet {
            n,
            words: vec![0; Self::word_count(n)],
        })
    }

    pub fn universe(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(AtomSet {
            n,
            words: vec![u64::MAX; Self::word_count(n)],
        }
        .normalize())
    }

    /// The generator `x_{position+1}`.
    pub fn variable(n: usize, position: usize) -> Result<Self> {
        check_n(n)?;
        if position >= n {
            return Err(Error::VariableOutOfRange {
                index: position as u32 + 1,
                n,
            });
        }
        let words = (0..Self::word_count(n))
            .map(|w| {
                if position < 6 {
                    VAR_PATTERN[position]
                } else if w >> (position - 6) & 1 == 0 {
                    u64::MAX
                } else {
                    0
                }
            })
            .collect();
        Ok(AtomSet { n, words }.normalize())
    }

    /// The single atom `a_I`.
    pub fn atom(n: usize, excluded: IndexSet) -> Result<Self> {
        let mut s = Self::empty(n)?;
        s.insert(excluded);
        Ok(s)
    }

    /// The union `u_I = ⋃_{i∈I} x_i`.
    pub fn union_of(n: usize, indices: IndexSet) -> Result<Self> {
        Self::from_fn(n, |atom| !indices.is_subset(atom))
    }

    /// Builds the element containing exactly the atoms `a_I` with `keep(I)`.
    pub fn from_fn(n: usize, mut keep: impl FnMut(IndexSet) -> bool) -> Result<Self> {
        let mut s = Self::empty(n)?;
        for b in 0..(1u32 << n) {
            if keep(IndexSet(b)) {
                s.insert(IndexSet(b));
            }
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, atom: IndexSet) -> bool {
        let b = atom.0 as usize;
        self.words[b / 64] >> (b % 64) & 1 == 1
    }

    pub fn insert(&mut self, atom: IndexSet) {
        let b = atom.0 as usize;
        self.words[b / 64] |= 1 << (b % 64);
    }

    pub fn remove(&mut self, atom: IndexSet) {
        let b = atom.0 as usize;
        self.words[b / 64] &= !(1 << (b % 64));
    }

    /// Atoms contained in the element, in increasing bit order.
    pub fn atoms(&self) -> impl Iterator<Item = IndexSet> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros();
                bits &= bits - 1;
                Some(IndexSet(w as u32 * 64 + t))
            })
        })
    }

    pub fn atom_count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_universe(&self) -> bool {
        self.complement().is_empty()
    }

    fn zip(&self, other: &AtomSet, op: impl Fn(u64, u64) -> u64) -> AtomSet {
        assert_eq!(self.n, other.n, "operands live in different algebras");
        AtomSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
        .normalize()
    }

    pub fn union(&self, other: &AtomSet) -> AtomSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn inter(&self, other: &AtomSet) -> AtomSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &AtomSet) -> AtomSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> AtomSet {
        AtomSet {
            n: self.n,
            words: self.words.iter().map(|w| !w).collect(),
        }
        .normalize()
    }

    pub fn is_disjoint(&self, other: &AtomSet) -> bool {
        self.inter(other).is_empty()
    }

    pub fn is_subset(&self, other: &AtomSet) -> bool {
        self.difference(other).is_empty()
    }

    /// Substitutes `~x_i` for every `x_i`, mapping atom `a_I` to `a_{[n]∖I}`.
    pub fn contradual(&self) -> AtomSet {
        let full = IndexSet::full(self.n);
        let mut out = AtomSet {
            n: self.n,
            words: vec![0; self.words.len()],
        };
        for atom in self.atoms() {
            out.insert(full.minus(atom));
        }
        out
    }

    pub fn dual(&self) -> AtomSet {
        self.contradual().complement()
    }

    pub fn transform(&self, kind: Transform) -> AtomSet {
        match kind {
            Transform::Complement => self.complement(),
            Transform::Dual => self.dual(),
            Transform::Contradual => self.contradual(),
        }
    }

    /// Whether the element avoids the unbounded atom `a_[n]`.
    pub fn in_c(&self) -> bool {
        !self.contains(IndexSet::full(self.n))
    }

    /// Restricts to the subalgebra generated by the variables in `free`,
    /// substituting `∅` for variables in `fixed_outside` and `X` for every
    /// other variable not in `free`. The result has `|free|` variables, the
    /// `k`-th smallest position of `free` becoming variable `k+1`.
    pub fn restrict(&self, free: IndexSet, fixed_outside: IndexSet) -> Result<AtomSet> {
        let free_positions: Vec<usize> = free.iter().collect();
        let base = fixed_outside.minus(free);
        AtomSet::from_fn(free_positions.len(), |local| {
            let global = local
                .iter()
                .fold(base.0, |acc, k| acc | 1 << free_positions[k]);
            self.contains(IndexSet(global))
        })
    }

    pub fn classify(&self) -> Classification {
        let in_l = !self.is_empty()
            && self.in_c()
            && self.atoms().all(|atom| {
                atom.iter()
                    .all(|p| self.contains(IndexSet(atom.0 & !(1 << p))))
            });
        Classification {
            in_c: self.in_c(),
            in_l,
            complex: in_l.then(|| self.atoms().collect()),
        }
    }

    /// Maximal faces of the simplicial complex `P_f`; `None` unless the
    /// element is a lattice element.
    pub fn facets(&self) -> Option<Vec<IndexSet>> {
        let class = self.classify();
        let complex = class.complex?;
        Some(
            complex
                .iter()
                .copied()
                .filter(|&face| {
                    (0..self.n)
                        .all(|p| face.contains(p) || !self.contains(IndexSet(face.0 | 1 << p)))
                })
                .collect(),
        )
    }

    pub fn reduced_euler(&self) -> i64 {
        let mut odd = 0i64;
        let mut even = 0i64;
        for (w, &word) in self.words.iter().enumerate() {
            let parity = if (w as u32).count_ones().is_multiple_of(2) {
                PARITY
            } else {
                !PARITY
            };
            odd += (word & parity).count_ones() as i64;
            even += (word & !parity).count_ones() as i64;
        }
        odd - even
    }

    /// Coefficients `m_{f,I}` of the decomposition `μ(f) = Σ_I m_{f,I} μ(u_I)`.
    pub fn coefficients(&self) -> Result<CoeffTable> {
        if !self.in_c() {
            return Err(Error::NotBounded);
        }
        // m_K = -(-1)^{|K|} Σ_{J⊆K, a_J⊆f} (-1)^{|J|}, a subset-sum transform.
        let size = 1usize << self.n;
        let mut acc = vec![0i64; size];
        for atom in self.atoms() {
            acc[atom.0 as usize] = if atom.len() % 2 == 0 { 1 } else { -1 };
        }
        for p in 0..self.n {
            for mask in 0..size {
                if mask >> p & 1 == 1 {
                    acc[mask] += acc[mask ^ (1 << p)];
                }
            }
        }
        for (mask, v) in acc.iter_mut().enumerate() {
            *v = if mask.count_ones() % 2 == 0 { -*v } else { *v };
        }
        acc[0] = 0;
        Ok(CoeffTable {
            n: self.n,
            values: acc,
        })
    }

    /// Bit string of the atoms, atom `a_∅` first.
    pub fn to_bit_string(&self) -> String {
        (0..1u32 << self.n)
            .map(|b| if self.contains(IndexSet(b)) { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Debug for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AtomSet(n={}, ", self.n)?;
        f.debug_set().entries(self.atoms()).finish()?;
        f.write_str(")")
    }
}

/// The three involutions of the algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Complement,
    Dual,
    Contradual,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// Buildable from `∪ ∩ ∖`: avoids `a_[n]`.
    pub in_c: bool,
    /// Buildable from `∪ ∩`: nonempty and downward closed.
    pub in_l: bool,
    /// The simplicial complex `P_f = {I : a_I ⊆ f}` when `in_l`.
    pub complex: Option<Vec<IndexSet>>,
}

/// Evaluates an expression to its canonical atom set in `B_n`.
pub fn eval_to_atoms(expr: &BoolExpr, n: usize) -> Result<AtomSet> {
    check_n(n)?;
    Ok(match expr {
        BoolExpr::Var(i) => {
            let i = *i;
            if i == 0 || i as usize > n {
                return Err(Error::VariableOutOfRange { index: i, n });
            }
            AtomSet::variable(n, i as usize - 1)?
        }
        BoolExpr::Universe => AtomSet::universe(n)?,
        BoolExpr::Empty => AtomSet::empty(n)?,
        BoolExpr::Union(a, b) => eval_to_atoms(a, n)?.union(&eval_to_atoms(b, n)?),
        BoolExpr::Inter(a, b) => eval_to_atoms(a, n)?.inter(&eval_to_atoms(b, n)?),
        BoolExpr::Diff(a, b) => eval_to_atoms(a, n)?.difference(&eval_to_atoms(b, n)?),
        BoolExpr::Compl(a) => eval_to_atoms(a, n)?.complement(),
    })
}

/// The integers `m_{f,I}` for nonempty `I ⊆ [n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffTable {
    n: usize,
    values: Vec<i64>,
}

impl CoeffTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, indices: IndexSet) -> i64 {
        self.values[indices.bits() as usize]
    }

    /// `(I, m_{f,I})` for every nonempty `I`, in increasing mask order.
    pub fn iter(&self) -> impl Iterator<Item = (IndexSet, i64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .map(|(mask, &v)| (IndexSet(mask as u32), v))
    }

    /// Entries with a nonzero coefficient.
    pub fn nonzero(&self) -> impl Iterator<Item = (IndexSet, i64)> + '_ {
        self.iter().filter(|&(_, v)| v != 0)
    }

    pub fn sum(&self) -> i64 {
        self.values.iter().sum()
    }
}

/// An additive function on `C_n`, given by its values on the bounded atoms
/// `a_I`, `I ⊊ [n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveFunction<T> {
    n: usize,
    atom_values: Vec<T>,
}

impl<T> AdditiveFunction<T>
where
    T: Copy + Add<Output = T> + Neg<Output = T> + std::iter::Sum<T>,
{
    /// `atom_values[b]` is the value on the atom at bit `b`; length `2^n - 1`.
    pub fn new(n: usize, atom_values: Vec<T>) -> Result<Self> {
        check_n(n)?;
        if atom_values.len() != (1 << n) - 1 {
            return Err(Error::Invalid(format!(
                "additive function on {n} variables needs {} atom values, got {}",
                (1 << n) - 1,
                atom_values.len()
            )));
        }
        Ok(AdditiveFunction { n, atom_values })
    }

    pub fn from_fn(n: usize, value: impl FnMut(IndexSet) -> T) -> Result<Self> {
        Self::new(n, (0..(1u32 << n) - 1).map(IndexSet).map(value).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Value on `a_[n]` under the 0-weight extension.
    pub fn top_value(&self) -> T {
        -self.atom_values.iter().copied().sum::<T>()
    }

    pub fn atom_value(&self, atom: IndexSet) -> T {
        if atom == IndexSet::full(self.n) {
            self.top_value()
        } else {
            self.atom_values[atom.bits() as usize]
        }
    }

    /// `μ(f)`. Elements outside `C_n` require the 0-weight extension.
    pub fn value(&self, f: &AtomSet, zero_weight: bool) -> Result<T> {
        if f.n() != self.n {
            return Err(Error::Invalid(format!(
                "element of B_{} evaluated by a function on B_{}",
                f.n(),
                self.n
            )));
        }
        if !f.in_c() && !zero_weight {
            return Err(Error::NotBounded);
        }
        Ok(f.atoms().map(|a| self.atom_value(a)).sum())
    }
}

/// `μ(f)` summed over the atoms of `f`.
pub fn additive_value<T>(f: &AtomSet, mu: &AdditiveFunction<T>, zero_weight: bool) -> Result<T>
where
    T: Copy + Add<Output = T> + Neg<Output = T> + std::iter::Sum<T>,
{
    mu.value(f, zero_weight)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn atoms_of(text: &str, n: usize) -> AtomSet {
        eval_to_atoms(&parse(text).unwrap(), n).unwrap()
    }

    fn set(indices: &[usize]) -> IndexSet {
        IndexSet::from_positions(indices.iter().map(|i| i - 1))
    }

    #[test]
    fn eval_examples() {
        let f = atoms_of("x1 & x2", 2);
        assert_eq!(f.atoms().collect::<Vec<_>>(), vec![IndexSet::EMPTY]);
        assert_eq!(atoms_of("X", 2).atom_count(), 4);
        let g = atoms_of("x1 | x2", 2);
        assert_eq!(
            g.atoms().collect::<Vec<_>>(),
            vec![IndexSet::EMPTY, set(&[1]), set(&[2])]
        );
        assert!(!g.contains(set(&[1, 2])));
    }

    #[test]
    fn eval_errors() {
        assert!(matches!(
            eval_to_atoms(&parse("x3").unwrap(), 2),
            Err(Error::VariableOutOfRange { index: 3, n: 2 })
        ));
        assert!(matches!(
            eval_to_atoms(&parse("x1").unwrap(), 0),
            Err(Error::VariableCount(0))
        ));
        assert!(matches!(
            eval_to_atoms(&parse("x1").unwrap(), 17),
            Err(Error::VariableCount(17))
        ));
    }

    #[test]
    fn variables_match_bitwise_definition_for_large_n() {
        for n in [1, 5, 6, 7, 9] {
            for p in 0..n {
                let v = AtomSet::variable(n, p).unwrap();
                let brute = AtomSet::from_fn(n, |atom| !atom.contains(p)).unwrap();
                assert_eq!(v, brute);
            }
        }
    }

    #[test]
    fn transforms() {
        let f = atoms_of("x1 & x2", 2);
        assert_eq!(f.dual(), atoms_of("x1 | x2", 2));
        let a1 = AtomSet::atom(2, set(&[1])).unwrap();
        assert_eq!(a1.contradual(), AtomSet::atom(2, set(&[2])).unwrap());
        assert_eq!(
            f.transform(Transform::Complement),
            atoms_of("~(x1 & x2)", 2)
        );
        assert_eq!(
            atoms_of("x1 \\ x2", 2).contradual(),
            atoms_of("~x1 \\ ~x2", 2)
        );
    }

    #[test]
    fn euler_examples() {
        assert_eq!(atoms_of("X", 4).reduced_euler(), 0);
        assert_eq!(atoms_of("x1 & x2 & x3", 3).reduced_euler(), -1);
        assert_eq!(atoms_of("x1 | x2", 2).reduced_euler(), 1);
        for n in 1..=9 {
            assert_eq!(AtomSet::universe(n).unwrap().reduced_euler(), 0);
            // the single atom a_[n]
            let top = AtomSet::atom(n, IndexSet::full(n)).unwrap();
            assert_eq!(top.reduced_euler(), if n % 2 == 0 { -1 } else { 1 });
        }
    }

    #[test]
    fn classify_examples() {
        let c = atoms_of("x1 | x2", 2).classify();
        assert!(c.in_c && c.in_l);
        let complex = c.complex.unwrap();
        assert_eq!(complex, vec![IndexSet::EMPTY, set(&[1]), set(&[2])]);
        // faces other than ∅ give the ordinary Euler characteristic
        let chi: i64 = complex
            .iter()
            .filter(|f| !f.is_empty())
            .map(|f| if f.len() % 2 == 1 { 1 } else { -1 })
            .sum();
        assert_eq!(chi - 1, atoms_of("x1 | x2", 2).reduced_euler());

        let d = atoms_of("x1 \\ x2", 2).classify();
        assert!(d.in_c && !d.in_l && d.complex.is_none());
        assert!(!atoms_of("~x1", 1).classify().in_c);
        assert!(!AtomSet::empty(3).unwrap().classify().in_l);
    }

    #[test]
    fn facets_of_lattice_elements() {
        let f = atoms_of("x1 | x2 & x3", 3);
        let mut facets = f.facets().unwrap();
        facets.sort();
        // P_f: faces I with a_I ⊆ f; maximal ones are {1} (x2∩x3 side) and {2,3} (x1 side)
        assert_eq!(facets, vec![set(&[1]), set(&[2, 3])]);
        assert!(atoms_of("x1 \\ x2", 2).facets().is_none());
    }

    #[test]
    fn coefficient_examples() {
        let inter = atoms_of("x1 & x2", 2).coefficients().unwrap();
        assert_eq!(inter.get(set(&[1])), 1);
        assert_eq!(inter.get(set(&[2])), 1);
        assert_eq!(inter.get(set(&[1, 2])), -1);

        let diff = atoms_of("x1 \\ x2", 2).coefficients().unwrap();
        assert_eq!(diff.get(set(&[1])), 0);
        assert_eq!(diff.get(set(&[2])), -1);
        assert_eq!(diff.get(set(&[1, 2])), 1);

        for n in 1..=5 {
            for i in 1..(1u32 << n) {
                let table = AtomSet::union_of(n, IndexSet(i))
                    .unwrap()
                    .coefficients()
                    .unwrap();
                for (j, m) in table.iter() {
                    assert_eq!(m, i64::from(j == IndexSet(i)));
                }
            }
        }
        assert!(matches!(
            atoms_of("~x1", 2).coefficients(),
            Err(Error::NotBounded)
        ));
    }

    #[test]
    fn restriction_substitutes_constants() {
        // (x1 ∪ x2) ∖ x3 with x3 -> ∅ leaves x1 ∪ x2
        let f = atoms_of("(x1 | x2) \\ x3", 3);
        let r = f.restrict(set(&[1, 2]), set(&[3])).unwrap();
        assert_eq!(r, atoms_of("x1 | x2", 2));
        // x2 -> X leaves X ∖ x3, a function of the second free variable
        let r = f.restrict(set(&[1, 3]), IndexSet::EMPTY).unwrap();
        assert_eq!(r, atoms_of("~x2", 2));
    }

    #[test]
    fn additive_values() {
        let mu = AdditiveFunction::from_fn(2, |a| a.bits() as i64 + 1).unwrap();
        assert_eq!(mu.value(&AtomSet::universe(2).unwrap(), true).unwrap(), 0);
        assert!(matches!(
            mu.value(&AtomSet::universe(2).unwrap(), false),
            Err(Error::NotBounded)
        ));
        let f = atoms_of("x1 | x2", 2);
        assert_eq!(mu.value(&f, false).unwrap(), 1 + 2 + 3);
        assert_eq!(mu.value(&f.complement(), true).unwrap(), -6);
        assert!(AdditiveFunction::new(2, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn subsets_enumeration() {
        let s = set(&[1, 3]);
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs, vec![IndexSet::EMPTY, set(&[1]), set(&[3]), s]);
        assert_eq!(IndexSet::EMPTY.subsets().count(), 1);
        assert_eq!(IndexSet::k_subsets(4, 2).count(), 6);
        assert_eq!(format!("{}", set(&[1, 3])), "{1,3}");
    }
}
