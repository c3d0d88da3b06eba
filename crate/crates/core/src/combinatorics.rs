//! Equivalence relations over t-tuples of n-bit strings.
//!
//! Two tuples are *permutations* of each other when their multisets agree,
//! and *stabilizations* of each other when every string occurs an even
//! number of times in their concatenation (equivalently, their Odd sets
//! agree). The permutation relation refines the stabilization relation;
//! pairs related by the latter but not the former are *remote
//! stabilizations*. This module provides the predicates, the class
//! enumeration with sizes and sentinels, and the counting helpers shared by
//! the moment-matrix and spectral code.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};

/// Enumeration over ({0,1}^n)^t is limited to t·n ≤ 16.
pub const MAX_ENUM_BITS: u32 = 16;

/// A tuple (x_1, ..., x_t) of n-bit strings. Its integer encoding places x_1
/// in the most significant position, so integer order is the lexicographic
/// order of the concatenated bit string.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TupleIndex {
    n: u32,
    entries: Vec<u64>,
}

impl TupleIndex {
    pub fn new(n: u32, entries: Vec<u64>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidParameters(format!("string length {n}")));
        }
        if entries.is_empty() {
            return Err(Error::InvalidParameters("empty tuple".into()));
        }
        if let Some(&e) = entries.iter().find(|&&e| e >> n != 0) {
            return Err(Error::OutOfRange { value: e, width: n });
        }
        Ok(Self { n, entries })
    }

    /// Parses strings such as `["101", "111"]`, most significant bit first.
    pub fn from_bit_strings(strings: &[&str]) -> Result<Self> {
        let n = strings.first().map_or(0, |s| s.len()) as u32;
        let entries = strings
            .iter()
            .map(|s| {
                if s.len() as u32 != n {
                    return Err(Error::InvalidParameters(format!("ragged bit string {s}")));
                }
                u64::from_str_radix(s, 2).map_err(|e| Error::InvalidParameters(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, entries)
    }

    pub fn decode(t: u32, n: u32, index: u64) -> Self {
        Self { n, entries: decode_entries(t, n, index) }
    }

    pub fn t(&self) -> u32 {
        self.entries.len() as u32
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn encode(&self) -> u64 {
        encode_entries(self.n, &self.entries)
    }
}

pub(crate) fn decode_entries(t: u32, n: u32, index: u64) -> Vec<u64> {
    let mask = (1u64 << n) - 1;
    (0..t).map(|i| (index >> ((t - 1 - i) * n)) & mask).collect()
}

pub(crate) fn encode_entries(n: u32, entries: &[u64]) -> u64 {
    entries.iter().fold(0, |acc, &e| (acc << n) | e)
}

/// Multiplicity map of a tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Histogram(pub BTreeMap<u64, u32>);

impl Histogram {
    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }
}

/// Strings occurring an odd number of times, sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OddSet(pub Vec<u64>);

pub fn histogram(x: &TupleIndex) -> Histogram {
    histogram_of(&x.entries)
}

fn histogram_of(entries: &[u64]) -> Histogram {
    let mut counts = BTreeMap::new();
    for &e in entries {
        *counts.entry(e).or_insert(0) += 1;
    }
    Histogram(counts)
}

pub fn odd_set(x: &TupleIndex) -> OddSet {
    odd_set_of(&x.entries)
}

fn odd_set_of(entries: &[u64]) -> OddSet {
    let h = histogram_of(entries);
    OddSet(h.0.into_iter().filter(|&(_, m)| m % 2 == 1).map(|(s, _)| s).collect())
}

fn check_same_shape(x: &TupleIndex, y: &TupleIndex) {
    assert!(
        x.n == y.n && x.entries.len() == y.entries.len(),
        "tuples of different shape compared"
    );
}

pub fn is_permutation_pair(x: &TupleIndex, y: &TupleIndex) -> bool {
    check_same_shape(x, y);
    histogram(x) == histogram(y)
}

/// Every string appears an even number of times in (x ‖ y).
pub fn is_stabilization_pair(x: &TupleIndex, y: &TupleIndex) -> bool {
    check_same_shape(x, y);
    let mut parity: HashMap<u64, bool> = HashMap::new();
    for &s in x.entries.iter().chain(&y.entries) {
        *parity.entry(s).or_insert(false) ^= true;
    }
    parity.values().all(|&odd| !odd)
}

pub fn is_remote_stabilization_pair(x: &TupleIndex, y: &TupleIndex) -> bool {
    is_stabilization_pair(x, y) && !is_permutation_pair(x, y)
}

/// t! / Π m_s! for the multiplicities of `h`, or `None` on u128 overflow.
pub fn permutation_class_size(h: &Histogram) -> Option<u128> {
    let mut size: u128 = 1;
    let mut placed: u128 = 0;
    for &m in h.0.values() {
        // Multiply by C(placed + m, m) one factor at a time; each partial
        // quotient is itself a binomial coefficient, so the division is exact.
        for i in 1..=m as u128 {
            size = size.checked_mul(placed + i)? / i;
        }
        placed += m as u128;
    }
    Some(size)
}

/// C(top, k) in arbitrary precision.
pub fn binomial(top: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *top {
        return BigUint::ZERO;
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (top - BigUint::from(i)) / BigUint::from(i + 1);
    }
    acc
}

/// C(2^n + t − 1, t): the number of multisets of size t over {0,1}^n.
pub fn multichoose_count(t: u32, n: u32) -> BigUint {
    binomial(&((BigUint::one() << n) + BigUint::from(t) - BigUint::one()), t as u64)
}

/// C(2^n, t): the number of permutation classes with t distinct entries.
pub fn distinct_class_count(t: u32, n: u32) -> BigUint {
    binomial(&(BigUint::one() << n), t as u64)
}

pub(crate) fn check_enumerable(t: u32, n: u32) -> Result<()> {
    if t == 0 || n == 0 {
        return Err(Error::InvalidParameters(format!("t = {t}, n = {n} must both be positive")));
    }
    if t as u64 * n as u64 > MAX_ENUM_BITS as u64 {
        return Err(Error::InstanceTooLarge(format!(
            "t·n = {} exceeds {MAX_ENUM_BITS}",
            t as u64 * n as u64
        )));
    }
    Ok(())
}

/// One permutation class: all orderings of a multiset.
#[derive(Clone, Debug)]
pub struct PermClass {
    /// The multiset, sorted ascending.
    pub multiset: Vec<u64>,
    /// Member tuple indices, ascending; the last one is the sentinel.
    pub members: Vec<u64>,
    /// Id of the enclosing stabilization class.
    pub stab: usize,
}

impl PermClass {
    pub fn size(&self) -> u64 {
        self.members.len() as u64
    }

    pub fn sentinel(&self) -> u64 {
        *self.members.last().expect("classes are nonempty")
    }

    pub fn is_all_distinct(&self) -> bool {
        self.multiset.windows(2).all(|w| w[0] != w[1])
    }
}

/// One stabilization class: all tuples sharing an Odd set.
#[derive(Clone, Debug)]
pub struct StabClass {
    pub odd: OddSet,
    /// Member permutation classes in order of their smallest member.
    pub perms: Vec<usize>,
    pub size: u64,
    pub sentinel: u64,
}

impl StabClass {
    /// A trivial class consists of a single permutation class.
    pub fn is_trivial(&self) -> bool {
        self.perms.len() == 1
    }
}

/// Both partitions of ({0,1}^n)^t, with the class of every tuple.
#[derive(Clone, Debug)]
pub struct ClassStructure {
    t: u32,
    n: u32,
    perm_of: Vec<u32>,
    perms: Vec<PermClass>,
    stabs: Vec<StabClass>,
}

impl ClassStructure {
    pub fn build(t: u32, n: u32) -> Result<Self> {
        check_enumerable(t, n)?;
        let dim = 1u64 << (t * n);
        let mut perm_ids: HashMap<Vec<u64>, u32> = HashMap::new();
        let mut perms: Vec<PermClass> = Vec::new();
        let mut perm_of = Vec::with_capacity(dim as usize);
        for idx in 0..dim {
            let mut key = decode_entries(t, n, idx);
            key.sort_unstable();
            let id = *perm_ids.entry(key).or_insert_with_key(|k| {
                perms.push(PermClass { multiset: k.clone(), members: Vec::new(), stab: 0 });
                (perms.len() - 1) as u32
            });
            perms[id as usize].members.push(idx);
            perm_of.push(id);
        }

        let mut stab_ids: HashMap<OddSet, usize> = HashMap::new();
        let mut stabs: Vec<StabClass> = Vec::new();
        for (pid, p) in perms.iter_mut().enumerate() {
            let odd = odd_set_of(&p.multiset);
            let sid = *stab_ids.entry(odd).or_insert_with_key(|o| {
                stabs.push(StabClass { odd: o.clone(), perms: Vec::new(), size: 0, sentinel: 0 });
                stabs.len() - 1
            });
            p.stab = sid;
            let s = &mut stabs[sid];
            s.perms.push(pid);
            s.size += p.members.len() as u64;
            s.sentinel = s.sentinel.max(p.sentinel());
        }
        Ok(Self { t, n, perm_of, perms, stabs })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.perm_of.len()
    }

    pub fn perm_classes(&self) -> &[PermClass] {
        &self.perms
    }

    pub fn stab_classes(&self) -> &[StabClass] {
        &self.stabs
    }

    pub fn perm_class_of(&self, index: u64) -> usize {
        self.perm_of[index as usize] as usize
    }

    pub fn stab_class_of(&self, index: u64) -> usize {
        self.perms[self.perm_class_of(index)].stab
    }

    /// The permutation class holding the sentinel of stabilization class `sid`.
    pub fn base_perm_class(&self, sid: usize) -> usize {
        self.perm_class_of(self.stabs[sid].sentinel)
    }

    /// Members of a stabilization class, ascending.
    pub fn stab_members(&self, sid: usize) -> Vec<u64> {
        let mut out: Vec<u64> = self.stabs[sid]
            .perms
            .iter()
            .flat_map(|&p| self.perms[p].members.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    fn perm_descriptor(&self, p: &PermClass) -> ClassDescriptor {
        ClassDescriptor {
            kind: ClassKind::Permutation,
            canonical: Canonical::Histogram(
                histogram_of(&p.multiset).0.into_iter().collect(),
            ),
            size: p.size(),
            sentinel: decode_entries(self.t, self.n, p.sentinel()),
            trivial: None,
            members: None,
        }
    }

    /// Zero rows of the binary-minus-complex difference matrix. A row is zero
    /// exactly when its tuple lies in a trivial stabilization class.
    pub fn zero_rows(&self) -> ZeroRows {
        let all_distinct = self.perms.iter().filter(|p| p.is_all_distinct()).map(PermClass::size).sum();
        let total = self.stabs.iter().filter(|s| s.is_trivial()).map(|s| s.size).sum();
        ZeroRows { all_distinct, total }
    }

    pub fn permutation_descriptors(&self) -> Vec<ClassDescriptor> {
        self.perms.iter().map(|p| self.perm_descriptor(p)).collect()
    }

    pub fn stabilization_descriptors(&self) -> Vec<ClassDescriptor> {
        self.stabs
            .iter()
            .map(|s| ClassDescriptor {
                kind: ClassKind::Stabilization,
                canonical: Canonical::OddSet(s.odd.0.clone()),
                size: s.size,
                sentinel: decode_entries(self.t, self.n, s.sentinel),
                trivial: Some(s.is_trivial()),
                members: Some(s.perms.iter().map(|&p| self.perm_descriptor(&self.perms[p])).collect()),
            })
            .collect()
    }
}

/// Zero-row counts of the difference matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroRows {
    /// Rows of tuples with t distinct strings; all of them are zero.
    pub all_distinct: u64,
    /// Every zero row, including the all-distinct ones.
    pub total: u64,
}

impl ZeroRows {
    pub fn extra(&self) -> u64 {
        self.total - self.all_distinct
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Permutation,
    Stabilization,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Canonical {
    /// `[string, multiplicity]` pairs, ascending by string.
    Histogram(Vec<(u64, u32)>),
    OddSet(Vec<u64>),
}

/// Serializable summary of one equivalence class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassDescriptor {
    pub kind: ClassKind,
    pub canonical: Canonical,
    pub size: u64,
    /// Lexicographically largest member, as its t entries.
    pub sentinel: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trivial: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<ClassDescriptor>>,
}

pub fn enumerate_permutation_classes(t: u32, n: u32) -> Result<Vec<ClassDescriptor>> {
    Ok(ClassStructure::build(t, n)?.permutation_descriptors())
}

pub fn enumerate_stabilization_classes(t: u32, n: u32) -> Result<Vec<ClassDescriptor>> {
    Ok(ClassStructure::build(t, n)?.stabilization_descriptors())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tup(s: &[&str]) -> TupleIndex {
        TupleIndex::from_bit_strings(s).unwrap()
    }

    fn all_tuples(t: u32, n: u32) -> Vec<TupleIndex> {
        (0..1u64 << (t * n)).map(|i| TupleIndex::decode(t, n, i)).collect()
    }

    #[test]
    fn encoding_is_most_significant_first() {
        let x = tup(&["01", "10"]);
        assert_eq!(x.encode(), 0b0110);
        assert_eq!(TupleIndex::decode(2, 2, 0b0110), x);
        assert!(TupleIndex::new(2, vec![4]).is_err());
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(histogram(&tup(&["00", "00"])).0, BTreeMap::from([(0, 2)]));
        assert_eq!(histogram(&tup(&["01", "00"])), histogram(&tup(&["00", "01"])));
        let x = tup(&["101", "111", "101", "000", "011", "111", "111"]);
        let h = histogram(&x);
        assert_eq!(h.0, BTreeMap::from([(0b101, 2), (0b111, 3), (0b000, 1), (0b011, 1)]));
        assert_eq!(h.total(), 7);
    }

    #[test]
    fn odd_set_examples() {
        let x = tup(&["101", "111", "101", "000", "011", "111", "111"]);
        assert_eq!(odd_set(&x), OddSet(vec![0b000, 0b011, 0b111]));
        assert_eq!(odd_set(&tup(&["00", "00"])), OddSet(vec![]));
        assert_eq!(odd_set(&tup(&["11", "00", "10"])), OddSet(vec![0, 2, 3]));
    }

    #[test]
    fn pair_predicate_examples() {
        assert!(is_permutation_pair(&tup(&["00", "01"]), &tup(&["01", "00"])));
        assert!(!is_permutation_pair(&tup(&["00", "00"]), &tup(&["01", "01"])));
        assert!(is_stabilization_pair(&tup(&["00", "00"]), &tup(&["01", "01"])));

        let x = tup(&["111", "000", "101", "101", "000"]);
        let y = tup(&["110", "111", "111", "111", "110"]);
        assert!(is_stabilization_pair(&x, &y));
        assert!(is_remote_stabilization_pair(&x, &y));
        assert!(!is_remote_stabilization_pair(&x, &x));
    }

    #[test]
    fn distinct_entries_have_no_remote_stabilizers() {
        for x in all_tuples(3, 2) {
            let mut e = x.entries().to_vec();
            e.sort_unstable();
            e.dedup();
            if e.len() == 3 {
                assert!(all_tuples(3, 2).iter().all(|y| !is_remote_stabilization_pair(&x, y)));
            }
        }
    }

    #[test]
    fn relations_exhaustive() {
        for (t, n) in [(1, 4), (2, 2), (2, 3), (3, 2), (2, 4), (3, 3), (4, 2), (6, 2)] {
            if t * n > 12 {
                continue;
            }
            let tuples = all_tuples(t, n);
            let odd: Vec<OddSet> = tuples.iter().map(odd_set).collect();
            for (i, x) in tuples.iter().enumerate() {
                assert!(is_stabilization_pair(x, x));
                for (j, y) in tuples.iter().enumerate() {
                    let stab = is_stabilization_pair(x, y);
                    assert_eq!(stab, odd[i] == odd[j]);
                    assert_eq!(stab, is_stabilization_pair(y, x));
                    if is_permutation_pair(x, y) {
                        assert!(stab);
                    }
                    assert_eq!(
                        is_remote_stabilization_pair(x, y),
                        is_remote_stabilization_pair(y, x)
                    );
                }
            }
        }
    }

    #[test]
    fn stabilization_is_transitive_and_remote_is_not() {
        let tuples = all_tuples(2, 2);
        let mut remote_nonempty = false;
        for x in &tuples {
            for y in &tuples {
                for z in &tuples {
                    if is_stabilization_pair(x, y) && is_stabilization_pair(y, z) {
                        assert!(is_stabilization_pair(x, z));
                    }
                }
                if is_remote_stabilization_pair(x, y) {
                    remote_nonempty = true;
                    // x ~ y ~ x would force x ~ x, which anti-reflexivity forbids.
                    assert!(!is_remote_stabilization_pair(x, x));
                }
            }
        }
        assert!(remote_nonempty);
    }

    #[test]
    fn class_size_formula() {
        let distinct = Histogram((0..5).map(|s| (s, 1)).collect());
        assert_eq!(permutation_class_size(&distinct), Some(120));
        let repeated = Histogram(BTreeMap::from([(3, 6)]));
        assert_eq!(permutation_class_size(&repeated), Some(1));
        // One pair and t − 2 distinct: C(t,2)·(t − 2)!.
        let t = 6u128;
        let pair = Histogram(BTreeMap::from([(0, 2), (1, 1), (2, 1), (3, 1), (4, 1)]));
        assert_eq!(permutation_class_size(&pair), Some(t * (t - 1) / 2 * 24));
        let big = Histogram((0..40).map(|s| (s, 1)).collect());
        assert_eq!(permutation_class_size(&big), None);
    }

    #[test]
    fn permutation_enumeration() {
        let classes = enumerate_permutation_classes(2, 2).unwrap();
        assert_eq!(classes.len(), 10);
        for (t, n) in [(1, 3), (2, 2), (3, 2), (2, 3), (3, 3), (4, 2), (2, 5)] {
            let s = ClassStructure::build(t, n).unwrap();
            let perms = s.perm_classes();
            assert_eq!(BigUint::from(perms.len()), multichoose_count(t, n));
            assert_eq!(perms.iter().map(PermClass::size).sum::<u64>(), 1 << (t * n));
            let distinct = perms.iter().filter(|p| p.is_all_distinct()).count();
            assert_eq!(BigUint::from(distinct), distinct_class_count(t, n));
            for p in perms {
                let h = histogram_of(&p.multiset);
                assert_eq!(permutation_class_size(&h), Some(p.size() as u128));
                assert_eq!(p.sentinel(), *p.members.iter().max().unwrap());
                if p.is_all_distinct() {
                    assert_eq!(p.size(), (1..=t as u64).product::<u64>());
                    assert!(s.stab_classes()[p.stab].is_trivial());
                }
                if h.0.len() == 1 {
                    assert_eq!(p.size(), 1);
                }
            }
        }
    }

    #[test]
    fn stabilization_enumeration() {
        let s = ClassStructure::build(2, 2).unwrap();
        let empty = s.stab_classes().iter().find(|c| c.odd.0.is_empty()).unwrap();
        assert_eq!(empty.perms.len(), 4);
        assert_eq!(empty.size, 4);
        assert_eq!(empty.sentinel, 0b1111);
        let total: u64 = s.stab_classes().iter().map(|c| c.size).sum();
        assert_eq!(total, 16);

        let d = enumerate_stabilization_classes(2, 2).unwrap();
        let json = serde_json::to_value(&d).unwrap();
        let first = &json[0];
        assert_eq!(first["kind"], "stabilization");
        assert!(first["members"].is_array());
        let perm_json = serde_json::to_value(&enumerate_permutation_classes(2, 2).unwrap()[0]).unwrap();
        assert_eq!(perm_json["canonical"], serde_json::json!([[0, 2]]));
        assert!(perm_json.get("members").is_none());
    }

    #[test]
    fn enumeration_is_bounded() {
        assert!(matches!(ClassStructure::build(3, 6), Err(Error::InstanceTooLarge(_))));
        assert!(ClassStructure::build(0, 2).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(&BigUint::from(5u32), 2), BigUint::from(10u32));
        assert_eq!(binomial(&BigUint::from(3u32), 5), BigUint::ZERO);
        assert_eq!(multichoose_count(3, 2), BigUint::from(20u32));
        assert_eq!(distinct_class_count(3, 2), BigUint::from(4u32));
    }
}
