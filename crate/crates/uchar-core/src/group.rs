//! Finite group kernel: Cayley-table groups, subgroups, quotients and
//! conjugacy structure.
//!
//! Groups are immutable after construction and identified by `Arc`; element
//! ids are `0..order` with the identity always id 0. Derived structure
//! (conjugacy classes, the subgroup lattice, class multiplication constants)
//! is memoized behind `OnceLock`, so concurrent reads are safe.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use thiserror::Error;

/// Shared handle to an immutable group.
pub type Group = Arc<FiniteGroup>;

pub const DEFAULT_ORDER_CAP: usize = 4096;
pub const DEFAULT_SUBGROUP_ENUM_CAP: usize = 256;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("multiplication is not associative at ({x}, {y}, {z})")]
    NotAssociative { x: usize, y: usize, z: usize },
    #[error("element {x} has no inverse")]
    NoInverse { x: usize },
    #[error("row 0 and column 0 must be the identity row/column")]
    BadIdentity,
    #[error("table entry out of range at ({row}, {col})")]
    InvalidEntry { row: usize, col: usize },
    #[error("table is not square")]
    NotSquare,
    #[error("group of order {required} exceeds the configured cap {cap}")]
    SizeCapExceeded { required: usize, cap: usize },
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("group is not abelian")]
    NotAbelian,
    #[error("not a subgroup: {0}")]
    NotSubgroup(String),
}

/// Matrix-generator metadata for groups built from matrices over F_p.
#[derive(Debug, Clone)]
pub struct MatrixPresentation {
    pub dim: usize,
    pub prime: u32,
    /// Row-major dim x dim generator matrices.
    pub generators: Vec<Vec<u32>>,
}

/// Conjugacy classes: a partition of the element ids, classes sorted by
/// minimal member, together with the class index of every element.
#[derive(Debug, Clone)]
pub struct ConjClasses {
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<u32>,
}

#[derive(Default)]
struct Caches {
    classes: OnceLock<ConjClasses>,
    center: OnceLock<Arc<Vec<usize>>>,
    derived: OnceLock<Arc<Vec<usize>>>,
    subgroups: OnceLock<Arc<Vec<Arc<Vec<usize>>>>>,
    normal_subgroups: OnceLock<Arc<Vec<Arc<Vec<usize>>>>>,
    /// memoized multiplicative character lists, keyed by (members, conductor)
    mult_chars: OnceLock<Mutex<HashMap<(Vec<usize>, u32), Arc<Vec<crate::dual::MultChar>>>>>,
    /// For class functions: counts c(k1, k2, x) = #{(a,b) in C_{k1} x C_{k2} : ab = x},
    /// stored per (k1, k2) as counts against one representative per class.
    class_consts: OnceLock<Arc<Vec<Vec<u64>>>>,
}

pub struct FiniteGroup {
    order: usize,
    table: Vec<u16>,
    inv: Vec<u16>,
    elem_orders: Vec<u32>,
    exponent: u32,
    presentation: Option<MatrixPresentation>,
    caches: Caches,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(order={}, exponent={})", self.order, self.exponent)
    }
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Exponent: the lcm of all element orders.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub const IDENTITY: usize = 0;

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    #[inline]
    pub fn conj(&self, g: usize, x: usize) -> usize {
        // g x g^{-1}
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commutator(&self, a: usize, b: usize) -> usize {
        // a b a^{-1} b^{-1}
        self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))
    }

    pub fn elem_order(&self, a: usize) -> u32 {
        self.elem_orders[a]
    }

    pub fn pow(&self, a: usize, k: i64) -> usize {
        let k = k.rem_euclid(self.elem_orders[a] as i64) as u32;
        let mut acc = Self::IDENTITY;
        for _ in 0..k {
            acc = self.mul(acc, a);
        }
        acc
    }

    pub fn presentation(&self) -> Option<&MatrixPresentation> {
        self.presentation.as_ref()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order
    }

    pub fn is_abelian(&self) -> bool {
        for a in 0..self.order {
            for b in (a + 1)..self.order {
                if self.mul(a, b) != self.mul(b, a) {
                    return false;
                }
            }
        }
        true
    }

    /// Conjugacy classes (memoized). The identity class is first and classes
    /// are sorted by their minimal member.
    pub fn conjugacy_classes(&self) -> &ConjClasses {
        self.caches.classes.get_or_init(|| {
            let n = self.order;
            let mut class_of = vec![u32::MAX; n];
            let mut classes = Vec::new();
            for x in 0..n {
                if class_of[x] != u32::MAX {
                    continue;
                }
                let k = classes.len() as u32;
                let mut orbit = BTreeSet::new();
                for g in 0..n {
                    orbit.insert(self.conj(g, x));
                }
                let orbit: Vec<usize> = orbit.into_iter().collect();
                for &y in &orbit {
                    class_of[y] = k;
                }
                classes.push(orbit);
            }
            ConjClasses { classes, class_of }
        })
    }

    pub fn class_count(&self) -> usize {
        self.conjugacy_classes().classes.len()
    }

    fn center_members(&self) -> &Arc<Vec<usize>> {
        self.caches.center.get_or_init(|| {
            let members = self
                .elements()
                .filter(|&z| self.elements().all(|g| self.mul(z, g) == self.mul(g, z)))
                .collect();
            Arc::new(members)
        })
    }

    /// Class multiplication counts, memoized: entry [k1 * #classes + k2][k]
    /// counts pairs (a, b) with a in class k1, b in class k2 and a*b equal to
    /// the minimal representative of class k. Used by the class-sum fast
    /// convolution path.
    pub fn class_constants(&self) -> Arc<Vec<Vec<u64>>> {
        self.caches
            .class_consts
            .get_or_init(|| {
                let cc = self.conjugacy_classes();
                let k = cc.classes.len();
                let mut consts = vec![vec![0u64; k]; k * k];
                for (k1, c1) in cc.classes.iter().enumerate() {
                    for (k2, c2) in cc.classes.iter().enumerate() {
                        let row = &mut consts[k1 * k + k2];
                        for &a in c1 {
                            for &b in c2 {
                                let x = self.mul(a, b);
                                // count only products landing on the class rep;
                                // by invariance the count is the same at every
                                // member of the class
                                if x == cc.classes[cc.class_of[x] as usize][0] {
                                    row[cc.class_of[x] as usize] += 1;
                                }
                            }
                        }
                    }
                }
                Arc::new(consts)
            })
            .clone()
    }
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

fn finish_group(
    order: usize,
    table: Vec<u16>,
    presentation: Option<MatrixPresentation>,
) -> Result<FiniteGroup, GroupError> {
    let mut inv = vec![u16::MAX; order];
    for a in 0..order {
        for b in 0..order {
            if table[a * order + b] as usize == FiniteGroup::IDENTITY
                && table[b * order + a] as usize == FiniteGroup::IDENTITY
            {
                inv[a] = b as u16;
                break;
            }
        }
        if inv[a] == u16::MAX {
            return Err(GroupError::NoInverse { x: a });
        }
    }
    let mut elem_orders = vec![0u32; order];
    let mut exponent: u32 = 1;
    for a in 0..order {
        let mut x = a;
        let mut k = 1u32;
        while x != FiniteGroup::IDENTITY {
            x = table[x * order + a] as usize;
            k += 1;
        }
        elem_orders[a] = k;
        exponent = exponent.lcm(&k);
    }
    Ok(FiniteGroup {
        order,
        table,
        inv,
        elem_orders,
        exponent,
        presentation,
        caches: Caches::default(),
    })
}

/// Build and validate a group from a full Cayley table. The identity must be
/// element 0; all three group axioms are checked, and the first failing
/// triple is reported.
pub fn group_from_cayley(rows: &[Vec<usize>]) -> Result<Group, GroupError> {
    let order = rows.len();
    if order == 0 {
        return Err(GroupError::NotSquare);
    }
    let mut table = vec![0u16; order * order];
    for (i, row) in rows.iter().enumerate() {
        if row.len() != order {
            return Err(GroupError::NotSquare);
        }
        for (j, &v) in row.iter().enumerate() {
            if v >= order {
                return Err(GroupError::InvalidEntry { row: i, col: j });
            }
            table[i * order + j] = v as u16;
        }
    }
    for x in 0..order {
        if table[x] as usize != x || table[x * order] as usize != x {
            return Err(GroupError::BadIdentity);
        }
    }
    for x in 0..order {
        for y in 0..order {
            let xy = table[x * order + y] as usize;
            for z in 0..order {
                let yz = table[y * order + z] as usize;
                if table[xy * order + z] != table[x * order + yz] {
                    return Err(GroupError::NotAssociative { x, y, z });
                }
            }
        }
    }
    Ok(Arc::new(finish_group(order, table, None)?))
}

/// Build a group from a table that is associative by construction (matrix
/// closure, products, quotients, subgroups). Axioms are debug-asserted.
fn group_unchecked(
    order: usize,
    table: Vec<u16>,
    presentation: Option<MatrixPresentation>,
) -> Group {
    debug_assert!((0..order.min(24)).all(|x| {
        (0..order).all(|y| {
            let xy = table[x * order + y] as usize;
            (0..order).all(|z| {
                let yz = table[y * order + z] as usize;
                table[xy * order + z] == table[x * order + yz]
            })
        })
    }));
    Arc::new(finish_group(order, table, presentation).expect("structurally valid table"))
}

/// The group of upper unitriangular n x n matrices over F_p, order
/// p^(n(n-1)/2). Elements are ordered lexicographically by their
/// column-major strict-upper-triangle entry vector, so the identity is id 0.
pub fn ut(n: usize, p: u32) -> Result<Group, GroupError> {
    ut_with_cap(n, p, DEFAULT_ORDER_CAP)
}

pub fn ut_with_cap(n: usize, p: u32, cap: usize) -> Result<Group, GroupError> {
    assert!(n >= 2, "ut requires dimension >= 2");
    assert!(p >= 2, "ut requires a prime modulus");
    let m = n * (n - 1) / 2;
    let order = (p as usize)
        .checked_pow(m as u32)
        .filter(|&o| o <= cap)
        .ok_or(GroupError::SizeCapExceeded {
            required: (p as usize).saturating_pow(m as u32),
            cap,
        })?;
    // Strict upper-triangle positions in column-major order.
    let mut positions = Vec::with_capacity(m);
    for j in 0..n {
        for i in 0..j {
            positions.push((i, j));
        }
    }
    let decode = |id: usize| -> Vec<u32> {
        // first position is the most significant digit
        let mut mat = vec![0u32; n * n];
        for i in 0..n {
            mat[i * n + i] = 1;
        }
        let mut rest = id;
        for &(i, j) in positions.iter().rev() {
            mat[i * n + j] = (rest % p as usize) as u32;
            rest /= p as usize;
        }
        mat
    };
    let encode = |mat: &[u32]| -> usize {
        let mut id = 0usize;
        for &(i, j) in positions.iter() {
            id = id * p as usize + mat[i * n + j] as usize;
        }
        id
    };
    let matmul = |a: &[u32], b: &[u32]| -> Vec<u32> {
        let mut c = vec![0u32; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    c[i * n + j] = (c[i * n + j] + aik * b[k * n + j]) % p;
                }
            }
        }
        c
    };
    let mats: Vec<Vec<u32>> = (0..order).map(decode).collect();
    let mut table = vec![0u16; order * order];
    for a in 0..order {
        for b in 0..order {
            table[a * order + b] = encode(&matmul(&mats[a], &mats[b])) as u16;
        }
    }
    let mut generators = Vec::new();
    for i in 0..n - 1 {
        let mut g = vec![0u32; n * n];
        for d in 0..n {
            g[d * n + d] = 1;
        }
        g[i * n + i + 1] = 1;
        generators.push(g);
    }
    Ok(group_unchecked(
        order,
        table,
        Some(MatrixPresentation {
            dim: n,
            prime: p,
            generators,
        }),
    ))
}

/// Direct product of cyclic groups Z/d1 x Z/d2 x ...; the empty list gives
/// the trivial group. Ids are mixed-radix with the first factor most
/// significant.
pub fn abelian(invariants: &[u32]) -> Group {
    let order: usize = invariants.iter().map(|&d| d as usize).product::<usize>().max(1);
    let radices: Vec<usize> = invariants.iter().map(|&d| d as usize).collect();
    let decode = |id: usize| -> Vec<usize> {
        let mut digits = vec![0usize; radices.len()];
        let mut rest = id;
        for (slot, &d) in digits.iter_mut().zip(&radices).rev() {
            *slot = rest % d;
            rest /= d;
        }
        digits
    };
    let encode = |digits: &[usize]| -> usize {
        digits
            .iter()
            .zip(&radices)
            .fold(0usize, |acc, (&x, &d)| acc * d + x)
    };
    let mut table = vec![0u16; order * order];
    for a in 0..order {
        let da = decode(a);
        for b in 0..order {
            let db = decode(b);
            let sum: Vec<usize> = da
                .iter()
                .zip(&db)
                .zip(&radices)
                .map(|((&x, &y), &d)| (x + y) % d)
                .collect();
            table[a * order + b] = encode(&sum) as u16;
        }
    }
    group_unchecked(order, table, None)
}

pub fn cyclic(n: u32) -> Group {
    abelian(&[n])
}

/// Direct product; ids are mixed-radix over the factors with the first
/// factor most significant.
pub fn product(factors: &[Group]) -> Group {
    let order: usize = factors.iter().map(|g| g.order()).product::<usize>().max(1);
    let radices: Vec<usize> = factors.iter().map(|g| g.order()).collect();
    let decode = |id: usize| -> Vec<usize> {
        let mut digits = vec![0usize; radices.len()];
        let mut rest = id;
        for (slot, &d) in digits.iter_mut().zip(&radices).rev() {
            *slot = rest % d;
            rest /= d;
        }
        digits
    };
    let mut table = vec![0u16; order * order];
    for a in 0..order {
        let da = decode(a);
        for b in 0..order {
            let db = decode(b);
            let mut id = 0usize;
            for ((x, y), g) in da.iter().zip(&db).zip(factors) {
                id = id * g.order() + g.mul(*x, *y);
            }
            table[a * order + b] = id as u16;
        }
    }
    group_unchecked(order, table, None)
}

// ---------------------------------------------------------------------------
// Subgroups
// ---------------------------------------------------------------------------

/// A subgroup given by its sorted member list, with constant-time membership.
#[derive(Clone)]
pub struct Subgroup {
    parent: Group,
    members: Arc<Vec<usize>>,
    mask: Arc<Vec<bool>>,
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup(order={}, members={:?})", self.order(), self.members)
    }
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &other.parent) && self.members == other.members
    }
}
impl Eq for Subgroup {}

impl Subgroup {
    /// Validated constructor: the member set must contain the identity and
    /// be closed under multiplication and inverse.
    pub fn new(parent: Group, members: Vec<usize>) -> Result<Self, GroupError> {
        let mut members = members;
        members.sort_unstable();
        members.dedup();
        let mut mask = vec![false; parent.order()];
        for &m in &members {
            if m >= parent.order() {
                return Err(GroupError::NotSubgroup(format!("element {m} out of range")));
            }
            mask[m] = true;
        }
        if members.is_empty() || members[0] != FiniteGroup::IDENTITY {
            return Err(GroupError::NotSubgroup("missing identity".into()));
        }
        for &a in &members {
            if !mask[parent.inv(a)] {
                return Err(GroupError::NotSubgroup(format!("not closed under inverse at {a}")));
            }
            for &b in &members {
                if !mask[parent.mul(a, b)] {
                    return Err(GroupError::NotSubgroup(format!(
                        "not closed under product at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(Subgroup {
            parent,
            members: Arc::new(members),
            mask: Arc::new(mask),
        })
    }

    fn from_closed(parent: Group, members: Vec<usize>) -> Self {
        let mut mask = vec![false; parent.order()];
        for &m in &members {
            mask[m] = true;
        }
        Subgroup {
            parent,
            members: Arc::new(members),
            mask: Arc::new(mask),
        }
    }

    pub fn parent(&self) -> &Group {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn index(&self) -> usize {
        self.parent.order() / self.order()
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.mask[x]
    }

    /// Position of a parent id in the sorted member list.
    pub fn pos_of(&self, x: usize) -> Option<usize> {
        self.members.binary_search(&x).ok()
    }

    pub fn is_normal(&self) -> bool {
        self.parent
            .elements()
            .all(|g| self.members.iter().all(|&h| self.contains(self.parent.conj(g, h))))
    }

    pub fn is_full(&self) -> bool {
        self.order() == self.parent.order()
    }

    /// The conjugate subgroup g^{-1} H g.
    pub fn conjugate_by(&self, g: usize) -> Subgroup {
        let ginv = self.parent.inv(g);
        let mut members: Vec<usize> = self
            .members
            .iter()
            .map(|&h| self.parent.conj(ginv, h))
            .collect();
        members.sort_unstable();
        Subgroup::from_closed(self.parent.clone(), members)
    }

    pub fn intersect(&self, other: &Subgroup) -> Subgroup {
        let members: Vec<usize> = self
            .members
            .iter()
            .copied()
            .filter(|&x| other.contains(x))
            .collect();
        Subgroup::from_closed(self.parent.clone(), members)
    }

    /// This subgroup as a standalone group with local ids in member order,
    /// together with the id embedding.
    pub fn as_group(&self) -> Embedded {
        let k = self.order();
        let mut table = vec![0u16; k * k];
        for (i, &a) in self.members.iter().enumerate() {
            for (j, &b) in self.members.iter().enumerate() {
                let prod = self.parent.mul(a, b);
                table[i * k + j] = self.pos_of(prod).expect("closure") as u16;
            }
        }
        Embedded {
            group: group_unchecked(k, table, None),
            to_parent: Arc::clone(&self.members),
        }
    }
}

/// A subgroup realized as a standalone group plus the id embedding back into
/// the parent.
#[derive(Clone)]
pub struct Embedded {
    pub group: Group,
    /// local id -> parent id (sorted).
    pub to_parent: Arc<Vec<usize>>,
}

impl Embedded {
    pub fn to_local(&self, parent_id: usize) -> Option<usize> {
        self.to_parent.binary_search(&parent_id).ok()
    }
}

/// Smallest subgroup containing the given generators.
pub fn generated_subgroup(g: &Group, gens: &[usize]) -> Subgroup {
    let mut mask = vec![false; g.order()];
    let mut list = vec![FiniteGroup::IDENTITY];
    mask[FiniteGroup::IDENTITY] = true;
    let mut queue: Vec<usize> = Vec::new();
    for &x in gens {
        if !mask[x] {
            mask[x] = true;
            list.push(x);
            queue.push(x);
        }
    }
    while let Some(z) = queue.pop() {
        let snapshot: Vec<usize> = list.clone();
        for a in snapshot {
            for prod in [g.mul(a, z), g.mul(z, a)] {
                if !mask[prod] {
                    mask[prod] = true;
                    list.push(prod);
                    queue.push(prod);
                }
            }
        }
    }
    list.sort_unstable();
    Subgroup::from_closed(g.clone(), list)
}

pub fn trivial_subgroup(g: &Group) -> Subgroup {
    Subgroup::from_closed(g.clone(), vec![FiniteGroup::IDENTITY])
}

pub fn full_subgroup(g: &Group) -> Subgroup {
    Subgroup::from_closed(g.clone(), g.elements().collect())
}

pub fn center(g: &Group) -> Subgroup {
    let members = g.center_members().as_ref().clone();
    Subgroup::from_closed(g.clone(), members)
}

/// Subgroup generated by all commutators [s1, s2] with s1 in S1, s2 in S2.
pub fn commutator_subgroup(g: &Group, s1: &Subgroup, s2: &Subgroup) -> Subgroup {
    let mut gens = BTreeSet::new();
    for &a in s1.members() {
        for &b in s2.members() {
            gens.insert(g.commutator(a, b));
        }
    }
    let gens: Vec<usize> = gens.into_iter().collect();
    generated_subgroup(g, &gens)
}

/// Derived subgroup [G, G], memoized.
pub fn derived_subgroup(g: &Group) -> Subgroup {
    let members = g
        .caches
        .derived
        .get_or_init(|| {
            let full = full_subgroup(g);
            Arc::new(commutator_subgroup(g, &full, &full).members().to_vec())
        })
        .as_ref()
        .clone();
    Subgroup::from_closed(g.clone(), members)
}

/// Normalizer of an arbitrary element set: all g with g S g^{-1} = S.
pub fn normalizer_of_set(g: &Group, set: &[usize]) -> Subgroup {
    let mut mask = vec![false; g.order()];
    for &s in set {
        mask[s] = true;
    }
    let members: Vec<usize> = g
        .elements()
        .filter(|&x| set.iter().all(|&s| mask[g.conj(x, s)]))
        .collect();
    Subgroup::from_closed(g.clone(), members)
}

// ---------------------------------------------------------------------------
// Quotients
// ---------------------------------------------------------------------------

/// A quotient G/N: projection, a section picking the minimal representative
/// of each coset, and the quotient group itself (coset of the identity is
/// id 0).
#[derive(Clone)]
pub struct QuotientMap {
    pub source: Group,
    pub normal: Subgroup,
    pub quotient: Group,
    /// element id -> coset id
    pub proj: Vec<usize>,
    /// coset id -> minimal representative element id
    pub section: Vec<usize>,
}

pub fn quotient(g: &Group, n: &Subgroup) -> Result<QuotientMap, GroupError> {
    if !n.is_normal() {
        return Err(GroupError::NotNormal);
    }
    let order = g.order();
    let mut proj = vec![usize::MAX; order];
    let mut section = Vec::new();
    for x in 0..order {
        if proj[x] != usize::MAX {
            continue;
        }
        let k = section.len();
        section.push(x);
        for &h in n.members() {
            proj[g.mul(x, h)] = k;
        }
    }
    let q_order = section.len();
    debug_assert_eq!(q_order * n.order(), order);
    let mut table = vec![0u16; q_order * q_order];
    for a in 0..q_order {
        for b in 0..q_order {
            table[a * q_order + b] = proj[g.mul(section[a], section[b])] as u16;
        }
    }
    let quotient = group_unchecked(q_order, table, None);
    debug_assert!((0..order).all(|x| {
        (0..order).all(|y| proj[g.mul(x, y)] == quotient.mul(proj[x], proj[y]))
    }));
    Ok(QuotientMap {
        source: g.clone(),
        normal: n.clone(),
        quotient,
        proj,
        section,
    })
}

// ---------------------------------------------------------------------------
// Nilpotency
// ---------------------------------------------------------------------------

/// Length of the ascending central series if it reaches G.
pub fn nilpotency_class(g: &Group) -> Option<u32> {
    if g.order() == 1 {
        return Some(0);
    }
    let mut z = trivial_subgroup(g);
    let mut class = 0u32;
    loop {
        let q = quotient(g, &z).expect("central series members are normal");
        let zq = center(&q.quotient);
        let lifted: Vec<usize> = g
            .elements()
            .filter(|&x| zq.contains(q.proj[x]))
            .collect();
        if lifted.len() == z.order() {
            return None; // series stalled below G
        }
        class += 1;
        z = Subgroup::from_closed(g.clone(), lifted);
        if z.is_full() {
            return Some(class);
        }
    }
}

pub fn is_nilpotent(g: &Group) -> bool {
    nilpotency_class(g).is_some()
}

// ---------------------------------------------------------------------------
// Subgroup enumeration
// ---------------------------------------------------------------------------

/// Every subgroup, built by closing cyclic subgroups and extending
/// layer-by-layer; deduplicated and sorted by (order, member list).
pub fn all_subgroups(g: &Group) -> Result<Vec<Subgroup>, GroupError> {
    all_subgroups_with_cap(g, DEFAULT_SUBGROUP_ENUM_CAP)
}

pub fn all_subgroups_with_cap(g: &Group, cap: usize) -> Result<Vec<Subgroup>, GroupError> {
    if g.order() > cap {
        return Err(GroupError::SizeCapExceeded {
            required: g.order(),
            cap,
        });
    }
    let lists = g.caches.subgroups.get_or_init(|| {
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue: Vec<Vec<usize>> = Vec::new();
        let trivial = vec![FiniteGroup::IDENTITY];
        seen.insert(trivial.clone());
        queue.push(trivial);
        for x in g.elements() {
            let cyc = generated_subgroup(g, &[x]).members().to_vec();
            if seen.insert(cyc.clone()) {
                queue.push(cyc);
            }
        }
        while let Some(s) = queue.pop() {
            if s.len() == g.order() {
                continue;
            }
            let mut gens = s.clone();
            for x in g.elements() {
                if s.binary_search(&x).is_ok() {
                    continue;
                }
                gens.push(x);
                let bigger = generated_subgroup(g, &gens).members().to_vec();
                gens.pop();
                if seen.insert(bigger.clone()) {
                    queue.push(bigger);
                }
            }
        }
        let mut lists: Vec<Arc<Vec<usize>>> = seen.into_iter().map(Arc::new).collect();
        lists.sort_by(|a, b| (a.len(), a.as_slice()).cmp(&(b.len(), b.as_slice())));
        Arc::new(lists)
    });
    Ok(lists
        .iter()
        .map(|m| {
            let mut mask = vec![false; g.order()];
            for &x in m.iter() {
                mask[x] = true;
            }
            Subgroup {
                parent: g.clone(),
                members: Arc::clone(m),
                mask: Arc::new(mask),
            }
        })
        .collect())
}

/// All normal subgroups, in the same ordering as [`all_subgroups`].
pub fn normal_subgroups(g: &Group, cap: usize) -> Result<Vec<Subgroup>, GroupError> {
    let all = all_subgroups_with_cap(g, cap)?;
    let lists = g.caches.normal_subgroups.get_or_init(|| {
        Arc::new(
            all.iter()
                .filter(|s| s.is_normal())
                .map(|s| Arc::new(s.members().to_vec()))
                .collect(),
        )
    });
    Ok(lists
        .iter()
        .map(|m| {
            let mut mask = vec![false; g.order()];
            for &x in m.iter() {
                mask[x] = true;
            }
            Subgroup {
                parent: g.clone(),
                members: Arc::clone(m),
                mask: Arc::new(mask),
            }
        })
        .collect())
}

/// Shared memo table for multiplicative character lists (see
/// [`crate::dual::mult_chars`]).
pub(crate) fn mult_char_memo(
    g: &Group,
    key: (Vec<usize>, u32),
    build: impl FnOnce() -> Vec<crate::dual::MultChar>,
) -> Arc<Vec<crate::dual::MultChar>> {
    let memo = g.caches.mult_chars.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = memo.lock().unwrap().get(&key) {
        return Arc::clone(hit);
    }
    let built = Arc::new(build());
    memo.lock()
        .unwrap()
        .entry(key)
        .or_insert(built)
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c2_from_cayley() {
        let g = group_from_cayley(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.exponent(), 2);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn c4_from_cayley() {
        let g = group_from_cayley(&[
            vec![0, 1, 2, 3],
            vec![1, 2, 3, 0],
            vec![2, 3, 0, 1],
            vec![3, 0, 1, 2],
        ])
        .unwrap();
        assert_eq!(g.exponent(), 4);
        assert_eq!(g.conjugacy_classes().classes.len(), 4);
    }

    #[test]
    fn rejects_non_associative_table() {
        // 6x6 latin square with identity row/column but a non-associative triple
        let rows = vec![
            vec![0, 1, 2, 3, 4, 5],
            vec![1, 0, 3, 4, 5, 2],
            vec![2, 5, 0, 1, 3, 4],
            vec![3, 4, 5, 0, 2, 1],
            vec![4, 2, 1, 5, 0, 3],
            vec![5, 3, 4, 2, 1, 0],
        ];
        match group_from_cayley(&rows) {
            Err(GroupError::NotAssociative { .. }) => {}
            other => panic!("expected NotAssociative, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_identity() {
        let rows = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(group_from_cayley(&rows).err(), Some(GroupError::BadIdentity));
    }

    #[test]
    fn ut_orders() {
        assert_eq!(ut(3, 2).unwrap().order(), 8);
        assert_eq!(ut(3, 3).unwrap().order(), 27);
        assert_eq!(ut(4, 2).unwrap().order(), 64);
        assert!(matches!(
            ut_with_cap(5, 3, 4096),
            Err(GroupError::SizeCapExceeded { .. })
        ));
    }

    #[test]
    fn ut32_structure() {
        let g = ut(3, 2).unwrap();
        assert_eq!(g.conjugacy_classes().classes.len(), 5);
        assert_eq!(center(&g).order(), 2);
        assert_eq!(derived_subgroup(&g).order(), 2);
        assert_eq!(derived_subgroup(&g).members(), center(&g).members());
        assert_eq!(nilpotency_class(&g), Some(2));
    }

    #[test]
    fn ut33_structure() {
        let g = ut(3, 3).unwrap();
        assert_eq!(g.conjugacy_classes().classes.len(), 11);
        assert_eq!(center(&g).order(), 3);
        assert_eq!(g.exponent(), 3);
    }

    #[test]
    fn abelian_classes_are_singletons() {
        let g = abelian(&[4]);
        let cc = g.conjugacy_classes();
        assert_eq!(cc.classes.len(), 4);
        assert!(cc.classes.iter().all(|c| c.len() == 1));
        assert!(center(&abelian(&[4, 2])).is_full());
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(all_subgroups(&abelian(&[4])).unwrap().len(), 3);
        assert_eq!(all_subgroups(&abelian(&[2, 2])).unwrap().len(), 5);
        // UT(3,2) is dihedral of order 8: 10 subgroups
        assert_eq!(all_subgroups(&ut(3, 2).unwrap()).unwrap().len(), 10);
    }

    #[test]
    fn subgroup_lattice_is_lagrangian() {
        let g = ut(3, 2).unwrap();
        for s in all_subgroups(&g).unwrap() {
            assert_eq!(g.order() % s.order(), 0);
            Subgroup::new(g.clone(), s.members().to_vec()).expect("closure");
        }
    }

    #[test]
    fn quotient_of_ut32_by_center() {
        let g = ut(3, 2).unwrap();
        let q = quotient(&g, &center(&g)).unwrap();
        assert_eq!(q.quotient.order(), 4);
        assert!(q.quotient.is_abelian());
        for k in 0..q.quotient.order() {
            assert_eq!(q.proj[q.section[k]], k);
        }
        let bad = generated_subgroup(&g, &[g.elements().find(|&x| !center(&g).contains(x) && g.elem_order(x) == 2).unwrap()]);
        if !bad.is_normal() {
            assert_eq!(quotient(&g, &bad).err(), Some(GroupError::NotNormal));
        }
    }

    #[test]
    fn element_orders_divide_exponent() {
        for g in [ut(3, 2).unwrap(), ut(3, 3).unwrap(), abelian(&[4, 2])] {
            for x in g.elements() {
                assert_eq!(g.exponent() % g.elem_order(x), 0);
            }
            assert_eq!(g.order() % g.exponent() as usize, 0);
        }
    }

    #[test]
    fn embedded_subgroup_roundtrip() {
        let g = ut(3, 2).unwrap();
        let subs = all_subgroups(&g).unwrap();
        let v = subs.iter().find(|s| s.order() == 4).unwrap();
        let emb = v.as_group();
        assert_eq!(emb.group.order(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let parent = g.mul(emb.to_parent[i], emb.to_parent[j]);
                assert_eq!(emb.to_parent[emb.group.mul(i, j)], parent);
            }
        }
    }

    #[test]
    fn ut_is_nilpotent() {
        for g in [ut(3, 2).unwrap(), ut(3, 3).unwrap(), ut(4, 2).unwrap()] {
            assert!(is_nilpotent(&g));
        }
    }
}
