//! The function algebra Fun(G) under convolution and its class-function
//! center: idempotents, induction of class functions, the Mackey condition
//! in convolution form, and Hecke subalgebras.
//!
//! Convolution follows (f * g)(x) = sum_y f(y) g(y^{-1} x); the delta
//! function at the identity is the unit. Induction uses the coset-sum
//! convention (extend by zero, sum the conjugates over G/G'), with the
//! classical Frobenius formula kept as a built-in cross-check.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::cyclo::CycloNumber;
use crate::dual::MultChar;
use crate::group::{Embedded, FiniteGroup, Group};

#[derive(Debug, Error)]
pub enum ConvError {
    #[error("functions live on different groups or have different conductors")]
    GroupMismatch,
    #[error("function is not supported on the given subgroup")]
    NotSubgroup,
    #[error("function is not constant on conjugacy class {class} (elements {a} and {b} differ)")]
    NotClassFunction { class: usize, a: usize, b: usize },
    #[error("character is not irreducible: <chi, chi> != 1")]
    NotIrreducible,
    #[error("function is not an idempotent: e * e != e")]
    NotIdempotent,
    #[error("idempotent does not match any character in the supplied list")]
    NotInList,
    #[error("character list is incomplete: sum of squared degrees misses the group order")]
    IncompleteCharacterList,
}

/// A function G -> Q(zeta_n), indexed by element id. The group exponent
/// always divides the conductor n.
#[derive(Clone)]
pub struct GFunction {
    group: Group,
    n: u32,
    values: Vec<CycloNumber>,
}

impl PartialEq for GFunction {
    fn eq(&self, other: &Self) -> bool {
        std::sync::Arc::ptr_eq(&self.group, &other.group)
            && self.n == other.n
            && self.values == other.values
    }
}
impl Eq for GFunction {}

impl std::fmt::Debug for GFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GFunction[")?;
        for (i, v) in self.values.iter().enumerate() {
            if !v.is_zero() {
                write!(f, " {i}:{v}")?;
            }
        }
        write!(f, " ]")
    }
}

impl GFunction {
    pub fn zero(group: &Group, n: u32) -> Self {
        assert_eq!(n % group.exponent(), 0, "group exponent must divide the conductor");
        GFunction {
            group: group.clone(),
            n,
            values: vec![CycloNumber::zero(n); group.order()],
        }
    }

    /// The delta function at x.
    pub fn delta(group: &Group, n: u32, x: usize) -> Self {
        let mut f = Self::zero(group, n);
        f.values[x] = CycloNumber::one(n);
        f
    }

    pub fn from_values(group: &Group, n: u32, values: Vec<CycloNumber>) -> Self {
        assert_eq!(values.len(), group.order());
        assert!(values.iter().all(|v| v.conductor() == n));
        assert_eq!(n % group.exponent(), 0);
        GFunction {
            group: group.clone(),
            n,
            values,
        }
    }

    /// The constant function 1.
    pub fn all_ones(group: &Group, n: u32) -> Self {
        let values = vec![CycloNumber::one(n); group.order()];
        Self::from_values(group, n, values)
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn value(&self, x: usize) -> &CycloNumber {
        &self.values[x]
    }

    pub fn values(&self) -> &[CycloNumber] {
        &self.values
    }

    pub fn set(&mut self, x: usize, v: CycloNumber) {
        assert_eq!(v.conductor(), self.n);
        self.values[x] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(CycloNumber::is_zero)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len())
            .filter(|&x| !self.values[x].is_zero())
            .collect()
    }

    fn same_home(&self, other: &Self) -> Result<(), ConvError> {
        if !std::sync::Arc::ptr_eq(&self.group, &other.group) || self.n != other.n {
            return Err(ConvError::GroupMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_home(other).expect("pointwise ops need one home group");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.add(b))
            .collect();
        GFunction {
            group: self.group.clone(),
            n: self.n,
            values,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.same_home(other).expect("pointwise ops need one home group");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.sub(b))
            .collect();
        GFunction {
            group: self.group.clone(),
            n: self.n,
            values,
        }
    }

    pub fn scalar_mul(&self, r: &BigRational) -> Self {
        GFunction {
            group: self.group.clone(),
            n: self.n,
            values: self.values.iter().map(|v| v.scalar_mul(r)).collect(),
        }
    }

    pub fn is_class_function(&self) -> bool {
        let cc = self.group.conjugacy_classes();
        cc.classes
            .iter()
            .all(|class| class.iter().all(|&x| self.values[x] == self.values[class[0]]))
    }
}

/// Convolution (f * g)(x) = sum_y f(y) g(y^{-1} x), computed over the
/// support product (identical to the defining double sum; zero terms are
/// skipped).
pub fn convolve(f: &GFunction, g: &GFunction) -> Result<GFunction, ConvError> {
    f.same_home(g)?;
    let gr = &f.group;
    let mut out = GFunction::zero(gr, f.n);
    for y in gr.elements() {
        let fy = &f.values[y];
        if fy.is_zero() {
            continue;
        }
        for z in gr.elements() {
            let gz = &g.values[z];
            if gz.is_zero() {
                continue;
            }
            let x = gr.mul(y, z);
            out.values[x] = out.values[x].add(&fy.mul(gz));
        }
    }
    Ok(out)
}

/// Fast convolution of two class functions via class multiplication
/// constants; agrees exactly with [`convolve`].
pub fn convolve_class(f: &ClassFunction, g: &ClassFunction) -> Result<ClassFunction, ConvError> {
    f.0.same_home(&g.0)?;
    let gr = f.0.group.clone();
    let cc = gr.conjugacy_classes();
    let k = cc.classes.len();
    let consts = gr.class_constants();
    let mut class_vals = vec![CycloNumber::zero(f.0.n); k];
    for k1 in 0..k {
        let fv = &f.0.values[cc.classes[k1][0]];
        if fv.is_zero() {
            continue;
        }
        for k2 in 0..k {
            let gv = &g.0.values[cc.classes[k2][0]];
            if gv.is_zero() {
                continue;
            }
            let prod = fv.mul(gv);
            for (k3, &count) in consts[k1 * k + k2].iter().enumerate() {
                if count != 0 {
                    let scaled = prod.scalar_mul(&BigRational::from_integer(BigInt::from(count)));
                    class_vals[k3] = class_vals[k3].add(&scaled);
                }
            }
        }
    }
    let mut out = GFunction::zero(&gr, f.0.n);
    for x in gr.elements() {
        out.values[x] = class_vals[cc.class_of[x] as usize].clone();
    }
    Ok(ClassFunction(out))
}

/// f^gamma(x) = f(gamma^{-1} x gamma). Preserves convolution:
/// (f * g)^gamma = f^gamma * g^gamma.
pub fn conj_translate(f: &GFunction, gamma: usize) -> GFunction {
    let gr = &f.group;
    let ginv = gr.inv(gamma);
    let values = gr
        .elements()
        .map(|x| f.values[gr.conj(ginv, x)].clone())
        .collect();
    GFunction {
        group: gr.clone(),
        n: f.n,
        values,
    }
}

/// Extension by zero of a function on an embedded subgroup.
pub fn extend_by_zero(f: &GFunction, emb: &Embedded, parent: &Group) -> Result<GFunction, ConvError> {
    if !std::sync::Arc::ptr_eq(&f.group, &emb.group) {
        return Err(ConvError::NotSubgroup);
    }
    let mut out = GFunction::zero(parent, f.n);
    for (local, &pid) in emb.to_parent.iter().enumerate() {
        if pid >= parent.order() {
            return Err(ConvError::NotSubgroup);
        }
        out.values[pid] = f.values[local].clone();
    }
    Ok(out)
}

/// Restriction to an embedded subgroup.
pub fn restrict(f: &GFunction, emb: &Embedded) -> GFunction {
    let values = emb
        .to_parent
        .iter()
        .map(|&pid| f.values[pid].clone())
        .collect();
    GFunction {
        group: emb.group.clone(),
        n: f.n,
        values,
    }
}

/// A validated conjugation-invariant function.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassFunction(GFunction);

impl ClassFunction {
    pub fn new(f: GFunction) -> Result<Self, ConvError> {
        let cc = f.group.conjugacy_classes();
        for (k, class) in cc.classes.iter().enumerate() {
            for &x in class {
                if f.values[x] != f.values[class[0]] {
                    return Err(ConvError::NotClassFunction {
                        class: k,
                        a: class[0],
                        b: x,
                    });
                }
            }
        }
        Ok(ClassFunction(f))
    }

    pub fn zero(group: &Group, n: u32) -> Self {
        ClassFunction(GFunction::zero(group, n))
    }

    pub fn delta_identity(group: &Group, n: u32) -> Self {
        ClassFunction(GFunction::delta(group, n, FiniteGroup::IDENTITY))
    }

    pub fn as_gfunction(&self) -> &GFunction {
        &self.0
    }

    pub fn into_gfunction(self) -> GFunction {
        self.0
    }

    /// Degree: the value at the identity.
    pub fn degree(&self) -> &CycloNumber {
        self.0.value(FiniteGroup::IDENTITY)
    }

    pub fn add(&self, other: &Self) -> Self {
        ClassFunction(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &Self) -> Self {
        ClassFunction(self.0.sub(&other.0))
    }

    pub fn scalar_mul(&self, r: &BigRational) -> Self {
        ClassFunction(self.0.scalar_mul(r))
    }

    /// Values at one representative per conjugacy class, in class order.
    pub fn class_values(&self) -> Vec<CycloNumber> {
        let cc = self.0.group.conjugacy_classes();
        cc.classes
            .iter()
            .map(|c| self.0.values[c[0]].clone())
            .collect()
    }
}

impl std::ops::Deref for ClassFunction {
    type Target = GFunction;
    fn deref(&self) -> &GFunction {
        &self.0
    }
}

/// A multiplicative character as a function on the parent group, extended by
/// zero outside its domain, with values in the n-th roots of unity.
pub fn char_function(chi: &MultChar, n: u32) -> GFunction {
    assert_eq!(n % chi.conductor(), 0, "character conductor must divide n");
    let scale = (n / chi.conductor()) as i64;
    let parent = chi.domain().parent().clone();
    let mut out = GFunction::zero(&parent, n);
    for (pos, &h) in chi.domain().members().iter().enumerate() {
        out.values[h] = CycloNumber::root_of_unity(n, chi.exp_at_pos(pos) as i64 * scale);
    }
    out
}

/// chibar * m computed pointwise: (chibar * m)(g) = sum_{h in H} chi(h) m(h^{-1} g).
/// Identical to `convolve(char_function(chi, n), m)`.
pub fn char_convolve(chi: &MultChar, m: &GFunction) -> GFunction {
    let gr = m.group().clone();
    let n = m.conductor();
    let scale = (n / chi.conductor()) as i64;
    let mut out = GFunction::zero(&gr, n);
    for x in gr.elements() {
        let mut acc = CycloNumber::zero(n);
        for (pos, &h) in chi.domain().members().iter().enumerate() {
            let mv = m.value(gr.mul(gr.inv(h), x));
            if mv.is_zero() {
                continue;
            }
            let root = CycloNumber::root_of_unity(n, chi.exp_at_pos(pos) as i64 * scale);
            acc = acc.add(&root.mul(mv));
        }
        out.values[x] = acc;
    }
    out
}

/// Early-exit test for chibar * m != 0. The convolution satisfies
/// (chibar * m)(h x) = chi(h) (chibar * m)(x) for h in the domain, so it
/// vanishes identically iff it vanishes at one representative per coset
/// H x; only those are scanned.
pub fn char_convolve_is_nonzero(chi: &MultChar, m: &GFunction) -> bool {
    let gr = m.group().clone();
    let n = m.conductor();
    let scale = (n / chi.conductor()) as i64;
    let members = chi.domain().members();
    let mut covered = vec![false; gr.order()];
    for x in gr.elements() {
        if covered[x] {
            continue;
        }
        for &h in members {
            covered[gr.mul(h, x)] = true;
        }
        let mut acc = CycloNumber::zero(n);
        for (pos, &h) in members.iter().enumerate() {
            let mv = m.value(gr.mul(gr.inv(h), x));
            if mv.is_zero() {
                continue;
            }
            let root = CycloNumber::root_of_unity(n, chi.exp_at_pos(pos) as i64 * scale);
            acc = acc.add(&root.mul(mv));
        }
        if !acc.is_zero() {
            return true;
        }
    }
    false
}

/// Induction of a class function along the subgroup embedding: extend by
/// zero, then sum the conjugates indexed by G/G'. The classical Frobenius
/// formula is recomputed as a cross-check on every call.
pub fn induce(
    emb: &Embedded,
    parent: &Group,
    f: &ClassFunction,
) -> Result<ClassFunction, ConvError> {
    let fbar = extend_by_zero(f.as_gfunction(), emb, parent)?;
    let sub_order = emb.group.order();
    // minimal representatives of the left cosets gamma * G'
    let mut seen = vec![false; parent.order()];
    let mut out = GFunction::zero(parent, f.conductor());
    for gamma in parent.elements() {
        if seen[gamma] {
            continue;
        }
        for &h in emb.to_parent.iter() {
            seen[parent.mul(gamma, h)] = true;
        }
        let conj = conj_translate(&fbar, gamma);
        out = out.add(&conj);
    }
    // Frobenius cross-check: ind f(x) = (1/|G'|) sum_{g in G} fbar(g^{-1} x g)
    let inv_sub = BigRational::new(BigInt::one(), BigInt::from(sub_order));
    for x in parent.elements() {
        let mut acc = CycloNumber::zero(f.conductor());
        for g in parent.elements() {
            let v = &fbar.values[parent.conj(parent.inv(g), x)];
            if !v.is_zero() {
                acc = acc.add(v);
            }
        }
        assert_eq!(
            acc.scalar_mul(&inv_sub),
            out.values[x],
            "coset-sum induction must agree with the Frobenius formula"
        );
    }
    ClassFunction::new(out)
}

/// <f, g> = (1/|G|) sum_x f(x) conj(g(x)).
pub fn inner_product(f: &GFunction, g: &GFunction) -> Result<CycloNumber, ConvError> {
    f.same_home(g)?;
    let mut acc = CycloNumber::zero(f.n);
    for x in f.group.elements() {
        let a = &f.values[x];
        let b = &g.values[x];
        if a.is_zero() || b.is_zero() {
            continue;
        }
        acc = acc.add(&a.mul(&b.conj()));
    }
    Ok(acc.scalar_mul(&BigRational::new(BigInt::one(), BigInt::from(f.group.order()))))
}

pub fn is_weak_idempotent(e: &GFunction) -> bool {
    convolve(e, e).map(|ee| ee == *e).unwrap_or(false)
}

/// Do the given functions sum exactly to the unit delta_identity?
pub fn is_partition_of_unity(es: &[ClassFunction]) -> bool {
    let Some(first) = es.first() else {
        return false;
    };
    let mut acc = GFunction::zero(first.group(), first.conductor());
    for e in es {
        acc = acc.add(e.as_gfunction());
    }
    acc == GFunction::delta(first.group(), first.conductor(), FiniteGroup::IDENTITY)
}

/// The primitive idempotent (chi(1)/|G|) chi of an irreducible character.
pub fn idempotent_of_char(chi: &ClassFunction) -> Result<ClassFunction, ConvError> {
    let norm = inner_product(chi.as_gfunction(), chi.as_gfunction())?;
    if norm != CycloNumber::one(chi.conductor()) {
        return Err(ConvError::NotIrreducible);
    }
    let deg = chi
        .degree()
        .as_rational()
        .ok_or(ConvError::NotIrreducible)?;
    let scale = deg / BigRational::from_integer(BigInt::from(chi.group().order()));
    let e = chi.scalar_mul(&scale);
    if !is_weak_idempotent(e.as_gfunction()) {
        return Err(ConvError::NotIdempotent);
    }
    Ok(e)
}

/// Inverse of [`idempotent_of_char`]: find the character in the list whose
/// primitive idempotent equals e.
pub fn char_of_idempotent<'a>(
    e: &ClassFunction,
    chars: &'a [ClassFunction],
) -> Result<&'a ClassFunction, ConvError> {
    if !is_weak_idempotent(e.as_gfunction()) {
        return Err(ConvError::NotIdempotent);
    }
    for chi in chars {
        if idempotent_of_char(chi)? == *e {
            return Ok(chi);
        }
    }
    Err(ConvError::NotInList)
}

/// Result of the Mackey condition check: holds, or the first violating
/// element outside the subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MackeyReport {
    pub holds: bool,
    pub witness: Option<usize>,
}

/// The geometric Mackey condition in convolution form: ebar * delta_x * ebar
/// vanishes for every x in G outside G'.
pub fn mackey_condition(
    emb: &Embedded,
    parent: &Group,
    e: &GFunction,
) -> Result<MackeyReport, ConvError> {
    if !is_weak_idempotent(e) {
        return Err(ConvError::NotIdempotent);
    }
    let ebar = extend_by_zero(e, emb, parent)?;
    for x in parent.elements() {
        if emb.to_local(x).is_some() {
            continue;
        }
        let mid = convolve(&ebar, &GFunction::delta(parent, ebar.n, x))?;
        let t = convolve(&mid, &ebar)?;
        if !t.is_zero() {
            return Ok(MackeyReport {
                holds: false,
                witness: Some(x),
            });
        }
    }
    Ok(MackeyReport {
        holds: true,
        witness: None,
    })
}

/// An echelonized linear basis of e * Fun(G) * e, with the verification that
/// e acts as a two-sided unit on it.
pub struct HeckeBasis {
    pub basis: Vec<GFunction>,
    pub dim: usize,
    pub unit_verified: bool,
}

pub fn hecke_subalgebra(group: &Group, e: &GFunction) -> Result<HeckeBasis, ConvError> {
    if !is_weak_idempotent(e) {
        return Err(ConvError::NotIdempotent);
    }
    let n = e.conductor();
    let order = group.order();
    // Row-reduce the spanning family e * delta_x * e over Q(zeta_n).
    let mut rows: Vec<Vec<CycloNumber>> = Vec::new();
    for x in group.elements() {
        let t = convolve(&convolve(e, &GFunction::delta(group, n, x))?, e)?;
        rows.push(t.values);
    }
    let mut basis: Vec<Vec<CycloNumber>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for mut row in rows {
        for (b, &p) in basis.iter().zip(&pivots) {
            if !row[p].is_zero() {
                let c = row[p].clone();
                for j in 0..order {
                    row[j] = row[j].sub(&c.mul(&b[j]));
                }
            }
        }
        if let Some(p) = (0..order).find(|&j| !row[j].is_zero()) {
            let inv = row[p].inverse().expect("pivot is nonzero");
            for j in 0..order {
                row[j] = row[j].mul(&inv);
            }
            basis.push(row);
            pivots.push(p);
        }
    }
    let basis: Vec<GFunction> = basis
        .into_iter()
        .map(|values| GFunction::from_values(group, n, values))
        .collect();
    let mut unit_verified = true;
    for a in &basis {
        if convolve(e, a)? != *a || convolve(a, e)? != *a {
            unit_verified = false;
        }
    }
    Ok(HeckeBasis {
        dim: basis.len(),
        basis,
        unit_verified,
    })
}

/// Primitive-central test: e must hit exactly one primitive idempotent of a
/// complete character list and annihilate the rest.
pub fn is_minimal_idempotent(
    e: &ClassFunction,
    chars: &[ClassFunction],
) -> Result<bool, ConvError> {
    let group = e.group();
    let mut deg_sq = BigRational::from_integer(BigInt::from(0));
    for chi in chars {
        let d = chi.degree().as_rational().ok_or(ConvError::IncompleteCharacterList)?;
        deg_sq += &d * &d;
    }
    if deg_sq != BigRational::from_integer(BigInt::from(group.order())) {
        return Err(ConvError::IncompleteCharacterList);
    }
    if e.as_gfunction().is_zero() {
        return Ok(false);
    }
    let mut hits = 0usize;
    for chi in chars {
        let e_chi = idempotent_of_char(chi)?;
        let p = convolve(e.as_gfunction(), e_chi.as_gfunction())?;
        if p == *e_chi.as_gfunction() {
            hits += 1;
        } else if !p.is_zero() {
            return Ok(false);
        }
    }
    Ok(hits == 1)
}
