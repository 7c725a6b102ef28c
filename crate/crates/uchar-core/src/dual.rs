//! Multiplicative characters of subgroups, Pontryagin duals of finite
//! abelian groups, the commutator morphism, and the commutator pairing
//! attached to a stabilized character.
//!
//! Characters are stored as exponent maps H -> Z/N with chi(h) =
//! zeta_N^{exp[h]}, so products and inverses are integer arithmetic;
//! conversion to [`CycloNumber`] happens on demand. Every constructor
//! validates the homomorphism law on all pairs.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::cyclo::CycloNumber;
use crate::group::{
    self, FiniteGroup, Group, GroupError, QuotientMap, Subgroup,
};

#[derive(Debug, Error)]
pub enum DualError {
    #[error("group is not abelian")]
    NotAbelian,
    #[error("exponent map is not a homomorphism at ({h1}, {h2})")]
    NotHomomorphism { h1: usize, h2: usize },
    #[error("containment violated: {0}")]
    BadContainment(String),
    #[error("character is not invariant under the acting group (moved by {by})")]
    NotInvariant { by: usize },
    #[error("commutator character is not well defined: {0}")]
    NotWellDefined(String),
    #[error("quotient is not abelian")]
    NotAbelianQuotient,
    #[error("pairing is not biadditive at cosets ({q1}, {q2}, {q3})")]
    NotBiadditive { q1: usize, q2: usize, q3: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// A multiplicative character of a subgroup H, valued in N-th roots of
/// unity and stored as an exponent map.
#[derive(Clone, PartialEq, Eq)]
pub struct MultChar {
    domain: Subgroup,
    n: u32,
    /// Exponents mod n, parallel to `domain.members()`.
    exps: Arc<Vec<u32>>,
}

impl fmt::Debug for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MultChar(N={}, H={:?}, exps={:?})",
            self.n,
            self.domain.members(),
            self.exps
        )
    }
}

impl Serialize for MultChar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MultChar", 3)?;
        s.serialize_field("subgroup", self.domain.members())?;
        s.serialize_field("N", &self.n)?;
        let exps: Vec<(usize, u32)> = self
            .domain
            .members()
            .iter()
            .copied()
            .zip(self.exps.iter().copied())
            .collect();
        s.serialize_field("exponents", &exps)?;
        s.end()
    }
}

impl MultChar {
    /// Validated constructor: exps must define a homomorphism into Z/n on
    /// all pairs of members, with exponent 0 at the identity.
    pub fn new(domain: Subgroup, n: u32, exps: Vec<u32>) -> Result<Self, DualError> {
        assert_eq!(exps.len(), domain.order());
        let g = domain.parent().clone();
        let exps: Vec<u32> = exps.into_iter().map(|e| e % n).collect();
        let chi = MultChar {
            domain,
            n,
            exps: Arc::new(exps),
        };
        if chi.exp_at_pos(0) != 0 {
            return Err(DualError::NotHomomorphism { h1: 0, h2: 0 });
        }
        for (i, &h1) in chi.domain.members().iter().enumerate() {
            for (j, &h2) in chi.domain.members().iter().enumerate() {
                let prod = g.mul(h1, h2);
                let expect = (chi.exp_at_pos(i) + chi.exp_at_pos(j)) % n;
                if chi.exp_of(prod) != Some(expect) {
                    return Err(DualError::NotHomomorphism { h1, h2 });
                }
            }
        }
        Ok(chi)
    }

    pub fn trivial(domain: Subgroup, n: u32) -> Self {
        let exps = vec![0u32; domain.order()];
        MultChar {
            domain,
            n,
            exps: Arc::new(exps),
        }
    }

    pub fn domain(&self) -> &Subgroup {
        &self.domain
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    #[inline]
    pub fn exp_at_pos(&self, pos: usize) -> u32 {
        self.exps[pos]
    }

    /// Exponent of chi at a parent element id, if it lies in the domain.
    pub fn exp_of(&self, h: usize) -> Option<u32> {
        self.domain.pos_of(h).map(|p| self.exps[p])
    }

    pub fn value(&self, h: usize) -> CycloNumber {
        match self.exp_of(h) {
            Some(e) => CycloNumber::root_of_unity(self.n, e as i64),
            None => CycloNumber::zero(self.n),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Pointwise product with another character of the same domain.
    pub fn product(&self, other: &MultChar) -> MultChar {
        assert_eq!(self.domain.members(), other.domain.members());
        assert_eq!(self.n, other.n);
        let exps = self
            .exps
            .iter()
            .zip(other.exps.iter())
            .map(|(&a, &b)| (a + b) % self.n)
            .collect();
        MultChar {
            domain: self.domain.clone(),
            n: self.n,
            exps: Arc::new(exps),
        }
    }

    /// Pointwise inverse (equals complex conjugation on values).
    pub fn inverse(&self) -> MultChar {
        let exps = self.exps.iter().map(|&a| (self.n - a % self.n) % self.n).collect();
        MultChar {
            domain: self.domain.clone(),
            n: self.n,
            exps: Arc::new(exps),
        }
    }

    pub fn restrict_to(&self, sub: &Subgroup) -> MultChar {
        let exps: Vec<u32> = sub
            .members()
            .iter()
            .map(|&h| self.exp_of(h).expect("restriction requires containment"))
            .collect();
        MultChar {
            domain: sub.clone(),
            n: self.n,
            exps: Arc::new(exps),
        }
    }

    /// True if chi restricted to `sub` agrees with `other`.
    pub fn restricts_to(&self, other: &MultChar) -> bool {
        other
            .domain
            .members()
            .iter()
            .all(|&h| self.exp_of(h) == other.exp_of(h))
    }

    /// Deterministic ordering key: the exponent vector.
    pub fn order_key(&self) -> &[u32] {
        &self.exps
    }

    /// Whether g fixes (H, chi): g must normalize H and satisfy
    /// chi(g h g^{-1}) = chi(h) for all h.
    pub fn fixed_by(&self, g: usize) -> bool {
        let gr = self.domain.parent();
        self.domain
            .members()
            .iter()
            .all(|&h| self.exp_of(gr.conj(g, h)) == Some(self.exp_of(h).unwrap()))
    }
}

/// chi^g on g^{-1} H g, defined by chi^g(h) = chi(g h g^{-1}).
pub fn conjugate_char(chi: &MultChar, g: usize) -> MultChar {
    let gr = chi.domain().parent().clone();
    let domain = chi.domain().conjugate_by(g);
    let exps: Vec<u32> = domain
        .members()
        .iter()
        .map(|&h| chi.exp_of(gr.conj(g, h)).expect("conjugate stays in domain"))
        .collect();
    MultChar {
        domain,
        n: chi.n,
        exps: Arc::new(exps),
    }
}

/// The stabilizer of the pair (H, chi) under conjugation: all g normalizing
/// H with chi^g = chi. Always contains H.
pub fn stabilizer_of_pair(g: &Group, h: &Subgroup, chi: &MultChar) -> Subgroup {
    let members: Vec<usize> = g
        .elements()
        .filter(|&x| {
            h.members().iter().all(|&m| h.contains(g.conj(x, m))) && chi.fixed_by(x)
        })
        .collect();
    let stab = Subgroup::new(g.clone(), members).expect("stabilizer is a subgroup");
    debug_assert!(h.members().iter().all(|&m| stab.contains(m)));
    stab
}

// ---------------------------------------------------------------------------
// Pontryagin duals
// ---------------------------------------------------------------------------

/// The complete character group of a finite abelian group, with the group
/// law given by pointwise exponent addition.
pub struct DualGroup {
    base: Group,
    conductor: u32,
    /// All |A| characters of the full subgroup, sorted by exponent vector.
    pub characters: Vec<MultChar>,
    index: HashMap<Vec<u32>, usize>,
}

impl DualGroup {
    pub fn base(&self) -> &Group {
        &self.base
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }

    pub fn index_of(&self, chi: &MultChar) -> Option<usize> {
        self.index.get(chi.exps.as_ref()).copied()
    }

    pub fn mul_index(&self, i: usize, j: usize) -> usize {
        let prod = self.characters[i].product(&self.characters[j]);
        self.index_of(&prod).expect("dual closed under product")
    }

    pub fn inv_index(&self, i: usize) -> usize {
        let inv = self.characters[i].inverse();
        self.index_of(&inv).expect("dual closed under inverse")
    }
}

/// Cyclic decomposition of a finite abelian group: generators with orders
/// d1 >= d2 >= ... (each dividing the previous), found by greedy
/// maximal-order extraction with a complement search in the subgroup
/// lattice.
fn abelian_basis(a: &Group) -> Result<Vec<(usize, u32)>, DualError> {
    if !a.is_abelian() {
        return Err(DualError::NotAbelian);
    }
    let mut basis = Vec::new();
    let mut current = group::full_subgroup(a);
    if current.order() == 1 {
        return Ok(basis);
    }
    let subs = group::all_subgroups_with_cap(a, a.order())?;
    loop {
        let &g = current
            .members()
            .iter()
            .filter(|&&x| x != FiniteGroup::IDENTITY)
            .min_by_key(|&&x| (std::cmp::Reverse(a.elem_order(x)), x))
            .expect("nontrivial subgroup");
        let d = a.elem_order(g);
        basis.push((g, d));
        let span = group::generated_subgroup(a, &[g]);
        if span.order() == current.order() {
            break;
        }
        // A maximal-order element generates a direct summand; pick the first
        // complement in the lattice order.
        let complement = subs
            .iter()
            .find(|s| {
                s.order() * d as usize == current.order()
                    && s.members().iter().all(|&m| current.contains(m))
                    && s.intersect(&span).order() == 1
            })
            .expect("complement of a maximal-order cyclic summand exists");
        current = complement.clone();
        if current.order() == 1 {
            break;
        }
    }
    Ok(basis)
}

/// All characters of a finite abelian group, with values in the `conductor`-th
/// roots of unity; `conductor` must be a multiple of the exponent.
pub fn dual_group(a: &Group, conductor: u32) -> Result<DualGroup, DualError> {
    if !a.is_abelian() {
        return Err(DualError::NotAbelian);
    }
    assert_eq!(
        conductor % a.exponent(),
        0,
        "conductor must be divisible by the group exponent"
    );
    let basis = abelian_basis(a)?;
    // Enumerate all products over the basis box and record the exponent
    // tuple of every element; collisions would mean the basis is not direct.
    let mut elems = vec![FiniteGroup::IDENTITY];
    let mut tuples = vec![vec![0u32; basis.len()]];
    for (slot, &(g, d)) in basis.iter().enumerate() {
        let mut next_elems = Vec::with_capacity(elems.len() * d as usize);
        let mut next_tuples = Vec::with_capacity(elems.len() * d as usize);
        for (e, t) in elems.iter().zip(&tuples) {
            let mut x = *e;
            for k in 0..d {
                let mut t2 = t.clone();
                t2[slot] = k;
                next_elems.push(x);
                next_tuples.push(t2);
                x = a.mul(x, g);
            }
        }
        elems = next_elems;
        tuples = next_tuples;
    }
    assert_eq!(elems.len(), a.order(), "basis spans the group");
    let mut tuple_of = vec![None::<Vec<u32>>; a.order()];
    for (e, t) in elems.iter().zip(tuples.iter()) {
        assert!(tuple_of[*e].is_none(), "basis decomposition must be unique");
        tuple_of[*e] = Some(t.clone());
    }
    let full = group::full_subgroup(a);
    let mut characters = Vec::with_capacity(a.order());
    let mut cvec = vec![0u32; basis.len()];
    loop {
        let exps: Vec<u32> = (0..a.order())
            .map(|x| {
                let t = tuple_of[x].as_ref().expect("all elements decomposed");
                let mut e = 0u64;
                for ((&c, &xk), &(_, d)) in cvec.iter().zip(t).zip(&basis) {
                    e += (c as u64 * xk as u64) * (conductor / d) as u64;
                }
                (e % conductor as u64) as u32
            })
            .collect();
        characters.push(
            MultChar::new(full.clone(), conductor, exps).expect("dual characters are homomorphisms"),
        );
        // advance mixed-radix counter
        let mut slot = basis.len();
        loop {
            if slot == 0 {
                break;
            }
            slot -= 1;
            cvec[slot] += 1;
            if cvec[slot] < basis[slot].1 {
                break;
            }
            cvec[slot] = 0;
            if slot == 0 {
                break;
            }
        }
        if cvec.iter().all(|&c| c == 0) {
            break;
        }
    }
    characters.sort_by(|x, y| x.order_key().cmp(y.order_key()));
    characters.dedup_by(|x, y| x.exps == y.exps);
    assert_eq!(characters.len(), a.order(), "a finite abelian group has |A| characters");
    let index = characters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.exps.as_ref().clone(), i))
        .collect();
    Ok(DualGroup {
        base: a.clone(),
        conductor,
        characters,
        index,
    })
}

/// All multiplicative characters of an arbitrary subgroup H: the pullbacks
/// of the dual of H/[H,H]. Sorted by exponent vector, so the trivial
/// character is always first.
pub fn mult_chars(h: &Subgroup, conductor: u32) -> Vec<MultChar> {
    let parent = h.parent().clone();
    let memo = group::mult_char_memo(&parent, (h.members().to_vec(), conductor), || {
        mult_chars_uncached(h, conductor)
    });
    memo.as_ref().clone()
}

fn mult_chars_uncached(h: &Subgroup, conductor: u32) -> Vec<MultChar> {
    let parent = h.parent().clone();
    let derived = group::commutator_subgroup(&parent, h, h);
    let emb = h.as_group();
    let derived_local: Vec<usize> = derived
        .members()
        .iter()
        .map(|&d| emb.to_local(d).expect("[H,H] inside H"))
        .collect();
    let dsub = Subgroup::new(emb.group.clone(), derived_local).expect("derived subgroup");
    let q = group::quotient(&emb.group, &dsub).expect("derived subgroup is normal");
    let dual = dual_group(&q.quotient, conductor).expect("abelianization is abelian");
    let mut out: Vec<MultChar> = dual
        .characters
        .iter()
        .map(|psi| {
            let exps: Vec<u32> = (0..h.order())
                .map(|local| psi.exp_at_pos(q.proj[local]))
                .collect();
            MultChar {
                domain: h.clone(),
                n: conductor,
                exps: Arc::new(exps),
            }
        })
        .collect();
    out.sort_by(|x, y| x.order_key().cmp(y.order_key()));
    debug_assert!(out
        .iter()
        .all(|c| MultChar::new(c.domain.clone(), c.n, c.exps.as_ref().clone()).is_ok()));
    out
}

// ---------------------------------------------------------------------------
// The commutator morphism phi_N
// ---------------------------------------------------------------------------

/// The homomorphism U/N -> (Z/N)^* induced by u -> (z -> chi([u, z])).
pub struct PhiMap {
    /// Quotient U -> U/N in U-local coordinates.
    pub u_quot: QuotientMap,
    /// local ids of U inside the parent group.
    pub u_embed: Arc<Vec<usize>>,
    /// Quotient Z -> Z/N realized as a standalone group.
    pub z_quot: QuotientMap,
    pub z_embed: Arc<Vec<usize>>,
    pub dual: DualGroup,
    /// For each U/N coset, the index of its image character in `dual`.
    pub image: Vec<usize>,
}

impl PhiMap {
    /// Exponent of phi(u)(z) for parent ids u in U and z in Z.
    pub fn pairing_exp(&self, u: usize, z: usize) -> u32 {
        let ul = self.u_embed.binary_search(&u).expect("u in U");
        let zl = self.z_embed.binary_search(&z).expect("z in Z");
        let cu = self.u_quot.proj[ul];
        let cz = self.z_quot.proj[zl];
        self.dual.characters[self.image[cu]].exp_at_pos(cz)
    }

    pub fn is_trivial(&self) -> bool {
        self.image.iter().all(|&i| self.dual.characters[i].is_trivial())
    }
}

/// Build phi_N for U-invariant chi on N, with N <= Z <= U and [U, Z] <= N.
/// Every well-definedness guarantee is re-checked at runtime; a failure is a
/// bug, not a property of the input.
pub fn phi_construction(
    u: &Subgroup,
    n: &Subgroup,
    nchar: &MultChar,
    z: &Subgroup,
) -> Result<PhiMap, DualError> {
    let g = u.parent().clone();
    for &x in n.members() {
        if !z.contains(x) {
            return Err(DualError::BadContainment(format!("N not inside Z at {x}")));
        }
    }
    for &x in z.members() {
        if !u.contains(x) {
            return Err(DualError::BadContainment(format!("Z not inside U at {x}")));
        }
    }
    for &a in u.members() {
        for &b in z.members() {
            if !n.contains(g.commutator(a, b)) {
                return Err(DualError::BadContainment(format!(
                    "[U, Z] escapes N at ({a}, {b})"
                )));
            }
        }
    }
    // N normal in U and chi U-invariant
    for &a in u.members() {
        for &h in n.members() {
            let c = g.conj(a, h);
            if !n.contains(c) {
                return Err(DualError::BadContainment(format!(
                    "N not normal in U at ({a}, {h})"
                )));
            }
        }
        if !nchar.fixed_by(a) {
            return Err(DualError::NotInvariant { by: a });
        }
    }

    let u_emb = u.as_group();
    let n_in_u = Subgroup::new(
        u_emb.group.clone(),
        n.members()
            .iter()
            .map(|&x| u_emb.to_local(x).expect("N inside U"))
            .collect(),
    )?;
    let u_quot = group::quotient(&u_emb.group, &n_in_u)?;

    let z_emb = z.as_group();
    let n_in_z = Subgroup::new(
        z_emb.group.clone(),
        n.members()
            .iter()
            .map(|&x| z_emb.to_local(x).expect("N inside Z"))
            .collect(),
    )?;
    let z_quot = group::quotient(&z_emb.group, &n_in_z)?;
    let zq = z_quot.quotient.clone();
    if !zq.is_abelian() {
        return Err(DualError::NotWellDefined("Z/N is not abelian".into()));
    }
    let conductor = nchar.conductor();
    let dual = dual_group(&zq, conductor)?;

    let zn = zq.order();
    let mut image = Vec::with_capacity(u_quot.quotient.order());
    for cu in 0..u_quot.quotient.order() {
        let u0 = u_emb.to_parent[u_quot.section[cu]];
        let mut exps = vec![0u32; zn];
        for (cz, slot) in exps.iter_mut().enumerate() {
            let z0 = z_emb.to_parent[z_quot.section[cz]];
            *slot = nchar
                .exp_of(g.commutator(u0, z0))
                .expect("commutator lies in N");
        }
        // well-definedness: every representative of every coset pair must agree
        for (ul, &uc) in u_quot.proj.iter().enumerate() {
            if uc != cu {
                continue;
            }
            let up = u_emb.to_parent[ul];
            for (zl, &zc) in z_quot.proj.iter().enumerate() {
                let zp = z_emb.to_parent[zl];
                let e = nchar
                    .exp_of(g.commutator(up, zp))
                    .expect("commutator lies in N");
                if e != exps[zc] {
                    return Err(DualError::NotWellDefined(format!(
                        "value at ({up}, {zp}) differs from its coset representatives"
                    )));
                }
            }
        }
        let full_zq = group::full_subgroup(&zq);
        let chi = MultChar::new(full_zq, conductor, exps).map_err(|_| {
            DualError::NotWellDefined(format!("image of coset {cu} is not a character of Z/N"))
        })?;
        let idx = dual
            .index_of(&chi)
            .expect("every character of Z/N appears in its dual");
        image.push(idx);
    }
    // group homomorphism on U/N
    for a in 0..u_quot.quotient.order() {
        for b in 0..u_quot.quotient.order() {
            let ab = u_quot.quotient.mul(a, b);
            if image[ab] != dual.mul_index(image[a], image[b]) {
                return Err(DualError::NotWellDefined(format!(
                    "phi is not a homomorphism at cosets ({a}, {b})"
                )));
            }
        }
    }
    Ok(PhiMap {
        u_quot,
        u_embed: u_emb.to_parent,
        z_quot,
        z_embed: z_emb.to_parent,
        dual,
        image,
    })
}

// ---------------------------------------------------------------------------
// The commutator pairing B_chi
// ---------------------------------------------------------------------------

/// The alternating biadditive form B_chi(x, y) = chi([x, y]) on G'/H,
/// stored as an exponent matrix, plus perfectness of the induced map
/// G'/H -> (G'/H)^*.
pub struct PairingB {
    /// Quotient G' -> G'/H in G'-local coordinates.
    pub quot: QuotientMap,
    pub embed: Arc<Vec<usize>>,
    pub conductor: u32,
    /// form[q1][q2] = exponent of B(q1, q2).
    pub form: Vec<Vec<u32>>,
    pub is_perfect: bool,
}

impl PairingB {
    pub fn quotient_order(&self) -> usize {
        self.quot.quotient.order()
    }
}

pub fn pairing_b(
    gamma_prime: &Subgroup,
    h: &Subgroup,
    chi: &MultChar,
) -> Result<PairingB, DualError> {
    let g = gamma_prime.parent().clone();
    for &x in h.members() {
        if !gamma_prime.contains(x) {
            return Err(DualError::BadContainment(format!("H not inside G' at {x}")));
        }
    }
    for &a in gamma_prime.members() {
        if !chi.fixed_by(a) {
            return Err(DualError::NotInvariant { by: a });
        }
    }
    // G'/H abelian <=> [G', G'] <= H, and then every commutator lies in H
    for &a in gamma_prime.members() {
        for &b in gamma_prime.members() {
            if !h.contains(g.commutator(a, b)) {
                return Err(DualError::NotAbelianQuotient);
            }
        }
    }
    let emb = gamma_prime.as_group();
    let h_local = Subgroup::new(
        emb.group.clone(),
        h.members()
            .iter()
            .map(|&x| emb.to_local(x).expect("H inside G'"))
            .collect(),
    )?;
    let quot = group::quotient(&emb.group, &h_local)?;
    let q = quot.quotient.order();
    let n = chi.conductor();
    let mut form = vec![vec![0u32; q]; q];
    for q1 in 0..q {
        let x = emb.to_parent[quot.section[q1]];
        for q2 in 0..q {
            let y = emb.to_parent[quot.section[q2]];
            form[q1][q2] = chi.exp_of(g.commutator(x, y)).expect("commutator in H");
        }
    }
    // well-definedness across all representatives
    for (xl, &q1) in quot.proj.iter().enumerate() {
        let x = emb.to_parent[xl];
        for (yl, &q2) in quot.proj.iter().enumerate() {
            let y = emb.to_parent[yl];
            let e = chi.exp_of(g.commutator(x, y)).expect("commutator in H");
            if e != form[q1][q2] {
                return Err(DualError::NotWellDefined(format!(
                    "B value at ({x}, {y}) differs from coset representatives"
                )));
            }
        }
    }
    // biadditivity and the alternating law
    for q1 in 0..q {
        if form[q1][q1] != 0 {
            return Err(DualError::NotBiadditive { q1, q2: q1, q3: q1 });
        }
        for q2 in 0..q {
            if (form[q1][q2] + form[q2][q1]) % n != 0 {
                return Err(DualError::NotBiadditive { q1, q2, q3: q1 });
            }
            for q3 in 0..q {
                let sum = quot.quotient.mul(q1, q2);
                if form[sum][q3] != (form[q1][q3] + form[q2][q3]) % n {
                    return Err(DualError::NotBiadditive { q1, q2, q3 });
                }
            }
        }
    }
    let is_perfect = (1..q).all(|q1| (0..q).any(|q2| form[q1][q2] != 0));
    Ok(PairingB {
        quot,
        embed: emb.to_parent,
        conductor: n,
        form,
        is_perfect,
    })
}
