//! Admissible pairs, Heisenberg idempotents and characters, and induction
//! of minimal idempotents.
//!
//! A pair (H, chi) is admissible when the stabilizer quotient G'/H is
//! abelian, the commutator pairing B_chi is perfect on it, and conjugates of
//! chi disagree on intersections outside G'. Every guarantee the theory
//! provides (idempotency, irreducibility, the Mackey condition for the
//! Heisenberg idempotent) is re-verified at runtime; a failure there is a
//! bug signal, never a property of the input.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use thiserror::Error;

use crate::conv::{
    self, convolve, idempotent_of_char, inner_product, mackey_condition, ClassFunction,
    ConvError, GFunction,
};
use crate::cyclo::CycloNumber;
use crate::dual::{self, mult_chars, pairing_b, DualError, MultChar, PairingB};
use crate::group::{self, Embedded, Group, GroupError, Subgroup};

#[derive(Debug, Error)]
pub enum AdmError {
    #[error("no extension of chi to the isotropic subgroup was found")]
    NoExtensionFound,
    #[error("constructed character is not irreducible")]
    NotIrreducible,
    #[error("constructed function is not an idempotent")]
    NotIdempotent,
    #[error("constructed character does not appear in the supplied list")]
    NotInList,
    #[error("internal guarantee violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Conv(#[from] ConvError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Why a pair failed the admissibility test; a report, not an exception.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdmissibilityFailure {
    /// G'/H is not commutative; the witness commutator escapes H.
    QuotientNotAbelian { g1: usize, g2: usize },
    /// B_chi is degenerate; the witness coset pairs trivially with everything.
    PairingNotPerfect { radical_coset: usize },
    /// Some g outside G' has chi^g = chi on H cap H^g.
    ConjugateAgrees { g: usize },
}

impl std::fmt::Display for AdmissibilityFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AdmissibilityFailure::QuotientNotAbelian { g1, g2 } => {
                write!(f, "condition (1) fails: [{g1}, {g2}] escapes H")
            }
            AdmissibilityFailure::PairingNotPerfect { radical_coset } => {
                write!(f, "condition (2) fails: coset {radical_coset} is in the radical of B_chi")
            }
            AdmissibilityFailure::ConjugateAgrees { g } => {
                write!(f, "condition (3) fails: chi^g agrees with chi on the intersection for g = {g}")
            }
        }
    }
}

/// Which admissibility conditions were verified, for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certificate {
    pub quotient_abelian: bool,
    pub pairing_perfect: bool,
    pub conjugates_disagree: bool,
}

/// An admissible pair (H, chi) with its cached normalizer and pairing.
pub struct AdmissiblePair {
    gamma: Group,
    h: Subgroup,
    chi: MultChar,
    gamma_prime: Subgroup,
    gamma_prime_emb: Embedded,
    pairing: PairingB,
    pub certificate: Certificate,
    heisenberg_idem: OnceLock<ClassFunction>,
    heisenberg_char: OnceLock<ClassFunction>,
}

impl std::fmt::Debug for AdmissiblePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "AdmissiblePair(H={:?}, chi exps={:?}, |G'|={})",
            self.h.members(),
            self.chi.exps(),
            self.gamma_prime.order()
        )
    }
}

impl AdmissiblePair {
    pub fn group(&self) -> &Group {
        &self.gamma
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.h
    }

    pub fn character(&self) -> &MultChar {
        &self.chi
    }

    pub fn normalizer(&self) -> &Subgroup {
        &self.gamma_prime
    }

    pub fn normalizer_embedding(&self) -> &Embedded {
        &self.gamma_prime_emb
    }

    pub fn pairing(&self) -> &PairingB {
        &self.pairing
    }

    /// [G' : H]; a perfect square for every admissible pair.
    pub fn quotient_index(&self) -> usize {
        self.gamma_prime.order() / self.h.order()
    }

    pub fn conductor(&self) -> u32 {
        self.chi.conductor()
    }
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    for cand in r.saturating_sub(1)..=r + 1 {
        if cand * cand == n {
            return Some(cand);
        }
    }
    None
}

/// Check the three admissibility conditions exhaustively; on success return
/// the pair with its cached normalizer and pairing.
pub fn is_admissible(
    gamma: &Group,
    h: &Subgroup,
    chi: &MultChar,
) -> Result<Result<AdmissiblePair, AdmissibilityFailure>, AdmError> {
    assert!(
        chi.conductor() % gamma.exponent() == 0,
        "character conductor must absorb the ambient exponent"
    );
    let gamma_prime = dual::stabilizer_of_pair(gamma, h, chi);
    // (1) G'/H commutative
    for &g1 in gamma_prime.members() {
        for &g2 in gamma_prime.members() {
            if !h.contains(gamma.commutator(g1, g2)) {
                return Ok(Err(AdmissibilityFailure::QuotientNotAbelian { g1, g2 }));
            }
        }
    }
    // (2) B_chi perfect
    let pairing = pairing_b(&gamma_prime, h, chi)?;
    if !pairing.is_perfect {
        let q = pairing.quotient_order();
        let radical = (1..q)
            .find(|&q1| (0..q).all(|q2| pairing.form[q1][q2] == 0))
            .expect("imperfect pairing has a radical coset");
        return Ok(Err(AdmissibilityFailure::PairingNotPerfect {
            radical_coset: radical,
        }));
    }
    // (3) conjugate disagreement outside G'
    for g in gamma.elements() {
        if gamma_prime.contains(g) {
            continue;
        }
        let hg = h.conjugate_by(g);
        let meet = h.intersect(&hg);
        let some_disagreement = meet.members().iter().any(|&x| {
            // chi^g(x) = chi(g x g^{-1})
            chi.exp_of(gamma.conj(g, x)) != chi.exp_of(x)
        });
        if !some_disagreement {
            return Ok(Err(AdmissibilityFailure::ConjugateAgrees { g }));
        }
    }
    let index = gamma_prime.order() / h.order();
    if integer_sqrt(index).is_none() {
        return Err(AdmError::Internal(format!(
            "perfect alternating pairing on a quotient of non-square order {index}"
        )));
    }
    Ok(Ok(AdmissiblePair {
        gamma: gamma.clone(),
        h: h.clone(),
        chi: chi.clone(),
        gamma_prime_emb: gamma_prime.as_group(),
        gamma_prime,
        pairing,
        certificate: Certificate {
            quotient_abelian: true,
            pairing_perfect: true,
            conjugates_disagree: true,
        },
        heisenberg_idem: OnceLock::new(),
        heisenberg_char: OnceLock::new(),
    }))
}

/// The Heisenberg idempotent e' = (1/|H|) chibar on G', verified idempotent
/// and checked against the Mackey condition with respect to G. Memoized on
/// the pair.
pub fn heisenberg_idempotent(pair: &AdmissiblePair) -> Result<ClassFunction, AdmError> {
    if let Some(hit) = pair.heisenberg_idem.get() {
        return Ok(hit.clone());
    }
    let emb = &pair.gamma_prime_emb;
    let n = pair.conductor();
    let scale = (n / pair.chi.conductor()) as i64;
    let mut e = GFunction::zero(&emb.group, n);
    let inv_h = BigRational::new(BigInt::from(1), BigInt::from(pair.h.order()));
    for (pos, &h) in pair.chi.domain().members().iter().enumerate() {
        let local = emb.to_local(h).expect("H inside G'");
        let root = CycloNumber::root_of_unity(n, pair.chi.exp_at_pos(pos) as i64 * scale);
        e.set(local, root.scalar_mul(&inv_h));
    }
    let e = ClassFunction::new(e)
        .map_err(|_| AdmError::Internal("Heisenberg idempotent is not G'-invariant".into()))?;
    if !conv::is_weak_idempotent(e.as_gfunction()) {
        return Err(AdmError::NotIdempotent);
    }
    let mackey = mackey_condition(emb, &pair.gamma, e.as_gfunction())?;
    if !mackey.holds {
        return Err(AdmError::Internal(format!(
            "Heisenberg idempotent violates the Mackey condition at {:?}",
            mackey.witness
        )));
    }
    let _ = pair.heisenberg_idem.set(e.clone());
    Ok(e)
}

/// A maximal isotropic subgroup of the pairing's quotient, by greedy
/// extension over coset ids ascending, with an exhaustive maximality check.
fn maximal_isotropic(pairing: &PairingB) -> Subgroup {
    let q = &pairing.quot.quotient;
    let mut span = group::trivial_subgroup(q);
    for c in 1..q.order() {
        if span.contains(c) {
            continue;
        }
        if span.members().iter().all(|&s| pairing.form[c][s] == 0) && pairing.form[c][c] == 0 {
            let mut gens = span.members().to_vec();
            gens.push(c);
            let bigger = group::generated_subgroup(q, &gens);
            debug_assert!(bigger
                .members()
                .iter()
                .all(|&x| bigger.members().iter().all(|&y| pairing.form[x][y] == 0)));
            span = bigger;
        }
    }
    // no strictly larger isotropic subgroup exists
    assert!(
        (0..q.order()).all(|c| span.contains(c)
            || span.members().iter().any(|&s| pairing.form[c][s] != 0)),
        "greedy isotropic subgroup must be maximal"
    );
    span
}

/// The unique irreducible character pi_chi of G' acting on H by chi:
/// constructed by extending chi to a maximal isotropic subgroup L and
/// inducing to G'. Returns a class function on the standalone G'.
pub fn heisenberg_character(pair: &AdmissiblePair) -> Result<ClassFunction, AdmError> {
    if let Some(hit) = pair.heisenberg_char.get() {
        return Ok(hit.clone());
    }
    let gamma = &pair.gamma;
    let emb = &pair.gamma_prime_emb;
    let n = pair.conductor();
    let iso = maximal_isotropic(&pair.pairing);
    let index = pair.quotient_index();
    let deg = integer_sqrt(index).expect("checked at construction");
    if iso.order() * iso.order() != index {
        return Err(AdmError::Internal(format!(
            "maximal isotropic has order {} but the quotient has order {index}",
            iso.order()
        )));
    }
    // preimage L of the isotropic subgroup inside G', as a subgroup of G
    let l_members: Vec<usize> = pair
        .gamma_prime
        .members()
        .iter()
        .copied()
        .filter(|&x| {
            let local = emb.to_local(x).expect("member of G'");
            let local_in_gp = pair
                .pairing
                .embed
                .binary_search(&x)
                .expect("pairing embeds G'");
            debug_assert_eq!(local, local_in_gp);
            iso.contains(pair.pairing.quot.proj[local])
        })
        .collect();
    let l = Subgroup::new(gamma.clone(), l_members)?;
    // extension of chi to L: first match in the deterministic character order
    let chi_l = mult_chars(&l, n)
        .into_iter()
        .find(|c| c.restricts_to(&pair.chi))
        .ok_or(AdmError::NoExtensionFound)?;
    // induce chi_L from L to G'
    let l_local = Subgroup::new(
        emb.group.clone(),
        l.members()
            .iter()
            .map(|&x| emb.to_local(x).expect("L inside G'"))
            .collect(),
    )?;
    let l_emb = l_local.as_group();
    let mut chi_l_fn = GFunction::zero(&l_emb.group, n);
    for (local, &gp_local) in l_emb.to_parent.iter().enumerate() {
        let parent_id = emb.to_parent[gp_local];
        let e = chi_l.exp_of(parent_id).expect("member of L");
        chi_l_fn.set(local, CycloNumber::root_of_unity(n, e as i64));
    }
    let chi_l_fn = ClassFunction::new(chi_l_fn)
        .map_err(|_| AdmError::Internal("multiplicative character must be a class function".into()))?;
    let pi = conv::induce(&l_emb, &emb.group, &chi_l_fn)?;
    // certificates
    let norm = inner_product(pi.as_gfunction(), pi.as_gfunction())?;
    if norm != CycloNumber::one(n) {
        return Err(AdmError::NotIrreducible);
    }
    if *pi.degree() != CycloNumber::from_integer(n, deg as i64) {
        return Err(AdmError::Internal(format!(
            "Heisenberg character has degree {} instead of {deg}",
            pi.degree()
        )));
    }
    // pi restricted to H is deg * chi
    let scale = (n / pair.chi.conductor()) as i64;
    for (pos, &h) in pair.chi.domain().members().iter().enumerate() {
        let local = emb.to_local(h).expect("H inside G'");
        let expect = CycloNumber::root_of_unity(n, pair.chi.exp_at_pos(pos) as i64 * scale)
            .scalar_mul(&BigRational::from_integer(BigInt::from(deg)));
        if *pi.value(local) != expect {
            return Err(AdmError::Internal(
                "Heisenberg character does not act on H by chi".into(),
            ));
        }
    }
    // e' * e_pi = e_pi
    let e_prime = heisenberg_idempotent(pair)?;
    let e_pi = idempotent_of_char(&pi)?;
    if convolve(e_prime.as_gfunction(), e_pi.as_gfunction())? != *e_pi.as_gfunction() {
        return Err(AdmError::Internal(
            "Heisenberg idempotent does not absorb the idempotent of pi".into(),
        ));
    }
    let _ = pair.heisenberg_char.set(pi.clone());
    Ok(pi)
}

/// The irreducible character of G induced from the pair:
/// Ind_{G'}^G pi_chi, certified irreducible of degree [G:G'] sqrt([G':H]).
pub fn character_from_pair(pair: &AdmissiblePair) -> Result<ClassFunction, AdmError> {
    let pi = heisenberg_character(pair)?;
    let chi_g = conv::induce(&pair.gamma_prime_emb, &pair.gamma, &pi)?;
    let n = pair.conductor();
    if inner_product(chi_g.as_gfunction(), chi_g.as_gfunction())? != CycloNumber::one(n) {
        return Err(AdmError::NotIrreducible);
    }
    let deg = (pair.gamma.order() / pair.gamma_prime.order())
        * integer_sqrt(pair.quotient_index()).expect("perfect square");
    if *chi_g.degree() != CycloNumber::from_integer(n, deg as i64) {
        return Err(AdmError::Internal(format!(
            "induced character degree {} does not match [G:G'] sqrt([G':H]) = {deg}",
            chi_g.degree()
        )));
    }
    Ok(chi_g)
}

/// The induced minimal idempotent f = ind_{G'}^G e', certified: f * f = f
/// and f equals the primitive idempotent of the induced character.
pub fn induced_idempotent(pair: &AdmissiblePair) -> Result<ClassFunction, AdmError> {
    let e_prime = heisenberg_idempotent(pair)?;
    let f = conv::induce(&pair.gamma_prime_emb, &pair.gamma, &e_prime)?;
    if !conv::is_weak_idempotent(f.as_gfunction()) {
        return Err(AdmError::NotIdempotent);
    }
    let chi_g = character_from_pair(pair)?;
    let expected = idempotent_of_char(&chi_g)?;
    if f != expected {
        return Err(AdmError::Internal(
            "induced idempotent differs from the primitive idempotent of the induced character"
                .into(),
        ));
    }
    Ok(f)
}

/// One enumerated admissible pair tagged with the irreducible character it
/// induces (an index into the supplied complete list).
pub struct PairWitness {
    pub pair: AdmissiblePair,
    pub char_index: usize,
}

pub struct EnumeratedPairs {
    pub entries: Vec<PairWitness>,
    /// For each supplied character, the indices of entries inducing it.
    pub coverage: Vec<Vec<usize>>,
}

/// Enumerate all admissible pairs over all subgroups and all multiplicative
/// characters, tag each with its induced irreducible, and report which
/// irreducibles from the supplied complete list are hit.
pub fn enumerate_admissible_pairs(
    gamma: &Group,
    chars: &[ClassFunction],
    subgroup_cap: usize,
) -> Result<EnumeratedPairs, AdmError> {
    let n = chars
        .first()
        .map(|c| c.conductor())
        .unwrap_or(gamma.exponent());
    let subgroups = group::all_subgroups_with_cap(gamma, subgroup_cap)?;
    let per_subgroup: Vec<Vec<PairWitness>> = subgroups
        .par_iter()
        .map(|h| {
            let mut found = Vec::new();
            for chi in mult_chars(h, n) {
                let Ok(outcome) = is_admissible(gamma, h, &chi) else {
                    continue;
                };
                if let Ok(pair) = outcome {
                    let chi_g = character_from_pair(&pair)?;
                    let idx = chars
                        .iter()
                        .position(|c| c == &chi_g)
                        .ok_or(AdmError::NotInList)?;
                    found.push(PairWitness {
                        pair,
                        char_index: idx,
                    });
                }
            }
            Ok(found)
        })
        .collect::<Result<_, AdmError>>()?;
    let entries: Vec<PairWitness> = per_subgroup.into_iter().flatten().collect();
    let mut coverage = vec![Vec::new(); chars.len()];
    for (i, w) in entries.iter().enumerate() {
        coverage[w.char_index].push(i);
    }
    Ok(EnumeratedPairs { entries, coverage })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::char_function;
    use crate::group::{abelian, ut};

    fn center_sign_pair(g: &Group) -> AdmissiblePair {
        let n = g.exponent();
        let z = group::center(g);
        let chi = mult_chars(&z, n)
            .into_iter()
            .find(|c| !c.is_trivial())
            .unwrap();
        is_admissible(g, &z, &chi).unwrap().unwrap()
    }

    #[test]
    fn full_group_pairs_are_admissible() {
        let g = ut(3, 2).unwrap();
        let full = group::full_subgroup(&g);
        for chi in mult_chars(&full, g.exponent()) {
            let pair = is_admissible(&g, &full, &chi).unwrap().unwrap();
            assert!(pair.normalizer().is_full());
            assert_eq!(pair.quotient_index(), 1);
        }
    }

    #[test]
    fn center_sign_is_admissible_with_full_normalizer() {
        let g = ut(3, 2).unwrap();
        let pair = center_sign_pair(&g);
        assert!(pair.normalizer().is_full());
        assert_eq!(pair.quotient_index(), 4);
        assert!(pair.pairing().is_perfect);
    }

    #[test]
    fn center_trivial_fails_condition_two() {
        let g = ut(3, 2).unwrap();
        let z = group::center(&g);
        let triv = MultChar::trivial(z.clone(), g.exponent());
        match is_admissible(&g, &z, &triv).unwrap() {
            Err(AdmissibilityFailure::PairingNotPerfect { .. }) => {}
            other => panic!("expected PairingNotPerfect, got {other:?}"),
        }
    }

    #[test]
    fn heisenberg_idempotent_of_center_sign() {
        let g = ut(3, 2).unwrap();
        let pair = center_sign_pair(&g);
        let e = heisenberg_idempotent(&pair).unwrap();
        // e'(1) = 1/2, e'(z) = -1/2, 0 elsewhere (G' = G here)
        let n = g.exponent();
        let half = crate::cyclo::big_rational(1, 2);
        assert_eq!(e.value(0), &CycloNumber::one(n).scalar_mul(&half));
        let z = group::center(&g).members()[1];
        assert_eq!(
            e.value(z),
            &CycloNumber::from_integer(n, -1).scalar_mul(&half)
        );
        assert_eq!(e.support().len(), 2);
    }

    #[test]
    fn heisenberg_character_degrees() {
        for (g, expect_deg) in [(ut(3, 2).unwrap(), 2i64), (ut(3, 3).unwrap(), 3i64)] {
            let pair = center_sign_pair(&g);
            let pi = heisenberg_character(&pair).unwrap();
            assert_eq!(
                pi.degree(),
                &CycloNumber::from_integer(g.exponent(), expect_deg)
            );
        }
    }

    #[test]
    fn abelian_pair_keeps_its_character() {
        let g = abelian(&[4]);
        let full = group::full_subgroup(&g);
        let chi = mult_chars(&full, 4).into_iter().nth(1).unwrap();
        let pair = is_admissible(&g, &full, &chi).unwrap().unwrap();
        let pi = heisenberg_character(&pair).unwrap();
        for x in g.elements() {
            assert_eq!(pi.value(x), &chi.value(x));
        }
        let f = induced_idempotent(&pair).unwrap();
        let quarter = crate::cyclo::big_rational(1, 4);
        assert_eq!(
            f.as_gfunction(),
            &char_function(&chi, 4).scalar_mul(&quarter)
        );
    }

    #[test]
    fn two_pairs_induce_the_same_degree_two_character() {
        // non-uniqueness: the center pair and a Klein/C4 pair with G' = H
        // both induce the degree-2 irreducible of UT(3,2)
        let g = ut(3, 2).unwrap();
        let n = g.exponent();
        let via_center = {
            let pair = center_sign_pair(&g);
            conv::induce(&pair.gamma_prime_emb, &g, &heisenberg_character(&pair).unwrap()).unwrap()
        };
        let z = group::center(&g);
        let subs = group::all_subgroups(&g).unwrap();
        let mut other = None;
        for h in subs.iter().filter(|s| s.order() == 4) {
            for chi in mult_chars(h, n) {
                if chi.exp_of(z.members()[1]) == Some(0) {
                    continue;
                }
                if let Ok(pair) = is_admissible(&g, h, &chi).unwrap() {
                    other = Some(character_from_pair(&pair).unwrap());
                    break;
                }
            }
            if other.is_some() {
                break;
            }
        }
        let other = other.expect("an order-4 admissible pair exists");
        assert_eq!(via_center, other);
        assert_eq!(via_center.degree(), &CycloNumber::from_integer(n, 2));
    }

    #[test]
    fn induced_idempotent_is_minimal_against_oracle_free_pieces() {
        let g = ut(3, 2).unwrap();
        let pair = center_sign_pair(&g);
        let f = induced_idempotent(&pair).unwrap();
        assert!(conv::is_weak_idempotent(f.as_gfunction()));
        let n = g.exponent();
        // f matches the classical degree-2 idempotent: f(1) = 1/2, f(z) = -1/2
        let half = crate::cyclo::big_rational(1, 2);
        assert_eq!(f.value(0), &CycloNumber::one(n).scalar_mul(&half));
    }
}
