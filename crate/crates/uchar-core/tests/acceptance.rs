//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test -- --nocapture`). All comparisons are exact
//! cyclotomic identities; there are no tolerances anywhere.

mod common;

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{abelian_invariants_up_to, named_nonabelian, quaternion, random_cyclo, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use uchar_core::admissible::{
    character_from_pair, enumerate_admissible_pairs, heisenberg_character, heisenberg_idempotent,
    induced_idempotent, is_admissible,
};
use uchar_core::conv::{
    char_convolve_is_nonzero, char_function, conj_translate, convolve, hecke_subalgebra,
    idempotent_of_char, induce, inner_product, is_partition_of_unity, mackey_condition, restrict,
    ClassFunction, GFunction,
};
use uchar_core::cyclo::CycloNumber;
use uchar_core::dual::mult_chars;
use uchar_core::fourier::{twisted_support, BiFunction, Fourier, GroupAction};
use uchar_core::group::{self, Group, Subgroup};
use uchar_core::oracle::character_table_monomial;
use uchar_core::reduction::{
    character_table_via_reduction, reduction_process, support_in_normalizer, ConditionIii,
};

fn criterion<F: FnOnce()>(num: u32, desc: &str, f: F) {
    let outcome = catch_unwind(AssertUnwindSafe(f));
    match &outcome {
        Ok(()) => println!("criterion {num}: PASS - {desc}"),
        Err(_) => println!("criterion {num}: FAIL - {desc}"),
    }
    if let Err(e) = outcome {
        resume_unwind(e);
    }
}

fn tables_match(g: &Group) -> bool {
    let n = g.exponent();
    let oracle = character_table_monomial(g, n, 256).expect("oracle table");
    let pairs = character_table_via_reduction(g, n, 256).expect("reduction table");
    // both sides are sorted by (degree, values); exact row equality is
    // row-permutation equality
    oracle.chars == pairs.characters()
}

#[test]
fn criterion_1_dual_path_named_groups() {
    criterion(
        1,
        "dual-path table equality on ut(3,2), ut(3,3), c2 x ut(3,2), ut(4,2)",
        || {
            for (name, g) in named_nonabelian() {
                let t0 = Instant::now();
                assert!(tables_match(&g), "table mismatch for {name}");
                println!("  {name}: both paths agree ({:?})", t0.elapsed());
            }
            let t0 = Instant::now();
            let g = group::ut(4, 2).unwrap();
            assert!(tables_match(&g), "table mismatch for ut(4,2)");
            println!("  ut(4,2): both paths agree ({:?})", t0.elapsed());
        },
    );
}

#[test]
fn criterion_1_dual_path_all_abelian_up_to_32() {
    criterion(1, "dual-path table equality on all abelian groups of order <= 32", || {
        for inv in abelian_invariants_up_to(32) {
            let g = group::abelian(&inv);
            let t0 = Instant::now();
            assert!(tables_match(&g), "table mismatch for abelian {inv:?}");
            let dt = t0.elapsed();
            assert!(dt.as_secs() < 10, "abelian {inv:?} exceeded the 10 s budget: {dt:?}");
        }
    });
}

#[test]
fn criterion_2_known_counts_for_ut3p() {
    criterion(2, "ut(3,p) has p^2+p-1 irreducibles with p-1 of degree p", || {
        for p in [2u32, 3] {
            let g = group::ut(3, p).unwrap();
            let table = character_table_monomial(&g, g.exponent(), 256).unwrap();
            let degs = table.degrees();
            let expect_total = (p * p + p - 1) as usize;
            assert_eq!(degs.len(), expect_total, "count for p={p}");
            assert_eq!(
                degs.iter().filter(|&&d| d == p as usize).count(),
                (p - 1) as usize,
                "degree-p count for p={p}"
            );
            assert_eq!(
                degs.iter().filter(|&&d| d == 1).count(),
                expect_total - (p - 1) as usize,
                "linear count for p={p}"
            );
        }
    });
}

#[test]
fn criterion_3_idempotent_bijection_and_partition_of_unity() {
    criterion(3, "primitive idempotents are pairwise orthogonal and sum to delta", || {
        let mut groups: Vec<Group> = named_nonabelian().into_iter().map(|(_, g)| g).collect();
        groups.push(group::ut(4, 2).unwrap());
        groups.push(quaternion());
        for inv in abelian_invariants_up_to(32) {
            groups.push(group::abelian(&inv));
        }
        for g in groups {
            let n = g.exponent();
            let table = character_table_monomial(&g, n, 256).unwrap();
            let es: Vec<ClassFunction> = table
                .chars
                .iter()
                .map(|c| idempotent_of_char(c).expect("irreducible rows"))
                .collect();
            assert_eq!(es.len(), g.class_count());
            assert!(is_partition_of_unity(&es), "partition fails for order {}", g.order());
            for (i, a) in es.iter().enumerate() {
                for (j, b) in es.iter().enumerate() {
                    let p = convolve(a.as_gfunction(), b.as_gfunction()).unwrap();
                    if i == j {
                        assert_eq!(&p, a.as_gfunction(), "e*e != e at row {i}");
                    } else {
                        assert!(p.is_zero(), "e_i * e_j != 0 at ({i}, {j})");
                    }
                }
            }
        }
    });
}

#[test]
fn criterion_4_mackey_equivalence_exhaustive() {
    criterion(
        4,
        "Mackey: <ind chi, ind chi> = 1 iff the convolution condition, over all subgroup characters",
        || {
            let mut groups: Vec<Group> = named_nonabelian().into_iter().map(|(_, g)| g).collect();
            groups.push(quaternion());
            for inv in abelian_invariants_up_to(32) {
                groups.push(group::abelian(&inv));
            }
            let mut checked = 0usize;
            for g in &groups {
                let n = g.exponent();
                for sub in group::all_subgroups(g).unwrap() {
                    let emb = sub.as_group();
                    for chi in mult_chars(&sub, n) {
                        // left side: irreducibility of the induced character
                        let local = restrict(&char_function(&chi, n), &emb);
                        let local = ClassFunction::new(local).unwrap();
                        let ind = induce(&emb, g, &local).unwrap();
                        let irreducible = inner_product(ind.as_gfunction(), ind.as_gfunction())
                            .unwrap()
                            == CycloNumber::one(n);
                        // right side: ebar * delta_x * ebar = 0 outside the subgroup
                        let e = local.as_gfunction().scalar_mul(
                            &uchar_core::cyclo::big_rational(1, sub.order() as i64),
                        );
                        let mackey = mackey_condition(&emb, g, &e).unwrap();
                        assert_eq!(
                            irreducible, mackey.holds,
                            "equivalence fails in order-{} group at subgroup {:?}",
                            g.order(),
                            sub.members()
                        );
                        checked += 1;
                    }
                }
            }
            // the planted failure: sign of C2 inside C4 is reducible and
            // violates the convolution condition with witness x = 1
            let c4 = group::abelian(&[4]);
            let c2 = group::all_subgroups(&c4)
                .unwrap()
                .into_iter()
                .find(|s| s.order() == 2)
                .unwrap();
            let sign = mult_chars(&c2, 4)
                .into_iter()
                .find(|c| !c.is_trivial())
                .unwrap();
            let emb = c2.as_group();
            let local =
                ClassFunction::new(restrict(&char_function(&sign, 4), &emb)).unwrap();
            let ind = induce(&emb, &c4, &local).unwrap();
            assert_ne!(
                inner_product(ind.as_gfunction(), ind.as_gfunction()).unwrap(),
                CycloNumber::one(4),
                "planted case must be reducible"
            );
            let e = local
                .as_gfunction()
                .scalar_mul(&uchar_core::cyclo::big_rational(1, 2));
            let report = mackey_condition(&emb, &c4, &e).unwrap();
            assert!(!report.holds);
            assert_eq!(report.witness, Some(1), "first violating element");
            println!("  {checked} (subgroup, character) pairs checked, both directions");
        },
    );
}

#[test]
fn criterion_5_fourier_decomposition() {
    criterion(5, "Fourier decomposition: exact components, projectors, round trips", || {
        let mut r = rng(0x5EED_0005);
        for inv in abelian_invariants_up_to(16) {
            let a = group::abelian(&inv);
            let n = a.exponent();
            let fr = Fourier::new(&a, n).unwrap();
            let mut actions = vec![
                GroupAction::translation(&a),
                GroupAction::trivial(&a, 7.min(16)),
            ];
            let subs = group::all_subgroups(&a).unwrap();
            for _ in 0..2 {
                let s = subs.choose(&mut r).unwrap();
                actions.push(GroupAction::coset_action(&a, s));
            }
            for action in actions {
                assert!(action.set_size() <= 16);
                let f: Vec<CycloNumber> =
                    (0..action.set_size()).map(|_| random_cyclo(&mut r, n)).collect();
                // components sum to f and are chi-equivariant
                let comps = fr.decompose(&action, &f).unwrap();
                let mut sum = vec![CycloNumber::zero(n); f.len()];
                for comp in &comps {
                    for (s, v) in sum.iter_mut().zip(comp) {
                        *s = s.add(v);
                    }
                }
                assert_eq!(sum, f, "components must sum to F");
                for (chi, comp) in comps.iter().enumerate() {
                    for b in a.elements() {
                        let e = fr.dual.characters[chi].exp_of(b).unwrap();
                        let cv = CycloNumber::root_of_unity(n, e as i64);
                        for x in 0..f.len() {
                            assert_eq!(
                                comp[action.act(a.inv(b), x)],
                                cv.mul(&comp[x]),
                                "equivariance of component {chi}"
                            );
                        }
                    }
                    // projector idempotence
                    let again = fr.decompose(&action, comp).unwrap();
                    for (j, piece) in again.iter().enumerate() {
                        if j == chi {
                            assert_eq!(piece, comp);
                        } else {
                            assert!(piece.iter().all(CycloNumber::is_zero));
                        }
                    }
                }
                // Pi_! (F o alpha^*) = id, and the lift is quasi-invariant
                let lifted = fr.lift(&action, &f).unwrap();
                assert_eq!(fr.is_quasi_invariant(&action, &lifted).unwrap(), None);
                assert_eq!(fr.pi_shriek(&lifted).unwrap(), f);
            }
        }
    });
}

#[test]
fn criterion_6_twisted_coset_support() {
    criterion(6, "twisted transform vanishes off a single character coset, exact dimensions", || {
        let mut r = rng(0x5EED_0006);
        let mut groups: Vec<Group> = named_nonabelian().into_iter().map(|(_, g)| g).collect();
        groups.push(quaternion());
        groups.push(group::abelian(&[4, 2, 2]));
        groups.push(group::abelian(&[8, 2]));
        let mut instances = 0usize;
        for g in &groups {
            let n = g.exponent();
            let subs = group::all_subgroups(g).unwrap();
            for a1 in &subs {
                if a1.order() == 1 {
                    continue;
                }
                for a in &subs {
                    if a.order() >= a1.order()
                        || !a.members().iter().all(|&x| a1.contains(x))
                    {
                        continue;
                    }
                    // need A normal in A1 with abelian quotient
                    let ok_structure = a1.members().iter().all(|&x| {
                        a.members().iter().all(|&h| a.contains(g.conj(x, h)))
                            && a1
                                .members()
                                .iter()
                                .all(|&y| a.contains(g.commutator(x, y)))
                    });
                    if !ok_structure {
                        continue;
                    }
                    for nchar in mult_chars(a, n) {
                        // the extension precondition: N kills commutators of A1
                        let kills = a1.members().iter().all(|&x| {
                            a1.members()
                                .iter()
                                .all(|&y| nchar.exp_of(g.commutator(x, y)) == Some(0))
                        });
                        if !kills || r.gen_range(0..4) != 0 {
                            continue;
                        }
                        // random equivariant input on A1 x {3 points}
                        let cols = 3usize;
                        let mut f = BiFunction::zero(a1.order(), cols, n);
                        let mut assigned = vec![false; a1.order()];
                        for p1 in 0..a1.order() {
                            if assigned[p1] {
                                continue;
                            }
                            for x in 0..cols {
                                f.set(p1, x, random_cyclo(&mut r, n));
                            }
                            assigned[p1] = true;
                            for (pa, &am) in a.members().iter().enumerate() {
                                let shifted =
                                    a1.pos_of(g.mul(am, a1.members()[p1])).unwrap();
                                if shifted == p1 {
                                    continue;
                                }
                                let root = CycloNumber::root_of_unity(
                                    n,
                                    nchar.exp_at_pos(pa) as i64,
                                );
                                for x in 0..cols {
                                    f.set(shifted, x, root.mul(f.get(p1, x)));
                                }
                                assigned[shifted] = true;
                            }
                        }
                        // twisted_support errors out on any support leak
                        let ts = twisted_support(a1, a, &nchar, &f).unwrap();
                        assert!(ts.dimension_ok, "|A1/A| . |X| dimension identity");
                        assert_eq!(
                            ts.coset.len() * a.order(),
                            a1.order(),
                            "coset size is the index"
                        );
                        instances += 1;
                    }
                }
            }
        }
        assert!(instances >= 50, "only {instances} randomized instances built");
        println!("  {instances} randomized equivariant instances, no support leaks");
    });
}

#[test]
fn criterion_7_support_lemma_randomized() {
    criterion(7, "chibar * M vanishes outside the stabilizer for 100 random invariant M", || {
        let mut r = rng(0x5EED_0007);
        let mut groups: Vec<Group> = named_nonabelian().into_iter().map(|(_, g)| g).collect();
        groups.push(quaternion());
        groups.push(group::abelian(&[6, 2]));
        groups.push(group::ut(4, 2).unwrap());
        let mut instances = 0usize;
        'outer: loop {
            for g in &groups {
                let n = g.exponent();
                let normals = group::normal_subgroups(g, 256).unwrap();
                let a = normals.choose(&mut r).unwrap().clone();
                let chars = mult_chars(&a, n);
                let chi = chars.choose(&mut r).unwrap().clone();
                // a random function made A-conjugation-invariant by averaging
                let mut raw = GFunction::zero(g, n);
                for x in g.elements() {
                    raw.set(x, random_cyclo(&mut r, n));
                }
                let mut m = GFunction::zero(g, n);
                for &am in a.members() {
                    m = m.add(&conj_translate(&raw, am));
                }
                // support_in_normalizer hard-errors on any support leak
                let report = support_in_normalizer(g, &a, &chi, &m).unwrap();
                for x in g.elements() {
                    if !report.stabilizer.contains(x) {
                        assert!(report.convolution.value(x).is_zero());
                    }
                }
                instances += 1;
                if instances >= 100 {
                    break 'outer;
                }
            }
        }
        println!("  {instances} random instances, support always inside the stabilizer");
    });
}

#[test]
fn criterion_8_reduction_soundness() {
    criterion(8, "reduction outputs are admissible, compatible, seed-extending; driver uses #classes iterations", || {
        let mut driver_groups: Vec<Group> =
            named_nonabelian().into_iter().map(|(_, g)| g).collect();
        driver_groups.push(group::abelian(&[4]));
        driver_groups.push(group::abelian(&[2, 2, 2]));
        driver_groups.push(group::abelian(&[12]));
        driver_groups.push(quaternion());
        for g in &driver_groups {
            let n = g.exponent();
            let table = character_table_via_reduction(g, n, 256).unwrap();
            assert_eq!(
                table.iterations,
                g.class_count(),
                "driver iterations for order {}",
                g.order()
            );
            let es: Vec<ClassFunction> = table.rows.iter().map(|r| r.idempotent.clone()).collect();
            assert!(is_partition_of_unity(&es));
            for row in &table.rows {
                // re-certify admissibility from scratch
                let again = is_admissible(g, row.pair.subgroup(), row.pair.character())
                    .unwrap()
                    .unwrap_or_else(|f| panic!("pair must re-verify: {f}"));
                assert_eq!(again.normalizer().members(), row.pair.normalizer().members());
                // condition (iii) dichotomy
                match &row.condition_iii {
                    ConditionIii::NormalizerIsFull => {
                        assert!(row.pair.normalizer().is_full());
                    }
                    ConditionIii::WitnessB { members } => {
                        let b = Subgroup::new(g.clone(), members.clone()).unwrap();
                        assert!(b.is_normal(), "witness B must be normal");
                        assert!(members.iter().all(|&x| row.pair.subgroup().contains(x)));
                        let restricted = row.pair.character().restrict_to(&b);
                        assert!(
                            g.elements().any(|x| !restricted.fixed_by(x)),
                            "L restricted to B must be moved by conjugation"
                        );
                    }
                }
            }
        }
        // explicit nontrivial seeds: central characters compatible with delta
        for (name, g) in named_nonabelian() {
            let n = g.exponent();
            let z = group::center(&g);
            let m = ClassFunction::delta_identity(&g, n);
            for nchar in mult_chars(&z, n) {
                if !char_convolve_is_nonzero(&nchar, m.as_gfunction()) {
                    continue;
                }
                let out = reduction_process(&g, &m, &z, &nchar).unwrap();
                assert!(
                    char_convolve_is_nonzero(out.pair.character(), m.as_gfunction()),
                    "compatibility Lbar * M != 0 for {name}"
                );
                for &x in z.members() {
                    assert!(out.pair.subgroup().contains(x), "A inside H for {name}");
                    assert_eq!(
                        out.pair.character().exp_of(x),
                        nchar.exp_of(x),
                        "L restricts to N on A for {name}"
                    );
                }
            }
        }
    });
}

#[test]
fn criterion_9_admissible_pair_structure() {
    criterion(9, "pair structure: square indices, Heisenberg degrees, restriction law, idempotent match", || {
        let mut groups: Vec<Group> = vec![
            group::ut(3, 2).unwrap(),
            group::ut(3, 3).unwrap(),
            group::abelian(&[4, 2]),
            quaternion(),
        ];
        groups.push(group::product(&[group::abelian(&[2]), group::ut(3, 2).unwrap()]));
        for g in groups {
            let n = g.exponent();
            let oracle = character_table_monomial(&g, n, 256).unwrap();
            let enumerated = enumerate_admissible_pairs(&g, &oracle.chars, 256).unwrap();
            assert!(
                enumerated.coverage.iter().all(|hits| !hits.is_empty()),
                "every irreducible arises from an admissible pair (order {})",
                g.order()
            );
            for w in &enumerated.entries {
                let index = w.pair.quotient_index();
                let root = (1..=index).find(|d| d * d == index);
                let deg = root.expect("index is a perfect square");
                let pi = heisenberg_character(&w.pair).unwrap();
                assert_eq!(pi.degree(), &CycloNumber::from_integer(n, deg as i64));
                // pi acts on H by chi
                let emb = w.pair.normalizer_embedding();
                for &h in w.pair.subgroup().members() {
                    let local = emb.to_local(h).unwrap();
                    let expect = w
                        .pair
                        .character()
                        .value(h)
                        .scalar_mul(&uchar_core::cyclo::big_rational(deg as i64, 1));
                    assert_eq!(pi.value(local), &expect, "pi restricted to H");
                }
                let f = induced_idempotent(&w.pair).unwrap();
                let chi_g = character_from_pair(&w.pair).unwrap();
                assert_eq!(f, idempotent_of_char(&chi_g).unwrap());
                assert_eq!(&chi_g, &oracle.chars[w.char_index]);
            }
            // non-uniqueness is observable on ut(3,2)
            if g.order() == 8 && g.presentation().is_some() {
                let two = enumerated
                    .coverage
                    .iter()
                    .filter(|hits| hits.len() >= 2)
                    .count();
                assert!(two > 0, "some irreducible has several admissible pairs");
            }
        }
    });
}

#[test]
fn criterion_10_hecke_unit() {
    criterion(10, "Heisenberg idempotent is a two-sided unit of its Hecke algebra of dimension [G':H]", || {
        let groups = vec![
            group::ut(3, 2).unwrap(),
            group::ut(3, 3).unwrap(),
            group::abelian(&[4, 2]),
            quaternion(),
        ];
        for g in groups {
            let n = g.exponent();
            let oracle = character_table_monomial(&g, n, 256).unwrap();
            let enumerated = enumerate_admissible_pairs(&g, &oracle.chars, 256).unwrap();
            for w in &enumerated.entries {
                let e = heisenberg_idempotent(&w.pair).unwrap();
                let emb = w.pair.normalizer_embedding();
                let hecke = hecke_subalgebra(&emb.group, e.as_gfunction()).unwrap();
                assert!(hecke.unit_verified, "e' must be a two-sided unit");
                assert_eq!(
                    hecke.dim,
                    w.pair.quotient_index(),
                    "Hecke dimension equals [G':H]"
                );
            }
        }
    });
}
