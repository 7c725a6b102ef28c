//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uchar_core::cyclo::CycloNumber;
use uchar_core::group::{self, Group};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn partitions(n: u32) -> Vec<Vec<u32>> {
    fn go(n: u32, max: u32) -> Vec<Vec<u32>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for k in (1..=n.min(max)).rev() {
            for mut rest in go(n - k, k) {
                let mut p = vec![k];
                p.append(&mut rest);
                out.push(p);
            }
        }
        out
    }
    go(n, n)
}

/// Invariant lists of every abelian group of order 1..=max, one per
/// isomorphism class (partitions of the exponent at each prime).
pub fn abelian_invariants_up_to(max: usize) -> Vec<Vec<u32>> {
    let mut out = vec![];
    for n in 1..=max as u32 {
        let mut prime_parts: Vec<Vec<Vec<u32>>> = Vec::new();
        let mut rest = n;
        let mut p = 2;
        while p * p <= rest {
            if rest % p == 0 {
                let mut e = 0;
                while rest % p == 0 {
                    rest /= p;
                    e += 1;
                }
                prime_parts.push(
                    partitions(e)
                        .into_iter()
                        .map(|pa| pa.into_iter().map(|k| p.pow(k)).collect())
                        .collect(),
                );
            }
            p += 1;
        }
        if rest > 1 {
            prime_parts.push(vec![vec![rest]]);
        }
        let mut combos: Vec<Vec<u32>> = vec![vec![]];
        for choices in prime_parts {
            let mut next = Vec::new();
            for c in &combos {
                for ch in &choices {
                    let mut c2 = c.clone();
                    c2.extend(ch.iter().copied());
                    next.push(c2);
                }
            }
            combos = next;
        }
        out.extend(combos);
    }
    out
}

/// The quaternion group of order 8 as a Cayley table
/// (ids: 1, -1, i, -i, j, -j, k, -k).
pub fn quaternion() -> Group {
    let dec = |x: usize| -> (i32, usize) { (if x % 2 == 0 { 1 } else { -1 }, x / 2) };
    let enc = |s: i32, axis: usize| -> usize { axis * 2 + usize::from(s < 0) };
    const AXIS: [[(i32, usize); 4]; 4] = [
        [(1, 0), (1, 1), (1, 2), (1, 3)],
        [(1, 1), (-1, 0), (1, 3), (-1, 2)],
        [(1, 2), (-1, 3), (-1, 0), (1, 1)],
        [(1, 3), (1, 2), (-1, 1), (-1, 0)],
    ];
    let rows: Vec<Vec<usize>> = (0..8)
        .map(|a| {
            (0..8)
                .map(|b| {
                    let (sa, xa) = dec(a);
                    let (sb, xb) = dec(b);
                    let (s, axis) = AXIS[xa][xb];
                    enc(sa * sb * s, axis)
                })
                .collect()
        })
        .collect();
    group::group_from_cayley(&rows).expect("quaternion table is a group")
}

/// A small random exact value: a root of unity scaled by a small rational.
pub fn random_cyclo(rng: &mut ChaCha8Rng, n: u32) -> CycloNumber {
    let k = rng.gen_range(0..n as i64);
    let num = rng.gen_range(-3i64..=3);
    let den = rng.gen_range(1i64..=3);
    CycloNumber::root_of_unity(n, k).scalar_mul(&uchar_core::cyclo::big_rational(num, den))
}

/// The nonabelian nilpotent fixtures used across the acceptance suite.
pub fn named_nonabelian() -> Vec<(String, Group)> {
    vec![
        ("ut(3,2)".into(), group::ut(3, 2).unwrap()),
        ("ut(3,3)".into(), group::ut(3, 3).unwrap()),
        (
            "c2 x ut(3,2)".into(),
            group::product(&[group::abelian(&[2]), group::ut(3, 2).unwrap()]),
        ),
    ]
}
