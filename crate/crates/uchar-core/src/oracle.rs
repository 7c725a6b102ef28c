//! Independent ground-truth character tables by monomial induction: every
//! irreducible character of a finite nilpotent group is induced from a
//! linear character of some subgroup. This path shares only the group,
//! cyclotomic and convolution primitives with the admissible-pair
//! machinery, and is used to cross-validate it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::conv::{induce, inner_product, ClassFunction, ConvError, GFunction};
use crate::cyclo::CycloNumber;
use crate::dual::mult_chars;
use crate::group::{self, Group, GroupError};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Conv(#[from] ConvError),
    #[error("monomial search on a nilpotent group produced an incomplete table: {found} of {classes} characters, degree mass {mass}")]
    IncompleteTable {
        found: usize,
        classes: usize,
        mass: String,
    },
}

/// A character table: rows sorted by (degree, class values), exact entries.
pub struct CharTable {
    pub group: Group,
    pub conductor: u32,
    pub chars: Vec<ClassFunction>,
    /// False when the input was not nilpotent and the monomial search is not
    /// guaranteed to see everything.
    pub complete: bool,
}

impl CharTable {
    pub fn degrees(&self) -> Vec<usize> {
        self.chars
            .iter()
            .map(|c| {
                let d = c.degree().as_rational().expect("degrees are integers");
                assert!(d.is_integer());
                d.to_integer().to_usize().expect("desk-scale degree")
            })
            .collect()
    }

    /// Class-value rows in table order (one value per conjugacy class).
    pub fn rows(&self) -> Vec<Vec<CycloNumber>> {
        self.chars.iter().map(|c| c.class_values()).collect()
    }
}

/// Sort key used everywhere a table is ordered: degree first, then the
/// class-value vector in the coefficient ordering of [`CycloNumber`].
pub fn table_sort_key(chi: &ClassFunction) -> (BigRational, Vec<CycloNumber>) {
    (
        chi.degree().as_rational().expect("character degrees are rational integers"),
        chi.class_values(),
    )
}

/// Exhaustive monomial search: induce every multiplicative character of
/// every subgroup, keep the irreducible results, deduplicate, and validate
/// completeness against the class count.
pub fn character_table_monomial(
    gamma: &Group,
    conductor: u32,
    subgroup_cap: usize,
) -> Result<CharTable, OracleError> {
    let nilpotent = group::is_nilpotent(gamma);
    let subgroups = group::all_subgroups_with_cap(gamma, subgroup_cap)?;
    let order = gamma.order();
    let one = CycloNumber::one(conductor);
    let per_subgroup: Vec<Vec<ClassFunction>> = subgroups
        .par_iter()
        .map(|l| -> Result<Vec<ClassFunction>, OracleError> {
            // an induced linear character has degree [G:L]; it cannot be
            // irreducible once that degree squared exceeds |G|
            if l.index() * l.index() > order {
                return Ok(Vec::new());
            }
            let emb = l.as_group();
            let mut hits = Vec::new();
            for lambda in mult_chars(l, conductor) {
                let mut f = GFunction::zero(&emb.group, conductor);
                for (pos, &h) in l.members().iter().enumerate() {
                    let local = emb.to_local(h).expect("member");
                    f.set(
                        local,
                        CycloNumber::root_of_unity(conductor, lambda.exp_at_pos(pos) as i64),
                    );
                }
                let f = ClassFunction::new(f).expect("multiplicative characters are class functions");
                let ind = induce(&emb, gamma, &f)?;
                if inner_product(ind.as_gfunction(), ind.as_gfunction())? == one {
                    hits.push(ind);
                }
            }
            Ok(hits)
        })
        .collect::<Result<_, _>>()?;
    let mut seen = std::collections::BTreeMap::new();
    for chi in per_subgroup.into_iter().flatten() {
        seen.entry(table_sort_key(&chi)).or_insert(chi);
    }
    let chars: Vec<ClassFunction> = seen.into_values().collect();
    let classes = gamma.class_count();
    let mass: BigRational = chars
        .iter()
        .map(|c| {
            let d = c.degree().as_rational().expect("integer degree");
            &d * &d
        })
        .fold(BigRational::zero(), |a, b| a + b);
    let complete =
        chars.len() == classes && mass == BigRational::from_integer(BigInt::from(order));
    if nilpotent && !complete {
        return Err(OracleError::IncompleteTable {
            found: chars.len(),
            classes,
            mass: mass.to_string(),
        });
    }
    Ok(CharTable {
        group: gamma.clone(),
        conductor,
        chars,
        complete,
    })
}

/// Table validation report: every violated identity is listed.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check first and second orthogonality, the degree mass, positivity and
/// integrality of degrees, and closure under complex conjugation.
pub fn validate_table(gamma: &Group, chars: &[ClassFunction]) -> ValidationReport {
    let mut report = ValidationReport::default();
    let Some(first) = chars.first() else {
        report.violations.push("empty table".into());
        return report;
    };
    let n = first.conductor();
    let one = CycloNumber::one(n);
    for (i, chi) in chars.iter().enumerate() {
        match chi.degree().as_rational() {
            Some(d) if d.is_integer() && d > BigRational::zero() => {}
            _ => report
                .violations
                .push(format!("degree of row {i} is not a positive integer")),
        }
    }
    for (i, chi) in chars.iter().enumerate() {
        for (j, psi) in chars.iter().enumerate() {
            let ip = inner_product(chi.as_gfunction(), psi.as_gfunction())
                .expect("same group");
            let expect_one = i == j;
            if expect_one && ip != one {
                report
                    .violations
                    .push(format!("first orthogonality: <chi_{i}, chi_{i}> = {ip} != 1"));
            }
            if !expect_one && !ip.is_zero() {
                report
                    .violations
                    .push(format!("first orthogonality: <chi_{i}, chi_{j}> = {ip} != 0"));
            }
        }
    }
    // second orthogonality: sum_chi chi(x) conj(chi(y)) = |C(x)| [x ~ y]
    let cc = gamma.conjugacy_classes();
    for (kx, cx) in cc.classes.iter().enumerate() {
        let x = cx[0];
        for (ky, cy) in cc.classes.iter().enumerate() {
            let y = cy[0];
            let mut acc = CycloNumber::zero(n);
            for chi in chars {
                acc = acc.add(&chi.value(x).mul(&chi.value(y).conj()));
            }
            let expect = if kx == ky {
                CycloNumber::from_integer(n, (gamma.order() / cx.len()) as i64)
            } else {
                CycloNumber::zero(n)
            };
            if acc != expect {
                report.violations.push(format!(
                    "second orthogonality fails at classes ({kx}, {ky}): {acc} != {expect}"
                ));
            }
        }
    }
    let mass: BigRational = chars
        .iter()
        .filter_map(|c| c.degree().as_rational())
        .map(|d| &d * &d)
        .fold(BigRational::zero(), |a, b| a + b);
    if mass != BigRational::from_integer(BigInt::from(gamma.order())) {
        report
            .violations
            .push(format!("degree mass {mass} != |G| = {}", gamma.order()));
    }
    for (i, chi) in chars.iter().enumerate() {
        let conj_values: Vec<CycloNumber> =
            chi.class_values().iter().map(CycloNumber::conj).collect();
        if !chars.iter().any(|c| c.class_values() == conj_values) {
            report
                .violations
                .push(format!("table is not closed under conjugation at row {i}"));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::{convolve, idempotent_of_char, is_partition_of_unity};
    use crate::group::{abelian, ut};

    #[test]
    fn c2_table() {
        let g = abelian(&[2]);
        let t = character_table_monomial(&g, 2, 256).unwrap();
        assert_eq!(t.degrees(), vec![1, 1]);
        assert!(t.complete);
        assert!(validate_table(&g, &t.chars).ok());
    }

    #[test]
    fn ut32_table() {
        let g = ut(3, 2).unwrap();
        let t = character_table_monomial(&g, g.exponent(), 256).unwrap();
        assert_eq!(t.degrees(), vec![1, 1, 1, 1, 2]);
        assert!(validate_table(&g, &t.chars).ok());
    }

    #[test]
    fn ut33_table() {
        let g = ut(3, 3).unwrap();
        let t = character_table_monomial(&g, g.exponent(), 256).unwrap();
        let degs = t.degrees();
        assert_eq!(degs.len(), 11);
        assert_eq!(degs.iter().filter(|&&d| d == 1).count(), 9);
        assert_eq!(degs.iter().filter(|&&d| d == 3).count(), 2);
        assert!(validate_table(&g, &t.chars).ok());
    }

    #[test]
    fn validation_catches_duplicated_row() {
        let g = abelian(&[4]);
        let t = character_table_monomial(&g, 4, 256).unwrap();
        let mut bad = t.chars.clone();
        bad[1] = bad[0].clone();
        let report = validate_table(&g, &bad);
        assert!(!report.ok());
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("first orthogonality")));
    }

    #[test]
    fn oracle_idempotents_partition_unity() {
        let g = ut(3, 2).unwrap();
        let t = character_table_monomial(&g, g.exponent(), 256).unwrap();
        let es: Vec<ClassFunction> = t.chars.iter().map(|c| idempotent_of_char(c).unwrap()).collect();
        assert!(is_partition_of_unity(&es));
        for (i, a) in es.iter().enumerate() {
            for (j, b) in es.iter().enumerate() {
                let p = convolve(a.as_gfunction(), b.as_gfunction()).unwrap();
                if i == j {
                    assert_eq!(&p, a.as_gfunction());
                } else {
                    assert!(p.is_zero());
                }
            }
        }
    }
}
