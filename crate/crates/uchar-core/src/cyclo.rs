//! Exact arithmetic in the cyclotomic field Q(zeta_N).
//!
//! Elements are stored in canonical form: a coefficient vector of exact
//! rationals in the power basis of Q[x]/Phi_N(x), always reduced modulo the
//! N-th cyclotomic polynomial. Equality is therefore coefficient-wise and
//! all identity checks elsewhere in the crate are exact. Floating point
//! enters only through [`CycloNumber::to_float`], which is diagnostic.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CycloError {
    #[error("conductor mismatch: cannot embed Q(zeta_{from}) into Q(zeta_{to}); {from} does not divide {to}")]
    ConductorMismatch { from: u32, to: u32 },
    #[error("division by zero in Q(zeta_{0})")]
    DivisionByZero(u32),
}

/// Euler totient.
pub fn euler_phi(n: u32) -> u32 {
    let mut n = n;
    let mut result = n;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

fn divisors(n: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for d in 1..=n {
        if n % d == 0 {
            out.push(d);
        }
    }
    out
}

/// Monic integer coefficients of Phi_n, lowest degree first, length phi(n)+1.
///
/// Computed by dividing x^n - 1 by the cyclotomic polynomials of the proper
/// divisors of n; results are cached process-wide.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<BigInt>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<BigInt>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Arc::clone(hit);
    }
    // x^n - 1
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in divisors(n) {
        if d == n {
            continue;
        }
        let phi_d = cyclotomic_polynomial(d);
        num = poly_div_exact(&num, &phi_d);
    }
    let arc = Arc::new(num);
    cache.lock().unwrap().insert(n, Arc::clone(&arc));
    arc
}

/// Reductions of the overflow powers: row j holds the coefficients of
/// x^(phi(n)+j) mod Phi_n in the power basis, precomputed once per
/// conductor so products reduce by direct accumulation instead of repeated
/// polynomial division.
fn reduction_rows(n: u32) -> Arc<Vec<Vec<BigRational>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<Vec<BigRational>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&n) {
        return Arc::clone(hit);
    }
    let phi = euler_phi(n) as usize;
    let modulus = cyclotomic_polynomial(n);
    let max_power = (2 * phi).max(n as usize + 1);
    let mut rows: Vec<Vec<BigRational>> = Vec::with_capacity(max_power - phi);
    // x^phi = -(lower part of Phi_n)
    let first: Vec<BigRational> = (0..phi)
        .map(|j| BigRational::from_integer(-modulus[j].clone()))
        .collect();
    rows.push(first);
    for _ in phi + 1..max_power {
        let prev = rows.last().unwrap();
        // multiply by x: shift, then fold the overflow coefficient
        let carry = prev[phi - 1].clone();
        let mut next = vec![BigRational::zero(); phi];
        for j in 1..phi {
            next[j] = prev[j - 1].clone();
        }
        if !carry.is_zero() {
            for j in 0..phi {
                next[j] += &carry * &rows[0][j];
            }
        }
        rows.push(next);
    }
    let arc = Arc::new(rows);
    cache.lock().unwrap().insert(n, Arc::clone(&arc));
    arc
}

/// Exact division of integer polynomials (the divisor is monic and divides).
fn poly_div_exact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let dn = num.len() - 1;
    let dd = den.len() - 1;
    assert!(den[dd].is_one(), "divisor must be monic");
    let mut rem = num.to_vec();
    let mut quot = vec![BigInt::zero(); dn - dd + 1];
    for i in (dd..=dn).rev() {
        let c = std::mem::replace(&mut rem[i], BigInt::zero());
        if c.is_zero() {
            continue;
        }
        for j in 0..dd {
            rem[i - dd + j] -= &c * &den[j];
        }
        quot[i - dd] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero), "division not exact");
    quot
}

/// An exact element of Q(zeta_n) in the reduced power basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CycloNumber {
    n: u32,
    /// Length phi(n); coefficient of zeta_n^i at index i, reduced mod Phi_n.
    coeffs: Vec<BigRational>,
}

impl CycloNumber {
    pub fn zero(n: u32) -> Self {
        CycloNumber {
            n,
            coeffs: vec![BigRational::zero(); euler_phi(n) as usize],
        }
    }

    pub fn one(n: u32) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_rational(n: u32, r: BigRational) -> Self {
        let mut x = Self::zero(n);
        // phi(1) = 1 with Phi_1 = x - 1, so index 0 is valid for every n.
        x.coeffs[0] = r;
        if n == 1 {
            return x;
        }
        x
    }

    pub fn from_integer(n: u32, k: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(BigInt::from(k)))
    }

    /// zeta_n^k, with k taken mod n.
    pub fn root_of_unity(n: u32, k: i64) -> Self {
        let k = k.rem_euclid(n as i64) as usize;
        let mut raw = vec![BigRational::zero(); n as usize];
        raw[k] = BigRational::one();
        Self::reduce(n, raw)
    }

    fn reduce(n: u32, mut raw: Vec<BigRational>) -> Self {
        let phi = euler_phi(n) as usize;
        if raw.len() > phi {
            let rows = reduction_rows(n);
            for i in phi..raw.len() {
                let c = std::mem::replace(&mut raw[i], BigRational::zero());
                if c.is_zero() {
                    continue;
                }
                let row = &rows[i - phi];
                for j in 0..phi {
                    if !row[j].is_zero() {
                        raw[j] += &c * &row[j];
                    }
                }
            }
        }
        raw.truncate(phi);
        raw.resize(phi, BigRational::zero());
        CycloNumber { n, coeffs: raw }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The rational value if this element lies in Q, i.e. only the constant
    /// coefficient is nonzero.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    fn assert_same(&self, other: &Self) {
        assert_eq!(
            self.n, other.n,
            "conductor mismatch in arithmetic ({} vs {}); use embed first",
            self.n, other.n
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        CycloNumber { n: self.n, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same(other);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        CycloNumber { n: self.n, coeffs }
    }

    pub fn neg(&self) -> Self {
        CycloNumber {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }

    pub fn scalar_mul(&self, r: &BigRational) -> Self {
        CycloNumber {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        let phi = self.coeffs.len();
        // Fast path when one factor is c * zeta^k (the common case: character
        // values); plain shift then reduce.
        fn monomial(x: &CycloNumber) -> Option<(usize, &BigRational)> {
            let mut hit = None;
            for (i, c) in x.coeffs.iter().enumerate() {
                if !c.is_zero() {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some((i, c));
                }
            }
            hit
        }
        if let Some((k, c)) = monomial(other) {
            let mut raw = vec![BigRational::zero(); phi + k];
            for (i, a) in self.coeffs.iter().enumerate() {
                if !a.is_zero() {
                    raw[i + k] = a * c;
                }
            }
            return Self::reduce(self.n, raw);
        }
        if let Some((k, c)) = monomial(self) {
            let mut raw = vec![BigRational::zero(); phi + k];
            for (i, a) in other.coeffs.iter().enumerate() {
                if !a.is_zero() {
                    raw[i + k] = a * c;
                }
            }
            return Self::reduce(self.n, raw);
        }
        let mut raw = vec![BigRational::zero(); 2 * phi];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Self::reduce(self.n, raw)
    }

    /// Complex conjugation, the field automorphism zeta -> zeta^{-1}.
    pub fn conj(&self) -> Self {
        let n = self.n as usize;
        let mut raw = vec![BigRational::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                raw[(n - i) % n] += c;
            }
        }
        Self::reduce(self.n, raw)
    }

    /// The field embedding Q(zeta_m) -> Q(zeta_n) sending zeta_m to
    /// zeta_n^{n/m}; requires m | n.
    pub fn embed(&self, n: u32) -> Result<Self, CycloError> {
        if n % self.n != 0 {
            return Err(CycloError::ConductorMismatch { from: self.n, to: n });
        }
        if n == self.n {
            return Ok(self.clone());
        }
        let step = (n / self.n) as usize;
        let mut raw = vec![BigRational::zero(); (self.coeffs.len() - 1) * step + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                raw[i * step] = c.clone();
            }
        }
        Ok(Self::reduce(n, raw))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against
    /// Phi_n in Q[x].
    pub fn inverse(&self) -> Result<Self, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero(self.n));
        }
        let modulus: Vec<BigRational> = cyclotomic_polynomial(self.n)
            .iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect();
        let inv = poly_modular_inverse(&self.coeffs, &modulus);
        Ok(Self::reduce(self.n, inv))
    }

    /// Floating-point approximation (diagnostics only; correctness never
    /// relies on this).
    pub fn to_float(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = c.numer().to_f64().unwrap_or(f64::NAN) / c.denom().to_f64().unwrap_or(f64::NAN);
            let theta = 2.0 * std::f64::consts::PI * (i as f64) / (self.n as f64);
            acc += Complex64::new(theta.cos(), theta.sin()) * r;
        }
        acc
    }
}

/// Inverse of `a` modulo `m` (monic up to scaling) in Q[x]; `a` must be
/// coprime to `m`, which holds for every nonzero residue mod Phi_n.
fn poly_modular_inverse(a: &[BigRational], m: &[BigRational]) -> Vec<BigRational> {
    type P = Vec<BigRational>;
    fn deg(p: &[BigRational]) -> Option<usize> {
        p.iter().rposition(|c| !c.is_zero())
    }
    fn rem_quot(num: &[BigRational], den: &[BigRational]) -> (P, P) {
        let dd = deg(den).expect("division by zero polynomial");
        let lead = den[dd].clone();
        let mut rem = num.to_vec();
        let mut quot = vec![BigRational::zero(); num.len()];
        while let Some(dn) = deg(&rem) {
            if dn < dd {
                break;
            }
            let c = &rem[dn] / &lead;
            for j in 0..=dd {
                let t = &c * &den[j];
                rem[dn - dd + j] -= t;
            }
            quot[dn - dd] += c;
        }
        (quot, rem)
    }
    fn add_scaled(target: &mut P, quot: &[BigRational], src: &[BigRational]) {
        // target -= quot * src
        let out_len = target.len().max(quot.len() + src.len());
        target.resize(out_len, BigRational::zero());
        for (i, q) in quot.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            for (j, s) in src.iter().enumerate() {
                if !s.is_zero() {
                    let t = q * s;
                    target[i + j] -= t;
                }
            }
        }
    }
    // Extended Euclid: maintain r0 = s0*a (mod m), r1 = s1*a (mod m).
    let mut r0: P = m.to_vec();
    let mut r1: P = a.to_vec();
    let mut s0: P = vec![BigRational::zero()];
    let mut s1: P = vec![BigRational::one()];
    while let Some(d1) = deg(&r1) {
        if d1 == 0 {
            // r1 is a nonzero constant: inverse = s1 / r1.
            let c = r1[0].clone();
            return s1.iter().map(|x| x / &c).collect();
        }
        let (q, r) = rem_quot(&r0, &r1);
        let mut s_new = s0.clone();
        add_scaled(&mut s_new, &q, &s1);
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s_new);
    }
    unreachable!("input not coprime to the cyclotomic modulus");
}

/// Rational as a `p/q` string in lowest terms (`p` when q = 1).
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {} ", sign)?;
            }
            if i == 0 {
                write!(f, "{}", rational_string(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", rational_string(&mag))?;
                }
                write!(f, "z{}^{}", self.n, i)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclo({})", self)
    }
}

impl Serialize for CycloNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CycloNumber", 2)?;
        s.serialize_field("N", &self.n)?;
        let coeffs: Vec<String> = self.coeffs.iter().map(rational_string).collect();
        s.serialize_field("coeffs", &coeffs)?;
        s.end()
    }
}

pub fn big_rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
