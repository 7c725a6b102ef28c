//! Finite Fourier decomposition for an abelian group acting on a set, and
//! the twisted coset-support statement for characters extended along a
//! normal subgroup.
//!
//! Conventions are pinned here and cited by every other module: the
//! transform is f^(chi, x) = sum_a chi(a) f(a, x) (chi(a), never its
//! inverse), and quasi-invariance reads f(chi, a^{-1} x) = chi(a) f(chi, x).
//! In the twisted setting, a function with f(a x1, x) = N(a) f(x1, x) has
//! its transform supported on the slices whose restriction to A is the
//! *inverse* character of N; inverting a surviving slice therefore yields an
//! extension of N, which is exactly how the compatibility extension uses it.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use thiserror::Error;

use crate::cyclo::CycloNumber;
use crate::dual::{dual_group, mult_chars, DualError, DualGroup, MultChar};
use crate::group::{Group, GroupError, Subgroup};

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("acting group is not abelian")]
    NotAbelian,
    #[error("invalid action table: {0}")]
    BadAction(String),
    #[error("index ranges do not match the declared factors")]
    ShapeMismatch,
    #[error("function is not (A, N)-equivariant at (a={a}, x1={x1}, x={x})")]
    NotEquivariant { a: usize, x1: usize, x: usize },
    #[error("transform support leaks outside the character coset at slice {slice}")]
    SupportLeak { slice: usize },
    #[error("structure violated: {0}")]
    BadStructure(String),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// An action of a finite group on the set {0, .., set_size - 1}, stored as a
/// dense table and validated at construction.
#[derive(Clone)]
pub struct GroupAction {
    group: Group,
    set_size: usize,
    table: Vec<usize>,
}

impl GroupAction {
    pub fn new(group: Group, set_size: usize, table: Vec<usize>) -> Result<Self, FourierError> {
        if table.len() != group.order() * set_size {
            return Err(FourierError::BadAction("table has wrong shape".into()));
        }
        if table.iter().any(|&x| x >= set_size) {
            return Err(FourierError::BadAction("entry out of range".into()));
        }
        let action = GroupAction {
            group,
            set_size,
            table,
        };
        for x in 0..set_size {
            if action.act(0, x) != x {
                return Err(FourierError::BadAction(format!(
                    "identity moves point {x}"
                )));
            }
        }
        for a in action.group.elements() {
            for b in action.group.elements() {
                let ab = action.group.mul(a, b);
                for x in 0..set_size {
                    if action.act(ab, x) != action.act(a, action.act(b, x)) {
                        return Err(FourierError::BadAction(format!(
                            "not associative at ({a}, {b}, {x})"
                        )));
                    }
                }
            }
        }
        Ok(action)
    }

    /// The group acting on itself by left translation.
    pub fn translation(group: &Group) -> Self {
        let n = group.order();
        let mut table = vec![0usize; n * n];
        for a in 0..n {
            for x in 0..n {
                table[a * n + x] = group.mul(a, x);
            }
        }
        GroupAction {
            group: group.clone(),
            set_size: n,
            table,
        }
    }

    pub fn trivial(group: &Group, set_size: usize) -> Self {
        let mut table = vec![0usize; group.order() * set_size];
        for a in 0..group.order() {
            for x in 0..set_size {
                table[a * set_size + x] = x;
            }
        }
        GroupAction {
            group: group.clone(),
            set_size,
            table,
        }
    }

    /// Translation action on the left cosets of a subgroup.
    pub fn coset_action(group: &Group, sub: &Subgroup) -> Self {
        let mut coset_of = vec![usize::MAX; group.order()];
        let mut reps = Vec::new();
        for x in group.elements() {
            if coset_of[x] != usize::MAX {
                continue;
            }
            let k = reps.len();
            reps.push(x);
            for &h in sub.members() {
                coset_of[group.mul(x, h)] = k;
            }
        }
        let set_size = reps.len();
        let mut table = vec![0usize; group.order() * set_size];
        for a in group.elements() {
            for (k, &r) in reps.iter().enumerate() {
                table[a * set_size + k] = coset_of[group.mul(a, r)];
            }
        }
        GroupAction {
            group: group.clone(),
            set_size,
            table,
        }
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    #[inline]
    pub fn act(&self, a: usize, x: usize) -> usize {
        self.table[a * self.set_size + x]
    }
}

/// A function on (row index) x (set point) with CycloNumber entries; rows
/// index either group elements or characters depending on context.
#[derive(Clone, PartialEq, Eq)]
pub struct BiFunction {
    rows: usize,
    cols: usize,
    n: u32,
    values: Vec<CycloNumber>,
}

impl BiFunction {
    pub fn zero(rows: usize, cols: usize, n: u32) -> Self {
        BiFunction {
            rows,
            cols,
            n,
            values: vec![CycloNumber::zero(n); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &CycloNumber {
        &self.values[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: CycloNumber) {
        assert_eq!(v.conductor(), self.n);
        self.values[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[CycloNumber] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row(r).iter().all(CycloNumber::is_zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(CycloNumber::is_zero)
    }
}

/// Fourier context for one abelian group: its dual at a fixed conductor.
pub struct Fourier {
    group: Group,
    pub dual: DualGroup,
    n: u32,
}

impl Fourier {
    pub fn new(group: &Group, n: u32) -> Result<Self, FourierError> {
        if !group.is_abelian() {
            return Err(FourierError::NotAbelian);
        }
        let dual = dual_group(group, n)?;
        Ok(Fourier {
            group: group.clone(),
            dual,
            n,
        })
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    fn char_value(&self, chi: usize, a: usize) -> CycloNumber {
        let e = self.dual.characters[chi].exp_of(a).expect("full domain");
        CycloNumber::root_of_unity(self.n, e as i64)
    }

    /// f^(chi, x) = sum_a chi(a) f(a, x); a linear bijection
    /// Fun(A x X) -> Fun(A* x X).
    pub fn transform(&self, f: &BiFunction) -> Result<BiFunction, FourierError> {
        if f.rows != self.group.order() || f.n != self.n {
            return Err(FourierError::ShapeMismatch);
        }
        let mut out = BiFunction::zero(self.dual.len(), f.cols, self.n);
        for chi in 0..self.dual.len() {
            for x in 0..f.cols {
                let mut acc = CycloNumber::zero(self.n);
                for a in self.group.elements() {
                    let v = f.get(a, x);
                    if !v.is_zero() {
                        acc = acc.add(&self.char_value(chi, a).mul(v));
                    }
                }
                out.set(chi, x, acc);
            }
        }
        Ok(out)
    }

    /// Inverse transform: f(a, x) = (1/|A|) sum_chi chi(a)^{-1} f^(chi, x).
    pub fn inverse_transform(&self, fhat: &BiFunction) -> Result<BiFunction, FourierError> {
        if fhat.rows != self.dual.len() || fhat.n != self.n {
            return Err(FourierError::ShapeMismatch);
        }
        let inv_a = BigRational::new(BigInt::one(), BigInt::from(self.group.order()));
        let mut out = BiFunction::zero(self.group.order(), fhat.cols, self.n);
        for a in self.group.elements() {
            for x in 0..fhat.cols {
                let mut acc = CycloNumber::zero(self.n);
                for chi in 0..self.dual.len() {
                    let v = fhat.get(chi, x);
                    if !v.is_zero() {
                        acc = acc.add(&self.char_value(chi, a).conj().mul(v));
                    }
                }
                out.set(a, x, acc.scalar_mul(&inv_a));
            }
        }
        Ok(out)
    }

    /// Quasi-invariance: f(chi, a^{-1} x) = chi(a) f(chi, x) for all chi, a, x.
    /// Returns the first violation if any.
    pub fn is_quasi_invariant(
        &self,
        action: &GroupAction,
        f: &BiFunction,
    ) -> Result<Option<(usize, usize, usize)>, FourierError> {
        if f.rows != self.dual.len() || action.set_size != f.cols {
            return Err(FourierError::ShapeMismatch);
        }
        for chi in 0..self.dual.len() {
            for a in self.group.elements() {
                let ainv = self.group.inv(a);
                let cv = self.char_value(chi, a);
                for x in 0..f.cols {
                    let lhs = f.get(chi, action.act(ainv, x));
                    let rhs = cv.mul(f.get(chi, x));
                    if *lhs != rhs {
                        return Ok(Some((chi, a, x)));
                    }
                }
            }
        }
        Ok(None)
    }

    /// The lift F -> F~ with F~(chi, x) = sum_a chi(a) F(a x); lands in the
    /// quasi-invariant functions.
    pub fn lift(&self, action: &GroupAction, f: &[CycloNumber]) -> Result<BiFunction, FourierError> {
        if f.len() != action.set_size || !std::sync::Arc::ptr_eq(&self.group, &action.group) {
            return Err(FourierError::ShapeMismatch);
        }
        let mut out = BiFunction::zero(self.dual.len(), action.set_size, self.n);
        for chi in 0..self.dual.len() {
            for x in 0..action.set_size {
                let mut acc = CycloNumber::zero(self.n);
                for a in self.group.elements() {
                    let v = &f[action.act(a, x)];
                    if !v.is_zero() {
                        acc = acc.add(&self.char_value(chi, a).mul(v));
                    }
                }
                out.set(chi, x, acc);
            }
        }
        Ok(out)
    }

    /// (Pi_! f)(x) = (1/|A|) sum_chi f(chi, x); the left inverse of the lift.
    pub fn pi_shriek(&self, f: &BiFunction) -> Result<Vec<CycloNumber>, FourierError> {
        if f.rows != self.dual.len() {
            return Err(FourierError::ShapeMismatch);
        }
        let inv_a = BigRational::new(BigInt::one(), BigInt::from(self.group.order()));
        Ok((0..f.cols)
            .map(|x| {
                let mut acc = CycloNumber::zero(self.n);
                for chi in 0..self.dual.len() {
                    let v = f.get(chi, x);
                    if !v.is_zero() {
                        acc = acc.add(v);
                    }
                }
                acc.scalar_mul(&inv_a)
            })
            .collect())
    }

    /// Fourier decomposition of Fun(X): the chi-component is
    /// F_chi(x) = (1/|A|) sum_b chi(b) F(b x). Components sum to F and each
    /// satisfies F_chi(a^{-1} x) = chi(a) F_chi(x).
    pub fn decompose(
        &self,
        action: &GroupAction,
        f: &[CycloNumber],
    ) -> Result<Vec<Vec<CycloNumber>>, FourierError> {
        if f.len() != action.set_size || !std::sync::Arc::ptr_eq(&self.group, &action.group) {
            return Err(FourierError::ShapeMismatch);
        }
        let inv_a = BigRational::new(BigInt::one(), BigInt::from(self.group.order()));
        let mut out = Vec::with_capacity(self.dual.len());
        for chi in 0..self.dual.len() {
            let comp: Vec<CycloNumber> = (0..action.set_size)
                .map(|x| {
                    let mut acc = CycloNumber::zero(self.n);
                    for b in self.group.elements() {
                        let v = &f[action.act(b, x)];
                        if !v.is_zero() {
                            acc = acc.add(&self.char_value(chi, b).mul(v));
                        }
                    }
                    acc.scalar_mul(&inv_a)
                })
                .collect();
            out.push(comp);
        }
        Ok(out)
    }
}

/// Outcome of the twisted support computation: the full character list of
/// A1, the coset of characters allowed to survive, and the nonzero slices of
/// the transform.
pub struct TwistedSupport {
    /// All multiplicative characters of A1 at the working conductor.
    pub chars: Vec<MultChar>,
    /// Indices of the coset {chi1 : chi1 restricted to A = N^{-1}}; the
    /// transform of an (A, N)-equivariant function vanishes off this coset.
    pub coset: Vec<usize>,
    /// (character index, transform slice) for every nonzero slice.
    pub slices: Vec<(usize, Vec<CycloNumber>)>,
    /// |A1/A| * |X| equals |coset| * |X|.
    pub dimension_ok: bool,
}

/// Verified coset support of the transform of an (A, N)-equivariant
/// function on A1 x X. Rows of `f` are indexed by position in
/// `a1.members()`. A support leak is a bug signal, not an input property.
pub fn twisted_support(
    a1: &Subgroup,
    a: &Subgroup,
    nchar: &MultChar,
    f: &BiFunction,
) -> Result<TwistedSupport, FourierError> {
    let g = a1.parent().clone();
    if f.rows != a1.order() {
        return Err(FourierError::ShapeMismatch);
    }
    let n = f.n;
    for &x in a.members() {
        if !a1.contains(x) {
            return Err(FourierError::BadStructure(format!("A not inside A1 at {x}")));
        }
    }
    for &x in a1.members() {
        for &y in a1.members() {
            if !a.contains(g.commutator(x, y)) {
                return Err(FourierError::BadStructure(format!(
                    "A1/A is not abelian: [{x}, {y}] escapes A"
                )));
            }
        }
        for &h in a.members() {
            if !a.contains(g.conj(x, h)) {
                return Err(FourierError::BadStructure(format!(
                    "A is not normal in A1 at ({x}, {h})"
                )));
            }
        }
    }
    let scale = (n / nchar.conductor()) as i64;
    // equivariance: f(a * x1, x) = N(a) f(x1, x)
    for (pa, &am) in a.members().iter().enumerate() {
        let _ = pa;
        let root = CycloNumber::root_of_unity(n, nchar.exp_of(am).unwrap() as i64 * scale);
        for (p1, &x1) in a1.members().iter().enumerate() {
            let shifted = a1
                .pos_of(g.mul(am, x1))
                .expect("A1 closed under left A-multiplication");
            for x in 0..f.cols {
                if *f.get(shifted, x) != root.mul(f.get(p1, x)) {
                    return Err(FourierError::NotEquivariant { a: am, x1, x });
                }
            }
        }
    }
    let chars = mult_chars(a1, n);
    // The surviving slices must restrict to the inverse of N on A.
    let ninv = nchar.inverse();
    let mut coset = Vec::new();
    for (i, chi1) in chars.iter().enumerate() {
        let matches = a.members().iter().all(|&h| {
            let want = (ninv.exp_of(h).unwrap() as u64 * scale as u64) % n as u64;
            chi1.exp_of(h) == Some(want as u32)
        });
        if matches {
            coset.push(i);
        }
    }
    let mut slices = Vec::new();
    for (i, chi1) in chars.iter().enumerate() {
        let slice: Vec<CycloNumber> = (0..f.cols)
            .map(|x| {
                let mut acc = CycloNumber::zero(n);
                for (p1, _) in a1.members().iter().enumerate() {
                    let v = f.get(p1, x);
                    if !v.is_zero() {
                        let root = CycloNumber::root_of_unity(n, chi1.exp_at_pos(p1) as i64);
                        acc = acc.add(&root.mul(v));
                    }
                }
                acc
            })
            .collect();
        let nonzero = slice.iter().any(|v| !v.is_zero());
        if nonzero {
            if !coset.contains(&i) {
                return Err(FourierError::SupportLeak { slice: i });
            }
            slices.push((i, slice));
        }
    }
    let dimension_ok = coset.len() * a.order() == a1.order();
    Ok(TwistedSupport {
        chars,
        coset,
        slices,
        dimension_ok,
    })
}
