//! Commutative operator family over the multiplicative group of a prime field.
//!
//! The protocol only needs two things from its locks: an n-ary, order-sensitive
//! operator `F` (Alice) and an invertible unary operator `T` (Bob) such that
//! `T(F(o_1, .., o_n)) = F(T(o_1), .., T(o_n))`. Those requirements are captured
//! by [`NaryLock`] and [`UnaryLock`]; the shipped family uses power maps:
//!
//! ```text
//! F(o_1, .., o_n) = o_1^a_1 * .. * o_n^a_n  (mod p)
//! T(x)            = x^k                     (mod p)
//! ```
//!
//! Power maps commute with products, so the law holds exactly. They are not
//! one-way at any size this crate handles, which is what makes the attack
//! module's measurements possible.

use std::collections::HashSet;
use std::fmt;
use std::ops::Mul;

use rand::Rng;

use crate::error::{Error, Result};

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m`, if it exists.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// Deterministic Miller-Rabin; the witness set is exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Distinct prime factors by trial division. Only meant for the small moduli
/// the discrete-log attack targets.
pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// A prime modulus `p >= 5`; the group is `Z_p^*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupParams {
    modulus: u64,
}

impl GroupParams {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 5 {
            return Err(Error::ModulusTooSmall(modulus));
        }
        if !is_prime(modulus) {
            return Err(Error::NotPrime(modulus));
        }
        Ok(Self { modulus })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Group order `p - 1`.
    pub fn order(&self) -> u64 {
        self.modulus - 1
    }

    pub fn element(&self, value: u64) -> Result<GroupElement> {
        if value == 0 || value >= self.modulus {
            return Err(Error::ElementOutOfRange {
                value,
                modulus: self.modulus,
            });
        }
        Ok(GroupElement {
            value,
            params: *self,
        })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            value: 1,
            params: *self,
        }
    }

    /// Uniform element of the whole group.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        GroupElement {
            value: rng.random_range(1..self.modulus),
            params: *self,
        }
    }

    /// Largest admissible lock exponent, `p - 2`.
    pub fn max_exponent(&self) -> u64 {
        self.modulus - 2
    }
}

impl fmt::Display for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}^*", self.modulus)
    }
}

/// Residue in `[1, p - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    value: u64,
    params: GroupParams,
}

impl GroupElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn params(&self) -> GroupParams {
        self.params
    }

    pub fn is_identity(&self) -> bool {
        self.value == 1
    }

    pub fn pow(self, exp: u64) -> GroupElement {
        GroupElement {
            value: pow_mod(self.value, exp, self.params.modulus),
            params: self.params,
        }
    }

    pub fn inverse(self) -> GroupElement {
        self.pow(self.params.order() - 1)
    }

    /// Multiplicative order, via the factorization of `p - 1`.
    pub fn order(self) -> u64 {
        let mut ord = self.params.order();
        for q in prime_factors(ord) {
            while ord.is_multiple_of(q) && self.pow(ord / q).is_identity() {
                ord /= q;
            }
        }
        ord
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        debug_assert_eq!(self.params, rhs.params, "mixed groups");
        GroupElement {
            value: mul_mod(self.value, rhs.value, self.params.modulus),
            params: self.params,
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Alice's side of a commutative pair: an n-ary operator whose value depends
/// on argument order.
pub trait NaryLock {
    fn params(&self) -> GroupParams;
    fn arity(&self) -> usize;
    fn apply(&self, objects: &[GroupElement]) -> Result<GroupElement>;
}

/// Bob's side: an invertible unary operator commuting with the paired
/// [`NaryLock`].
pub trait UnaryLock {
    fn params(&self) -> GroupParams;
    fn apply(&self, x: GroupElement) -> GroupElement;
    fn invert(&self, y: GroupElement) -> GroupElement;
}

impl<F: NaryLock + ?Sized> NaryLock for &F {
    fn params(&self) -> GroupParams {
        (**self).params()
    }
    fn arity(&self) -> usize {
        (**self).arity()
    }
    fn apply(&self, objects: &[GroupElement]) -> Result<GroupElement> {
        (**self).apply(objects)
    }
}

impl<T: UnaryLock + ?Sized> UnaryLock for &T {
    fn params(&self) -> GroupParams {
        (**self).params()
    }
    fn apply(&self, x: GroupElement) -> GroupElement {
        (**self).apply(x)
    }
    fn invert(&self, y: GroupElement) -> GroupElement {
        (**self).invert(y)
    }
}

/// Exponent vector `a_1..a_n`, pairwise distinct, each in `[1, p - 2]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LockKeyF {
    params: GroupParams,
    exponents: Vec<u64>,
}

impl LockKeyF {
    pub fn new(params: GroupParams, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() < 2 {
            return Err(Error::FrameworkTooSmall(exponents.len()));
        }
        let max = params.max_exponent();
        let mut seen = HashSet::with_capacity(exponents.len());
        for &a in &exponents {
            if a == 0 || a > max {
                return Err(Error::ExponentOutOfRange { exponent: a, max });
            }
            if !seen.insert(a) {
                return Err(Error::DuplicateExponent(a));
            }
        }
        Ok(Self { params, exponents })
    }

    pub fn random<R: Rng + ?Sized>(params: GroupParams, n: usize, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::FrameworkTooSmall(n));
        }
        let max = params.max_exponent();
        if (max as u128) < n as u128 {
            return Err(Error::GroupTooSmall {
                modulus: params.modulus(),
                requested: n,
            });
        }
        let exponents = distinct_in_range(rng, 1, max, n);
        Self::new(params, exponents)
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }
}

impl NaryLock for LockKeyF {
    fn params(&self) -> GroupParams {
        self.params
    }

    fn arity(&self) -> usize {
        self.exponents.len()
    }

    fn apply(&self, objects: &[GroupElement]) -> Result<GroupElement> {
        if objects.len() != self.exponents.len() {
            return Err(Error::ArityMismatch {
                expected: self.exponents.len(),
                actual: objects.len(),
            });
        }
        if objects.iter().any(|o| o.params != self.params) {
            return Err(Error::GroupMismatch);
        }
        Ok(objects
            .iter()
            .zip(&self.exponents)
            .fold(self.params.identity(), |acc, (o, &a)| acc * o.pow(a)))
    }
}

/// Power map `x -> x^k` with `gcd(k, p - 1) = 1`; carries its inverse exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LockKeyT {
    params: GroupParams,
    exponent: u64,
    inverse: u64,
}

impl LockKeyT {
    pub fn new(params: GroupParams, exponent: u64) -> Result<Self> {
        let max = params.max_exponent();
        if exponent == 0 || exponent > max {
            return Err(Error::ExponentOutOfRange { exponent, max });
        }
        let inverse = inv_mod(exponent, params.order()).ok_or(Error::NonInvertibleKey {
            exponent,
            order: params.order(),
        })?;
        Ok(Self {
            params,
            exponent,
            inverse,
        })
    }

    pub fn random<R: Rng + ?Sized>(params: GroupParams, rng: &mut R) -> Self {
        // k = 1 is always coprime to p - 1, so the loop terminates.
        loop {
            let k = rng.random_range(1..=params.max_exponent());
            if let Ok(key) = Self::new(params, k) {
                return key;
            }
        }
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `k'` with `k * k' = 1 (mod p - 1)`.
    pub fn inverse_exponent(&self) -> u64 {
        self.inverse
    }
}

impl UnaryLock for LockKeyT {
    fn params(&self) -> GroupParams {
        self.params
    }

    fn apply(&self, x: GroupElement) -> GroupElement {
        x.pow(self.exponent)
    }

    fn invert(&self, y: GroupElement) -> GroupElement {
        y.pow(self.inverse)
    }
}

/// Ordered objects `O_1..O_n`: at least two, pairwise distinct, none equal to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framework {
    objects: Vec<GroupElement>,
}

impl Framework {
    pub fn new(objects: Vec<GroupElement>) -> Result<Self> {
        if objects.len() < 2 {
            return Err(Error::FrameworkTooSmall(objects.len()));
        }
        let params = objects[0].params;
        let mut seen = HashSet::with_capacity(objects.len());
        for o in &objects {
            if o.params != params {
                return Err(Error::GroupMismatch);
            }
            if o.is_identity() {
                return Err(Error::IdentityObject);
            }
            if !seen.insert(o.value) {
                return Err(Error::DuplicateObject(o.value));
            }
        }
        Ok(Self { objects })
    }

    pub fn from_values(params: GroupParams, values: &[u64]) -> Result<Self> {
        let objects = values
            .iter()
            .map(|&v| params.element(v))
            .collect::<Result<Vec<_>>>()?;
        Self::new(objects)
    }

    pub fn objects(&self) -> &[GroupElement] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn params(&self) -> GroupParams {
        self.objects[0].params
    }

    pub fn contains(&self, x: GroupElement) -> bool {
        self.objects.contains(&x)
    }
}

pub fn eval_f<F: NaryLock + ?Sized>(key: &F, fw: &Framework) -> Result<GroupElement> {
    key.apply(fw.objects())
}

pub fn eval_t<T: UnaryLock + ?Sized>(key: &T, x: GroupElement) -> GroupElement {
    key.apply(x)
}

pub fn invert_t<T: UnaryLock + ?Sized>(key: &T, y: GroupElement) -> GroupElement {
    key.invert(y)
}

/// `T(F(O)) == F(T(O_1), .., T(O_n))`.
pub fn check_commutes<F, T>(f: &F, t: &T, fw: &Framework) -> Result<bool>
where
    F: NaryLock + ?Sized,
    T: UnaryLock + ?Sized,
{
    let lhs = t.apply(f.apply(fw.objects())?);
    let images: Vec<_> = fw.objects().iter().map(|&o| t.apply(o)).collect();
    Ok(lhs == f.apply(&images)?)
}

/// `n` distinct values from `[lo, hi]`, in draw order.
fn distinct_in_range<R: Rng + ?Sized>(rng: &mut R, lo: u64, hi: u64, n: usize) -> Vec<u64> {
    let span = hi - lo + 1;
    if span <= 4 * n as u64 {
        let mut pool: Vec<u64> = (lo..=hi).collect();
        for i in 0..n {
            let j = rng.random_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(n);
        pool
    } else {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let v = rng.random_range(lo..=hi);
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }
}

/// `n` distinct non-identity elements, deterministic for a seeded `rng`.
pub fn sample_framework<R: Rng + ?Sized>(
    params: GroupParams,
    n: usize,
    rng: &mut R,
) -> Result<Framework> {
    if n < 2 {
        return Err(Error::FrameworkTooSmall(n));
    }
    // Usable values are 2..=p-1.
    if ((params.modulus() - 2) as u128) < n as u128 {
        return Err(Error::GroupTooSmall {
            modulus: params.modulus(),
            requested: n,
        });
    }
    let values = distinct_in_range(rng, 2, params.modulus() - 1, n);
    Framework::from_values(params, &values)
}

/// Attempts before [`sample_framework_for`] gives up on a degenerate group.
pub const MAX_SAMPLING_ATTEMPTS: usize = 1000;

/// True when swapping any two objects changes `F`, i.e. no pair satisfies
/// `(O_i / O_j)^(a_i - a_j) = 1`.
pub fn is_order_sensitive(key: &LockKeyF, fw: &Framework) -> bool {
    let order = fw.params().order();
    let objs = fw.objects();
    let exps = key.exponents();
    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            let diff = (exps[i] as i128 - exps[j] as i128).rem_euclid(order as i128) as u64;
            if (objs[i] * objs[j].inverse()).pow(diff).is_identity() {
                return false;
            }
        }
    }
    true
}

/// True when every pairwise swap of the arguments changes the value of `key`.
/// Works for any [`NaryLock`]; for power maps it agrees with
/// [`is_order_sensitive`].
pub fn swaps_change_value<F: NaryLock + ?Sized>(key: &F, fw: &Framework) -> Result<bool> {
    let base = key.apply(fw.objects())?;
    let mut objs = fw.objects().to_vec();
    for i in 0..objs.len() {
        for j in i + 1..objs.len() {
            objs.swap(i, j);
            let changed = key.apply(&objs)? != base;
            objs.swap(i, j);
            if !changed {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Samples a framework sized for `key`, redrawing until every pairwise swap
/// changes the value of `F`.
pub fn sample_framework_for<F, R>(key: &F, rng: &mut R) -> Result<Framework>
where
    F: NaryLock + ?Sized,
    R: Rng + ?Sized,
{
    let params = key.params();
    for _ in 0..MAX_SAMPLING_ATTEMPTS {
        let fw = sample_framework(params, key.arity(), rng)?;
        if swaps_change_value(key, &fw)? {
            return Ok(fw);
        }
    }
    Err(Error::GroupTooSmall {
        modulus: params.modulus(),
        requested: key.arity(),
    })
}
