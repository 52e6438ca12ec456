//! Truncated Laurent/Taylor series arithmetic, generic over the coefficient
//! field (binary64 complex for function-local expansions, extended precision
//! for the singularity analysis).
//!
//! A series carries its valuation (lowest exponent) and a block of known
//! coefficients. Operations track how far the result is still exact: the
//! product of series known to relative orders r1, r2 is kept to min(r1, r2)
//! coefficients. The empty series is exact zero (known to all orders).

use num_complex::Complex64;
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::bigc::BigC;

pub trait Coeff:
    Clone
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    /// Rough magnitude for trimming and reporting.
    fn mag(&self) -> f64;
    /// Multiply by a small integer. For the big-float backend this must go
    /// through the full-precision operand: exact integers carry only their
    /// bit length as precision, and a product of two such values rounds to
    /// that length.
    fn mul_int(&self, n: i64) -> Self;
}

impl Coeff for Complex64 {
    fn mag(&self) -> f64 {
        self.norm()
    }
    fn mul_int(&self, n: i64) -> Self {
        self * n as f64
    }
}

impl Coeff for BigC {
    fn mag(&self) -> f64 {
        self.mag_f64()
    }
    fn mul_int(&self, n: i64) -> Self {
        let k = crate::bigc::Bf::from(n);
        BigC {
            re: &self.re * &k,
            im: &self.im * &k,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Series<T> {
    /// Exponent of the first stored coefficient.
    pub val: i64,
    pub c: Vec<T>,
}

impl<T: Coeff> Series<T> {
    pub fn zero() -> Self {
        Series { val: 0, c: vec![] }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn constant(t: T) -> Self {
        Series { val: 0, c: vec![t] }
    }

    pub fn monomial(t: T, power: i64) -> Self {
        Series {
            val: power,
            c: vec![t],
        }
    }

    pub fn from_coeffs(val: i64, c: Vec<T>) -> Self {
        Series { val, c }
    }

    pub fn rel_len(&self) -> usize {
        self.c.len()
    }

    /// Exclusive upper bound of known exponents.
    fn end(&self) -> i64 {
        if self.c.is_empty() {
            i64::MAX / 4
        } else {
            self.val + self.c.len() as i64
        }
    }

    pub fn coeff(&self, power: i64) -> T {
        if self.c.is_empty() || power < self.val || power >= self.end() {
            T::zero()
        } else {
            self.c[(power - self.val) as usize].clone()
        }
    }

    /// Coefficient at `val + k`.
    pub fn coeff_rel(&self, k: usize) -> T {
        if k < self.c.len() {
            self.c[k].clone()
        } else {
            T::zero()
        }
    }

    pub fn set_coeff(&mut self, power: i64, t: T) {
        assert!(!self.c.is_empty() && power >= self.val && power < self.end());
        self.c[(power - self.val) as usize] = t;
    }

    pub fn max_mag(&self) -> f64 {
        self.c.iter().map(|x| x.mag()).fold(0.0, f64::max)
    }

    pub fn truncate(mut self, rel_len: usize) -> Self {
        self.c.truncate(rel_len);
        self
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_exact_zero() {
            return o.clone();
        }
        if o.is_exact_zero() {
            return self.clone();
        }
        let val = self.val.min(o.val);
        let end = self.end().min(o.end());
        if end <= val {
            // no overlap of known ranges
            return Series {
                val,
                c: vec![],
            };
        }
        let mut c = Vec::with_capacity((end - val) as usize);
        for p in val..end {
            c.push(self.coeff(p) + o.coeff(p));
        }
        Series { val, c }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        Series {
            val: self.val,
            c: self.c.iter().map(|x| -x.clone()).collect(),
        }
    }

    pub fn scale(&self, k: &T) -> Self {
        if k.is_zero() {
            // exact zero, known to all orders
            return Series::zero();
        }
        Series {
            val: self.val,
            c: self.c.iter().map(|x| x.clone() * k.clone()).collect(),
        }
    }

    /// Multiply by the monomial x^n.
    pub fn shift(&self, n: i64) -> Self {
        Series {
            val: self.val + n,
            c: self.c.clone(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_exact_zero() || o.is_exact_zero() {
            return Series::zero();
        }
        let n = self.c.len().min(o.c.len());
        let mut c = vec![T::zero(); n];
        for (i, a) in self.c.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        Series {
            val: self.val + o.val,
            c,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Series::constant(T::one());
        // keep the base's relative length on the unit to avoid truncating
        if !self.c.is_empty() {
            acc.c.resize(self.c.len(), T::zero());
        }
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.is_exact_zero() {
            return Series::zero();
        }
        let mut val = self.val - 1;
        let mut c: Vec<T> = self
            .c
            .iter()
            .enumerate()
            .map(|(k, x)| x.mul_int(self.val + k as i64))
            .collect();
        // the exponent-zero term differentiates away; drop the structural zero
        if self.val == 0 && !c.is_empty() {
            c.remove(0);
            val += 1;
        }
        Series { val, c }
    }

    /// Reciprocal, requiring a numerically nonzero leading coefficient.
    pub fn recip(&self, rel_len: usize) -> Self {
        assert!(!self.c.is_empty(), "reciprocal of exact zero");
        let lead = self.c[0].clone();
        debug_assert!(
            lead.mag() > 0.0,
            "reciprocal requires nonzero leading coefficient"
        );
        let n = rel_len.min(self.c.len());
        let mut r = vec![T::zero(); n];
        let inv_lead = T::one() / lead.clone();
        r[0] = inv_lead.clone();
        for k in 1..n {
            let mut s = T::zero();
            for i in 1..=k {
                s = s + self.c[i].clone() * r[k - i].clone();
            }
            r[k] = -(s * inv_lead.clone());
        }
        Series {
            val: -self.val,
            c: r,
        }
    }

    pub fn div(&self, o: &Self) -> Self {
        let n = self.c.len().min(o.c.len());
        self.mul(&o.recip(n))
    }

    /// Drop leading coefficients whose magnitude is below rel_tol times the
    /// largest coefficient (numerical zeros from exact cancellation).
    pub fn trim_leading(&self, rel_tol: f64) -> Self {
        let m = self.max_mag();
        let mut k = 0;
        while k < self.c.len() && self.c[k].mag() <= rel_tol * m {
            k += 1;
        }
        Series {
            val: self.val + k as i64,
            c: self.c[k..].to_vec(),
        }
    }
}
