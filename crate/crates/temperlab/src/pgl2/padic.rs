//! Fixed-precision p-adic scalars for odd residual characteristic.
//!
//! A nonzero value is `p^val * unit` with the unit known modulo
//! `p^prec`; arithmetic tracks the surviving precision explicitly and
//! reports exhaustion instead of silently producing junk. Units live in
//! `u64` with `p^prec <= 2^62`, so products stay exact in `u128`.

use crate::error::{Error, Result};
use num::complex::Complex64;
use std::f64::consts::TAU;

/// Modular context for a fixed odd prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicCtx {
    pub p: u64,
}

impl PadicCtx {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::invalid(format!(
                "residual characteristic must be an odd prime, got {p}"
            )));
        }
        Ok(Self { p })
    }

    pub fn pow(&self, k: u32) -> u64 {
        let mut r: u64 = 1;
        for _ in 0..k {
            r = r.checked_mul(self.p).expect("p^k overflow");
        }
        r
    }

    pub fn max_precision(&self) -> u32 {
        let mut k = 0;
        let mut acc: u128 = 1;
        while acc * self.p as u128 <= (1u128 << 62) {
            acc *= self.p as u128;
            k += 1;
        }
        k
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Element of the p-adic field at finite precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Qp {
    pub ctx: PadicCtx,
    /// None encodes exact zero.
    inner: Option<QpInner>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct QpInner {
    val: i64,
    /// coprime to p, reduced mod p^prec
    unit: u64,
    prec: u32,
}

impl Qp {
    pub fn zero(ctx: PadicCtx) -> Self {
        Self { ctx, inner: None }
    }

    pub fn one(ctx: PadicCtx, prec: u32) -> Self {
        Self::from_unit(ctx, 1, 0, prec)
    }

    /// `p^val * unit`, with `unit` coprime to p.
    pub fn from_unit(ctx: PadicCtx, unit: u64, val: i64, prec: u32) -> Self {
        let prec = prec.min(ctx.max_precision());
        let m = ctx.pow(prec);
        let u = unit % m;
        assert!(u % ctx.p != 0, "unit {unit} divisible by {}", ctx.p);
        Self {
            ctx,
            inner: Some(QpInner { val, unit: u, prec }),
        }
    }

    /// Integer embedding at precision `prec` (relative digits).
    pub fn from_i64(ctx: PadicCtx, n: i64, prec: u32) -> Self {
        if n == 0 {
            return Self::zero(ctx);
        }
        let mut mag = n.unsigned_abs();
        let mut val = 0i64;
        while mag % ctx.p == 0 {
            mag /= ctx.p;
            val += 1;
        }
        let m = ctx.pow(prec.min(ctx.max_precision()));
        let mut u = mag % m;
        if n < 0 {
            u = (m - u) % m;
        }
        Self::from_unit(ctx, u, val, prec)
    }

    /// `p^k`.
    pub fn uniformizer_pow(ctx: PadicCtx, k: i64, prec: u32) -> Self {
        Self::from_unit(ctx, 1, k, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.inner.is_none()
    }

    pub fn valuation(&self) -> Option<i64> {
        self.inner.map(|i| i.val)
    }

    pub fn precision(&self) -> Option<u32> {
        self.inner.map(|i| i.prec)
    }

    pub fn unit_part(&self) -> Option<u64> {
        self.inner.map(|i| i.unit)
    }

    /// `|x| = p^{-val}`; 0 for exact zero.
    pub fn abs(&self) -> f64 {
        match self.inner {
            None => 0.0,
            Some(i) => (self.ctx.p as f64).powi(-i.val as i32),
        }
    }

    fn mulmod(&self, a: u64, b: u64, m: u64) -> u64 {
        ((a as u128 * b as u128) % m as u128) as u64
    }

    pub fn mul(&self, other: &Qp) -> Qp {
        assert_eq!(self.ctx, other.ctx);
        let (Some(a), Some(b)) = (self.inner, other.inner) else {
            return Qp::zero(self.ctx);
        };
        let prec = a.prec.min(b.prec);
        let m = self.ctx.pow(prec);
        Qp {
            ctx: self.ctx,
            inner: Some(QpInner {
                val: a.val + b.val,
                unit: self.mulmod(a.unit % m, b.unit % m, m),
                prec,
            }),
        }
    }

    pub fn add(&self, other: &Qp) -> Qp {
        assert_eq!(self.ctx, other.ctx);
        let (a, b) = match (self.inner, other.inner) {
            (None, _) => return *other,
            (_, None) => return *self,
            (Some(a), Some(b)) => {
                if a.val <= b.val {
                    (a, b)
                } else {
                    (b, a)
                }
            }
        };
        // both known modulo p^{val_i + prec_i}; the sum has valuation >= a.val
        let shift = (b.val - a.val) as u32;
        let abs_prec = (a.val + a.prec as i64).min(b.val + b.prec as i64);
        let rel = (abs_prec - a.val).max(0) as u32;
        if rel == 0 {
            // no surviving digits
            return Qp {
                ctx: self.ctx,
                inner: Some(QpInner { val: a.val, unit: 0, prec: 0 }),
            };
        }
        let m = self.ctx.pow(rel.min(self.ctx.max_precision()));
        let bu = if shift >= rel {
            0
        } else {
            self.mulmod(b.unit % m, self.ctx.pow(shift) % m, m)
        };
        let mut s = (a.unit % m + bu) % m;
        let mut val = a.val;
        let mut prec = rel;
        // strip carried factors of p
        while s != 0 && s % self.ctx.p == 0 && prec > 0 {
            s /= self.ctx.p;
            val += 1;
            prec -= 1;
        }
        if s == 0 {
            // cancellation below precision: value is O(p^{val + prec})
            return Qp {
                ctx: self.ctx,
                inner: Some(QpInner { val: abs_prec, unit: 0, prec: 0 }),
            };
        }
        Qp {
            ctx: self.ctx,
            inner: Some(QpInner { val, unit: s, prec }),
        }
    }

    pub fn neg(&self) -> Qp {
        match self.inner {
            None => *self,
            Some(i) => {
                let m = self.ctx.pow(i.prec);
                Qp {
                    ctx: self.ctx,
                    inner: Some(QpInner {
                        val: i.val,
                        unit: (m - i.unit % m) % m,
                        prec: i.prec,
                    }),
                }
            }
        }
    }

    pub fn sub(&self, other: &Qp) -> Qp {
        self.add(&other.neg())
    }

    pub fn inv(&self) -> Result<Qp> {
        let Some(i) = self.inner else {
            return Err(Error::domain("division by exact zero"));
        };
        if i.unit == 0 || i.prec == 0 {
            return Err(Error::Precision(
                "inverting a value with no surviving digits".into(),
            ));
        }
        let m = self.ctx.pow(i.prec);
        let u = mod_inverse(i.unit, m, self.ctx.p)?;
        Ok(Qp {
            ctx: self.ctx,
            inner: Some(QpInner { val: -i.val, unit: u, prec: i.prec }),
        })
    }

    pub fn div(&self, other: &Qp) -> Result<Qp> {
        Ok(self.mul(&other.inv()?))
    }

    /// True when the value is usable: nonzero with at least `need`
    /// digits of relative precision.
    pub fn has_precision(&self, need: u32) -> bool {
        matches!(self.inner, Some(i) if i.unit != 0 && i.prec >= need)
    }

    /// Residue of the unit part mod p^k.
    pub fn unit_mod(&self, k: u32) -> Result<u64> {
        let Some(i) = self.inner else {
            return Err(Error::domain("unit part of zero"));
        };
        if i.prec < k || i.unit == 0 {
            return Err(Error::Precision(format!(
                "need {k} unit digits, have {}",
                i.prec
            )));
        }
        Ok(i.unit % self.ctx.pow(k))
    }

    /// Integer residue mod p^k of a value with `val >= 0`.
    pub fn residue(&self, k: u32) -> Result<u64> {
        match self.inner {
            None => Ok(0),
            Some(i) => {
                if i.val < 0 {
                    return Err(Error::domain("residue of a non-integral value"));
                }
                if i.val >= k as i64 {
                    return Ok(0);
                }
                let rel_needed = k - i.val as u32;
                if i.prec < rel_needed {
                    return Err(Error::Precision(format!(
                        "need {rel_needed} digits for residue mod p^{k}"
                    )));
                }
                let m = self.ctx.pow(k);
                Ok(self.mulmod(i.unit % m, self.ctx.pow(i.val as u32), m))
            }
        }
    }

    /// Principal (polar) part as an exact rational in [0, 1): the sum of
    /// digits at negative powers of p, reduced mod 1.
    pub fn principal_part(&self) -> Result<(u64, u64)> {
        let Some(i) = self.inner else {
            return Ok((0, 1));
        };
        if i.val >= 0 {
            return Ok((0, 1));
        }
        let k = (-i.val) as u32;
        if i.unit == 0 || i.prec < k {
            return Err(Error::Precision(format!(
                "principal part needs {k} digits, have {}",
                i.prec
            )));
        }
        let den = self.ctx.pow(k);
        Ok((i.unit % den, den))
    }
}

/// Standard additive character: trivial on the integers, nontrivial on
/// `p^{-1} O`, realized as `exp(2 pi i * principal part)`.
pub fn additive_character(x: &Qp) -> Result<Complex64> {
    let (num, den) = x.principal_part()?;
    let angle = TAU * num as f64 / den as f64;
    Ok(Complex64::new(0.0, angle).exp())
}

/// Inverse of a unit modulo `m = p^k`.
pub fn unit_inverse_mod(a: u64, m: u64, p: u64) -> Result<u64> {
    mod_inverse(a, m, p)
}

fn mod_inverse(a: u64, m: u64, p: u64) -> Result<u64> {
    if a % p == 0 {
        return Err(Error::domain("unit expected"));
    }
    // extended Euclid on signed 128-bit
    let (mut r0, mut r1) = (m as i128, (a % m) as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return Err(Error::domain("non-invertible residue"));
    }
    Ok(((s0.rem_euclid(m as i128)) as u64) % m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx3() -> PadicCtx {
        PadicCtx::new(3).unwrap()
    }

    #[test]
    fn valuation_and_abs() {
        let c = ctx3();
        let x = Qp::from_unit(c, 2, 3, 10); // 2 * 3^3
        assert_eq!(x.valuation(), Some(3));
        let y = Qp::uniformizer_pow(c, -2, 10);
        assert!((y.abs() - 9.0).abs() < 1e-15);
    }

    #[test]
    fn inverse_roundtrip() {
        let c = ctx3();
        let x = Qp::from_unit(c, 7, -1, 12);
        let xi = x.inv().unwrap();
        let prod = x.mul(&xi);
        assert_eq!(prod.valuation(), Some(0));
        assert_eq!(prod.unit_mod(12).unwrap(), 1);
    }

    #[test]
    fn addition_tracks_valuation_and_carries() {
        let c = ctx3();
        // 1 + 2 = 3: valuation rises, one digit lost
        let one = Qp::from_i64(c, 1, 10);
        let two = Qp::from_i64(c, 2, 10);
        let three = one.add(&two);
        assert_eq!(three.valuation(), Some(1));
        assert_eq!(three.unit_mod(9).unwrap(), 1);

        // cancellation: x - x = 0 within precision
        let z = one.sub(&one);
        assert!(z.is_zero() || !z.has_precision(1));
    }

    #[test]
    fn from_i64_signs() {
        let c = ctx3();
        let m1 = Qp::from_i64(c, -1, 4); // = 80 mod 81
        assert_eq!(m1.unit_mod(4).unwrap(), 80);
        assert_eq!(Qp::from_i64(c, 18, 6).valuation(), Some(2));
    }

    #[test]
    fn additive_character_values() {
        let c = ctx3();
        // psi(1/3) = e^{2 pi i / 3}
        let x = Qp::from_unit(c, 1, -1, 8);
        let v = additive_character(&x).unwrap();
        assert!((v - Complex64::new(0.0, TAU / 3.0).exp()).norm() < 1e-14);
        // trivial on the integers
        let y = Qp::from_i64(c, 5, 8);
        assert!((additive_character(&y).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_even_residual_characteristic() {
        assert!(PadicCtx::new(2).is_err());
        assert!(PadicCtx::new(9).is_err());
        assert!(PadicCtx::new(5).is_ok());
    }
}
