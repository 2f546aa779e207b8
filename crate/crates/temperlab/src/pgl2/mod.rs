//! The p-adic group at odd residual characteristic: fixed-precision
//! field arithmetic, the compact anisotropic torus and its characters at
//! finite level, exact matrix coefficients, oscillatory sums, and ball
//! sums over valuation shells.

pub mod ball;
pub mod coeff;
pub mod ktypes;
pub mod osc;
pub mod padic;

pub use ball::{ball_sum, character_formula_check, schur_report_padic, ShellLadder};
pub use coeff::{casselman_check, h_eval, matrix_coeff, padic_iwasawa};
pub use ktypes::{enumerate_k_types, KTypeP, TorusLevel};
pub use osc::{j_m_bruteforce, j_m_closed_form, oscillatory_total, TruncatedPowerSeries};
pub use padic::{PadicCtx, Qp};

use crate::error::{Error, Result};
use num::complex::Complex64;
use std::f64::consts::TAU;

/// Unitary character of the multiplicative group: determined by an exact
/// root of unity at the uniformizer and a character of the units through
/// a finite conductor.
#[derive(Debug, Clone)]
pub struct MultiplicativeCharacter {
    pub ctx: PadicCtx,
    /// chi(p) = exp(2 pi i alpha_num / alpha_den)
    pub alpha_num: i64,
    pub alpha_den: u64,
    /// conductor: 0 for unramified, else smallest c with chi trivial on 1 + p^c O
    pub conductor: u32,
    /// dual exponent against a fixed generator of (Z/p^c)^*
    pub unit_exponent: u64,
    generator: u64,
    unit_order: u64,
}

impl MultiplicativeCharacter {
    /// `alpha = exp(2 pi i alpha_num / alpha_den)`; `unit_exponent`
    /// selects the character of `(Z / p^conductor)^*` against the
    /// smallest primitive root. The conductor must be exact: for
    /// `conductor >= 1` the unit character must not factor through
    /// `(Z / p^{conductor - 1})^*`.
    pub fn new(
        ctx: PadicCtx,
        conductor: u32,
        unit_exponent: u64,
        alpha_num: i64,
        alpha_den: u64,
    ) -> Result<Self> {
        if alpha_den == 0 {
            return Err(Error::invalid("alpha denominator must be positive"));
        }
        let m = ctx.pow(conductor);
        let unit_order = if conductor == 0 {
            1
        } else {
            m / ctx.p * (ctx.p - 1)
        };
        let generator = if conductor == 0 {
            1
        } else {
            primitive_root(ctx.p, m, unit_order)?
        };
        let chi = Self {
            ctx,
            alpha_num,
            alpha_den,
            conductor,
            unit_exponent: unit_exponent % unit_order.max(1),
            generator,
            unit_order,
        };
        if conductor == 1 {
            // nontrivial on the units
            if chi.unit_exponent == 0 {
                return Err(Error::invalid(
                    "trivial unit character declared with conductor 1",
                ));
            }
        } else if conductor >= 2 {
            // nontrivial on the cyclic subgroup generated by 1 + p^{c-1}
            let probe = 1 + ctx.pow(conductor - 1);
            if (chi.unit_value(probe)? - Complex64::new(1.0, 0.0)).norm() < 1e-12 {
                return Err(Error::invalid(format!(
                    "unit exponent {unit_exponent} has conductor below {conductor}"
                )));
            }
        }
        Ok(chi)
    }

    /// Unramified character with given alpha.
    pub fn unramified(ctx: PadicCtx, alpha_num: i64, alpha_den: u64) -> Result<Self> {
        Self::new(ctx, 0, 0, alpha_num, alpha_den)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(
            0.0,
            TAU * self.alpha_num as f64 / self.alpha_den as f64,
        )
        .exp()
    }

    /// chi(p^v) as an exact root of unity.
    pub fn alpha_pow(&self, v: i64) -> Complex64 {
        let den = self.alpha_den as i128;
        let num = (self.alpha_num as i128 * v as i128).rem_euclid(den);
        Complex64::new(0.0, TAU * num as f64 / den as f64).exp()
    }

    pub fn is_ramified(&self) -> bool {
        self.conductor > 0
    }

    /// Value on a unit residue.
    pub fn unit_value(&self, u: u64) -> Result<Complex64> {
        if self.conductor == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let m = self.ctx.pow(self.conductor);
        let u = u % m;
        if u % self.ctx.p == 0 {
            return Err(Error::domain("unit residue expected"));
        }
        let k = discrete_log(u, self.generator, m, self.unit_order)?;
        let num = (self.unit_exponent as u128 * k as u128) % self.unit_order as u128;
        Ok(Complex64::new(
            0.0,
            TAU * num as f64 / self.unit_order as f64,
        )
        .exp())
    }

    /// Value at a nonzero element.
    pub fn eval(&self, x: &Qp) -> Result<Complex64> {
        let v = x
            .valuation()
            .ok_or_else(|| Error::domain("character of zero"))?;
        let u = if self.conductor == 0 {
            1
        } else {
            x.unit_mod(self.conductor)?
        };
        Ok(self.alpha_pow(v) * self.unit_value(u)?)
    }

    pub fn inverse_eval(&self, x: &Qp) -> Result<Complex64> {
        Ok(self.eval(x)?.conj())
    }

    /// `d(chi) = 1 / |1 - alpha|` for unramified nontrivial chi, else 0.
    pub fn d_invariant(&self) -> Result<f64> {
        if self.conductor != 0 {
            return Ok(0.0);
        }
        let gap = (Complex64::new(1.0, 0.0) - self.alpha()).norm();
        if gap < 1e-12 {
            return Err(Error::invalid(
                "trivial character has no oscillation invariant",
            ));
        }
        Ok(1.0 / gap)
    }

    /// True when the square of the character is trivial (exact test on
    /// the rational data).
    pub fn square_is_trivial(&self) -> bool {
        let alpha_sq_trivial = (2 * self.alpha_num).rem_euclid(self.alpha_den as i64) == 0;
        let unit_sq_trivial = if self.conductor == 0 {
            true
        } else {
            (2 * self.unit_exponent) % self.unit_order == 0
        };
        alpha_sq_trivial && unit_sq_trivial
    }
}

fn primitive_root(p: u64, m: u64, order: u64) -> Result<u64> {
    let factors = {
        let mut n = order;
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                out.push(d);
                while n % d == 0 {
                    n /= d;
                }
            }
            d += 1;
        }
        if n > 1 {
            out.push(n);
        }
        out
    };
    'cand: for g in 2..m {
        if g % p == 0 {
            continue;
        }
        for &q in &factors {
            if pow_mod(g, order / q, m) == 1 {
                continue 'cand;
            }
        }
        return Ok(g);
    }
    Err(Error::Degenerate(format!("no primitive root mod {m}")))
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

fn discrete_log(u: u64, g: u64, m: u64, order: u64) -> Result<u64> {
    // conductors stay tiny here; a linear walk is exact and cheap
    let mut acc: u64 = 1;
    for k in 0..order {
        if acc == u {
            return Ok(k);
        }
        acc = ((acc as u128 * g as u128) % m as u128) as u64;
    }
    Err(Error::Degenerate(format!("no discrete log of {u} mod {m}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unramified_character() {
        let ctx = PadicCtx::new(3).unwrap();
        let chi = MultiplicativeCharacter::unramified(ctx, 1, 8).unwrap();
        assert_eq!(chi.conductor, 0);
        let x = Qp::from_unit(ctx, 2, 3, 8);
        let v = chi.eval(&x).unwrap();
        assert!((v - chi.alpha_pow(3)).norm() < 1e-14);
        assert!((chi.d_invariant().unwrap() - 1.0 / (Complex64::new(1.0, 0.0) - chi.alpha()).norm()).abs() < 1e-12);
    }

    #[test]
    fn ramified_character_multiplicative() {
        let ctx = PadicCtx::new(5).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 2, 1, 0, 1).unwrap();
        assert_eq!(chi.conductor, 2);
        assert_eq!(chi.d_invariant().unwrap(), 0.0);
        for &(a, b) in &[(2u64, 7u64), (3, 11), (23, 4)] {
            let va = chi.unit_value(a).unwrap();
            let vb = chi.unit_value(b).unwrap();
            let vab = chi.unit_value((a * b) % 25).unwrap();
            assert!((va * vb - vab).norm() < 1e-12);
        }
    }

    #[test]
    fn conductor_exactness_enforced() {
        let ctx = PadicCtx::new(3).unwrap();
        // unit exponent 0 factors through conductor 0
        assert!(MultiplicativeCharacter::new(ctx, 1, 0, 1, 4).is_err());
        // order of (Z/9)^* is 6; exponent 3 gives a character of order 2,
        // which is already defined mod 3, so conductor 2 is wrong for it
        assert!(MultiplicativeCharacter::new(ctx, 2, 3, 1, 4).is_err());
        assert!(MultiplicativeCharacter::new(ctx, 2, 1, 1, 4).is_ok());
    }

    #[test]
    fn square_triviality() {
        let ctx = PadicCtx::new(3).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 2).unwrap();
        // unit part has order 2, alpha = -1: chi^2 = 1
        assert!(chi.square_is_trivial());
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        assert!(!chi.square_is_trivial());
    }
}

