//! Matrix coefficients of the p-adic principal series as exact finite
//! sums over torus levels.
//!
//! The integrand of `<a(t) h_theta, h_mu>` is locally constant on the
//! compact torus, so averaging over the finite quotient at a deep enough
//! level is exact; stabilization is detected by comparing consecutive
//! levels. An independent evaluation decomposes the field into valuation
//! cells of the lower-triangular chart and sums each cell in closed
//! form.

use super::ktypes::{KTypeP, TorusLevel};
use super::padic::{PadicCtx, Qp};
use super::MultiplicativeCharacter;
use crate::error::{Error, Result};
use crate::quad::Kahan;
use crate::tolerances::COEFF_SUM_BUDGET;
use num::complex::Complex64;

/// Projective 2x2 matrix over the p-adic field.
#[derive(Debug, Clone, Copy)]
pub struct Mat2P {
    pub e: [[Qp; 2]; 2],
}

impl Mat2P {
    pub fn new(e: [[Qp; 2]; 2]) -> Self {
        Self { e }
    }

    /// diag(t, 1) * (torus element)
    pub fn torus(ctx: PadicCtx, t: Qp, prec: u32) -> Self {
        Self::new([
            [t, Qp::zero(ctx)],
            [Qp::zero(ctx), Qp::one(ctx, prec)],
        ])
    }

    /// [[1, 0], [x, 1]]
    pub fn lower(ctx: PadicCtx, x: Qp, prec: u32) -> Self {
        Self::new([
            [Qp::one(ctx, prec), Qp::zero(ctx)],
            [x, Qp::one(ctx, prec)],
        ])
    }

    /// Anisotropic torus element [[a, zeta b], [b, a]].
    pub fn anisotropic(a: Qp, b: Qp, zeta: &Qp) -> Self {
        Self::new([[a, zeta.mul(&b)], [b, a]])
    }

    pub fn mul(&self, o: &Mat2P) -> Mat2P {
        let mut out = [[Qp::zero(self.e[0][0].ctx); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.e[i][0]
                    .mul(&o.e[0][j])
                    .add(&self.e[i][1].mul(&o.e[1][j]));
            }
        }
        Mat2P::new(out)
    }
}

/// Normalized anisotropic-torus element: one coordinate is exactly 1.
#[derive(Debug, Clone, Copy)]
pub struct KElem {
    pub a: Qp,
    pub b: Qp,
}

impl KElem {
    /// Normalizes a projective pair with `a^2 - zeta b^2 != 0`.
    pub fn normalize(a: Qp, b: Qp) -> Result<Self> {
        let (va, vb) = (a.valuation(), b.valuation());
        match (va, vb) {
            (None, None) => Err(Error::domain("zero projective pair")),
            (Some(_), None) => Ok(Self {
                a: Qp::one(a.ctx, a.precision().unwrap_or(0)),
                b: Qp::zero(a.ctx),
            }),
            (None, Some(_)) => Ok(Self {
                a: Qp::zero(b.ctx),
                b: Qp::one(b.ctx, b.precision().unwrap_or(0)),
            }),
            (Some(x), Some(y)) => {
                if x <= y {
                    Ok(Self {
                        a: Qp::one(a.ctx, a.precision().unwrap_or(0)),
                        b: b.div(&a)?,
                    })
                } else {
                    Ok(Self {
                        a: a.div(&b)?,
                        b: Qp::one(b.ctx, b.precision().unwrap_or(0)),
                    })
                }
            }
        }
    }

    /// Code of the element in the level quotient.
    pub fn code(&self, torus: &TorusLevel) -> Result<u32> {
        let l = torus.level;
        if !self.a.is_zero() && self.a.valuation() == Some(0) {
            // chart (1, x)
            let x = self.b.residue(l)?;
            torus.encode(1, x)
        } else {
            // chart (y, 1) with y in the maximal ideal
            let y = self.a.residue(l)?;
            torus.encode(y, 1)
        }
    }
}

/// `g = [[1, u], [0, 1]] [[t, 0], [0, 1]] k` with `k` in the anisotropic
/// torus: existence uses that `zeta` is a nonsquare unit.
pub fn padic_iwasawa(g: &Mat2P, zeta: &Qp) -> Result<(Qp, Qp, KElem)> {
    let (g00, g01) = (g.e[0][0], g.e[0][1]);
    let (g10, g11) = (g.e[1][0], g.e[1][1]);
    // k proportional to (a', b') = (g11, g10)
    let (ap, bp) = (g11, g10);
    // m = g * adj(k), adj(k) = [[a', -zeta b'], [-b', a']]
    let m00 = g00.mul(&ap).sub(&g01.mul(&bp));
    let m01 = g01.mul(&ap).sub(&g00.mul(&zeta.mul(&bp)));
    let m11 = g11.mul(&ap).sub(&g10.mul(&zeta.mul(&bp)));
    if m11.is_zero() || !m11.has_precision(1) {
        return Err(Error::Precision(
            "anisotropic norm lost all digits in the Iwasawa step".into(),
        ));
    }
    let t = m00.div(&m11)?;
    let u = m01.div(&m11)?;
    Ok((u, t, KElem::normalize(ap, bp)?))
}

/// `h^chi_theta(g) = chi(t) |t|^{1/2} theta(k)` in the decomposition above.
pub fn h_eval(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    g: &Mat2P,
    zeta: &Qp,
) -> Result<Complex64> {
    let (_, t, k) = padic_iwasawa(g, zeta)?;
    let v = t
        .valuation()
        .ok_or_else(|| Error::Precision("torus part vanished".into()))?;
    let half_modulus = (chi.ctx.p as f64).powf(-0.5 * v as f64);
    let theta_level = theta.table.torus;
    let code = k.code(&theta_level)?;
    Ok(chi.eval(&t)? * half_modulus * theta.value(code))
}

fn working_precision(ctx: PadicCtx, level: u32, j: i64, conductor: u32) -> u32 {
    (level + 2 * j.unsigned_abs() as u32 + conductor + 8).min(ctx.max_precision())
}

/// All coefficients `<a(t) h_theta, h_mu>` for the given `mu`s, summed
/// exactly over one torus level.
fn coeff_row_at_level(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mus: &[&KTypeP],
    t: &Qp,
    torus: &TorusLevel,
) -> Result<Vec<Complex64>> {
    let ctx = torus.ctx;
    let prec = t.precision().unwrap_or(8);
    let zeta = Qp::from_i64(ctx, torus.zeta as i64, prec);
    let at = Mat2P::torus(ctx, *t, prec);
    let size = torus.size() as u32;
    let mut acc = vec![(Kahan::new(), Kahan::new()); mus.len()];
    for code in 0..size {
        let (ar, br) = torus.decode(code);
        let a = Qp::from_i64(ctx, ar as i64, prec);
        let b = Qp::from_i64(ctx, br as i64, prec);
        let k = Mat2P::anisotropic(a, b, &zeta);
        let g = k.mul(&at);
        let h = h_eval(chi, theta, &g, &zeta)?;
        for (i, mu) in mus.iter().enumerate() {
            let v = h * mu.value_at(torus, code).conj();
            acc[i].0.add(v.re);
            acc[i].1.add(v.im);
        }
    }
    Ok(acc
        .into_iter()
        .map(|(re, im)| Complex64::new(re.value(), im.value()) / size as f64)
        .collect())
}

/// Level-stabilized coefficient row for a general torus argument: sums
/// at consecutive levels until they agree exactly (to root-of-unity
/// roundoff). `make_t` produces the torus parameter at a requested
/// working precision; `extra_prec` widens the precision for arguments
/// with large valuation spread.
pub(crate) fn stabilized_row(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mus: &[&KTypeP],
    make_t: &dyn Fn(u32) -> Qp,
    extra_prec: u32,
) -> Result<(Vec<Complex64>, u32)> {
    let ctx = chi.ctx;
    let row_at = |lv: u32| -> Result<Vec<Complex64>> {
        let torus = TorusLevel::new(ctx, lv)?;
        if torus.size() as u64 > COEFF_SUM_BUDGET {
            return Err(Error::Stabilization(
                "coefficient sum not stabilized within the level budget".into(),
            ));
        }
        let prec = (lv + extra_prec + chi.conductor + 8).min(ctx.max_precision());
        let t = make_t(prec);
        coeff_row_at_level(chi, theta, mus, &t, &torus)
    };
    let mu_level = mus.iter().map(|m| m.level()).max().unwrap_or(1);
    let mut level = theta.level().max(mu_level).max(chi.conductor).max(1);
    let mut prev = row_at(level)?;
    loop {
        level += 1;
        let next = row_at(level)?;
        let worst = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if worst < 1e-12 * (1.0 + next.iter().map(|v| v.norm()).fold(0.0, f64::max)) {
            return Ok((next, level));
        }
        prev = next;
    }
}

/// Stabilized coefficient row at `t = p^{-j}`.
pub fn coeff_row(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mus: &[&KTypeP],
    j: i64,
) -> Result<(Vec<Complex64>, u32)> {
    if j < 0 {
        return Err(Error::domain("need |t| >= 1, i.e. j >= 0"));
    }
    let ctx = chi.ctx;
    let make_t = move |prec: u32| Qp::uniformizer_pow(ctx, -j, prec);
    stabilized_row(chi, theta, mus, &make_t, 2 * j as u32)
}

/// Single stabilized coefficient.
pub fn matrix_coeff(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mu: &KTypeP,
    j: i64,
) -> Result<(Complex64, u32)> {
    let (row, level) = coeff_row(chi, theta, &[mu], j)?;
    Ok((row[0], level))
}

/// `sum_mu |<a h_theta, h_mu>|^2` over all types of the stabilized
/// level, computed through the actual coefficients.
pub fn unitarity_sum(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    j: i64,
) -> Result<(f64, u32)> {
    let ctx = chi.ctx;
    // stabilize the integrand vector h(k a(t)) against level refinement
    let mut level = theta.level().max(chi.conductor).max(1);
    let zeta_of = |prec: u32| Qp::from_i64(ctx, smallest_nonsquare_i64(ctx), prec);
    let h_vector = |lv: u32| -> Result<Vec<Complex64>> {
        let torus = TorusLevel::new(ctx, lv)?;
        let prec = working_precision(ctx, lv, j, chi.conductor);
        let t = Qp::uniformizer_pow(ctx, -j, prec);
        let zeta = zeta_of(prec);
        let at = Mat2P::torus(ctx, t, prec);
        (0..torus.size() as u32)
            .map(|code| {
                let (ar, br) = torus.decode(code);
                let a = Qp::from_i64(ctx, ar as i64, prec);
                let b = Qp::from_i64(ctx, br as i64, prec);
                h_eval(chi, theta, &Mat2P::anisotropic(a, b, &zeta).mul(&at), &zeta)
            })
            .collect()
    };
    let mut hv = h_vector(level)?;
    loop {
        let next = h_vector(level + 1)?;
        let fine_torus = TorusLevel::new(ctx, level + 1)?;
        let coarse_torus = TorusLevel::new(ctx, level)?;
        let mut consistent = true;
        for (code, val) in next.iter().enumerate() {
            let down = fine_torus.project(code as u32, &coarse_torus);
            if (val - hv[down as usize]).norm() > 1e-12 {
                consistent = false;
                break;
            }
        }
        if consistent {
            break;
        }
        level += 1;
        hv = next;
        if TorusLevel::new(ctx, level + 1)?.size() as u64 > COEFF_SUM_BUDGET {
            return Err(Error::Stabilization(
                "integrand vector not stabilized within the level budget".into(),
            ));
        }
    }
    let torus = TorusLevel::new(ctx, level)?;
    let n = torus.size();
    if (n as u64) * (n as u64) > 400_000_000 {
        return Err(Error::budget(format!(
            "unitarity sum over {n}^2 pairs too large"
        )));
    }
    let chars = super::ktypes::enumerate_k_types(&torus)?;
    let mut total = Kahan::new();
    for mu in &chars {
        let mut acc_re = Kahan::new();
        let mut acc_im = Kahan::new();
        for (code, h) in hv.iter().enumerate() {
            let v = h * mu.value(code as u32).conj();
            acc_re.add(v.re);
            acc_im.add(v.im);
        }
        let c = Complex64::new(acc_re.value(), acc_im.value()) / n as f64;
        total.add(c.norm_sqr());
    }
    Ok((total.value(), level))
}

fn smallest_nonsquare_i64(ctx: PadicCtx) -> i64 {
    super::ktypes::smallest_nonsquare(ctx.p) as i64
}

/// `(j, |<a(p^{-j}) h_theta, h_theta>|^2 * q^j)` along a range of shells,
/// plus the first index from which the products are constant through the
/// end of the range (to relative 1e-10).
///
/// The products enter the canonical-pairing regime at a finite shell;
/// they are genuinely constant there exactly when the two torus
/// eigenvalues agree in modulus of interference, in particular whenever
/// `chi` takes the value 1 or -1 at the uniformizer.
pub fn casselman_check(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    j_range: std::ops::RangeInclusive<i64>,
) -> Result<(Vec<(i64, f64)>, Option<i64>)> {
    if chi.square_is_trivial() {
        return Err(Error::domain(
            "decay check requires a character with nontrivial square",
        ));
    }
    let q = chi.ctx.p as f64;
    let products: Vec<(i64, f64)> = j_range
        .map(|j| {
            let (c, _) = matrix_coeff(chi, theta, theta, j)?;
            Ok((j, c.norm_sqr() * q.powi(j as i32)))
        })
        .collect::<Result<_>>()?;
    let scale = 1.0 + products.iter().map(|&(_, v)| v.abs()).fold(0.0, f64::max);
    let plateau_from = (0..products.len())
        .find(|&start| {
            let tail = &products[start..];
            tail.len() >= 2
                && tail
                    .iter()
                    .all(|&(_, v)| (v - tail[0].1).abs() <= 1e-10 * scale)
        })
        .map(|i| products[i].0);
    Ok((products, plateau_from))
}

/// Independent evaluation of the coefficient by decomposing the field
/// into valuation cells of the lower-triangular chart: finitely many
/// exactly-summed shells plus closed-form tails on both ends. The inner
/// product here is normalized against the torus quotient convention by
/// the factor `1 + 1/q`.
pub fn matrix_coeff_cell_oracle(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mu: &KTypeP,
    j: i64,
) -> Result<Complex64> {
    if j < 0 {
        return Err(Error::domain("need j >= 0"));
    }
    let ctx = chi.ctx;
    let p = ctx.p;
    let c = chi.conductor as i64;
    let l_theta = theta.level() as i64;
    let l_mu = mu.level() as i64;
    let cdiv2 = (c + 1) / 2;

    // positive tail: integrand identically 1 for v(x) >= v_plus
    let v_plus = [cdiv2, l_theta, l_mu - j, 1]
        .into_iter()
        .max()
        .unwrap();
    let mut total = Complex64::new((p as f64).powi(-v_plus as i32), 0.0);

    // negative tail: all factors reach their asymptotic values for
    // v(x) <= -v_minus; the geometric sum collapses in closed form
    let v_minus = [l_theta, j + l_mu, cdiv2 + 1, j + cdiv2 + 1]
        .into_iter()
        .max()
        .unwrap();
    let theta_inf = theta.value(theta.table.torus.modulus() as u32); // class of [[0, zeta], [1, 0]]
    let mu_inf = mu.value(mu.table.torus.modulus() as u32);
    let tail = chi.alpha_pow(2 * j)
        * theta_inf
        * mu_inf.conj()
        * (p as f64).powi((j - v_minus) as i32);
    total += tail;

    // middle shells, each an exact finite sum over unit residues
    for v in (-v_minus + 1)..v_plus {
        total += shell_sum(chi, theta, mu, j, v)?;
    }

    let norm = 1.0 + 1.0 / p as f64;
    Ok(chi.alpha_pow(-j) * (p as f64).powf(-0.5 * j as f64) * total / norm)
}

/// Exact integral over the shell `v(x) = v` of the chart integrand, with
/// level doubling until the cell sum stabilizes.
fn shell_sum(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mu: &KTypeP,
    j: i64,
    v: i64,
) -> Result<Complex64> {
    let mut lam = (chi.conductor.max(theta.level()).max(mu.level()) + 2) as i64;
    let mut prev: Option<Complex64> = None;
    loop {
        let val = shell_sum_at(chi, theta, mu, j, v, lam as u32)?;
        if let Some(p0) = prev {
            if (val - p0).norm() < 1e-12 * (1.0 + val.norm()) {
                return Ok(val);
            }
        }
        prev = Some(val);
        lam += 1;
        if lam > 14 {
            return Err(Error::Stabilization(format!(
                "shell v = {v} did not stabilize"
            )));
        }
    }
}

fn shell_sum_at(
    chi: &MultiplicativeCharacter,
    theta: &KTypeP,
    mu: &KTypeP,
    j: i64,
    v: i64,
    lam: u32,
) -> Result<Complex64> {
    let ctx = chi.ctx;
    let p = ctx.p;
    let modulus = ctx.pow(lam);
    let prec = (lam + 2 * (j.unsigned_abs() as u32) + 2 * (v.unsigned_abs() as u32) + chi.conductor + 8)
        .min(ctx.max_precision());
    let zeta_int = super::ktypes::smallest_nonsquare(p) as i64;
    let zeta = Qp::from_i64(ctx, zeta_int, prec);
    let one = Qp::one(ctx, prec);
    let mut acc = Complex64::new(0.0, 0.0);
    let cell_vol = (p as f64).powi(-(v + lam as i64) as i32);
    for u in 1..modulus {
        if u % p == 0 {
            continue;
        }
        let x = Qp::from_unit(ctx, u, v, prec);
        let tx = Qp::from_unit(ctx, u, v + j, prec); // p^j x
        let a1 = one.sub(&zeta.mul(&x).mul(&x));
        let a2 = one.sub(&zeta.mul(&tx).mul(&tx));
        let k1 = KElem::normalize(one, x)?.code(&theta.table.torus)?;
        let k2 = KElem::normalize(one, tx)?.code(&mu.table.torus)?;
        let modulus_factor = (a1.abs() * a2.abs()).sqrt().recip();
        let val = chi.inverse_eval(&a1)?
            * chi.eval(&a2)?
            * modulus_factor
            * theta.value(k1)
            * mu.value(k2).conj();
        acc += val;
    }
    Ok(acc * cell_vol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgl2::ktypes::enumerate_k_types;

    fn setup(p: u64) -> (PadicCtx, Qp) {
        let ctx = PadicCtx::new(p).unwrap();
        let zeta = Qp::from_i64(ctx, smallest_nonsquare_i64(ctx), 12);
        (ctx, zeta)
    }

    #[test]
    fn iwasawa_fixes_torus_elements() {
        let (ctx, zeta) = setup(3);
        let a = Qp::from_i64(ctx, 1, 12);
        let b = Qp::from_i64(ctx, 2, 12);
        let k = Mat2P::anisotropic(a, b, &zeta);
        let (u, t, ke) = padic_iwasawa(&k, &zeta).unwrap();
        assert!(u.is_zero() || u.valuation().unwrap() >= 8);
        assert_eq!(t.valuation(), Some(0));
        assert_eq!(t.unit_mod(8).unwrap(), 1);
        // recovered torus element is (1, 2) itself
        assert_eq!(ke.b.residue(2).unwrap(), 2);
    }

    #[test]
    fn iwasawa_on_diagonal() {
        let (ctx, zeta) = setup(3);
        let t0 = Qp::uniformizer_pow(ctx, -2, 12);
        let g = Mat2P::torus(ctx, t0, 12);
        let (u, t, ke) = padic_iwasawa(&g, &zeta).unwrap();
        assert!(u.is_zero());
        assert_eq!(t.valuation(), Some(-2));
        assert!(ke.b.is_zero());
    }

    #[test]
    fn h_eval_identity_and_torus_values() {
        let (ctx, zeta) = setup(3);
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        let theta = &chars[1];
        let id = Mat2P::torus(ctx, Qp::one(ctx, 12), 12);
        let v = h_eval(&chi, theta, &id, &zeta).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        // on a torus element g = k: h = theta(k)
        let a = Qp::from_i64(ctx, 1, 12);
        let b = Qp::from_i64(ctx, 5, 12);
        let k = Mat2P::anisotropic(a, b, &zeta);
        let code = torus.encode(1, 5).unwrap();
        let v = h_eval(&chi, theta, &k, &zeta).unwrap();
        assert!((v - theta.value(code)).norm() < 1e-12);
    }

    #[test]
    fn h_eval_lower_unipotent_closed_form() {
        // h(n(x)) = chi^{-1}(1 - zeta x^2) |1 - zeta x^2|^{-1/2} theta(k(x))
        let (ctx, zeta) = setup(3);
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        for theta in chars.iter().take(3) {
            for &(xu, xv) in &[(1u64, 0i64), (2, 0), (1, 1), (2, -1), (4, -2)] {
                let x = Qp::from_unit(ctx, xu, xv, 14);
                let g = Mat2P::lower(ctx, x, 14);
                let got = h_eval(&chi, theta, &g, &zeta).unwrap();
                let a1 = Qp::one(ctx, 14).sub(&zeta.mul(&x).mul(&x));
                let kcode = KElem::normalize(Qp::one(ctx, 14), x)
                    .unwrap()
                    .code(&torus)
                    .unwrap();
                let expected = chi.inverse_eval(&a1).unwrap() / a1.abs().sqrt()
                    * theta.value(kcode);
                assert!(
                    (got - expected).norm() < 1e-12,
                    "x = {xu} * p^{xv}: {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn coefficients_at_identity_are_orthonormal() {
        let (ctx, _) = setup(3);
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        let (row, _) = coeff_row(&chi, &chars[1], &[&chars[1], &chars[2], &chars[0]], 0).unwrap();
        assert!((row[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(row[1].norm() < 1e-12);
        assert!(row[2].norm() < 1e-12);
    }

    #[test]
    fn cell_oracle_matches_quotient_sums() {
        for p in [3u64, 5] {
            let ctx = PadicCtx::new(p).unwrap();
            let torus = TorusLevel::new(ctx, 1).unwrap();
            let chars = enumerate_k_types(&torus).unwrap();
            let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
            for j in 1..=3i64 {
                for (ti, mi) in [(1usize, 1usize), (1, 2), (2, 3 % chars.len())] {
                    let (direct, _) = matrix_coeff(&chi, &chars[ti], &chars[mi], j).unwrap();
                    let oracle =
                        matrix_coeff_cell_oracle(&chi, &chars[ti], &chars[mi], j).unwrap();
                    assert!(
                        (direct - oracle).norm() < 1e-10,
                        "p={p} j={j} ({ti},{mi}): {direct} vs {oracle}"
                    );
                }
            }
        }
    }

    #[test]
    fn unitarity_at_stabilized_level() {
        let (ctx, _) = setup(3);
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        let (total, level) = unitarity_sum(&chi, &chars[1], 1).unwrap();
        assert!((total - 1.0).abs() < 1e-8, "total = {total} at level {level}");
    }

    #[test]
    fn casselman_products_flatten() {
        // chi(p) = 1 with chi^2 nontrivial through the ramified part:
        // the plateau is genuinely constant for every type
        let ctx = PadicCtx::new(3).unwrap();
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 2, 1, 0, 1).unwrap();
        assert!(!chi.square_is_trivial());
        let (products, plateau) = casselman_check(&chi, &chars[1], 1..=7).unwrap();
        let j0 = plateau.expect("plateau must exist for chi(p) = 1");
        assert!(j0 <= 3, "plateau starts late: {products:?}");
        let level = products.last().unwrap().1;
        assert!(level > 0.0);
    }

    #[test]
    fn casselman_products_oscillate_for_rotating_alpha() {
        // generic alpha: the two canonical-pairing exponentials interfere
        // with exact period ord(alpha^2); products are periodic, not flat
        let ctx = PadicCtx::new(3).unwrap();
        let torus = TorusLevel::new(ctx, 1).unwrap();
        let chars = enumerate_k_types(&torus).unwrap();
        let chi = MultiplicativeCharacter::new(ctx, 1, 1, 1, 8).unwrap();
        let (products, plateau) = casselman_check(&chi, &chars[1], 1..=6).unwrap();
        assert!(plateau.is_none());
        // period 4 = order of alpha^2
        assert!((products[4].1 - products[0].1).abs() < 1e-12 * (1.0 + products[0].1));
        assert!((products[5].1 - products[1].1).abs() < 1e-12 * (1.0 + products[1].1));
    }
}
