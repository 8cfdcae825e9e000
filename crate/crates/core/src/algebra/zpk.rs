//! The local ring ℤ/p^κ used by Hensel lifting, plus rational reconstruction
//! from a residue (half-gcd) and p-adic Newton root lifting.

use std::fmt;
use std::sync::Arc;

use num::{BigInt, BigUint, Integer, One, Signed, Zero};

use crate::error::{AResult, AlgebraError};

use super::rat::Rat;
use super::{Characteristic, Field};

/// Shared modulus data for ℤ/p^κ.
#[derive(Debug, PartialEq, Eq)]
pub struct ZpCtx {
    pub p: u64,
    pub k: u32,
    pub modulus: BigUint,
}

impl ZpCtx {
    pub fn new(p: u64, k: u32) -> Arc<Self> {
        assert!(k >= 1);
        let modulus = BigUint::from(p).pow(k);
        Arc::new(ZpCtx { p, k, modulus })
    }
}

/// An element of ℤ/p^κ. Not a field for κ > 1: `inv` is partial.
#[derive(Clone)]
pub struct ZpK {
    ctx: Arc<ZpCtx>,
    v: BigUint,
}

impl ZpK {
    pub fn new(ctx: &Arc<ZpCtx>, v: BigUint) -> Self {
        ZpK { ctx: ctx.clone(), v: v % &ctx.modulus }
    }

    pub fn from_bigint(ctx: &Arc<ZpCtx>, v: &BigInt) -> Self {
        let m = BigInt::from(ctx.modulus.clone());
        let r = ((v % &m) + &m) % &m;
        ZpK::new(ctx, r.to_biguint().unwrap())
    }

    pub fn from_rat(ctx: &Arc<ZpCtx>, r: &Rat) -> AResult<Self> {
        let den = ZpK::from_bigint(ctx, r.denom());
        ZpK::from_bigint(ctx, r.numer()).div(&den)
    }

    pub fn ctx(&self) -> &Arc<ZpCtx> {
        &self.ctx
    }

    pub fn value(&self) -> &BigUint {
        &self.v
    }

    /// p-adic valuation, capped at κ (zero reports κ).
    pub fn valuation(&self) -> u32 {
        if self.v.is_zero() {
            return self.ctx.k;
        }
        let p = BigUint::from(self.ctx.p);
        let mut v = self.v.clone();
        let mut val = 0;
        while (&v % &p).is_zero() {
            v /= &p;
            val += 1;
        }
        val
    }

    /// Reduction to 𝔽_p.
    pub fn mod_p(&self) -> u64 {
        (&self.v % BigUint::from(self.ctx.p))
            .to_u64_digits()
            .first()
            .copied()
            .unwrap_or(0)
    }

    /// Truncate to a lower precision κ'.
    pub fn truncate(&self, ctx: &Arc<ZpCtx>) -> Self {
        assert!(ctx.p == self.ctx.p && ctx.k <= self.ctx.k);
        ZpK::new(ctx, self.v.clone())
    }
}

impl PartialEq for ZpK {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p && self.ctx.k == other.ctx.k && self.v == other.v
    }
}

impl fmt::Debug for ZpK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.v, self.ctx.p, self.ctx.k)
    }
}

impl fmt::Display for ZpK {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Field for ZpK {
    fn zero_like(&self) -> Self {
        ZpK { ctx: self.ctx.clone(), v: BigUint::zero() }
    }

    fn one_like(&self) -> Self {
        ZpK { ctx: self.ctx.clone(), v: BigUint::one() }
    }

    fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        ZpK::new(&self.ctx, &self.v + &rhs.v)
    }

    fn sub(&self, rhs: &Self) -> Self {
        let m = &self.ctx.modulus;
        ZpK::new(&self.ctx, (m + &self.v) - (&rhs.v % m))
    }

    fn mul(&self, rhs: &Self) -> Self {
        ZpK::new(&self.ctx, &self.v * &rhs.v)
    }

    fn neg(&self) -> Self {
        let m = &self.ctx.modulus;
        ZpK::new(&self.ctx, m - (&self.v % m))
    }

    fn inv(&self) -> AResult<Self> {
        let m = BigInt::from(self.ctx.modulus.clone());
        let a = BigInt::from(self.v.clone());
        let e = a.extended_gcd(&m);
        if !e.gcd.is_one() {
            return Err(AlgebraError::NotInvertible(format!(
                "{} mod {}^{}",
                self.v, self.ctx.p, self.ctx.k
            )));
        }
        Ok(ZpK::from_bigint(&self.ctx, &e.x))
    }

    fn from_int(&self, n: i64) -> Self {
        ZpK::from_bigint(&self.ctx, &BigInt::from(n))
    }

    fn characteristic(&self) -> Characteristic {
        if self.ctx.k == 1 {
            Characteristic::Prime(self.ctx.p)
        } else {
            Characteristic::PrimePower { p: self.ctx.p, k: self.ctx.k }
        }
    }
}

/// Half-gcd rational reconstruction: recover n/d from a residue r mod m with
/// |n|, d ≤ ⌊√(m/2)⌋. Unique within the bound; verified before returning.
pub fn rational_from_residue(r: &BigUint, m: &BigUint) -> Option<Rat> {
    let bound = (m / 2u32).sqrt();
    let mut r0 = BigInt::from(m.clone());
    let mut r1 = BigInt::from(r % m);
    let mut t0 = BigInt::zero();
    let mut t1 = BigInt::one();
    let b = BigInt::from(bound);
    while r1.magnitude() > b.magnitude() {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.magnitude() > b.magnitude() {
        return None;
    }
    let (num, den) = if t1.is_negative() { (-r1, -t1) } else { (r1, t1) };
    if num.gcd(&den) != BigInt::one() {
        return None;
    }
    // Verify num ≡ den * r (mod m).
    let mb = BigInt::from(m.clone());
    let lhs = ((&num - &den * BigInt::from(r.clone())) % &mb + &mb) % &mb;
    if !lhs.is_zero() {
        return None;
    }
    Some(Rat::from_bigs(num, den))
}

/// Newton-lift a simple root of `f` (integer coefficients, low-first) from
/// mod p to mod p^κ. Requires f'(r₀) a unit mod p.
pub fn lift_root(f: &[BigInt], r0: u64, ctx: &Arc<ZpCtx>) -> AResult<ZpK> {
    let eval = |x: &ZpK, coeffs: &[BigInt]| -> ZpK {
        let mut acc = x.zero_like();
        for c in coeffs.iter().rev() {
            acc = acc.mul(x).add(&ZpK::from_bigint(x.ctx(), c));
        }
        acc
    };
    let deriv: Vec<BigInt> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();
    let mut prec = 1u32;
    let mut x = ZpK::new(&ZpCtx::new(ctx.p, 1), BigUint::from(r0));
    while prec < ctx.k {
        prec = (prec * 2).min(ctx.k);
        let c2 = ZpCtx::new(ctx.p, prec);
        x = ZpK::new(&c2, x.value().clone());
        let fx = eval(&x, f);
        let dfx = eval(&x, &deriv);
        x = x.sub(&fx.mul(&dfx.inv().map_err(|_| {
            AlgebraError::Other("derivative not a unit in root lifting".into())
        })?));
    }
    let out = ZpK::new(ctx, x.value().clone());
    // The residue must actually be a root.
    if !eval(&out, f).is_zero() {
        return Err(AlgebraError::Other("Newton lift failed to converge".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstruct_fraction() {
        let ctx = ZpCtx::new(101, 10);
        let x = ZpK::from_rat(&ctx, &Rat::from_pair(-22, 7)).unwrap();
        let back = rational_from_residue(x.value(), &ctx.modulus).unwrap();
        assert_eq!(back, Rat::from_pair(-22, 7));
    }

    #[test]
    fn lift_sqrt2_mod_7() {
        // 3² = 9 ≡ 2 (mod 7)
        let ctx = ZpCtx::new(7, 20);
        let f = [BigInt::from(-2), BigInt::from(0), BigInt::from(1)];
        let r = lift_root(&f, 3, &ctx).unwrap();
        let sq = r.mul(&r);
        assert_eq!(sq, r.from_int(2));
    }

    #[test]
    fn valuation_and_inverse() {
        let ctx = ZpCtx::new(5, 6);
        let x = ZpK::new(&ctx, BigUint::from(50u32));
        assert_eq!(x.valuation(), 2);
        assert!(x.inv().is_err());
        let u = ZpK::new(&ctx, BigUint::from(7u32));
        assert!(u.mul(&u.inv().unwrap()).is_one());
    }
}
