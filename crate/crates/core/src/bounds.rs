//! Exact evaluation of the counting condition
//! `|E| > p·|E_r| + q^C(n,r)` for `E` the canonical embeddings of an
//! `n`-element structure into its `m`-fold blow-up.
//!
//! `q` bounds the number of atomic types of `(r+1)`-tuples over a signature
//! with `t` predicates of arity at most `r`:
//! `q = Bell(r+1) · 2^(t·(r+1)^r)`, where the Bell factor counts equality
//! types and can be left out. `p = ⌈log₂ q⌉`.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Bell number `B(n)` via the Bell triangle.
pub fn bell(n: usize) -> BigUint {
    let mut row = vec![BigUint::one()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(row.last().unwrap().clone());
        for x in &row {
            let v = next.last().unwrap() + x;
            next.push(v);
        }
        row = next;
    }
    row[0].clone()
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

pub fn atomic_type_count(t: u64, r: u64, include_equality: bool) -> Result<BigUint> {
    if r < 1 {
        return Err(Error::InvalidParameter("r must be at least 1".into()));
    }
    let tuples = BigUint::from(r + 1).pow(r as u32) * t;
    let exp = tuples
        .to_u64()
        .ok_or_else(|| Error::Budget("exponent of q does not fit in 64 bits".into()))?;
    let mut q = BigUint::one() << exp;
    if include_equality {
        q *= bell(r as usize + 1);
    }
    Ok(q)
}

/// Smallest `p` with `2^p ≥ q`.
pub fn log_ceil2(q: &BigUint) -> Result<u64> {
    if q.is_zero() {
        return Err(Error::InvalidParameter("log of zero".into()));
    }
    Ok((q - 1u32).bits())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsParams {
    pub n: u64,
    pub r: u64,
    pub t: u64,
    pub m: BigUint,
    pub include_equality: bool,
}

impl BoundsParams {
    pub fn new(n: u64, r: u64, t: u64, m: u64) -> Self {
        BoundsParams {
            n,
            r,
            t,
            m: BigUint::from(m),
            include_equality: true,
        }
    }
}

fn as_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub n: u64,
    pub r: u64,
    pub t: u64,
    #[serde(serialize_with = "as_string")]
    pub m: BigUint,
    pub include_equality: bool,
    #[serde(serialize_with = "as_string")]
    pub q: BigUint,
    pub p: u64,
    /// `N = m^n`.
    #[serde(serialize_with = "as_string")]
    pub spot_count: BigUint,
    /// `M = C(n,r)·m^r`, the number of distinct restrictions.
    #[serde(serialize_with = "as_string")]
    pub partial_spot_count: BigUint,
    /// `m^r`, the per-subset count.
    #[serde(serialize_with = "as_string")]
    pub per_subset_partial_spot_count: BigUint,
    /// `p·M + q^C(n,r)`.
    #[serde(serialize_with = "as_string")]
    pub threshold: BigUint,
    pub verdict: bool,
    /// `p·m^r + q^C(n,r)`.
    #[serde(serialize_with = "as_string")]
    pub per_subset_threshold: BigUint,
    pub per_subset_verdict: bool,
}

pub fn condition_holds(params: &BoundsParams) -> Result<BoundsReport> {
    let BoundsParams { n, r, t, ref m, include_equality } = *params;
    if r < 1 || n < 1 {
        return Err(Error::InvalidParameter("n and r must be at least 1".into()));
    }
    if r > n {
        return Err(Error::InvalidParameter(format!("r = {r} exceeds n = {n}")));
    }
    if m.is_zero() {
        return Err(Error::InvalidParameter("m must be at least 1".into()));
    }
    let q = atomic_type_count(t, r, include_equality)?;
    let p = log_ceil2(&q)?;
    let subsets = binomial(n, r);
    let spot_count = m.pow(n as u32);
    let per_subset = m.pow(r as u32);
    let partial = &subsets * &per_subset;
    let exp = subsets
        .to_u32()
        .ok_or_else(|| Error::Budget("C(n,r) does not fit in 32 bits".into()))?;
    let types = q.pow(exp);
    let threshold = &partial * p + &types;
    let per_subset_threshold = &per_subset * p + &types;
    Ok(BoundsReport {
        n,
        r,
        t,
        m: m.clone(),
        include_equality,
        q,
        p,
        verdict: spot_count > threshold,
        per_subset_verdict: spot_count > per_subset_threshold,
        spot_count,
        partial_spot_count: partial,
        per_subset_partial_spot_count: per_subset,
        threshold,
        per_subset_threshold,
    })
}

/// Least `m ≤ cap` satisfying the condition. With `r < n` the condition is
/// monotone in `m`, so doubling followed by bisection finds it.
pub fn minimal_m(n: u64, r: u64, t: u64, cap: &BigUint, include_equality: bool) -> Result<Option<BigUint>> {
    if r >= n {
        return Err(Error::InvalidParameter(format!("need r < n, got r = {r}, n = {n}")));
    }
    let holds = |m: &BigUint| -> Result<bool> {
        Ok(condition_holds(&BoundsParams {
            n,
            r,
            t,
            m: m.clone(),
            include_equality,
        })?
        .verdict)
    };
    if cap.is_zero() {
        return Ok(None);
    }
    let mut lo = BigUint::zero(); // condition fails (or m = 0)
    let mut hi = BigUint::one();
    while !holds(&hi)? {
        if &hi >= cap {
            return Ok(None);
        }
        lo = hi.clone();
        hi = (&hi << 1u8).min(cap.clone());
    }
    while &hi - &lo > BigUint::one() {
        let mid: BigUint = (&lo + &hi) >> 1u8;
        if holds(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let b: Vec<u64> = (0..7).map(|n| bell(n).to_u64().unwrap()).collect();
        assert_eq!(b, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn type_counts() {
        assert_eq!(atomic_type_count(0, 1, true).unwrap(), BigUint::from(2u32));
        assert_eq!(atomic_type_count(1, 1, true).unwrap(), BigUint::from(8u32));
        assert_eq!(atomic_type_count(2, 2, true).unwrap(), BigUint::from(5u64 << 18));
        assert_eq!(atomic_type_count(1, 1, false).unwrap(), BigUint::from(4u32));
        assert!(atomic_type_count(1, 0, true).is_err());
    }

    #[test]
    fn logs() {
        assert_eq!(log_ceil2(&BigUint::one()).unwrap(), 0);
        assert_eq!(log_ceil2(&BigUint::from(8u32)).unwrap(), 3);
        assert_eq!(log_ceil2(&BigUint::from(9u32)).unwrap(), 4);
        assert_eq!(log_ceil2(&(BigUint::from(5u32) << 45u8)).unwrap(), 48);
        assert!(log_ceil2(&BigUint::zero()).is_err());
    }

    #[test]
    fn condition_examples() {
        let r = condition_holds(&BoundsParams::new(2, 1, 1, 12)).unwrap();
        assert_eq!((r.p, r.verdict), (3, true));
        assert_eq!(r.threshold, BigUint::from(136u32));
        let r = condition_holds(&BoundsParams::new(2, 1, 1, 11)).unwrap();
        assert_eq!(r.threshold, BigUint::from(130u32));
        assert!(!r.verdict);
        let r = condition_holds(&BoundsParams::new(1, 1, 0, 3)).unwrap();
        assert_eq!(r.threshold, BigUint::from(5u32));
        assert!(!r.verdict);
        assert!(condition_holds(&BoundsParams::new(1, 2, 0, 3)).is_err());
    }

    #[test]
    fn minimal_examples() {
        let cap = BigUint::from(1_000_000u32);
        assert_eq!(minimal_m(2, 1, 1, &cap, true).unwrap(), Some(BigUint::from(12u32)));
        assert_eq!(minimal_m(2, 1, 0, &cap, true).unwrap(), Some(BigUint::from(4u32)));
        assert_eq!(minimal_m(3, 1, 1, &cap, true).unwrap(), Some(BigUint::from(9u32)));
        assert_eq!(minimal_m(2, 1, 1, &BigUint::from(11u32), true).unwrap(), None);
        assert_eq!(minimal_m(2, 1, 1, &BigUint::from(12u32), true).unwrap(), Some(BigUint::from(12u32)));
        assert!(minimal_m(2, 2, 1, &cap, true).is_err());
    }
}
