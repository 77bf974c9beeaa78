//! Exact binomial and multinomial coefficients on `u128` with overflow detection.

use crate::error::{Error, Result};

pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication
        let num = (n - i) as u128;
        acc = acc
            .checked_mul(num)
            .ok_or(Error::Overflow("binomial"))?
            / (i as u128 + 1);
    }
    Ok(acc)
}

/// `(Σ parts)! / Π parts!`, built as a product of binomials over prefix sums.
pub fn multinomial(parts: &[u64]) -> Result<u128> {
    let mut total = 0u64;
    let mut acc: u128 = 1;
    for &p in parts {
        total += p;
        acc = acc
            .checked_mul(binomial(total, p)?)
            .ok_or(Error::Overflow("multinomial"))?;
    }
    Ok(acc)
}

pub fn checked_product<I: IntoIterator<Item = u128>>(factors: I) -> Result<u128> {
    factors.into_iter().try_fold(1u128, |acc, f| {
        acc.checked_mul(f).ok_or(Error::Overflow("product"))
    })
}
