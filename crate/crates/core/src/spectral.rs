//! Characters on `Z_b^N`, Walsh functions and dual-lattice membership.
//!
//! Character values are `b`-th roots of unity and are carried as their
//! exponent, so sums over point sets are exact integer tallies.

use num_complex::Complex64;
use num_rational::BigRational;

use crate::digitspace::{residue, GElem, PointSet, Rule};
use crate::error::{Error, Result};
use crate::gfpoly::{GFPoly, PrimeBase};

/// Frequency index `k >= 0` read in base `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WalshIndex {
    k: u64,
    base: u32,
}

impl WalshIndex {
    pub fn new(k: u64, base: u32) -> Self {
        debug_assert!(base >= 2);
        WalshIndex { k, base }
    }

    #[inline]
    pub fn value(self) -> u64 {
        self.k
    }

    #[inline]
    pub fn base(self) -> u32 {
        self.base
    }

    /// Digits `kappa_0, kappa_1, ...` (least significant first, no padding).
    pub fn digits(self) -> Vec<u32> {
        let b = self.base as u64;
        let mut k = self.k;
        let mut out = Vec::new();
        while k > 0 {
            out.push((k % b) as u32);
            k /= b;
        }
        out
    }

    pub fn mu_alpha(self, alpha: u32) -> u32 {
        mu_alpha(self.k, self.base, alpha)
    }

    pub fn delta(self) -> u64 {
        delta(self.k, self.base)
    }

    pub fn in_e(self) -> bool {
        in_e(self.k, self.base)
    }

    pub fn in_e0(self) -> bool {
        in_e0(self.k, self.base)
    }

    /// `floor(k / b)`.
    pub fn shift_down(self) -> WalshIndex {
        WalshIndex {
            k: self.k / self.base as u64,
            base: self.base,
        }
    }

    /// `tr_n(k)`: the polynomial `kappa_0 + kappa_1 x + ... + kappa_{n-1} x^{n-1}`.
    pub fn truncated_poly(self, base: PrimeBase, n: usize) -> GFPoly {
        truncated_poly(self.k, base, n)
    }
}

/// Sum of the `alpha` largest positions (1-indexed from the least
/// significant digit) holding a nonzero digit; zero for `k = 0`.
pub fn mu_alpha(mut k: u64, base: u32, alpha: u32) -> u32 {
    let b = base as u64;
    let mut positions = Vec::new();
    let mut pos = 1u32;
    while k > 0 {
        if !k.is_multiple_of(b) {
            positions.push(pos);
        }
        k /= b;
        pos += 1;
    }
    positions.iter().rev().take(alpha as usize).sum()
}

/// b-adic sum of digits.
pub fn delta(mut k: u64, base: u32) -> u64 {
    let b = base as u64;
    let mut s = 0;
    while k > 0 {
        s += k % b;
        k /= b;
    }
    s
}

/// `k >= 1` with digit sum divisible by `b`.
pub fn in_e(k: u64, base: u32) -> bool {
    k >= 1 && delta(k, base).is_multiple_of(base as u64)
}

/// [`in_e`] or `k = 0`.
pub fn in_e0(k: u64, base: u32) -> bool {
    k == 0 || in_e(k, base)
}

/// The unique `k` in `E_0` with `floor(k / b) = j`.
pub fn lift_to_e0(j: u64, base: u32) -> u64 {
    let b = base as u64;
    let beta = (b - delta(j, base) % b) % b;
    b * j + beta
}

pub fn truncated_poly(mut k: u64, base: PrimeBase, n: usize) -> GFPoly {
    let b = base.get() as u64;
    let mut coeffs = Vec::with_capacity(n);
    for _ in 0..n {
        if k == 0 {
            break;
        }
        coeffs.push((k % b) as u32);
        k /= b;
    }
    GFPoly::from_raw(base, coeffs)
}

impl std::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, other: RootOfUnity) -> RootOfUnity {
        debug_assert_eq!(self.base, other.base);
        RootOfUnity {
            exponent: (self.exponent + other.exponent) % self.base,
            base: self.base,
        }
    }
}

/// `omega^exponent` with `omega = exp(2 pi i / b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    pub exponent: u32,
    pub base: u32,
}

impl RootOfUnity {
    pub fn one(base: u32) -> Self {
        RootOfUnity { exponent: 0, base }
    }

    pub fn conj(self) -> Self {
        RootOfUnity {
            exponent: (self.base - self.exponent) % self.base,
            base: self.base,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI * self.exponent as f64 / self.base as f64,
        )
    }
}

/// Exponent of `W_k(z) = omega^{kappa_0 z_1 + ... + kappa_{a-1} z_a}`.
fn character_exponent(k: u64, z: &GElem) -> u32 {
    let b = z.base() as u64;
    let mut k = k;
    let mut i = 1usize;
    let mut e = 0u64;
    while k > 0 {
        e += (k % b) * z.digit(i) as u64;
        k /= b;
        i += 1;
    }
    (e % b) as u32
}

/// The `k`-th character evaluated at `z`.
pub fn character(k: WalshIndex, z: &GElem) -> Result<RootOfUnity> {
    if k.base != z.base() {
        return Err(Error::BaseMismatch(k.base, z.base()));
    }
    Ok(RootOfUnity {
        exponent: character_exponent(k.k, z),
        base: k.base,
    })
}

/// Product of one-dimensional characters over the coordinates.
pub fn character_vec(k: &[WalshIndex], z: &[GElem]) -> Result<RootOfUnity> {
    if k.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: k.len(),
        });
    }
    let base = z.first().map_or(2, GElem::base);
    k.iter()
        .zip(z)
        .try_fold(RootOfUnity::one(base), |acc, (&kj, zj)| {
            Ok(acc * character(kj, zj)?)
        })
}

/// `wal_k(x) = W_k(section(x))`.
pub fn walsh(k: WalshIndex, x: &BigRational) -> Result<RootOfUnity> {
    character(k, &GElem::section(x, k.base)?)
}

/// Membership of `k` in the dual polynomial lattice of `rule`:
/// `sum_j tr_n(k_j) q_j mod p` has degree below `n - m`.
pub fn dual_lattice_member(kvec: &[u64], rule: &Rule) -> Result<bool> {
    if kvec.len() != rule.s() {
        return Err(Error::DimensionMismatch {
            expected: rule.s(),
            got: kvec.len(),
        });
    }
    let base = rule.base();
    let n = rule.n();
    let mut acc = GFPoly::zero(base);
    for (&k, qj) in kvec.iter().zip(rule.q()) {
        let t = truncated_poly(k, base, n);
        acc = acc.add(&residue(&t, qj, rule.modulus()))?;
    }
    Ok(acc.degree_below(n - rule.m()))
}

/// Tally of root-of-unity exponents; `counts[e]` is the multiplicity of
/// `omega^e` in the sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharSum {
    pub base: u32,
    pub counts: Vec<u64>,
}

impl CharSum {
    pub fn to_complex(&self) -> Complex64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(e, &c)| {
                RootOfUnity {
                    exponent: e as u32,
                    base: self.base,
                }
                .to_complex()
                    * c as f64
            })
            .sum()
    }

    /// Exact integer value when the sum is `c_0 - c_1` with all nonzero
    /// exponents equally represented (the only way a prime-`b` tally is an
    /// integer), otherwise `None`.
    pub fn as_integer(&self) -> Option<i64> {
        let rest = &self.counts[1..];
        let c1 = rest.first().copied().unwrap_or(0);
        rest.iter()
            .all(|&c| c == c1)
            .then(|| self.counts[0] as i64 - c1 as i64)
    }
}

/// `sum_{z in P} W_k(z)` as an exact tally.
pub fn char_sum_net(k: &[u64], points: &PointSet) -> Result<CharSum> {
    if k.len() != points.dim {
        return Err(Error::DimensionMismatch {
            expected: points.dim,
            got: k.len(),
        });
    }
    let b = points.base as u64;
    let mut counts = vec![0u64; points.base as usize];
    for pt in &points.points {
        let e: u64 = k
            .iter()
            .zip(pt)
            .map(|(&kj, zj)| character_exponent(kj, zj) as u64)
            .sum();
        counts[(e % b) as usize] += 1;
    }
    Ok(CharSum {
        base: points.base,
        counts,
    })
}
