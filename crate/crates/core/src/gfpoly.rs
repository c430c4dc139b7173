//! Polynomials over the prime field `Z_b`.
//!
//! Coefficients are stored in ascending degree order with no trailing
//! zeros, so the zero polynomial is the empty vector. Degrees are reported
//! as `Option<usize>`; `None` stands for the degree of the zero polynomial
//! and orders below every `Some(d)`.
//!
//! Integers are identified with polynomials through their base-`b` digits:
//! `n = n_0 + n_1 b + ...` corresponds to `n_0 + n_1 x + ...`.

use std::fmt;

use crate::error::{invalid, Error, Result};

/// A prime number used as the coefficient field size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeBase(u32);

impl PrimeBase {
    pub fn new(b: u32) -> Result<Self> {
        if is_prime_u64(b as u64) {
            Ok(PrimeBase(b))
        } else {
            Err(Error::NotPrime(b))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for PrimeBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime factors of `n`, ascending, by trial division.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomial over `Z_b` in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GFPoly {
    base: PrimeBase,
    coeffs: Vec<u32>,
}

impl GFPoly {
    /// Builds a polynomial from ascending coefficients. Every digit must lie
    /// in `[0, b)`; trailing zeros are dropped.
    pub fn new(base: PrimeBase, coeffs: Vec<u32>) -> Result<Self> {
        let b = base.get();
        if let Some(&c) = coeffs.iter().find(|&&c| c >= b) {
            return invalid(format!("coefficient {c} out of range for base {b}"));
        }
        Ok(Self::from_raw(base, coeffs))
    }

    pub(crate) fn from_raw(base: PrimeBase, mut coeffs: Vec<u32>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        GFPoly { base, coeffs }
    }

    pub fn zero(base: PrimeBase) -> Self {
        GFPoly {
            base,
            coeffs: Vec::new(),
        }
    }

    pub fn one(base: PrimeBase) -> Self {
        GFPoly {
            base,
            coeffs: vec![1],
        }
    }

    /// The monomial `x`.
    pub fn x(base: PrimeBase) -> Self {
        GFPoly {
            base,
            coeffs: vec![0, 1],
        }
    }

    /// Polynomial whose coefficients are the base-`b` digits of `n`.
    pub fn from_encoding(base: PrimeBase, mut n: u64) -> Self {
        let b = base.get() as u64;
        let mut coeffs = Vec::new();
        while n > 0 {
            coeffs.push((n % b) as u32);
            n /= b;
        }
        GFPoly { base, coeffs }
    }

    /// Coefficient digits read as a base-`b` integer.
    pub fn encoding(&self) -> u64 {
        let b = self.base.get() as u64;
        self.coeffs
            .iter()
            .rev()
            .fold(0u64, |acc, &c| acc * b + c as u64)
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.base
    }

    #[inline]
    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    /// Coefficient of `x^i`, zero beyond the stored range.
    #[inline]
    pub fn coeff(&self, i: usize) -> u32 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    /// `None` for the zero polynomial.
    #[inline]
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    /// True iff `deg(self) < d`; the zero polynomial passes for every `d`.
    pub fn degree_below(&self, d: usize) -> bool {
        self.coeffs.len() <= d
    }

    fn check_base(&self, other: &GFPoly) -> Result<()> {
        if self.base != other.base {
            Err(Error::BaseMismatch(self.base.get(), other.base.get()))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &GFPoly) -> Result<GFPoly> {
        self.check_base(other)?;
        let b = self.base.get();
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| (self.coeff(i) + other.coeff(i)) % b)
            .collect();
        Ok(Self::from_raw(self.base, coeffs))
    }

    pub fn sub(&self, other: &GFPoly) -> Result<GFPoly> {
        self.check_base(other)?;
        let b = self.base.get();
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|i| (self.coeff(i) + b - other.coeff(i)) % b)
            .collect();
        Ok(Self::from_raw(self.base, coeffs))
    }

    pub fn scale(&self, c: u32) -> GFPoly {
        let b = self.base.get() as u64;
        let c = c as u64 % b;
        let coeffs = self
            .coeffs
            .iter()
            .map(|&a| ((a as u64 * c) % b) as u32)
            .collect();
        Self::from_raw(self.base, coeffs)
    }

    /// Schoolbook product.
    pub fn mul(&self, other: &GFPoly) -> Result<GFPoly> {
        self.check_base(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(GFPoly::zero(self.base));
        }
        let b = self.base.get() as u64;
        let mut acc = vec![0u64; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &c) in other.coeffs.iter().enumerate() {
                acc[i + j] = (acc[i + j] + a as u64 * c as u64) % b;
            }
        }
        Ok(Self::from_raw(
            self.base,
            acc.into_iter().map(|v| v as u32).collect(),
        ))
    }

    /// Long division: returns `(q, r)` with `self = q*d + r`, `deg r < deg d`.
    pub fn divmod(&self, d: &GFPoly) -> Result<(GFPoly, GFPoly)> {
        self.check_base(d)?;
        let dd = d.degree().ok_or(Error::DivisionByZero)?;
        let b = self.base.get() as u64;
        let lead_inv = inv_mod(d.coeffs[dd] as u64, b);
        let mut rem: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        if rem.len() <= dd {
            return Ok((GFPoly::zero(self.base), self.clone()));
        }
        let mut quot = vec![0u64; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let top = rem[k + dd];
            if top == 0 {
                continue;
            }
            let f = top * lead_inv % b;
            quot[k] = f;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                rem[k + j] = (rem[k + j] + (b - f) * dc as u64) % b;
            }
        }
        rem.truncate(dd);
        Ok((
            Self::from_raw(self.base, quot.into_iter().map(|v| v as u32).collect()),
            Self::from_raw(self.base, rem.into_iter().map(|v| v as u32).collect()),
        ))
    }

    /// Remainder of division by `d`.
    pub fn rem(&self, d: &GFPoly) -> Result<GFPoly> {
        Ok(self.divmod(d)?.1)
    }

    /// Scales by the inverse of the leading coefficient.
    pub fn to_monic(&self) -> GFPoly {
        match self.coeffs.last() {
            None => self.clone(),
            Some(&lead) => self.scale(inv_mod(lead as u64, self.base.get() as u64) as u32),
        }
    }
}

impl fmt::Display for GFPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match (i, c) {
                (0, c) => write!(f, "{c}")?,
                (1, 1) => write!(f, "x")?,
                (1, c) => write!(f, "{c}x")?,
                (i, 1) => write!(f, "x^{i}")?,
                (i, c) => write!(f, "{c}x^{i}")?,
            }
        }
        Ok(())
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p prime and a != 0 mod p.
    pow_u64(a % p, p - 2, p)
}

fn pow_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

/// A monic irreducible polynomial of degree `n >= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Modulus {
    p: GFPoly,
}

impl Modulus {
    /// Validates that `p` is monic, of degree at least one and irreducible.
    pub fn new(p: GFPoly) -> Result<Self> {
        match p.degree() {
            None | Some(0) => {
                return Err(Error::InvalidModulus(format!("degree of {p} is below 1")))
            }
            _ => {}
        }
        if !p.is_monic() {
            return Err(Error::InvalidModulus(format!("{p} is not monic")));
        }
        if !is_irreducible(&p)? {
            return Err(Error::InvalidModulus(format!("{p} is reducible")));
        }
        Ok(Modulus { p })
    }

    /// Like [`Modulus::new`] but first rescales `p` to be monic.
    pub fn monicized(p: GFPoly) -> Result<Self> {
        Self::new(p.to_monic())
    }

    #[inline]
    pub fn poly(&self) -> &GFPoly {
        &self.p
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.p.coeffs.len() - 1
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.p.base
    }

    /// Number of residues, `b^n`.
    pub fn order(&self) -> u64 {
        (self.p.base.get() as u64).pow(self.degree() as u32)
    }
}

/// `(a * c) mod p`.
pub fn poly_mul_mod(a: &GFPoly, c: &GFPoly, p: &Modulus) -> Result<GFPoly> {
    a.check_base(&p.p)?;
    a.mul(c)?.rem(&p.p)
}

/// `(q, r)` with `a = q*d + r` and `deg r < deg d`.
pub fn poly_divmod(a: &GFPoly, d: &GFPoly) -> Result<(GFPoly, GFPoly)> {
    a.divmod(d)
}

/// `a^e mod p` by square-and-multiply.
pub fn poly_pow_mod(a: &GFPoly, mut e: u64, p: &Modulus) -> Result<GFPoly> {
    let mut base = a.rem(&p.p)?;
    let mut acc = GFPoly::one(a.base).rem(&p.p)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mul_mod(&acc, &base, p)?;
        }
        base = poly_mul_mod(&base, &base, p)?;
        e >>= 1;
    }
    Ok(acc)
}

/// Trial division by every monic polynomial of degree `1..=deg(p)/2`.
pub fn is_irreducible(p: &GFPoly) -> Result<bool> {
    let deg = match p.degree() {
        Some(d) if d >= 1 => d,
        _ => return invalid("irreducibility requires degree >= 1"),
    };
    let b = p.base.get() as u64;
    for d in 1..=deg / 2 {
        let lo = b.pow(d as u32);
        for enc in lo..2 * lo {
            let f = GFPoly::from_encoding(p.base, enc);
            if p.rem(&f)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The monic irreducible of degree `n` with the smallest integer encoding.
pub fn find_irreducible(base: PrimeBase, n: usize) -> Result<Modulus> {
    if n < 1 {
        return invalid("degree must be >= 1");
    }
    let lo = (base.get() as u64).pow(n as u32);
    for enc in lo..2 * lo {
        let p = GFPoly::from_encoding(base, enc);
        if is_irreducible(&p)? {
            return Ok(Modulus { p });
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// The generator of the multiplicative group of `Z_b[x]/(p)` with the
/// smallest integer encoding.
pub fn primitive_element(p: &Modulus) -> Result<GFPoly> {
    let group = p.order() - 1;
    let factors = prime_factors(group);
    let one = GFPoly::one(p.base());
    for enc in 1..p.order() {
        let g = GFPoly::from_encoding(p.base(), enc);
        let mut ok = true;
        for &r in &factors {
            if poly_pow_mod(&g, group / r, p)? == one {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(g);
        }
    }
    Err(Error::InvalidModulus(format!(
        "no primitive element found modulo {}",
        p.poly()
    )))
}

/// First `w` digits `t_1..t_w` of the expansion `a/p = sum_l t_l x^{-l}`.
///
/// Requires `deg a < deg p`.
pub fn laurent_digits(a: &GFPoly, p: &Modulus, w: usize) -> Result<Vec<u32>> {
    a.check_base(&p.p)?;
    let n = p.degree();
    if !a.degree_below(n) {
        return invalid(format!("numerator degree must be below {n}"));
    }
    if w == 0 {
        return invalid("digit count must be >= 1");
    }
    Ok(laurent_digits_raw(
        a.coeffs(),
        p.p.coeffs(),
        p.base().get(),
        w,
    ))
}

/// Recurrence `t_l = a_{n-l} - sum_{i<l} t_i p_{n-l+i}` on raw slices.
/// `p` must be monic of degree `n = p.len() - 1`.
pub(crate) fn laurent_digits_raw(a: &[u32], p: &[u32], b: u32, w: usize) -> Vec<u32> {
    let n = p.len() - 1;
    let b = b as u64;
    let mut t = vec![0u32; w];
    for l in 1..=w {
        let mut acc = if l <= n {
            a.get(n - l).copied().unwrap_or(0) as u64
        } else {
            0
        };
        // i ranges over earlier digits whose partner index n-l+i lies in [0, n).
        let i_lo = l.saturating_sub(n).max(1);
        for i in i_lo..l {
            let pc = p[n + i - l] as u64;
            if pc != 0 {
                acc += (b - pc) * t[i - 1] as u64;
            }
        }
        t[l - 1] = (acc % b) as u32;
    }
    t
}
