//! Sobolev-space kernel, worst-case error and the quality criterion of
//! folded polynomial lattice rules.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::digitspace::{residue, GElem, PointSet, Rule};
use crate::error::{invalid, Error, Result};
use crate::spectral::{in_e0, mu_alpha, truncated_poly};

/// Highest Bernoulli degree supported by [`bernoulli_poly`].
pub const MAX_BERNOULLI_DEGREE: u32 = 40;

/// Smoothness, weights and the Walsh-coefficient constant of the space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceParams {
    pub alpha: u32,
    pub gamma: Vec<f64>,
    pub d: f64,
}

impl SpaceParams {
    pub fn new(alpha: u32, gamma: Vec<f64>, d: f64) -> Result<Self> {
        if alpha < 2 {
            return invalid(format!("alpha must be >= 2, got {alpha}"));
        }
        if 2 * alpha > MAX_BERNOULLI_DEGREE {
            return invalid(format!("alpha too large: {alpha}"));
        }
        if gamma.iter().any(|g| !g.is_finite() || *g < 0.0) {
            return invalid("weights must be finite and non-negative");
        }
        if !(d.is_finite() && d > 0.0) {
            return invalid(format!("D must be positive, got {d}"));
        }
        Ok(SpaceParams { alpha, gamma, d })
    }

    /// `gamma_j = j^-2`.
    pub fn with_default_weights(alpha: u32, s: usize, d: f64) -> Result<Self> {
        Self::new(alpha, (1..=s).map(|j| 1.0 / (j * j) as f64).collect(), d)
    }

    pub fn s(&self) -> usize {
        self.gamma.len()
    }

    /// Effective per-coordinate weights `sqrt(gamma_j D)`.
    pub fn chi_weights(&self) -> Vec<f64> {
        self.gamma.iter().map(|g| (g * self.d).sqrt()).collect()
    }

    fn check_dim(&self, s: usize) -> Result<()> {
        if self.s() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: self.s(),
            });
        }
        Ok(())
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::new();
        for x in iter {
            k.add(x);
        }
        k
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

/// Coefficients of `B_n(x)` (ascending powers) for `n <= MAX_BERNOULLI_DEGREE`.
fn bernoulli_table() -> &'static Vec<Vec<f64>> {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let top = MAX_BERNOULLI_DEGREE as usize;
        let mut numbers: Vec<BigRational> = vec![BigRational::one()];
        for n in 1..=top {
            let mut acc = BigRational::zero();
            for (j, bj) in numbers.iter().enumerate() {
                acc += BigRational::from_integer(binomial(n + 1, j)) * bj;
            }
            numbers.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        (0..=top)
            .map(|n| {
                (0..=n)
                    .map(|power| {
                        let j = n - power;
                        let c = BigRational::from_integer(binomial(n, j)) * &numbers[j];
                        c.to_f64().expect("finite coefficient")
                    })
                    .collect()
            })
            .collect()
    })
}

/// Value of the Bernoulli polynomial `B_tau(x)`.
pub fn bernoulli_poly(tau: u32, x: f64) -> Result<f64> {
    if tau > MAX_BERNOULLI_DEGREE {
        return invalid(format!(
            "Bernoulli degree {tau} exceeds {MAX_BERNOULLI_DEGREE}"
        ));
    }
    Ok(horner(&bernoulli_table()[tau as usize], x))
}

#[inline]
fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let nf = order as f64;
    (0..order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let kf = k as f64;
                    let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rule: &[(f64, f64)], panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    kahan_sum((0..panels).flat_map(|p| {
        let a = lo + p as f64 * h;
        let f = &f;
        rule.iter()
            .map(move |&(x, w)| 0.5 * h * w * f(a + 0.5 * h * (x + 1.0)))
    }))
}

/// One-dimensional kernel `K_{alpha,(1)}` of the weighted Sobolev space of
/// smoothness `alpha`.
#[derive(Debug, Clone)]
pub struct SobolevKernel {
    alpha: u32,
    /// `B_tau / tau!` for `tau = 1..=alpha`.
    scaled: Vec<Vec<f64>>,
    /// `(-1)^{alpha+1} B_{2 alpha} / (2 alpha)!`.
    tail: Vec<f64>,
}

impl SobolevKernel {
    /// Builds the kernel and checks by quadrature that it integrates to zero
    /// in either argument, which the simplified error formula relies on.
    pub fn new(alpha: u32) -> Result<Self> {
        if alpha < 2 || 2 * alpha > MAX_BERNOULLI_DEGREE {
            return invalid(format!("alpha out of range: {alpha}"));
        }
        let table = bernoulli_table();
        let scaled = (1..=alpha)
            .map(|t| table[t as usize].iter().map(|c| c / factorial(t)).collect())
            .collect();
        let sign = if alpha % 2 == 1 { 1.0 } else { -1.0 };
        let tail = table[2 * alpha as usize]
            .iter()
            .map(|c| sign * c / factorial(2 * alpha))
            .collect();
        let kernel = SobolevKernel {
            alpha,
            scaled,
            tail,
        };
        kernel.verify_zero_mean()?;
        Ok(kernel)
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    fn verify_zero_mean(&self) -> Result<()> {
        let rule = gauss_legendre(2 * self.alpha as usize + 2);
        for tau in 1..=2 * self.alpha {
            let coeffs = &bernoulli_table()[tau as usize];
            let v = integrate(|t| horner(coeffs, t), 0.0, 1.0, &rule, 4);
            if v.abs() > 1e-10 {
                return invalid(format!("Bernoulli polynomial {tau} has mean {v:e}"));
            }
        }
        for x in [0.0, 0.125, 1.0 / 3.0, 0.5, 0.7, 1.0] {
            let v = integrate(|y| self.eval(x, y), 0.0, x, &rule, 4)
                + integrate(|y| self.eval(x, y), x, 1.0, &rule, 4);
            if v.abs() > 1e-10 {
                return invalid(format!("kernel mean at x = {x} is {v:e}"));
            }
        }
        Ok(())
    }

    /// Values `B_tau(x)/tau!`, `tau = 1..=alpha`.
    fn features(&self, x: f64) -> Vec<f64> {
        self.scaled.iter().map(|c| horner(c, x)).collect()
    }

    #[inline]
    fn eval_features(&self, fx: &[f64], fy: &[f64], x: f64, y: f64) -> f64 {
        let smooth: f64 = fx.iter().zip(fy).map(|(a, b)| a * b).sum();
        smooth + horner(&self.tail, (x - y).abs())
    }

    /// Kernel value; inputs are assumed to lie in `[0, 1]`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_features(&self.features(x), &self.features(y), x, y)
    }
}

/// `K_{alpha,(1)}(x, y)` with range checks.
pub fn kernel_k1(alpha: u32, x: f64, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return invalid(format!(
            "kernel arguments must lie in [0, 1], got ({x}, {y})"
        ));
    }
    Ok(SobolevKernel::new(alpha)?.eval(x, y))
}

/// Squared worst-case error of equal-weight quadrature over `points`.
pub fn worst_case_error_sq(points: &[Vec<f64>], params: &SpaceParams) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let s = params.s();
    for pt in points {
        if pt.len() != s {
            return Err(Error::DimensionMismatch {
                expected: s,
                got: pt.len(),
            });
        }
        if pt.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return invalid("point coordinates must lie in [0, 1]");
        }
    }
    let kernel = SobolevKernel::new(params.alpha)?;
    let feats: Vec<Vec<Vec<f64>>> = points
        .iter()
        .map(|pt| pt.iter().map(|&x| kernel.features(x)).collect())
        .collect();
    let rows: Vec<f64> = (0..points.len())
        .into_par_iter()
        .map(|a| {
            kahan_sum((0..points.len()).map(|c| {
                (0..s)
                    .map(|j| {
                        let k = kernel.eval_features(
                            &feats[a][j],
                            &feats[c][j],
                            points[a][j],
                            points[c][j],
                        );
                        1.0 + params.gamma[j] * k
                    })
                    .product::<f64>()
            }))
        })
        .collect();
    let n = points.len() as f64;
    Ok(kahan_sum(rows) / (n * n) - 1.0)
}

/// Squared worst-case error of the projected points of `set`.
pub fn worst_case_error_sq_of(set: &PointSet, params: &SpaceParams) -> Result<f64> {
    worst_case_error_sq(&set.project_f64(), params)
}

/// Auxiliary vectors of the closed form of `chi` for a fixed digit string.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiTables {
    /// `U_0 .. U_{alpha-1}`.
    pub u: Vec<f64>,
    /// `sum_{v=t}^{alpha-1} U_{v-t}` for `t = 0 .. alpha-1`.
    pub utilde: Vec<f64>,
    /// `V_1 .. V_{alpha-1}`.
    pub v: Vec<f64>,
    /// `Vtilde_1 .. Vtilde_alpha`.
    pub vtilde: Vec<f64>,
}

impl ChiTables {
    /// Tables for digits `z_1..z_n` (not all zero, not a constant nonzero
    /// run; see [`chi_phi_digits`]).
    pub fn compute(digits: &[u32], base: u32, alpha: u32) -> ChiTables {
        let a = alpha as usize;
        let n = digits.len();
        let bf = base as f64;
        let z1 = digits[0];
        let rho = if z1 == 0 { bf - 1.0 } else { -1.0 };

        let scale = bf.powi(-(n as i32 - 1));
        let mut u = Vec::with_capacity(a);
        u.push(1.0);
        for t in 1..a {
            let prev = u[t - 1];
            u.push(prev * scale * rho / (bf.powi(t as i32) - 1.0));
        }
        let utilde = (0..a).map(|t| (t..a).map(|v| u[v - t]).sum()).collect();

        // weights w_a = b^-a L(a+1) for a = 1..n-1
        let ell = |i: usize| if digits[i - 1] == z1 { bf - 1.0 } else { -1.0 };
        let w: Vec<f64> = (1..n).map(|i| bf.powi(-(i as i32)) * ell(i + 1)).collect();
        let first_break = digits
            .iter()
            .position(|&d| d != z1)
            .map_or(n + 1, |p| p + 1);

        // right-to-left over a: suffix[j] = e_j(w_{a+1..n-1})
        let mut suffix = vec![0.0; a];
        suffix[0] = 1.0;
        let mut vtilde = vec![0.0; a];
        for i in (1..n).rev() {
            if i < first_break {
                let c = ell(i + 1) / bf;
                for t in 1..=a {
                    vtilde[t - 1] += c * suffix[t - 1];
                }
            }
            let wi = w[i - 1];
            for j in (1..a).rev() {
                suffix[j] += wi * suffix[j - 1];
            }
        }
        let v = suffix[1..].to_vec();
        ChiTables {
            u,
            utilde,
            v,
            vtilde,
        }
    }

    pub fn value(&self) -> f64 {
        let a = self.u.len();
        let mut acc = KahanSum::new();
        for t in 1..a {
            acc.add(self.utilde[t] * self.v[t - 1]);
        }
        acc.add(self.utilde[0] - 1.0);
        for t in 1..=a {
            acc.add(self.u[a - t] * self.vtilde[t - 1]);
        }
        acc.value()
    }
}

/// `chi` at the origin: `sum_{k >= 1} b^{-mu_alpha(k)}`.
pub fn chi_phi_zero(base: u32, alpha: u32) -> f64 {
    let bf = base as f64;
    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in 1..alpha {
        prod *= (bf - 1.0) / (bf.powi(i as i32) - 1.0);
        sum += prod;
    }
    prod *= (bf - 1.0) / (bf.powi(alpha as i32) - 1.0);
    let ba = bf.powi(alpha as i32);
    sum + (ba - 1.0) / (ba - bf) * prod
}

/// `chi` of the tent image of the finite digit string `digits`
/// (trailing digits beyond the slice are zero).
pub fn chi_phi_digits(digits: &[u32], base: u32, alpha: u32) -> f64 {
    let len = digits.iter().rposition(|&d| d != 0).map_or(0, |p| p + 1);
    if len == 0 {
        return chi_phi_zero(base, alpha);
    }
    let digits = &digits[..len];
    if digits.iter().all(|&d| d == digits[0]) {
        let mut padded = digits.to_vec();
        padded.push(0);
        return ChiTables::compute(&padded, base, alpha).value();
    }
    ChiTables::compute(digits, base, alpha).value()
}

/// `sum_{k >= 1} b^{-mu_alpha(k)} W_k(tent(z))` for `z` with zero tail.
pub fn chi_phi(z: &GElem, alpha: u32) -> Result<f64> {
    if z.tail() != 0 {
        return invalid("chi requires an element with zero tail");
    }
    if alpha < 2 {
        return invalid(format!("alpha must be >= 2, got {alpha}"));
    }
    Ok(chi_phi_digits(z.prefix(), z.base(), alpha))
}

/// Quality criterion `B_alpha` of the folded rule via the product form.
pub fn criterion_b(rule: &Rule, params: &SpaceParams) -> Result<f64> {
    params.check_dim(rule.s())?;
    let w = params.chi_weights();
    let b = rule.base().get();
    let alpha = params.alpha;
    let terms: Vec<f64> = (0..rule.num_points() as u64)
        .into_par_iter()
        .map(|h| {
            (0..rule.s())
                .map(|j| {
                    if w[j] == 0.0 {
                        1.0
                    } else {
                        1.0 + w[j] * chi_phi_digits(&rule.coordinate_digits(h, j), b, alpha)
                    }
                })
                .product::<f64>()
        })
        .collect();
    Ok(kahan_sum(terms) / rule.num_points() as f64 - 1.0)
}

/// Result of the truncated dual-lattice enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteCriterion {
    pub value: f64,
    /// Change of the partial sum between cutoffs `c - 2` and `c`.
    pub truncation_bound: f64,
}

fn add_encodings(mut x: u64, mut y: u64, base: u64) -> u64 {
    let mut out = 0;
    let mut place = 1;
    while x > 0 || y > 0 {
        out += ((x % base + y % base) % base) * place;
        x /= base;
        y /= base;
        place *= base;
    }
    out
}

fn brute_sum(rule: &Rule, w: &[f64], alpha: u32, cutoff: u32) -> f64 {
    let b = rule.base().get();
    let bb = b as u64;
    let n = rule.n();
    let limit = bb.pow(cutoff);
    // per coordinate: residue of tr_n(k) q_j mod p -> summed weights
    let groups: Vec<std::collections::BTreeMap<u64, KahanSum>> = rule
        .q()
        .iter()
        .zip(w)
        .map(|(qj, &wj)| {
            // tr_n(k) depends only on k mod b^n
            let period = bb.pow(n as u32).min(limit);
            let res: Vec<u64> = (0..period)
                .map(|t| residue(&truncated_poly(t, rule.base(), n), qj, rule.modulus()).encoding())
                .collect();
            let mut map = std::collections::BTreeMap::new();
            for k in (0..limit).filter(|&k| in_e0(k, b)) {
                let r = res[(k % period) as usize];
                let term = if k == 0 {
                    1.0
                } else {
                    wj * (b as f64).powi(-(mu_alpha(k / bb, b, alpha) as i32))
                };
                map.entry(r).or_insert_with(KahanSum::new).add(term);
            }
            map
        })
        .collect();
    let mut acc: std::collections::BTreeMap<u64, KahanSum> = std::collections::BTreeMap::new();
    acc.insert(0, {
        let mut one = KahanSum::new();
        one.add(1.0);
        one
    });
    for g in &groups {
        let mut next = std::collections::BTreeMap::new();
        for (&r1, s1) in &acc {
            for (&r2, s2) in g {
                next.entry(add_encodings(r1, r2, bb))
                    .or_insert_with(KahanSum::new)
                    .add(s1.value() * s2.value());
            }
        }
        acc = next;
    }
    let low = bb.pow((n - rule.m()) as u32);
    kahan_sum(acc.iter().filter(|(&r, _)| r < low).map(|(_, s)| s.value())) - 1.0
}

/// `B_alpha` by direct enumeration of the dual lattice with every
/// `k_j < b^cutoff_power`. Intended as an oracle for small rules.
pub fn criterion_b_brute(
    rule: &Rule,
    params: &SpaceParams,
    cutoff_power: u32,
) -> Result<BruteCriterion> {
    params.check_dim(rule.s())?;
    if cutoff_power == 0 {
        return invalid("cutoff_power must be positive");
    }
    let b = rule.base().get() as f64;
    if rule.s() > 3 || (cutoff_power as f64) * (rule.s() as f64) * b.log2() > 24.0 {
        return Err(Error::ScaleGuard(format!(
            "brute-force enumeration needs s <= 3 and b^(c s) <= 2^24 (s = {}, c = {cutoff_power})",
            rule.s()
        )));
    }
    let w = params.chi_weights();
    let value = brute_sum(rule, &w, params.alpha, cutoff_power);
    let coarse = if cutoff_power > 2 {
        brute_sum(rule, &w, params.alpha, cutoff_power - 2)
    } else {
        0.0
    };
    Ok(BruteCriterion {
        value,
        truncation_bound: (value - coarse).abs(),
    })
}

/// Constants and value of the a-priori bound for CBC-constructed rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalBound {
    pub a1: f64,
    pub a2: f64,
    pub bound: f64,
}

/// A-priori bound on `B_alpha` of a CBC-constructed rule with `b^m` points
/// and `n` output digits, for `1/alpha < lambda <= 1`.
pub fn theoretical_bound(
    base: u32,
    m: usize,
    n: usize,
    params: &SpaceParams,
    lambda: f64,
) -> Result<TheoreticalBound> {
    let alpha = params.alpha;
    if !(lambda > 1.0 / alpha as f64 && lambda <= 1.0) {
        return invalid(format!("lambda must lie in (1/{alpha}, 1], got {lambda}"));
    }
    let bf = base as f64;
    let bl = bf.powf(lambda);
    let den = |i: u32| bf.powf(lambda * i as f64) - 1.0;
    let bla = bf.powf(lambda * alpha as f64);

    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in 1..alpha {
        prod *= (bf - 1.0) / den(i);
        sum += prod;
    }
    prod *= (bf - 1.0) / den(alpha);
    let a1 = bf / (bf - 1.0) * (sum + (bla - 1.0) / (bla - bf) * prod);

    let mut prod = 1.0;
    let mut sum = 0.0;
    for i in 1..alpha {
        prod *= bl * (bf - 1.0) / den(i);
        if i >= 2 {
            sum += prod;
        }
    }
    let a2 = sum / (bf - 1.0) + bl / (bla - bf) * prod;

    let a = a1 + a2;
    let bracket = params
        .gamma
        .iter()
        .map(|g| 1.0 + (g * params.d).powf(lambda / 2.0) * a)
        .product::<f64>()
        - 1.0;
    let rate = (m as f64 / lambda).min(2.0 * n as f64);
    let bound = bf.powf(-rate) * bracket.max(0.0).powf(1.0 / lambda);
    Ok(TheoreticalBound { a1, a2, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digitspace::hoplps_points;
    use crate::gfpoly::{GFPoly, Modulus, PrimeBase};
    use crate::spectral::{character, WalshIndex};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn rule(base: u32, p: &[u32], m: usize, q: &[&[u32]]) -> Rule {
        let b = PrimeBase::new(base).unwrap();
        let modulus = Modulus::new(GFPoly::new(b, p.to_vec()).unwrap()).unwrap();
        let q = q
            .iter()
            .map(|c| GFPoly::new(b, c.to_vec()).unwrap())
            .collect();
        Rule::new(modulus, m, q).unwrap()
    }

    fn params(alpha: u32, gamma: &[f64]) -> SpaceParams {
        SpaceParams::new(alpha, gamma.to_vec(), 1.0).unwrap()
    }

    /// Truncated character series for chi, evaluated independently of the
    /// closed form.
    fn chi_series(z: &GElem, alpha: u32, cutoff: u32) -> f64 {
        let b = z.base();
        let t = z.tent();
        kahan_sum((1..(b as u64).pow(cutoff)).map(|k| {
            let w = character(WalshIndex::new(k, b), &t)
                .unwrap()
                .to_complex()
                .re;
            (b as f64).powi(-(mu_alpha(k, b, alpha) as i32)) * w
        }))
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli_poly(0, 0.3).unwrap(), 1.0);
        assert!(close(bernoulli_poly(1, 0.0).unwrap(), -0.5, 1e-15));
        assert!(close(bernoulli_poly(2, 0.5).unwrap(), -1.0 / 12.0, 1e-15));
        assert!(close(bernoulli_poly(4, 0.0).unwrap(), -1.0 / 30.0, 1e-15));
        assert!(bernoulli_poly(MAX_BERNOULLI_DEGREE + 1, 0.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert!(close(
            kernel_k1(2, 0.0, 0.0).unwrap(),
            0.25 + 1.0 / 144.0 + 1.0 / 720.0,
            1e-14
        ));
        assert!(close(
            kernel_k1(2, 0.0, 1.0).unwrap(),
            -0.25 + 1.0 / 144.0 + 1.0 / 720.0,
            1e-14
        ));
        for (x, y) in [(0.1, 0.7), (0.33, 0.9), (0.5, 0.25)] {
            for alpha in 2..5 {
                assert!(close(
                    kernel_k1(alpha, x, y).unwrap(),
                    kernel_k1(alpha, y, x).unwrap(),
                    1e-15
                ));
            }
        }
        assert!(kernel_k1(2, -0.1, 0.0).is_err());
        assert!(kernel_k1(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn kernel_builds_for_range_of_alpha() {
        for alpha in 2..=8 {
            SobolevKernel::new(alpha).unwrap();
        }
    }

    #[test]
    fn wce_examples() {
        let p = params(2, &[0.0]);
        assert!(close(
            worst_case_error_sq(&[vec![0.3], vec![0.3]], &p).unwrap(),
            0.0,
            1e-15
        ));
        let p = params(2, &[1.0]);
        let e2 = worst_case_error_sq(&[vec![0.0], vec![1.0]], &p).unwrap();
        assert!(close(e2, 1.0 / 120.0, 1e-14));
        let e2 = worst_case_error_sq(&[vec![0.0]], &p).unwrap();
        assert!(close(e2, 0.25 + 1.0 / 144.0 + 1.0 / 720.0, 1e-14));
        assert_eq!(worst_case_error_sq(&[], &p), Err(Error::EmptyPointSet));
        assert!(worst_case_error_sq(&[vec![0.0, 0.1]], &p).is_err());
    }

    #[test]
    fn chi_examples() {
        let z0 = GElem::zero(2);
        assert!(close(chi_phi(&z0, 2).unwrap(), 1.5, 1e-15));
        let z = GElem::finite(2, vec![0, 1]).unwrap();
        assert!(close(chi_phi(&z, 2).unwrap(), -0.25, 1e-15));
        let z = GElem::finite(2, vec![1]).unwrap();
        assert!(close(chi_phi(&z, 2).unwrap(), -0.75, 1e-15));
        assert!(chi_phi(&GElem::new(2, vec![], 1).unwrap(), 2).is_err());
    }

    #[test]
    fn chi_matches_series() {
        for (b, cutoff) in [(2u32, 14u32), (3, 9)] {
            for alpha in [2u32, 3] {
                for len in 0..=4u32 {
                    for code in 0..(b as u64).pow(len) {
                        let digits: Vec<u32> = (0..len)
                            .map(|i| ((code / (b as u64).pow(i)) % b as u64) as u32)
                            .collect();
                        let z = GElem::finite(b, digits.clone()).unwrap();
                        let fast = chi_phi(&z, alpha).unwrap();
                        let slow = chi_series(&z, alpha, cutoff);
                        assert!(
                            close(fast, slow, 1e-3),
                            "b={b} alpha={alpha} {digits:?}: {fast} vs {slow}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn chi_zero_is_positive_series() {
        for (b, alpha) in [(2u32, 2u32), (2, 3), (3, 2), (5, 2)] {
            let cutoff = if b == 2 { 18 } else { 10 };
            let series = kahan_sum(
                (1..(b as u64).pow(cutoff))
                    .map(|k| (b as f64).powi(-(mu_alpha(k, b, alpha) as i32))),
            );
            assert!(close(chi_phi_zero(b, alpha), series, 1e-3));
        }
    }

    #[test]
    fn chi_ignores_trailing_zeros() {
        let a = chi_phi_digits(&[0, 1, 1], 2, 3);
        let b = chi_phi_digits(&[0, 1, 1, 0, 0, 0], 2, 3);
        assert!(close(a, b, 1e-15));
    }

    #[test]
    fn criterion_examples() {
        let r = rule(2, &[0, 1], 1, &[&[1]]);
        assert!(close(
            criterion_b(&r, &params(2, &[0.0])).unwrap(),
            0.0,
            1e-15
        ));
        assert!(close(
            criterion_b(&r, &params(2, &[1.0])).unwrap(),
            0.375,
            1e-14
        ));
        let r0 = rule(2, &[0, 1], 1, &[&[0]]);
        assert!(close(
            criterion_b(&r0, &params(2, &[1.0])).unwrap(),
            1.5,
            1e-14
        ));
        assert!(criterion_b(&r, &params(2, &[1.0, 1.0])).is_err());
    }

    #[test]
    fn brute_examples() {
        let r = rule(2, &[0, 1], 1, &[&[1]]);
        let zero = criterion_b_brute(&r, &params(2, &[0.0]), 14).unwrap();
        assert!(close(zero.value, 0.0, 1e-15));
        let br = criterion_b_brute(&r, &params(2, &[1.0]), 14).unwrap();
        assert!(close(br.value, 0.375, 1e-3), "{br:?}");
        let r0 = rule(2, &[0, 1], 1, &[&[0]]);
        let br0 = criterion_b_brute(&r0, &params(2, &[1.0]), 14).unwrap();
        assert!(close(br0.value, 1.5, 1e-3), "{br0:?}");
        assert!(matches!(
            criterion_b_brute(&r, &params(2, &[1.0]), 25),
            Err(Error::ScaleGuard(_))
        ));
    }

    /// Direct enumeration over k-vectors with explicit dual-membership tests.
    #[test]
    fn brute_grouping_matches_direct_enumeration() {
        use crate::spectral::dual_lattice_member;
        let r = rule(2, &[1, 1, 1], 2, &[&[1], &[1, 1]]);
        let p = params(2, &[1.0, 0.25]);
        let w = p.chi_weights();
        let cutoff = 6;
        let lim = 2u64.pow(cutoff);
        let mut direct = KahanSum::new();
        for k1 in (0..lim).filter(|&k| in_e0(k, 2)) {
            for k2 in (0..lim).filter(|&k| in_e0(k, 2)) {
                if (k1, k2) == (0, 0) || !dual_lattice_member(&[k1, k2], &r).unwrap() {
                    continue;
                }
                let t = |k: u64, wj: f64| {
                    if k == 0 {
                        1.0
                    } else {
                        wj * 2f64.powi(-(mu_alpha(k / 2, 2, 2) as i32))
                    }
                };
                direct.add(t(k1, w[0]) * t(k2, w[1]));
            }
        }
        let grouped = criterion_b_brute(&r, &p, cutoff).unwrap().value;
        assert!(close(direct.value(), grouped, 1e-13));
    }

    #[test]
    fn criterion_agrees_with_brute_on_small_rule() {
        let r = rule(2, &[1, 1, 1], 2, &[&[1], &[0, 1]]);
        let p = params(2, &[1.0, 0.5]);
        let fast = criterion_b(&r, &p).unwrap();
        let br = criterion_b_brute(&r, &p, 12).unwrap();
        assert!(
            (fast - br.value).abs() <= br.truncation_bound.max(1e-12),
            "{fast} vs {br:?}"
        );
    }

    #[test]
    fn bound_examples() {
        let p = params(2, &[1.0]);
        let tb = theoretical_bound(2, 4, 4, &p, 1.0).unwrap();
        assert!(close(tb.a1, 3.0, 1e-14));
        assert!(close(tb.a2, 2.0, 1e-14));
        assert!(close(tb.bound, 5.0 / 16.0, 1e-14));
        let p0 = params(2, &[0.0, 0.0]);
        assert_eq!(theoretical_bound(2, 4, 4, &p0, 0.75).unwrap().bound, 0.0);
        assert!(theoretical_bound(2, 4, 4, &p, 0.5).is_err());
        assert!(theoretical_bound(2, 4, 4, &p, 1.1).is_err());
    }

    #[test]
    fn error_at_most_criterion_for_small_rule() {
        let r = rule(2, &[0, 1], 1, &[&[1]]);
        let p = params(2, &[1.0]);
        let e = worst_case_error_sq_of(&hoplps_points(&r).folded(), &p)
            .unwrap()
            .sqrt();
        assert!(close(e, (1.0f64 / 120.0).sqrt(), 1e-14));
        assert!(e <= criterion_b(&r, &p).unwrap() + 1e-12);
    }
}
