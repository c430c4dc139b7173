//! Component-by-component search for generating vectors, in a direct form
//! and in a fast form built on a circulant matrix-vector product.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::digitspace::{residue, Rule};
use crate::error::{invalid, Error, Result};
use crate::gfpoly::{
    find_irreducible, laurent_digits_raw, poly_mul_mod, primitive_element, GFPoly, Modulus,
    PrimeBase,
};
use crate::kernel::{chi_phi_digits, chi_phi_zero, theoretical_bound, SpaceParams};

/// Score gap, relative to the magnitude of the terms entering a score,
/// below which two candidates count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CbcMode {
    Naive,
    #[default]
    Fast,
}

#[derive(Debug, Clone)]
pub struct CbcConfig {
    pub base: PrimeBase,
    pub m: usize,
    pub n: usize,
    pub params: SpaceParams,
    pub mode: CbcMode,
    pub modulus: Option<Modulus>,
}

/// `ceil(alpha m / 2)`.
pub fn default_n(alpha: u32, m: usize) -> usize {
    (alpha as usize * m).div_ceil(2)
}

impl CbcConfig {
    /// `n` defaults to `ceil(alpha m / 2)`.
    pub fn new(
        base: PrimeBase,
        m: usize,
        n: Option<usize>,
        params: SpaceParams,
        mode: CbcMode,
    ) -> Result<Self> {
        let n = n.unwrap_or_else(|| default_n(params.alpha, m));
        let cfg = CbcConfig {
            base,
            m,
            n,
            params,
            mode,
            modulus: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_modulus(mut self, modulus: Modulus) -> Result<Self> {
        self.modulus = Some(modulus);
        self.validate()?;
        Ok(self)
    }

    pub fn s(&self) -> usize {
        self.params.s()
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return invalid("m must be >= 1");
        }
        if self.n < self.m {
            return invalid(format!("n must be >= m (n = {}, m = {})", self.n, self.m));
        }
        if self.s() == 0 {
            return invalid("dimension must be >= 1");
        }
        if (self.n as f64) * (self.base.get() as f64).log2() > 40.0 {
            return Err(Error::ScaleGuard(format!(
                "b^n too large for a CBC search (n = {})",
                self.n
            )));
        }
        if let Some(p) = &self.modulus {
            if p.base() != self.base {
                return Err(Error::BaseMismatch(self.base.get(), p.base().get()));
            }
            if p.degree() != self.n {
                return invalid(format!(
                    "modulus degree {} differs from n = {}",
                    p.degree(),
                    self.n
                ));
            }
        }
        Ok(())
    }

    fn resolve_modulus(&self) -> Result<Modulus> {
        match &self.modulus {
            Some(p) => Ok(p.clone()),
            None => find_irreducible(self.base, self.n),
        }
    }
}

/// Record of a CBC run.
#[derive(Debug, Clone, PartialEq)]
pub struct CbcTrace {
    /// Encodings of the selected `q_j`.
    pub selected: Vec<u64>,
    /// Criterion value after each coordinate.
    pub criterion: Vec<f64>,
    /// Per coordinate, the score of every candidate indexed by encoding.
    pub candidate_scores: Vec<Vec<f64>>,
    /// A-priori bound at `lambda = 1` for the final rule.
    pub bound_lambda1: f64,
    pub chi_evaluations: usize,
    pub fft_calls: usize,
}

/// Powers of a primitive element and their inverse map.
#[derive(Debug, Clone)]
pub struct LogTables {
    pub g: GFPoly,
    /// `pow[i]` = encoding of `g^i mod p`, `i < b^n - 1`.
    pub pow: Vec<u64>,
    /// `dlog[pow[i]] = i`; entry 0 is unused.
    pub dlog: Vec<u32>,
    /// `small_deg_mask[i]` iff `deg(g^i mod p) < m`.
    pub small_deg_mask: Vec<bool>,
}

pub fn build_log_tables(p: &Modulus, m: usize) -> Result<LogTables> {
    let g = primitive_element(p)?;
    let order = p.order();
    let len = (order - 1) as usize;
    let limit = (p.base().get() as u64).pow(m as u32);
    let mut pow = Vec::with_capacity(len);
    let mut dlog = vec![u32::MAX; order as usize];
    let mut cur = GFPoly::one(p.base());
    for i in 0..len {
        let e = cur.encoding();
        pow.push(e);
        dlog[e as usize] = i as u32;
        cur = poly_mul_mod(&cur, &g, p)?;
    }
    let small_deg_mask = pow.iter().map(|&e| e < limit).collect();
    Ok(LogTables {
        g,
        pow,
        dlog,
        small_deg_mask,
    })
}

/// `C v` for the circulant `C[i][h] = column[(i - h) mod L]`.
pub fn circulant_fft_multiply(column: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if column.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: column.len(),
            got: v.len(),
        });
    }
    let len = column.len();
    if len == 0 {
        return invalid("circulant size must be positive");
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut a: Vec<Complex64> = column.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fwd.process(&mut a);
    fwd.process(&mut c);
    for (x, y) in a.iter_mut().zip(&c) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / len as f64;
    Ok(a.iter().map(|z| z.re * scale).collect())
}

/// Index of the winning candidate: lowest score, ties (within
/// `TIE_TOLERANCE * scale`) resolved by smallest encoding.
fn select(scores: &[f64], scale: f64) -> usize {
    let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * scale;
    scores
        .iter()
        .position(|&s| s <= best + tol)
        .expect("non-empty candidate set")
}

fn chi_of_residue(r: &GFPoly, p: &Modulus, alpha: u32) -> f64 {
    let b = p.base().get();
    let digits = laurent_digits_raw(r.coeffs(), p.poly().coeffs(), b, p.degree());
    chi_phi_digits(&digits, b, alpha)
}

/// Runs the search selected by `cfg.mode`.
pub fn cbc(cfg: &CbcConfig) -> Result<(Rule, CbcTrace)> {
    match cfg.mode {
        CbcMode::Naive => cbc_naive(cfg),
        CbcMode::Fast => cbc_fast(cfg),
    }
}

fn finish(cfg: &CbcConfig, p: Modulus, mut trace: CbcTrace) -> Result<(Rule, CbcTrace)> {
    let q = trace
        .selected
        .iter()
        .map(|&e| GFPoly::from_encoding(cfg.base, e))
        .collect();
    let rule = Rule::new(p, cfg.m, q)?;
    trace.bound_lambda1 = theoretical_bound(cfg.base.get(), cfg.m, cfg.n, &cfg.params, 1.0)?.bound;
    Ok((rule, trace))
}

/// Scores every candidate `q` in `Z_b[x]` of degree below `n` directly.
pub fn cbc_naive(cfg: &CbcConfig) -> Result<(Rule, CbcTrace)> {
    cfg.validate()?;
    let p = cfg.resolve_modulus()?;
    let alpha = cfg.params.alpha;
    let base = cfg.base;
    let npts = (base.get() as u64).pow(cfg.m as u32) as usize;
    let ncand = p.order();
    let w = cfg.params.chi_weights();

    // chi of the point with residue r, indexed by encoding of r
    let chi_table: Vec<f64> = (0..ncand)
        .into_par_iter()
        .map(|e| chi_of_residue(&GFPoly::from_encoding(base, e), &p, alpha))
        .collect();
    let chi_max = chi_table.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let hs: Vec<GFPoly> = (0..npts as u64)
        .map(|h| GFPoly::from_encoding(base, h))
        .collect();

    let mut prod = vec![1.0; npts];
    let mut b_prev = 0.0;
    let mut trace = CbcTrace {
        selected: Vec::new(),
        criterion: Vec::new(),
        candidate_scores: Vec::new(),
        bound_lambda1: 0.0,
        chi_evaluations: ncand as usize,
        fft_calls: 0,
    };
    for &wt in &w {
        let prod_ref = &prod;
        let scores: Vec<f64> = (0..ncand)
            .into_par_iter()
            .map(|e| {
                let q = GFPoly::from_encoding(base, e);
                let mut terms = Vec::with_capacity(npts);
                for (h, hp) in hs.iter().enumerate() {
                    let r = residue(hp, &q, &p).encoding();
                    terms.push(prod_ref[h] * chi_table[r as usize]);
                }
                b_prev + wt / npts as f64 * terms.iter().sum::<f64>()
            })
            .collect();
        let scale =
            b_prev.abs() + wt / npts as f64 * chi_max * prod.iter().map(|x| x.abs()).sum::<f64>();
        let pick = select(&scores, scale);
        let q = GFPoly::from_encoding(base, pick as u64);
        for (h, hp) in hs.iter().enumerate() {
            let r = residue(hp, &q, &p).encoding();
            prod[h] *= 1.0 + wt * chi_table[r as usize];
        }
        b_prev = scores[pick];
        trace.selected.push(pick as u64);
        trace.criterion.push(b_prev);
        trace.candidate_scores.push(scores);
    }
    finish(cfg, p, trace)
}

/// Fast search: candidates `g^i` are scored together by one circulant
/// product per coordinate.
pub fn cbc_fast(cfg: &CbcConfig) -> Result<(Rule, CbcTrace)> {
    cfg.validate()?;
    let p = cfg.resolve_modulus()?;
    let alpha = cfg.params.alpha;
    let b = cfg.base.get();
    let tables = build_log_tables(&p, cfg.m)?;
    let len = tables.pow.len();
    let npts = (b as u64).pow(cfg.m as u32) as f64;
    let w = cfg.params.chi_weights();
    let chi0 = chi_phi_zero(b, alpha);

    let column: Vec<f64> = tables
        .pow
        .par_iter()
        .map(|&e| chi_of_residue(&GFPoly::from_encoding(cfg.base, e), &p, alpha))
        .collect();
    let chi_max = column.iter().fold(chi0.abs(), |a, x| a.max(x.abs()));
    // r[k] = product over chosen coordinates at the point h = g^{-k}
    let mut r: Vec<f64> = (0..len)
        .map(|k| {
            if tables.small_deg_mask[(len - k) % len] {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let mut prod0 = 1.0;
    let mut b_prev = 0.0;
    let mut trace = CbcTrace {
        selected: Vec::new(),
        criterion: Vec::new(),
        candidate_scores: Vec::new(),
        bound_lambda1: 0.0,
        chi_evaluations: column.len(),
        fft_calls: 0,
    };
    for &wt in &w {
        let conv = circulant_fft_multiply(&column, &r)?;
        trace.fft_calls += 1;
        let mut scores = vec![0.0; len + 1];
        scores[0] = wt * chi0 + (1.0 + wt * chi0) * b_prev;
        for (i, &c) in conv.iter().enumerate() {
            scores[tables.pow[i] as usize] = b_prev + wt / npts * (prod0 * chi0 + c);
        }
        let mass = prod0.abs() + r.iter().map(|x| x.abs()).sum::<f64>();
        let pick = select(&scores, b_prev.abs() + wt / npts * chi_max * mass);
        if pick == 0 {
            let f = 1.0 + wt * chi0;
            r.iter_mut().for_each(|x| *x *= f);
        } else {
            let i = tables.dlog[pick] as usize;
            for (k, x) in r.iter_mut().enumerate() {
                if *x != 0.0 {
                    *x *= 1.0 + wt * column[(i + len - k) % len];
                }
            }
        }
        prod0 *= 1.0 + wt * chi0;
        b_prev = scores[pick];
        trace.selected.push(pick as u64);
        trace.criterion.push(b_prev);
        trace.candidate_scores.push(scores);
    }
    finish(cfg, p, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::criterion_b;

    fn base(b: u32) -> PrimeBase {
        PrimeBase::new(b).unwrap()
    }

    fn cfg(b: u32, m: usize, n: usize, alpha: u32, gamma: &[f64], mode: CbcMode) -> CbcConfig {
        let params = SpaceParams::new(alpha, gamma.to_vec(), 1.0).unwrap();
        CbcConfig::new(base(b), m, Some(n), params, mode).unwrap()
    }

    fn direct(column: &[f64], v: &[f64]) -> Vec<f64> {
        let l = column.len();
        (0..l)
            .map(|i| (0..l).map(|h| column[(i + l - h) % l] * v[h]).sum())
            .collect()
    }

    #[test]
    fn log_table_examples() {
        let p = Modulus::new(GFPoly::new(base(2), vec![1, 1, 1]).unwrap()).unwrap();
        let t = build_log_tables(&p, 1).unwrap();
        assert_eq!(t.g.encoding(), 2);
        assert_eq!(t.pow, vec![1, 2, 3]);
        for (i, &e) in t.pow.iter().enumerate() {
            assert_eq!(t.dlog[e as usize] as usize, i);
        }
        assert_eq!(t.small_deg_mask, vec![true, false, false]);
    }

    #[test]
    fn circulant_examples() {
        let v = vec![0.3, -1.0, 2.0, 5.0];
        assert_eq!(
            circulant_fft_multiply(&[1.0, 0.0, 0.0, 0.0], &v)
                .unwrap()
                .iter()
                .map(|x| (x * 1e12).round() / 1e12)
                .collect::<Vec<_>>(),
            v
        );
        let out = circulant_fft_multiply(&[2.0, 3.0, 5.0], &[1.0, 0.0, 0.0]).unwrap();
        for (a, b) in out.iter().zip([2.0, 3.0, 5.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(circulant_fft_multiply(&[1.0], &[1.0, 2.0]).is_err());
        for l in [1usize, 2, 15, 17, 100] {
            let col: Vec<f64> = (0..l).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
            let v: Vec<f64> = (0..l).map(|i| ((i * 5 + 1) % 13) as f64 * 0.25).collect();
            let fast = circulant_fft_multiply(&col, &v).unwrap();
            let slow = direct(&col, &v);
            let scale = slow.iter().fold(1.0f64, |a, x| a.max(x.abs()));
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() <= 1e-9 * scale);
            }
        }
    }

    #[test]
    fn naive_single_point_example() {
        let (rule, trace) = cbc_naive(&cfg(2, 1, 1, 2, &[1.0], CbcMode::Naive)).unwrap();
        assert_eq!(trace.selected, vec![1]);
        assert!((trace.criterion[0] - 0.375).abs() < 1e-14);
        assert!((trace.candidate_scores[0][0] - 1.5).abs() < 1e-14);
        assert_eq!(rule.q()[0].encoding(), 1);
    }

    #[test]
    fn zero_weights_select_zero() {
        for mode in [CbcMode::Naive, CbcMode::Fast] {
            let (_, trace) = cbc(&cfg(2, 2, 3, 2, &[0.0, 0.0, 0.0], mode)).unwrap();
            assert_eq!(trace.selected, vec![0, 0, 0]);
            assert!(trace.criterion.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn fast_matches_naive_and_recomputation() {
        for (b, m, n, alpha) in [(2, 2, 2, 2), (2, 3, 5, 3), (3, 2, 2, 2), (3, 2, 3, 3)] {
            let gamma = [1.0, 0.25, 1.0 / 9.0];
            let (rn, tn) = cbc_naive(&cfg(b, m, n, alpha, &gamma, CbcMode::Naive)).unwrap();
            let (rf, tf) = cbc_fast(&cfg(b, m, n, alpha, &gamma, CbcMode::Fast)).unwrap();
            for (x, y) in tn.criterion.iter().zip(&tf.criterion) {
                assert!((x - y).abs() <= 1e-9 * x.abs());
            }
            if tn.selected != tf.selected {
                continue;
            }
            for (sn, sf) in tn.candidate_scores.iter().zip(&tf.candidate_scores) {
                for (x, y) in sn.iter().zip(sf) {
                    assert!((x - y).abs() <= 1e-9 * x.abs().max(1e-300), "{x} vs {y}");
                }
            }
            let params = SpaceParams::new(alpha, gamma.to_vec(), 1.0).unwrap();
            let full = criterion_b(&rf, &params).unwrap();
            assert!((full - tf.criterion[2]).abs() <= 1e-10 * full);
            assert_eq!(rn.q(), rf.q());
            assert_eq!(tf.chi_evaluations, (b as usize).pow(n as u32) - 1);
            assert_eq!(tf.fft_calls, 3);
        }
    }

    #[test]
    fn config_validation() {
        let params = SpaceParams::new(2, vec![1.0], 1.0).unwrap();
        assert!(CbcConfig::new(base(2), 3, Some(2), params.clone(), CbcMode::Fast).is_err());
        let c = CbcConfig::new(base(2), 4, None, params.clone(), CbcMode::Fast).unwrap();
        assert_eq!(c.n, 4);
        let p = Modulus::new(GFPoly::new(base(2), vec![1, 1, 1]).unwrap()).unwrap();
        assert!(c.with_modulus(p).is_err());
    }

    #[test]
    fn fast_is_deterministic() {
        let c = cfg(2, 4, 6, 3, &[1.0, 0.5, 0.25], CbcMode::Fast);
        let (_, a) = cbc_fast(&c).unwrap();
        let (_, b) = cbc_fast(&c).unwrap();
        assert_eq!(a, b);
    }
}
