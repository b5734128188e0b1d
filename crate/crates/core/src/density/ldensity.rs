//! Quantized symmetric L-densities.
//!
//! A symmetric density satisfies `c(-y) = e^{-y} c(y)`, so it is fully
//! described by the distribution of `|y|`. Magnitudes live on the grid
//! `kδ, k = 0..=K` with `Kδ = L_max`, plus a point mass at `+∞`. The signed
//! view on `[-L_max, L_max]` is recovered on demand.
//!
//! `⊛` convolves the signed masses exactly on the grid (via FFT) and folds
//! back. Magnitudes past `L_max` land on the boundary bin; their entropy
//! contribution is below 1e-15.
//!
//! `⊞` multiplies `t = tanh(|y|/2)` pairwise and splits each product between
//! the two neighbouring grid magnitudes linearly in `t`. That split preserves
//! total mass and `E[t]` exactly, which keeps `⊞` a mean-exact operation on
//! the quantity it multiplies.

use super::ga::log2_1p_exp_neg;
use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::{Arc, OnceLock};

/// Uniform magnitude grid with cached transforms and `⊞` routing table.
pub struct Grid {
    pub l_max: f64,
    pub delta: f64,
    /// Index of the last magnitude bin (`K`).
    pub top: usize,
    /// `1 - tanh(kδ/2)` per magnitude bin, computed without cancellation.
    q: Vec<f64>,
    /// Entropy of a symmetric pair at `±kδ`, per unit mass.
    h: Vec<f64>,
    fft_len: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    box_table: OnceLock<Vec<(u32, f64)>>,
}

impl std::fmt::Debug for Grid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Grid(l_max={}, delta={})", self.l_max, self.delta)
    }
}

/// Entropy of a symmetric pair of point masses at `±y`, written in terms of
/// `q = 1 - tanh(y/2)`: the binary entropy of `q/2`.
fn pair_entropy(q: f64) -> f64 {
    let p = q / 2.0;
    if p <= 0.0 {
        return 0.0;
    }
    -(p * p.ln() + (1.0 - p) * (-p).ln_1p()) / std::f64::consts::LN_2
}

impl Grid {
    pub fn new(l_max: f64, delta: f64) -> Result<Arc<Self>> {
        let top = (l_max / delta).round() as usize;
        if !(delta > 0.0 && l_max > 0.0) || ((top as f64) * delta - l_max).abs() > 1e-9 * l_max {
            return Err(Error::InvalidArgument("L_max must be a positive multiple of delta".into()));
        }
        let q = (0..=top)
            .map(|k| {
                let e = (-(k as f64) * delta).exp();
                2.0 * e / (1.0 + e)
            })
            .collect();
        let h = (0..=top)
            .map(|k| {
                let x = k as f64 * delta;
                let eps = 1.0 / (1.0 + x.exp());
                (1.0 - eps) * log2_1p_exp_neg(x) + eps * log2_1p_exp_neg(-x)
            })
            .collect();
        let fft_len = (4 * top + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            l_max,
            delta,
            top,
            q,
            h,
            fft_len,
            fwd: planner.plan_fft_forward(fft_len),
            inv: planner.plan_fft_inverse(fft_len),
            box_table: OnceLock::new(),
        }))
    }

    /// The default grid: `L_max = 40`, `δ = 0.05`.
    pub fn standard() -> Arc<Self> {
        static G: OnceLock<Arc<Grid>> = OnceLock::new();
        G.get_or_init(|| Grid::new(crate::L_MAX, 0.05).expect("valid grid")).clone()
    }

    pub fn n_signed_bins(&self) -> usize {
        2 * self.top + 1
    }

    fn same(&self, other: &Grid) -> bool {
        std::ptr::eq(self, other) || (self.l_max == other.l_max && self.delta == other.delta)
    }

    /// For `k <= l`, where the product `t_k t_l` lands: lower bin and weight of the upper bin.
    fn table(&self) -> &[(u32, f64)] {
        self.box_table.get_or_init(|| {
            let n = self.top + 1;
            let mut out = Vec::with_capacity(n * (n + 1) / 2);
            for k in 0..n {
                for l in k..n {
                    out.push(self.locate(self.q[k] + self.q[l] - self.q[k] * self.q[l], k));
                }
            }
            out
        })
    }

    /// Split `q` (= 1 - t) between grid neighbours; `hi_bound` bounds the answer.
    /// The weights keep the entropy of the landed mass unchanged.
    fn locate(&self, q: f64, hi_bound: usize) -> (u32, f64) {
        if q >= 1.0 {
            return (0, 0.0);
        }
        // Magnitude of the product, then correct for rounding in the guess.
        let z = ((2.0 - q) / q).ln();
        let mut j = ((z / self.delta).floor() as usize).min(hi_bound);
        while j > 0 && self.q[j] < q {
            j -= 1;
        }
        while j < hi_bound && self.q[j + 1] >= q {
            j += 1;
        }
        if j == hi_bound || self.q[j] == q {
            return (j as u32, 0.0);
        }
        // Entropy-preserving split: the pair's entropy equals that of `q`.
        let (hj, h) = (pair_entropy(self.q[j]), pair_entropy(q));
        let w = ((hj - h) / (hj - pair_entropy(self.q[j + 1]))).clamp(0.0, 1.0);
        (j as u32, w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointMass {
    /// No information (`Δ0`).
    Zero,
    /// Perfect knowledge (`Δ∞`).
    Infinity,
}

#[derive(Debug, Clone)]
pub struct LDensity {
    grid: Arc<Grid>,
    mag: Vec<f64>,
    inf: f64,
}

impl PartialEq for LDensity {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same(&other.grid) && self.mag == other.mag && self.inf == other.inf
    }
}

impl LDensity {
    pub fn point_mass(grid: &Arc<Grid>, kind: PointMass) -> Self {
        let mut mag = vec![0.0; grid.top + 1];
        let inf = match kind {
            PointMass::Zero => {
                mag[0] = 1.0;
                0.0
            }
            PointMass::Infinity => 1.0,
        };
        Self { grid: grid.clone(), mag, inf }
    }

    /// Build from magnitude masses (index k ↔ |y| = kδ) and the mass at +∞.
    pub fn from_magnitudes(grid: &Arc<Grid>, mag: Vec<f64>, inf: f64) -> Result<Self> {
        if mag.len() != grid.top + 1 || mag.iter().any(|m| !(*m >= 0.0)) || !(inf >= 0.0) {
            return Err(Error::InvalidArgument("bad magnitude masses".into()));
        }
        Ok(Self { grid: grid.clone(), mag, inf })
    }

    /// Channel density: `N(2/σ², 4/σ²)` integrated per signed bin with an
    /// 8-point midpoint rule, then folded onto magnitudes.
    pub fn quantize_awgn(grid: &Arc<Grid>, spec: &ChannelSpec) -> Self {
        let (mean, var) = (spec.u0(), 2.0 * spec.u0());
        let sd = var.sqrt();
        let d = grid.delta;
        let top = grid.top as i64;
        let sub = d / 8.0;
        let norm = 1.0 / (2.0 * std::f64::consts::PI * var).sqrt();
        let pdf = |y: f64| norm * (-(y - mean) * (y - mean) / (2.0 * var)).exp() * sub;
        let mut signed = vec![0.0; grid.n_signed_bins()];
        let mut inf = 0.0;
        // Integrate bin by bin over the Gaussian's effective support.
        let lo = ((mean - 40.0 * sd) / d).floor() as i64;
        let hi = ((mean + 40.0 * sd) / d).ceil() as i64;
        for j in lo..=hi {
            let c = j as f64 * d;
            let m: f64 = (0..8).map(|s| pdf(c - d / 2.0 + (s as f64 + 0.5) * sub)).sum();
            if j > top {
                inf += m;
            } else {
                signed[(j.max(-top) + top) as usize] += m;
            }
        }
        let total: f64 = signed.iter().sum::<f64>() + inf;
        let mut out = Self::fold(grid, &signed, grid.top);
        out.mag.iter_mut().for_each(|m| *m /= total);
        out.inf = inf / total;
        out
    }

    /// Magnitude view of signed masses centred at `offset` (index of y = 0).
    fn fold(grid: &Arc<Grid>, signed: &[f64], offset: usize) -> Self {
        let mut mag = vec![0.0; grid.top + 1];
        for (i, &m) in signed.iter().enumerate() {
            let k = (i as i64 - offset as i64).unsigned_abs() as usize;
            mag[k.min(grid.top)] += m.max(0.0);
        }
        Self { grid: grid.clone(), mag, inf: 0.0 }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn magnitudes(&self) -> &[f64] {
        &self.mag
    }
    pub fn inf_mass(&self) -> f64 {
        self.inf
    }
    pub fn total_mass(&self) -> f64 {
        self.mag.iter().sum::<f64>() + self.inf
    }

    /// Signed masses on `-L_max..=L_max` (index `i` ↔ `y = (i - K)δ`).
    pub fn signed_masses(&self) -> Vec<f64> {
        let top = self.grid.top;
        let mut out = vec![0.0; 2 * top + 1];
        out[top] = self.mag[0];
        for k in 1..=top {
            let e = (-(k as f64) * self.grid.delta).exp();
            out[top + k] = self.mag[k] / (1.0 + e);
            out[top - k] = self.mag[k] * e / (1.0 + e);
        }
        out
    }

    /// Mean of the finite part.
    pub fn mean(&self) -> f64 {
        let d = self.grid.delta;
        self.mag
            .iter()
            .enumerate()
            .map(|(k, m)| m * k as f64 * d * (k as f64 * d / 2.0).tanh())
            .sum()
    }

    /// `∫ c(y) log2(1 + e^{-y}) dy`.
    pub fn entropy(&self) -> f64 {
        self.mag.iter().zip(&self.grid.h).map(|(m, h)| m * h).sum()
    }

    /// Probability that the LLR is negative, counting half of any mass at 0.
    pub fn error_probability(&self) -> f64 {
        let d = self.grid.delta;
        self.mag.iter().enumerate().map(|(k, m)| m / (1.0 + (k as f64 * d).exp())).sum()
    }

    /// Convex combination of densities on one grid.
    pub fn mixture(parts: &[(f64, &LDensity)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::InvalidArgument("empty mixture".into()));
        };
        let mut out = Self { grid: first.grid.clone(), mag: vec![0.0; first.mag.len()], inf: 0.0 };
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        for (w, d) in parts {
            if !d.grid.same(&out.grid) {
                return Err(Error::GridMismatch);
            }
            out.mag.iter_mut().zip(&d.mag).for_each(|(o, m)| *o += w / total * m);
            out.inf += w / total * d.inf;
        }
        Ok(out)
    }

    /// Variable-node convolution `⊛`.
    pub fn vn_convolve(&self, other: &Self) -> Result<Self> {
        let g = &self.grid;
        if !g.same(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let inf = self.inf + other.inf - self.inf * other.inf;
        let (fa, fb) = (1.0 - self.inf, 1.0 - other.inf);
        if fa * fb == 0.0 {
            return Ok(Self::point_mass(g, PointMass::Infinity));
        }
        // Δ0 is the identity; skip the transform.
        if self.mag[0] == fa {
            return Ok(Self { inf, mag: other.mag.iter().map(|m| m * fa).collect(), ..other.clone() });
        }
        if other.mag[0] == fb {
            return Ok(Self { inf, mag: self.mag.iter().map(|m| m * fb).collect(), ..self.clone() });
        }
        let n = g.fft_len;
        let load = |d: &Self| {
            let mut buf: Vec<Complex<f64>> =
                d.signed_masses().into_iter().map(|m| Complex::new(m, 0.0)).collect();
            buf.resize(n, Complex::new(0.0, 0.0));
            g.fwd.process(&mut buf);
            buf
        };
        let mut a = load(self);
        let b = load(other);
        a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
        g.inv.process(&mut a);
        let signed: Vec<f64> = a[..4 * g.top + 1].iter().map(|c| c.re / n as f64).collect();
        let mut out = Self::fold(g, &signed, 2 * g.top);
        out.inf = inf;
        Ok(out)
    }

    /// Check-node convolution `⊞`.
    pub fn cn_convolve(&self, other: &Self) -> Result<Self> {
        let g = &self.grid;
        if !g.same(&other.grid) {
            return Err(Error::GridMismatch);
        }
        let n = g.top + 1;
        let table = g.table();
        let mut out = vec![0.0; n];
        // Pairs (k, l) with k <= l share one routing entry for both orders.
        let mut row_start = 0;
        for k in 0..n {
            let (ak, bk) = (self.mag[k], other.mag[k]);
            let row = &table[row_start..row_start + (n - k)];
            row_start += n - k;
            if ak == 0.0 && bk == 0.0 {
                continue;
            }
            for (i, &(j, w)) in row.iter().enumerate() {
                let l = k + i;
                let m = if i == 0 { ak * bk } else { ak * other.mag[l] + bk * self.mag[l] };
                if m == 0.0 {
                    continue;
                }
                let j = j as usize;
                out[j] += m * (1.0 - w);
                if w > 0.0 {
                    out[j + 1] += m * w;
                }
            }
        }
        // Δ∞ is the identity for ⊞.
        for k in 0..n {
            out[k] += self.inf * other.mag[k] + other.inf * self.mag[k];
        }
        Ok(Self { grid: g.clone(), mag: out, inf: self.inf * other.inf })
    }

    /// CSV dump: header row carries the infinite mass, then (bin_center, mass).
    pub fn to_csv(&self) -> String {
        let top = self.grid.top as f64;
        let mut s = format!("# inf_mass={:e}\nbin_center,mass\n", self.inf);
        for (i, m) in self.signed_masses().iter().enumerate() {
            s.push_str(&format!("{},{:e}\n", (i as f64 - top) * self.grid.delta, m));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Arc<Grid> {
        Grid::standard()
    }
    fn awgn(sigma: f64) -> LDensity {
        LDensity::quantize_awgn(&g(), &ChannelSpec::new(sigma).unwrap())
    }
    fn zero() -> LDensity {
        LDensity::point_mass(&g(), PointMass::Zero)
    }
    fn inf() -> LDensity {
        LDensity::point_mass(&g(), PointMass::Infinity)
    }

    /// Dense quadrature of `∫ N(m, 2m)(y) log2(1 + e^{-y}) dy`.
    fn entropy_oracle(sigma: f64) -> f64 {
        let m = 2.0 / (sigma * sigma);
        let sd = (2.0 * m).sqrt();
        let (lo, hi) = (m - 40.0 * sd, m + 40.0 * sd);
        let n = 1_000_000;
        let h = (hi - lo) / n as f64;
        (0..=n)
            .map(|i| {
                let y = lo + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (-(y - m).powi(2) / (2.0 * sd * sd)).exp()
                    / (2.0 * std::f64::consts::PI).sqrt()
                    / sd
                    * log2_1p_exp_neg(y)
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn point_masses() {
        assert_eq!(zero().entropy(), 1.0);
        assert_eq!(inf().entropy(), 0.0);
        assert_eq!(zero().vn_convolve(&zero()).unwrap(), zero());
        assert_eq!(g().n_signed_bins(), 1601);
    }

    #[test]
    fn awgn_normalization_and_entropy() {
        for s in [0.5, 1.0, 2.0] {
            assert!((awgn(s).total_mass() - 1.0).abs() < 1e-9);
        }
        for s in [1.0, 0.97865] {
            assert!((awgn(s).entropy() - entropy_oracle(s)).abs() < 1e-3);
        }
        assert!(awgn(1e3).entropy() > 0.999);
    }

    #[test]
    fn identities_and_absorption() {
        let a = awgn(0.9);
        let close = |x: &LDensity, y: &LDensity| {
            x.mag.iter().zip(&y.mag).all(|(p, q)| (p - q).abs() < 1e-14)
                && (x.inf - y.inf).abs() < 1e-14
        };
        assert!(close(&a.vn_convolve(&zero()).unwrap(), &a));
        assert_eq!(a.vn_convolve(&inf()).unwrap(), inf());
        assert!(close(&a.cn_convolve(&inf()).unwrap(), &a));
        assert!(close(&a.cn_convolve(&zero()).unwrap(), &zero()));
    }

    #[test]
    fn vn_convolution_adds_means() {
        let (a, b) = (awgn(1.2), awgn(1.5));
        let want = 2.0 / 1.44 + 2.0 / 2.25;
        assert!((a.vn_convolve(&b).unwrap().mean() - want).abs() < 2.0 * 0.05);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let other = Grid::new(20.0, 0.1).unwrap();
        let b = LDensity::point_mass(&other, PointMass::Zero);
        assert_eq!(zero().vn_convolve(&b), Err(Error::GridMismatch));
        assert_eq!(zero().cn_convolve(&b), Err(Error::GridMismatch));
    }

    #[test]
    fn check_convolution_preserves_mass_and_entropy() {
        let (a, b) = (awgn(0.8), awgn(1.1));
        let c = a.cn_convolve(&b).unwrap();
        assert!((c.total_mass() - 1.0).abs() < 1e-12);
        let q = &a.grid.q;
        let mut exact = 0.0;
        for (k, x) in a.mag.iter().enumerate() {
            for (l, y) in b.mag.iter().enumerate() {
                exact += x * y * pair_entropy(q[k] + q[l] - q[k] * q[l]);
            }
        }
        assert!((c.entropy() - exact).abs() < 1e-12, "{} vs {exact}", c.entropy());
        let tmean = |d: &LDensity| {
            d.mag.iter().enumerate().map(|(k, m)| m * (1.0 - d.grid.q[k])).sum::<f64>() + d.inf
        };
        assert!((tmean(&c) - tmean(&a) * tmean(&b)).abs() < 1e-3);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let csv = awgn(1.0).to_csv();
        assert!(csv.starts_with("# inf_mass="));
        assert_eq!(csv.lines().count(), 2 + 1601);
    }
}
