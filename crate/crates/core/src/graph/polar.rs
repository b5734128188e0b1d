use crate::density::ga;
use crate::error::{invalid, Error, Result};

/// Polar code of length `n = 2^s` with natural-order generator `F^{⊗s}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarCode {
    pub n: usize,
    pub s: usize,
    /// Information positions (0-based, ascending). All other positions are frozen to 0.
    pub info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl PolarCode {
    pub fn new(n: usize, mut info_set: Vec<usize>) -> Result<Self> {
        if n < 2 || !n.is_power_of_two() {
            return invalid(format!("block length {n} is not a power of two >= 2"));
        }
        info_set.sort_unstable();
        info_set.dedup();
        if info_set.iter().any(|&i| i >= n) {
            return invalid("information index out of range");
        }
        let mut frozen = vec![true; n];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(Self { n, s: n.trailing_zeros() as usize, info_set, frozen })
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    /// Encode `u` (length n) into `x = u F^{⊗s}`.
    pub fn encode(&self, u: &[u8]) -> Vec<u8> {
        let mut x = u.to_vec();
        let mut h = 1;
        while h < self.n {
            for r in (0..self.n).filter(|r| r & h == 0) {
                x[r] ^= x[r + h];
            }
            h <<= 1;
        }
        x
    }

    /// Spec file: `n k` then the 1-based information indices.
    pub fn to_spec_string(&self) -> String {
        let idx: Vec<String> = self.info_set.iter().map(|i| (i + 1).to_string()).collect();
        format!("{} {}\n{}\n", self.n, self.k(), idx.join(" "))
    }
}

/// Parse a polar spec file.
pub fn load_polar_spec(text: &str) -> Result<PolarCode> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "missing header"))?;
    let nums: Vec<usize> = head
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| perr(ln + 1, "expected `n k`"))?;
    let [n, k] = nums[..] else { return Err(perr(ln + 1, "expected `n k`")) };
    let (ln2, idx_line) = match lines.next() {
        Some(x) => x,
        None if k == 0 => (ln + 1, ""),
        None => return Err(perr(ln + 2, "missing index line")),
    };
    let idx: Vec<usize> = idx_line
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| perr(ln2 + 1, "bad index"))?;
    if idx.len() != k || idx.iter().any(|&i| i == 0 || i > n) {
        return Err(perr(ln2 + 1, "indices must be k values in 1..=n"));
    }
    let code = PolarCode::new(n, idx.iter().map(|i| i - 1).collect())
        .map_err(|e| perr(ln + 1, &e.to_string()))?;
    if code.k() != k {
        return Err(perr(ln2 + 1, "duplicate index"));
    }
    Ok(code)
}

/// Gaussian-approximation means of the n synthetic bit channels.
///
/// Bits of the index are consumed from the most significant end; a 0 bit
/// applies the check-side update, a 1 bit doubles the mean.
pub fn bit_channel_means(n: usize, design_sigma: f64) -> Vec<f64> {
    let s = n.trailing_zeros();
    let m0 = 2.0 / (design_sigma * design_sigma);
    (0..n)
        .map(|i| {
            (0..s).rev().fold(m0, |m, b| if (i >> b) & 1 == 1 { 2.0 * m } else { minus_mean(m) })
        })
        .collect()
}

fn minus_mean(m: f64) -> f64 {
    ga::ga_c2v(&[m, m])
}

/// Choose the `k` most reliable positions by Gaussian approximation.
pub fn construct_polar(n: usize, k: usize, design_sigma: f64) -> Result<PolarCode> {
    if n < 2 || !n.is_power_of_two() {
        return invalid(format!("block length {n} is not a power of two >= 2"));
    }
    if k > n {
        return invalid(format!("k = {k} exceeds n = {n}"));
    }
    if !(design_sigma > 0.0) {
        return invalid("design sigma must be positive");
    }
    let means = bit_channel_means(n, design_sigma);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]).then(b.cmp(&a)));
    PolarCode::new(n, order[..k].to_vec())
}
