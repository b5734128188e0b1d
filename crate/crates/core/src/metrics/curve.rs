//! Sampled potential curves, their CSV form, and trial accumulators.

use std::fmt::Write as _;

/// Running count, mean and centered second moment; merges associatively.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Accum {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Accum {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Accum) {
        if o.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *o;
            return;
        }
        let n = (self.count + o.count) as f64;
        let d = o.mean - self.mean;
        self.mean += d * o.count as f64 / n;
        self.m2 += o.m2 + d * d * self.count as f64 * o.count as f64 / n;
        self.count += o.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn se(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurvePoint {
    pub nmp: u64,
    pub gap: f64,
    pub gap_se: f64,
    pub avg_entropy: f64,
    pub avg_entropy_se: f64,
    pub ber: f64,
    pub ber_se: f64,
}

/// Potential, average entropy and bit error rate sampled against message count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GapCurve {
    pub points: Vec<CurvePoint>,
    /// 0 for analytic curves.
    pub trial_count: u64,
    pub metadata: Vec<(String, String)>,
}

pub const CSV_HEADER: &str = "nmp,gap,gap_se,avg_entropy,avg_entropy_se,ber,ber_se";

impl GapCurve {
    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.push((key.to_string(), value.to_string()));
        self
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.points.last().map(|p| p.gap)
    }

    /// First message count whose gap lies within `0.02` of the plateau, the
    /// mean over the last 5% of points.
    pub fn convergence_point(&self) -> Option<u64> {
        let n = self.points.len();
        if n == 0 {
            return None;
        }
        let tail = (n / 20).max(1);
        let plateau = self.points[n - tail..].iter().map(|p| p.gap).sum::<f64>() / tail as f64;
        self.points.iter().find(|p| (p.gap - plateau).abs() <= 0.02).map(|p| p.nmp)
    }

    /// First message count at which the gap falls to `target` or below.
    pub fn nmp_to_gap(&self, target: f64) -> Option<u64> {
        self.points.iter().find(|p| p.gap <= target).map(|p| p.nmp)
    }

    /// Linear interpolation of the gap at an arbitrary message count, holding
    /// the end values outside the sampled range.
    pub fn gap_at(&self, nmp: f64) -> Option<f64> {
        let pts = &self.points;
        let first = pts.first()?;
        if nmp <= first.nmp as f64 {
            return Some(first.gap);
        }
        let i = pts.partition_point(|p| (p.nmp as f64) < nmp);
        if i == pts.len() {
            return Some(pts[i - 1].gap);
        }
        let (a, b) = (&pts[i - 1], &pts[i]);
        let w = (nmp - a.nmp as f64) / (b.nmp - a.nmp) as f64;
        Some(a.gap + w * (b.gap - a.gap))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "# trials={}", self.trial_count);
        let _ = writeln!(s, "{CSV_HEADER}");
        for p in &self.points {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.6e},{:.12e},{:.6e},{:.12e},{:.6e}",
                p.nmp, p.gap, p.gap_se, p.avg_entropy, p.avg_entropy_se, p.ber, p.ber_se
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(gaps: &[f64]) -> GapCurve {
        GapCurve {
            points: gaps
                .iter()
                .enumerate()
                .map(|(i, &g)| CurvePoint { nmp: 10 * i as u64, gap: g, ..Default::default() })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn accum_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..97).map(|i| ((i * 37) % 11) as f64 * 0.3 - 1.0).collect();
        let mut whole = Accum::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut parts = Accum::default();
        for chunk in xs.chunks(13) {
            let mut a = Accum::default();
            chunk.iter().for_each(|&x| a.push(x));
            parts.merge(&a);
        }
        assert_eq!(parts.count, whole.count);
        assert!((parts.mean - whole.mean).abs() < 1e-12);
        assert!((parts.m2 - whole.m2).abs() < 1e-9);
    }

    #[test]
    fn convergence_rule() {
        let mut g: Vec<f64> = vec![0.5, 0.3, 0.1, 0.015, 0.001];
        g.extend(std::iter::repeat(0.0).take(40));
        let c = curve(&g);
        assert_eq!(c.convergence_point(), Some(30));
        assert_eq!(c.nmp_to_gap(0.1), Some(20));
        assert_eq!(c.gap_at(5.0), Some(0.4));
    }

    #[test]
    fn csv_layout() {
        let c = curve(&[0.5, 0.25]).with_meta("decoder", "sc");
        let text = c.to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# decoder=sc");
        assert_eq!(lines[2], CSV_HEADER);
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("10,2.5"));
    }
}
