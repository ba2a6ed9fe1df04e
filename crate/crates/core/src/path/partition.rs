use crate::error::{Error, Result};

/// Points closer than this are treated as duplicates.
pub const MIN_SPACING: f64 = 1e-12;

/// A partition `0 = s_0 < s_1 < … < s_K = 1` of the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    points: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPartition("need at least the points 0 and 1".into()));
        }
        if points[0] != 0.0 || points[points.len() - 1] != 1.0 {
            return Err(Error::InvalidPartition("must start at 0 and end at 1".into()));
        }
        if points.windows(2).any(|w| !(w[1] - w[0] >= MIN_SPACING)) {
            return Err(Error::InvalidPartition("points must increase by at least 1e-12".into()));
        }
        Ok(Partition { points })
    }

    /// `K` equal cells.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("K must be at least 1".into()));
        }
        let mut pts: Vec<f64> = (0..k).map(|i| i as f64 / k as f64).collect();
        pts.push(1.0);
        Partition::new(pts)
    }

    /// `2^level` equal cells.
    pub fn dyadic(level: u32) -> Result<Self> {
        if level > 40 {
            return Err(Error::InvalidPartition("dyadic level too deep".into()));
        }
        Partition::uniform(1usize << level)
    }

    /// Cumulative sums of the cell widths `h_k`; the last point is pinned to 1.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|&h| !(h > 0.0)) {
            return Err(Error::InvalidPartition("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPartition(format!("weights sum to {total}, not 1")));
        }
        let mut pts = Vec::with_capacity(weights.len() + 1);
        pts.push(0.0);
        let mut acc = 0.0;
        for &h in &weights[..weights.len() - 1] {
            acc += h;
            pts.push(acc);
        }
        pts.push(1.0);
        Partition::new(pts)
    }

    /// Adds extra points, dropping any within [`MIN_SPACING`] of one already present.
    pub fn with_points(&self, extra: &[f64]) -> Partition {
        let mut pts: Vec<f64> = self
            .points
            .iter()
            .copied()
            .chain(extra.iter().copied().filter(|s| (0.0..=1.0).contains(s)))
            .collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        let mut out: Vec<f64> = Vec::with_capacity(pts.len());
        for s in pts {
            match out.last() {
                Some(&prev) if s - prev < MIN_SPACING => {
                    // keep the endpoint 1 exact
                    if s == 1.0 {
                        *out.last_mut().expect("nonempty") = 1.0;
                    }
                }
                _ => out.push(s),
            }
        }
        Partition { points: out }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Number of cells `K`.
    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    /// Cell widths `h_k = s_k − s_{k−1}`.
    pub fn weights(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// True if every point of `coarser` is also a point of `self`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        coarser
            .points
            .iter()
            .all(|p| self.points.binary_search_by(|x| x.total_cmp(p)).is_ok())
    }
}
