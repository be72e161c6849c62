use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open (clamped) knot vector of a univariate B-spline space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
    breaks: Vec<f64>,
    /// Continuity across inner breakpoints; `-1` means discontinuous.
    smoothness: i32,
}

impl KnotVector {
    /// Knot vector of `S_{p,k}(Z)`: boundary knots repeated `p+1` times,
    /// inner breakpoints repeated `p-k` times.
    pub fn new(degree: usize, smoothness: i32, breaks: &[f64]) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidSpline(format!("degree {degree} must be >= 1")));
        }
        if smoothness < -1 || smoothness >= degree as i32 {
            return Err(Error::InvalidSpline(format!(
                "smoothness {smoothness} must satisfy -1 <= k < p = {degree}"
            )));
        }
        check_breaks(breaks)?;
        let p = degree;
        let inner_mult = (p as i32 - smoothness) as usize;
        let mut knots = Vec::with_capacity(2 * (p + 1) + inner_mult * breaks.len());
        knots.extend(std::iter::repeat_n(breaks[0], p + 1));
        for &z in &breaks[1..breaks.len() - 1] {
            knots.extend(std::iter::repeat_n(z, inner_mult));
        }
        knots.extend(std::iter::repeat_n(*breaks.last().unwrap(), p + 1));
        Ok(Self {
            degree,
            knots,
            breaks: breaks.to_vec(),
            smoothness,
        })
    }

    /// Knot vector given explicitly (e.g. from a geometry file). Must be open
    /// and nondecreasing with inner multiplicities at most `p+1`.
    pub fn from_knots(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree < 1 {
            return Err(Error::InvalidSpline(format!("degree {degree} must be >= 1")));
        }
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::InvalidSpline(format!(
                "{} knots are too few for degree {p}",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidSpline("knots must be nondecreasing".into()));
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if knots[..=p].iter().any(|&k| k != first) || knots[knots.len() - p - 1..].iter().any(|&k| k != last) {
            return Err(Error::InvalidSpline("knot vector must be open (clamped)".into()));
        }
        let mut breaks = knots.clone();
        breaks.dedup();
        check_breaks(&breaks)?;
        let max_inner = breaks[1..breaks.len() - 1]
            .iter()
            .map(|&z| knots.iter().filter(|&&k| k == z).count())
            .max()
            .unwrap_or(0);
        if max_inner > p + 1 {
            return Err(Error::InvalidSpline("inner knot multiplicity exceeds p+1".into()));
        }
        let smoothness = if max_inner == 0 { p as i32 - 1 } else { p as i32 - max_inner as i32 };
        Ok(Self {
            degree,
            knots,
            breaks,
            smoothness,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn smoothness(&self) -> i32 {
        self.smoothness
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn dim(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn num_elements(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    /// Largest span between breakpoints.
    pub fn mesh_size(&self) -> f64 {
        self.breaks.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index `i` with `knots[i] <= x < knots[i+1]`; the right end of the
    /// domain belongs to the last nonempty span.
    pub fn find_span(&self, x: f64) -> Result<usize> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return Err(Error::OutOfDomain { x, lo, hi });
        }
        let p = self.degree;
        let n = self.dim();
        if x >= self.knots[n] {
            // last nonempty span
            let mut i = n - 1;
            while self.knots[i] == self.knots[i + 1] {
                i -= 1;
            }
            return Ok(i);
        }
        // upper_bound over knots[p..=n] then step back
        let slice = &self.knots[p..=n];
        let pos = slice.partition_point(|&k| k <= x);
        Ok(p + pos - 1)
    }

    /// Breakpoints refined by inserting every span midpoint.
    pub fn refined_breaks(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.breaks.len() - 1);
        for w in self.breaks.windows(2) {
            out.push(w[0]);
            out.push(0.5 * (w[0] + w[1]));
        }
        out.push(*self.breaks.last().unwrap());
        out
    }
}

fn check_breaks(breaks: &[f64]) -> Result<()> {
    if breaks.len() < 2 {
        return Err(Error::InvalidSpline("need at least two breakpoints".into()));
    }
    if breaks.iter().any(|z| !z.is_finite()) || breaks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpline("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// `n + 1` uniformly spaced breakpoints on `[a, b]`.
pub fn uniform_breaks(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplicities_follow_smoothness() {
        let kv = KnotVector::new(3, 1, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(kv.dim(), 6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(KnotVector::new(2, 2, &[0.0, 1.0]).is_err());
        assert!(KnotVector::new(2, -2, &[0.0, 1.0]).is_err());
        assert!(KnotVector::new(0, -1, &[0.0, 1.0]).is_err());
        assert!(KnotVector::new(2, 1, &[0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(KnotVector::new(2, 1, &[0.0, 0.7, 0.5, 1.0]).is_err());
        assert!(KnotVector::new(2, 1, &[0.0]).is_err());
    }

    #[test]
    fn span_lookup() {
        let kv = KnotVector::new(2, 1, &uniform_breaks(0.0, 1.0, 4)).unwrap();
        assert_eq!(kv.find_span(0.0).unwrap(), 2);
        assert_eq!(kv.find_span(0.3).unwrap(), 3);
        assert_eq!(kv.find_span(0.25).unwrap(), 3);
        assert_eq!(kv.find_span(1.0).unwrap(), 5);
        assert!(kv.find_span(1.5).is_err());
        let disc = KnotVector::new(2, -1, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(disc.find_span(0.5).unwrap(), 5);
        assert_eq!(disc.find_span(1.0).unwrap(), 5);
        assert_eq!(disc.find_span(0.2).unwrap(), 2);
    }

    #[test]
    fn from_knots_detects_smoothness() {
        let kv = KnotVector::from_knots(2, vec![0.0, 0.0, 0.0, 0.5, 0.5, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kv.smoothness(), 0);
        assert!(KnotVector::from_knots(2, vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0]).is_err());
    }
}
