//! Gauss–Legendre rules assembled cell by cell over a partition of an interval.

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss rule needs at least one point");
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // P_n and P_{n-1} by the three-term recurrence
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// One integration cell: an interval with its mapped Gauss points.
#[derive(Clone, Debug)]
pub struct QuadCell {
    pub lo: f64,
    pub hi: f64,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Composite Gauss rule over a partition of an interval.
///
/// The partition is given by breakpoints plus optional extra split points,
/// so that integrands with kinks (subdomain indicators, knots) are integrated
/// cell-wise.
#[derive(Clone, Debug)]
pub struct QuadRule {
    cells: Vec<QuadCell>,
    n_points: usize,
}

impl QuadRule {
    /// `n_points` Gauss points on every cell of `breaks ∪ extra_splits`.
    pub fn gauss(breaks: &[f64], n_points: usize, extra_splits: &[f64]) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::InvalidSpline("need at least two breakpoints".into()));
        }
        let lo = breaks[0];
        let hi = *breaks.last().unwrap();
        let mut cuts: Vec<f64> = breaks.to_vec();
        for &s in extra_splits {
            if s < lo || s > hi {
                return Err(Error::InvalidSubdomain(format!(
                    "split point {s} outside [{lo}, {hi}]"
                )));
            }
            cuts.push(s);
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
        let (xi, wi) = gauss_legendre(n_points);
        let cells = cuts
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let mid = 0.5 * (a + b);
                let half = 0.5 * (b - a);
                QuadCell {
                    lo: a,
                    hi: b,
                    points: xi.iter().map(|x| mid + half * x).collect(),
                    weights: wi.iter().map(|w| half * w).collect(),
                }
            })
            .collect();
        Ok(Self { cells, n_points })
    }

    /// Keep only cells lying inside the union of `intervals`; the rule is
    /// first split at every interval endpoint.
    pub fn gauss_restricted(
        breaks: &[f64],
        n_points: usize,
        intervals: &[(f64, f64)],
    ) -> Result<Self> {
        let splits: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
        let full = Self::gauss(breaks, n_points, &splits)?;
        let cells = full
            .cells
            .into_iter()
            .filter(|c| {
                let mid = 0.5 * (c.lo + c.hi);
                intervals.iter().any(|&(a, b)| mid > a && mid < b)
            })
            .collect();
        Ok(Self { cells, n_points })
    }

    pub fn cells(&self) -> &[QuadCell] {
        &self.cells
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Integrate a scalar function with this rule.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.cells
            .iter()
            .map(|c| c.points.iter().zip(&c.weights).map(|(&x, &w)| w * f(x)).sum::<f64>())
            .sum()
    }
}
