use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::spline::{BasisTable, QuadRule, SplineSpace};

/// Time intervals on which the state is observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    intervals: Vec<(f64, f64)>,
}

impl ObservationSpec {
    /// Intervals must be nonempty, inside `[0, t_end]` and pairwise disjoint
    /// up to shared endpoints.
    pub fn new(mut intervals: Vec<(f64, f64)>, t_end: f64) -> Result<Self> {
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(a, b) in &intervals {
            if !(a < b) || a < 0.0 || b > t_end {
                return Err(Error::InvalidSubdomain(format!(
                    "observation interval ({a}, {b}) not inside [0, {t_end}]"
                )));
            }
        }
        if intervals.windows(2).any(|w| w[1].0 < w[0].1) {
            return Err(Error::InvalidSubdomain("observation intervals overlap".into()));
        }
        Ok(Self { intervals })
    }

    pub fn full(t_end: f64) -> Self {
        Self {
            intervals: vec![(0.0, t_end)],
        }
    }

    pub fn none() -> Self {
        Self { intervals: vec![] }
    }

    /// Four short windows near the start, middle and end of `[0,1]`.
    pub fn benchmark() -> Self {
        Self::new(
            vec![(0.0, 1.0 / 16.0), (4.0 / 16.0, 5.0 / 16.0), (12.0 / 16.0, 13.0 / 16.0), (15.0 / 16.0, 1.0)],
            1.0,
        )
        .unwrap()
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_full(&self, t_end: f64) -> bool {
        self.intervals.len() == 1 && self.intervals[0] == (0.0, t_end)
    }
}

pub(crate) fn merged_breaks(lists: &[&[f64]]) -> Vec<f64> {
    let mut all: Vec<f64> = lists.iter().flat_map(|l| l.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (1.0 + b.abs()));
    all
}

/// `[A]_{ij} = int D^a(trial_j) D^b(test_i)` over the common interval, or
/// only over `subdomain` when given. Gauss rule with `max degree + 1` points
/// on every span of both spaces, split at subdomain endpoints.
pub fn assemble_univariate(
    trial: &SplineSpace,
    test: &SplineSpace,
    a: usize,
    b: usize,
    subdomain: Option<&[(f64, f64)]>,
) -> Result<CsrMatrix> {
    if trial.domain() != test.domain() {
        return Err(Error::DimensionMismatch("trial and test spaces live on different intervals".into()));
    }
    if a > trial.degree() || b > test.degree() {
        return Err(Error::InvalidSpline("derivative order exceeds degree".into()));
    }
    let n_points = trial.degree().max(test.degree()) + 1;
    let breaks = merged_breaks(&[trial.breaks(), test.breaks()]);
    let quad = match subdomain {
        None => QuadRule::gauss(&breaks, n_points, &[])?,
        Some(iv) => {
            let (lo, hi) = trial.domain();
            if let Some(&(s, e)) = iv.iter().find(|&&(s, e)| s < lo || e > hi || s > e) {
                return Err(Error::InvalidSubdomain(format!("({s}, {e}) not inside [{lo}, {hi}]")));
            }
            QuadRule::gauss_restricted(&breaks, n_points, iv)?
        }
    };
    assemble_with_rule(trial, test, a, b, &quad)
}

pub(crate) fn assemble_with_rule(
    trial: &SplineSpace,
    test: &SplineSpace,
    a: usize,
    b: usize,
    quad: &QuadRule,
) -> Result<CsrMatrix> {
    let tt = BasisTable::new(trial, quad, a);
    let ts = BasisTable::new(test, quad, b);
    let (pt, ps) = (trial.degree() + 1, test.degree() + 1);
    let mut trip = Vec::with_capacity(quad.cells().len() * pt * ps);
    for c in 0..quad.cells().len() {
        let (ft, fs) = (tt.first(c), ts.first(c));
        for i in 0..ps {
            for j in 0..pt {
                let mut s = 0.0;
                for q in 0..quad.n_points() {
                    s += tt.weight(c, q) * tt.value(c, q, a, j) * ts.value(c, q, b, i);
                }
                trip.push((fs + i, ft + j, s));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(test.dim(), trial.dim(), trip))
}
