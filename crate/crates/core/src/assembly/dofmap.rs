use crate::error::{Error, Result};

/// Retained subset of a full basis (boundary or initial functions removed).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    full_dim: usize,
    retained: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(full_dim: usize, retained: Vec<usize>) -> Result<Self> {
        if retained.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::DimensionMismatch("retained indices must increase strictly".into()));
        }
        if retained.last().is_some_and(|&i| i >= full_dim) {
            return Err(Error::DimensionMismatch("retained index beyond full dimension".into()));
        }
        let mut position = vec![None; full_dim];
        for (k, &i) in retained.iter().enumerate() {
            position[i] = Some(k);
        }
        Ok(Self {
            full_dim,
            retained,
            position,
        })
    }

    /// Nothing removed.
    pub fn all(n: usize) -> Self {
        Self::new(n, (0..n).collect()).unwrap()
    }

    /// First function removed (homogeneous initial value).
    pub fn drop_first(n: usize) -> Self {
        Self::new(n, (1..n).collect()).unwrap()
    }

    /// First and last function removed (homogeneous Dirichlet value).
    pub fn drop_ends(n: usize) -> Self {
        Self::new(n, (1..n.saturating_sub(1)).collect()).unwrap()
    }

    /// Tensor product, first factor slowest.
    pub fn tensor(a: &DofMap, b: &DofMap) -> Self {
        let retained = a
            .retained
            .iter()
            .flat_map(|&i| b.retained.iter().map(move |&j| i * b.full_dim + j))
            .collect();
        Self::new(a.full_dim * b.full_dim, retained).unwrap()
    }

    pub fn full_dim(&self) -> usize {
        self.full_dim
    }

    pub fn dim(&self) -> usize {
        self.retained.len()
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// Reduced index of a full index, if retained.
    pub fn position(&self, full: usize) -> Option<usize> {
        self.position[full]
    }

    /// Gather: full vector to retained entries.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        assert_eq!(full.len(), self.full_dim);
        self.retained.iter().map(|&i| full[i]).collect()
    }

    /// Scatter: reduced vector into a full one, zero elsewhere.
    pub fn extend(&self, reduced: &[f64]) -> Vec<f64> {
        assert_eq!(reduced.len(), self.retained.len());
        let mut out = vec![0.0; self.full_dim];
        for (&i, &v) in self.retained.iter().zip(reduced) {
            out[i] = v;
        }
        out
    }
}
