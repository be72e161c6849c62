use std::sync::Arc;

/// A linear map `R^ncols -> R^nrows` applied matrix-free.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `y += alpha * A x`
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]);

    /// `y += alpha * A^T x`
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]);

    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.apply_add(1.0, x, y);
    }

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows()];
        self.apply_add(1.0, x, &mut y);
        y
    }

    /// Column-by-column materialization (small operators only).
    fn to_dense(&self) -> Vec<Vec<f64>> {
        let (m, n) = (self.nrows(), self.ncols());
        let mut out = vec![vec![0.0; n]; m];
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; m];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..m {
                out[i][j] = col[i];
            }
            e[j] = 0.0;
        }
        out
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for Arc<T> {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        (**self).apply_add(alpha, x, y)
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        (**self).apply_transpose_add(alpha, x, y)
    }
}

/// Identity of a given size.
#[derive(Clone, Copy, Debug)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn nrows(&self) -> usize {
        self.0
    }
    fn ncols(&self) -> usize {
        self.0
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi += alpha * xi;
        }
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.apply_add(alpha, x, y)
    }
}

/// `scale * A`.
#[derive(Clone)]
pub struct ScaledOperator {
    pub scale: f64,
    pub inner: Arc<dyn LinearOperator>,
}

impl LinearOperator for ScaledOperator {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.inner.apply_add(alpha * self.scale, x, y)
    }
    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.inner.apply_transpose_add(alpha * self.scale, x, y)
    }
}

/// One entry of a [`BlockOperator`] grid.
#[derive(Clone)]
pub struct Block {
    pub op: Arc<dyn LinearOperator>,
    pub scale: f64,
    pub transpose: bool,
}

impl Block {
    pub fn new(op: Arc<dyn LinearOperator>) -> Self {
        Self {
            op,
            scale: 1.0,
            transpose: false,
        }
    }

    pub fn scaled(op: Arc<dyn LinearOperator>, scale: f64) -> Self {
        Self {
            op,
            scale,
            transpose: false,
        }
    }

    pub fn transposed(op: Arc<dyn LinearOperator>) -> Self {
        Self {
            op,
            scale: 1.0,
            transpose: true,
        }
    }

    fn shape(&self) -> (usize, usize) {
        if self.transpose {
            (self.op.ncols(), self.op.nrows())
        } else {
            (self.op.nrows(), self.op.ncols())
        }
    }
}

/// Grid of optional sub-operators acting on a stacked vector.
#[derive(Clone)]
pub struct BlockOperator {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
    blocks: Vec<Vec<Option<Block>>>,
}

impl BlockOperator {
    /// Panics if any block disagrees with the declared block sizes.
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>, blocks: Vec<Vec<Option<Block>>>) -> Self {
        assert_eq!(blocks.len(), row_sizes.len());
        for (i, row) in blocks.iter().enumerate() {
            assert_eq!(row.len(), col_sizes.len());
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    assert_eq!(
                        b.shape(),
                        (row_sizes[i], col_sizes[j]),
                        "block ({i},{j}) has inconsistent shape"
                    );
                }
            }
        }
        Self {
            row_sizes,
            col_sizes,
            blocks,
        }
    }

    /// Block-diagonal operator.
    pub fn diagonal(ops: Vec<Arc<dyn LinearOperator>>) -> Self {
        let sizes: Vec<usize> = ops.iter().map(|o| o.nrows()).collect();
        let n = ops.len();
        let blocks = ops
            .into_iter()
            .enumerate()
            .map(|(i, op)| {
                (0..n)
                    .map(|j| if i == j { Some(Block::new(op.clone())) } else { None })
                    .collect()
            })
            .collect();
        Self::new(sizes.clone(), sizes, blocks)
    }

    pub fn row_sizes(&self) -> &[usize] {
        &self.row_sizes
    }

    pub fn col_sizes(&self) -> &[usize] {
        &self.col_sizes
    }

    fn offsets(sizes: &[usize]) -> Vec<usize> {
        let mut off = vec![0];
        for s in sizes {
            off.push(off.last().unwrap() + s);
        }
        off
    }

    /// Split a stacked vector into its block pieces.
    pub fn split<'a>(&self, v: &'a [f64]) -> Vec<&'a [f64]> {
        let off = Self::offsets(&self.col_sizes);
        off.windows(2).map(|w| &v[w[0]..w[1]]).collect()
    }
}

impl LinearOperator for BlockOperator {
    fn nrows(&self) -> usize {
        self.row_sizes.iter().sum()
    }

    fn ncols(&self) -> usize {
        self.col_sizes.iter().sum()
    }

    fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let co = Self::offsets(&self.col_sizes);
        let ro = Self::offsets(&self.row_sizes);
        for (i, row) in self.blocks.iter().enumerate() {
            let yi = &mut y[ro[i]..ro[i + 1]];
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    let xj = &x[co[j]..co[j + 1]];
                    if b.transpose {
                        b.op.apply_transpose_add(alpha * b.scale, xj, yi);
                    } else {
                        b.op.apply_add(alpha * b.scale, xj, yi);
                    }
                }
            }
        }
    }

    fn apply_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let co = Self::offsets(&self.col_sizes);
        let ro = Self::offsets(&self.row_sizes);
        for (i, row) in self.blocks.iter().enumerate() {
            let xi = &x[ro[i]..ro[i + 1]];
            for (j, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    let yj = &mut y[co[j]..co[j + 1]];
                    if b.transpose {
                        b.op.apply_add(alpha * b.scale, xi, yj);
                    } else {
                        b.op.apply_transpose_add(alpha * b.scale, xi, yj);
                    }
                }
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += a * x`
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CsrMatrix;

    #[test]
    fn block_apply_and_transpose() {
        let a: Arc<dyn LinearOperator> =
            Arc::new(CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]));
        let m: Arc<dyn LinearOperator> = Arc::new(IdentityOperator(3));
        let op = BlockOperator::new(
            vec![2, 3],
            vec![2, 3],
            vec![
                vec![None, Some(Block::transposed(a.clone()))],
                vec![Some(Block::new(a)), Some(Block::scaled(m, -2.0))],
            ],
        );
        let d = op.to_dense();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
        assert_eq!(d[2][0], 1.0);
        assert_eq!(d[0][2], 1.0);
        assert_eq!(d[4][4], -2.0);
        let x = [1.0, -1.0, 0.5, 2.0, 3.0];
        let mut y1 = vec![0.0; 5];
        let mut y2 = vec![0.0; 5];
        op.apply_add(1.0, &x, &mut y1);
        op.apply_transpose_add(1.0, &x, &mut y2);
        assert_eq!(y1, y2);
    }
}
