use alloc::vec;
use alloc::vec::Vec;

use super::eigen::symmetric_eigen;
use crate::error::{ensure, Result};
use crate::math::dot;
use crate::sim::EchoMatrix;

/// Principal directions of a row-centred echo matrix.
///
/// The basis lives in whichever of the two spaces is smaller: fast time
/// (`fast_space = true`, vectors of length N) or slow time (length M).
#[derive(Debug, Clone)]
pub struct PcaBasis {
    /// Descending eigenvalues of the Gram matrix (squared singular values).
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub fast_space: bool,
    /// Row-centred input, row-major M × N.
    pub centered: Vec<f64>,
}

/// Subtracts each pulse's fast-time mean and diagonalizes the smaller Gram
/// matrix of the result.
pub fn principal_components(echo: &EchoMatrix) -> PcaBasis {
    let (m, n) = (echo.rows(), echo.cols());
    let mut centered = echo.data().to_vec();
    for row in centered.chunks_exact_mut(n) {
        let mean = row.iter().sum::<f64>() / n as f64;
        for v in row.iter_mut() {
            *v -= mean;
        }
    }

    let fast_space = n <= m;
    let dim = if fast_space { n } else { m };
    let mut gram = vec![0.0; dim * dim];
    if fast_space {
        // X^T X
        for row in centered.chunks_exact(n) {
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    gram[i * n + j] += ri * row[j];
                }
            }
        }
    } else {
        // X X^T
        for i in 0..m {
            for j in i..m {
                gram[i * m + j] = dot(&centered[i * n..(i + 1) * n], &centered[j * n..(j + 1) * n]);
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            gram[i * dim + j] = gram[j * dim + i];
        }
    }
    let eig = symmetric_eigen(&gram, dim);
    PcaBasis {
        values: eig.values,
        vectors: eig.vectors,
        fast_space,
        centered,
    }
}

impl PcaBasis {
    /// Projects the centred matrix onto components `start .. start + count`.
    pub fn reconstruct(&self, rows: usize, cols: usize, start: usize, count: usize) -> Vec<f64> {
        let x = &self.centered;
        let mut out = vec![0.0; rows * cols];
        let selected = &self.vectors[start..start + count];
        if self.fast_space {
            for (row_in, row_out) in x.chunks_exact(cols).zip(out.chunks_exact_mut(cols)) {
                for v in selected {
                    let coef = dot(row_in, v);
                    crate::math::axpy(coef, v, row_out);
                }
            }
        } else {
            for u in selected {
                // u u^T X
                let mut proj = vec![0.0; cols];
                for (r, &ur) in u.iter().enumerate() {
                    crate::math::axpy(ur, &x[r * cols..(r + 1) * cols], &mut proj);
                }
                for (r, &ur) in u.iter().enumerate() {
                    crate::math::axpy(ur, &proj, &mut out[r * cols..(r + 1) * cols]);
                }
            }
        }
        out
    }
}

/// Removes the `drop_leading` strongest components (static clutter) and
/// keeps the next `keep`.
///
/// Components beyond the numerical rank of the matrix reconstruct as zero;
/// the request is rejected only when it asks for more components than the
/// matrix dimensions allow.
pub fn pca_clutter_suppress(echo: &EchoMatrix, drop_leading: usize, keep: usize) -> Result<EchoMatrix> {
    let (m, n) = (echo.rows(), echo.cols());
    ensure!(keep >= 1, "keep must be at least 1");
    ensure!(
        drop_leading + keep <= m.min(n),
        "rank-deficient request: drop_leading {drop_leading} + keep {keep} exceeds the available rank {}",
        m.min(n)
    );
    let basis = principal_components(echo);
    echo.with_data(basis.reconstruct(m, n, drop_leading, keep))
}
