//! Full eigendecomposition of symmetric tridiagonal matrices.
//!
//! Eigenvalues and eigenvectors come from the implicit QL algorithm with
//! Wilkinson-style shifts. The eigenvector of the smallest eigenvalue is then
//! recomputed from a twisted ratio recurrence, which keeps full relative
//! accuracy in its exponentially small tails; the asymptotic quotes depend
//! only on ratios of neighbouring components, so absolute accuracy alone is
//! not enough there.

use crate::error::{Error, Result};
use crate::ladder::LadderMatrix;

/// Residual tolerance, relative to ‖M‖∞.
pub const TOL_EIG: f64 = 1e-10;

/// Iteration budget per matrix dimension before giving up.
pub const MAX_ITER_PER_DIM: usize = 50;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` is the unit eigenvector for `eigenvalues[i]`.
    eigenvectors: Vec<Vec<f64>>,
    /// Natural log of the components of the ground-state eigenvector,
    /// normalised so that the vector has unit 2-norm.
    ground_log: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }
    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i]
    }

    /// Smallest eigenvalue λ⁰.
    pub fn ground_value(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Positive unit eigenvector of the smallest eigenvalue.
    pub fn ground_vector(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// `ln f⁰_i`, accurate even where `f⁰_i` itself underflows.
    pub fn ground_log(&self) -> &[f64] {
        &self.ground_log
    }

    /// λ¹ − λ⁰ (infinite for a 1×1 matrix).
    pub fn spectral_gap(&self) -> f64 {
        if self.dim() < 2 {
            f64::INFINITY
        } else {
            self.eigenvalues[1] - self.eigenvalues[0]
        }
    }
}

/// Decomposes the ladder matrix.
pub fn decompose(matrix: &LadderMatrix) -> Result<SpectralDecomposition> {
    let off = vec![matrix.offdiag(); matrix.dim().saturating_sub(1)];
    decompose_tridiagonal(matrix.diag(), &off)
}

/// Decomposes the symmetric tridiagonal matrix with diagonal `diag` and
/// sub/super-diagonal `off` (`off.len() == diag.len() - 1`).
///
/// The ground-state refinement applies when every off-diagonal entry is
/// negative (the ground state is then strictly positive), which is always the
/// case for ladder matrices. Otherwise the QL vector is kept as is.
pub fn decompose_tridiagonal(diag: &[f64], off: &[f64]) -> Result<SpectralDecomposition> {
    let n = diag.len();
    assert!(n >= 1, "empty matrix");
    assert_eq!(off.len(), n - 1, "off-diagonal length must be n - 1");

    let (values, vectors) = implicit_ql(diag, off)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|r| vectors[r * n + j]).collect())
        .collect();

    for v in eigenvectors.iter_mut() {
        // deterministic sign: largest-magnitude component positive
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }

    let ground_log = if n > 1 && off.iter().all(|&o| o < 0.0) {
        let log = ground_state_log(diag, off, eigenvalues[0]);
        eigenvectors[0] = log.iter().map(|l| l.exp()).collect();
        log
    } else {
        eigenvectors[0].iter().map(|x| x.abs().ln()).collect()
    };

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        ground_log,
    })
}

/// Implicit QL iteration on a symmetric tridiagonal matrix. Returns the
/// (unsorted) eigenvalues and the eigenvector matrix in row-major order,
/// eigenvector `j` being column `j`.
fn implicit_ql(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }

    let budget = MAX_ITER_PER_DIM * n;
    let mut iterations = 0usize;
    let mut shift = 0.0;
    let mut tst1 = 0.0f64;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > f64::EPSILON * tst1 {
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > budget {
                    return Err(Error::Convergence { dim: n, iterations });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                shift += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in z.chunks_exact_mut(n) {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= f64::EPSILON * tst1 {
                    break;
                }
            }
        }
        d[l] += shift;
        e[l] = 0.0;
    }
    Ok((d, z))
}

/// Log-components of the ground-state eigenvector from a twisted
/// factorisation: ratios `f_i / f_{i+1}` are propagated from the top edge
/// and `f_i / f_{i-1}` from the bottom edge, and the two sweeps meet at the
/// row where the eigen-equation residual is smallest.
fn ground_state_log(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    // down[i] = f_i / f_{i+1}
    let mut down = vec![0.0; n];
    down[0] = -off[0] / (diag[0] - lambda);
    for i in 1..n - 1 {
        down[i] = -off[i] / (diag[i] - lambda + off[i - 1] * down[i - 1]);
    }
    // up[i] = f_i / f_{i-1}
    let mut up = vec![0.0; n];
    up[n - 1] = -off[n - 2] / (diag[n - 1] - lambda);
    for i in (1..n - 1).rev() {
        up[i] = -off[i - 1] / (diag[i] - lambda + off[i] * up[i + 1]);
    }

    let twist = (0..n)
        .map(|i| {
            let mut g = diag[i] - lambda;
            if i > 0 {
                g += off[i - 1] * down[i - 1];
            }
            if i + 1 < n {
                g += off[i] * up[i + 1];
            }
            (i, g.abs())
        })
        .filter(|(_, g)| g.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(n / 2);

    let mut log = vec![0.0; n];
    for i in (0..twist).rev() {
        log[i] = log[i + 1] + down[i].ln();
    }
    for i in twist + 1..n {
        log[i] = log[i - 1] + up[i].ln();
    }

    let peak = log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let norm = 0.5
        * log
            .iter()
            .map(|l| (2.0 * (l - peak)).exp())
            .sum::<f64>()
            .ln()
        + peak;
    log.iter_mut().for_each(|l| *l -= norm);
    log
}
