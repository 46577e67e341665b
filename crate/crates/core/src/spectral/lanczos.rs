//! Lanczos iteration with full reorthogonalization for the extreme
//! eigenvalues of a symmetric operator, optionally restricted to the
//! orthogonal complement of the constant vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Relative residual `|A y - theta y| / max(1, |theta_max|)` accepted.
    pub tol: f64,
    pub max_iter: usize,
    pub deflate_constants: bool,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 600,
            deflate_constants: true,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremePairs {
    pub smallest: f64,
    pub largest: f64,
    pub smallest_vector: Vec<f64>,
    pub largest_vector: Vec<f64>,
    /// Largest true residual over the two returned pairs.
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

pub fn extreme_eigenpairs<F>(n: usize, apply: F, opts: &LanczosOptions) -> Result<ExtremePairs>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = if opts.deflate_constants { n.saturating_sub(1) } else { n };
    if dim == 0 {
        return Err(Error::ConvergenceFailure("empty Krylov space".into()));
    }
    let steps = dim.min(opts.max_iter);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if opts.deflate_constants {
        remove_mean(&mut q);
    }
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last_estimate = f64::INFINITY;

    for j in 0..steps {
        apply(&basis[j], &mut w);
        if opts.deflate_constants {
            remove_mean(&mut w);
        }
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                axpy(-c, v, &mut w);
            }
            if opts.deflate_constants {
                remove_mean(&mut w);
            }
        }
        let b = dot(&w, &w).sqrt();
        let exhausted = j + 1 == steps;
        let scale = alpha.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let invariant = b <= 1e-10 * scale;
        let check = exhausted || invariant || (j + 1) % 10 == 0;
        if check {
            let m = j + 1;
            let mut t = DMatrix::zeros(m, m);
            for i in 0..m {
                t[(i, i)] = alpha[i];
                if i + 1 < m {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let (imin, imax) = extreme_indices(eig.eigenvalues.as_slice());
            let theta_max = eig.eigenvalues[imax].abs().max(1.0);
            let bound = |i: usize| b * eig.eigenvectors[(m - 1, i)].abs();
            let estimate = bound(imin).max(bound(imax)) / theta_max;
            last_estimate = estimate;
            if estimate <= opts.tol || invariant || dim <= opts.max_iter && exhausted {
                let ritz = |i: usize| {
                    let mut y = vec![0.0; n];
                    for (r, v) in basis.iter().enumerate() {
                        axpy(eig.eigenvectors[(r, i)], v, &mut y);
                    }
                    y
                };
                let (ys, yl) = (ritz(imin), ritz(imax));
                let (ls, ll) = (eig.eigenvalues[imin], eig.eigenvalues[imax]);
                let residual = true_residual(&apply, &ys, ls).max(true_residual(&apply, &yl, ll));
                if residual <= 10.0 * opts.tol * theta_max || invariant || exhausted {
                    if residual > 1e-6 * theta_max {
                        return Err(Error::ConvergenceFailure(format!(
                            "Krylov space exhausted after {m} steps with residual {residual:e}"
                        )));
                    }
                    return Ok(ExtremePairs {
                        smallest: ls,
                        largest: ll,
                        smallest_vector: ys,
                        largest_vector: yl,
                        residual,
                        iterations: m,
                    });
                }
            }
        }
        if invariant || exhausted {
            break;
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Err(Error::ConvergenceFailure(format!(
        "no convergence after {steps} Lanczos steps (residual estimate {last_estimate:e}, tolerance {:e})",
        opts.tol
    )))
}

fn extreme_indices(values: &[f64]) -> (usize, usize) {
    let mut imin = 0;
    let mut imax = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[imin] {
            imin = i;
        }
        if v > values[imax] {
            imax = i;
        }
    }
    (imin, imax)
}

fn true_residual<F: Fn(&[f64], &mut [f64])>(apply: &F, y: &[f64], theta: f64) -> f64 {
    let mut ay = vec![0.0; y.len()];
    apply(y, &mut ay);
    ay.iter()
        .zip(y)
        .map(|(a, v)| (a - theta * v).powi(2))
        .sum::<f64>()
        .sqrt()
}
