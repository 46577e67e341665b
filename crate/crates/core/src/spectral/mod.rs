//! Laplacian spectra in the regular representation.
//!
//! The Laplacian is the group-algebra element `2k - sum_j (s_j + s_j^-1)`
//! acting on `l^2(G)`. On a simple Cayley graph without involutions this is
//! the combinatorial graph Laplacian; in general an involutive generator
//! contributes its edge twice.

pub mod lanczos;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::catalog::GroupSpec;
use crate::group::{GroupAlgElement, MarkedGroup, QuotientMap};
use crate::roe::{group_algebra_embed, Kernel};
use lanczos::{extreme_eigenpairs, LanczosOptions};

/// Orders above this use the Krylov path under [`Method::Auto`].
pub const SPARSE_CUTOFF: usize = 2000;

/// Eigenvalues below `ZERO_THRESHOLD * lambda_max` count as kernel.
pub const ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Auto,
    Dense,
    Sparse,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Method::Auto),
            "dense" => Ok(Method::Dense),
            "sparse" => Ok(Method::Sparse),
            _ => Err(Error::Invalid(format!("unknown method {s:?}"))),
        }
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::Dense => "dense",
            Method::Sparse => "sparse",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub label: String,
    pub order: usize,
    /// Smallest nonzero eigenvalue; `+inf` when the spectrum is `{0}`.
    pub nu: f64,
    pub lambda_max: f64,
    pub method: Method,
    pub residual: f64,
    pub multiplicity_zero: usize,
}

impl SpectrumReport {
    pub fn has_gap(&self) -> bool {
        self.nu.is_finite()
    }
}

pub fn laplacian_matrix(g: &Arc<MarkedGroup>) -> Kernel<f64> {
    group_algebra_embed(&GroupAlgElement::<f64>::laplacian(g))
}

pub fn spectral_gap(g: &Arc<MarkedGroup>, method: Method) -> Result<SpectrumReport> {
    spectral_gap_with(g, method, &LanczosOptions::default())
}

pub fn spectral_gap_with(g: &Arc<MarkedGroup>, method: Method, opts: &LanczosOptions) -> Result<SpectrumReport> {
    let lap = laplacian_matrix(g);
    let method = match method {
        Method::Auto if g.order() > SPARSE_CUTOFF => Method::Sparse,
        Method::Auto => Method::Dense,
        m => m,
    };
    let mut report = SpectrumReport {
        label: g.label().to_string(),
        order: g.order(),
        nu: f64::INFINITY,
        lambda_max: 0.0,
        method,
        residual: 0.0,
        multiplicity_zero: g.order(),
    };
    if lap.nnz() == 0 {
        return Ok(report);
    }
    match method {
        Method::Dense => {
            let m = lap.to_dense();
            let eig = SymmetricEigen::new(m.clone());
            let values = eig.eigenvalues.as_slice();
            let lambda_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let threshold = ZERO_THRESHOLD * lambda_max;
            let mut imax = 0;
            let mut inu: Option<usize> = None;
            let mut zeros = 0;
            for (i, &v) in values.iter().enumerate() {
                if v > values[imax] {
                    imax = i;
                }
                if v < threshold {
                    zeros += 1;
                } else if inu.is_none_or(|j| v < values[j]) {
                    inu = Some(i);
                }
            }
            let residual_of = |i: usize| {
                let v: DVector<f64> = eig.eigenvectors.column(i).into();
                (&m * &v - &v * values[i]).amax()
            };
            report.lambda_max = lambda_max;
            report.multiplicity_zero = zeros;
            report.residual = residual_of(imax);
            if let Some(i) = inu {
                report.nu = values[i];
                report.residual = report.residual.max(residual_of(i));
            }
        }
        Method::Sparse => {
            let r = extreme_eigenpairs(g.order(), |v, out| lap.apply_real(v, out), opts)?;
            report.lambda_max = r.largest;
            report.residual = r.residual;
            // a generating marking makes the Cayley graph connected
            report.multiplicity_zero = 1;
            report.nu = r.smallest;
            if r.smallest < ZERO_THRESHOLD * r.largest {
                return Err(Error::ConvergenceFailure(format!(
                    "deflated operator has a kernel eigenvalue {:e}",
                    r.smallest
                )));
            }
        }
        Method::Auto => unreachable!(),
    }
    Ok(report)
}

/// Dense eigenvalues of the Laplacian in ascending order.
pub fn laplacian_spectrum(g: &Arc<MarkedGroup>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(laplacian_matrix(g).to_dense())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// One gap computation per index, spread over `jobs` worker threads and
/// returned in index order. Failures are reported per index.
pub fn family_gaps(
    member: impl Fn(u64) -> GroupSpec + Sync,
    indices: &[u64],
    method: Method,
    jobs: usize,
) -> Vec<(u64, Result<SpectrumReport>)> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<SpectrumReport>>>> = Mutex::new(vec![None; indices.len()]);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(indices.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= indices.len() {
                    break;
                }
                let result = member(indices[i])
                    .build()
                    .and_then(|g| spectral_gap(&Arc::new(g), method));
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });
    indices
        .iter()
        .copied()
        .zip(slots.into_inner().unwrap().into_iter().map(Option::unwrap))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub min_nu: f64,
    /// `alpha` in the least-squares fit `nu ~ C * order^-alpha`.
    pub exponent: f64,
    pub r_squared: f64,
    pub verdict: String,
}

/// Fitted exponents below this count as no decay.
pub const DECAY_EXPONENT_THRESHOLD: f64 = 0.1;

/// Finite-range evidence about gap decay along a family; never a proof
/// that a family is or is not an expander.
pub fn expander_verdict(reports: &[SpectrumReport]) -> Result<Verdict> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.nu.is_finite() && r.nu > 0.0)
        .map(|r| ((r.order as f64).ln(), r.nu.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let slope = sxy / sxx;
    let r_squared = if syy <= 1e-24 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    let exponent = -slope;
    let min_nu = reports
        .iter()
        .map(|r| r.nu)
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let verdict = if exponent > DECAY_EXPONENT_THRESHOLD {
        format!("gap-decay (exponent {exponent:.3})")
    } else {
        "no decay detected over range".to_string()
    };
    Ok(Verdict {
        min_nu,
        exponent,
        r_squared,
        verdict,
    })
}

/// Gap of the block-diagonal Laplacian of a plain disjoint union.
pub fn union_gap(groups: &[Arc<MarkedGroup>]) -> Result<f64> {
    if groups.is_empty() {
        return Err(Error::Invalid("union of no blocks".into()));
    }
    let mut nu = f64::INFINITY;
    for g in groups {
        nu = nu.min(spectral_gap(g, Method::Auto)?.nu);
    }
    Ok(nu)
}

/// `nu(source) <= nu(target) + tol` for a marked quotient.
pub fn check_quotient_monotonicity(q: &QuotientMap, tol: f64) -> Result<bool> {
    q.validate()?;
    let big = spectral_gap(&q.source, Method::Auto)?.nu;
    let small = spectral_gap(&q.target, Method::Auto)?.nu;
    Ok(big <= small + tol)
}

/// Smallest eigenvalue above `ZERO_THRESHOLD * lambda_max` of a dense
/// symmetric matrix; `+inf` if none.
pub fn smallest_nonzero(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    eig.eigenvalues
        .iter()
        .copied()
        .filter(|&v| v >= ZERO_THRESHOLD * lambda_max && v > 0.0)
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::catalog::{standard_catalog, Family};
    use std::f64::consts::PI;

    fn arc(g: MarkedGroup) -> Arc<MarkedGroup> {
        Arc::new(g)
    }

    #[test]
    fn laplacian_matrix_examples() {
        let t = laplacian_matrix(&arc(MarkedGroup::cyclic(1)));
        assert_eq!((t.dim(), t.nnz()), (1, 0));
        let z2 = laplacian_matrix(&arc(MarkedGroup::cyclic(2))).to_dense();
        assert_eq!(z2, DMatrix::from_row_slice(2, 2, &[2.0, -2.0, -2.0, 2.0]));
        let g = arc(MarkedGroup::sl2(3).unwrap());
        let l = laplacian_matrix(&g);
        assert!(l.propagation() <= 1);
        assert_eq!(l, l.adjoint());
        let mut sums = vec![0.0; g.order()];
        l.apply_real(&vec![1.0; g.order()], &mut sums);
        assert!(sums.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn cyclic_closed_form() {
        for m in [3u64, 4, 5, 6, 10, 17, 64] {
            let r = spectral_gap(&arc(MarkedGroup::cyclic(m)), Method::Dense).unwrap();
            let expect = 2.0 - 2.0 * (2.0 * PI / m as f64).cos();
            assert!((r.nu - expect).abs() < 1e-10, "m = {m}");
            assert_eq!(r.multiplicity_zero, 1);
            assert!(r.residual < 1e-9);
        }
        let t = spectral_gap(&arc(MarkedGroup::cyclic(1)), Method::Auto).unwrap();
        assert!(t.nu.is_infinite());
    }

    #[test]
    fn dense_and_sparse_agree_on_catalog() {
        for spec in standard_catalog() {
            let g = arc(spec.build().unwrap());
            if g.order() < 3 {
                continue;
            }
            let d = spectral_gap(&g, Method::Dense).unwrap();
            let s = spectral_gap(&g, Method::Sparse).unwrap_or_else(|e| panic!("{}: {e}", g.label()));
            assert!((d.nu - s.nu).abs() < 1e-7, "{}: {} vs {}", g.label(), d.nu, s.nu);
            assert!((d.lambda_max - s.lambda_max).abs() < 1e-7);
            assert!(d.nu <= d.lambda_max && d.lambda_max <= 4.0 * g.k() as f64 + 1e-9);
        }
    }

    #[test]
    fn laplacian_is_positive_semidefinite() {
        for spec in standard_catalog().into_iter().step_by(5) {
            let g = arc(spec.build().unwrap());
            assert!(laplacian_spectrum(&g)[0] >= -1e-9);
        }
    }

    #[test]
    fn product_gap_is_min_of_factors() {
        let pairs = [(3, 4), (5, 6), (4, 4), (2, 7)];
        for (a, b) in pairs {
            let (ga, gb) = (MarkedGroup::cyclic(a), MarkedGroup::cyclic(b));
            let p = arc(MarkedGroup::product(&ga, &gb).unwrap());
            let nu = spectral_gap(&p, Method::Dense).unwrap().nu;
            let na = spectral_gap(&arc(ga), Method::Dense).unwrap().nu;
            let nb = spectral_gap(&arc(gb), Method::Dense).unwrap().nu;
            assert!((nu - na.min(nb)).abs() < 1e-7);
        }
    }

    #[test]
    fn family_gaps_in_index_order() {
        let out = family_gaps(|i| Family::Cyclic.member(i), &[3, 4, 6], Method::Auto, 3);
        let nus: Vec<f64> = out.iter().map(|(_, r)| r.as_ref().unwrap().nu).collect();
        for (nu, expect) in nus.iter().zip([3.0, 2.0, 1.0]) {
            assert!((nu - expect).abs() < 1e-10);
        }
        let bad = family_gaps(|i| Family::Sl2.member(i), &[3, 4, 5], Method::Auto, 2);
        assert!(bad[0].1.is_ok() && bad[1].1.is_err() && bad[2].1.is_ok());
        let constant = family_gaps(|_| Family::Cyclic.member(5), &[1, 2, 3], Method::Auto, 2);
        assert_eq!(constant[0].1, constant[2].1);
    }

    #[test]
    fn verdicts() {
        let reports: Vec<SpectrumReport> = family_gaps(|i| Family::Cyclic.member(i), &(3..=64).collect::<Vec<_>>(), Method::Dense, 4)
            .into_iter()
            .map(|(_, r)| r.unwrap())
            .collect();
        let v = expander_verdict(&reports).unwrap();
        assert!((v.exponent - 2.0).abs() < 0.2, "{}", v.exponent);
        assert!(v.verdict.starts_with("gap-decay"));

        let flat: Vec<SpectrumReport> = [10, 20, 40, 80]
            .iter()
            .map(|&order| SpectrumReport {
                label: String::new(),
                order,
                nu: 0.5,
                lambda_max: 4.0,
                method: Method::Dense,
                residual: 0.0,
                multiplicity_zero: 1,
            })
            .collect();
        assert_eq!(expander_verdict(&flat).unwrap().verdict, "no decay detected over range");
        assert_eq!(expander_verdict(&flat[..2]).unwrap_err(), Error::InsufficientData(2));
    }

    #[test]
    fn union_gap_examples() {
        let z3 = arc(MarkedGroup::cyclic(3));
        let z4 = arc(MarkedGroup::cyclic(4));
        let one = arc(MarkedGroup::cyclic(1));
        assert!((union_gap(&[z3.clone(), z4]).unwrap() - 2.0).abs() < 1e-10);
        assert!((union_gap(&[one, z3.clone()]).unwrap() - 3.0).abs() < 1e-10);
        assert_eq!(
            union_gap(&[z3.clone()]).unwrap(),
            spectral_gap(&z3, Method::Auto).unwrap().nu
        );
    }

    #[test]
    fn quotient_monotonicity_examples() {
        let z12 = arc(MarkedGroup::cyclic(12));
        let six = z12.evaluate(&crate::Word::parse("a1^6").unwrap()).unwrap();
        let (_, q) = z12.quotient(&[six]).unwrap();
        assert_eq!(q.target.order(), 6);
        assert!(check_quotient_monotonicity(&q, 1e-9).unwrap());
        let (_, id) = z12.quotient(&[]).unwrap();
        assert!(check_quotient_monotonicity(&id, 1e-9).unwrap());
    }

    #[test]
    fn sparse_path_on_a_large_group() {
        let g = arc(MarkedGroup::sl2(13).unwrap());
        assert!(g.order() > SPARSE_CUTOFF);
        let r = spectral_gap(&g, Method::Auto).unwrap();
        assert_eq!(r.method, Method::Sparse);
        assert!(r.nu > 0.0 && r.nu < r.lambda_max);
        assert!(r.residual < 1e-6);
    }
}
