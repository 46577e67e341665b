//! Sum-of-squares certificates in real group algebras.
//!
//! A certificate writes `a + eps` as `sum_i xi_i^* xi_i` with every `xi_i`
//! supported in `B(1, R)`. It is found through a Gram matrix `P` on the basis
//! `B(1, R)`: the pair `(u, v)` contributes `P[u, v]` to the coefficient of
//! `u^-1 v`, so `P = sum_i alpha_i alpha_i^T` gives `xi_i = sum_u alpha_i(u) u`.

mod averaging;

pub use averaging::{random_roe_sos_input, reassembly_defect, roe_to_group_sos, RoeSosSample};

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupAlgElement, MarkedGroup};
use crate::roe::group_algebra_embed;
use crate::topology::PartialIso;

/// Largest group order for the regular-representation positivity check.
pub const REGULAR_CHECK_CAP: usize = 1024;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub max_iter: usize,
    /// Relative progress below which a window counts as stalled.
    pub stall_tol: f64,
    pub stall_window: usize,
    pub seed: u64,
    pub solver: Solver,
    pub newton_iter: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    #[default]
    AnalyticCenter,
    Dykstra,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iter: 20_000,
            stall_tol: 1e-10,
            stall_window: 500,
            seed: 0,
            solver: Solver::AnalyticCenter,
            newton_iter: 200,
        }
    }
}

/// Basis `B(1, R)` and the class `u^-1 v` of every Gram entry.
#[derive(Clone, Debug)]
pub struct GramLayout {
    pub radius: u32,
    pub basis: Vec<usize>,
    /// `classes[i * n + j]` indexes `class_elements`.
    classes: Vec<u32>,
    class_elements: Vec<usize>,
    class_sizes: Vec<usize>,
    inverse_class: Vec<u32>,
    identity_class: u32,
}

impl GramLayout {
    pub fn new(g: &MarkedGroup, radius: u32) -> Self {
        let basis = g.ball(radius);
        let n = basis.len();
        let mut ids: BTreeMap<usize, u32> = BTreeMap::new();
        let mut classes = Vec::with_capacity(n * n);
        for &u in &basis {
            let ui = g.inv(u);
            for &v in &basis {
                let c = g.mul(ui, v);
                let next = ids.len() as u32;
                classes.push(*ids.entry(c).or_insert(next));
            }
        }
        let mut class_elements = vec![0; ids.len()];
        for (&c, &id) in &ids {
            class_elements[id as usize] = c;
        }
        let mut class_sizes = vec![0; ids.len()];
        for &c in &classes {
            class_sizes[c as usize] += 1;
        }
        let inverse_class = class_elements.iter().map(|&c| ids[&g.inv(c)]).collect();
        Self {
            radius,
            basis,
            classes,
            class_elements,
            class_sizes,
            inverse_class,
            identity_class: ids[&0],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Elements reached as `u^-1 v`; equals `B(1, 2R)`.
    pub fn class_elements(&self) -> &[usize] {
        &self.class_elements
    }

    /// Entry lists of the symmetric indicators `A_k` of `{c, c^-1}` and the
    /// right-hand sides `<A_k, X> = b_k` for `X = P - tau I`.
    fn symmetric_constraints(&self, target: &[f64], tau: f64) -> (Vec<Vec<(usize, usize)>>, DVector<f64>) {
        let n = self.dim();
        let mut group_of = vec![usize::MAX; self.class_elements.len()];
        let mut entries: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut b = Vec::new();
        for c in 0..self.class_elements.len() {
            if group_of[c] != usize::MAX {
                continue;
            }
            let ci = self.inverse_class[c] as usize;
            group_of[c] = entries.len();
            group_of[ci] = entries.len();
            entries.push(Vec::new());
            b.push(if ci == c { target[c] } else { target[c] + target[ci] });
        }
        for i in 0..n {
            for j in 0..n {
                let c = self.classes[i * n + j] as usize;
                entries[group_of[c]].push((i, j));
            }
        }
        let e = group_of[self.identity_class as usize];
        b[e] -= tau * n as f64;
        (entries, DVector::from_vec(b))
    }

    /// Index of the identity class among the symmetric constraints.
    fn identity_group(&self) -> usize {
        let mut seen = vec![false; self.class_elements.len()];
        let mut k = 0;
        for c in 0..self.class_elements.len() {
            if seen[c] {
                continue;
            }
            if c == self.identity_class as usize {
                return k;
            }
            seen[c] = true;
            seen[self.inverse_class[c] as usize] = true;
            k += 1;
        }
        unreachable!("identity class is always present")
    }

    /// Least-norm change making `p` satisfy the class constraints.
    fn project_affine(&self, p: &mut DMatrix<f64>, target: &[f64]) {
        let n = self.dim();
        let mut sums = vec![0.0; self.class_sizes.len()];
        for i in 0..n {
            for j in 0..n {
                sums[self.classes[i * n + j] as usize] += p[(i, j)];
            }
        }
        let shift: Vec<f64> = sums
            .iter()
            .zip(target)
            .zip(&self.class_sizes)
            .map(|((s, t), &c)| (t - s) / c as f64)
            .collect();
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += shift[self.classes[i * n + j] as usize];
            }
        }
    }

    /// `sum_{u,v} P[u, v] u^-1 v`.
    pub fn collect(&self, g: &Arc<MarkedGroup>, p: &DMatrix<f64>) -> GroupAlgElement<f64> {
        let n = self.dim();
        let mut acc = vec![0.0; self.class_sizes.len()];
        for i in 0..n {
            for j in 0..n {
                acc[self.classes[i * n + j] as usize] += p[(i, j)];
            }
        }
        GroupAlgElement::from_pairs(g, self.class_elements.iter().copied().zip(acc))
    }
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub layout: GramLayout,
    pub p: DMatrix<f64>,
}

impl GramMatrix {
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.p)
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.min()
}

#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub group: Arc<MarkedGroup>,
    /// Set when the target is `Delta^2 - nu Delta + eps`.
    pub nu: Option<f64>,
    pub epsilon: f64,
    pub radius: u32,
    /// `a + eps`.
    pub target: GroupAlgElement<f64>,
    pub xi: Vec<GroupAlgElement<f64>>,
    pub residual: GroupAlgElement<f64>,
    pub residual_l1: f64,
    /// Smallest eigenvalue of the Gram matrix the squares were read from.
    pub gram_min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl SosCertificate {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    /// `eps` minus the slack certified by the Gram floor, plus the residual:
    /// `a + eps_eff` is a sum of squares up to rounding.
    pub fn effective_epsilon(&self) -> f64 {
        (self.epsilon - self.layout_dim() as f64 * self.gram_min_eigenvalue.max(0.0) + self.residual_l1).max(0.0)
    }

    fn layout_dim(&self) -> usize {
        self.group.ball(self.radius).len()
    }

    pub fn to_json(&self) -> CertificateJson {
        CertificateJson {
            group: self.group.label().to_string(),
            nu: self.nu,
            epsilon: self.epsilon,
            radius: self.radius,
            n: self.n(),
            residual_l1: self.residual_l1,
            converged: self.converged,
            xi: self.xi.iter().map(|x| x.iter().collect()).collect(),
            iterations: self.iterations,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub group: String,
    pub nu: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub radius: u32,
    pub n: usize,
    pub residual_l1: f64,
    pub converged: bool,
    /// `[element_index, coeff]` pairs per square.
    pub xi: Vec<Vec<(usize, f64)>>,
    pub iterations: usize,
    pub seed: u64,
}

impl CertificateJson {
    /// Rebuilds a certificate on `group` and recomputes its residual against
    /// `target + epsilon`.
    pub fn into_certificate(self, group: &Arc<MarkedGroup>, target: &GroupAlgElement<f64>) -> Result<SosCertificate> {
        if self.xi.iter().flatten().any(|&(g, _)| g >= group.order()) {
            return Err(Error::Invalid("certificate element index out of range".into()));
        }
        let xi: Vec<_> = self.xi.into_iter().map(|x| GroupAlgElement::from_pairs(group, x)).collect();
        let full = target.add(&GroupAlgElement::delta(group, 0, self.epsilon))?;
        Ok(build_certificate(
            group,
            self.nu,
            self.epsilon,
            self.radius,
            full,
            xi,
            f64::NAN,
            self.iterations,
            self.converged,
            self.seed,
        ))
    }
}

#[allow(clippy::too_many_arguments)]
fn build_certificate(
    group: &Arc<MarkedGroup>,
    nu: Option<f64>,
    epsilon: f64,
    radius: u32,
    target: GroupAlgElement<f64>,
    xi: Vec<GroupAlgElement<f64>>,
    gram_min_eigenvalue: f64,
    iterations: usize,
    converged: bool,
    seed: u64,
) -> SosCertificate {
    let residual = target.sub(&sum_of_squares(group, &xi)).expect("same group");
    let residual_l1 = residual.l1_norm();
    SosCertificate {
        group: Arc::clone(group),
        nu,
        epsilon,
        radius,
        target,
        xi,
        residual,
        residual_l1,
        gram_min_eigenvalue,
        iterations,
        converged,
        seed,
    }
}

/// `sum_i xi_i^* xi_i` by exact convolution.
pub fn sum_of_squares(group: &Arc<MarkedGroup>, xi: &[GroupAlgElement<f64>]) -> GroupAlgElement<f64> {
    xi.iter().fold(GroupAlgElement::zero(group), |acc, x| {
        acc.add(&x.star().conv(x).expect("same group")).expect("same group")
    })
}

#[derive(Clone, Debug)]
pub enum SosOutcome {
    Certified(Box<SosCertificate>),
    /// The solver stalled or ran out of iterations; not a proof of anything.
    /// `dual_witness` marks a Farkas certificate that no Gram matrix with the
    /// solver's eigenvalue floor exists at this radius.
    NoCertificate { iterations: usize, distance: f64, dual_witness: bool },
    /// `a + eps` has a negative eigenvalue in the regular representation, so
    /// it is not a sum of squares at any radius.
    Infeasible { min_eigenvalue: f64 },
}

impl SosOutcome {
    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            SosOutcome::Certified(c) => Some(c),
            _ => None,
        }
    }
}

/// Smallest eigenvalue of `a` acting on `l^2(G)`.
pub fn regular_min_eigenvalue(a: &GroupAlgElement<f64>) -> f64 {
    min_eigenvalue(&group_algebra_embed(a).to_dense())
}

fn check_target(a: &GroupAlgElement<f64>, layout_radius: u32) -> Result<()> {
    let defect = a.self_adjoint_defect();
    if defect > 1e-12 {
        return Err(Error::NotSelfAdjoint(defect));
    }
    let g = a.group();
    if let Some((x, _)) = a.iter().find(|&(x, _)| g.word_len(x) > 2 * layout_radius) {
        return Err(Error::SupportExceedsBall(x));
    }
    Ok(())
}

/// Searches for `a + eps = sum_i xi_i^* xi_i` with `prop(xi_i) <= R`.
///
/// Dykstra alternating projections between the affine Gram constraints and
/// the cone `{P >= tau I}` with `tau = eps / (2 |B(1,R)|)`, stopped as soon as
/// the affine iterate is positive semidefinite. The initial point is drawn
/// from `opts.seed`.
pub fn sos_feasibility(a: &GroupAlgElement<f64>, radius: u32, epsilon: f64, opts: &SolverOptions) -> Result<SosOutcome> {
    let layout = GramLayout::new(a.group(), radius);
    sos_feasibility_with(a, &layout, epsilon, opts)
}

pub fn sos_feasibility_with(
    a: &GroupAlgElement<f64>,
    layout: &GramLayout,
    epsilon: f64,
    opts: &SolverOptions,
) -> Result<SosOutcome> {
    if epsilon < 0.0 {
        return Err(Error::Invalid("epsilon must be nonnegative".into()));
    }
    check_target(a, layout.radius)?;
    let g = a.group();
    let full = a.add(&GroupAlgElement::delta(g, 0, epsilon))?;
    if g.order() <= REGULAR_CHECK_CAP {
        let lmin = regular_min_eigenvalue(&full);
        let scale = full.l1_norm().max(1.0);
        if lmin < -1e-9 * scale {
            return Ok(SosOutcome::Infeasible { min_eigenvalue: lmin });
        }
    }
    let n = layout.dim();
    let target: Vec<f64> = layout.class_elements().iter().map(|&c| full.coeff(c)).collect();
    let tau = epsilon / (2.0 * n as f64);
    let attempt = match opts.solver {
        Solver::AnalyticCenter => analytic_center(layout, &target, tau, opts),
        Solver::Dykstra => dykstra(layout, &target, tau, opts, full.max_abs()),
    };
    let (mut p, iterations) = match attempt {
        Ok(found) => found,
        Err(no) => return Ok(no),
    };
    layout.project_affine(&mut p, &target);
    let eig = SymmetricEigen::new(p);
    let lmin = eig.eigenvalues.min();
    if lmin < 0.0 {
        return Ok(SosOutcome::NoCertificate {
            iterations,
            distance: -lmin,
            dual_witness: false,
        });
    }
    let xi = factor(g, layout, &eig);
    let cert = build_certificate(g, None, epsilon, layout.radius, full, xi, lmin, iterations, true, opts.seed);
    Ok(SosOutcome::Certified(Box::new(cert)))
}

type Attempt = std::result::Result<(DMatrix<f64>, usize), SosOutcome>;

/// Analytic centre of `{X >= 0 : class sums of X + tau I match the target}`
/// by damped Newton on `phi(y) = b.y - log det(sum_k y_k A_k)`, where `A_k`
/// is the 0/1 indicator of the classes `{c, c^-1}`. At the minimum
/// `X = (sum_k y_k A_k)^-1`. A point with `sum_k y_k A_k > 0` and `b.y < 0`
/// proves that no such `X` exists.
fn analytic_center(layout: &GramLayout, target: &[f64], tau: f64, opts: &SolverOptions) -> Attempt {
    let n = layout.dim();
    let (entries, b) = layout.symmetric_constraints(target, tau);
    let m = entries.len();
    let assemble = |y: &DVector<f64>| {
        let mut big = DMatrix::zeros(n, n);
        for (k, e) in entries.iter().enumerate() {
            for &(i, j) in e {
                big[(i, j)] += y[k];
            }
        }
        big
    };
    let objective = |y: &DVector<f64>| -> Option<(f64, DMatrix<f64>)> {
        let chol: nalgebra::Cholesky<f64, nalgebra::Dyn> = assemble(y).cholesky()?;
        let logdet: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d: &f64| d.ln()).sum::<f64>();
        Some((b.dot(y) - logdet, chol.inverse()))
    };
    let mut y = DVector::zeros(m);
    y[layout.identity_group()] = 1.0;
    let (mut phi, mut w) = objective(&y).expect("identity start is positive definite");
    let b_scale = b.amax().max(1.0);
    for it in 0..opts.newton_iter {
        let grad = DVector::from_iterator(m, entries.iter().zip(b.iter()).map(|(e, bk)| bk - e.iter().map(|&(i, j)| w[(i, j)]).sum::<f64>()));
        let mut hess = DMatrix::zeros(m, m);
        for (l, el) in entries.iter().enumerate() {
            let mut wa = DMatrix::zeros(n, n);
            for &(i, j) in el {
                for r in 0..n {
                    wa[(r, j)] += w[(r, i)];
                }
            }
            let t = wa * &w;
            for (k, ek) in entries.iter().enumerate().skip(l) {
                let v: f64 = ek.iter().map(|&(i, j)| t[(i, j)]).sum();
                hess[(k, l)] = v;
                hess[(l, k)] = v;
            }
        }
        let step = match hess.clone().cholesky() {
            Some(c) => c.solve(&(-&grad)),
            None => match hess.lu().solve(&(-&grad)) {
                Some(s) => s,
                None => break,
            },
        };
        let decrement = -grad.dot(&step);
        if decrement < 1e-10 || grad.amax() < 1e-13 * b_scale {
            return Ok((w + DMatrix::identity(n, n) * tau, it));
        }
        let mut t = 1.0;
        loop {
            let trial = &y + &step * t;
            if let Some((p2, w2)) = objective(&trial) {
                if p2 <= phi - 0.25 * t * decrement {
                    y = trial;
                    phi = p2;
                    w = w2;
                    break;
                }
            }
            t *= 0.5;
            if t < 1e-14 {
                if decrement < 1e-8 {
                    return Ok((w + DMatrix::identity(n, n) * tau, it));
                }
                return Err(SosOutcome::NoCertificate {
                    iterations: it,
                    distance: grad.amax(),
                    dual_witness: false,
                });
            }
        }
        if b.dot(&y) < -1e-12 * b_scale * y.amax() {
            return Err(SosOutcome::NoCertificate {
                iterations: it + 1,
                distance: f64::NAN,
                dual_witness: true,
            });
        }
    }
    Err(SosOutcome::NoCertificate {
        iterations: opts.newton_iter,
        distance: f64::NAN,
        dual_witness: false,
    })
}

/// Dykstra alternating projections between the affine constraints and
/// `{P >= tau I}`, started from a seeded random point, until the affine
/// iterate is positive semidefinite.
fn dykstra(layout: &GramLayout, target: &[f64], tau: f64, opts: &SolverOptions, size: f64) -> Attempt {
    let n = layout.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let scale = 1e-3 * size.max(1e-12) / n as f64;
    let mut x = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-scale..scale));
    x = (&x + x.transpose()) * 0.5;
    layout.project_affine(&mut x, target);
    let mut q = DMatrix::zeros(n, n);
    let mut anchor = x.clone();
    let mut lmin = f64::NEG_INFINITY;
    for it in 0..=opts.max_iter {
        lmin = min_eigenvalue(&x);
        if lmin >= 0.0 {
            return Ok((x, it));
        }
        if it == opts.max_iter {
            break;
        }
        let z = &x + &q;
        let mut ez = SymmetricEigen::new(z.clone());
        ez.eigenvalues.iter_mut().for_each(|l| *l = l.max(tau));
        let y = ez.recompose();
        let y = (&y + y.transpose()) * 0.5;
        q = z - &y;
        let mut next = y;
        layout.project_affine(&mut next, target);
        x = next;
        if (it + 1) % opts.stall_window == 0 {
            let progress = (&x - &anchor).norm() / x.norm().max(1e-300);
            if progress < opts.stall_tol {
                return Err(SosOutcome::NoCertificate {
                    iterations: it + 1,
                    distance: -lmin,
                    dual_witness: false,
                });
            }
            anchor = x.clone();
        }
    }
    Err(SosOutcome::NoCertificate {
        iterations: opts.max_iter,
        distance: -lmin,
        dual_witness: false,
    })
}

fn factor(g: &Arc<MarkedGroup>, layout: &GramLayout, eig: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<GroupAlgElement<f64>> {
    let top = eig.eigenvalues.max().max(0.0);
    let mut out = Vec::new();
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l <= 1e-300 || l < 1e-18 * top {
            continue;
        }
        let s = l.sqrt();
        let col = eig.eigenvectors.column(i);
        out.push(GroupAlgElement::from_pairs(
            g,
            layout.basis.iter().enumerate().map(|(j, &u)| (u, s * col[j])),
        ));
    }
    out
}

/// `Delta^2 - nu Delta`.
pub fn gap_target(g: &Arc<MarkedGroup>, nu: f64) -> GroupAlgElement<f64> {
    let d = GroupAlgElement::<f64>::laplacian(g);
    d.conv(&d).expect("same group").sub(&d.scale(nu)).expect("same group")
}

#[derive(Clone, Debug)]
pub struct CertifiedGap {
    /// Lower edge of the certified spectral window: the certificate at
    /// `nu_certified` shows the Laplacian spectrum avoids `(lambda_lo, gap)`.
    /// `+inf` for a zero Laplacian, `0` when nothing is certified.
    pub gap: f64,
    pub lambda_lo: f64,
    /// Largest `nu` accepted by the bisection.
    pub nu_certified: f64,
    pub certificate: Option<SosCertificate>,
    pub steps: usize,
}

/// Roots of `x^2 - nu x + eps`, if real.
pub fn excluded_window(nu: f64, eps: f64) -> Option<(f64, f64)> {
    let disc = nu * nu - 4.0 * eps;
    if disc < 0.0 || nu <= 0.0 {
        return None;
    }
    let hi = (nu + disc.sqrt()) / 2.0;
    Some((eps / hi, hi))
}

fn reaches_zero(nu: f64, eps_eff: f64, tol: f64) -> bool {
    excluded_window(nu, eps_eff).is_some_and(|(lo, _)| lo <= tol)
}

/// Bisection over `nu in [0, 4k]` for the largest `nu` at which
/// `Delta^2 - nu Delta + eps` is certified and the certificate's window
/// reaches down to `tol`.
///
/// A certificate gives `lambda^2 - nu lambda + eps_eff >= 0` on the spectrum,
/// which excludes the open interval between the two roots. The Gram floor
/// usually absorbs most of `eps`, so `eps_eff` can be far below `eps`. Only
/// when the lower root is at most `tol` does the window bound the gap from
/// below; the reported gap is then the upper root.
pub fn certified_gap(g: &Arc<MarkedGroup>, radius: u32, epsilon: f64, tol: f64, opts: &SolverOptions) -> Result<CertifiedGap> {
    if GroupAlgElement::<f64>::laplacian(g).is_zero() {
        return Ok(CertifiedGap {
            gap: f64::INFINITY,
            lambda_lo: 0.0,
            nu_certified: f64::INFINITY,
            certificate: None,
            steps: 0,
        });
    }
    if radius < 1 {
        return Err(Error::Invalid("radius must be at least 1".into()));
    }
    let layout = GramLayout::new(g, radius);
    let attempt = |nu: f64| -> Result<Option<SosCertificate>> {
        let out = sos_feasibility_with(&gap_target(g, nu), &layout, epsilon, opts)?;
        Ok(match out {
            SosOutcome::Certified(mut c) if nu <= 0.0 || reaches_zero(nu, c.effective_epsilon(), tol) => {
                c.nu = Some(nu);
                Some(*c)
            }
            _ => None,
        })
    };
    let mut lo = 0.0;
    let mut best = attempt(lo)?;
    let mut hi = 4.0 * g.k() as f64;
    let mut steps = 1;
    if best.is_some() {
        if let Some(c) = attempt(hi)? {
            lo = hi;
            best = Some(c);
        }
        steps += 1;
        while hi - lo > tol && lo < hi {
            let mid = 0.5 * (lo + hi);
            steps += 1;
            match attempt(mid)? {
                Some(c) => {
                    lo = mid;
                    best = Some(c);
                }
                None => hi = mid,
            }
        }
    }
    let (gap, lambda_lo) = match &best {
        Some(c) => excluded_window(lo, c.effective_epsilon()).map_or((0.0, 0.0), |(l, h)| (h, l)),
        None => (0.0, 0.0),
    };
    Ok(CertifiedGap {
        gap,
        lambda_lo,
        nu_certified: if best.is_some() { lo } else { 0.0 },
        certificate: best,
        steps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub nu_certified: f64,
    pub gap: f64,
    pub lambda_lo: f64,
}

/// `certified_gap` for each `eps`, in the given order.
pub fn epsilon_sweep(g: &Arc<MarkedGroup>, radius: u32, epsilons: &[f64], tol: f64, opts: &SolverOptions) -> Result<Vec<SweepRow>> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let c = certified_gap(g, radius, epsilon, tol, opts)?;
            Ok(SweepRow {
                epsilon,
                nu_certified: c.nu_certified,
                gap: c.gap,
                lambda_lo: c.lambda_lo,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub residual_l1: f64,
    pub propagation_ok: bool,
    /// Smallest eigenvalue of `sum_i alpha_i alpha_i^T` on `B(1, R)`.
    pub psd_witness: f64,
}

/// Independent recomputation of `target - sum_i xi_i^* xi_i`.
pub fn verify_certificate(cert: &SosCertificate, target: &GroupAlgElement<f64>) -> Result<Verification> {
    let g = target.group();
    let residual = target.sub(&sum_of_squares(g, &cert.xi))?;
    let propagation_ok = cert.xi.iter().all(|x| x.propagation() <= cert.radius);
    let basis = g.ball(cert.radius);
    let n = basis.len();
    let mut gram = DMatrix::zeros(n, n);
    for x in &cert.xi {
        let v: Vec<f64> = basis.iter().map(|&u| x.coeff(u)).collect();
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += v[i] * v[j];
            }
        }
    }
    Ok(Verification {
        residual_l1: residual.l1_norm(),
        propagation_ok,
        psd_witness: min_eigenvalue(&gram),
    })
}

/// Pushes a certificate on `H` to `G` along a partial isomorphism.
///
/// For `Delta^2 - nu Delta + eps` targets the residual is recomputed against
/// the same expression on `G`; otherwise against the pushed target.
pub fn transport_certificate(cert: &SosCertificate, phi: &PartialIso, g: &Arc<MarkedGroup>) -> Result<SosCertificate> {
    if phi.radius < cert.radius {
        return Err(Error::BallTooSmall(cert.radius as usize));
    }
    if cert.group.k() != g.k() {
        return Err(Error::KMismatch(cert.group.k(), g.k()));
    }
    let push = |x: &GroupAlgElement<f64>| -> Result<GroupAlgElement<f64>> {
        let pairs = x
            .iter()
            .map(|(h, c)| phi.apply(h).map(|t| (t, c)).ok_or(Error::BallTooSmall(cert.radius as usize)))
            .collect::<Result<Vec<_>>>()?;
        if pairs.iter().any(|&(t, _)| t >= g.order()) {
            return Err(Error::GroupMismatch);
        }
        Ok(GroupAlgElement::from_pairs(g, pairs))
    };
    let xi = cert.xi.iter().map(push).collect::<Result<Vec<_>>>()?;
    let target = match cert.nu {
        Some(nu) => gap_target(g, nu).add(&GroupAlgElement::delta(g, 0, cert.epsilon))?,
        None => push(&cert.target)?,
    };
    Ok(build_certificate(
        g,
        cert.nu,
        cert.epsilon,
        cert.radius,
        target,
        xi,
        cert.gram_min_eigenvalue,
        cert.iterations,
        cert.converged,
        cert.seed,
    ))
}
