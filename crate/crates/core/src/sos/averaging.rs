use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{GroupAlgElement, MarkedGroup};
use crate::roe::{group_algebra_embed, DisjointUnionSpace, Kernel};
use crate::scalar::Scalar;

/// Turns a sum of squares in the Roe algebra of `Cay(G)` into one in the
/// group algebra.
///
/// Each `xi` is split as `sum_c D(xi_c) u_c` with `xi_c(x) = xi[x, c^-1 x]`
/// and `u_c[x, y] = [x = c y]`. Averaging over `G` sends
/// `u_c^* D(f) u_d` to `mean(f) c^-1 d`, so with the Gram matrix
/// `M[c, d] = mean(conj(xi_c) xi_d)` on `B(1, R)` and `S = M^(1/2)` the
/// elements `eta_i = sum_c S[i, c] c` satisfy
/// `sum_i eta_i^* eta_i = sum_{c,d} M[c, d] c^-1 d`, which is
/// `sum xi^* xi` when that kernel comes from the group algebra.
///
/// Returns `|B(1, R)|` elements per input, zero elements included.
pub fn roe_to_group_sos<T: Scalar>(
    xi_list: &[Kernel<T>],
    g: &Arc<MarkedGroup>,
    radius: u32,
) -> Result<Vec<GroupAlgElement<Complex64>>> {
    let order = g.order();
    for xi in xi_list {
        if xi.dim() != order || xi.space().blocks().len() != 1 {
            return Err(Error::Invalid("kernel is not over the Cayley space of the group".into()));
        }
        if xi.propagation() > radius as u64 {
            return Err(Error::PropagationExceeded {
                found: xi.propagation(),
                bound: radius as u64,
            });
        }
    }
    let c = |v: T| Complex64::new(v.re(), v.im());

    // x = sum xi^* xi, and its group-algebra coefficients x(c) = x[c, 1]
    let mut x = DMatrix::<Complex64>::zeros(order, order);
    for xi in xi_list {
        for (a, b, v) in xi.entries() {
            let conj = c(v).conj();
            for (d, w) in xi.row(a) {
                x[(b, d)] += conj * c(w);
            }
        }
    }
    let coeff: Vec<Complex64> = (0..order).map(|h| x[(h, 0)]).collect();
    let mut defect: f64 = 0.0;
    for a in 0..order {
        for b in 0..order {
            let h = g.mul(a, g.inv(b));
            defect = defect.max((x[(a, b)] - coeff[h]).norm());
        }
    }
    if defect > 1e-10 {
        return Err(Error::NotInGroupAlgebra(defect));
    }

    let basis = g.ball(radius);
    let n = basis.len();
    let mut out = Vec::with_capacity(xi_list.len() * n);
    for xi in xi_list {
        // columns: xi_c as a function on G
        let mut cols = DMatrix::<Complex64>::zeros(order, n);
        for (j, &cc) in basis.iter().enumerate() {
            let ci = g.inv(cc);
            for p in 0..order {
                cols[(p, j)] = c(xi.get(p, g.mul(ci, p)));
            }
        }
        let gram = cols.adjoint() * &cols / Complex64::new(order as f64, 0.0);
        let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
        let mut eig = SymmetricEigen::new(gram);
        eig.eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0).sqrt());
        let s = eig.recompose();
        for i in 0..n {
            out.push(GroupAlgElement::from_pairs(
                g,
                basis.iter().enumerate().map(|(j, &cc)| (cc, s[(i, j)])),
            ));
        }
    }
    Ok(out)
}

/// `l1` norm of `target - sum_i eta_i^* eta_i`.
pub fn reassembly_defect(outputs: &[GroupAlgElement<Complex64>], target: &GroupAlgElement<f64>) -> Result<f64> {
    let mut acc = target.map(|v| Complex64::new(v, 0.0));
    for eta in outputs {
        acc = acc.sub(&eta.star().conv(eta)?)?;
    }
    Ok(acc.l1_norm())
}

/// Sum-of-squares input in the Roe algebra whose terms are not
/// `G`-invariant but whose sum of squares is.
#[derive(Clone, Debug)]
pub struct RoeSosSample {
    pub inputs: Vec<Kernel<f64>>,
    /// `sum_j a_j^* a_j` for the underlying group-algebra elements `a_j`.
    pub target: GroupAlgElement<f64>,
}

/// Draws `n` elements `a_j` supported in `B(1, R)` and mixes the rows of their
/// kernels by an independent random orthogonal `n x n` matrix at every point:
/// `xi_i[x, y] = sum_j O_x[i, j] a_j(x y^-1)`.
pub fn random_roe_sos_input(g: &Arc<MarkedGroup>, radius: u32, n: usize, rng: &mut impl Rng) -> RoeSosSample {
    let ball = g.ball(radius);
    let elems: Vec<GroupAlgElement<f64>> = (0..n)
        .map(|_| GroupAlgElement::from_pairs(g, ball.iter().map(|&b| (b, rng.gen_range(-1.0..1.0)))))
        .collect();
    let kernels: Vec<Kernel<f64>> = elems.iter().map(group_algebra_embed).collect();
    let space = Arc::new(DisjointUnionSpace::cayley(g));
    let mut rows: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n];
    for x in 0..g.order() {
        let o = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).qr().q();
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, k) in kernels.iter().enumerate() {
                for (y, v) in k.row(x) {
                    row.push((x, y, o[(i, j)] * v));
                }
            }
        }
    }
    let inputs = rows
        .into_iter()
        .map(|r| Kernel::from_entries(&space, r).expect("entries lie in one block"))
        .collect();
    let target = elems.iter().fold(GroupAlgElement::zero(g), |acc, a| {
        acc.add(&a.star().conv(a).expect("same group")).expect("same group")
    });
    RoeSosSample { inputs, target }
}
