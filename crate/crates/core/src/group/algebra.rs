use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Letter, MarkedGroup};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finitely supported element `sum_g c(g) g` of the group algebra.
///
/// Exact zeros are never stored. The involution is
/// `(sum c(g) g)^* = sum conj(c(g)) g^-1`, so that `(xi^* xi)(h^-1 g)`
/// collects `conj(xi(h)) xi(g)`.
#[derive(Clone, Debug)]
pub struct GroupAlgElement<T: Scalar> {
    group: Arc<MarkedGroup>,
    coeffs: BTreeMap<usize, T>,
}

impl<T: Scalar> PartialEq for GroupAlgElement<T> {
    fn eq(&self, other: &Self) -> bool {
        same_group(&self.group, &other.group) && self.coeffs == other.coeffs
    }
}

pub(crate) fn same_group(a: &Arc<MarkedGroup>, b: &Arc<MarkedGroup>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl<T: Scalar> GroupAlgElement<T> {
    pub fn zero(group: &Arc<MarkedGroup>) -> Self {
        Self {
            group: Arc::clone(group),
            coeffs: BTreeMap::new(),
        }
    }

    /// `c * g`.
    pub fn delta(group: &Arc<MarkedGroup>, g: usize, c: T) -> Self {
        let mut e = Self::zero(group);
        e.add_at(g, c);
        e
    }

    pub fn one(group: &Arc<MarkedGroup>) -> Self {
        Self::delta(group, 0, T::one())
    }

    pub fn from_pairs(group: &Arc<MarkedGroup>, pairs: impl IntoIterator<Item = (usize, T)>) -> Self {
        let mut e = Self::zero(group);
        for (g, c) in pairs {
            e.add_at(g, c);
        }
        e
    }

    /// Unnormalized Laplacian `2k - sum_j (s_j + s_j^-1)` over the marked
    /// generator multiset, built from integer coefficients.
    pub fn laplacian(group: &Arc<MarkedGroup>) -> Self {
        let ints = laplacian_coefficients(group);
        Self::from_pairs(group, ints.into_iter().map(|(g, c)| (g, T::from_i64(c))))
    }

    pub fn group(&self) -> &Arc<MarkedGroup> {
        &self.group
    }

    pub fn coeff(&self, g: usize) -> T {
        self.coeffs.get(&g).copied().unwrap_or_else(T::zero)
    }

    /// Nonzero coefficients in element order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.coeffs.iter().map(|(&g, &c)| (g, c))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_at(&mut self, g: usize, c: T) {
        assert!(g < self.group.order(), "element {g} out of range");
        let v = self.coeff(g) + c;
        if v == T::zero() {
            self.coeffs.remove(&g);
        } else {
            self.coeffs.insert(g, v);
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (g, c) in other.iter() {
            out.add_at(g, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(T::zero() - T::one()))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_pairs(&self.group, self.iter().map(|(g, c)| (g, c * s)))
    }

    /// Group-algebra product: `(ab)(g) = sum_{uv = g} a(u) b(v)`.
    pub fn conv(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
        for (u, a) in self.iter() {
            for (v, b) in other.iter() {
                let e = acc.entry(self.group.mul(u, v)).or_insert_with(T::zero);
                *e += a * b;
            }
        }
        Ok(Self::from_pairs(&self.group, acc))
    }

    pub fn star(&self) -> Self {
        Self::from_pairs(
            &self.group,
            self.iter().map(|(g, c)| (self.group.inv(g), c.conj())),
        )
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.modulus()).sum()
    }

    /// Largest word length in the support; 0 for the zero element.
    pub fn propagation(&self) -> u32 {
        self.coeffs
            .keys()
            .map(|&g| self.group.word_len(g))
            .max()
            .unwrap_or(0)
    }

    /// `max_g |a(g) - conj(a(g^-1))|`.
    pub fn self_adjoint_defect(&self) -> f64 {
        let s = self.star();
        self.sub(&s).map(|d| d.max_abs()).unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> GroupAlgElement<U> {
        GroupAlgElement::from_pairs(&self.group, self.iter().map(|(g, c)| (g, f(c))))
    }

    /// Real parts, failing when any imaginary part exceeds `tol`.
    pub fn to_real(&self, tol: f64) -> Result<GroupAlgElement<f64>> {
        let worst = self.coeffs.values().map(|c| c.im().abs()).fold(0.0, f64::max);
        if worst > tol {
            return Err(Error::NotSelfAdjoint(worst));
        }
        Ok(self.map(|c| c.re()))
    }
}

/// Integer Laplacian coefficients: `2k` at the identity, `-1` at every
/// occurrence of `s_j` and of `s_j^-1`.
pub(crate) fn laplacian_coefficients(group: &MarkedGroup) -> BTreeMap<usize, i64> {
    let mut c: BTreeMap<usize, i64> = BTreeMap::new();
    *c.entry(0).or_default() += 2 * group.k() as i64;
    for j in 0..group.k() {
        for inverse in [false, true] {
            *c.entry(group.letter_element(Letter::new(j, inverse))).or_default() -= 1;
        }
    }
    c.retain(|_, v| *v != 0);
    c
}
