//! First cohomology of the kernel algebra of a finite disjoint union.
//!
//! For a finite plain union `X` the kernel algebra `A` is spanned by the
//! matrix units `e_xy` with `x, y` in one block, and the diagonal subalgebra
//! `D` by the `e_xx`. The augmentation ideal `L = ker omega` has basis
//! `l_xy = e_xy - e_xx` (`x != y`). Cochains are left `D`-linear:
//!
//! - `C^0 = M`, with `(d_1 v)(l) = l . v`;
//! - `C^1 = Hom_D(L, M)`: `theta(l_xy)` lies in the range of `e_xx`;
//! - `C^2 = Hom_D(A (x)_D L, M)` on the basis `e_zx (x) l_xy`, with
//!   `(d_2 theta)(a (x) l) = a . theta(l) - theta(a l)` and
//!   `e_zx l_xy = l_zy - l_zx` (`l_zz = 0`).

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roe::DisjointUnionSpace;

/// Default bound on `dim(L) * dim(M)`.
pub const DEFAULT_CAP: usize = 8192;
pub const COCYCLE_TOL: f64 = 1e-9;
pub const SOLVE_TOL: f64 = 1e-8;

/// Relative eigenvalue threshold on Gram matrices for numerical rank.
const GRAM_TOL: f64 = 1e-13;

/// A finite-dimensional unital left module over the kernel algebra.
#[derive(Clone, Debug)]
pub struct ModuleRep {
    dim: usize,
    points: usize,
    /// Image of `e_xy` for `x, y` in the same block.
    action: HashMap<(usize, usize), DMatrix<f64>>,
}

impl ModuleRep {
    /// `l^2(X)` with `e_xy` acting as a matrix unit.
    pub fn natural(space: &DisjointUnionSpace) -> Self {
        let n = space.len();
        let mut action = HashMap::new();
        for (x, y) in unit_pairs(space) {
            let mut m = DMatrix::zeros(n, n);
            m[(x, y)] = 1.0;
            action.insert((x, y), m);
        }
        Self {
            dim: n,
            points: n,
            action,
        }
    }

    /// `sum_b mult[b]` copies of the natural module of block `b`.
    pub fn from_multiplicities(space: &DisjointUnionSpace, mult: &[usize]) -> Result<Self> {
        if mult.len() != space.blocks().len() {
            return Err(Error::Invalid("one multiplicity per block is required".into()));
        }
        let mut parts = Vec::new();
        for (b, &m) in mult.iter().enumerate() {
            for _ in 0..m {
                parts.push(b);
            }
        }
        let dim: usize = parts.iter().map(|&b| space.blocks()[b].size()).sum();
        let mut action = HashMap::new();
        for (x, y) in unit_pairs(space) {
            action.insert((x, y), DMatrix::zeros(dim, dim));
        }
        let mut offset = 0;
        for b in parts {
            let size = space.blocks()[b].size();
            for i in 0..size {
                for j in 0..size {
                    let (x, y) = (space.global(b, i), space.global(b, j));
                    action.get_mut(&(x, y)).unwrap()[(offset + i, offset + j)] = 1.0;
                }
            }
            offset += size;
        }
        let out = Self {
            dim,
            points: space.len(),
            action,
        };
        out.validate(1e-12)?;
        Ok(out)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.points != other.points {
            return Err(Error::Invalid("modules over different spaces".into()));
        }
        let dim = self.dim + other.dim;
        let action = self
            .action
            .iter()
            .map(|(&k, a)| {
                let b = &other.action[&k];
                let mut m = DMatrix::zeros(dim, dim);
                m.view_mut((0, 0), (self.dim, self.dim)).copy_from(a);
                m.view_mut((self.dim, self.dim), (other.dim, other.dim)).copy_from(b);
                (k, m)
            })
            .collect();
        Ok(Self {
            dim,
            points: self.points,
            action,
        })
    }

    /// The isomorphic module `s a s^-1`.
    pub fn conjugate(&self, s: &DMatrix<f64>) -> Result<Self> {
        let inv = s
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("conjugating matrix is singular".into()))?;
        Ok(Self {
            dim: self.dim,
            points: self.points,
            action: self.action.iter().map(|(&k, a)| (k, s * a * &inv)).collect(),
        })
    }

    /// Conjugate by `2 I + U` with `U` uniform in `[-1/2, 1/2]` entrywise,
    /// redrawn until invertible.
    pub fn random_conjugate(&self, rng: &mut impl Rng) -> Self {
        loop {
            let s = DMatrix::from_fn(self.dim, self.dim, |i, j| {
                let base = if i == j { 2.0 } else { 0.0 };
                base + rng.gen_range(-0.5..0.5)
            });
            if let Ok(m) = self.conjugate(&s) {
                return m;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self, x: usize, y: usize) -> &DMatrix<f64> {
        &self.action[&(x, y)]
    }

    /// Image of a diagonal function.
    pub fn diagonal(&self, d: &[f64]) -> DMatrix<f64> {
        d.iter()
            .enumerate()
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, (x, &v)| acc + self.unit(x, x) * v)
    }

    /// Checks `e_xy e_zw = [y = z] e_xw` and `sum_x e_xx = 1`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let zero = DMatrix::zeros(self.dim, self.dim);
        let unit = self
            .action
            .iter()
            .filter(|((x, y), _)| x == y)
            .fold(zero.clone(), |acc, (_, m)| acc + m);
        let err = (unit - DMatrix::identity(self.dim, self.dim)).amax();
        if err > tol {
            return Err(Error::Invalid(format!("module is not unital (defect {err:e})")));
        }
        for (&(x, y), a) in &self.action {
            for (&(z, w), b) in &self.action {
                let prod = a * b;
                let expect = if y == z { &self.action[&(x, w)] } else { &zero };
                let err = (prod - expect).amax();
                if err > tol {
                    return Err(Error::Invalid(format!("not multiplicative at e_{x}{y} e_{z}{w} (defect {err:e})")));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> ModuleJson {
        let mut action: Vec<UnitAction> = self
            .action
            .iter()
            .map(|(&(x, y), m)| UnitAction {
                x,
                y,
                matrix: m.row_iter().map(|r| r.iter().copied().collect()).collect(),
            })
            .collect();
        action.sort_by_key(|u| (u.x, u.y));
        ModuleJson {
            dim: self.dim,
            action,
        }
    }

    /// Reads user matrices; every unit of the space must be present.
    pub fn from_json(space: &DisjointUnionSpace, data: &ModuleJson) -> Result<Self> {
        let mut action = HashMap::new();
        for u in &data.action {
            if u.matrix.len() != data.dim || u.matrix.iter().any(|r| r.len() != data.dim) {
                return Err(Error::Invalid(format!("matrix for e_{}{} has the wrong shape", u.x, u.y)));
            }
            if u.x >= space.len() || u.y >= space.len() || !space.same_block(u.x, u.y) {
                return Err(Error::NotWithinBlocks(u.x, u.y));
            }
            let m = DMatrix::from_fn(data.dim, data.dim, |i, j| u.matrix[i][j]);
            action.insert((u.x, u.y), m);
        }
        for key in unit_pairs(space) {
            if !action.contains_key(&key) {
                return Err(Error::Invalid(format!("missing action of e_{}{}", key.0, key.1)));
            }
        }
        let out = Self {
            dim: data.dim,
            points: space.len(),
            action,
        };
        out.validate(1e-9)?;
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitAction {
    pub x: usize,
    pub y: usize,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub dim: usize,
    pub action: Vec<UnitAction>,
}

fn unit_pairs(space: &DisjointUnionSpace) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for b in 0..space.blocks().len() {
        let size = space.blocks()[b].size();
        for i in 0..size {
            for j in 0..size {
                out.push((space.global(b, i), space.global(b, j)));
            }
        }
    }
    out
}

/// Pairs `(x, y)` standing for `l_xy = e_xy - e_xx`, `x != y` in one block,
/// in lexicographic order.
pub fn augmentation_ideal_basis(space: &DisjointUnionSpace) -> Vec<(usize, usize)> {
    unit_pairs(space).into_iter().filter(|(x, y)| x != y).collect()
}

/// Triples `(z, x, y)` standing for `e_zx (x) l_xy`.
pub fn tensor_basis(space: &DisjointUnionSpace) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (x, y) in augmentation_ideal_basis(space) {
        let (b, _) = space.locate(x);
        for i in 0..space.blocks()[b].size() {
            out.push((space.global(b, i), x, y));
        }
    }
    out.sort();
    out
}

/// A cochain: one module vector per chain basis element (as columns).
#[derive(Clone, Debug, PartialEq)]
pub struct CochainMap {
    pub degree: usize,
    pub matrix: DMatrix<f64>,
}

impl CochainMap {
    pub fn zero(space: &DisjointUnionSpace, module: &ModuleRep, degree: usize) -> Result<Self> {
        let cols = match degree {
            1 => augmentation_ideal_basis(space).len(),
            2 => tensor_basis(space).len(),
            n => return Err(Error::DegreeUnsupported(n)),
        };
        Ok(Self {
            degree,
            matrix: DMatrix::zeros(module.dim(), cols),
        })
    }

    /// `max |theta(d l) - d . theta(l)|` over `d` in `samples`, degree 1.
    pub fn d_linearity_defect(&self, space: &DisjointUnionSpace, module: &ModuleRep, samples: &[Vec<f64>]) -> f64 {
        let basis = augmentation_ideal_basis(space);
        let mut worst: f64 = 0.0;
        for d in samples {
            let act = module.diagonal(d);
            for (col, &(x, _)) in basis.iter().enumerate() {
                let th = self.matrix.column(col);
                // d l_xy = d(x) l_xy
                let lhs = th * d[x];
                let rhs = &act * th;
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }
}

pub enum CochainArg<'a> {
    Vector(&'a DVector<f64>),
    Map(&'a CochainMap),
}

pub fn differential(n: usize, space: &DisjointUnionSpace, module: &ModuleRep, input: CochainArg<'_>) -> Result<CochainMap> {
    match (n, input) {
        (1, CochainArg::Vector(v)) => Ok(d1(space, module, v)),
        (2, CochainArg::Map(theta)) => d2(space, module, theta),
        (1 | 2, _) => Err(Error::Invalid("degree and argument kind disagree".into())),
        (n, _) => Err(Error::DegreeUnsupported(n)),
    }
}

/// `theta(l_xy) = (e_xy - e_xx) . v`.
pub fn d1(space: &DisjointUnionSpace, module: &ModuleRep, v: &DVector<f64>) -> CochainMap {
    let basis = augmentation_ideal_basis(space);
    let mut m = DMatrix::zeros(module.dim(), basis.len());
    for (col, &(x, y)) in basis.iter().enumerate() {
        m.set_column(col, &((module.unit(x, y) - module.unit(x, x)) * v));
    }
    CochainMap { degree: 1, matrix: m }
}

/// `(d_2 theta)(e_zx (x) l_xy) = e_zx . theta(l_xy) - theta(l_zy) + theta(l_zx)`.
pub fn d2(space: &DisjointUnionSpace, module: &ModuleRep, theta: &CochainMap) -> Result<CochainMap> {
    if theta.degree != 1 {
        return Err(Error::Invalid("d_2 takes a degree-1 cochain".into()));
    }
    let basis = augmentation_ideal_basis(space);
    let index: HashMap<(usize, usize), usize> = basis.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let col = |x: usize, y: usize| -> DVector<f64> {
        if x == y {
            DVector::zeros(module.dim())
        } else {
            theta.matrix.column(index[&(x, y)]).into()
        }
    };
    let tensor = tensor_basis(space);
    let mut m = DMatrix::zeros(module.dim(), tensor.len());
    for (c, &(z, x, y)) in tensor.iter().enumerate() {
        let v = module.unit(z, x) * col(x, y) - col(z, y) + col(z, x);
        m.set_column(c, &v);
    }
    Ok(CochainMap { degree: 2, matrix: m })
}

/// Eigenpairs of `m^T m`, eigenvalues descending.
fn gram_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.ncols(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Number of eigenvalues of `m^T m` above the relative threshold.
fn nonzero(values: &[f64]) -> usize {
    let top = values.first().copied().unwrap_or(0.0);
    values.iter().filter(|&&l| top > 0.0 && l > GRAM_TOL * top).count()
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    nonzero(&gram_eigen(m).0)
}

/// Orthonormal basis of the column space, from the eigenvectors of `m m^T`.
fn range_basis(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m * m.transpose());
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| top > 0.0 && eig.eigenvalues[i] > GRAM_TOL * top)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Parametrisation of `C^1`: `theta(l_xy) = U_x c_xy` with `U_x` a basis of
/// the range of `e_xx`.
fn cochain_coordinates(space: &DisjointUnionSpace, module: &ModuleRep) -> (DMatrix<f64>, Vec<(usize, usize)>) {
    let basis = augmentation_ideal_basis(space);
    let ranges: HashMap<usize, DMatrix<f64>> = (0..space.len()).map(|x| (x, range_basis(module.unit(x, x)))).collect();
    let dim_m = module.dim();
    let total: usize = basis.iter().map(|(x, _)| ranges[x].ncols()).sum();
    let mut embed = DMatrix::zeros(dim_m * basis.len(), total);
    let mut offset = 0;
    for (col, (x, _)) in basis.iter().enumerate() {
        let u = &ranges[x];
        embed.view_mut((col * dim_m, offset), (dim_m, u.ncols())).copy_from(u);
        offset += u.ncols();
    }
    (embed, basis)
}

/// `d_2` as a matrix from stacked `C^1` columns to stacked `C^2` columns.
fn d2_matrix(space: &DisjointUnionSpace, module: &ModuleRep) -> DMatrix<f64> {
    let basis = augmentation_ideal_basis(space);
    let dim_m = module.dim();
    let cols = basis.len() * dim_m;
    let rows = tensor_basis(space).len() * dim_m;
    let mut out = DMatrix::zeros(rows, cols);
    // d_2 is linear: evaluate on unit cochains
    for j in 0..cols {
        let mut theta = DMatrix::zeros(dim_m, basis.len());
        theta[(j % dim_m, j / dim_m)] = 1.0;
        let image = d2(space, module, &CochainMap { degree: 1, matrix: theta }).expect("degree 1");
        out.set_column(j, &DVector::from_column_slice(image.matrix.as_slice()));
    }
    out
}

fn d1_matrix(space: &DisjointUnionSpace, module: &ModuleRep) -> DMatrix<f64> {
    let basis = augmentation_ideal_basis(space);
    let dim_m = module.dim();
    let mut out = DMatrix::zeros(basis.len() * dim_m, dim_m);
    for (col, &(x, y)) in basis.iter().enumerate() {
        out.view_mut((col * dim_m, 0), (dim_m, dim_m))
            .copy_from(&(module.unit(x, y) - module.unit(x, x)));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H1Report {
    pub dim_l: usize,
    pub dim_module: usize,
    pub dim_cochains: usize,
    pub cocycles: usize,
    pub coboundaries: usize,
    pub h1: usize,
}

/// `dim ker d_2 - dim ran d_1` on `D`-linear 1-cochains.
pub fn h1_dim(space: &DisjointUnionSpace, module: &ModuleRep, cap: usize) -> Result<H1Report> {
    let dim_l = augmentation_ideal_basis(space).len();
    let size = dim_l * module.dim();
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let (embed, _) = cochain_coordinates(space, module);
    let dim_cochains = embed.ncols();
    let cocycles = dim_cochains - rank(&(d2_matrix(space, module) * &embed));
    let coboundaries = rank(&d1_matrix(space, module));
    Ok(H1Report {
        dim_l,
        dim_module: module.dim(),
        dim_cochains,
        cocycles,
        coboundaries,
        h1: cocycles - coboundaries,
    })
}

/// Least-norm `v` with `theta(l) = l . v` for every basis element `l`.
pub fn coboundary_solve(space: &DisjointUnionSpace, module: &ModuleRep, theta: &CochainMap, cocycle_tol: f64, solve_tol: f64) -> Result<DVector<f64>> {
    let defect = d2(space, module, theta)?.matrix.amax();
    if defect > cocycle_tol {
        return Err(Error::NotACocycle(defect));
    }
    let a = d1_matrix(space, module);
    let b = DVector::from_column_slice(theta.matrix.as_slice());
    if a.nrows() == 0 {
        return Ok(DVector::zeros(module.dim()));
    }
    let (values, vectors) = gram_eigen(&a);
    let r = nonzero(&values);
    let atb = a.transpose() * &b;
    let mut v = DVector::zeros(a.ncols());
    for i in 0..r {
        let e = vectors.column(i);
        v += e * (e.dot(&atb) / values[i]);
    }
    let residual = (&a * &v - &b).amax();
    if residual > solve_tol {
        return Err(Error::NoSolution(residual));
    }
    Ok(v)
}

/// Random `D`-linear cocycle `d_1 v + sum` of kernel elements of `d_2`,
/// built from coordinates in `coords` (cycled as needed).
pub fn cocycle_from_coordinates(space: &DisjointUnionSpace, module: &ModuleRep, coords: &[f64]) -> CochainMap {
    let (embed, basis) = cochain_coordinates(space, module);
    if embed.ncols() == 0 {
        return CochainMap {
            degree: 1,
            matrix: DMatrix::zeros(module.dim(), basis.len()),
        };
    }
    let d2m = d2_matrix(space, module) * &embed;
    let (values, vectors) = gram_eigen(&d2m);
    // eigenvectors of the zero eigenvalues span the cocycle coordinates
    let mut c = DVector::zeros(embed.ncols());
    for (k, i) in (nonzero(&values)..values.len()).enumerate() {
        c += vectors.column(i) * coords[k % coords.len().max(1)];
    }
    let flat = embed * c;
    CochainMap {
        degree: 1,
        matrix: DMatrix::from_column_slice(module.dim(), basis.len(), flat.as_slice()),
    }
}
