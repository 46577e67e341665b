//! Finite-propagation kernels over disjoint unions of finite metric spaces.
//!
//! A [`Kernel`] is a sparse matrix `a = [a_{x,y}]` indexed by the points of a
//! [`DisjointUnionSpace`]. In a plain union blocks are infinitely far apart and
//! kernels are block diagonal; a coarse union places the blocks on a line so
//! cross-block entries have finite propagation.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupAlgElement, MarkedGroup};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub enum Block {
    /// Cayley graph of a marked group with the right-invariant word metric.
    Cayley(Arc<MarkedGroup>),
    /// Integer distance matrix in row-major order.
    Explicit { size: usize, dist: Vec<u32>, label: String },
}

impl Block {
    /// Validates the metric axioms.
    pub fn explicit(size: usize, dist: Vec<u32>, label: impl Into<String>) -> Result<Block> {
        if dist.len() != size * size {
            return Err(Error::Invalid("distance matrix has wrong shape".into()));
        }
        let d = |x: usize, y: usize| dist[x * size + y];
        for x in 0..size {
            if d(x, x) != 0 {
                return Err(Error::Invalid(format!("d({x},{x}) != 0")));
            }
            for y in 0..size {
                if d(x, y) != d(y, x) || (x != y && d(x, y) == 0) {
                    return Err(Error::Invalid(format!("distance not a metric at ({x},{y})")));
                }
                for z in 0..size {
                    if d(x, z) > d(x, y) + d(y, z) {
                        return Err(Error::Invalid(format!("triangle inequality fails at ({x},{y},{z})")));
                    }
                }
            }
        }
        Ok(Block::Explicit {
            size,
            dist,
            label: label.into(),
        })
    }

    /// Path metric on `size` points.
    pub fn path(size: usize) -> Block {
        let dist = (0..size * size)
            .map(|i| (i / size).abs_diff(i % size) as u32)
            .collect();
        Block::Explicit {
            size,
            dist,
            label: format!("P{size}"),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Block::Cayley(g) => g.order(),
            Block::Explicit { size, .. } => *size,
        }
    }

    pub fn distance(&self, x: usize, y: usize) -> u32 {
        match self {
            Block::Cayley(g) => g.distance(x, y),
            Block::Explicit { size, dist, .. } => dist[x * size + y],
        }
    }

    pub fn diameter(&self) -> u32 {
        match self {
            Block::Cayley(g) => g.diameter(),
            Block::Explicit { dist, .. } => dist.iter().copied().max().unwrap_or(0),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Block::Cayley(g) => g.label(),
            Block::Explicit { label, .. } => label,
        }
    }

    /// Distance from the base point (index 0).
    fn depth(&self, x: usize) -> u32 {
        match self {
            Block::Cayley(g) => g.word_len(x),
            Block::Explicit { .. } => self.distance(0, x),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DisjointUnionSpace {
    blocks: Vec<Block>,
    offsets: Vec<usize>,
    /// Base-point positions on a line for a coarse union.
    positions: Option<Vec<u64>>,
}

impl DisjointUnionSpace {
    /// Plain disjoint union: cross-block distance is infinite.
    pub fn plain(blocks: Vec<Block>) -> Self {
        let mut offsets = vec![0];
        for b in &blocks {
            offsets.push(offsets.last().unwrap() + b.size());
        }
        Self {
            blocks,
            offsets,
            positions: None,
        }
    }

    pub fn cayley(g: &Arc<MarkedGroup>) -> Self {
        Self::plain(vec![Block::Cayley(Arc::clone(g))])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_coarse(&self) -> bool {
        self.positions.is_some()
    }

    pub fn positions(&self) -> Option<&[u64]> {
        self.positions.as_deref()
    }

    pub fn offset(&self, block: usize) -> usize {
        self.offsets[block]
    }

    /// `(block, local index)` of a global point.
    pub fn locate(&self, x: usize) -> (usize, usize) {
        let b = self.offsets.partition_point(|&o| o <= x) - 1;
        (b, x - self.offsets[b])
    }

    pub fn global(&self, block: usize, local: usize) -> usize {
        self.offsets[block] + local
    }

    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.locate(x).0 == self.locate(y).0
    }

    /// `None` stands for infinite distance.
    pub fn distance(&self, x: usize, y: usize) -> Option<u64> {
        let (bx, lx) = self.locate(x);
        let (by, ly) = self.locate(y);
        if bx == by {
            return Some(self.blocks[bx].distance(lx, ly) as u64);
        }
        let pos = self.positions.as_ref()?;
        Some(
            self.blocks[bx].depth(lx) as u64
                + pos[bx].abs_diff(pos[by])
                + self.blocks[by].depth(ly) as u64,
        )
    }

    pub fn ball_size(&self, x: usize, radius: u64) -> usize {
        (0..self.len())
            .filter(|&y| matches!(self.distance(x, y), Some(d) if d <= radius))
            .count()
    }

    /// `max_x |B(x, r)|`.
    pub fn max_ball_size(&self, radius: u64) -> usize {
        if !self.is_coarse() {
            // every point of a Cayley block sees the same ball
            return self
                .blocks
                .iter()
                .enumerate()
                .map(|(b, block)| match block {
                    Block::Cayley(g) => g.ball(radius.min(u32::MAX as u64) as u32).len(),
                    Block::Explicit { size, .. } => (0..*size)
                        .map(|l| self.ball_size(self.global(b, l), radius))
                        .max()
                        .unwrap_or(0),
                })
                .max()
                .unwrap_or(0);
        }
        (0..self.len()).map(|x| self.ball_size(x, radius)).max().unwrap_or(0)
    }

    /// Identifier used by the kernel interchange format.
    pub fn id(&self) -> String {
        let labels = self
            .blocks
            .iter()
            .map(|b| format!("{}#{}", b.label(), b.size()))
            .collect::<Vec<_>>()
            .join("|");
        if self.is_coarse() {
            format!("coarse:{labels}")
        } else {
            labels
        }
    }
}

/// Places blocks on a line; the gap between block `m` and `m + 1` is
/// `max(m, diam(block m)) + 1`. Points in different blocks are at distance
/// `depth(x) + |p_i - p_j| + depth(y)`, with depths measured from each
/// block's base point.
pub fn coarse_union_assemble(blocks: Vec<Block>) -> DisjointUnionSpace {
    let mut positions = Vec::with_capacity(blocks.len());
    let mut p = 0u64;
    for (m, b) in blocks.iter().enumerate() {
        positions.push(p);
        p += (m as u64).max(b.diameter() as u64) + 1;
    }
    let mut space = DisjointUnionSpace::plain(blocks);
    space.positions = Some(positions);
    space
}

/// A function on the points of a space, acting as a diagonal kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalFunction<T: Scalar> {
    pub values: Vec<T>,
}

impl<T: Scalar> DiagonalFunction<T> {
    pub fn indicator(n: usize, points: impl IntoIterator<Item = usize>) -> Self {
        let mut values = vec![T::zero(); n];
        for x in points {
            values[x] = T::one();
        }
        Self { values }
    }

    pub fn as_kernel(&self, space: &Arc<DisjointUnionSpace>) -> Kernel<T> {
        Kernel::from_entries_unchecked(
            space,
            self.values.iter().enumerate().map(|(x, &v)| (x, x, v)),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Kernel<T: Scalar> {
    space: Arc<DisjointUnionSpace>,
    rows: Vec<BTreeMap<usize, T>>,
    prop: OnceLock<u64>,
}

impl<T: Scalar> PartialEq for Kernel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
    }
}

impl<T: Scalar> Kernel<T> {
    pub fn zeros(space: &Arc<DisjointUnionSpace>) -> Self {
        Self {
            space: Arc::clone(space),
            rows: vec![BTreeMap::new(); space.len()],
            prop: OnceLock::new(),
        }
    }

    pub fn identity(space: &Arc<DisjointUnionSpace>) -> Self {
        Self::from_entries_unchecked(space, (0..space.len()).map(|x| (x, x, T::one())))
    }

    /// Builds a kernel, rejecting entries between blocks of a plain union.
    pub fn from_entries(
        space: &Arc<DisjointUnionSpace>,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Result<Self> {
        let mut k = Self::zeros(space);
        for (x, y, v) in entries {
            if x >= space.len() || y >= space.len() {
                return Err(Error::Invalid(format!("entry ({x},{y}) outside the space")));
            }
            if !space.is_coarse() && !space.same_block(x, y) {
                return Err(Error::NotWithinBlocks(x, y));
            }
            k.add_at(x, y, v);
        }
        Ok(k)
    }

    pub(crate) fn from_entries_unchecked(
        space: &Arc<DisjointUnionSpace>,
        entries: impl IntoIterator<Item = (usize, usize, T)>,
    ) -> Self {
        let mut k = Self::zeros(space);
        for (x, y, v) in entries {
            k.add_at(x, y, v);
        }
        k
    }

    fn add_at(&mut self, x: usize, y: usize, v: T) {
        let row = &mut self.rows[x];
        let new = row.get(&y).copied().unwrap_or_else(T::zero) + v;
        if new == T::zero() {
            row.remove(&y);
        } else {
            row.insert(y, new);
        }
    }

    pub fn space(&self) -> &Arc<DisjointUnionSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, x: usize, y: usize) -> T {
        self.rows[x].get(&y).copied().unwrap_or_else(T::zero)
    }

    pub fn row(&self, x: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.rows[x].iter().map(|(&y, &v)| (y, v))
    }

    /// Nonzero entries in lexicographic `(x, y)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(x, r)| r.iter().map(move |(&y, &v)| (x, y, v)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    /// Largest distance between indices of a nonzero entry (cached).
    pub fn propagation(&self) -> u64 {
        *self.prop.get_or_init(|| {
            self.entries()
                .map(|(x, y, _)| self.space.distance(x, y).expect("kernel entries are within blocks"))
                .max()
                .unwrap_or(0)
        })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(&self.space);
        for (x, row) in self.rows.iter().enumerate() {
            for (&y, &a) in row {
                for (&z, &b) in &other.rows[y] {
                    out.add_at(x, z, a * b);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.prop = OnceLock::new();
        for (x, y, v) in other.entries() {
            out.add_at(x, y, v);
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_entries_unchecked(&self.space, self.entries().map(|(x, y, v)| (x, y, v * s)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(T::zero() - T::one()))
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_entries_unchecked(&self.space, self.entries().map(|(x, y, v)| (y, x, v.conj())))
    }

    /// Left multiplication by a diagonal function.
    pub fn diag_mul(&self, f: &DiagonalFunction<T>) -> Self {
        Self::from_entries_unchecked(&self.space, self.entries().map(|(x, y, v)| (x, y, f.values[x] * v)))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().map(|(_, _, v)| v.modulus()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_abs()
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(x, y, _)| x == y)
    }

    /// Real parts as a dense matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (x, y, v) in self.entries() {
            m[(x, y)] = v.re();
        }
        m
    }

    pub fn from_dense(space: &Arc<DisjointUnionSpace>, m: &DMatrix<f64>) -> Result<Self> {
        let n = space.len();
        Self::from_entries(
            space,
            (0..n)
                .flat_map(|x| (0..n).map(move |y| (x, y)))
                .filter(|&(x, y)| m[(x, y)] != 0.0)
                .map(|(x, y)| (x, y, T::from_f64(m[(x, y)]))),
        )
    }

    /// Sparse product with a vector of reals (real parts of the entries).
    pub fn apply_real(&self, v: &[f64], out: &mut [f64]) {
        for (x, row) in self.rows.iter().enumerate() {
            out[x] = row.iter().map(|(&y, a)| a.re() * v[y]).sum();
        }
    }
}

/// Row sums: `omega(a)(x) = sum_y a_{x,y}`.
pub fn augmentation<T: Scalar>(a: &Kernel<T>) -> DiagonalFunction<T> {
    DiagonalFunction {
        values: a
            .rows
            .iter()
            .map(|r| r.values().fold(T::zero(), |s, &v| s + v))
            .collect(),
    }
}

/// A bijection between subsets of a space; as a kernel `t_{phi(y), y} = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialTranslation {
    n: usize,
    map: BTreeMap<usize, usize>,
}

impl PartialTranslation {
    pub fn new(n: usize, map: BTreeMap<usize, usize>) -> Result<Self> {
        let mut hit = vec![false; n];
        for (&y, &x) in &map {
            if y >= n || x >= n || hit[x] {
                return Err(Error::Invalid("partial translation is not injective".into()));
            }
            hit[x] = true;
        }
        Ok(Self { n, map })
    }

    pub fn domain(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.keys().copied()
    }

    pub fn range(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.values().copied()
    }

    pub fn apply(&self, y: usize) -> Option<usize> {
        self.map.get(&y).copied()
    }

    pub fn map(&self) -> &BTreeMap<usize, usize> {
        &self.map
    }

    pub fn as_kernel<T: Scalar>(&self, space: &Arc<DisjointUnionSpace>) -> Kernel<T> {
        Kernel::from_entries_unchecked(space, self.map.iter().map(|(&y, &x)| (x, y, T::one())))
    }

    /// `max d(x, phi^-1(x))` over the range.
    pub fn propagation(&self, space: &DisjointUnionSpace) -> Option<u64> {
        self.map
            .iter()
            .map(|(&y, &x)| space.distance(x, y))
            .try_fold(0, |m, d| d.map(|d| m.max(d)))
    }
}

/// An everywhere-defined bijection of the space; `perm[y]` is the image of `y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullTranslation {
    pub perm: Vec<usize>,
}

impl FullTranslation {
    pub fn as_kernel<T: Scalar>(&self, space: &Arc<DisjointUnionSpace>) -> Kernel<T> {
        Kernel::from_entries_unchecked(space, self.perm.iter().enumerate().map(|(y, &x)| (x, y, T::one())))
    }

    pub fn propagation(&self, space: &DisjointUnionSpace) -> Option<u64> {
        self.perm
            .iter()
            .enumerate()
            .map(|(y, &x)| space.distance(x, y))
            .try_fold(0, |m, d| d.map(|d| m.max(d)))
    }
}

/// Proper edge colouring of a bipartite multigraph-free edge list with
/// `max degree` colours (alternating-path recolouring). Edges are `(row, col)`.
fn bipartite_edge_coloring(n: usize, edges: &[(usize, usize)]) -> (usize, Vec<usize>) {
    let mut deg_r = vec![0usize; n];
    let mut deg_c = vec![0usize; n];
    for &(x, y) in edges {
        deg_r[x] += 1;
        deg_c[y] += 1;
    }
    let colors = deg_r.iter().chain(&deg_c).copied().max().unwrap_or(0);
    const NONE: usize = usize::MAX;
    // at_row[x * colors + c] = column matched to x with colour c
    let mut at_row = vec![NONE; n * colors];
    let mut at_col = vec![NONE; n * colors];
    let free = |table: &[usize], v: usize| (0..colors).find(|&c| table[v * colors + c] == NONE).unwrap();
    for &(x, y) in edges {
        let alpha = free(&at_row, x);
        let beta = free(&at_col, y);
        if at_col[y * colors + alpha] != NONE {
            // flip the alpha/beta path leaving y along alpha
            let mut path = Vec::new();
            let mut col = y;
            loop {
                let row = at_col[col * colors + alpha];
                if row == NONE {
                    break;
                }
                path.push((row, col, alpha));
                let next = at_row[row * colors + beta];
                if next == NONE {
                    break;
                }
                path.push((row, next, beta));
                col = next;
            }
            for &(r, c, k) in &path {
                at_row[r * colors + k] = NONE;
                at_col[c * colors + k] = NONE;
            }
            for &(r, c, k) in &path {
                let k2 = if k == alpha { beta } else { alpha };
                at_row[r * colors + k2] = c;
                at_col[c * colors + k2] = r;
            }
        }
        at_row[x * colors + alpha] = y;
        at_col[y * colors + alpha] = x;
    }
    let mut out = Vec::with_capacity(edges.len());
    for &(x, y) in edges {
        let c = (0..colors).find(|&c| at_row[x * colors + c] == y).unwrap();
        out.push(c);
    }
    (colors, out)
}

/// Writes `a = sum_i f_i t_i` with partial translations `t_i` and diagonal
/// coefficients `f_i`.
///
/// The support is split into matchings by a proper edge colouring of the
/// bipartite support graph, processed in lexicographic `(x, y)` order, so the
/// number of summands is the maximal row/column support size, which is at
/// most `max_x |B(x, prop(a))|`.
pub fn translation_decomposition<T: Scalar>(a: &Kernel<T>) -> Vec<(DiagonalFunction<T>, PartialTranslation)> {
    let n = a.dim();
    let edges: Vec<(usize, usize)> = a.entries().map(|(x, y, _)| (x, y)).collect();
    let (colors, coloring) = bipartite_edge_coloring(n, &edges);
    let mut maps = vec![BTreeMap::new(); colors];
    let mut coeffs = vec![vec![T::zero(); n]; colors];
    for (&(x, y), &c) in edges.iter().zip(&coloring) {
        maps[c].insert(y, x);
        coeffs[c][x] = a.get(x, y);
    }
    maps.into_iter()
        .zip(coeffs)
        .filter(|(m, _)| !m.is_empty())
        .map(|(map, values)| {
            (
                DiagonalFunction { values },
                PartialTranslation { n, map },
            )
        })
        .collect()
}

/// `sum_i f_i t_i`.
pub fn reassemble<T: Scalar>(
    space: &Arc<DisjointUnionSpace>,
    parts: &[(DiagonalFunction<T>, PartialTranslation)],
) -> Kernel<T> {
    parts.iter().fold(Kernel::zeros(space), |acc, (f, t)| {
        acc.add(&t.as_kernel(space).diag_mul(f))
    })
}

/// `sum_i f_i u_i` for full translations.
pub fn reassemble_full<T: Scalar>(
    space: &Arc<DisjointUnionSpace>,
    parts: &[(DiagonalFunction<T>, FullTranslation)],
) -> Kernel<T> {
    parts.iter().fold(Kernel::zeros(space), |acc, (f, u)| {
        acc.add(&u.as_kernel(space).diag_mul(f))
    })
}

/// Writes a partial translation as at most three diagonally cut full
/// translations.
///
/// `A_0` collects the complete cycles of `t` inside its domain (fixed points
/// included); `t` restricted there, extended by the identity, is already a
/// full translation. The remaining domain splits into chains
/// `y -> t(y) -> ...` that leave the domain; alternating positions give
/// `A_1` (maximal with `t(A_1) ∩ A_1 = ∅`) and `A_2`. For `i = 1, 2` the
/// involution `t|A_i ⊔ t^-1|t(A_i)`, extended by the identity, is cut to
/// `t(A_i)` on the left.
pub fn extend_to_full<T: Scalar>(
    t: &PartialTranslation,
    space: &DisjointUnionSpace,
) -> Result<Vec<(DiagonalFunction<T>, FullTranslation)>> {
    let n = t.n;
    if !space.is_coarse() {
        if let Some((&y, &x)) = t.map.iter().find(|(&y, &x)| !space.same_block(x, y)) {
            return Err(Error::NotWithinBlocks(x, y));
        }
    }
    let inverse: BTreeMap<usize, usize> = t.map.iter().map(|(&y, &x)| (x, y)).collect();
    // 0 = cycle part, 1/2 = chain parity classes
    let mut part: BTreeMap<usize, u8> = BTreeMap::new();
    for &y in t.map.keys() {
        if part.contains_key(&y) {
            continue;
        }
        let mut cur = y;
        let mut cycle = false;
        while let Some(next) = t.apply(cur) {
            if next == y {
                cycle = true;
                break;
            }
            cur = next;
        }
        if cycle {
            let mut cur = y;
            loop {
                part.insert(cur, 0);
                cur = t.map[&cur];
                if cur == y {
                    break;
                }
            }
        }
    }
    for &y in t.map.keys() {
        // chain heads have no preimage inside the domain
        if part.contains_key(&y) || inverse.get(&y).is_some_and(|p| t.map.contains_key(p)) {
            continue;
        }
        let mut cur = y;
        let mut parity = 1u8;
        loop {
            part.insert(cur, parity);
            match t.apply(cur) {
                Some(next) if t.map.contains_key(&next) => {
                    cur = next;
                    parity = 3 - parity;
                }
                _ => break,
            }
        }
    }
    let mut out = Vec::new();
    for class in 0..3u8 {
        let members: Vec<usize> = part
            .iter()
            .filter(|(_, &p)| p == class)
            .map(|(&y, _)| y)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for &y in &members {
            let x = t.map[&y];
            perm[y] = x;
            if class != 0 {
                perm[x] = y;
            }
        }
        let cut = DiagonalFunction::indicator(n, members.iter().map(|y| t.map[y]));
        out.push((cut, FullTranslation { perm }));
    }
    Ok(out)
}

/// Conditional expectation onto block-diagonal kernels.
pub fn block_expectation<T: Scalar>(a: &Kernel<T>) -> Kernel<T> {
    let space = a.space();
    Kernel::from_entries_unchecked(space, a.entries().filter(|&(x, y, _)| space.same_block(x, y)))
}

/// `xi -> [xi(g h^-1)]_{g,h}` on the Cayley space of `xi`'s group.
pub fn group_algebra_embed<T: Scalar>(xi: &GroupAlgElement<T>) -> Kernel<T> {
    let g = xi.group();
    let space = Arc::new(DisjointUnionSpace::cayley(g));
    group_algebra_embed_into(xi, &space, 0)
}

/// Embeds `xi` into block `block` of `space`, which must be `xi`'s Cayley space.
pub fn group_algebra_embed_into<T: Scalar>(
    xi: &GroupAlgElement<T>,
    space: &Arc<DisjointUnionSpace>,
    block: usize,
) -> Kernel<T> {
    let g = xi.group();
    let mut entries = Vec::new();
    for x in 0..g.order() {
        for (c, v) in xi.iter() {
            // g h^-1 = c  <=>  h = c^-1 g
            let y = g.mul(g.inv(c), x);
            entries.push((space.global(block, x), space.global(block, y), v));
        }
    }
    Kernel::from_entries_unchecked(space, entries)
}

/// Kernel interchange record: block-local triplets `[block, x, y, re, im]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelJson {
    pub space_id: String,
    pub triplets: Vec<(usize, usize, usize, f64, f64)>,
}

impl<T: Scalar> Kernel<T> {
    /// Fails on cross-block entries, which have no block-local form.
    pub fn to_json(&self) -> Result<KernelJson> {
        let triplets = self
            .entries()
            .map(|(x, y, v)| {
                let (bx, lx) = self.space.locate(x);
                let (by, ly) = self.space.locate(y);
                if bx != by {
                    return Err(Error::NotWithinBlocks(x, y));
                }
                Ok((bx, lx, ly, v.re(), v.im()))
            })
            .collect::<Result<_>>()?;
        Ok(KernelJson {
            space_id: self.space.id(),
            triplets,
        })
    }
}

impl Kernel<f64> {
    pub fn from_json(space: &Arc<DisjointUnionSpace>, data: &KernelJson) -> Result<Self> {
        if data.space_id != space.id() {
            return Err(Error::Invalid(format!(
                "kernel is for space {:?}, not {:?}",
                data.space_id,
                space.id()
            )));
        }
        Self::from_entries(
            space,
            data.triplets
                .iter()
                .map(|&(b, x, y, re, _)| (space.global(b, x), space.global(b, y), re)),
        )
    }
}

impl Kernel<num_complex::Complex64> {
    pub fn from_json_complex(space: &Arc<DisjointUnionSpace>, data: &KernelJson) -> Result<Self> {
        if data.space_id != space.id() {
            return Err(Error::Invalid("space mismatch".into()));
        }
        Self::from_entries(
            space,
            data.triplets
                .iter()
                .map(|&(b, x, y, re, im)| (space.global(b, x), space.global(b, y), num_complex::Complex64::new(re, im))),
        )
    }
}
