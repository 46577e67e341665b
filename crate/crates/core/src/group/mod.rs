//! Finite marked groups.
//!
//! A [`MarkedGroup`] is a finite group together with an ordered tuple of
//! generators (a multiset: repeats, involutions and the identity are all
//! allowed). Elements are numbered by breadth-first discovery from the
//! identity, trying letters in the order `s1, s1^-1, s2, s2^-1, ...`, so the
//! identity is always index 0 and two isomorphic marked groups get identical
//! tables.
//!
//! Distances use the right-invariant word metric `d(g, h) = |g h^-1|`, whose
//! Cayley edges are left multiplications `g -> s g`.

mod algebra;
pub mod catalog;
mod words;

use std::collections::{HashMap, VecDeque};
use std::hash::Hash;
use std::sync::Arc;

pub use algebra::GroupAlgElement;
pub use words::{Letter, Word};

use crate::error::{Error, Result};

/// Default maximum order for closure enumeration.
pub const DEFAULT_ORDER_CAP: usize = 200_000;

/// Groups up to this order keep a dense multiplication table.
pub const DENSE_TABLE_CAP: usize = 2048;

#[derive(Clone, Debug)]
pub struct MarkedGroup {
    label: String,
    k: usize,
    gens: Vec<usize>,
    inv: Vec<usize>,
    word_len: Vec<u32>,
    /// `act[g * 2k + l]` is the index of `letter(l) * g`.
    act: Vec<u32>,
    /// BFS tree: `g = letter(parent_letter[g]) * parent[g]`.
    parent: Vec<u32>,
    parent_letter: Vec<u8>,
    mul: Option<Vec<u32>>,
}

/// Result of a breadth-first closure: element representations in index order
/// plus the marked group built on them.
pub(crate) struct Closure<E> {
    pub elements: Vec<E>,
    pub group: MarkedGroup,
}

/// Enumerates the group generated by `gens` under `mul`, with identity at 0.
pub(crate) fn enumerate<E, M, I>(
    label: impl Into<String>,
    identity: E,
    gens: &[E],
    mul: M,
    inverse: I,
    cap: usize,
) -> Result<Closure<E>>
where
    E: Clone + Eq + Hash,
    M: Fn(&E, &E) -> E,
    I: Fn(&E) -> E,
{
    let k = gens.len();
    let letters: Vec<E> = gens
        .iter()
        .flat_map(|g| [g.clone(), inverse(g)])
        .collect();
    let mut index: HashMap<E, u32> = HashMap::new();
    let mut elements = vec![identity.clone()];
    index.insert(identity, 0);
    let mut act: Vec<u32> = Vec::new();
    let mut parent = vec![0u32];
    let mut parent_letter = vec![0u8];
    let mut word_len = vec![0u32];
    let mut cursor = 0;
    while cursor < elements.len() {
        let g = elements[cursor].clone();
        for (l, s) in letters.iter().enumerate() {
            let h = mul(s, &g);
            let idx = match index.get(&h) {
                Some(&i) => i,
                None => {
                    if elements.len() >= cap {
                        return Err(Error::ClosureExceedsCap { cap });
                    }
                    let i = elements.len() as u32;
                    index.insert(h.clone(), i);
                    elements.push(h);
                    parent.push(cursor as u32);
                    parent_letter.push(l as u8);
                    word_len.push(word_len[cursor] + 1);
                    i
                }
            };
            act.push(idx);
        }
        cursor += 1;
    }
    let inv = elements
        .iter()
        .map(|e| index[&inverse(e)] as usize)
        .collect();
    let gens = gens.iter().map(|g| index[g] as usize).collect();
    let mut group = MarkedGroup {
        label: label.into(),
        k,
        gens,
        inv,
        word_len,
        act,
        parent,
        parent_letter,
        mul: None,
    };
    group.build_dense_table();
    Ok(Closure { elements, group })
}

impl MarkedGroup {
    fn build_dense_table(&mut self) {
        let n = self.order();
        if n > DENSE_TABLE_CAP {
            return;
        }
        let mut table = vec![0u32; n * n];
        for h in 0..n {
            table[h] = h as u32;
        }
        for g in 1..n {
            let p = self.parent[g] as usize;
            let l = self.parent_letter[g] as usize;
            for h in 0..n {
                let ph = table[p * n + h] as usize;
                table[g * n + h] = self.act[ph * 2 * self.k + l];
            }
        }
        self.mul = Some(table);
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn order(&self) -> usize {
        self.word_len.len()
    }

    /// Number of marked generators.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn gens(&self) -> &[usize] {
        &self.gens
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn inverse_table(&self) -> &[usize] {
        &self.inv
    }

    pub fn word_len(&self, g: usize) -> u32 {
        self.word_len[g]
    }

    pub fn word_len_table(&self) -> &[u32] {
        &self.word_len
    }

    pub fn diameter(&self) -> u32 {
        self.word_len.iter().copied().max().unwrap_or(0)
    }

    /// `letter * g`.
    #[inline]
    pub fn act(&self, letter: Letter, g: usize) -> usize {
        self.act[g * 2 * self.k + letter.index()] as usize
    }

    /// `letter * g` with the letter given by its index `2j + inverse`.
    #[inline]
    pub fn act_index(&self, letter: usize, g: usize) -> usize {
        self.act[g * 2 * self.k + letter] as usize
    }

    /// Image of generator `j` (or its inverse).
    pub fn letter_element(&self, letter: Letter) -> usize {
        let s = self.gens[letter.gen];
        if letter.inverse {
            self.inv[s]
        } else {
            s
        }
    }

    /// Group product `g * h`.
    pub fn mul(&self, g: usize, h: usize) -> usize {
        if let Some(table) = &self.mul {
            return table[g * self.order() + h] as usize;
        }
        let mut letters = Vec::with_capacity(self.word_len[g] as usize);
        let mut x = g;
        while x != 0 {
            letters.push(self.parent_letter[x] as usize);
            x = self.parent[x] as usize;
        }
        // g = l_1 l_2 ... l_n with l_1 collected first
        let mut y = h;
        for &l in letters.iter().rev() {
            y = self.act_index(l, y);
        }
        y
    }

    /// Word-metric distance `|g h^-1|`.
    pub fn distance(&self, g: usize, h: usize) -> u32 {
        self.word_len[self.mul(g, self.inv[h])]
    }

    /// Elements of `B(1, radius)` in index order.
    pub fn ball(&self, radius: u32) -> Vec<usize> {
        (0..self.order())
            .filter(|&g| self.word_len[g] <= radius)
            .collect()
    }

    /// Evaluates a word `l_1 l_2 ... l_n` to the product of its letters.
    pub fn evaluate(&self, word: &Word) -> Result<usize> {
        let mut x = 0;
        for l in word.letters().iter().rev() {
            if l.gen >= self.k {
                return Err(Error::AlphabetMismatch {
                    letter: l.gen + 1,
                    k: self.k,
                });
            }
            x = self.act(*l, x);
        }
        Ok(x)
    }

    /// A shortest word for `g` read off the BFS tree.
    pub fn shortest_word(&self, g: usize) -> Word {
        let mut letters = Vec::new();
        let mut x = g;
        while x != 0 {
            letters.push(Letter::from_index(self.parent_letter[x] as usize));
            x = self.parent[x] as usize;
        }
        Word::new(letters)
    }

    /// Cyclic group `Z/m` marked by `1`.
    pub fn cyclic(m: u64) -> Self {
        let m = m.max(1);
        enumerate(
            format!("Z/{m}"),
            0u64,
            &[1 % m],
            |a, b| (a + b) % m,
            |a| (m - a) % m,
            usize::MAX,
        )
        .expect("cyclic closure has no cap")
        .group
    }

    /// Dihedral group of order `2n` marked by a rotation and a reflection.
    pub fn dihedral(n: u64) -> Result<Self> {
        let n = n.max(1);
        // (rotation, flipped): (a, f)(b, g) = (a + (-1)^f b, f xor g)
        let mul = move |x: &(u64, bool), y: &(u64, bool)| {
            let b = if x.1 { (n - y.0) % n } else { y.0 };
            ((x.0 + b) % n, x.1 ^ y.1)
        };
        let inverse = move |x: &(u64, bool)| {
            if x.1 {
                *x
            } else {
                ((n - x.0) % n, false)
            }
        };
        Ok(enumerate(
            format!("D{n}"),
            (0, false),
            &[(1 % n, false), (0, true)],
            mul,
            inverse,
            DEFAULT_ORDER_CAP,
        )?
        .group)
    }

    /// Subgroup of `Sym(d)` generated by permutations in 0-based one-line
    /// image notation (`perm[i]` is the image of `i`).
    pub fn from_permutations(perms: &[Vec<usize>]) -> Result<Self> {
        Self::from_permutations_capped(perms, DEFAULT_ORDER_CAP)
    }

    pub fn from_permutations_capped(perms: &[Vec<usize>], cap: usize) -> Result<Self> {
        if perms.is_empty() {
            return Err(Error::InvalidPermutation("empty generator list".into()));
        }
        let d = perms[0].len();
        for p in perms {
            if p.len() != d {
                return Err(Error::InvalidPermutation(format!(
                    "degree mismatch: {} vs {d}",
                    p.len()
                )));
            }
            let mut seen = vec![false; d];
            for &x in p {
                if x >= d || seen[x] {
                    return Err(Error::InvalidPermutation(format!("{p:?} is not a bijection")));
                }
                seen[x] = true;
            }
        }
        let gens: Vec<Vec<u32>> = perms
            .iter()
            .map(|p| p.iter().map(|&x| x as u32).collect())
            .collect();
        let identity: Vec<u32> = (0..d as u32).collect();
        // (a b)(i) = a(b(i)): apply b first
        let mul = |a: &Vec<u32>, b: &Vec<u32>| b.iter().map(|&i| a[i as usize]).collect();
        let inverse = |a: &Vec<u32>| {
            let mut out = vec![0u32; a.len()];
            for (i, &x) in a.iter().enumerate() {
                out[x as usize] = i as u32;
            }
            out
        };
        Ok(enumerate(format!("Perm{d}"), identity, &gens, mul, inverse, cap)?.group)
    }

    /// Symmetric group `S_n` marked by the transposition `(1 2)` and the `n`-cycle.
    pub fn symmetric(n: usize) -> Result<Self> {
        let n = n.max(1);
        let mut t: Vec<usize> = (0..n).collect();
        if n > 1 {
            t.swap(0, 1);
        }
        let c: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        Ok(Self::from_permutations(&[t, c])?.with_label(format!("S{n}")))
    }

    /// `SL(2, Z/p)` marked by the two elementary unipotent matrices.
    pub fn sl2(p: u64) -> Result<Self> {
        Self::sl2_capped(p, DEFAULT_ORDER_CAP)
    }

    pub fn sl2_capped(p: u64, cap: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let order = p.saturating_mul(p.saturating_mul(p).saturating_sub(1));
        if order > cap as u64 {
            return Err(Error::ClosureExceedsCap { cap });
        }
        let mul = move |a: &[u64; 4], b: &[u64; 4]| {
            [
                (a[0] * b[0] + a[1] * b[2]) % p,
                (a[0] * b[1] + a[1] * b[3]) % p,
                (a[2] * b[0] + a[3] * b[2]) % p,
                (a[2] * b[1] + a[3] * b[3]) % p,
            ]
        };
        let inverse = move |a: &[u64; 4]| [a[3], (p - a[1]) % p, (p - a[2]) % p, a[0]];
        Ok(enumerate(
            format!("SL(2,{p})"),
            [1, 0, 0, 1],
            &[[1, 1 % p, 0, 1], [1, 0, 1 % p, 1]],
            mul,
            inverse,
            cap,
        )?
        .group)
    }

    /// Direct product marked by `(s_j, 1)` followed by `(1, t_j)`.
    pub fn product(g: &MarkedGroup, h: &MarkedGroup) -> Result<Self> {
        Self::product_capped(g, h, DEFAULT_ORDER_CAP)
    }

    pub fn product_capped(g: &MarkedGroup, h: &MarkedGroup, cap: usize) -> Result<Self> {
        if g.order().saturating_mul(h.order()) > cap {
            return Err(Error::ClosureExceedsCap { cap });
        }
        let gens: Vec<(usize, usize)> = g
            .gens
            .iter()
            .map(|&s| (s, 0))
            .chain(h.gens.iter().map(|&t| (0, t)))
            .collect();
        Ok(enumerate(
            format!("{} x {}", g.label, h.label),
            (0usize, 0usize),
            &gens,
            |a, b| (g.mul(a.0, b.0), h.mul(a.1, b.1)),
            |a| (g.inv(a.0), h.inv(a.1)),
            cap,
        )?
        .group)
    }

    /// Normal closure of `normal_gens`, sorted by index.
    pub fn normal_closure(&self, normal_gens: &[usize]) -> Vec<usize> {
        let n = self.order();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let right = normal_gens.iter().map(|&r| self.mul(x, r));
            let conj = (0..2 * self.k).map(|l| {
                let s = self.letter_element(Letter::from_index(l));
                self.mul(self.mul(s, x), self.inv[s])
            });
            for y in right.chain(conj).collect::<Vec<_>>() {
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..n).filter(|&g| seen[g]).collect()
    }

    /// Quotient by the normal closure of `normal_gens`, marked by the images
    /// of this group's generators.
    pub fn quotient(self: &Arc<Self>, normal_gens: &[usize]) -> Result<(MarkedGroup, QuotientMap)> {
        let n = self.order();
        if let Some(&bad) = normal_gens.iter().find(|&&g| g >= n) {
            return Err(Error::Invalid(format!("element {bad} not in group of order {n}")));
        }
        let normal = self.normal_closure(normal_gens);
        let mut coset = vec![usize::MAX; n];
        for g in 0..n {
            if coset[g] == usize::MAX {
                for &m in &normal {
                    coset[self.mul(g, m)] = g;
                }
            }
        }
        let gens: Vec<usize> = self.gens.iter().map(|&s| coset[s]).collect();
        let closure = enumerate(
            format!("{}/N{}", self.label, normal.len()),
            0usize,
            &gens,
            |a, b| coset[self.mul(*a, *b)],
            |a| coset[self.inv[*a]],
            usize::MAX,
        )?;
        let position: HashMap<usize, usize> = closure
            .elements
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i))
            .collect();
        let table = (0..n).map(|g| position[&coset[g]]).collect();
        let target = Arc::new(closure.group);
        let map = QuotientMap {
            source: Arc::clone(self),
            target: Arc::clone(&target),
            table,
        };
        Ok(((*target).clone(), map))
    }

    /// Subgroup of the direct product generated by the diagonal tuples
    /// `(s_j^(1), ..., s_j^(M))`, together with the coordinate projections.
    pub fn diagonal_product(groups: &[Arc<MarkedGroup>]) -> Result<(Arc<MarkedGroup>, Vec<QuotientMap>)> {
        Self::diagonal_product_capped(groups, DEFAULT_ORDER_CAP)
    }

    pub fn diagonal_product_capped(
        groups: &[Arc<MarkedGroup>],
        cap: usize,
    ) -> Result<(Arc<MarkedGroup>, Vec<QuotientMap>)> {
        let first = groups
            .first()
            .ok_or_else(|| Error::Invalid("diagonal product of no groups".into()))?;
        let k = first.k;
        if let Some(g) = groups.iter().find(|g| g.k != k) {
            return Err(Error::KMismatch(k, g.k));
        }
        let gens: Vec<Vec<usize>> = (0..k)
            .map(|j| groups.iter().map(|g| g.gens[j]).collect())
            .collect();
        let label = groups
            .iter()
            .map(|g| g.label.as_str())
            .collect::<Vec<_>>()
            .join(" ^ ");
        let closure = enumerate(
            format!("diag({label})"),
            vec![0usize; groups.len()],
            &gens,
            |a, b| {
                groups
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(g, (&x, &y))| g.mul(x, y))
                    .collect()
            },
            |a| groups.iter().zip(a).map(|(g, &x)| g.inv(x)).collect(),
            cap,
        )?;
        let diag = Arc::new(closure.group);
        let projections = groups
            .iter()
            .enumerate()
            .map(|(i, g)| QuotientMap {
                source: Arc::clone(&diag),
                target: Arc::clone(g),
                table: closure.elements.iter().map(|e| e[i]).collect(),
            })
            .collect();
        Ok((diag, projections))
    }

    /// True iff every relator evaluates to the identity, i.e. the marked group
    /// is a quotient of the finitely presented group `<a_1..a_k | relators>`.
    pub fn satisfies_relators(&self, relators: &[Word]) -> Result<bool> {
        for r in relators {
            if self.evaluate(r)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Checks the group axioms on the stored tables. Exhaustive below
    /// `DENSE_TABLE_CAP`, otherwise on the generator action only.
    pub fn check_tables(&self) -> Result<()> {
        let n = self.order();
        let bad = |msg: String| Err(Error::Invalid(msg));
        if self.word_len[0] != 0 {
            return bad("identity must be element 0".into());
        }
        for g in 0..n {
            if self.mul(g, self.inv[g]) != 0 || self.mul(self.inv[g], g) != 0 {
                return bad(format!("inverse table wrong at {g}"));
            }
            for l in 0..2 * self.k {
                let s = self.letter_element(Letter::from_index(l));
                if self.mul(s, g) != self.act_index(l, g) {
                    return bad(format!("action table disagrees with product at {g}"));
                }
            }
        }
        if n <= 64 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                            return bad(format!("not associative at ({a},{b},{c})"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

impl PartialEq for MarkedGroup {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.gens == other.gens && self.act == other.act
    }
}

impl Eq for MarkedGroup {}

/// A marked surjection `source -> target` sending generator `j` to generator `j`.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    pub source: Arc<MarkedGroup>,
    pub target: Arc<MarkedGroup>,
    pub table: Vec<usize>,
}

impl QuotientMap {
    pub fn apply(&self, g: usize) -> usize {
        self.table[g]
    }

    /// Verifies the map is a surjective homomorphism respecting markings.
    ///
    /// Compatibility with left multiplication by every generator letter plus
    /// `q(1) = 1` implies `q(gh) = q(g) q(h)`.
    pub fn validate(&self) -> Result<()> {
        let (s, t) = (&self.source, &self.target);
        if s.k != t.k {
            return Err(Error::KMismatch(s.k, t.k));
        }
        if self.table.len() != s.order() || self.table.iter().any(|&x| x >= t.order()) {
            return Err(Error::Invalid("quotient table has wrong shape".into()));
        }
        if self.table[0] != 0 {
            return Err(Error::Invalid("identity not preserved".into()));
        }
        for g in 0..s.order() {
            for l in 0..2 * s.k {
                if self.table[s.act_index(l, g)] != t.act_index(l, self.table[g]) {
                    return Err(Error::Invalid(format!("not a homomorphism at {g}")));
                }
            }
        }
        let mut hit = vec![false; t.order()];
        for &x in &self.table {
            hit[x] = true;
        }
        if hit.iter().any(|&h| !h) {
            return Err(Error::Invalid("quotient map is not surjective".into()));
        }
        Ok(())
    }
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}
