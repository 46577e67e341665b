//! Cayley-topology neighbourhoods of finite marked groups.
//!
//! Two `k`-marked groups are close when large balls of their Cayley graphs
//! agree. Balls are compared through a canonical [`BallSignature`], and the
//! neighbourhood `N(G, R)` is decided by building the word-forced partial
//! isomorphism `B(1_H, 2R) -> B(1_G, 2R)` and checking it explicitly.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::group::{Letter, MarkedGroup, Word};

/// Canonical rooted, generator-labelled transition table of `B(1_G, R)`.
///
/// Vertices are numbered by BFS from the root trying letters in the order
/// `a1, A1, a2, A2, ...`; `trans[v * 2k + l]` is the vertex reached by left
/// multiplication with letter `l`, or `None` when it leaves the ball.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BallSignature {
    pub radius: u32,
    pub k: usize,
    pub size: usize,
    pub trans: Vec<Option<u32>>,
}

impl BallSignature {
    pub fn transition(&self, vertex: usize, letter: Letter) -> Option<usize> {
        self.trans[vertex * 2 * self.k + letter.index()].map(|v| v as usize)
    }

    pub fn exterior_count(&self) -> usize {
        self.trans.iter().filter(|t| t.is_none()).count()
    }

    /// Short stable digest of the table.
    pub fn hash_hex(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("signature serializes");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn ball_signature(g: &MarkedGroup, radius: u32) -> BallSignature {
    let k = g.k();
    let mut local: HashMap<usize, u32> = HashMap::from([(0, 0)]);
    let mut order = vec![0usize];
    let mut trans = Vec::new();
    let mut cursor = 0;
    while cursor < order.len() {
        let x = order[cursor];
        for l in 0..2 * k {
            let y = g.act_index(l, x);
            if g.word_len(y) > radius {
                trans.push(None);
                continue;
            }
            let next = order.len() as u32;
            let idx = *local.entry(y).or_insert_with(|| {
                order.push(y);
                next
            });
            trans.push(Some(idx));
        }
        cursor += 1;
    }
    BallSignature {
        radius,
        k,
        size: order.len(),
        trans,
    }
}

/// A partial isomorphism `phi: B(1_H, 2R) -> B(1_G, 2R)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialIso {
    pub radius: u32,
    /// Element of `H` to element of `G`, over the whole `2R`-ball of `H`.
    pub map: BTreeMap<usize, usize>,
}

impl PartialIso {
    pub fn apply(&self, h: usize) -> Option<usize> {
        self.map.get(&h).copied()
    }

    pub fn identity(g: &MarkedGroup, radius: u32) -> Self {
        PartialIso {
            radius,
            map: g.ball(2 * radius).into_iter().map(|x| (x, x)).collect(),
        }
    }
}

fn check_k(h: &MarkedGroup, g: &MarkedGroup) -> Result<()> {
    if h.k() != g.k() {
        return Err(Error::KMismatch(h.k(), g.k()));
    }
    Ok(())
}

/// The word-forced map `eval_H(w) -> eval_G(w)` over words of length at most
/// `2R`, if it is a well-defined bijection satisfying the three partial
/// isomorphism conditions.
pub fn partial_isomorphism(h: &MarkedGroup, g: &MarkedGroup, radius: u32) -> Result<Option<PartialIso>> {
    check_k(h, g)?;
    let k = h.k();
    let depth = 2 * radius;
    let mut forward: BTreeMap<usize, usize> = BTreeMap::from([(0, 0)]);
    let mut backward: HashMap<usize, usize> = HashMap::from([(0, 0)]);
    let mut seen: HashSet<(usize, usize)> = HashSet::from([(0, 0)]);
    let mut frontier = vec![(0usize, 0usize)];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &(x, y) in &frontier {
            for l in 0..2 * k {
                let pair = (h.act_index(l, x), g.act_index(l, y));
                if !seen.insert(pair) {
                    continue;
                }
                if *forward.entry(pair.0).or_insert(pair.1) != pair.1
                    || *backward.entry(pair.1).or_insert(pair.0) != pair.0
                {
                    return Ok(None);
                }
                next.push(pair);
            }
        }
        frontier = next;
    }
    let phi = |x: usize| forward[&x];
    // generators (only meaningful when they lie in the ball)
    for j in 0..k {
        let s = h.letter_element(Letter::new(j, false));
        if let Some(&t) = forward.get(&s) {
            if t != g.letter_element(Letter::new(j, false)) {
                return Ok(None);
            }
        }
    }
    for (&x, &y) in &forward {
        if forward.get(&h.inv(x)) != Some(&g.inv(y)) {
            return Ok(None);
        }
    }
    let inner: Vec<usize> = h.ball(radius);
    for &a in &inner {
        for &b in &inner {
            if phi(h.mul(a, b)) != g.mul(phi(a), phi(b)) {
                return Ok(None);
            }
        }
    }
    Ok(Some(PartialIso { radius, map: forward }))
}

/// `H` lies in the neighbourhood `N(G, R)`.
pub fn in_neighborhood(h: &MarkedGroup, g: &MarkedGroup, radius: u32) -> Result<bool> {
    Ok(partial_isomorphism(h, g, radius)?.is_some())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoRadius {
    pub radius: u32,
    /// The search bound was reached without a failure.
    pub saturated: bool,
}

/// Largest `R <= r_max` with `G` and `H` in each other's `R`-neighbourhoods.
pub fn partial_iso_radius(g: &MarkedGroup, h: &MarkedGroup, r_max: u32) -> Result<IsoRadius> {
    check_k(g, h)?;
    let mut radius = 0;
    for r in 1..=r_max {
        if in_neighborhood(h, g, r)? && in_neighborhood(g, h, r)? {
            radius = r;
        } else {
            return Ok(IsoRadius {
                radius,
                saturated: false,
            });
        }
    }
    Ok(IsoRadius {
        radius,
        saturated: true,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub radius: u32,
    pub stabilized: bool,
    pub at_index: Option<usize>,
    pub signature_hash: Option<String>,
    #[serde(skip)]
    pub signature: Option<BallSignature>,
}

/// Smallest index from which all radius-`R` ball signatures coincide.
///
/// A tail of length one does not count as stabilization.
pub fn detect_convergence(groups: &[MarkedGroup], radius: u32) -> StabilizationReport {
    let sigs: Vec<BallSignature> = groups.iter().map(|g| ball_signature(g, radius)).collect();
    let not = StabilizationReport {
        radius,
        stabilized: false,
        at_index: None,
        signature_hash: None,
        signature: None,
    };
    let Some(last) = sigs.last() else {
        return not;
    };
    let mut start = sigs.len() - 1;
    while start > 0 && sigs[start - 1] == *last {
        start -= 1;
    }
    if start + 1 >= sigs.len() {
        return not;
    }
    StabilizationReport {
        radius,
        stabilized: true,
        at_index: Some(start),
        signature_hash: Some(last.hash_hex()),
        signature: Some(last.clone()),
    }
}

/// The stabilized radius-`R` ball: a finite-radius picture of the Cayley limit.
pub fn limit_ball(groups: &[MarkedGroup], radius: u32) -> Result<BallSignature> {
    detect_convergence(groups, radius)
        .signature
        .ok_or(Error::NotStabilized(radius as usize))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexPartition {
    /// `(relator-set id, sorted indices)` for every set that matched something.
    pub classes: Vec<(usize, Vec<usize>)>,
    pub residual: Vec<usize>,
}

/// Assigns each group to the first relator set it satisfies.
pub fn partition_by_quotient(relator_sets: &[Vec<Word>], groups: &[MarkedGroup]) -> Result<IndexPartition> {
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut residual = Vec::new();
    for (m, g) in groups.iter().enumerate() {
        let mut hit = None;
        for (i, set) in relator_sets.iter().enumerate() {
            if g.satisfies_relators(set)? {
                hit = Some(i);
                break;
            }
        }
        match hit {
            Some(i) => classes.entry(i).or_default().push(m),
            None => residual.push(m),
        }
    }
    Ok(IndexPartition {
        classes: classes.into_iter().collect(),
        residual,
    })
}
