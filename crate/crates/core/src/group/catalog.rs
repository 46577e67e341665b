//! JSON group catalog and named families.
//!
//! ```json
//! {"kind": "cyclic", "m": 6}
//! {"kind": "sl2", "p": 5}
//! {"kind": "permutation", "perms": [[2, 1, 3], [1, 3, 2]]}
//! {"kind": "product", "left": {...}, "right": {...}}
//! {"kind": "quotient", "group": {...}, "normal_gens": [3, "a1^2"]}
//! {"kind": "diagonal", "groups": [{...}, {...}]}
//! ```
//!
//! Permutations are one-line images on `{1..d}`. Quotient generators may be
//! element indices or relator words.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{MarkedGroup, Word};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupSpec {
    Cyclic {
        m: u64,
    },
    Dihedral {
        n: u64,
    },
    Symmetric {
        n: usize,
    },
    Sl2 {
        p: u64,
    },
    Permutation {
        perms: Vec<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Product {
        left: Box<GroupSpec>,
        right: Box<GroupSpec>,
    },
    Quotient {
        group: Box<GroupSpec>,
        normal_gens: Vec<ElementRef>,
    },
    Diagonal {
        groups: Vec<GroupSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementRef {
    Index(usize),
    Word(String),
}

impl GroupSpec {
    pub fn cyclic(m: u64) -> Self {
        GroupSpec::Cyclic { m }
    }

    pub fn product(left: GroupSpec, right: GroupSpec) -> Self {
        GroupSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn build(&self) -> Result<MarkedGroup> {
        match self {
            GroupSpec::Cyclic { m } => {
                if *m == 0 {
                    return Err(Error::Invalid("cyclic order must be positive".into()));
                }
                Ok(MarkedGroup::cyclic(*m))
            }
            GroupSpec::Dihedral { n } => MarkedGroup::dihedral(*n),
            GroupSpec::Symmetric { n } => MarkedGroup::symmetric(*n),
            GroupSpec::Sl2 { p } => MarkedGroup::sl2(*p),
            GroupSpec::Permutation { perms, label } => {
                let zero_based = perms
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|&x| {
                                x.checked_sub(1).ok_or_else(|| {
                                    Error::InvalidPermutation("points are numbered from 1".into())
                                })
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let g = MarkedGroup::from_permutations(&zero_based)?;
                Ok(match label {
                    Some(l) => g.with_label(l.clone()),
                    None => g,
                })
            }
            GroupSpec::Product { left, right } => MarkedGroup::product(&left.build()?, &right.build()?),
            GroupSpec::Quotient { group, normal_gens } => {
                let g = Arc::new(group.build()?);
                let gens = normal_gens
                    .iter()
                    .map(|r| match r {
                        ElementRef::Index(i) => Ok(*i),
                        ElementRef::Word(w) => g.evaluate(&Word::parse(w)?),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(g.quotient(&gens)?.0)
            }
            GroupSpec::Diagonal { groups } => {
                let gs = groups
                    .iter()
                    .map(|s| s.build().map(Arc::new))
                    .collect::<Result<Vec<_>>>()?;
                let (d, _) = MarkedGroup::diagonal_product(&gs)?;
                Ok(Arc::try_unwrap(d).unwrap_or_else(|a| (*a).clone()))
            }
        }
    }
}

/// One-parameter families addressable by name from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `(Z/m, {1})`
    Cyclic,
    /// Dihedral group of order `2n`.
    Dihedral,
    /// `S_n` marked by a transposition and an `n`-cycle.
    Symmetric,
    /// `SL(2, Z/p)`; the index must be prime.
    Sl2,
    /// `Z/m x Z/m` with two generators.
    CyclicSquare,
}

impl Family {
    pub fn parse(name: &str) -> Option<Family> {
        Some(match name {
            "cyclic" => Family::Cyclic,
            "dihedral" => Family::Dihedral,
            "symmetric" => Family::Symmetric,
            "sl2" => Family::Sl2,
            "cyclic-square" | "cyclic2" => Family::CyclicSquare,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Cyclic => "cyclic",
            Family::Dihedral => "dihedral",
            Family::Symmetric => "symmetric",
            Family::Sl2 => "sl2",
            Family::CyclicSquare => "cyclic-square",
        }
    }

    pub fn member(self, index: u64) -> GroupSpec {
        match self {
            Family::Cyclic => GroupSpec::Cyclic { m: index },
            Family::Dihedral => GroupSpec::Dihedral { n: index },
            Family::Symmetric => GroupSpec::Symmetric { n: index as usize },
            Family::Sl2 => GroupSpec::Sl2 { p: index },
            Family::CyclicSquare => GroupSpec::product(GroupSpec::cyclic(index), GroupSpec::cyclic(index)),
        }
    }
}

/// The fixed desk-scale catalog used by batch runs and the acceptance suite.
pub fn standard_catalog() -> Vec<GroupSpec> {
    let mut out: Vec<GroupSpec> = (1..=64).map(GroupSpec::cyclic).collect();
    out.extend((2..=16).map(|n| GroupSpec::Dihedral { n }));
    out.extend((3..=5).map(|n| GroupSpec::Symmetric { n }));
    out.extend([2, 3, 5, 7].map(|p| GroupSpec::Sl2 { p }));
    for (a, b) in [(2, 2), (2, 3), (2, 4), (3, 3), (2, 6), (4, 4), (3, 5)] {
        out.push(GroupSpec::product(GroupSpec::cyclic(a), GroupSpec::cyclic(b)));
    }
    out.push(GroupSpec::product(GroupSpec::cyclic(2), GroupSpec::Symmetric { n: 3 }));
    out
}
