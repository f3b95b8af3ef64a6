//! Preference relations over cost profiles, from the point of view of a
//! single player `j` (0-based).

use std::cmp::Ordering;

use crate::cost::{Cost, CostProfile, Rational};

/// The two families of deviation relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PreferenceKind {
    NashOf(usize),
    SecureOf(usize),
}

impl PreferenceKind {
    pub fn player(self) -> usize {
        match self {
            PreferenceKind::NashOf(j) | PreferenceKind::SecureOf(j) => j,
        }
    }

    /// `true` iff the player strictly prefers `y` to `x`.
    pub fn prefers(self, x: &CostProfile, y: &CostProfile) -> bool {
        match self {
            PreferenceKind::NashOf(j) => nash_prefers(j, x, y),
            PreferenceKind::SecureOf(j) => secure_prefers(j, x, y),
        }
    }
}

/// Player `j` strictly prefers `y` to `x` in the Nash sense: `x_j > y_j`.
pub fn nash_prefers(j: usize, x: &CostProfile, y: &CostProfile) -> bool {
    x[j] > y[j]
}

/// `x ≺_j y`: `y` is strictly cheaper for `j`, or equally cheap while
/// no other player is better off and somebody is worse off.
pub fn secure_prefers(j: usize, x: &CostProfile, y: &CostProfile) -> bool {
    match x[j].cmp(&y[j]) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => x.dominated_by(y) && x != y,
    }
}

/// `x ⪯_j y`.
pub fn secure_prefers_eq(j: usize, x: &CostProfile, y: &CostProfile) -> bool {
    x == y || secure_prefers(j, x, y)
}

/// `true` iff no element of `set` is strictly preferred to `x` by `kind`.
pub fn is_maximal<'a, I>(kind: PreferenceKind, x: &CostProfile, set: I) -> bool
where
    I: IntoIterator<Item = &'a CostProfile>,
{
    set.into_iter().all(|y| !kind.prefers(x, y))
}

/// Sort key of a total preorder extending the strict relation: whenever
/// `kind.prefers(x, y)` holds, `choice_key(y) < choice_key(x)`.
///
/// For the secure family the key orders by own cost, then by how many
/// other players never reach their goal (more is better), then by the sum
/// of the other players' finite costs (larger is better). Choosing a
/// key-minimal option therefore always picks a maximal element, and
/// maximality propagates up a tree because the key is total.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ChoiceKey {
    own: Cost,
    others_finite: usize,
    neg_sum: std::cmp::Reverse<Rational>,
}

pub fn choice_key(kind: PreferenceKind, x: &CostProfile) -> ChoiceKey {
    let j = kind.player();
    match kind {
        PreferenceKind::NashOf(_) => ChoiceKey {
            own: x[j],
            others_finite: 0,
            neg_sum: std::cmp::Reverse(Rational::from_integer(0)),
        },
        PreferenceKind::SecureOf(_) => {
            let mut finite = 0;
            let mut sum = Rational::from_integer(0);
            for (i, c) in x.iter().enumerate() {
                if i == j {
                    continue;
                }
                if let Cost::Finite(r) = c {
                    finite += 1;
                    sum += *r;
                }
            }
            ChoiceKey {
                own: x[j],
                others_finite: finite,
                neg_sum: std::cmp::Reverse(sum),
            }
        }
    }
}

/// Keeps only the elements of `set` that no other element beats; the
/// result can answer "is some element strictly preferred to x?" for any
/// `x`, since the relation is transitive.
pub fn maximal_elements(kind: PreferenceKind, set: &mut Vec<CostProfile>) {
    set.sort();
    set.dedup();
    let keep: Vec<bool> = set
        .iter()
        .map(|y| !set.iter().any(|z| kind.prefers(y, z)))
        .collect();
    let mut it = keep.into_iter();
    set.retain(|_| it.next().unwrap());
}
