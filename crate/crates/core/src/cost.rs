use std::fmt;
use std::ops::Index;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;

/// Exact nonnegative rational used for weights and weighted costs.
pub type Rational = Ratio<u64>;

/// A single player's cost: the (possibly weighted) time of the first goal
/// visit, or `Infinite` when the goal set is never reached.
///
/// The derived ordering places `Infinite` above every finite value, and two
/// infinite costs compare equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(Ratio::new_raw(0, 1));

    pub fn from_steps(steps: usize) -> Cost {
        Cost::Finite(Rational::from_integer(steps as u64))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cost::Infinite)
    }

    pub fn finite(&self) -> Option<Rational> {
        match self {
            Cost::Finite(r) => Some(*r),
            Cost::Infinite => None,
        }
    }

    /// The cost as a step count, if it is finite and integral.
    pub fn steps(&self) -> Option<usize> {
        match self {
            Cost::Finite(r) if r.is_integer() => Some(r.to_integer() as usize),
            _ => None,
        }
    }

    /// `true` iff the cost is finite and strictly below `bound` steps.
    pub fn below(&self, bound: usize) -> bool {
        match self {
            Cost::Finite(r) => *r < Rational::from_integer(bound as u64),
            Cost::Infinite => false,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(r) if r.is_integer() => write!(f, "{}", r.to_integer()),
            Cost::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid cost `{0}`")]
pub struct ParseCostError(pub String);

impl FromStr for Cost {
    type Err = ParseCostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "inf" | "+inf" | "infinity" | "+infinity" | "∞" | "+∞" => Ok(Cost::Infinite),
            _ => parse_rational(s)
                .map(Cost::Finite)
                .ok_or_else(|| ParseCostError(s.to_string())),
        }
    }
}

/// Parses `p` or `p/q` into an exact nonnegative rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: u64 = p.trim().parse().ok()?;
            let q: u64 = q.trim().parse().ok()?;
            (q != 0).then(|| Rational::new(p, q))
        }
        None => s.parse::<u64>().ok().map(Rational::from_integer),
    }
}

/// One cost per player, indexed by the (0-based) player number.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostProfile(Vec<Cost>);

impl CostProfile {
    pub fn new(costs: Vec<Cost>) -> Self {
        CostProfile(costs)
    }

    pub fn infinite(players: usize) -> Self {
        CostProfile(vec![Cost::Infinite; players])
    }

    /// Builds a unit-cost profile from optional step counts (`None` = never).
    pub fn from_steps<I: IntoIterator<Item = Option<usize>>>(steps: I) -> Self {
        CostProfile(
            steps
                .into_iter()
                .map(|s| s.map_or(Cost::Infinite, Cost::from_steps))
                .collect(),
        )
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[Cost] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cost> {
        self.0.iter()
    }

    pub fn set(&mut self, player: usize, cost: Cost) {
        self.0[player] = cost;
    }

    /// Largest finite component, `None` if every component is infinite.
    pub fn max_finite(&self) -> Option<Rational> {
        self.0.iter().filter_map(Cost::finite).max()
    }

    /// Players whose cost is finite.
    pub fn visited(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_finite())
            .map(|(i, _)| i)
    }

    /// Sum of the finite components.
    pub fn finite_sum(&self) -> Rational {
        self.0
            .iter()
            .filter_map(Cost::finite)
            .fold(Rational::zero(), |acc, c| acc + c)
    }

    /// Component-wise `self <= other`.
    pub fn dominated_by(&self, other: &CostProfile) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a <= b)
    }
}

impl Index<usize> for CostProfile {
    type Output = Cost;

    fn index(&self, player: usize) -> &Cost {
        &self.0[player]
    }
}

impl From<Vec<Cost>> for CostProfile {
    fn from(costs: Vec<Cost>) -> Self {
        CostProfile(costs)
    }
}

impl fmt::Display for CostProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for CostProfile {
    type Err = ParseCostError;

    /// Accepts `0,0,inf` with or without surrounding parentheses.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        inner
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(CostProfile)
    }
}
