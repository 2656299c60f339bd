//! Rank-based effectiveness measures.
//!
//! Candidates (simplified sizes, or methods) are ranked per property, rank 0
//! going to the best fit. `A` is a candidate's rank sum divided by the largest
//! possible sum, `(candidates - 1) * properties`, so it lies in [0,1] and lower
//! is better. `A_w` weights the properties.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::average_ranks;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// e.g. Spearman rho
    HigherIsBetter,
    /// e.g. the KS D-statistic
    LowerIsBetter,
}

/// Ranks of every candidate under every property.
///
/// A property column containing any undefined score is dropped for all
/// candidates (its ranks are `None`) and does not count towards `n_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankTable<T> {
    pub candidates: usize,
    pub properties: usize,
    /// `ranks[candidate][property]`
    pub ranks: Vec<Vec<Option<T>>>,
    pub dropped: Vec<usize>,
}

impl<T: Scalar> RankTable<T> {
    pub fn active_properties(&self) -> usize {
        self.properties - self.dropped.len()
    }

    pub fn rank_sums(&self) -> Vec<T> {
        self.ranks.iter().map(|row| row.iter().flatten().copied().sum()).collect()
    }
}

/// Ranks candidates per property: 0 for the best score under the property's
/// orientation, 1 for the next, and so on. Exact ties share the average of
/// the ranks they span.
pub fn rank_candidates<T: Scalar>(scores: &[Vec<Option<T>>], orientation: &[Orientation]) -> Result<RankTable<T>> {
    if scores.is_empty() || orientation.is_empty() {
        return Err(Error::InvalidParameter("empty score matrix".into()));
    }
    let properties = orientation.len();
    if let Some(row) = scores.iter().find(|r| r.len() != properties) {
        return Err(Error::InvalidParameter(format!("score row has {} entries, expected {properties}", row.len())));
    }
    let candidates = scores.len();
    let mut ranks = vec![vec![None; properties]; candidates];
    let mut dropped = Vec::new();
    for (p, &orient) in orientation.iter().enumerate() {
        let column: Option<Vec<T>> = scores.iter().map(|row| row[p].filter(|x| !x.is_nan())).collect();
        let Some(column) = column else {
            dropped.push(p);
            continue;
        };
        let keyed: Vec<T> = match orient {
            Orientation::LowerIsBetter => column,
            Orientation::HigherIsBetter => column.into_iter().map(|x| -x).collect(),
        };
        for (c, r) in average_ranks(&keyed).into_iter().enumerate() {
            ranks[c][p] = Some(r - T::one());
        }
    }
    Ok(RankTable { candidates, properties, ranks, dropped })
}

fn active_count<T: Scalar>(table: &RankTable<T>) -> Result<usize> {
    match table.active_properties() {
        0 => Err(Error::Undefined("no property has defined scores for every candidate".into())),
        k => Ok(k),
    }
}

/// `A = sum_i r_i / ((C - 1) * n_p)` per candidate.
pub fn measure_a<T: Scalar>(table: &RankTable<T>) -> Result<Vec<T>> {
    if table.candidates < 2 {
        return Err(Error::Undefined("measure A needs at least two candidates".into()));
    }
    let denom = T::from_usize_lossy((table.candidates - 1) * active_count(table)?);
    Ok(table.rank_sums().into_iter().map(|s| s / denom).collect())
}

/// `A_w = sum_i r_i w_i / (C * sum_i w_i)` per candidate. Weights of dropped
/// properties are ignored.
pub fn measure_aw<T: Scalar>(table: &RankTable<T>, weights: &[T]) -> Result<Vec<T>> {
    if weights.len() != table.properties {
        return Err(Error::InvalidParameter(format!("{} weights for {} properties", weights.len(), table.properties)));
    }
    if weights.iter().any(|w| w.is_nan() || *w < T::zero()) {
        return Err(Error::InvalidParameter("weights must be nonnegative".into()));
    }
    active_count(table)?;
    let weight_sum: T = weights.iter().enumerate().filter(|(p, _)| !table.dropped.contains(p)).map(|(_, &w)| w).sum();
    if weight_sum <= T::zero() {
        return Err(Error::InvalidParameter("weights must not all be zero".into()));
    }
    let denom = T::from_usize_lossy(table.candidates) * weight_sum;
    Ok(table
        .ranks
        .iter()
        .map(|row| row.iter().zip(weights).filter_map(|(r, &w)| r.map(|r| r * w)).sum::<T>() / denom)
        .collect())
}

/// Ranked candidates with their `A` (and optionally `A_w`) scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assessment<T> {
    pub candidates: Vec<String>,
    pub properties: Vec<String>,
    pub table: RankTable<T>,
    pub rank_sums: Vec<T>,
    pub a: Vec<T>,
    pub weights: Option<Vec<T>>,
    pub a_weighted: Option<Vec<T>>,
}

impl<T: Scalar> Assessment<T> {
    pub fn new(
        candidates: Vec<String>,
        properties: Vec<String>,
        scores: &[Vec<Option<T>>],
        orientation: &[Orientation],
    ) -> Result<Self> {
        if candidates.len() != scores.len() || properties.len() != orientation.len() {
            return Err(Error::InvalidParameter("label counts do not match the score matrix".into()));
        }
        let table = rank_candidates(scores, orientation)?;
        let a = measure_a(&table)?;
        let rank_sums = table.rank_sums();
        Ok(Self { candidates, properties, table, rank_sums, a, weights: None, a_weighted: None })
    }

    pub fn with_weights(mut self, weights: Vec<T>) -> Result<Self> {
        self.a_weighted = Some(measure_aw(&self.table, &weights)?);
        self.weights = Some(weights);
        Ok(self)
    }

    /// `candidate,<property ranks...>,sum,a` with dropped properties left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["candidate".to_owned()];
        header.extend(self.properties.iter().cloned());
        header.extend(["sum".to_owned(), "a".to_owned()]);
        w.write_record(&header)?;
        for (c, name) in self.candidates.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend(self.table.ranks[c].iter().map(|r| r.map_or_else(String::new, |r| r.to_string())));
            row.push(self.rank_sums[c].to_string());
            row.push(self.a[c].to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSize<S, T> {
    pub size: S,
    pub a: T,
    /// Where `A` is smallest (first occurrence), reported alongside the local-minimum choice.
    pub global_minimum: S,
    pub global_minimum_a: T,
    /// True when no size beat the virtual `A = 1` at size zero.
    pub no_local_minimum: bool,
}

/// Smallest size at which `A` has a local minimum, with a virtual point
/// `A = 1` in front of the smallest size.
///
/// A point qualifies when it is strictly below its left neighbor and not above
/// its right neighbor; the last point only needs to be strictly below its left
/// neighbor. `points` must be ordered by increasing simplified network size.
pub fn best_size<S: Copy, T: Scalar>(points: &[(S, T)]) -> Result<BestSize<S, T>> {
    let (&(first_size, first_a), _) = points.split_first().ok_or(Error::EmptySample)?;
    let (global_minimum, global_minimum_a) =
        points.iter().fold((first_size, first_a), |best, &(s, a)| if a < best.1 { (s, a) } else { best });
    let mut left = T::one();
    for (i, &(size, a)) in points.iter().enumerate() {
        let right_ok = points.get(i + 1).is_none_or(|&(_, next)| a <= next);
        if a < left && right_ok {
            return Ok(BestSize { size, a, global_minimum, global_minimum_a, no_local_minimum: false });
        }
        left = a;
    }
    Ok(BestSize { size: global_minimum, a: global_minimum_a, global_minimum, global_minimum_a, no_local_minimum: true })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSlot<L, T> {
    /// Several entries mean a tie.
    pub candidates: Vec<L>,
    pub score: T,
}

/// Best, second-best and worst candidates. Candidates with equal scores share
/// a slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict<L, T> {
    pub best: VerdictSlot<L, T>,
    pub second: Option<VerdictSlot<L, T>>,
    pub worst: Option<VerdictSlot<L, T>>,
    pub all_tied: bool,
    /// Every candidate, best first.
    pub ordered: Vec<(L, T)>,
}

/// Orders candidates by score (stable for equal scores) and groups ties.
pub fn verdict_by<L: Clone, T: Scalar>(scores: &[(L, T)], orientation: Orientation) -> Result<Verdict<L, T>> {
    if scores.is_empty() {
        return Err(Error::EmptySample);
    }
    if scores.iter().any(|(_, s)| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let mut ordered = scores.to_vec();
    ordered.sort_by(|a, b| {
        let ord = a.1.partial_cmp(&b.1).expect("no NaN");
        match orientation {
            Orientation::LowerIsBetter => ord,
            Orientation::HigherIsBetter => ord.reverse(),
        }
    });
    let mut groups: Vec<VerdictSlot<L, T>> = Vec::new();
    for (label, score) in &ordered {
        match groups.last_mut() {
            Some(g) if g.score == *score => g.candidates.push(label.clone()),
            _ => groups.push(VerdictSlot { candidates: vec![label.clone()], score: *score }),
        }
    }
    let all_tied = groups.len() == 1;
    let worst = (groups.len() >= 2).then(|| groups[groups.len() - 1].clone());
    let second = groups.get(1).cloned();
    let best = groups.swap_remove(0);
    Ok(Verdict { best, second, worst, all_tied, ordered })
}

/// Methods ordered by `A` ascending.
pub fn rank_methods<L: Clone, T: Scalar>(a_by_method: &[(L, T)]) -> Result<Verdict<L, T>> {
    verdict_by(a_by_method, Orientation::LowerIsBetter)
}
