//! Statistical comparison of original and simplified networks.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netprops::{GlobalProperty, LocalProperty};
use crate::scalar::Scalar;
use crate::simplify::{Method, SizeParameter};

fn sorted<T: Scalar>(sample: &[T]) -> Result<Vec<T>> {
    if sample.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("sample contains NaN".into()));
    }
    let mut v = sample.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(v)
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest vertical distance
/// between the two empirical CDFs.
pub fn ks_d<T: Scalar>(sample_a: &[T], sample_b: &[T]) -> Result<T> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = sorted(sample_a)?;
    let b = sorted(sample_b)?;
    let (na, nb) = (T::from_usize_lossy(a.len()), T::from_usize_lossy(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        // step past every copy of the next support point in both samples
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        let gap = (T::from_usize_lossy(i) / na - T::from_usize_lossy(j) / nb).abs();
        if gap > d {
            d = gap;
        }
    }
    Ok(d)
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let rank = T::from_usize_lossy(start + 1 + end) / T::from_usize_lossy(2);
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        sxy = sxy + (a - mx) * (b - my);
        sxx = sxx + (a - mx) * (a - mx);
        syy = syy + (b - my) * (b - my);
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Spearman's rank correlation with average ranks for ties. `Ok(None)` when
/// either coordinate has no rank variance.
pub fn spearman_rho<T: Scalar>(pairs: &[(T, T)]) -> Result<Option<T>> {
    if pairs.len() < 2 {
        return Err(Error::InvalidParameter(format!("spearman needs at least 2 pairs, got {}", pairs.len())));
    }
    let (x, y): (Vec<T>, Vec<T>) = pairs.iter().copied().unzip();
    if x.iter().chain(&y).any(|v| v.is_nan()) {
        return Err(Error::InvalidParameter("pairs contain NaN".into()));
    }
    Ok(pearson(&average_ranks(&x), &average_ranks(&y)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult<T> {
    pub f: T,
    pub p: T,
    pub df_between: usize,
    pub df_within: usize,
}

/// Classic one-way ANOVA. The p-value is the upper tail of the F distribution,
/// `I_{d2/(d2+d1 F)}(d2/2, d1/2)`.
pub fn one_way_anova<T: Scalar>(groups: &[Vec<T>]) -> Result<AnovaResult<T>> {
    if groups.len() < 2 {
        return Err(Error::InvalidParameter("ANOVA needs at least 2 groups".into()));
    }
    if groups.iter().any(|g| g.is_empty()) {
        return Err(Error::EmptySample);
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total <= groups.len() {
        return Err(Error::InvalidParameter("ANOVA needs more values than groups".into()));
    }
    let grand = groups.iter().flatten().map(|x| x.to_f64_lossy()).sum::<f64>() / total as f64;
    let (mut ss_between, mut ss_within) = (0.0, 0.0);
    for g in groups {
        let mean = g.iter().map(|x| x.to_f64_lossy()).sum::<f64>() / g.len() as f64;
        ss_between += g.len() as f64 * (mean - grand).powi(2);
        ss_within += g.iter().map(|x| (x.to_f64_lossy() - mean).powi(2)).sum::<f64>();
    }
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    if ms_within == 0.0 {
        if ms_between == 0.0 {
            return Err(Error::Undefined("no variance within or between groups".into()));
        }
        return Ok(AnovaResult { f: T::infinity(), p: T::zero(), df_between, df_within });
    }
    let f = ms_between / ms_within;
    let (d1, d2) = (df_between as f64, df_within as f64);
    let p = statrs::function::beta::beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f));
    Ok(AnovaResult { f: T::from_f64_lossy(f), p: T::from_f64_lossy(p), df_between, df_within })
}

/// What one simplification contributes to a [`SimilarityRecord`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionOutcome<T> {
    pub d: BTreeMap<LocalProperty, T>,
    pub globals: BTreeMap<GlobalProperty, Option<T>>,
    pub lwcc_fraction: f64,
    pub achieved_fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalPair<T> {
    pub original: Option<T>,
    /// Mean over the repetitions where the value was defined.
    pub simplified_mean: Option<T>,
    pub defined_repetitions: usize,
}

/// Repetition-averaged comparison of one (network, method, size) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRecord<T> {
    pub network: String,
    pub method: Method,
    pub size: SizeParameter,
    pub repetitions: usize,
    pub mean_d: BTreeMap<LocalProperty, T>,
    pub globals: BTreeMap<GlobalProperty, GlobalPair<T>>,
    pub mean_lwcc_fraction: f64,
    pub mean_achieved_fraction: f64,
}

pub fn average_over_repetitions<T: Scalar>(
    network: &str,
    method: Method,
    size: SizeParameter,
    original: &BTreeMap<GlobalProperty, Option<T>>,
    reps: &[RepetitionOutcome<T>],
) -> Result<SimilarityRecord<T>> {
    let first = reps.first().ok_or(Error::EmptySample)?;
    let keys: Vec<LocalProperty> = first.d.keys().copied().collect();
    if reps.iter().any(|r| !r.d.keys().copied().eq(keys.iter().copied())) {
        return Err(Error::InconsistentProperties);
    }
    let count = T::from_usize_lossy(reps.len());
    let mean_d = keys.iter().map(|&p| (p, reps.iter().map(|r| r.d[&p]).sum::<T>() / count)).collect();
    let globals = GlobalProperty::ALL
        .into_iter()
        .map(|p| {
            let defined: Vec<T> = reps.iter().filter_map(|r| r.globals.get(&p).copied().flatten()).collect();
            let simplified_mean =
                (!defined.is_empty()).then(|| defined.iter().copied().sum::<T>() / T::from_usize_lossy(defined.len()));
            let pair = GlobalPair {
                original: original.get(&p).copied().flatten(),
                simplified_mean,
                defined_repetitions: defined.len(),
            };
            (p, pair)
        })
        .collect();
    let mean = |f: fn(&RepetitionOutcome<T>) -> f64| reps.iter().map(f).sum::<f64>() / reps.len() as f64;
    Ok(SimilarityRecord {
        network: network.to_owned(),
        method,
        size,
        repetitions: reps.len(),
        mean_d,
        globals,
        mean_lwcc_fraction: mean(|r| r.lwcc_fraction),
        mean_achieved_fraction: mean(|r| r.achieved_fraction),
    })
}

/// Spearman rho between original and simplified global values, pooled over
/// the networks of one (method, size).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalCorrelation<T> {
    pub method: Method,
    pub size: SizeParameter,
    pub rho: BTreeMap<GlobalProperty, Option<T>>,
    /// Networks with both values defined.
    pub pairs: BTreeMap<GlobalProperty, usize>,
}

/// One pair per record; pairs with an undefined side are dropped.
pub fn correlate_globals<T: Scalar>(
    method: Method,
    size: SizeParameter,
    records: &[&SimilarityRecord<T>],
) -> GlobalCorrelation<T> {
    let mut rho = BTreeMap::new();
    let mut pairs = BTreeMap::new();
    for p in GlobalProperty::ALL {
        let xy: Vec<(T, T)> = records
            .iter()
            .filter_map(|r| r.globals.get(&p))
            .filter_map(|g| Some((g.original?, g.simplified_mean?)))
            .collect();
        pairs.insert(p, xy.len());
        rho.insert(p, spearman_rho(&xy).ok().flatten());
    }
    GlobalCorrelation { method, size, rho, pairs }
}

fn opt<T: Scalar>(x: Option<T>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

/// Rows `network,method,size,property,mean_d,original,simplified_mean,reps`;
/// local properties fill `mean_d`, global ones the value pair.
pub fn write_similarity_csv<T: Scalar, W: Write>(records: &[SimilarityRecord<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["network", "method", "size", "property", "mean_d", "original", "simplified_mean", "reps"])?;
    for r in records {
        let (method, size, reps) = (r.method.as_str(), r.size.to_string(), r.repetitions.to_string());
        for (p, d) in &r.mean_d {
            w.write_record([r.network.as_str(), method, &size, p.as_str(), &d.to_string(), "", "", &reps])?;
        }
        for (p, g) in &r.globals {
            w.write_record([
                r.network.as_str(),
                method,
                &size,
                p.as_str(),
                "",
                &opt(g.original),
                &opt(g.simplified_mean),
                &reps,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_d(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_d(&[0.0, 0.0], &[5.0, 5.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(ks_d(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ks_d::<f32>(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap(), 1.0 / 3.0, epsilon = 1e-6);
        assert!(matches!(ks_d::<f64>(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn ks_handles_ties_across_samples() {
        // ECDFs only differ after both samples pass the shared value 1
        assert_eq!(ks_d(&[1.0, 1.0, 2.0, 2.0], &[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.5);
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 5.0]), vec![2.0, 3.5, 3.5, 1.0]);
    }

    #[test]
    fn spearman_examples() {
        let up: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, (i * i) as f64)).collect();
        assert_eq!(spearman_rho(&up).unwrap(), Some(1.0));
        let down: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, -(i as f64).exp())).collect();
        assert_eq!(spearman_rho(&down).unwrap(), Some(-1.0));
        let mixed = [(1.0, 2.0), (2.0, 1.0), (3.0, 4.0), (4.0, 3.0)];
        assert_abs_diff_eq!(spearman_rho(&mixed).unwrap().unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(spearman_rho(&[(1.0, 1.0), (2.0, 1.0)]).unwrap(), None);
        assert!(spearman_rho(&[(1.0, 1.0)]).is_err());
    }

    fn rep(d: &[(LocalProperty, f64)], density: Option<f64>) -> RepetitionOutcome<f64> {
        RepetitionOutcome {
            d: d.iter().copied().collect(),
            globals: [(GlobalProperty::Density, density)].into_iter().collect(),
            lwcc_fraction: 1.0,
            achieved_fraction: 0.5,
        }
    }

    #[test]
    fn averaging() {
        let orig = [(GlobalProperty::Density, Some(0.1))].into_iter().collect();
        let reps = [rep(&[(LocalProperty::Degree, 0.2)], Some(0.3)), rep(&[(LocalProperty::Degree, 0.4)], None)];
        let r = average_over_repetitions("g", Method::Rn, SizeParameter::Fraction(0.5), &orig, &reps).unwrap();
        assert_abs_diff_eq!(r.mean_d[&LocalProperty::Degree], 0.3, epsilon = 1e-15);
        assert_eq!(r.repetitions, 2);
        let density = r.globals[&GlobalProperty::Density];
        assert_eq!((density.original, density.simplified_mean, density.defined_repetitions), (Some(0.1), Some(0.3), 1));
        assert_eq!(r.globals[&GlobalProperty::Transitivity].simplified_mean, None);

        let single =
            average_over_repetitions("g", Method::Rn, SizeParameter::Fraction(0.5), &orig, &reps[..1]).unwrap();
        assert_eq!(single.mean_d[&LocalProperty::Degree], 0.2);

        let zeros = vec![rep(&[(LocalProperty::Degree, 0.0)], Some(0.1)); 10];
        let z = average_over_repetitions("g", Method::Rn, SizeParameter::Fraction(1.0), &orig, &zeros).unwrap();
        assert_eq!(z.mean_d[&LocalProperty::Degree], 0.0);
    }

    #[test]
    fn averaging_rejects_mismatched_properties() {
        let orig = BTreeMap::new();
        let reps = [rep(&[(LocalProperty::Degree, 0.2)], None), rep(&[(LocalProperty::Clustering, 0.2)], None)];
        assert!(matches!(
            average_over_repetitions("g", Method::Rn, SizeParameter::Fraction(0.5), &orig, &reps),
            Err(Error::InconsistentProperties)
        ));
        assert!(average_over_repetitions::<f64>("g", Method::Rn, SizeParameter::Unset, &orig, &[]).is_err());
    }

    #[test]
    fn anova_reference_values() {
        // scipy.stats.f_oneway([6,8,4,5,3,4], [8,12,9,11,6,8], [13,9,11,8,7,12])
        let groups = vec![
            vec![6.0, 8.0, 4.0, 5.0, 3.0, 4.0],
            vec![8.0, 12.0, 9.0, 11.0, 6.0, 8.0],
            vec![13.0, 9.0, 11.0, 8.0, 7.0, 12.0],
        ];
        let r = one_way_anova(&groups).unwrap();
        assert_abs_diff_eq!(r.f, 9.264705882352942, epsilon = 1e-9);
        assert_abs_diff_eq!(r.p, 0.0023987773293929, epsilon = 1e-12);
        assert_eq!((r.df_between, r.df_within), (2, 15));
    }

    #[test]
    fn anova_separated_groups() {
        let r = one_way_anova(&[vec![0.0, 0.01, -0.01], vec![10.0, 10.01, 9.99]]).unwrap();
        assert!(r.p < 0.001);
    }

    #[test]
    fn anova_degenerate_inputs() {
        assert!(matches!(one_way_anova(&[vec![3.0, 3.0], vec![3.0, 3.0]]), Err(Error::Undefined(_))));
        assert!(one_way_anova(&[vec![1.0, 2.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0], vec![2.0]]).is_err());
        assert!(one_way_anova(&[vec![1.0, 2.0], vec![]]).is_err());
    }

    #[test]
    fn correlation_drops_undefined_pairs() {
        let orig =
            |x: f64| [(GlobalProperty::Density, Some(x)), (GlobalProperty::DegreeMixing, None)].into_iter().collect();
        let recs: Vec<SimilarityRecord<f64>> = [(0.1, 0.2), (0.2, 0.3), (0.3, 0.35)]
            .iter()
            .enumerate()
            .map(|(i, &(o, s))| {
                average_over_repetitions(
                    &format!("n{i}"),
                    Method::Rn,
                    SizeParameter::Fraction(0.1),
                    &orig(o),
                    &[rep(&[], Some(s))],
                )
                .unwrap()
            })
            .collect();
        let refs: Vec<&SimilarityRecord<f64>> = recs.iter().collect();
        let c = correlate_globals(Method::Rn, SizeParameter::Fraction(0.1), &refs);
        assert_eq!(c.rho[&GlobalProperty::Density], Some(1.0));
        assert_eq!(c.pairs[&GlobalProperty::Density], 3);
        assert_eq!(c.rho[&GlobalProperty::DegreeMixing], None);
        assert_eq!(c.pairs[&GlobalProperty::DegreeMixing], 0);
    }
}
