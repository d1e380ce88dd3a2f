use std::collections::BTreeMap;

use crate::data::Block;
use crate::error::{Error, Result};
use crate::models::persistence_forecast;
use crate::month::Month;
use crate::rng::Stream;

/// `sqrt(mean((p − t)²))` over pairs where both values are present.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!("{} predictions, {} truths", pred.len(), truth.len())));
    }
    let (sse, n) = pred
        .iter()
        .zip(truth)
        .filter(|(p, t)| !p.is_nan() && !t.is_nan())
        .fold((0.0, 0usize), |(s, n), (p, t)| (s + (p - t) * (p - t), n + 1));
    if n == 0 {
        return Err(Error::EmptyComparison);
    }
    Ok((sse / n as f64).sqrt())
}

/// Truth and persistence rows for a set of scored blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalSet {
    pub target_months: Vec<Month>,
    pub truths: Vec<Vec<f64>>,
    pub baseline: Vec<Vec<f64>>,
}

impl EvalSet {
    /// Blocks with a target; blocks without one are ignored.
    pub fn from_blocks(blocks: &[(Block<'_>, Option<&[f64]>)]) -> Result<Self> {
        let mut set = EvalSet {
            target_months: Vec::new(),
            truths: Vec::new(),
            baseline: Vec::new(),
        };
        for (b, t) in blocks {
            if let Some(t) = t {
                set.target_months.push(b.target_month());
                set.truths.push(t.to_vec());
                set.baseline.push(persistence_forecast(b)?);
            }
        }
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.truths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truths.is_empty()
    }

    pub fn n_locations(&self) -> usize {
        self.truths.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, indices: &[usize]) -> EvalSet {
        EvalSet {
            target_months: indices.iter().map(|&i| self.target_months[i]).collect(),
            truths: indices.iter().map(|&i| self.truths[i].clone()).collect(),
            baseline: indices.iter().map(|&i| self.baseline[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LocationScore {
    pub sse_model: f64,
    pub sse_persistence: f64,
    pub count: usize,
}

impl LocationScore {
    pub fn rmse_model(&self) -> f64 {
        (self.sse_model / self.count as f64).sqrt()
    }

    pub fn rmse_persistence(&self) -> f64 {
        (self.sse_persistence / self.count as f64).sqrt()
    }

    /// NaN when the location has no scored pair.
    pub fn skill(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.rmse_persistence() - self.rmse_model()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkillReport {
    /// Mean over scored locations of the per-location RMSE.
    pub rmse_model: f64,
    pub rmse_persistence: f64,
    /// Mean over scored locations of the per-location difference.
    pub skill: f64,
    pub per_location_skill: Vec<f64>,
    pub per_location: Vec<LocationScore>,
    /// Target year → (model, persistence) RMSE pooled over locations.
    pub per_year_rmse: BTreeMap<i64, (f64, f64)>,
    pub n_blocks: usize,
}

pub fn skill_score(predictions: &[Vec<f64>], eval: &EvalSet) -> Result<SkillReport> {
    if predictions.len() != eval.len() {
        return Err(Error::Shape(format!(
            "{} prediction rows for {} blocks",
            predictions.len(),
            eval.len()
        )));
    }
    let n_loc = eval.n_locations();
    let mut per_location = vec![LocationScore::default(); n_loc];
    let mut per_year: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for (b, pred) in predictions.iter().enumerate() {
        let truth = &eval.truths[b];
        let base = &eval.baseline[b];
        if pred.len() != n_loc || truth.len() != n_loc || base.len() != n_loc {
            return Err(Error::Shape(format!("block {b} has rows of unequal length")));
        }
        let year = eval.target_months[b].year();
        let entry = per_year.entry(year).or_default();
        for l in 0..n_loc {
            let t = truth[l];
            if t.is_nan() {
                continue;
            }
            if base[l].is_nan() {
                return Err(Error::IncompleteBaseline(format!(
                    "block {b}, location {l}: truth present but no persistence input"
                )));
            }
            if pred[l].is_nan() {
                continue;
            }
            let em = (pred[l] - t) * (pred[l] - t);
            let ep = (base[l] - t) * (base[l] - t);
            let s = &mut per_location[l];
            s.sse_model += em;
            s.sse_persistence += ep;
            s.count += 1;
            entry.0 += em;
            entry.1 += ep;
            entry.2 += 1;
        }
    }
    let scored: Vec<&LocationScore> = per_location.iter().filter(|s| s.count > 0).collect();
    if scored.is_empty() {
        return Err(Error::EmptyComparison);
    }
    let k = scored.len() as f64;
    let rmse_model = scored.iter().map(|s| s.rmse_model()).sum::<f64>() / k;
    let rmse_persistence = scored.iter().map(|s| s.rmse_persistence()).sum::<f64>() / k;
    let skill = scored.iter().map(|s| s.skill()).sum::<f64>() / k;
    Ok(SkillReport {
        rmse_model,
        rmse_persistence,
        skill,
        per_location_skill: per_location.iter().map(LocationScore::skill).collect(),
        per_location,
        per_year_rmse: per_year
            .into_iter()
            .filter(|(_, v)| v.2 > 0)
            .map(|(y, (m, p, n))| (y, ((m / n as f64).sqrt(), (p / n as f64).sqrt())))
            .collect(),
        n_blocks: predictions.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YearlyRow {
    pub year: i64,
    pub sse: f64,
    pub count: usize,
}

impl YearlyRow {
    pub fn rmse(&self) -> f64 {
        (self.sse / self.count as f64).sqrt()
    }
}

/// Squared errors grouped by target calendar year, pooled over locations.
pub fn yearly_rmse(predictions: &[Vec<f64>], truths: &[Vec<f64>], target_months: &[Month]) -> Result<Vec<YearlyRow>> {
    if predictions.len() != truths.len() || truths.len() != target_months.len() {
        return Err(Error::Shape("predictions, truths and months differ in length".into()));
    }
    let mut by_year: BTreeMap<i64, (f64, usize)> = BTreeMap::new();
    for ((p, t), m) in predictions.iter().zip(truths).zip(target_months) {
        let e = by_year.entry(m.year()).or_default();
        for (a, b) in p.iter().zip(t) {
            if !a.is_nan() && !b.is_nan() {
                e.0 += (a - b) * (a - b);
                e.1 += 1;
            }
        }
    }
    Ok(by_year
        .into_iter()
        .filter(|(_, (_, n))| *n > 0)
        .map(|(year, (sse, count))| YearlyRow { year, sse, count })
        .collect())
}

/// Shuffled halves of `0..n` (the first gets the extra block when `n` is
/// odd), each sorted.
pub fn random_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    Stream::new(seed).shuffle(&mut idx);
    let mut a = idx[..n.div_ceil(2)].to_vec();
    let mut b = idx[n.div_ceil(2)..].to_vec();
    a.sort_unstable();
    b.sort_unstable();
    (a, b)
}

/// Skill on each side of a public/private split of the blocks.
pub fn split_score(
    predictions: &[Vec<f64>],
    eval: &EvalSet,
    public: &[usize],
    private: &[usize],
) -> Result<(SkillReport, SkillReport)> {
    let n = eval.len();
    if public.len().abs_diff(private.len()) > 1 {
        return Err(Error::Split(format!(
            "unbalanced split {} / {}",
            public.len(),
            private.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in public.iter().chain(private) {
        if i >= n {
            return Err(Error::Split(format!("block {i} out of range")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::Split(format!("block {i} assigned twice")));
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::Split(format!("block {i} not assigned")));
    }
    let score = |idx: &[usize]| {
        let preds: Vec<Vec<f64>> = idx.iter().map(|&i| predictions[i].clone()).collect();
        skill_score(&preds, &eval.subset(idx))
    };
    Ok((score(public)?, score(private)?))
}
