//! Scoring tracker and follower output against simulator ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{FollowRecord, TrackRecord, TruthRecord};
use crate::tracker::Action;
use crate::types::distance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobError {
    pub id: usize,
    pub samples: usize,
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrackingMetrics {
    pub frames: usize,
    /// Times a blob id became associated with a different true identity
    /// than the one it last carried.
    pub identity_switches: usize,
    /// Times a true identity was picked up by a different blob id than the
    /// one that last carried it.
    pub fragmentations: usize,
    pub births: usize,
    pub deaths: usize,
    pub kills: usize,
    /// Kill events that discarded a real (non-clutter) marker.
    pub false_kills: usize,
    pub position_error: Vec<BlobError>,
    /// Spearman correlation between matched states and reference time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_correlation: Option<f64>,
}

fn check_aligned(a: impl Iterator<Item = u64>, b: &[TruthRecord], na: usize) -> Result<()> {
    if na != b.len() {
        return Err(Error::input(format!(
            "{na} output frames but {} ground-truth frames",
            b.len()
        )));
    }
    for (ta, tb) in a.zip(b.iter().map(|r| r.t)) {
        if ta != tb {
            return Err(Error::input(format!(
                "frame {ta} aligned with truth frame {tb}"
            )));
        }
    }
    Ok(())
}

/// Index of the truth marker at `p` (nearest, exact in practice).
fn marker_index(truth: &TruthRecord, p: &crate::types::Point3) -> Option<usize> {
    truth
        .markers
        .iter()
        .enumerate()
        .map(|(j, m)| (j, distance(m, p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
}

pub fn eval_tracking(output: &[TrackRecord], truth: &[TruthRecord]) -> Result<TrackingMetrics> {
    check_aligned(output.iter().map(|r| r.t), truth, output.len())?;
    let mut m = TrackingMetrics {
        frames: output.len(),
        ..Default::default()
    };
    let mut carried: BTreeMap<usize, usize> = BTreeMap::new();
    let mut carrier: BTreeMap<usize, usize> = BTreeMap::new();
    let mut err: BTreeMap<usize, (usize, f64, f64)> = BTreeMap::new();

    for (rec, tr) in output.iter().zip(truth) {
        for e in &rec.events {
            match e.action {
                Action::Death => m.deaths += 1,
                Action::Kill => {
                    m.kills += 1;
                    let j = e.pos.as_ref().and_then(|p| marker_index(tr, p));
                    if j.and_then(|j| tr.ids[j]).is_some() {
                        m.false_kills += 1;
                    }
                }
                Action::Living | Action::Birth => {
                    if e.action == Action::Birth {
                        m.births += 1;
                    }
                    let Some(j) = e.pos.as_ref().and_then(|p| marker_index(tr, p)) else {
                        continue;
                    };
                    let pos = e.pos.unwrap();
                    let Some(true_id) = tr.ids[j] else {
                        continue;
                    };
                    if carried
                        .insert(e.id, true_id)
                        .is_some_and(|prev| prev != true_id)
                    {
                        m.identity_switches += 1;
                    }
                    if carrier
                        .insert(true_id, e.id)
                        .is_some_and(|prev| prev != e.id)
                    {
                        m.fragmentations += 1;
                    }
                    let d = distance(&pos, &tr.clean[j]);
                    let s = err.entry(e.id).or_insert((0, 0.0, 0.0));
                    s.0 += 1;
                    s.1 += d;
                    s.2 = s.2.max(d);
                }
            }
        }
    }
    m.position_error = err
        .into_iter()
        .map(|(id, (n, sum, max))| BlobError {
            id,
            samples: n,
            mean: sum / n as f64,
            max,
        })
        .collect();
    Ok(m)
}

/// Scores follower output against the live stream's ground truth.
///
/// Without `recording` the matched state index itself is correlated with
/// reference time. With the ground truth of the stream the model was built
/// from, state `s` is first mapped to the reference time of recording frame
/// `s - 1`, so a match inside a repeat of the gesture counts as on track.
pub fn eval_follow(
    output: &[FollowRecord],
    truth: &[TruthRecord],
    recording: Option<&[TruthRecord]>,
) -> Result<TrackingMetrics> {
    check_aligned(output.iter().map(|r| r.t), truth, output.len())?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (o, t) in output.iter().zip(truth) {
        let Some(r) = t.reference else { continue };
        let x = match recording {
            None => o.state as f64,
            Some(rec) => o
                .state
                .checked_sub(1)
                .and_then(|i| rec.get(i))
                .and_then(|f| f.reference)
                .ok_or_else(|| {
                    Error::input(format!(
                        "state {} has no reference time in the recording",
                        o.state
                    ))
                })?,
        };
        xs.push(x);
        ys.push(r);
    }
    Ok(TrackingMetrics {
        frames: output.len(),
        index_correlation: (!xs.is_empty()).then(|| spearman(&xs, &ys)),
        ..Default::default()
    })
}

/// Ranks with ties averaged, 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman rank correlation; 0 when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return 0.0;
    }
    pearson(&ranks(x), &ranks(y))
}
