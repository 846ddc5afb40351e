//! Variable Markov Oracle over a multivariate time series.
//!
//! States are numbered from 0 (a virtual root) to `T`; state `t ≥ 1` stores
//! input frame `t`. Frames are symbolized incrementally: a new frame walks the
//! suffix-link chain of its predecessor looking for a forward link whose
//! target frame lies within `theta` of it. Every state passed on the way
//! receives an external forward link to the new state. If a qualifying target
//! is found the new state links back to the closest one and inherits its
//! label; otherwise it opens a new label and links to the root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::types::squared_distance;

pub const MODEL_FORMAT: &str = "actiongraph-vmo";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle {
    theta: f64,
    dim: Option<usize>,
    /// Frames of states 1..=T, row-major.
    data: Vec<f64>,
    /// `labels[t - 1]` is the symbol of state `t`.
    labels: Vec<usize>,
    /// `sfx[0]` is `None`; every other entry is `Some(k)` with `k < t`.
    sfx: Vec<Option<usize>>,
    /// Forward-link targets per state, ascending. The first target of state
    /// `s < T` is always the internal link `s + 1`.
    forward: Vec<Vec<usize>>,
    clusters: Vec<Vec<usize>>,
}

impl Oracle {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta >= 0.0) {
            return Err(Error::input(format!(
                "threshold must be finite and non-negative, got {theta}"
            )));
        }
        Ok(Oracle {
            theta,
            dim: None,
            data: Vec::new(),
            labels: Vec::new(),
            sfx: vec![None],
            forward: vec![Vec::new()],
            clusters: Vec::new(),
        })
    }

    /// Builds an oracle from a whole series.
    pub fn build<V: AsRef<[f64]>>(theta: f64, frames: &[V]) -> Result<Self> {
        let mut o = Oracle::new(theta)?;
        for f in frames {
            o.add_frame(f.as_ref())?;
        }
        Ok(o)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Feature dimensionality, fixed by the first frame.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Number of non-root states, `T`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Stored frame of state `t` (1-based).
    pub fn frame(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.len(), "state {t} has no frame");
        let d = self.dim.unwrap_or(0);
        &self.data[(t - 1) * d..t * d]
    }

    /// Label of state `t` (1-based).
    pub fn label(&self, t: usize) -> usize {
        self.labels[t - 1]
    }

    /// Symbol sequence `q_1..q_T`.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sfx(&self, t: usize) -> Option<usize> {
        self.sfx[t]
    }

    pub fn suffix_links(&self) -> &[Option<usize>] {
        &self.sfx
    }

    /// Forward-link targets of `state`, ascending.
    pub fn forward(&self, state: usize) -> &[usize] {
        &self.forward[state]
    }

    /// Target of the forward link from `state` labelled `label`, if any.
    pub fn transition(&self, state: usize, label: usize) -> Option<usize> {
        self.forward[state]
            .iter()
            .copied()
            .find(|&t| self.label(t) == label)
    }

    /// All forward links as `(source, label, target, external)`.
    pub fn links(&self) -> impl Iterator<Item = (usize, usize, usize, bool)> + '_ {
        self.forward
            .iter()
            .enumerate()
            .flat_map(move |(s, ts)| ts.iter().map(move |&t| (s, self.label(t), t, t != s + 1)))
    }

    /// Per-label state lists `b_k`, each ascending.
    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Appends a frame and returns its state index.
    pub fn add_frame(&mut self, v: &[f64]) -> Result<usize> {
        match self.dim {
            Some(d) if d != v.len() => {
                return Err(Error::input(format!(
                    "frame has dimension {}, oracle expects {d}",
                    v.len()
                )))
            }
            None if v.is_empty() => return Err(Error::input("empty feature vector")),
            _ => {}
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("non-finite feature value"));
        }
        self.dim = Some(v.len());

        let t = self.len() + 1;
        self.data.extend_from_slice(v);
        self.forward.push(Vec::new());
        self.forward[t - 1].push(t);

        let theta2 = self.theta * self.theta;
        let mut k = self.sfx[t - 1];
        let mut found = None;
        while let Some(s) = k {
            let best = self.forward[s]
                .iter()
                .filter(|&&x| x != t)
                .map(|&x| (squared_distance(v, self.frame(x)), x))
                .filter(|&(d, _)| d <= theta2)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            match best {
                Some((_, target)) => {
                    found = Some(target);
                    break;
                }
                None => {
                    self.forward[s].push(t);
                    k = self.sfx[s];
                }
            }
        }

        let label = match found {
            Some(target) => {
                self.sfx.push(Some(target));
                self.label(target)
            }
            None => {
                self.sfx.push(Some(0));
                self.clusters.push(Vec::new());
                self.clusters.len() - 1
            }
        };
        self.labels.push(label);
        self.clusters[label].push(t);
        Ok(t)
    }

    /// Maximal runs of states whose suffix links advance in lockstep, i.e.
    /// stretches that replay an earlier stretch of the series.
    pub fn repeated_segments(&self, min_len: usize) -> Vec<Segment> {
        let mut out = Vec::new();
        let mut run: Option<Segment> = None;
        for t in 1..=self.len() {
            let target = self.sfx[t].unwrap_or(0);
            let extends = match &run {
                Some(seg) => target != 0 && target == seg.source_end + 1,
                None => false,
            };
            if extends {
                let seg = run.as_mut().unwrap();
                seg.end = t;
                seg.source_end = target;
                continue;
            }
            if let Some(seg) = run.take() {
                if seg.len() >= min_len {
                    out.push(seg);
                }
            }
            if target != 0 {
                run = Some(Segment {
                    start: t,
                    end: t,
                    source_start: target,
                    source_end: target,
                });
            }
        }
        if let Some(seg) = run {
            if seg.len() >= min_len {
                out.push(seg);
            }
        }
        out
    }

    pub fn to_document(&self) -> ModelDocument {
        let dim = self.dim.unwrap_or(0);
        ModelDocument {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            theta: self.theta,
            dim,
            frames: (1..=self.len()).map(|t| self.frame(t).to_vec()).collect(),
            labels: self.labels.clone(),
            sfx: self.sfx.clone(),
            links: self
                .links()
                .map(|(source, label, target, external)| LinkRecord {
                    source,
                    label,
                    target,
                    external,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: ModelDocument) -> Result<Self> {
        let bad = |msg: String| Error::input(format!("model: {msg}"));
        if doc.format != MODEL_FORMAT {
            return Err(bad(format!("unknown format {:?}", doc.format)));
        }
        if doc.version != MODEL_VERSION {
            return Err(bad(format!(
                "version {} not supported (expected {MODEL_VERSION})",
                doc.version
            )));
        }
        let mut o = Oracle::new(doc.theta)?;
        let n = doc.frames.len();
        if doc.labels.len() != n || doc.sfx.len() != n + 1 {
            return Err(bad(format!(
                "{n} frames but {} labels and {} suffix links",
                doc.labels.len(),
                doc.sfx.len()
            )));
        }
        if n > 0 {
            if doc.dim == 0 || doc.frames.iter().any(|f| f.len() != doc.dim) {
                return Err(bad("frame dimensions disagree with dim".into()));
            }
            if doc.frames.iter().flatten().any(|x| !x.is_finite()) {
                return Err(bad("non-finite frame value".into()));
            }
            o.dim = Some(doc.dim);
        }
        o.data = doc.frames.concat();

        if doc.sfx[0].is_some() {
            return Err(bad("root suffix link must be null".into()));
        }
        for (t, s) in doc.sfx.iter().enumerate().skip(1) {
            match s {
                Some(k) if *k < t => {}
                _ => return Err(bad(format!("invalid suffix link at state {t}"))),
            }
        }
        o.sfx = doc.sfx;

        for (i, &l) in doc.labels.iter().enumerate() {
            if l > o.clusters.len() {
                return Err(bad(format!("label {l} at state {} skips a label", i + 1)));
            }
            if l == o.clusters.len() {
                o.clusters.push(Vec::new());
            }
            o.clusters[l].push(i + 1);
        }
        o.labels = doc.labels;

        o.forward = vec![Vec::new(); n + 1];
        for link in &doc.links {
            if link.source >= n || link.target > n || link.target <= link.source {
                return Err(bad(format!(
                    "link {} -> {} out of range",
                    link.source, link.target
                )));
            }
            if link.label != o.labels[link.target - 1] {
                return Err(bad(format!(
                    "link {} -> {} labelled {} but target has label {}",
                    link.source,
                    link.target,
                    link.label,
                    o.labels[link.target - 1]
                )));
            }
            if link.external != (link.target != link.source + 1) {
                return Err(bad(format!(
                    "link {} -> {} has wrong internal/external flag",
                    link.source, link.target
                )));
            }
            o.forward[link.source].push(link.target);
        }
        for (s, ts) in o.forward.iter_mut().enumerate() {
            ts.sort_unstable();
            if ts.windows(2).any(|w| w[0] == w[1]) {
                return Err(bad(format!("duplicate link from state {s}")));
            }
            if s < n && ts.first() != Some(&(s + 1)) {
                return Err(bad(format!("missing internal link {s} -> {}", s + 1)));
            }
        }
        Ok(o)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(s).map_err(|e| Error::input(format!("model: {e}")))?;
        Self::from_document(doc)
    }
}

/// A stretch `[start, end]` of states that repeats `[source_start, source_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
    pub source_start: usize,
    pub source_end: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// On-disk model. Frames are listed for states 1..=T; `sfx` has T + 1
/// entries with `sfx[0] = null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub theta: f64,
    pub dim: usize,
    pub frames: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub sfx: Vec<Option<usize>>,
    pub links: Vec<LinkRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub source: usize,
    pub label: usize,
    pub target: usize,
    pub external: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore {
    pub theta: f64,
    /// States whose suffix link lands on a non-root state.
    pub repeats: usize,
    pub clusters: usize,
    pub score: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub theta: f64,
    pub scores: Vec<ThresholdScore>,
}

/// Picks a threshold from `candidates` by counting states with a non-root
/// suffix link. A candidate that folds a multi-frame series into a single
/// label carries no structure and scores zero. Ties resolve to the (lower)
/// median of the tying candidates.
pub fn select_threshold<V: AsRef<[f64]> + Sync>(
    frames: &[V],
    candidates: &[f64],
    exec: Execution,
) -> Result<ThresholdSelection> {
    if candidates.is_empty() {
        return Err(Error::input("no threshold candidates"));
    }
    if let Some(c) = candidates.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::input(format!("invalid threshold candidate {c}")));
    }
    let scores = exec
        .map(candidates, |&theta| {
            let o = Oracle::build(theta, frames)?;
            let repeats = o.sfx[1..].iter().filter(|s| **s != Some(0)).count();
            let clusters = o.num_clusters();
            let score = if clusters <= 1 && o.len() > 1 {
                0
            } else {
                repeats
            };
            Ok(ThresholdScore {
                theta,
                repeats,
                clusters,
                score,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let top = scores.iter().map(|s| s.score).max().unwrap_or(0);
    let mut tying: Vec<f64> = scores
        .iter()
        .filter(|s| s.score == top)
        .map(|s| s.theta)
        .collect();
    tying.sort_by(f64::total_cmp);
    let theta = tying[(tying.len() - 1) / 2];
    Ok(ThresholdSelection { theta, scores })
}
