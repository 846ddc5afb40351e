//! Online gesture following over a frozen oracle.
//!
//! One candidate is kept per oracle cluster. A candidate starts at the
//! closest frame of its cluster to the first input; afterwards it may only
//! move to states whose label is reachable by one forward link from its
//! current state (or stays within its own label), picking the closest stored
//! frame each time and accumulating that distance. The candidate with the
//! lowest running cost is the current match.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::types::squared_distance;
use crate::vmo::Oracle;

#[derive(Debug, Clone, PartialEq)]
pub struct FollowerState {
    /// Current state per candidate (`M`).
    pub path: Vec<usize>,
    /// Running cost per candidate (`C`).
    pub cost: Vec<f64>,
    /// Candidate index with the lowest running cost.
    pub best: usize,
    /// Input frames consumed so far.
    pub t: usize,
}

impl FollowerState {
    /// Matched oracle state of the best candidate.
    pub fn best_state(&self) -> usize {
        self.path[self.best]
    }

    pub fn best_cost(&self) -> f64 {
        self.cost[self.best]
    }
}

/// Closest state among `states` to `v` by squared distance; ties keep the
/// lowest state index.
fn nearest(oracle: &Oracle, states: impl Iterator<Item = usize>, v: &[f64]) -> (usize, f64) {
    let (s, d) = nearest_squared(oracle, states, v);
    (s, d.sqrt())
}

fn nearest_squared(
    oracle: &Oracle,
    states: impl Iterator<Item = usize>,
    v: &[f64],
) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for s in states {
        let d = squared_distance(v, oracle.frame(s));
        if d < best.1 || (d == best.1 && s < best.0) {
            best = (s, d);
        }
    }
    best
}

fn argmin(cost: &[f64]) -> usize {
    let mut best = 0;
    for (k, c) in cost.iter().enumerate() {
        if *c < cost[best] {
            best = k;
        }
    }
    best
}

/// Labels reachable from `state`: its own label plus the labels of all its
/// forward-link targets, deduplicated and ascending.
pub fn reachable_labels(oracle: &Oracle, state: usize) -> Vec<usize> {
    let mut labels: Vec<usize> = oracle
        .forward(state)
        .iter()
        .map(|&t| oracle.label(t))
        .collect();
    labels.push(oracle.label(state));
    labels.sort_unstable();
    labels.dedup();
    labels
}

/// States the follower may move to from `state`.
pub fn reachable_states(oracle: &Oracle, state: usize) -> Vec<usize> {
    let clusters = oracle.clusters();
    let mut states: Vec<usize> = reachable_labels(oracle, state)
        .into_iter()
        .flat_map(|l| clusters[l].iter().copied())
        .collect();
    states.sort_unstable();
    states
}

fn check_dim(oracle: &Oracle, v: &[f64]) -> Result<()> {
    match oracle.dim() {
        None => Err(Error::input("cannot follow an empty oracle")),
        Some(d) if d != v.len() => Err(Error::input(format!(
            "input has dimension {}, model expects {d}",
            v.len()
        ))),
        Some(_) if v.iter().any(|x| !x.is_finite()) => {
            Err(Error::input("non-finite input feature"))
        }
        Some(_) => Ok(()),
    }
}

/// Initializes one candidate per cluster from the first input frame.
pub fn follower_init(oracle: &Oracle, r1: &[f64], exec: Execution) -> Result<FollowerState> {
    check_dim(oracle, r1)?;
    let pairs = exec.map(oracle.clusters(), |b| {
        nearest(oracle, b.iter().copied(), r1)
    });
    let (path, cost): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let best = argmin(&cost);
    Ok(FollowerState {
        path,
        cost,
        best,
        t: 1,
    })
}

/// Advances every candidate by one input frame.
pub fn track_step(
    oracle: &Oracle,
    st: &mut FollowerState,
    rt: &[f64],
    exec: Execution,
) -> Result<usize> {
    check_dim(oracle, rt)?;
    if st.path.len() != oracle.num_clusters() {
        return Err(Error::contract(format!(
            "follower has {} candidates, oracle has {} clusters",
            st.path.len(),
            oracle.num_clusters()
        )));
    }
    // Candidates often share reachable labels, so the closest frame of each
    // needed cluster is found once and shared.
    let reach: Vec<Vec<usize>> = st
        .path
        .iter()
        .map(|&m| reachable_labels(oracle, m))
        .collect();
    let mut needed: Vec<usize> = reach.iter().flatten().copied().collect();
    needed.sort_unstable();
    needed.dedup();
    let clusters = oracle.clusters();
    let nearest_by_label = exec.map(&needed, |&l| {
        let (s, d) = nearest_squared(oracle, clusters[l].iter().copied(), rt);
        (l, s, d)
    });
    let mut per_label = vec![(usize::MAX, f64::INFINITY); clusters.len()];
    for (l, s, d) in nearest_by_label {
        per_label[l] = (s, d);
    }
    let moves = reach.iter().map(|labels| {
        let mut best = (usize::MAX, f64::INFINITY);
        for &l in labels {
            let (s, d) = per_label[l];
            if d < best.1 || (d == best.1 && s < best.0) {
                best = (s, d);
            }
        }
        (best.0, best.1.sqrt())
    });
    for (k, (m, d)) in moves.enumerate() {
        st.path[k] = m;
        st.cost[k] += d;
    }
    st.best = argmin(&st.cost);
    st.t += 1;
    Ok(st.best_state())
}

/// Convenience wrapper bundling an oracle with follower state.
#[derive(Debug, Clone)]
pub struct Follower<'a> {
    oracle: &'a Oracle,
    state: Option<FollowerState>,
    exec: Execution,
}

impl<'a> Follower<'a> {
    pub fn new(oracle: &'a Oracle) -> Result<Self> {
        if oracle.is_empty() {
            return Err(Error::input("cannot follow an empty oracle"));
        }
        Ok(Follower {
            oracle,
            state: None,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Consumes one input frame and returns the matched oracle state.
    pub fn push(&mut self, v: &[f64]) -> Result<usize> {
        match &mut self.state {
            None => {
                let st = follower_init(self.oracle, v, self.exec)?;
                let m = st.best_state();
                self.state = Some(st);
                Ok(m)
            }
            Some(st) => track_step(self.oracle, st, v, self.exec),
        }
    }

    pub fn state(&self) -> Option<&FollowerState> {
        self.state.as_ref()
    }
}

/// Mapping from follower output to rendering controls.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MappingConfig {
    /// Cluster label → event name.
    #[serde(default)]
    pub categorical: Vec<CategoricalRule>,
    /// Oracle state intervals driving named timelines.
    #[serde(default)]
    pub temporal: Vec<TemporalSpan>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalRule {
    pub label: usize,
    pub event: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalSpan {
    pub name: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scrub {
    pub timeline: String,
    pub position: f64,
}

impl MappingConfig {
    /// Checks the rules against an oracle with `len` states.
    pub fn validate(&self, len: usize) -> Result<()> {
        let mut names: Vec<&str> = self.categorical.iter().map(|r| r.event.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("duplicate event name in mapping"));
        }
        let mut labels: Vec<usize> = self.categorical.iter().map(|r| r.label).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::input("label mapped to more than one event"));
        }
        for s in &self.temporal {
            if !(1 <= s.start && s.start <= s.end && s.end <= len) {
                return Err(Error::input(format!(
                    "span {:?} [{}, {}] outside states 1..={len}",
                    s.name, s.start, s.end
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::input(format!("mapping: {e}")))
    }
}

/// Event bound to the cluster of the current best match, if any.
pub fn map_categorical<'c>(
    oracle: &Oracle,
    st: &FollowerState,
    cfg: &'c MappingConfig,
) -> Option<&'c str> {
    let label = oracle.label(st.best_state());
    cfg.categorical
        .iter()
        .find(|r| r.label == label)
        .map(|r| r.event.as_str())
}

/// Playback position of the first span containing the current best match.
pub fn map_temporal(st: &FollowerState, cfg: &MappingConfig) -> Option<Scrub> {
    let m = st.best_state();
    cfg.temporal
        .iter()
        .find(|s| s.start <= m && m <= s.end)
        .map(|s| {
            let position = if s.end == s.start {
                0.0
            } else {
                ((m - s.start) as f64 / (s.end - s.start) as f64).clamp(0.0, 1.0)
            };
            Scrub {
                timeline: s.name.clone(),
                position,
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_at(m: usize) -> FollowerState {
        FollowerState {
            path: vec![m],
            cost: vec![0.0],
            best: 0,
            t: 1,
        }
    }

    #[test]
    fn init_on_constant_oracle() {
        let o = Oracle::build(0.1, &[[2.0], [2.0], [2.0]]).unwrap();
        let st = follower_init(&o, &[2.0], Execution::Sequential).unwrap();
        assert_eq!(st.cost, vec![0.0]);
        assert_eq!(st.path, vec![1]);
    }

    #[test]
    fn init_picks_closest_cluster() {
        let o = Oracle::build(0.5, &[[0.0], [10.0], [0.0], [10.0]]).unwrap();
        assert_eq!(o.clusters(), &[vec![1, 3], vec![2, 4]]);
        let st = follower_init(&o, &[1.0], Execution::Sequential).unwrap();
        // Exhaustive scan: |1-0| = 1 at states 1, 3; |1-10| = 9 at 2, 4.
        assert_eq!(st.path, vec![1, 2]);
        assert_eq!(st.cost, vec![1.0, 9.0]);
        assert_eq!(st.best, 0);
    }

    #[test]
    fn init_tie_goes_to_lowest_candidate() {
        let o = Oracle::build(0.5, &[[0.0], [10.0]]).unwrap();
        let st = follower_init(&o, &[5.0], Execution::Sequential).unwrap();
        assert_eq!(st.cost, vec![5.0, 5.0]);
        assert_eq!(st.best, 0);
    }

    #[test]
    fn errors() {
        let empty = Oracle::new(0.1).unwrap();
        assert!(follower_init(&empty, &[0.0], Execution::Sequential).is_err());
        assert!(Follower::new(&empty).is_err());
        let o = Oracle::build(0.1, &[[0.0, 1.0]]).unwrap();
        assert!(follower_init(&o, &[0.0], Execution::Sequential).is_err());
        let mut st = follower_init(&o, &[0.0, 1.0], Execution::Sequential).unwrap();
        assert!(track_step(&o, &mut st, &[0.0], Execution::Sequential).is_err());
    }

    #[test]
    fn terminal_state_is_confined_to_own_cluster() {
        // a b c a: the last state has no forward links.
        let o = Oracle::build(0.5, &[[0.0], [10.0], [20.0], [0.0]]).unwrap();
        assert!(o.forward(4).is_empty());
        assert_eq!(reachable_labels(&o, 4), vec![o.label(4)]);
        assert_eq!(reachable_states(&o, 4), vec![1, 4]);
        let mut st = FollowerState {
            path: vec![4, 2, 3],
            cost: vec![0.0; 3],
            best: 0,
            t: 1,
        };
        track_step(&o, &mut st, &[20.0], Execution::Sequential).unwrap();
        // Candidate 0 cannot reach label c, so it stays on an `a` frame.
        assert_eq!(st.path[0], 1);
        assert_eq!(st.cost[0], 20.0);
    }

    #[test]
    fn replay_costs_nothing() {
        let frames: Vec<[f64; 2]> = (0..60)
            .map(|i| {
                let x = i as f64 * 0.21;
                [x.sin(), (0.7 * x).cos()]
            })
            .collect();
        let o = Oracle::build(0.15, &frames).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut f = Follower::new(&o).unwrap().with_execution(exec);
            for (i, v) in frames.iter().enumerate() {
                let m = f.push(v).unwrap();
                assert_eq!(m, i + 1);
                assert_eq!(f.state().unwrap().best_cost(), 0.0);
            }
        }
    }

    #[test]
    fn categorical_mapping() {
        let o = Oracle::build(0.5, &[[0.0], [10.0]]).unwrap();
        let cfg = MappingConfig {
            categorical: vec![CategoricalRule {
                label: 0,
                event: "strobe_on".into(),
            }],
            temporal: vec![],
        };
        assert_eq!(map_categorical(&o, &state_at(1), &cfg), Some("strobe_on"));
        assert_eq!(map_categorical(&o, &state_at(2), &cfg), None);
        assert_eq!(
            map_categorical(&o, &state_at(1), &MappingConfig::default()),
            None
        );
    }

    #[test]
    fn temporal_mapping() {
        let cfg = MappingConfig {
            categorical: vec![],
            temporal: vec![
                TemporalSpan {
                    name: "video".into(),
                    start: 10,
                    end: 20,
                },
                TemporalSpan {
                    name: "flash".into(),
                    start: 30,
                    end: 30,
                },
            ],
        };
        let pos = |m| map_temporal(&state_at(m), &cfg).map(|s| (s.timeline, s.position));
        assert_eq!(pos(15), Some(("video".into(), 0.5)));
        assert_eq!(pos(10), Some(("video".into(), 0.0)));
        assert_eq!(pos(20), Some(("video".into(), 1.0)));
        assert_eq!(pos(30), Some(("flash".into(), 0.0)));
        assert_eq!(pos(25), None);
    }

    #[test]
    fn mapping_validation() {
        let mut cfg = MappingConfig::default();
        cfg.temporal.push(TemporalSpan {
            name: "x".into(),
            start: 0,
            end: 3,
        });
        assert!(cfg.validate(10).is_err());
        cfg.temporal[0].start = 4;
        assert!(cfg.validate(10).is_err());
        cfg.temporal[0].start = 2;
        assert!(cfg.validate(10).is_ok());
        assert!(cfg.validate(2).is_err());
        cfg.categorical.push(CategoricalRule {
            label: 0,
            event: "a".into(),
        });
        cfg.categorical.push(CategoricalRule {
            label: 1,
            event: "a".into(),
        });
        assert!(cfg.validate(10).is_err());
        let parsed = MappingConfig::from_json(
            r#"{"categorical":[{"label":2,"event":"fog"}],"temporal":[{"name":"v","start":1,"end":5}]}"#,
        )
        .unwrap();
        assert_eq!(parsed.categorical[0].event, "fog");
        assert!(MappingConfig::from_json("{\"categorical\": 3}").is_err());
    }
}
