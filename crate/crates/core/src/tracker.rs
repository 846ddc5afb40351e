//! Identity-preserving multi-marker tracker.
//!
//! Each frame is associated to a fixed registry of blobs with Kuhn-Munkres.
//! Blobs that lose their marker die with their last coordinate frozen; dead
//! and never-seen blobs are reborn when surplus markers appear. When more
//! markers arrive than the registry can hold, the worst-matched surplus is
//! discarded as noise.

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_assignment, CostMatrix};
use crate::error::{Error, Result};
use crate::types::{MarkerFrame, Point3, Position};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlobState {
    Alive,
    Dead,
    Unseen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Blob {
    pub id: usize,
    pub state: BlobState,
    pub last_pos: Position,
    pub last_seen_t: Option<u64>,
}

impl Blob {
    fn unseen(id: usize) -> Self {
        Blob {
            id,
            state: BlobState::Unseen,
            last_pos: Position::Unobserved,
            last_seen_t: None,
        }
    }

    pub fn is_alive(&self) -> bool {
        self.state == BlobState::Alive
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerConfig {
    pub max_blobs: usize,
    /// Association cost between a never-seen blob and any marker, meters.
    pub birth_cost: f64,
    /// Multiplier applied to the alive-first scheme's cost before it is
    /// compared with the joint scheme. Values below 1 favour keeping
    /// existing blobs alive over a simultaneous death and birth.
    pub continuity_bias: f64,
}

impl TrackerConfig {
    pub fn new(max_blobs: usize) -> Self {
        TrackerConfig {
            max_blobs,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_blobs == 0 {
            return Err(Error::input("max_blobs must be positive"));
        }
        if !(self.birth_cost.is_finite() && self.birth_cost > 0.0) {
            return Err(Error::input(format!(
                "birth_cost must be finite and positive, got {}",
                self.birth_cost
            )));
        }
        if !(self.continuity_bias > 0.0 && self.continuity_bias <= 1.0) {
            return Err(Error::input(format!(
                "continuity bias must lie in (0, 1], got {}",
                self.continuity_bias
            )));
        }
        Ok(())
    }
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            max_blobs: 1,
            birth_cost: 10.0,
            continuity_bias: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Living,
    Death,
    Birth,
    Kill,
}

/// One lifecycle event. For `Kill` the id is the index of the discarded
/// marker within the incoming frame, not a blob id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEvent {
    pub id: usize,
    pub action: Action,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<Point3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackUpdate {
    pub t: u64,
    /// Blob events in id order, followed by kill events in marker order.
    pub events: Vec<TrackEvent>,
    pub blobs: Vec<Blob>,
}

/// Which association scheme decided a frame with surplus markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Alive blobs first, then dead blobs against leftover markers.
    AliveFirst,
    /// One joint matching over alive and dead blobs.
    Joint,
}

#[derive(Debug, Clone)]
pub struct Registry {
    config: TrackerConfig,
    blobs: Vec<Blob>,
    last_t: Option<u64>,
    last_scheme: Option<Scheme>,
}

impl Registry {
    pub fn new(config: TrackerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Registry {
            blobs: (0..config.max_blobs).map(Blob::unseen).collect(),
            config,
            last_t: None,
            last_scheme: None,
        })
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn snapshot(&self) -> Vec<Blob> {
        self.blobs.clone()
    }

    pub fn blobs(&self) -> &[Blob] {
        &self.blobs
    }

    pub fn alive_count(&self) -> usize {
        self.blobs.iter().filter(|b| b.is_alive()).count()
    }

    /// Scheme chosen on the most recent frame that had surplus markers over
    /// the alive set (`None` if no such frame was processed yet).
    pub fn last_scheme(&self) -> Option<Scheme> {
        self.last_scheme
    }

    fn cost(&self, blob: usize, marker: &Point3) -> f64 {
        match self.blobs[blob].last_pos {
            Position::Observed(p) => crate::types::distance(&p, marker),
            Position::Unobserved => self.config.birth_cost,
        }
    }

    /// Matches `blobs` (registry indices) against `markers` (frame indices).
    /// Returns `(blob, marker)` pairs and the total cost.
    fn match_sets(
        &self,
        blobs: &[usize],
        markers: &[usize],
        frame: &[Point3],
    ) -> Result<(Vec<(usize, usize)>, f64)> {
        let cm = CostMatrix::from_fn(blobs.len(), markers.len(), |i, j| {
            self.cost(blobs[i], &frame[markers[j]])
        })?;
        let res = solve_assignment(&cm);
        let pairs = res
            .pairs
            .iter()
            .map(|&(i, j)| (blobs[i], markers[j]))
            .collect();
        Ok((pairs, res.total_cost))
    }

    /// Processes one frame.
    pub fn step(&mut self, frame: &MarkerFrame) -> Result<TrackUpdate> {
        if let Some(prev) = self.last_t {
            if frame.t <= prev {
                return Err(Error::input(format!(
                    "frame index {} does not follow {prev}",
                    frame.t
                )));
            }
        }
        if let Some(p) = frame.markers.iter().find(|p| !p.is_finite()) {
            return Err(Error::input(format!(
                "frame {}: non-finite marker {p:?}",
                frame.t
            )));
        }

        let all_blobs: Vec<usize> = (0..self.blobs.len()).collect();
        let mut markers: Vec<usize> = (0..frame.markers.len()).collect();
        let mut kills = Vec::new();

        if markers.len() > self.config.max_blobs {
            let (pairs, _) = self.match_sets(&all_blobs, &markers, &frame.markers)?;
            let mut kept: Vec<usize> = pairs.iter().map(|&(_, m)| m).collect();
            kept.sort_unstable();
            kills = markers
                .iter()
                .copied()
                .filter(|m| kept.binary_search(m).is_err())
                .collect();
            markers = kept;
        }

        let alive: Vec<usize> = all_blobs
            .iter()
            .copied()
            .filter(|&b| self.blobs[b].is_alive())
            .collect();
        let dormant: Vec<usize> = all_blobs
            .iter()
            .copied()
            .filter(|&b| !self.blobs[b].is_alive())
            .collect();

        let pairs = if markers.len() <= alive.len() {
            self.match_sets(&alive, &markers, &frame.markers)?.0
        } else {
            let (mut first, c1a) = self.match_sets(&alive, &markers, &frame.markers)?;
            let used: Vec<usize> = first.iter().map(|&(_, m)| m).collect();
            let leftover: Vec<usize> = markers
                .iter()
                .copied()
                .filter(|m| !used.contains(m))
                .collect();
            let (second, c1b) = self.match_sets(&dormant, &leftover, &frame.markers)?;
            first.extend(second);
            let c1 = c1a + c1b;

            let (joint, c2) = self.match_sets(&all_blobs, &markers, &frame.markers)?;
            if self.config.continuity_bias * c1 <= c2 {
                self.last_scheme = Some(Scheme::AliveFirst);
                first
            } else {
                self.last_scheme = Some(Scheme::Joint);
                joint
            }
        };

        let mut assigned: Vec<Option<usize>> = vec![None; self.blobs.len()];
        for (b, m) in pairs {
            assigned[b] = Some(m);
        }

        let mut events = Vec::new();
        for (blob, slot) in self.blobs.iter_mut().zip(&assigned) {
            match (blob.state, slot) {
                (BlobState::Alive, Some(m)) => {
                    let p = frame.markers[*m];
                    blob.last_pos = Position::Observed(p);
                    blob.last_seen_t = Some(frame.t);
                    events.push(TrackEvent {
                        id: blob.id,
                        action: Action::Living,
                        pos: Some(p),
                    });
                }
                (BlobState::Alive, None) => {
                    blob.state = BlobState::Dead;
                    events.push(TrackEvent {
                        id: blob.id,
                        action: Action::Death,
                        pos: None,
                    });
                }
                (BlobState::Dead | BlobState::Unseen, Some(m)) => {
                    let p = frame.markers[*m];
                    blob.state = BlobState::Alive;
                    blob.last_pos = Position::Observed(p);
                    blob.last_seen_t = Some(frame.t);
                    events.push(TrackEvent {
                        id: blob.id,
                        action: Action::Birth,
                        pos: Some(p),
                    });
                }
                (BlobState::Dead | BlobState::Unseen, None) => {}
            }
        }
        events.extend(kills.into_iter().map(|m| TrackEvent {
            id: m,
            action: Action::Kill,
            pos: Some(frame.markers[m]),
        }));

        self.last_t = Some(frame.t);
        Ok(TrackUpdate {
            t: frame.t,
            events,
            blobs: self.snapshot(),
        })
    }
}
