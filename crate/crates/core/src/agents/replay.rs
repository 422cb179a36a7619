use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;

use crate::rng::SimRng;

/// One step of experience. `done` marks a true terminal state; an episode cut
/// short by the step limit is not terminal and still bootstraps.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub s: Vec<f64>,
    pub a: usize,
    pub r: f64,
    pub s_next: Vec<f64>,
    pub done: bool,
    /// Continuous action vector, stored by DDPG.
    pub preference: Option<Vec<f64>>,
}

/// Bounded FIFO of transitions with uniform sampling.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), items: VecDeque::new() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }

    /// `batch` distinct transitions, or `None` when fewer are stored.
    pub fn sample(&self, batch: usize, rng: &mut SimRng) -> Option<Vec<&Transition>> {
        if batch == 0 || batch > self.items.len() {
            return None;
        }
        Some(index::sample(rng, self.items.len(), batch).into_iter().map(|i| &self.items[i]).collect())
    }
}

/// A length-L slice of one episode ending at `end`. Slots before the episode
/// start are padding: `mask[k]` is false and the frame is all zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct Window {
    pub frames: Vec<Vec<f64>>,
    /// Frames shifted one step forward, ending in `s′` of the last transition.
    pub next_frames: Vec<Vec<f64>>,
    pub mask: Vec<bool>,
    pub action: usize,
    pub reward: f64,
    pub done: bool,
    /// Index in the episode of the first unpadded transition.
    pub start: usize,
}

impl Window {
    pub fn pad(&self) -> usize {
        self.mask.iter().filter(|m| !**m).count()
    }

    /// Unpadded frames only.
    pub fn real_frames(&self) -> &[Vec<f64>] {
        &self.frames[self.pad()..]
    }

    pub fn real_next_frames(&self) -> &[Vec<f64>] {
        // The shifted window has one more real frame unless already full.
        let pad = self.pad().saturating_sub(1);
        &self.next_frames[pad..]
    }
}

/// Builds the window of `len` steps of `episode` ending at transition `end`.
pub fn window_at(episode: &[Transition], end: usize, len: usize) -> Window {
    let width = episode[end].s.len();
    let start = (end + 1).saturating_sub(len);
    let pad = len - (end + 1 - start);
    let mut frames = vec![vec![0.0; width]; pad];
    let mut mask = vec![false; pad];
    for t in &episode[start..=end] {
        frames.push(t.s.clone());
        mask.push(true);
    }
    let mut next_frames: Vec<Vec<f64>> = frames[1..].to_vec();
    next_frames.push(episode[end].s_next.clone());
    let last = &episode[end];
    Window { frames, next_frames, mask, action: last.a, reward: last.r, done: last.done, start }
}

/// Completed episodes kept for sequence sampling, evicting whole episodes
/// once more than `capacity` transitions are stored.
#[derive(Clone, Debug)]
pub struct EpisodeReplay {
    capacity: usize,
    episodes: VecDeque<Vec<Transition>>,
    total: usize,
}

impl EpisodeReplay {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), episodes: VecDeque::new(), total: 0 }
    }

    pub fn push_episode(&mut self, episode: Vec<Transition>) {
        if episode.is_empty() {
            return;
        }
        self.total += episode.len();
        self.episodes.push_back(episode);
        while self.total > self.capacity && self.episodes.len() > 1 {
            if let Some(old) = self.episodes.pop_front() {
                self.total -= old.len();
            }
        }
    }

    pub fn transitions(&self) -> usize {
        self.total
    }

    pub fn episodes(&self) -> impl Iterator<Item = &[Transition]> {
        self.episodes.iter().map(Vec::as_slice)
    }

    /// Samples `batch` windows of length `len`. Each window ends at a
    /// transition drawn uniformly from everything stored, so every step is
    /// trained on equally often; early steps get left padding.
    pub fn sample_sequences(&self, batch: usize, len: usize, rng: &mut SimRng) -> Option<Vec<Window>> {
        if self.total == 0 || batch == 0 || len == 0 {
            return None;
        }
        let mut out = Vec::with_capacity(batch);
        for _ in 0..batch {
            let mut k = rng.random_range(0..self.total);
            for ep in &self.episodes {
                if k < ep.len() {
                    out.push(window_at(ep, k, len));
                    break;
                }
                k -= ep.len();
            }
        }
        Some(out)
    }
}
