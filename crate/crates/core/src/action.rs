//! The ten adaptation actions and their service bindings.

use core::fmt;

use serde::{Deserialize, Serialize};

pub const ACTION_COUNT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptationAction {
    NoOp,
    ScaleOut,
    ScaleIn,
    ScaleUpCpu,
    ScaleDownCpu,
    ScaleUpMem,
    ScaleDownMem,
    ComposeSplit,
    ComposeMerge,
    AutoRecover,
}

impl AdaptationAction {
    pub const ALL: [AdaptationAction; ACTION_COUNT] = [
        AdaptationAction::NoOp,
        AdaptationAction::ScaleOut,
        AdaptationAction::ScaleIn,
        AdaptationAction::ScaleUpCpu,
        AdaptationAction::ScaleDownCpu,
        AdaptationAction::ScaleUpMem,
        AdaptationAction::ScaleDownMem,
        AdaptationAction::ComposeSplit,
        AdaptationAction::ComposeMerge,
        AdaptationAction::AutoRecover,
    ];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            AdaptationAction::NoOp => "no_op",
            AdaptationAction::ScaleOut => "scale_out",
            AdaptationAction::ScaleIn => "scale_in",
            AdaptationAction::ScaleUpCpu => "scale_up_cpu",
            AdaptationAction::ScaleDownCpu => "scale_down_cpu",
            AdaptationAction::ScaleUpMem => "scale_up_mem",
            AdaptationAction::ScaleDownMem => "scale_down_mem",
            AdaptationAction::ComposeSplit => "compose_split",
            AdaptationAction::ComposeMerge => "compose_merge",
            AdaptationAction::AutoRecover => "auto_recover",
        }
    }

    /// Whether the action targets a single service.
    pub fn is_service_action(self) -> bool {
        !matches!(self, AdaptationAction::NoOp | AdaptationAction::AutoRecover)
    }
}

impl fmt::Display for AdaptationAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which service each service-level action operates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActionBindings {
    pub scale_out: usize,
    pub scale_in: usize,
    pub scale_up_cpu: usize,
    pub scale_down_cpu: usize,
    pub scale_up_mem: usize,
    pub scale_down_mem: usize,
    pub compose_split: usize,
    pub compose_merge: usize,
}

impl Default for ActionBindings {
    /// Horizontal scaling and composition act on service 0 and CPU limits on
    /// service 1; the memory actions are split across both.
    fn default() -> Self {
        Self {
            scale_out: 0,
            scale_in: 0,
            scale_up_cpu: 1,
            scale_down_cpu: 1,
            scale_up_mem: 0,
            scale_down_mem: 1,
            compose_split: 0,
            compose_merge: 0,
        }
    }
}

impl ActionBindings {
    pub fn service(&self, action: AdaptationAction) -> Option<usize> {
        match action {
            AdaptationAction::NoOp | AdaptationAction::AutoRecover => None,
            AdaptationAction::ScaleOut => Some(self.scale_out),
            AdaptationAction::ScaleIn => Some(self.scale_in),
            AdaptationAction::ScaleUpCpu => Some(self.scale_up_cpu),
            AdaptationAction::ScaleDownCpu => Some(self.scale_down_cpu),
            AdaptationAction::ScaleUpMem => Some(self.scale_up_mem),
            AdaptationAction::ScaleDownMem => Some(self.scale_down_mem),
            AdaptationAction::ComposeSplit => Some(self.compose_split),
            AdaptationAction::ComposeMerge => Some(self.compose_merge),
        }
    }

    pub fn max_service(&self) -> usize {
        [
            self.scale_out,
            self.scale_in,
            self.scale_up_cpu,
            self.scale_down_cpu,
            self.scale_up_mem,
            self.scale_down_mem,
            self.compose_split,
            self.compose_merge,
        ]
        .into_iter()
        .max()
        .unwrap_or(0)
    }
}

/// Simulated seconds charged for each action.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DurationTable {
    pub no_op: f64,
    pub horizontal: f64,
    pub vertical: f64,
    pub compose: f64,
    pub recover: f64,
}

impl Default for DurationTable {
    fn default() -> Self {
        Self { no_op: 1.0, horizontal: 5.0, vertical: 3.0, compose: 8.0, recover: 10.0 }
    }
}

impl DurationTable {
    pub fn duration(&self, action: AdaptationAction) -> f64 {
        use AdaptationAction::*;
        match action {
            NoOp => self.no_op,
            ScaleOut | ScaleIn => self.horizontal,
            ScaleUpCpu | ScaleDownCpu | ScaleUpMem | ScaleDownMem => self.vertical,
            ComposeSplit | ComposeMerge => self.compose,
            AutoRecover => self.recover,
        }
    }
}
