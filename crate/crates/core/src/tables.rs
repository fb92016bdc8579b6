//! Dense value containers indexed by (timestep, state, actions).

use serde::{Deserialize, Serialize};

use crate::game::GameDims;

/// State-action value table, one `A x B` matrix per (h, s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub horizon: usize,
    pub num_states: usize,
    pub num_actions_max: usize,
    pub num_actions_min: usize,
    /// Row-major over (h, s, a, b).
    pub data: Vec<f64>,
}

impl QTable {
    pub fn zeros(dims: &GameDims) -> Self {
        QTable {
            horizon: dims.horizon,
            num_states: dims.num_states,
            num_actions_max: dims.num_actions_max,
            num_actions_min: dims.num_actions_min,
            data: vec![0.0; dims.horizon * dims.num_states * dims.num_actions_max * dims.num_actions_min],
        }
    }

    #[inline]
    pub fn index(&self, h: usize, s: usize, a: usize, b: usize) -> usize {
        ((h * self.num_states + s) * self.num_actions_max + a) * self.num_actions_min + b
    }

    #[inline]
    pub fn get(&self, h: usize, s: usize, a: usize, b: usize) -> f64 {
        self.data[self.index(h, s, a, b)]
    }

    #[inline]
    pub fn set(&mut self, h: usize, s: usize, a: usize, b: usize, v: f64) {
        let i = self.index(h, s, a, b);
        self.data[i] = v;
    }

    /// The `A x B` slice for one (h, s), row-major in `a`.
    pub fn state_slice(&self, h: usize, s: usize) -> &[f64] {
        let lo = self.index(h, s, 0, 0);
        &self.data[lo..lo + self.num_actions_max * self.num_actions_min]
    }
}

/// Per-timestep state values, with the terminal row `V_H = 0` stored so
/// backward recursions can read `h + 1` uniformly. Optionally carries the
/// state-action table it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTables {
    pub horizon: usize,
    pub num_states: usize,
    /// Row-major over (h, s) with h in 0..=horizon.
    pub values: Vec<f64>,
    pub action_values: Option<QTable>,
}

impl ValueTables {
    pub fn zeros(dims: &GameDims) -> Self {
        ValueTables {
            horizon: dims.horizon,
            num_states: dims.num_states,
            values: vec![0.0; (dims.horizon + 1) * dims.num_states],
            action_values: None,
        }
    }

    #[inline]
    pub fn v(&self, h: usize, s: usize) -> f64 {
        self.values[h * self.num_states + s]
    }

    #[inline]
    pub fn set_v(&mut self, h: usize, s: usize, v: f64) {
        self.values[h * self.num_states + s] = v;
    }

    /// Value row at timestep `h` (valid for h in 0..=horizon).
    pub fn stage(&self, h: usize) -> &[f64] {
        &self.values[h * self.num_states..(h + 1) * self.num_states]
    }

    /// Value at the initial state of the first timestep.
    pub fn at_start(&self, initial_state: usize) -> f64 {
        self.v(0, initial_state)
    }
}
