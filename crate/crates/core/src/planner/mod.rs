//! Maximum-causal-entropy planning on the product of a gridworld and a task
//! DFA, demonstration surprisal, and the energy that ranks candidate DFAs.
//!
//! The DFA reads a tile colour when the agent enters (or starts on) a
//! coloured cell whose colour differs from the last colour read; uncoloured
//! cells read nothing. A product state therefore carries the last colour
//! read alongside the DFA state.

use std::fmt;

use crate::automata::{size, Dfa, SizeKind};
use crate::world::{Action, Cell, Color, Demonstration, GridWorld};
use crate::Scalar;

pub const DEFAULT_ACCEPT_REWARD: f64 = 10.0;
pub const DEFAULT_LAMBDA: f64 = 0.7;
/// Default horizon is the longest demonstration plus this slack.
pub const DEFAULT_HORIZON_SLACK: usize = 8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("demonstration of {len} steps does not fit horizon {horizon}")]
    DemoTooLong { len: usize, horizon: usize },
    #[error("demonstration step {step} has probability zero under the policy")]
    ZeroProbability { step: usize },
    #[error("DFA alphabet is not the colour alphabet")]
    Alphabet,
    #[error("invalid demonstration: {0}")]
    Demo(#[from] crate::world::WorldError),
    #[error("lambda must be non-negative")]
    NegativeLambda,
}

/// Position in the product: cell, DFA state, last colour read and the
/// number of steps left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub cell: Cell,
    pub dfa_state: usize,
    pub last: Option<Color>,
    pub time: usize,
}

const NONE_SLOT: usize = 4;

fn color_slot(c: Option<Color>) -> usize {
    c.map_or(NONE_SLOT, |c| c as usize)
}

fn slot_color(i: usize) -> Option<Color> {
    Color::ALL.get(i).copied()
}

/// Soft-optimal policy for one (world, DFA, horizon, reward).
///
/// `values[t]` and `q[t]` are indexed by the flat product index; `q[0]` is
/// empty since no action is taken with zero steps left.
#[derive(Clone)]
pub struct SoftPolicy<T> {
    world: GridWorld,
    dfa: Dfa,
    horizon: usize,
    accept_reward: T,
    values: Vec<Vec<T>>,
    q: Vec<Vec<[T; 4]>>,
}

impl<T: Scalar> fmt::Debug for SoftPolicy<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SoftPolicy")
            .field("horizon", &self.horizon)
            .field("dfa_states", &self.dfa.num_states())
            .field("accept_reward", &self.accept_reward)
            .finish_non_exhaustive()
    }
}

pub(crate) fn logsumexp<T: Scalar>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<T>().ln()
}

/// Backward induction on the product, `horizon` steps deep. Terminal value
/// is `accept_reward` in accepting DFA states and 0 elsewhere.
pub fn soft_value_iteration<T: Scalar>(
    world: &GridWorld,
    dfa: &Dfa,
    horizon: usize,
    accept_reward: T,
) -> Result<SoftPolicy<T>, PlanError> {
    if horizon == 0 {
        return Err(PlanError::ZeroHorizon);
    }
    if dfa.alphabet().len() != Color::ALL.len() {
        return Err(PlanError::Alphabet);
    }
    let mut p = SoftPolicy {
        world: world.clone(),
        dfa: dfa.clone(),
        horizon,
        accept_reward,
        values: Vec::with_capacity(horizon + 1),
        q: Vec::with_capacity(horizon + 1),
    };
    let n = p.num_states();
    let terminal: Vec<T> = (0..n)
        .map(|i| {
            if p.dfa.is_accepting(p.decode(i).1) {
                accept_reward
            } else {
                T::zero()
            }
        })
        .collect();
    p.values.push(terminal);
    p.q.push(Vec::new());

    // successor lists do not depend on time
    let succ: Vec<[Vec<(usize, T)>; 4]> = (0..n)
        .map(|i| {
            let (cell, q, last) = p.decode(i);
            Action::ALL.map(|a| {
                world
                    .step_distribution(cell, a)
                    .into_iter()
                    .map(|(c, pr)| (p.register(c, q, last), T::of(pr)))
                    .collect()
            })
        })
        .collect();

    for _t in 1..=horizon {
        let prev = p.values.last().expect("terminal layer");
        let mut qs = Vec::with_capacity(n);
        let mut vs = Vec::with_capacity(n);
        for s in &succ {
            let row = [0, 1, 2, 3].map(|a| s[a].iter().map(|&(j, pr)| pr * prev[j]).sum::<T>());
            vs.push(logsumexp(&row));
            qs.push(row);
        }
        p.values.push(vs);
        p.q.push(qs);
    }
    Ok(p)
}

impl<T: Scalar> SoftPolicy<T> {
    fn num_states(&self) -> usize {
        self.world.num_cells() * self.dfa.num_states() * 5
    }

    fn encode(&self, cell: Cell, q: usize, last: Option<Color>) -> usize {
        (self.world.cell_index(cell) * self.dfa.num_states() + q) * 5 + color_slot(last)
    }

    fn decode(&self, i: usize) -> (Cell, usize, Option<Color>) {
        let slot = i % 5;
        let rest = i / 5;
        let m = self.dfa.num_states();
        (self.world.cell_at(rest / m), rest % m, slot_color(slot))
    }

    /// Product index after entering `cell` from DFA state `q` with `last`
    /// read most recently.
    fn register(&self, cell: Cell, q: usize, last: Option<Color>) -> usize {
        match self.world.color(cell) {
            Some(c) if Some(c) != last => self.encode(cell, self.dfa.next(q, c.symbol()), Some(c)),
            _ => self.encode(cell, q, last),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dfa(&self) -> &Dfa {
        &self.dfa
    }

    pub fn world(&self) -> &GridWorld {
        &self.world
    }

    pub fn accept_reward(&self) -> T {
        self.accept_reward
    }

    /// State at the start of an episode from `cell`: the start tile's
    /// colour is read, with the full horizon left.
    pub fn initial_state(&self, cell: Cell) -> ProductState {
        self.state_of(self.register(cell, self.dfa.initial(), None), self.horizon)
    }

    fn state_of(&self, i: usize, time: usize) -> ProductState {
        let (cell, dfa_state, last) = self.decode(i);
        ProductState {
            cell,
            dfa_state,
            last,
            time,
        }
    }

    fn index(&self, s: &ProductState) -> usize {
        self.encode(s.cell, s.dfa_state, s.last)
    }

    /// Product state reached when the agent lands on `cell`, one step later.
    pub fn advance(&self, s: &ProductState, cell: Cell) -> ProductState {
        self.state_of(self.register(cell, s.dfa_state, s.last), s.time.saturating_sub(1))
    }

    pub fn value(&self, s: &ProductState) -> T {
        self.values[s.time][self.index(s)]
    }

    /// Soft Q-values in [`Action::ALL`] order; `None` when no time is left.
    pub fn q_values(&self, s: &ProductState) -> Option<[T; 4]> {
        (s.time >= 1).then(|| self.q[s.time][self.index(s)])
    }

    /// π(·|s) in [`Action::ALL`] order; `None` when no time is left.
    pub fn action_probabilities(&self, s: &ProductState) -> Option<[T; 4]> {
        let v = self.value(s);
        self.q_values(s).map(|q| q.map(|x| (x - v).exp()))
    }

    pub fn log_prob(&self, s: &ProductState, a: Action) -> Option<T> {
        self.q_values(s).map(|q| q[a.index()] - self.value(s))
    }

    /// Product states reachable from `start` under any action sequence
    /// and dynamics outcome, with time at least 1.
    pub fn reachable_states(&self, start: Cell) -> Vec<ProductState> {
        let mut out = Vec::new();
        let mut layer = vec![self.initial_state(start)];
        while let Some(first) = layer.first() {
            if first.time == 0 {
                break;
            }
            let mut next = std::collections::BTreeSet::new();
            for s in &layer {
                for a in Action::ALL {
                    for (c, _) in self.world.step_distribution(s.cell, a) {
                        next.insert(self.advance(s, c));
                    }
                }
            }
            out.append(&mut layer);
            layer = next.into_iter().collect();
        }
        out
    }
}

/// −Σ log π(a_t | s_t) along the demonstration. Dynamics terms are left
/// out; they are the same for every DFA.
pub fn demo_nll<T: Scalar>(policy: &SoftPolicy<T>, world: &GridWorld, demo: &Demonstration) -> Result<T, PlanError> {
    demo.validate(world)?;
    if demo.len() > policy.horizon {
        return Err(PlanError::DemoTooLong {
            len: demo.len(),
            horizon: policy.horizon,
        });
    }
    let mut s = policy.initial_state(demo.start);
    let mut nll = T::zero();
    for (i, &(a, c)) in demo.steps.iter().enumerate() {
        let lp = policy.log_prob(&s, a).expect("time left");
        if !lp.is_finite() {
            return Err(PlanError::ZeroProbability { step: i + 1 });
        }
        nll = nll - lp;
        s = policy.advance(&s, c);
    }
    Ok(nll)
}

/// Planner knobs shared by every energy evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams<T> {
    pub lambda: T,
    /// `None` means longest demonstration plus [`DEFAULT_HORIZON_SLACK`].
    pub horizon: Option<usize>,
    pub accept_reward: T,
}

impl<T: Scalar> Default for EnergyParams<T> {
    fn default() -> Self {
        Self {
            lambda: T::of(DEFAULT_LAMBDA),
            horizon: None,
            accept_reward: T::of(DEFAULT_ACCEPT_REWARD),
        }
    }
}

impl<T: Scalar> EnergyParams<T> {
    pub fn horizon_for(&self, demos: &[Demonstration]) -> usize {
        self.horizon
            .unwrap_or_else(|| demos.iter().map(Demonstration::len).max().unwrap_or(0) + DEFAULT_HORIZON_SLACK)
    }
}

/// Surprisal of the demonstrations plus the size penalty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    pub nll: T,
    pub size_term: T,
    pub total: T,
    pub lambda: T,
}

impl<T: Scalar> EnergyReport<T> {
    pub const CSV_HEADER: &'static str = "iteration,candidate,nll,size_term,total";

    pub fn csv_row(&self, iteration: usize, candidate: usize) -> String {
        format!(
            "{iteration},{candidate},{:.9},{:.9},{:.9}",
            self.nll.as_f64(),
            self.size_term.as_f64(),
            self.total.as_f64()
        )
    }
}

/// Energy of `dfa`: planning happens on its minimal form, so
/// language-equivalent DFAs score identically.
pub fn energy<T: Scalar>(
    dfa: &Dfa,
    world: &GridWorld,
    demos: &[Demonstration],
    params: &EnergyParams<T>,
) -> Result<EnergyReport<T>, PlanError> {
    if params.lambda < T::zero() {
        return Err(PlanError::NegativeLambda);
    }
    let min = dfa.minimize();
    let policy = soft_value_iteration(world, &min, params.horizon_for(demos), params.accept_reward)?;
    let mut nll = T::zero();
    for d in demos {
        nll = nll + demo_nll(&policy, world, d)?;
    }
    let size_term = params.lambda * T::of(size(&min, SizeKind::StateCount).value);
    Ok(EnergyReport {
        nll,
        size_term,
        total: nll + size_term,
        lambda: params.lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{color_alphabet, ground_truth_dfa, load_world};

    #[test]
    fn single_cell_is_uniform() {
        let w = load_world(".").unwrap();
        let p = soft_value_iteration(&w, &Dfa::universal(color_alphabet()), 5, 10.0f64).unwrap();
        for s in p.reachable_states(Cell::new(0, 0)) {
            for x in p.action_probabilities(&s).unwrap() {
                assert!((x - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn empty_language_values_grow_by_log4() {
        let w = load_world("..").unwrap();
        let p = soft_value_iteration(&w, &Dfa::empty(color_alphabet()), 6, 10.0).unwrap();
        let mut s = p.initial_state(Cell::new(0, 0));
        for t in (0..=6).rev() {
            s.time = t;
            assert!((p.value(&s) - t as f64 * 4f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_policy_nll() {
        let w = load_world("...\n...").unwrap();
        let p = soft_value_iteration(&w, &Dfa::universal(color_alphabet()), 4, 10.0).unwrap();
        let d = Demonstration::from_actions(&w, Cell::new(0, 0), &[Action::Right, Action::Down, Action::Left]).unwrap();
        assert!((demo_nll(&p, &w, &d).unwrap() - 3.0 * 4f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let w = load_world("..").unwrap();
        let gt = ground_truth_dfa();
        assert_eq!(soft_value_iteration::<f64>(&w, &gt, 0, 1.0).unwrap_err(), PlanError::ZeroHorizon);
        let p = soft_value_iteration::<f64>(&w, &gt, 1, 1.0).unwrap();
        let d = Demonstration::from_actions(&w, Cell::new(0, 0), &[Action::Right, Action::Left]).unwrap();
        assert!(matches!(demo_nll(&p, &w, &d), Err(PlanError::DemoTooLong { len: 2, horizon: 1 })));
        let bad = EnergyParams {
            lambda: -1.0,
            ..Default::default()
        };
        assert_eq!(energy(&gt, &w, &[d], &bad).unwrap_err(), PlanError::NegativeLambda);
    }

    #[test]
    fn lambda_zero_total_is_nll() {
        let w = load_world("b.gy").unwrap();
        let d = Demonstration::from_actions(&w, Cell::new(0, 0), &[Action::Right; 3]).unwrap();
        let params = EnergyParams {
            lambda: 0.0,
            ..Default::default()
        };
        let r = energy(&ground_truth_dfa(), &w, &[d], &params).unwrap();
        assert_eq!(r.total, r.nll);
        assert_eq!(r.size_term, 0.0);
    }

    #[test]
    fn generic_over_f32() {
        let w = load_world("b.gy").unwrap();
        let d = Demonstration::from_actions(&w, Cell::new(0, 0), &[Action::Right; 3]).unwrap();
        let r32 = energy::<f32>(&ground_truth_dfa(), &w, &[d.clone()], &EnergyParams::default()).unwrap();
        let r64 = energy::<f64>(&ground_truth_dfa(), &w, &[d], &EnergyParams::default()).unwrap();
        assert!((r32.total as f64 - r64.total).abs() < 1e-3);
    }
}
