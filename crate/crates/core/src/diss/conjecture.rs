use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::Rng;

use super::{DissError, ExampleBuffer};
use crate::automata::{Dfa, Word};
use crate::identify::{minimal_dfa, IdentifyError, LabeledExamples};
use crate::planner::{energy, soft_value_iteration, EnergyParams, ProductState, SoftPolicy};
use crate::world::{featurize_cells, Action, Cell, Demonstration, GridWorld};
use crate::Scalar;

/// Proposed label for a word, with the surrogate score that ranked it.
#[derive(Clone, Debug, PartialEq)]
pub struct Flip<T> {
    pub word: Word,
    pub label: bool,
    pub score: T,
}

/// Outcome of one conjecture step.
#[derive(Clone, Debug)]
pub struct Conjecture<T> {
    pub examples: LabeledExamples,
    pub flip: Option<Flip<T>>,
    pub explored: bool,
    /// Exact energies of the re-planned top flips, in rank order.
    pub replanned: Vec<(Flip<T>, T)>,
}

#[derive(Clone, Copy, Debug)]
pub struct ConjectureParams<T> {
    pub energy: EnergyParams<T>,
    /// Surrogate-ranked flips re-scored by identification and re-planning.
    pub top_k: usize,
    /// Probability of a uniformly random flip instead of the best one.
    pub explore_probability: T,
    pub max_states: usize,
}

/// Greedy continuation under intended moves until the candidate accepts or
/// time runs out. Returns the visited cells, `from` excluded.
fn rollout<T: Scalar>(policy: &SoftPolicy<T>, mut s: ProductState) -> Vec<Cell> {
    let mut cells = Vec::new();
    while !policy.dfa().is_accepting(s.dfa_state) {
        let Some(q) = policy.q_values(&s) else { break };
        let mut best = 0;
        for a in 1..4 {
            if q[a] > q[best] {
                best = a;
            }
        }
        let next = policy.world().intended(s.cell, Action::ALL[best]);
        cells.push(next);
        s = policy.advance(&s, next);
    }
    cells
}

fn better<T: Scalar>(a: &Flip<T>, b: &Flip<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.word.length_lex_cmp(&b.word))
        .then_with(|| a.label.cmp(&b.label))
}

/// Relabelling candidates drawn from the demonstrations, best first.
///
/// Regret at step j is `max_a Q(s_j, a) - Q(s_j, a_j)`. Words and scores:
/// - a one-step deviation from the demonstration followed by the greedy
///   continuation, when accepted, may become negative; score is how much
///   the candidate prefers the deviation over the demonstrated action;
/// - the demonstration's own word and the greedy completions of its
///   prefixes, when rejected, may become positive; score is the regret
///   accumulated up to there;
/// - a greedy completion, when accepted, may become negative; score is the
///   regret at the step it starts from.
///
/// Ties go to the shorter word, then the canonical order.
pub fn candidate_flips<T: Scalar>(
    candidate: &Dfa,
    world: &GridWorld,
    demos: &[Demonstration],
    policy: &SoftPolicy<T>,
) -> Result<Vec<Flip<T>>, DissError> {
    let mut pool: BTreeMap<(Word, bool), T> = BTreeMap::new();
    let mut offer = |word: Word, label: bool, score: T| {
        let e = pool.entry((word, label)).or_insert(score);
        if score > *e {
            *e = score;
        }
    };
    for demo in demos {
        demo.validate(world)?;
        let mut s = policy.initial_state(demo.start);
        let mut prefix = vec![demo.start];
        let mut regret_before = T::zero();
        for &(a, next) in &demo.steps {
            let q = policy.q_values(&s).ok_or(DissError::HorizonTooShort)?;
            let qa = q[a.index()];
            let qmax = q.iter().copied().fold(T::neg_infinity(), T::max);

            let mut completion = prefix.clone();
            completion.extend(rollout(policy, s));
            let w = featurize_cells(world, completion)?;
            if candidate.accepts(&w) {
                offer(w, false, qmax - qa);
            } else {
                offer(w, true, regret_before);
            }

            for alt in Action::ALL {
                let cell = world.intended(s.cell, alt);
                if alt == a || cell == world.intended(s.cell, a) {
                    continue;
                }
                let mut path = prefix.clone();
                path.push(cell);
                path.extend(rollout(policy, policy.advance(&s, cell)));
                let w = featurize_cells(world, path)?;
                if candidate.accepts(&w) {
                    offer(w, false, q[alt.index()] - qa);
                }
            }

            regret_before = regret_before + (qmax - qa);
            s = policy.advance(&s, next);
            prefix.push(next);
        }
        let w = featurize_cells(world, prefix)?;
        if !candidate.accepts(&w) {
            offer(w, true, regret_before);
        }
    }
    let mut flips: Vec<Flip<T>> = pool
        .into_iter()
        .map(|((word, label), score)| Flip { word, label, score })
        .collect();
    flips.sort_by(better);
    Ok(flips)
}

/// Proposes the next example hypothesis from `buffer`'s current examples.
///
/// The top `top_k` surrogate flips, plus any tied with the last of them,
/// are each scored exactly (smallest DFA consistent with the flipped
/// examples, then its energy); the best one is
/// applied only if it beats the candidate's own energy. With probability
/// `explore_probability` a uniformly random flip is applied instead. Flips
/// that contradict the buffer's protected labels are never proposed.
pub fn conjecture_examples<T: Scalar, R: Rng + ?Sized>(
    candidate: &Dfa,
    world: &GridWorld,
    demos: &[Demonstration],
    buffer: &ExampleBuffer<T>,
    params: &ConjectureParams<T>,
    rng: &mut R,
) -> Result<Conjecture<T>, DissError> {
    let min = candidate.minimize();
    let horizon = params.energy.horizon_for(demos);
    let policy = soft_value_iteration(world, &min, horizon, params.energy.accept_reward)?;
    let flips: Vec<Flip<T>> = candidate_flips(&min, world, demos, &policy)?
        .into_iter()
        .filter(|f| buffer.protected().label(&f.word) != Some(!f.label))
        .collect();
    let mut out = Conjecture {
        examples: buffer.current().clone(),
        flip: None,
        explored: false,
        replanned: Vec::new(),
    };
    if flips.is_empty() {
        return Ok(out);
    }
    let p = params.explore_probability.as_f64().clamp(0.0, 1.0);
    if p > 0.0 && rng.gen_bool(p) {
        let f = flips[rng.gen_range(0..flips.len())].clone();
        out.examples.relabel(f.word.clone(), f.label);
        out.flip = Some(f);
        out.explored = true;
        return Ok(out);
    }

    let base = energy(&min, world, demos, &params.energy)?.total;
    let mut best: Option<(Flip<T>, T)> = None;
    let k = params.top_k.max(1).min(flips.len());
    let cut = flips[k - 1].score;
    let shortlist = flips.iter().take_while(|f| f.score >= cut).count().max(k);
    for f in flips.into_iter().take(shortlist) {
        let mut ex = buffer.current().clone();
        ex.relabel(f.word.clone(), f.label);
        let dfa = match minimal_dfa(&ex, params.max_states) {
            Ok(d) => d,
            Err(IdentifyError::BoundExceeded { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let e = energy(&dfa, world, demos, &params.energy)?.total;
        out.replanned.push((f.clone(), e));
        if best.as_ref().is_none_or(|(_, b)| e < *b) {
            best = Some((f, e));
        }
    }
    if let Some((f, e)) = best {
        if e < base {
            out.examples.relabel(f.word.clone(), f.label);
            out.flip = Some(f);
        }
    }
    Ok(out)
}
