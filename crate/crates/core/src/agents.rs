//! Learning which λ to use at each planning step.
//!
//! The planning problem is an episodic MDP: the state is the set of chosen
//! views, an action picks a λ from a fixed finite set, the transition adds
//! the next-best view for that λ, and every transition costs a reward of -1
//! (no discounting). SARSA and Watkins-Q learn action values `q(s, λ)` from
//! the state bits concatenated with a one-hot λ; TD learns state values
//! `v(s)` from the state bits alone. All three use a one-hidden-layer
//! sigmoid network and accumulating eligibility traces.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::planner::{check_rcc, is_terminal, nbv, CoverageState, Plan};
use crate::value_net::{encode, NetworkConfig, TraceVector, ValueNetwork};
use crate::visibility::CoverageTable;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Sarsa,
    WatkinsQ,
    Td,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Sarsa, Algorithm::WatkinsQ, Algorithm::Td];

    pub fn tag(self) -> u8 {
        match self {
            Algorithm::Sarsa => 0,
            Algorithm::WatkinsQ => 1,
            Algorithm::Td => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sarsa => "sarsa",
            Algorithm::WatkinsQ => "watkins-q",
            Algorithm::Td => "td",
        }
    }

    /// Action-value learners take the one-hot λ as extra input.
    pub fn uses_action_input(self) -> bool {
        !matches!(self, Algorithm::Td)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sarsa" => Ok(Algorithm::Sarsa),
            "watkins-q" | "watkins_q" | "q" => Ok(Algorithm::WatkinsQ),
            "td" => Ok(Algorithm::Td),
            other => Err(Error::input(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub algorithm: Algorithm,
    pub lambda_set: Vec<f64>,
    pub alpha: f64,
    pub mu_e: f64,
    pub max_episodes: usize,
    pub rcc: f64,
    /// Exploration probability while `episode < epsilon_episodes` (Watkins-Q only).
    pub epsilon: f64,
    pub epsilon_episodes: usize,
    /// Always 1: the task is episodic and undiscounted.
    pub gamma: f64,
    pub seed: u64,
    pub hidden: usize,
    pub init_scale: f64,
    /// Run the greedy policy every this many episodes and log its plan
    /// length; 0 disables.
    pub eval_every: usize,
}

impl TrainConfig {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        TrainConfig {
            algorithm,
            lambda_set: vec![0.0, 1.0],
            alpha: 0.01,
            mu_e: 0.5,
            max_episodes: 100_000,
            rcc: 1.0,
            epsilon: 0.1,
            epsilon_episodes: 50_000,
            gamma: 1.0,
            seed,
            hidden: NetworkConfig::DEFAULT_HIDDEN,
            init_scale: NetworkConfig::DEFAULT_INIT_SCALE,
            eval_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda_set.is_empty()
            || self
                .lambda_set
                .iter()
                .any(|l| !(l.is_finite() && *l >= 0.0))
        {
            return Err(Error::input(
                "lambda set must be nonempty with finite values >= 0",
            ));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::input(format!(
                "learning rate must be positive, got {}",
                self.alpha
            )));
        }
        if !(0.0..=1.0).contains(&self.mu_e) {
            return Err(Error::input(format!(
                "eligibility factor must lie in [0, 1], got {}",
                self.mu_e
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::input(format!(
                "epsilon must lie in [0, 1], got {}",
                self.epsilon
            )));
        }
        if self.gamma != 1.0 {
            return Err(Error::input("discount factor is fixed at 1"));
        }
        if self.hidden == 0 {
            return Err(Error::input("hidden layer needs at least one unit"));
        }
        check_rcc(self.rcc)
    }

    pub fn input_dim(&self, views: usize) -> usize {
        if self.algorithm.uses_action_input() {
            views + self.lambda_set.len()
        } else {
            views
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// Number of state transitions (views added after the random start).
    pub length: usize,
    #[serde(rename = "return")]
    pub ret: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub episode: usize,
    pub plan_length: usize,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub network: ValueNetwork,
    pub config: TrainConfig,
    pub episode_log: Vec<EpisodeRecord>,
    pub eval_log: Vec<EvalPoint>,
    pub mesh_digest: u64,
    pub table_digest: u64,
}

/// What a training loop reports after each transition.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub episode: usize,
    /// Transitions so far in this episode.
    pub step: usize,
    /// λ index chosen for the next transition (Q learners), or taken (TD).
    pub action: usize,
    pub exploratory: bool,
    /// Trace after its decay or reset for the next step.
    pub trace: &'a TraceVector,
}

/// Deterministic transition model with memoized next-best-view lookups.
struct Env<'a> {
    table: &'a CoverageTable,
    lambdas: Vec<f64>,
    rcc: f64,
    next: HashMap<(FixedBitSet, usize), Option<usize>>,
    terminal: HashMap<FixedBitSet, bool>,
}

impl<'a> Env<'a> {
    fn new(table: &'a CoverageTable, lambdas: &[f64], rcc: f64) -> Self {
        Env {
            table,
            lambdas: lambdas.to_vec(),
            rcc,
            next: HashMap::new(),
            terminal: HashMap::new(),
        }
    }

    fn state(&self, chosen: &FixedBitSet) -> Result<CoverageState> {
        CoverageState::from_views(self.table, &chosen.ones().collect::<Vec<_>>())
    }

    fn is_terminal(&mut self, chosen: &FixedBitSet) -> Result<bool> {
        if let Some(&t) = self.terminal.get(chosen) {
            return Ok(t);
        }
        let t = is_terminal(&self.state(chosen)?, self.table, self.rcc);
        self.terminal.insert(chosen.clone(), t);
        Ok(t)
    }

    fn next_view(&mut self, chosen: &FixedBitSet, action: usize) -> Result<Option<usize>> {
        let key = (chosen.clone(), action);
        if let Some(&v) = self.next.get(&key) {
            return Ok(v);
        }
        let v = nbv(&self.state(chosen)?, self.table, self.lambdas[action])?;
        self.next.insert(key, v);
        Ok(v)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn q_values(net: &ValueNetwork, chosen: &FixedBitSet, actions: usize) -> Result<Vec<f64>> {
    (0..actions)
        .map(|a| net.forward(&encode(chosen, Some(a), actions)?))
        .collect()
}

fn state_value(net: &ValueNetwork, chosen: &FixedBitSet) -> Result<f64> {
    net.forward(&encode(chosen, None, 0)?)
}

fn with_view(chosen: &FixedBitSet, v: usize) -> FixedBitSet {
    let mut s = chosen.clone();
    s.insert(v);
    s
}

struct Trainer<'a, 'o> {
    env: Env<'a>,
    config: &'a TrainConfig,
    net: ValueNetwork,
    trace: TraceVector,
    rng: ChaCha8Rng,
    log: Vec<EpisodeRecord>,
    eval_log: Vec<EvalPoint>,
    observer: Option<&'o mut dyn FnMut(&StepEvent)>,
}

impl Trainer<'_, '_> {
    fn update(&mut self, delta: f64, episode: usize) -> Result<()> {
        self.net
            .apply_update(&self.trace, delta, self.config.alpha)
            .map_err(|e| match e {
                Error::NonFiniteParameter => Error::NonFinite { episode },
                other => other,
            })
    }

    fn notify(&mut self, episode: usize, step: usize, action: usize, exploratory: bool) {
        if let Some(obs) = self.observer.as_mut() {
            obs(&StepEvent {
                episode,
                step,
                action,
                exploratory,
                trace: &self.trace,
            });
        }
    }

    fn record(&mut self, episode: usize, length: usize, ret: f64) -> Result<()> {
        assert_eq!(
            ret,
            -(length as f64),
            "episode return must equal minus its transition count"
        );
        debug_assert!(length <= self.env.table.view_count());
        self.log.push(EpisodeRecord { length, ret });
        let every = self.config.eval_every;
        if every > 0 && (episode + 1).is_multiple_of(every) {
            let plan = policy_plan(&self.net, self.config.algorithm, &mut self.env)?;
            self.eval_log.push(EvalPoint {
                episode: episode + 1,
                plan_length: plan.len(),
                complete: plan.complete,
            });
        }
        Ok(())
    }

    /// ε-greedy over `q(s, ·)`; the flag reports a random (exploratory) pick.
    fn choose(
        &mut self,
        chosen: &FixedBitSet,
        episode: usize,
        explore: bool,
    ) -> Result<(usize, bool)> {
        let actions = self.config.lambda_set.len();
        let eps = self.config.epsilon;
        if explore
            && eps > 0.0
            && episode < self.config.epsilon_episodes
            && self.rng.random::<f64>() <= eps
        {
            return Ok((self.rng.random_range(0..actions), true));
        }
        Ok((argmax(&q_values(&self.net, chosen, actions)?), false))
    }

    fn start(&mut self) -> FixedBitSet {
        let n = self.env.table.view_count();
        let mut chosen = FixedBitSet::with_capacity(n);
        chosen.insert(self.rng.random_range(0..n));
        self.trace.reset();
        chosen
    }

    /// Watkins-Q (`off_policy`) and SARSA share everything but the bootstrap
    /// target and the trace handling after exploratory actions.
    fn q_episode(&mut self, episode: usize, off_policy: bool) -> Result<()> {
        let actions = self.config.lambda_set.len();
        let reward = -1.0;
        let mut chosen = self.start();
        let (mut action, _) = self.choose(&chosen, episode, off_policy)?;
        let (mut length, mut ret) = (0usize, 0.0);
        loop {
            let x = encode(&chosen, Some(action), actions)?;
            let q = self.net.accumulate_gradient(&x, &mut self.trace)?;
            let mut delta = reward - q;
            if self.env.is_terminal(&chosen)? {
                self.update(delta, episode)?;
                break;
            }
            let Some(view) = self.env.next_view(&chosen, action)? else {
                log::warn!("episode {episode}: no view adds coverage before the criterion is met");
                self.update(delta, episode)?;
                break;
            };
            chosen.insert(view);
            length += 1;
            ret += reward;

            let next_q = q_values(&self.net, &chosen, actions)?;
            let (next_action, exploratory) = if off_policy {
                let greedy = argmax(&next_q);
                delta += next_q[greedy];
                self.choose(&chosen, episode, true)?
            } else {
                let a = argmax(&next_q);
                delta += next_q[a];
                (a, false)
            };
            self.update(delta, episode)?;
            if exploratory {
                self.trace.reset();
            } else {
                self.trace.decay(self.config.mu_e);
            }
            action = next_action;
            self.notify(episode, length, action, exploratory);
        }
        self.record(episode, length, ret)
    }

    fn td_episode(&mut self, episode: usize) -> Result<()> {
        let reward = -1.0;
        let mut chosen = self.start();
        let (mut length, mut ret) = (0usize, 0.0);
        loop {
            let x = encode(&chosen, None, 0)?;
            let v = self.net.accumulate_gradient(&x, &mut self.trace)?;
            let mut delta = reward - v;
            if self.env.is_terminal(&chosen)? {
                self.update(delta, episode)?;
                break;
            }
            let Some((action, next, next_v)) = best_successor(&self.net, &mut self.env, &chosen)?
            else {
                log::warn!("episode {episode}: no view adds coverage before the criterion is met");
                self.update(delta, episode)?;
                break;
            };
            chosen = next;
            length += 1;
            ret += reward;
            delta += next_v;
            self.update(delta, episode)?;
            self.trace.decay(self.config.mu_e);
            self.notify(episode, length, action, false);
        }
        self.record(episode, length, ret)
    }
}

/// Successor `s ∪ {NBV(λ)}` with the highest estimated value, over all λ.
fn best_successor(
    net: &ValueNetwork,
    env: &mut Env,
    chosen: &FixedBitSet,
) -> Result<Option<(usize, FixedBitSet, f64)>> {
    let mut best: Option<(usize, FixedBitSet, f64)> = None;
    for a in 0..env.lambdas.len() {
        let Some(v) = env.next_view(chosen, a)? else {
            continue;
        };
        let next = with_view(chosen, v);
        let value = state_value(net, &next)?;
        if best.as_ref().is_none_or(|(_, _, b)| value > *b) {
            best = Some((a, next, value));
        }
    }
    Ok(best)
}

/// Trains the agent selected by `config.algorithm`.
pub fn train(table: &CoverageTable, config: &TrainConfig) -> Result<TrainedModel> {
    train_observed(table, config, None)
}

/// Like [`train`], calling `observer` after every transition.
pub fn train_observed(
    table: &CoverageTable,
    config: &TrainConfig,
    observer: Option<&mut dyn FnMut(&StepEvent)>,
) -> Result<TrainedModel> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let net_config = NetworkConfig {
        input_dim: config.input_dim(table.view_count()),
        hidden: config.hidden,
        init_scale: config.init_scale,
        seed: config.seed,
    };
    let net = ValueNetwork::init_with(&net_config, &mut rng)?;
    let trace = TraceVector::for_network(&net);
    let mut trainer = Trainer {
        env: Env::new(table, &config.lambda_set, config.rcc),
        config,
        net,
        trace,
        rng,
        log: Vec::with_capacity(config.max_episodes),
        eval_log: Vec::new(),
        observer,
    };
    for episode in 0..config.max_episodes {
        match config.algorithm {
            Algorithm::WatkinsQ => trainer.q_episode(episode, true)?,
            Algorithm::Sarsa => trainer.q_episode(episode, false)?,
            Algorithm::Td => trainer.td_episode(episode)?,
        }
    }
    Ok(TrainedModel {
        network: trainer.net,
        config: config.clone(),
        episode_log: trainer.log,
        eval_log: trainer.eval_log,
        mesh_digest: table.mesh_digest(),
        table_digest: table.digest(),
    })
}

fn expect_algorithm(config: &TrainConfig, algorithm: Algorithm) -> Result<()> {
    if config.algorithm == algorithm {
        Ok(())
    } else {
        Err(Error::input(format!(
            "config is for {}, not {algorithm}",
            config.algorithm
        )))
    }
}

pub fn train_watkins_q(table: &CoverageTable, config: &TrainConfig) -> Result<TrainedModel> {
    expect_algorithm(config, Algorithm::WatkinsQ)?;
    train(table, config)
}

pub fn train_sarsa(table: &CoverageTable, config: &TrainConfig) -> Result<TrainedModel> {
    expect_algorithm(config, Algorithm::Sarsa)?;
    train(table, config)
}

pub fn train_td(table: &CoverageTable, config: &TrainConfig) -> Result<TrainedModel> {
    expect_algorithm(config, Algorithm::Td)?;
    train(table, config)
}

/// Greedy estimate of a single state: `max_λ q(s, λ)` or `v(s)`.
fn state_estimate(
    net: &ValueNetwork,
    algorithm: Algorithm,
    actions: usize,
    chosen: &FixedBitSet,
) -> Result<f64> {
    if algorithm.uses_action_input() {
        let q = q_values(net, chosen, actions)?;
        Ok(q[argmax(&q)])
    } else {
        state_value(net, chosen)
    }
}

fn policy_plan(net: &ValueNetwork, algorithm: Algorithm, env: &mut Env) -> Result<Plan> {
    let table = env.table;
    let n = table.view_count();
    let actions = env.lambdas.len();

    let mut start = 0;
    let mut best = f64::NEG_INFINITY;
    for v in 0..n {
        let mut s = FixedBitSet::with_capacity(n);
        s.insert(v);
        let value = state_estimate(net, algorithm, actions, &s)?;
        if value > best {
            best = value;
            start = v;
        }
    }

    let mut chosen = FixedBitSet::with_capacity(n);
    chosen.insert(start);
    let mut order = vec![start];
    let mut lambdas = Vec::new();
    let mut complete = true;
    while !env.is_terminal(&chosen)? {
        let step = if algorithm.uses_action_input() {
            let a = argmax(&q_values(net, &chosen, actions)?);
            env.next_view(&chosen, a)?.map(|v| (a, v))
        } else {
            best_successor(net, env, &chosen)?.map(|(a, next, _)| {
                let v = next
                    .difference(&chosen)
                    .next()
                    .expect("successor adds one view");
                (a, v)
            })
        };
        let Some((a, v)) = step else {
            complete = false;
            break;
        };
        chosen.insert(v);
        order.push(v);
        lambdas.push(env.lambdas[a]);
    }
    let state = CoverageState::from_views(table, &order)?;
    Ok(Plan::from_state(
        &state,
        table,
        lambdas,
        algorithm.name(),
        complete,
    ))
}

/// Plans by acting greedily on the learned values: the start view is the
/// single-view state with the highest estimate, then each step takes the λ
/// (Q learners) or successor state (TD) with the highest estimate.
pub fn plan_with_model(model: &TrainedModel, table: &CoverageTable, rcc: f64) -> Result<Plan> {
    check_rcc(rcc)?;
    if model.table_digest != table.digest() {
        log::warn!(
            "model was trained on table {:016x}, planning on {:016x}",
            model.table_digest,
            table.digest()
        );
    }
    let expected = model.config.input_dim(table.view_count());
    if model.network.input_dim() != expected {
        return Err(Error::input(format!(
            "model expects {} inputs but this table needs {expected}",
            model.network.input_dim()
        )));
    }
    let mut env = Env::new(table, &model.config.lambda_set, rcc);
    policy_plan(&model.network, model.config.algorithm, &mut env)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::grid;
    use crate::planner::run_fixed_lambda;
    use std::sync::Arc;

    fn rect(w: usize, x0: usize, x1: usize, y0: usize, y1: usize) -> Vec<u32> {
        let mut out = Vec::new();
        for y in y0..y1 {
            for x in x0..x1 {
                let c = (y * w + x) as u32;
                out.extend([2 * c, 2 * c + 1]);
            }
        }
        out
    }

    fn one_view_table() -> CoverageTable {
        let lists = vec![rect(4, 0, 4, 0, 4), rect(4, 0, 4, 0, 4)];
        CoverageTable::from_triangle_lists(Arc::new(grid(4, 4)), None, &lists).unwrap()
    }

    fn chain_table() -> CoverageTable {
        let lists = vec![
            rect(9, 0, 4, 0, 1),
            rect(9, 3, 7, 0, 1),
            rect(9, 6, 9, 0, 1),
            rect(9, 2, 5, 0, 1),
        ];
        CoverageTable::from_triangle_lists(Arc::new(grid(9, 1)), None, &lists).unwrap()
    }

    fn small(algorithm: Algorithm, seed: u64, episodes: usize) -> TrainConfig {
        TrainConfig {
            max_episodes: episodes,
            hidden: 8,
            epsilon_episodes: episodes / 2,
            ..TrainConfig::new(algorithm, seed)
        }
    }

    #[test]
    fn terminal_start_gives_empty_episodes() {
        let table = one_view_table();
        for alg in Algorithm::ALL {
            let model = train(&table, &small(alg, 1, 50)).unwrap();
            assert!(model
                .episode_log
                .iter()
                .all(|r| r.length == 0 && r.ret == 0.0));
            assert_eq!(plan_with_model(&model, &table, 1.0).unwrap().len(), 1);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let table = chain_table();
        for alg in Algorithm::ALL {
            let a = train(&table, &small(alg, 5, 200)).unwrap();
            let b = train(&table, &small(alg, 5, 200)).unwrap();
            assert_eq!(a, b);
            assert_eq!(
                plan_with_model(&a, &table, 1.0).unwrap(),
                plan_with_model(&b, &table, 1.0).unwrap()
            );
        }
    }

    #[test]
    fn wrong_algorithm_is_rejected() {
        let table = chain_table();
        assert!(train_td(&table, &small(Algorithm::Sarsa, 0, 1)).is_err());
        assert!(train_sarsa(&table, &small(Algorithm::Sarsa, 0, 1)).is_ok());
        let bad = TrainConfig {
            gamma: 0.9,
            ..small(Algorithm::Td, 0, 1)
        };
        assert!(train(&table, &bad).is_err());
        let bad = TrainConfig {
            lambda_set: vec![],
            ..small(Algorithm::Td, 0, 1)
        };
        assert!(train(&table, &bad).is_err());
    }

    #[test]
    fn exploratory_steps_zero_the_trace() {
        let table = chain_table();
        let cfg = TrainConfig {
            epsilon: 0.5,
            ..small(Algorithm::WatkinsQ, 3, 300)
        };
        let mut explored = 0;
        let mut greedy_nonzero = 0;
        let mut obs = |ev: &StepEvent| {
            if ev.exploratory {
                explored += 1;
                assert!(ev.trace.is_zero());
            } else if !ev.trace.is_zero() {
                greedy_nonzero += 1;
            }
        };
        train_observed(&table, &cfg, Some(&mut obs)).unwrap();
        assert!(explored > 0 && greedy_nonzero > 0);
    }

    #[test]
    fn single_greedy_action_reduces_to_greedy_planning() {
        let table = chain_table();
        for alg in Algorithm::ALL {
            let cfg = TrainConfig {
                lambda_set: vec![0.0],
                epsilon: 0.0,
                ..small(alg, 2, 100)
            };
            let model = train(&table, &cfg).unwrap();
            let plan = plan_with_model(&model, &table, 1.0).unwrap();
            let greedy = run_fixed_lambda(&table, 0.0, 1.0, Some(plan.order[0])).unwrap();
            assert_eq!(plan.order, greedy.order);
        }
    }

    #[test]
    fn episodes_never_exceed_view_count() {
        let table = chain_table();
        for alg in Algorithm::ALL {
            let model = train(&table, &small(alg, 9, 300)).unwrap();
            for r in &model.episode_log {
                assert!(r.length <= table.view_count());
                assert_eq!(r.ret, -(r.length as f64));
            }
        }
    }

    #[test]
    fn eval_log_tracks_policy() {
        let table = chain_table();
        let cfg = TrainConfig {
            eval_every: 10,
            ..small(Algorithm::Td, 4, 100)
        };
        let model = train(&table, &cfg).unwrap();
        assert_eq!(model.eval_log.len(), 10);
        assert_eq!(model.eval_log[9].episode, 100);
        let final_plan = plan_with_model(&model, &table, cfg.rcc).unwrap();
        assert_eq!(model.eval_log[9].plan_length, final_plan.len());
    }
}
