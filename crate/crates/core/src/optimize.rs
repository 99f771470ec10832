//! Adam with plateau-triggered learning-rate decay, single trials, and the
//! two-sector multi-trial protocol.

use serde::Serialize;

use crate::bits::BitString;
use crate::circuit::{AnsatzBuilder, TableCache};
use crate::engine::{EvalState, Evaluator, READOUT_THRESHOLD};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::modspace::project_maxcut;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub lr_initial: f64,
    pub decay_factor: f64,
    pub lr_min: f64,
    pub plateau_patience: usize,
    pub improvement_threshold: f64,
    pub min_steps_before_decay: usize,
    /// When true the `min_steps_before_decay` guard restarts after every decay.
    pub min_steps_per_decay: bool,
    pub max_trials_per_sector: usize,
    /// Hard cap on iterations per trial.
    pub max_iterations: usize,
    pub checkpoint_stride: Option<usize>,
    /// Ansatz blocks; `None` means `n`.
    pub blocks: Option<usize>,
    pub readout_threshold: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lr_initial: 0.05,
            decay_factor: 0.5,
            lr_min: 0.001,
            plateau_patience: 50,
            improvement_threshold: 1e-5,
            min_steps_before_decay: 100,
            min_steps_per_decay: false,
            max_trials_per_sector: 10,
            max_iterations: 20_000,
            checkpoint_stride: None,
            blocks: None,
            readout_threshold: READOUT_THRESHOLD,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr_initial > self.lr_min
            && self.lr_min > 0.0
            && self.decay_factor > 0.0
            && self.decay_factor < 1.0
            && self.plateau_patience > 0
            && self.improvement_threshold >= 0.0
            && self.max_iterations > 0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("{self:?}")))
        }
    }
}

/// First and second moment estimates for Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamMoments<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AdamMoments<T> {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
        }
    }
}

/// One bias-corrected Adam update. `step` counts from 1.
pub fn adam_step<T: Scalar>(
    params: &mut [T],
    grads: &[T],
    moments: &mut AdamMoments<T>,
    lr: T,
    step: usize,
    config: &OptimizerConfig,
) -> Result<()> {
    let len = params.len();
    for other in [grads.len(), moments.m.len(), moments.v.len()] {
        if other != len {
            return Err(Error::LengthMismatch(len, other));
        }
    }
    let b1 = T::from_f64_lossy(config.beta1);
    let b2 = T::from_f64_lossy(config.beta2);
    let eps = T::from_f64_lossy(config.epsilon);
    let one = T::one();
    let t = step.max(1) as i32;
    let c1 = one - b1.powi(t);
    let c2 = one - b2.powi(t);
    for i in 0..len {
        let g = grads[i];
        moments.m[i] = b1 * moments.m[i] + (one - b1) * g;
        moments.v[i] = b2 * moments.v[i] + (one - b2) * g * g;
        let m_hat = moments.m[i] / c1;
        let v_hat = moments.v[i] / c2;
        params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScheduleAction {
    Continue,
    Decayed(f64),
    Terminate,
}

/// Reduce-on-plateau schedule over the best cost seen so far.
///
/// A plateau at step `t` means `best[t - P] - best[t] <= threshold`, at
/// least `P` steps since the last decay, and the minimum-step guard met.
#[derive(Clone, Debug)]
pub struct PlateauSchedule {
    lr: f64,
    best: Vec<f64>,
    last_event: usize,
    decays: usize,
    config: OptimizerConfig,
}

impl PlateauSchedule {
    pub fn new(config: &OptimizerConfig) -> Self {
        Self {
            lr: config.lr_initial,
            best: Vec::new(),
            last_event: 0,
            decays: 0,
            config: config.clone(),
        }
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn decays(&self) -> usize {
        self.decays
    }

    pub fn observe(&mut self, cost: f64) -> ScheduleAction {
        let best = self.best.last().map_or(cost, |&b| b.min(cost));
        self.best.push(best);
        let t = self.best.len();
        let p = self.config.plateau_patience;
        let guard = if self.config.min_steps_per_decay {
            t >= self.last_event + self.config.min_steps_before_decay
        } else {
            t >= self.config.min_steps_before_decay
        };
        if !guard || t < self.last_event + p || t <= p {
            return ScheduleAction::Continue;
        }
        if self.best[t - 1 - p] - best > self.config.improvement_threshold {
            return ScheduleAction::Continue;
        }
        if self.lr <= self.config.lr_min {
            return ScheduleAction::Terminate;
        }
        self.lr = (self.lr * self.config.decay_factor).max(self.config.lr_min);
        self.last_event = t;
        self.decays += 1;
        ScheduleAction::Decayed(self.lr)
    }
}

/// Replays a whole cost trace through a fresh schedule and returns the final
/// learning rate, or `None` if the schedule terminated.
pub fn plateau_schedule(trace: &[f64], config: &OptimizerConfig) -> Option<f64> {
    let mut s = PlateauSchedule::new(config);
    for &c in trace {
        if s.observe(c) == ScheduleAction::Terminate {
            return None;
        }
    }
    Some(s.lr())
}

/// Hamming-weight parity sector of the initial basis state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Even,
    Odd,
}

impl Sector {
    /// `|0...0>` or `X_1 |0...0>`.
    pub fn initial_bits(self, n: usize) -> BitString {
        let mut v = vec![false; n];
        if self == Sector::Odd && n > 0 {
            v[0] = true;
        }
        BitString::from_bools(v)
    }
}

impl std::str::FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Sector::Even),
            "odd" => Ok(Sector::Odd),
            _ => Err(Error::InvalidConfig(format!("unknown sector {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub trace: Vec<f64>,
    pub lrs: Vec<f64>,
    pub final_cost: f64,
    pub bits: Option<BitString>,
    pub energy: Option<i64>,
    pub cut_value: Option<i64>,
    pub success: bool,
    pub iterations: usize,
    pub seed: u64,
    pub sector: Sector,
}

impl RunResult {
    fn trivial(graph: &Graph, sector: Sector, seed: u64) -> Self {
        let bits = sector.initial_bits(graph.n());
        Self {
            trace: vec![0.0],
            lrs: vec![],
            final_cost: 0.0,
            energy: Some(0),
            cut_value: Some(graph.cut_value(&bits)),
            bits: Some(bits),
            success: true,
            iterations: 0,
            seed,
            sector,
        }
    }
}

/// One optimization run from a seeded ansatz and seeded `θ`.
///
/// Success requires an unambiguous readout whose classical energy equals the
/// rounded final cost, and equals `reference_energy` when one is given.
pub fn run_trial(
    graph: &Graph,
    sector: Sector,
    seed: u64,
    config: &OptimizerConfig,
    reference_energy: Option<i64>,
    cache: &TableCache,
) -> Result<RunResult> {
    config.validate()?;
    if graph.edges().is_empty() {
        return Ok(RunResult::trivial(graph, sector, seed));
    }
    let n = graph.n();
    let mut builder = AnsatzBuilder::new(n);
    if let Some(b) = config.blocks {
        builder = builder.blocks(b);
    }
    let circuit = builder.build(seed)?;
    let init = sector.initial_bits(n);
    let ev = Evaluator::<f64>::new(&circuit, cache, &init, project_maxcut(graph)?)?
        .with_checkpoint_stride(config.checkpoint_stride);

    let mut theta = circuit.theta().to_vec();
    let mut moments = AdamMoments::new(theta.len());
    let mut schedule = PlateauSchedule::new(config);
    let mut state = EvalState::new();
    let mut trace = Vec::new();
    let mut lrs = Vec::new();
    loop {
        let (cost, grad) = ev.cost_and_gradient(&theta, &mut state)?;
        trace.push(cost);
        lrs.push(schedule.lr());
        if !cost.is_finite() {
            break;
        }
        if schedule.observe(cost) == ScheduleAction::Terminate
            || trace.len() >= config.max_iterations
        {
            break;
        }
        adam_step(
            &mut theta,
            &grad,
            &mut moments,
            schedule.lr(),
            trace.len(),
            config,
        )?;
    }
    let final_cost = *trace.last().expect("at least one iteration");
    let bits = ev.readout(&theta, config.readout_threshold).ok();
    let energy = bits.as_ref().map(|b| graph.energy(b));
    let success = match energy {
        Some(e) => {
            (e as f64 - final_cost.round()).abs() <= 1e-6 && reference_energy.is_none_or(|r| r == e)
        }
        None => false,
    };
    Ok(RunResult {
        iterations: trace.len(),
        final_cost,
        cut_value: bits.as_ref().map(|b| graph.cut_value(b)),
        bits,
        energy,
        success,
        trace,
        lrs,
        seed,
        sector,
    })
}

/// SplitMix64 finalizer, used to derive independent per-trial seeds.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceResult {
    pub best: RunResult,
    pub trials: usize,
    pub total_iterations: usize,
    pub reference_energy: Option<i64>,
}

fn better(a: &RunResult, b: &RunResult) -> bool {
    let key = |r: &RunResult| (!r.success, r.energy.unwrap_or(i64::MAX), r.final_cost);
    let (ka, kb) = (key(a), key(b));
    (ka.0, ka.1) < (kb.0, kb.1) || ((ka.0, ka.1) == (kb.0, kb.1) && ka.2 < kb.2)
}

/// Alternates even and odd sectors for up to `max_trials_per_sector` trials
/// each. With a reference energy the search stops at the first success;
/// without one every trial runs and the lowest-energy readout wins.
pub fn solve_instance(
    graph: &Graph,
    config: &OptimizerConfig,
    seed: u64,
    reference_energy: Option<i64>,
    sectors: &[Sector],
) -> Result<InstanceResult> {
    config.validate()?;
    if sectors.is_empty() {
        return Err(Error::InvalidConfig("no sectors".into()));
    }
    let cache = TableCache::new();
    let mut best: Option<RunResult> = None;
    let mut trials = 0;
    let mut total_iterations = 0;
    'outer: for round in 0..config.max_trials_per_sector {
        for &sector in sectors {
            let trial_seed = mix_seed(seed, trials as u64);
            let r = run_trial(graph, sector, trial_seed, config, reference_energy, &cache)?;
            trials += 1;
            total_iterations += r.iterations;
            let done = r.success && (reference_energy.is_some() || graph.edges().is_empty());
            if best.as_ref().is_none_or(|b| better(&r, b)) {
                best = Some(r);
            }
            if done {
                break 'outer;
            }
        }
        let _ = round;
    }
    Ok(InstanceResult {
        best: best.expect("at least one trial"),
        trials,
        total_iterations,
        reference_energy,
    })
}
