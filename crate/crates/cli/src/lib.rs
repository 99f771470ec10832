//! Experiment drivers behind the `mgsurrogate` binary: graph generation,
//! solving with trace output, success tables, timing benchmarks and the
//! verification report.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use mgsurrogate::circuit::{AnsatzBuilder, TableCache};
use mgsurrogate::engine::{EvalState, Evaluator};
use mgsurrogate::optimize::{
    mix_seed, solve_instance, InstanceResult, OptimizerConfig, RunResult, Sector,
};
use mgsurrogate::verify::{brute_force_maxcut, MAX_BRUTE_FORCE};
use mgsurrogate::{dim_module, project_maxcut, BitString, Graph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphKind {
    ThreeRegular,
    ErdosRenyi(f64),
}

pub fn gen_graph(n: usize, kind: GraphKind, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(match kind {
        GraphKind::ThreeRegular => Graph::random_3_regular(n, &mut rng)?,
        GraphKind::ErdosRenyi(p) => {
            if !(0.0..=1.0).contains(&p) {
                bail!("edge probability {p} outside [0, 1]");
            }
            Graph::erdos_renyi(n, p, &mut rng)?
        }
    })
}

/// Ground-truth energy: from a known optimal cut, or by enumeration when
/// `n <= brute_force_limit`.
pub fn reference_energy(
    graph: &Graph,
    known_cut: Option<i64>,
    brute_force_limit: usize,
) -> Result<Option<i64>> {
    if let Some(cut) = known_cut {
        return Ok(Some(graph.total_weight() - 2 * cut));
    }
    if graph.n() <= brute_force_limit.min(MAX_BRUTE_FORCE) {
        return Ok(Some(brute_force_maxcut(graph)?.e_g));
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveSummary {
    pub instance: String,
    pub n: usize,
    pub edges: usize,
    pub best_cost: f64,
    pub cut: Option<i64>,
    pub bits: Option<BitString>,
    pub energy: Option<i64>,
    pub success: bool,
    pub optimum_cut: Option<i64>,
    pub trials: usize,
    pub iterations: usize,
    pub best_trial_seed: u64,
    pub best_trial_sector: Sector,
    pub wall_ms: u128,
}

impl SolveSummary {
    /// Copy with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_ms: 0,
            ..self.clone()
        }
    }
}

pub struct SolveOutput {
    pub summary: SolveSummary,
    pub result: InstanceResult,
}

pub fn solve(
    instance: &str,
    graph: &Graph,
    config: &OptimizerConfig,
    seed: u64,
    reference: Option<i64>,
    sectors: &[Sector],
) -> Result<SolveOutput> {
    let start = Instant::now();
    let result = solve_instance(graph, config, seed, reference, sectors)?;
    let best = &result.best;
    let summary = SolveSummary {
        instance: instance.to_string(),
        n: graph.n(),
        edges: graph.edges().len(),
        best_cost: best.final_cost,
        cut: best.cut_value,
        bits: best.bits.clone(),
        energy: best.energy,
        success: best.success,
        optimum_cut: reference.map(|e| (graph.total_weight() - e) / 2),
        trials: result.trials,
        iterations: result.total_iterations,
        best_trial_seed: best.seed,
        best_trial_sector: best.sector,
        wall_ms: start.elapsed().as_millis(),
    };
    Ok(SolveOutput { summary, result })
}

/// `iteration,cost,lr` rows for one trial.
pub fn write_trace<W: Write>(out: W, run: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "cost", "lr"])?;
    for (i, (c, lr)) in run
        .trace
        .iter()
        .zip(run.lrs.iter().chain(std::iter::repeat(&0.0)))
        .enumerate()
    {
        w.write_record([i.to_string(), format!("{c:.12}"), lr.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessRow {
    pub n: usize,
    pub instances: usize,
    pub successes: usize,
    pub rate: f64,
    pub mean_trials: f64,
    pub summaries: Vec<SolveSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessTable {
    pub seed: u64,
    pub rows: Vec<SuccessRow>,
}

impl SuccessTable {
    pub fn without_timing(&self) -> Self {
        let mut t = self.clone();
        for row in &mut t.rows {
            row.summaries = row
                .summaries
                .iter()
                .map(SolveSummary::without_timing)
                .collect();
        }
        t
    }
}

/// Seed of instance `i` at size `n`; graph and trial seeds derive from it.
pub fn instance_seed(seed: u64, n: usize, i: usize) -> u64 {
    mix_seed(mix_seed(seed, n as u64), i as u64)
}

/// Per-size success rate over random 3-regular instances, each certified
/// against its brute-force optimum. Instances run on the rayon pool.
pub fn success_table(
    sizes: &[usize],
    instances: usize,
    seed: u64,
    config: &OptimizerConfig,
    sectors: &[Sector],
) -> Result<SuccessTable> {
    let mut rows = Vec::new();
    for &n in sizes {
        if n > MAX_BRUTE_FORCE {
            bail!("success table needs brute-force optima; n = {n} exceeds {MAX_BRUTE_FORCE}");
        }
        let summaries = (0..instances)
            .into_par_iter()
            .map(|i| {
                let s = instance_seed(seed, n, i);
                let graph = gen_graph(n, GraphKind::ThreeRegular, s)?;
                let reference = reference_energy(&graph, None, MAX_BRUTE_FORCE)?;
                Ok(solve(
                    &format!("3reg-n{n}-i{i}"),
                    &graph,
                    config,
                    s,
                    reference,
                    sectors,
                )?
                .summary)
            })
            .collect::<Result<Vec<_>>>()?;
        let successes = summaries.iter().filter(|s| s.success).count();
        let mean_trials =
            summaries.iter().map(|s| s.trials as f64).sum::<f64>() / instances.max(1) as f64;
        rows.push(SuccessRow {
            n,
            instances,
            successes,
            rate: successes as f64 / instances.max(1) as f64,
            mean_trials,
            summaries,
        });
    }
    Ok(SuccessTable { seed, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub params: usize,
    pub dim_b4: usize,
    pub reps: usize,
    pub mean_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of `ln(mean_ms)` against `ln(n)`; `None` for a
    /// single size.
    pub slope: Option<f64>,
}

/// Mean wall time of one cost-plus-gradient evaluation per size.
pub fn bench(sizes: &[usize], reps: usize, seed: u64) -> Result<BenchReport> {
    let rows = sizes
        .iter()
        .map(|&n| bench_size(n, reps, seed))
        .collect::<Result<Vec<_>>>()?;
    let slope = loglog_slope(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.mean_ms))
            .collect::<Vec<_>>(),
    );
    Ok(BenchReport { rows, slope })
}

/// Mean over `reps` evaluations at size `n` after one untimed warm-up.
pub fn bench_size(n: usize, reps: usize, seed: u64) -> Result<BenchRow> {
    if reps == 0 {
        bail!("bench needs at least one repetition");
    }
    let graph = gen_graph(n, GraphKind::ThreeRegular, mix_seed(seed, n as u64))?;
    let circuit = AnsatzBuilder::new(n).build(seed)?;
    let ev = Evaluator::<f64>::new(
        &circuit,
        &TableCache::new(),
        &BitString::zeros(n),
        project_maxcut(&graph)?,
    )?;
    let mut state = EvalState::new();
    // warm-up also faults in the buffers
    std::hint::black_box(ev.cost_and_gradient(circuit.theta(), &mut state)?);
    let start = Instant::now();
    for _ in 0..reps {
        std::hint::black_box(ev.cost_and_gradient(circuit.theta(), &mut state)?);
    }
    let mean_ms = start.elapsed().as_secs_f64() * 1e3 / reps as f64;
    Ok(BenchRow {
        n,
        params: circuit.num_params(),
        dim_b4: dim_module(4, n),
        reps,
        mean_ms,
    })
}

pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .with_context(|| format!("bad size {s:?}"))
        })
        .collect()
}

pub fn parse_sectors(text: &str) -> Result<Vec<Sector>> {
    let sectors = text
        .split(',')
        .map(|s| s.trim().parse::<Sector>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if sectors.is_empty() {
        bail!("at least one sector required");
    }
    Ok(sectors)
}
