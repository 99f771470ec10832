//! Dense small-n oracles and reachability checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::circuit::{build_ansatz, Circuit, GateTable, Generator, GeneratorKind, TableCache};
use crate::combinatorics::binomial;
use crate::dense::{StateVector, MAX_DENSE_QUBITS};
use crate::engine::{EvalState, Evaluator};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::RunGate;
use crate::modspace::{module_weights_dense, project_basis_state, project_maxcut, ModuleWeights};

pub const MAX_BRUTE_FORCE: usize = 30;
/// Ground bitstrings kept in a [`Spectrum`]; the degeneracy is always exact.
pub const MAX_STORED_GROUND: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub e_g: i64,
    /// `None` when every assignment is optimal (no edges).
    pub e_1: Option<i64>,
    pub ground_bits: Vec<BitString>,
    pub degeneracy: u64,
}

impl Spectrum {
    pub fn max_cut(&self, graph: &Graph) -> i64 {
        (graph.total_weight() - self.e_g) / 2
    }
}

/// Exact Ising spectrum extremes by Gray-code enumeration.
pub fn brute_force_maxcut(graph: &Graph) -> Result<Spectrum> {
    let n = graph.n();
    if n > MAX_BRUTE_FORCE {
        return Err(Error::BruteForceTooLarge {
            n,
            max: MAX_BRUTE_FORCE,
        });
    }
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for e in graph.edges() {
        adj[e.u - 1].push((e.v - 1, e.weight));
        adj[e.v - 1].push((e.u - 1, e.weight));
    }
    let mut spin = vec![1i64; n];
    let mut mask: u64 = 0;
    let mut energy = graph.total_weight();
    let mut e_g = energy;
    let mut e_1: Option<i64> = None;
    let mut ground = vec![mask];
    let mut degeneracy = 1u64;
    for i in 1u64..(1u64 << n) {
        let k = i.trailing_zeros() as usize;
        let field: i64 = adj[k].iter().map(|&(j, w)| w * spin[j]).sum();
        energy -= 2 * spin[k] * field;
        spin[k] = -spin[k];
        mask ^= 1 << k;
        if energy < e_g {
            e_1 = Some(e_g);
            e_g = energy;
            ground.clear();
            ground.push(mask);
            degeneracy = 1;
        } else if energy == e_g {
            degeneracy += 1;
            if ground.len() < MAX_STORED_GROUND {
                ground.push(mask);
            }
        } else if e_1.is_none_or(|e1| energy < e1) {
            e_1 = Some(energy);
        }
    }
    ground.sort_unstable();
    Ok(Spectrum {
        e_g,
        e_1,
        ground_bits: ground
            .into_iter()
            .map(|m| BitString::from_mask(m as u128, n))
            .collect(),
        degeneracy,
    })
}

/// Diagonal of `Σ w Z_i Z_j + Σ ε_i Z_i` over the dense basis.
pub fn diagonal_hamiltonian(graph: &Graph, fields: &[f64]) -> Result<Vec<f64>> {
    let n = graph.n();
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::DenseTooLarge {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    if !fields.is_empty() && fields.len() != n {
        return Err(Error::LengthMismatch(n, fields.len()));
    }
    Ok((0..1usize << n)
        .map(|r| {
            let z = |k: usize| if r >> k & 1 == 1 { -1.0 } else { 1.0 };
            let zz: f64 = graph
                .edges()
                .iter()
                .map(|e| e.weight as f64 * z(e.u - 1) * z(e.v - 1))
                .sum();
            zz + fields
                .iter()
                .enumerate()
                .map(|(k, f)| f * z(k))
                .sum::<f64>()
        })
        .collect())
}

/// Statevector evolution through the gate list, then `<ψ|H|ψ>` for a
/// diagonal `H`.
pub fn dense_expectation(
    circuit: &Circuit,
    theta: &[f64],
    init: &StateVector,
    h_diag: &[f64],
) -> Result<f64> {
    dense_evolve(circuit, theta, init)?.diagonal_expectation(h_diag)
}

pub fn dense_evolve(circuit: &Circuit, theta: &[f64], init: &StateVector) -> Result<StateVector> {
    if theta.len() != circuit.num_params() {
        return Err(Error::LengthMismatch(circuit.num_params(), theta.len()));
    }
    if init.n() != circuit.n() {
        return Err(Error::QubitMismatch(circuit.n(), init.n()));
    }
    let mut psi = init.clone();
    for (gate, &t) in circuit.gates().iter().zip(theta) {
        psi.apply_pauli_rotation(gate.generator.pauli(), t)?;
    }
    Ok(psi)
}

fn uniform_theta<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-PI..PI)).collect()
}

fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BitString {
    BitString::from_bools((0..n).map(|_| rng.gen()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReachabilityReport {
    pub pi_g: f64,
    pub bound: f64,
    pub e_g: f64,
    pub e_1: f64,
    pub min_sampled_cost: f64,
    pub samples: usize,
    pub weights_initial: ModuleWeights,
    pub weights_ground: ModuleWeights,
}

impl ReachabilityReport {
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.min_sampled_cost >= self.bound - tol
    }
}

/// Bound `C(θ) >= E_g π_g + E_1 (1 - π_g)` against random ansatz samples,
/// for a diagonal Hamiltonian with a unique ground state.
pub fn reachability_check<R: Rng + ?Sized>(
    h_diag: &[f64],
    init: &StateVector,
    samples: usize,
    rng: &mut R,
) -> Result<ReachabilityReport> {
    let n = init.n();
    if h_diag.len() != 1 << n {
        return Err(Error::DimensionMismatch {
            expected: 1 << n,
            got: h_diag.len(),
        });
    }
    let e_g = h_diag.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + e_g.abs());
    let ground: Vec<usize> = (0..h_diag.len())
        .filter(|&r| h_diag[r] - e_g <= tol)
        .collect();
    if ground.len() != 1 {
        return Err(Error::DegenerateGround(ground.len()));
    }
    let e_1 = h_diag
        .iter()
        .copied()
        .filter(|&e| e - e_g > tol)
        .fold(f64::INFINITY, f64::min);
    let ground_state = StateVector::basis(&BitString::from_mask(ground[0] as u128, n))?;
    let weights_initial = module_weights_dense(&init.density());
    let weights_ground = module_weights_dense(&ground_state.density());
    let pi_g = weights_ground.overlap_cap(&weights_initial);
    let bound = if e_1.is_finite() {
        e_g * pi_g + e_1 * (1.0 - pi_g)
    } else {
        e_g
    };

    let mut min_sampled_cost = f64::INFINITY;
    for _ in 0..samples {
        let circuit = build_ansatz(n, rng.gen())?;
        let theta = uniform_theta(circuit.num_params(), rng);
        min_sampled_cost = min_sampled_cost.min(dense_expectation(&circuit, &theta, init, h_diag)?);
    }
    Ok(ReachabilityReport {
        pi_g,
        bound,
        e_g,
        e_1,
        min_sampled_cost,
        samples,
        weights_initial,
        weights_ground,
    })
}

/// Per-grade norms of a computational basis state: zero at odd grades and
/// `sqrt(C(n, m) / 2^n)` at grade `2m`.
pub fn basis_state_weights(n: usize) -> ModuleWeights {
    let scale = (n as f64).exp2();
    let w = (0..=2 * n)
        .map(|k| {
            if k % 2 == 1 {
                0.0
            } else {
                (binomial(n, k / 2) as f64 / scale).sqrt()
            }
        })
        .collect();
    ModuleWeights::from_vec(w)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemarkReport {
    pub n: usize,
    pub trials: usize,
    /// Largest per-grade difference between the two states of a pair.
    pub max_pair_diff: f64,
    /// Largest per-grade difference from the closed form.
    pub max_closed_form_diff: f64,
}

impl RemarkReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_pair_diff <= tol && self.max_closed_form_diff <= tol
    }
}

/// Module weights of random computational-basis pairs.
pub fn remark_check<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> Result<RemarkReport> {
    let expected = basis_state_weights(n);
    let mut max_pair_diff: f64 = 0.0;
    let mut max_closed_form_diff: f64 = 0.0;
    for _ in 0..trials {
        let a = module_weights_dense(&StateVector::basis(&random_bits(n, rng))?.density());
        let b = module_weights_dense(&StateVector::basis(&random_bits(n, rng))?.density());
        max_pair_diff = max_pair_diff.max(a.max_abs_diff(&b));
        max_closed_form_diff = max_closed_form_diff
            .max(a.max_abs_diff(&expected))
            .max(b.max_abs_diff(&expected));
    }
    Ok(RemarkReport {
        n,
        trials,
        max_pair_diff,
        max_closed_form_diff,
    })
}

/// Largest `|projected - dense|` over random 3-regular instances, seeded
/// ansatz, uniform `θ` and random basis initial states. `corrupt` flips one
/// pair sign in every gate table.
pub fn oracle_equivalence(n: usize, cases: usize, seed: u64, corrupt: bool) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = TableCache::new();
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let graph = Graph::random_3_regular(n, &mut rng)?;
        let circuit = build_ansatz(n, rng.gen())?;
        let theta = uniform_theta(circuit.num_params(), &mut rng);
        let init = random_bits(n, &mut rng);
        let mut ev = Evaluator::<f64>::new(&circuit, &cache, &init, project_maxcut(&graph)?)?;
        if corrupt {
            for (q, gate) in circuit.gates().iter().enumerate() {
                ev.replace_table(q, cache.get(&gate.generator, 4)?.with_corrupted_sign())?;
            }
        }
        let projected = ev.expectation(&theta)?;
        let dense = dense_expectation(
            &circuit,
            &theta,
            &StateVector::basis(&init)?,
            &diagonal_hamiltonian(&graph, &[])?,
        )?;
        worst = worst.max((projected - dense).abs());
    }
    Ok(worst)
}

/// Relative error of the analytic gradient against central differences.
/// The denominator is `max(|fd|, floor)` so vanishing partials are compared
/// absolutely.
pub const GRADIENT_REL_FLOOR: f64 = 1e-2;

pub fn gradient_check(n: usize, instances: usize, seed: u64, h: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = TableCache::new();
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let graph = Graph::random_3_regular(n, &mut rng)?;
        let circuit = build_ansatz(n, rng.gen())?;
        let theta = uniform_theta(circuit.num_params(), &mut rng);
        let init = random_bits(n, &mut rng);
        let ev = Evaluator::<f64>::new(&circuit, &cache, &init, project_maxcut(&graph)?)?;
        let (_, grad) = ev.cost_and_gradient(&theta, &mut EvalState::new())?;
        let mut shifted = theta.clone();
        for q in 0..theta.len() {
            shifted[q] = theta[q] + h;
            let up = ev.expectation(&shifted)?;
            shifted[q] = theta[q] - h;
            let down = ev.expectation(&shifted)?;
            shifted[q] = theta[q];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((grad[q] - fd).abs() / fd.abs().max(GRADIENT_REL_FLOOR));
        }
    }
    Ok(worst)
}

/// Path graph 1-2-3 with one `X_2 X_3` gate on `|000>`: returns the largest
/// deviation of cost and gradient from `1 + cos 2θ` and `-2 sin 2θ`.
pub fn analytic_gradient_check(thetas: &[f64]) -> Result<f64> {
    let graph = Graph::new(3, [(1, 2, 1), (2, 3, 1)])?;
    let circuit = Circuit::from_kinds(3, &[GeneratorKind::XX(1)], vec![0.0])?;
    let ev = Evaluator::<f64>::new(
        &circuit,
        &TableCache::new(),
        &BitString::zeros(3),
        project_maxcut(&graph)?,
    )?;
    let mut worst: f64 = 0.0;
    for &t in thetas {
        let (c, g) = ev.cost_and_gradient(&[t], &mut EvalState::new())?;
        worst = worst
            .max((c - (1.0 + (2.0 * t).cos())).abs())
            .max((g[0] + 2.0 * (2.0 * t).sin()).abs());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConservationReport {
    pub gates: usize,
    pub max_norm_drift_b4: f64,
    pub max_norm_drift_b2: f64,
    pub max_roundtrip_error: f64,
}

/// Random single gates applied to random vectors in `B_4` and `B_2`: norm
/// drift per gate and the error of applying `θ` then `-θ`.
pub fn conservation_check(n: usize, gates: usize, seed: u64) -> Result<ConservationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = TableCache::new();
    let mut kinds: Vec<GeneratorKind> = (0..n).map(GeneratorKind::Z).collect();
    for i in 0..n - 1 {
        kinds.extend(GeneratorKind::TWO_SITE.iter().map(|f| f(i)));
    }
    let mut b4 = project_basis_state::<f64>(&random_bits(n, &mut rng), 4)?.into_coeffs();
    let mut b2 = project_basis_state::<f64>(&random_bits(n, &mut rng), 2)?.into_coeffs();
    for v in [&mut b4, &mut b2] {
        for c in v.iter_mut() {
            *c += rng.gen_range(-1.0..1.0);
        }
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        v.iter_mut().for_each(|c| *c /= norm);
    }
    // the run kernel works on frame coefficients; any unit vector will do
    let mut b4_runs = b4.clone();
    let norm = |v: &[f64]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut report = ConservationReport {
        gates,
        max_norm_drift_b4: 0.0,
        max_norm_drift_b2: 0.0,
        max_roundtrip_error: 0.0,
    };
    for _ in 0..gates {
        let generator = Generator::new(kinds[rng.gen_range(0..kinds.len())], n)?;
        let theta: f64 = rng.gen_range(-PI..PI);
        let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
        for (v, kappa) in [(&mut b4, 4), (&mut b2, 2)] {
            let table: std::sync::Arc<GateTable> = cache.get(&generator, kappa)?;
            let before = v.clone();
            let n0 = norm(v);
            table.rotate(v, c, s);
            let drift = (norm(v) - n0).abs();
            if kappa == 4 {
                report.max_norm_drift_b4 = report.max_norm_drift_b4.max(drift);
            } else {
                report.max_norm_drift_b2 = report.max_norm_drift_b2.max(drift);
            }
            let mut back = v.clone();
            table.rotate(&mut back, c, -s);
            let err = back
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            report.max_roundtrip_error = report.max_roundtrip_error.max(err);
        }
        let runs = RunGate::new(&generator)?;
        let before = b4_runs.clone();
        let n0 = norm(&b4_runs);
        runs.rotate(&mut b4_runs, c, s);
        report.max_norm_drift_b4 = report.max_norm_drift_b4.max((norm(&b4_runs) - n0).abs());
        let mut back = b4_runs.clone();
        runs.rotate(&mut back, c, -s);
        let err = back
            .iter()
            .zip(&before)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        report.max_roundtrip_error = report.max_roundtrip_error.max(err);
    }
    Ok(report)
}

/// Symmetry-breaking fields `ε_i = 2^i / 2^(n+2)`. Distinct spin
/// configurations get distinct `Σ ε_i z_i` and the total stays below 1/4,
/// so the ground state is unique and lies among the unperturbed optima.
pub fn default_fields(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 - n as f64 - 2.0).exp2()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub tolerance: f64,
    pub value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    /// Records `value <= tolerance`.
    pub fn push_le(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            tolerance,
            value,
            passed: value <= tolerance,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Largest `n` any dense check may use.
    pub max_n: usize,
    pub corrupt_tables: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_n: 10,
            corrupt_tables: false,
        }
    }
}

/// Oracle-equivalence, gradient, module-weight, reachability and conservation suites.
pub fn run_verification(opts: &VerifyOptions) -> Result<VerificationReport> {
    if opts.max_n < 4 || opts.max_n > MAX_DENSE_QUBITS {
        return Err(Error::DenseTooLarge {
            n: opts.max_n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let sizes: Vec<usize> = [4, 6, 8, 10]
        .into_iter()
        .filter(|&n| n <= opts.max_n)
        .collect();
    let mut report = VerificationReport::default();
    for &n in &sizes {
        let err = oracle_equivalence(n, 20, opts.seed ^ n as u64, opts.corrupt_tables)?;
        report.push_le(format!("oracle_equivalence n={n}"), err, 1e-9);
    }
    if opts.max_n >= 6 {
        report.push_le(
            "gradient_vs_finite_difference n=6",
            gradient_check(6, 5, opts.seed, 1e-5)?,
            1e-5,
        );
    }
    report.push_le(
        "gradient_analytic path3",
        analytic_gradient_check(&[-1.0, 0.0, 0.3, PI / 8.0, 2.5])?,
        1e-9,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for n in [4, 8].into_iter().filter(|&n| n <= opts.max_n) {
        let r = remark_check(n, 50, &mut rng)?;
        report.push_le(format!("module_weight_pairs n={n}"), r.max_pair_diff, 1e-12);
        report.push_le(
            format!("module_weight_closed_form n={n}"),
            r.max_closed_form_diff,
            1e-12,
        );
    }
    for n in [4, 6].into_iter().filter(|&n| n <= opts.max_n) {
        let graph = Graph::random_3_regular(n, &mut rng)?;
        let h = diagonal_hamiltonian(&graph, &default_fields(n))?;
        let r = reachability_check(&h, &StateVector::plus(n)?, 200, &mut rng)?;
        report.push_le(
            format!("reachability_bound n={n}"),
            (r.bound - r.min_sampled_cost).max(0.0),
            1e-9,
        );
        let basis = StateVector::basis(&random_bits(n, &mut rng))?;
        let r = reachability_check(&h, &basis, 0, &mut rng)?;
        report.push_le(
            format!("reachability_basis_weights n={n}"),
            r.weights_initial.max_abs_diff(&r.weights_ground),
            1e-12,
        );
    }
    let c = conservation_check(opts.max_n.min(8), 1000, opts.seed)?;
    report.push_le("conservation_b4", c.max_norm_drift_b4, 1e-12);
    report.push_le("conservation_b2", c.max_norm_drift_b2, 1e-12);
    report.push_le("inverse_roundtrip", c.max_roundtrip_error, 1e-12);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Generator;
    use approx::assert_abs_diff_eq;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// Oracle: direct evaluation of every assignment.
    fn naive_spectrum(g: &Graph) -> (i64, i64, Vec<BitString>) {
        let n = g.n();
        let mut all: Vec<(i64, BitString)> = (0..1u128 << n)
            .map(|m| BitString::from_mask(m, n))
            .map(|b| (g.energy(&b), b))
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.to_mask().cmp(&b.1.to_mask())));
        let e_g = all[0].0;
        let e_1 = all.iter().find(|(e, _)| *e > e_g).map_or(e_g, |p| p.0);
        (
            e_g,
            e_1,
            all.into_iter()
                .filter(|(e, _)| *e == e_g)
                .map(|p| p.1)
                .collect(),
        )
    }

    #[test]
    fn spectrum_examples() {
        let edge = Graph::new(2, [(1, 2, 1)]).unwrap();
        let s = brute_force_maxcut(&edge).unwrap();
        assert_eq!((s.e_g, s.e_1), (-1, Some(1)));
        assert_eq!(s.ground_bits, vec![bits("10"), bits("01")]);

        let triangle = Graph::new(3, [(1, 2, 1), (2, 3, 1), (1, 3, 1)]).unwrap();
        let s = brute_force_maxcut(&triangle).unwrap();
        assert_eq!((s.e_g, s.degeneracy, s.max_cut(&triangle)), (-1, 6, 2));

        let square = Graph::new(4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (1, 4, 1)]).unwrap();
        let s = brute_force_maxcut(&square).unwrap();
        assert_eq!(s.e_g, -4);
        assert_eq!(s.max_cut(&square), 4);
        let mut got: Vec<String> = s.ground_bits.iter().map(|b| b.to_string()).collect();
        got.sort();
        assert_eq!(got, vec!["0101", "1010"]);

        let empty = Graph::new(3, []).unwrap();
        assert_eq!(brute_force_maxcut(&empty).unwrap().e_1, None);
        let big = Graph::new(31, []).unwrap();
        assert!(matches!(
            brute_force_maxcut(&big),
            Err(Error::BruteForceTooLarge { .. })
        ));
    }

    #[test]
    fn spectrum_matches_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [4, 6, 8, 10] {
            for _ in 0..3 {
                let g = Graph::erdos_renyi(n, 0.5, &mut rng).unwrap();
                let weighted = Graph::new(
                    n,
                    g.edges().iter().map(|e| (e.u, e.v, rng.gen_range(-3..=5))),
                )
                .unwrap();
                for graph in [g, weighted] {
                    let s = brute_force_maxcut(&graph).unwrap();
                    let (e_g, e_1, ground) = naive_spectrum(&graph);
                    assert_eq!(s.e_g, e_g);
                    if e_1 != e_g {
                        assert_eq!(s.e_1, Some(e_1));
                    }
                    assert_eq!(s.degeneracy as usize, ground.len());
                    let mut mine = s.ground_bits.clone();
                    mine.sort_by_key(|b| b.to_mask());
                    assert_eq!(mine, ground);
                }
            }
        }
    }

    #[test]
    fn dense_expectation_examples() {
        let g = Graph::new(2, [(1, 2, 1)]).unwrap();
        let c = build_ansatz(2, 0).unwrap();
        let init = StateVector::basis(&bits("00")).unwrap();
        let h = diagonal_hamiltonian(&g, &[]).unwrap();
        assert_abs_diff_eq!(
            dense_expectation(&c, &[0.0; 6], &init, &h).unwrap(),
            1.0,
            epsilon = 1e-15
        );

        let path = Graph::new(3, [(1, 2, 1), (2, 3, 1)]).unwrap();
        let c = Circuit::from_kinds(3, &[GeneratorKind::XX(1)], vec![0.0]).unwrap();
        let h = diagonal_hamiltonian(&path, &[]).unwrap();
        let init = StateVector::basis(&bits("000")).unwrap();
        for t in [0.0, 0.4, PI / 8.0] {
            assert_abs_diff_eq!(
                dense_expectation(&c, &[t], &init, &h).unwrap(),
                1.0 + (2.0 * t).cos(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn zero_angle_gate_is_a_no_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = Graph::random_3_regular(6, &mut rng).unwrap();
        let h = diagonal_hamiltonian(&g, &[]).unwrap();
        let c = build_ansatz(6, 1).unwrap();
        let init = StateVector::plus(6).unwrap();
        let base = dense_expectation(&c, c.theta(), &init, &h).unwrap();
        let longer = c
            .with_gate(Generator::new(GeneratorKind::YX(2), 6).unwrap(), 0.0)
            .unwrap();
        assert_eq!(
            dense_expectation(&longer, longer.theta(), &init, &h).unwrap(),
            base
        );
    }

    #[test]
    fn oracle_agreement_and_fault_detection() {
        assert!(oracle_equivalence(6, 20, 1, false).unwrap() <= 1e-9);
        assert!(oracle_equivalence(6, 5, 1, true).unwrap() > 1e-6);
    }

    #[test]
    fn gradients_match_finite_differences() {
        assert!(gradient_check(4, 3, 5, 1e-5).unwrap() <= 1e-5);
        assert!(analytic_gradient_check(&[0.0, PI / 8.0, 1.0]).unwrap() <= 1e-12);
    }

    #[test]
    fn reachability_with_ground_init_is_tight() {
        let g = Graph::new(3, [(1, 2, 1), (2, 3, 1)]).unwrap();
        let h = diagonal_hamiltonian(&g, &default_fields(3)).unwrap();
        let argmin = (0..8)
            .min_by(|&a, &b| h[a].partial_cmp(&h[b]).unwrap())
            .unwrap();
        let init = StateVector::basis(&BitString::from_mask(argmin as u128, 3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = reachability_check(&h, &init, 10, &mut rng).unwrap();
        assert_abs_diff_eq!(r.pi_g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.bound, r.e_g, epsilon = 1e-12);
        assert!(r.bound_holds(1e-9));
        assert!(r.weights_initial.max_abs_diff(&r.weights_ground) < 1e-12);
    }

    #[test]
    fn reachability_bound_holds_for_plus_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Graph::random_3_regular(4, &mut rng).unwrap();
        let h = diagonal_hamiltonian(&g, &default_fields(4)).unwrap();
        let r = reachability_check(&h, &StateVector::plus(4).unwrap(), 200, &mut rng).unwrap();
        assert!(r.pi_g < 1.0);
        assert!(r.bound > r.e_g);
        assert!(r.bound_holds(1e-9), "{r:?}");
        let bare = diagonal_hamiltonian(&g, &[]).unwrap();
        assert!(matches!(
            reachability_check(&bare, &StateVector::plus(4).unwrap(), 1, &mut rng),
            Err(Error::DegenerateGround(_))
        ));
    }

    #[test]
    fn module_weight_examples() {
        let w = basis_state_weights(1);
        let r = 0.5f64.sqrt();
        assert_eq!(w.as_slice().len(), 3);
        for (a, b) in w.as_slice().iter().zip([r, 0.0, r]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        for s in ["0", "1"] {
            let d = module_weights_dense(&StateVector::basis(&bits(s)).unwrap().density());
            assert!(d.max_abs_diff(&w) < 1e-15);
        }
        let plus = module_weights_dense(&StateVector::plus(1).unwrap().density());
        assert!(plus.max_abs_diff(&w) > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(remark_check(6, 10, &mut rng).unwrap().holds(1e-12));
    }

    #[test]
    fn conservation_small() {
        let r = conservation_check(5, 200, 3).unwrap();
        assert!(
            r.max_norm_drift_b4 < 1e-12
                && r.max_norm_drift_b2 < 1e-12
                && r.max_roundtrip_error < 1e-12
        );
    }

    #[test]
    fn verification_cap_is_enforced() {
        let opts = VerifyOptions {
            max_n: 40,
            ..Default::default()
        };
        assert!(matches!(
            run_verification(&opts),
            Err(Error::DenseTooLarge { .. })
        ));
        let fields = default_fields(6);
        assert!(fields.iter().sum::<f64>() < 0.25);
    }
}
