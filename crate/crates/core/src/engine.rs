//! Projected cost `C(θ) = φ(θ) · η` inside `B_4`, its reverse-mode gradient,
//! and `<Z_i>` readout through a co-evolved `B_2` vector.

use std::sync::Arc;

use crate::bits::BitString;
use crate::circuit::{Circuit, GateTable, TableCache};
use crate::combinatorics::rank_unchecked;
use crate::error::{Error, Result};
use crate::kernel::{
    buffer_from, frame_sign, layers, to_frame, zeroed_buffer, FramePairs, Layer, RunGate,
    WINDOW_MIN_ELEMENTS,
};
use crate::modspace::{project_basis_state, ModuleVector};
use crate::scalar::Scalar;

/// Default `|<Z_i>|` threshold below which a readout is ambiguous.
pub const READOUT_THRESHOLD: f64 = 0.5;

/// Working buffers for one trial: the evolving `B_4` vector, the reverse
/// sweep's interleaved `[φ, λ]` pairs, and optional forward snapshots.
#[derive(Clone, Debug)]
pub struct EvalState<T> {
    phi4: Vec<T>,
    joint: Vec<[T; 2]>,
    checkpoints: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> EvalState<T> {
    pub fn new() -> Self {
        Self {
            phi4: vec![],
            joint: vec![],
            checkpoints: vec![],
        }
    }
}

/// `B_4` action of one gate in the monomial frame.
#[derive(Clone, Debug)]
enum Gate4 {
    Runs(Arc<RunGate>),
    Pairs(Arc<FramePairs>),
}

impl Gate4 {
    fn runs(&self) -> &RunGate {
        match self {
            Gate4::Runs(g) => g,
            Gate4::Pairs(_) => unreachable!("layers holding explicit tables are not windowed"),
        }
    }

    #[inline]
    fn rotate<T: Scalar>(&self, v: &mut [T], c: T, s: T) {
        match self {
            Gate4::Runs(g) => g.rotate(v, c, s),
            Gate4::Pairs(p) => p.rotate(v, c, s),
        }
    }

    #[inline]
    fn backprop<T: Scalar>(&self, joint: &mut [[T; 2]], c: T, s: T) -> T {
        match self {
            Gate4::Runs(g) => g.backprop(joint, c, s),
            Gate4::Pairs(p) => p.backprop(joint, c, s),
        }
    }
}

impl<T: Scalar> Default for EvalState<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Precompiled evaluator for one circuit structure, initial state and
/// Hamiltonian vector. Parameters are supplied per call.
///
/// `B_4` vectors are held in the monomial frame `v'_S = ω_S v_S` (see
/// [`crate::kernel`]); inner products are unchanged by the sign flip.
#[derive(Clone, Debug)]
pub struct Evaluator<T> {
    n: usize,
    gates4: Vec<Gate4>,
    layers: Vec<Layer>,
    windowed: Vec<bool>,
    tables2: Vec<Arc<GateTable>>,
    init_bits: BitString,
    phi4_init: Vec<T>,
    eta: Vec<T>,
    checkpoint_stride: Option<usize>,
}

impl<T: Scalar> Evaluator<T> {
    pub fn new(
        circuit: &Circuit,
        cache: &TableCache,
        init_bits: &BitString,
        eta: ModuleVector<T>,
    ) -> Result<Self> {
        let n = circuit.n();
        if init_bits.len() != n {
            return Err(Error::QubitMismatch(n, init_bits.len()));
        }
        if eta.kappa() != 4 {
            return Err(Error::ModuleMismatch {
                expected: 4,
                got: eta.kappa(),
            });
        }
        if eta.n() != n {
            return Err(Error::QubitMismatch(n, eta.n()));
        }
        let gates4: Vec<Gate4> = circuit
            .gates()
            .iter()
            .map(|g| Ok(Gate4::Runs(Arc::new(RunGate::new(&g.generator)?))))
            .collect::<Result<_>>()?;
        let supports: Vec<_> = circuit
            .gates()
            .iter()
            .map(|g| g.generator.support())
            .collect();
        let layers = layers(&supports, 2 * n, WINDOW_MIN_ELEMENTS);
        let windowed = vec![true; layers.len()];
        let mut phi4_init = project_basis_state::<T>(init_bits, 4)?.into_coeffs();
        to_frame(&mut phi4_init, n);
        let mut eta = eta.into_coeffs();
        to_frame(&mut eta, n);
        Ok(Self {
            n,
            gates4,
            layers,
            windowed,
            tables2: cache.for_circuit(circuit, 2)?,
            init_bits: init_bits.clone(),
            phi4_init,
            eta,
            checkpoint_stride: None,
        })
    }

    /// Snapshot the forward state every `stride` gates, rounded up to the end
    /// of the enclosing layer; the reverse sweep restarts from these instead
    /// of relying only on inverse rotations.
    pub fn with_checkpoint_stride(mut self, stride: Option<usize>) -> Self {
        self.checkpoint_stride = stride.filter(|&s| s > 0);
        self
    }

    /// Replaces the `B_4` action of gate `q` by an explicit table; used to
    /// inject faults in checks.
    pub fn replace_table(&mut self, q: usize, table: GateTable) -> Result<()> {
        if q >= self.gates4.len() {
            return Err(Error::LengthMismatch(self.gates4.len(), q));
        }
        if table.generator().n() != self.n {
            return Err(Error::QubitMismatch(self.n, table.generator().n()));
        }
        self.gates4[q] = Gate4::Pairs(Arc::new(FramePairs::from_table(&table)?));
        if let Some(l) = self.layers.iter().position(|l| l.gates.contains(&q)) {
            self.windowed[l] = false;
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.gates4.len()
    }

    pub fn init_bits(&self) -> &BitString {
        &self.init_bits
    }

    fn angles(&self, theta: &[T]) -> Result<Vec<(T, T)>> {
        if theta.len() != self.gates4.len() {
            return Err(Error::LengthMismatch(self.gates4.len(), theta.len()));
        }
        Ok(theta
            .iter()
            .map(|&t| {
                let two = t + t;
                (two.cos(), two.sin())
            })
            .collect())
    }

    fn forward_layer(&self, l: usize, phi: &mut [T], angles: &[(T, T)]) {
        let layer = &self.layers[l];
        if !self.windowed[l] {
            for q in layer.gates.clone() {
                let (c, s) = angles[q];
                self.gates4[q].rotate(phi, c, s);
            }
            return;
        }
        for w in &layer.windows {
            for q in layer.gates.clone() {
                let (c, s) = angles[q];
                self.gates4[q].runs().rotate_window(phi, w.clone(), c, s);
            }
        }
    }

    fn backward_layer(&self, l: usize, joint: &mut [[T; 2]], angles: &[(T, T)], grad: &mut [T]) {
        let layer = &self.layers[l];
        if !self.windowed[l] {
            for q in layer.gates.clone().rev() {
                let (c, s) = angles[q];
                grad[q] = self.gates4[q].backprop(joint, c, s);
            }
            return;
        }
        for w in &layer.windows {
            for q in layer.gates.clone().rev() {
                let (c, s) = angles[q];
                grad[q] = grad[q]
                    + self.gates4[q]
                        .runs()
                        .backprop_window(joint, w.clone(), c, s);
            }
        }
    }

    fn evolve_frame(&self, theta: &[T]) -> Result<Vec<T>> {
        let angles = self.angles(theta)?;
        let mut phi = buffer_from(&self.phi4_init);
        for l in 0..self.layers.len() {
            self.forward_layer(l, &mut phi, &angles);
        }
        Ok(phi)
    }

    /// `φ` after the full circuit, in the basis of Hermitian words.
    pub fn evolve(&self, theta: &[T]) -> Result<ModuleVector<T>> {
        let mut phi = self.evolve_frame(theta)?;
        to_frame(&mut phi, self.n);
        ModuleVector::from_coeffs(self.n, 4, phi)
    }

    pub fn expectation(&self, theta: &[T]) -> Result<T> {
        Ok(dot(&self.evolve_frame(theta)?, &self.eta))
    }

    /// Cost and exact gradient by one forward and one reverse sweep.
    pub fn cost_and_gradient(&self, theta: &[T], state: &mut EvalState<T>) -> Result<(T, Vec<T>)> {
        let angles = self.angles(theta)?;
        let g = angles.len();
        refill(&mut state.phi4, &self.phi4_init);
        state.checkpoints.clear();
        for (l, layer) in self.layers.iter().enumerate() {
            self.forward_layer(l, &mut state.phi4, &angles);
            let end = layer.gates.end;
            if let Some(k) = self.checkpoint_stride {
                if end / k > layer.gates.start / k && end < g {
                    state.checkpoints.push((end, buffer_from(&state.phi4)));
                }
            }
        }
        let cost = dot(&state.phi4, &self.eta);

        if state.joint.len() != self.eta.len() {
            state.joint = zeroed_buffer(self.eta.len(), [T::zero(); 2]);
        }
        for ((j, &p), &e) in state.joint.iter_mut().zip(&state.phi4).zip(&self.eta) {
            *j = [p, e];
        }
        let mut grad = vec![T::zero(); g];
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if state
                .checkpoints
                .last()
                .is_some_and(|(end, _)| *end == layer.gates.end)
            {
                let (_, snap) = state.checkpoints.pop().expect("checked above");
                for (j, &p) in state.joint.iter_mut().zip(&snap) {
                    j[0] = p;
                }
            }
            self.backward_layer(l, &mut state.joint, &angles, &mut grad);
        }
        Ok((cost, grad))
    }

    pub fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        Ok(self.cost_and_gradient(theta, &mut EvalState::new())?.1)
    }

    /// `<Z_i>` for every qubit after the circuit.
    pub fn z_expectations(&self, theta: &[T]) -> Result<Vec<T>> {
        let angles = self.angles(theta)?;
        let mut phi2 = project_basis_state::<T>(&self.init_bits, 2)?;
        for (table, &(c, s)) in self.tables2.iter().zip(&angles) {
            table.rotate(phi2.coeffs_mut(), c, s);
        }
        let scale = T::from_f64_lossy((self.n as f64 / 2.0).exp2());
        Ok((0..self.n)
            .map(|i| phi2.coeffs()[rank_unchecked(&[2 * i, 2 * i + 1])] * scale)
            .collect())
    }

    /// `<Z_1 Z_j>` for every `j`, read from the evolved `B_4` vector. These
    /// stay at `±1` on superpositions of a bitstring and its complement,
    /// where `<Z_i>` washes out. Feeding them to [`extract_bits`] yields the
    /// representative with qubit 1 at `0`.
    pub fn zz_first(&self, theta: &[T]) -> Result<Vec<T>> {
        let phi = self.evolve_frame(theta)?;
        let scale = T::from_f64_lossy((self.n as f64 / 2.0).exp2());
        let mut out = vec![T::one()];
        out.extend((1..self.n).map(|j| {
            let s = [0, 1, 2 * j, 2 * j + 1];
            let v = phi[rank_unchecked(&s)] * scale;
            if frame_sign(&s, self.n) < 0 {
                -v
            } else {
                v
            }
        }));
        Ok(out)
    }

    /// `<Z_i>` readout, falling back to the `<Z_1 Z_j>` readout when some
    /// `<Z_i>` is ambiguous.
    pub fn readout(&self, theta: &[T], threshold: f64) -> Result<BitString> {
        extract_bits(&self.z_expectations(theta)?, threshold)
            .or_else(|_| extract_bits(&self.zz_first(theta)?, threshold))
    }
}

/// Copies `src` into `buf`, reallocating only when the length changes.
fn refill<T: Scalar>(buf: &mut Vec<T>, src: &[T]) {
    if buf.len() == src.len() {
        buf.copy_from_slice(src);
    } else {
        *buf = buffer_from(src);
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn expectation<T: Scalar>(
    circuit: &Circuit,
    theta: &[T],
    init_bits: &BitString,
    eta: &ModuleVector<T>,
) -> Result<T> {
    Evaluator::new(circuit, &TableCache::new(), init_bits, eta.clone())?.expectation(theta)
}

pub fn gradient<T: Scalar>(
    circuit: &Circuit,
    theta: &[T],
    init_bits: &BitString,
    eta: &ModuleVector<T>,
) -> Result<Vec<T>> {
    Evaluator::new(circuit, &TableCache::new(), init_bits, eta.clone())?.gradient(theta)
}

pub fn z_expectations<T: Scalar>(
    circuit: &Circuit,
    theta: &[T],
    init_bits: &BitString,
) -> Result<Vec<T>> {
    let eta = ModuleVector::zeros(circuit.n(), 4);
    Evaluator::new(circuit, &TableCache::new(), init_bits, eta)?.z_expectations(theta)
}

/// Rounds `<Z_i>` to bits: `0` above `threshold`, `1` below `-threshold`.
pub fn extract_bits<T: Scalar>(z: &[T], threshold: f64) -> Result<BitString> {
    z.iter()
        .enumerate()
        .map(|(site, v)| {
            let v = v.to_f64().unwrap_or(f64::NAN);
            if v > threshold {
                Ok(false)
            } else if v < -threshold {
                Ok(true)
            } else {
                Err(Error::AmbiguousReadout {
                    site: site + 1,
                    value: v,
                })
            }
        })
        .collect::<Result<Vec<_>>>()
        .map(BitString::from_bools)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, GeneratorKind};
    use crate::graph::Graph;
    use crate::modspace::project_maxcut;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_8, SQRT_2};

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn path3() -> (Circuit, ModuleVector<f64>) {
        let g = Graph::new(3, [(1, 2, 1), (2, 3, 1)]).unwrap();
        let c = Circuit::from_kinds(3, &[GeneratorKind::XX(1)], vec![FRAC_PI_8]).unwrap();
        (c, project_maxcut(&g).unwrap())
    }

    #[test]
    fn single_edge_expectations() {
        let g = Graph::new(2, [(1, 2, 1)]).unwrap();
        let eta = project_maxcut::<f64>(&g).unwrap();
        let c = build_ansatz(2, 0).unwrap();
        let zero = vec![0.0; c.num_params()];
        assert_abs_diff_eq!(
            expectation(&c, &zero, &bits("00"), &eta).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            expectation(&c, &zero, &bits("10"), &eta).unwrap(),
            -1.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn path_graph_closed_form() {
        let (c, eta) = path3();
        for t in [0.0, 0.2, FRAC_PI_8, 1.3, -2.0] {
            let got = expectation(&c, &[t], &bits("000"), &eta).unwrap();
            assert_abs_diff_eq!(got, 1.0 + (2.0 * t).cos(), epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            expectation(&c, &[FRAC_PI_8], &bits("000"), &eta).unwrap(),
            1.0 + SQRT_2 / 2.0,
            epsilon = 1e-12
        );
        let g = gradient(&c, &[FRAC_PI_8], &bits("000"), &eta).unwrap();
        assert_abs_diff_eq!(g[0], -SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn commuting_gates_have_zero_gradient() {
        // Z gates on |00> never leave the Z1 Z2 element
        let g = Graph::new(2, [(1, 2, 1)]).unwrap();
        let eta = project_maxcut::<f64>(&g).unwrap();
        let c = Circuit::from_kinds(
            2,
            &[GeneratorKind::Z(0), GeneratorKind::Z(1)],
            vec![0.4, -1.1],
        )
        .unwrap();
        assert_eq!(
            gradient(&c, &[0.4, -1.1], &bits("00"), &eta).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn z_readout_examples() {
        let c = build_ansatz(2, 0).unwrap();
        let zero = vec![0.0; c.num_params()];
        let z = z_expectations(&c, &zero, &bits("10")).unwrap();
        assert_abs_diff_eq!(z[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z[1], 1.0, epsilon = 1e-14);

        let c = Circuit::from_kinds(2, &[GeneratorKind::XY(0)], vec![FRAC_PI_2]).unwrap();
        let z = z_expectations(&c, &[FRAC_PI_2], &bits("00")).unwrap();
        assert_abs_diff_eq!(z[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(z[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn correlated_readout_survives_flip_superposition() {
        // exp(i pi/4 X1 Y2) |10> = (|10> + i|01>)/sqrt2 up to phases
        let c = Circuit::from_kinds(2, &[GeneratorKind::XY(0)], vec![FRAC_PI_8 * 2.0]).unwrap();
        let g = Graph::new(2, [(1, 2, 1)]).unwrap();
        let ev = Evaluator::new(
            &c,
            &TableCache::new(),
            &bits("10"),
            project_maxcut::<f64>(&g).unwrap(),
        )
        .unwrap();
        let theta = [FRAC_PI_8 * 2.0];
        let z = ev.z_expectations(&theta).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-12));
        let zz = ev.zz_first(&theta).unwrap();
        assert_abs_diff_eq!(zz[1], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(zz[1], ev.expectation(&theta).unwrap(), epsilon = 1e-12);
        assert_eq!(ev.readout(&theta, READOUT_THRESHOLD).unwrap(), bits("01"));
    }

    #[test]
    fn readout_rounding() {
        assert_eq!(
            extract_bits(&[-1.0, 1.0], READOUT_THRESHOLD).unwrap(),
            bits("10")
        );
        assert_eq!(
            extract_bits(&[0.99, -0.98, 0.97], READOUT_THRESHOLD).unwrap(),
            bits("010")
        );
        assert!(matches!(
            extract_bits(&[0.2, -1.0, 1.0], READOUT_THRESHOLD),
            Err(Error::AmbiguousReadout { site: 1, .. })
        ));
    }

    #[test]
    fn checkpoints_do_not_change_the_gradient() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
        let g = Graph::random_3_regular(6, &mut rng).unwrap();
        let c = build_ansatz(6, 2).unwrap();
        let cache = TableCache::new();
        let ev = Evaluator::new(&c, &cache, &bits("000000"), project_maxcut(&g).unwrap()).unwrap();
        let plain = ev.gradient(c.theta()).unwrap();
        let ev = ev.with_checkpoint_stride(Some(7));
        let (cost, chk) = ev
            .cost_and_gradient(c.theta(), &mut EvalState::new())
            .unwrap();
        assert_abs_diff_eq!(cost, ev.expectation(c.theta()).unwrap(), epsilon = 1e-12);
        for (a, b) in plain.iter().zip(&chk) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn length_mismatch_is_reported() {
        let (c, eta) = path3();
        assert!(matches!(
            expectation(&c, &[0.1, 0.2], &bits("000"), &eta),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            expectation(&c, &[0.1], &bits("00"), &eta),
            Err(Error::QubitMismatch(3, 2))
        ));
    }
}
