//! Nearest-neighbour matchgate ansatz and the sparse action of each gate on
//! a grade module.
//!
//! Every gate is `U(θ) = exp(iθγ)` with `γ` a Hermitian Pauli word that is a
//! product of two Majorana operators. Conjugation leaves a basis element
//! alone when it commutes with `γ` and otherwise rotates it into exactly one
//! partner, `U b_l U† = cos(2θ) b_l + s sin(2θ) b_l'` with `s = ±1` given by
//! `iγ b_l = s b_l'`. A [`GateTable`] stores those pairs once per generator.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{majorana_masks, majorana_product_raw, Pauli, PauliString, Phase};
use crate::combinatorics::{binomial, for_each_subset, ColexRanker};
use crate::error::{Error, Result};
use crate::modspace::{basis_pauli, dim_module, ModuleVector};
use crate::scalar::Scalar;

/// Generator families; sites are zero-based, two-site kinds act on `(i, i+1)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum GeneratorKind {
    Z(usize),
    XX(usize),
    XY(usize),
    YX(usize),
    YY(usize),
}

impl GeneratorKind {
    pub const TWO_SITE: [fn(usize) -> GeneratorKind; 4] = [
        GeneratorKind::XX,
        GeneratorKind::XY,
        GeneratorKind::YX,
        GeneratorKind::YY,
    ];

    fn letters(self) -> (usize, Pauli, Option<Pauli>) {
        match self {
            GeneratorKind::Z(i) => (i, Pauli::Z, None),
            GeneratorKind::XX(i) => (i, Pauli::X, Some(Pauli::X)),
            GeneratorKind::XY(i) => (i, Pauli::X, Some(Pauli::Y)),
            GeneratorKind::YX(i) => (i, Pauli::Y, Some(Pauli::X)),
            GeneratorKind::YY(i) => (i, Pauli::Y, Some(Pauli::Y)),
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, a, b) = self.letters();
        match b {
            None => write!(f, "{a}{}", i + 1),
            Some(b) => write!(f, "{a}{}{b}{}", i + 1, i + 2),
        }
    }
}

/// A quadratic Majorana generator `γ` together with its Pauli word and
/// two-element Majorana support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    kind: GeneratorKind,
    pauli: PauliString,
    support: (usize, usize),
}

impl Generator {
    pub fn new(kind: GeneratorKind, n: usize) -> Result<Self> {
        let (site, a, b) = kind.letters();
        let last = site + b.map_or(0, |_| 1);
        if last >= n {
            return Err(Error::MajoranaOutOfRange { index: 2 * last, n });
        }
        let mut letters = vec![Pauli::I; n];
        letters[site] = a;
        if let Some(b) = b {
            letters[site + 1] = b;
        }
        let pauli = PauliString::from_letters(&letters, Phase::ONE)?;
        // the support lies within the four Majoranas of sites (site, site+1)
        let lo = 2 * site;
        let hi = (2 * last + 2).min(2 * n);
        let support = (lo..hi)
            .flat_map(|p| (p + 1..hi).map(move |q| (p, q)))
            .find(|&(p, q)| majorana_product_raw([p, q], n).same_letters(&pauli))
            .expect("matchgate generators are quadratic in Majorana operators");
        Ok(Self {
            kind,
            pauli,
            support,
        })
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn pauli(&self) -> &PauliString {
        &self.pauli
    }

    pub fn support(&self) -> (usize, usize) {
        self.support
    }

    pub fn n(&self) -> usize {
        self.pauli.n()
    }
}

/// Pairing of basis ranks under one generator within `B_κ`.
///
/// `plus` holds pairs `(l, l')` with sign `+1`, `minus` those with `-1`;
/// always `l < l'`, and no rank appears twice.
#[derive(Clone, Debug, PartialEq)]
pub struct GateTable {
    generator: Generator,
    kappa: usize,
    plus: Vec<(u32, u32)>,
    minus: Vec<(u32, u32)>,
}

impl GateTable {
    pub fn build(generator: &Generator, kappa: usize) -> Result<Self> {
        let n = generator.n();
        if kappa == 0 || kappa > 2 * n {
            return Err(Error::UnsupportedGrade(kappa));
        }
        let dim = dim_module(kappa, n);
        if dim > u32::MAX as usize {
            return Err(Error::UnsupportedGrade(kappa));
        }
        let (a, b) = generator.support;
        let total = 2 * n;
        let ranker = (kappa <= 4).then(|| ColexRanker::new(total));
        let rank_of = |s: &[usize]| match &ranker {
            Some(r) => r.rank(s),
            None => crate::combinatorics::rank_unchecked(s),
        };
        let i_gamma = generator.pauli.with_phase(Phase::I);
        // compressed index -> actual Majorana index, skipping a and b
        let lift = |t: usize| {
            if t < a {
                t
            } else if t + 1 < b {
                t + 1
            } else {
                t + 2
            }
        };
        let (ma, mb) = (majorana_masks(a), majorana_masks(b));
        let swap = PauliString::from_masks(n, ma.0 ^ mb.0, ma.1 ^ mb.1, Phase::ONE)?;

        let mut plus = Vec::new();
        let mut minus = Vec::new();
        let mut with_a = Vec::with_capacity(kappa);
        let mut with_b = Vec::with_capacity(kappa);
        for_each_subset(total - 2, kappa - 1, |rest| {
            with_a.clear();
            with_b.clear();
            with_a.extend(rest.iter().map(|&t| lift(t)));
            with_b.extend_from_slice(&with_a);
            let pa = with_a.partition_point(|&x| x < a);
            with_a.insert(pa, a);
            let pb = with_b.partition_point(|&x| x < b);
            with_b.insert(pb, b);

            let p = basis_pauli(&with_a, n);
            let image = i_gamma.mul_unchecked(&p);
            // the image must be ± the partner's Hermitian word
            assert!(
                image.same_letters(&p.mul_unchecked(&swap)),
                "generator {} maps {:?} outside the module",
                generator.kind,
                with_a
            );
            debug_assert!(image.same_letters(&basis_pauli(&with_b, n)));
            let sign = image
                .phase()
                .sign()
                .expect("i[γ, b] is Hermitian for anticommuting pairs");
            let (l, lp) = (rank_of(&with_a) as u32, rank_of(&with_b) as u32);
            let (lo, hi, s) = if l < lp {
                (l, lp, sign)
            } else {
                (lp, l, -sign)
            };
            if s > 0 {
                plus.push((lo, hi));
            } else {
                minus.push((lo, hi));
            }
        });
        plus.sort_unstable();
        minus.sort_unstable();
        Ok(Self {
            generator: *generator,
            kappa,
            plus,
            minus,
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn pair_count(&self) -> usize {
        self.plus.len() + self.minus.len()
    }

    /// `C(2n-2, κ-1)` pairs for any quadratic generator.
    pub fn expected_pair_count(kappa: usize, n: usize) -> usize {
        binomial(2 * n - 2, kappa - 1)
    }

    /// All pairs `(l, l', sign)` with `l < l'`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        self.plus
            .iter()
            .map(|&(l, h)| (l as usize, h as usize, 1))
            .chain(
                self.minus
                    .iter()
                    .map(|&(l, h)| (l as usize, h as usize, -1)),
            )
    }

    /// Copy with the sign of one pair flipped, for fault-injection checks.
    pub fn with_corrupted_sign(&self) -> Self {
        let mut t = self.clone();
        if let Some(p) = t.plus.pop() {
            t.minus.push(p);
        } else if let Some(p) = t.minus.pop() {
            t.plus.push(p);
        }
        t
    }

    /// `v <- R(θ) v` on raw coefficients, with `cos = cos 2θ`, `sin = sin 2θ`.
    #[inline]
    pub fn rotate<T: Scalar>(&self, v: &mut [T], cos: T, sin: T) {
        rotate_pairs(&self.plus, v, cos, sin);
        rotate_pairs(&self.minus, v, cos, -sin);
    }
}

#[inline]
fn rotate_pairs<T: Scalar>(pairs: &[(u32, u32)], v: &mut [T], c: T, s: T) {
    for &(l, h) in pairs {
        let (l, h) = (l as usize, h as usize);
        let (a, b) = (v[l], v[h]);
        v[l] = c * a - s * b;
        v[h] = s * a + c * b;
    }
}

/// Applies `exp(iθγ)` conjugation to a module vector in place.
pub fn apply_gate<T: Scalar>(v: &mut ModuleVector<T>, table: &GateTable, theta: T) -> Result<()> {
    if v.kappa() != table.kappa {
        return Err(Error::ModuleMismatch {
            expected: table.kappa,
            got: v.kappa(),
        });
    }
    if v.n() != table.generator.n() {
        return Err(Error::QubitMismatch(table.generator.n(), v.n()));
    }
    let two = theta + theta;
    table.rotate(v.coeffs_mut(), two.cos(), two.sin());
    Ok(())
}

pub fn build_gate_table(generator: &Generator, kappa: usize) -> Result<GateTable> {
    GateTable::build(generator, kappa)
}

/// Position of a gate in the ansatz: block, layer (1 = single-qubit Z,
/// 2 = odd bonds, 3 = even bonds) and qubit / bond index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GateSlot {
    pub block: usize,
    pub layer: usize,
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub generator: Generator,
    pub slot: GateSlot,
}

/// Ordered gate list; gate `q` is driven by parameter `theta[q]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    theta: Vec<f64>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != gates.len() {
            return Err(Error::LengthMismatch(gates.len(), theta.len()));
        }
        if let Some(g) = gates.iter().find(|g| g.generator.n() != n) {
            return Err(Error::QubitMismatch(n, g.generator.n()));
        }
        Ok(Self { n, gates, theta })
    }

    /// Convenience for hand-built circuits: one gate per kind, slots numbered
    /// sequentially in block 0.
    pub fn from_kinds(n: usize, kinds: &[GeneratorKind], theta: Vec<f64>) -> Result<Self> {
        let gates = kinds
            .iter()
            .enumerate()
            .map(|(k, &kind)| {
                Ok(Gate {
                    generator: Generator::new(kind, n)?,
                    slot: GateSlot {
                        block: 0,
                        layer: 0,
                        position: k,
                    },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, gates, theta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn num_params(&self) -> usize {
        self.gates.len()
    }

    pub fn set_theta(&mut self, theta: Vec<f64>) -> Result<()> {
        if theta.len() != self.gates.len() {
            return Err(Error::LengthMismatch(self.gates.len(), theta.len()));
        }
        self.theta = theta;
        Ok(())
    }

    /// Copy with one extra gate at the end (parameter appended).
    pub fn with_gate(&self, generator: Generator, theta: f64) -> Result<Self> {
        let mut c = self.clone();
        if generator.n() != self.n {
            return Err(Error::QubitMismatch(self.n, generator.n()));
        }
        let slot = GateSlot {
            block: usize::MAX,
            layer: 0,
            position: self.gates.len(),
        };
        c.gates.push(Gate { generator, slot });
        c.theta.push(theta);
        Ok(c)
    }
}

/// Brickwork matchgate ansatz: per block, `Z` rotations on every qubit,
/// then bonds `(1,2), (3,4), ...`, then bonds `(2,3), (4,5), ...`, each
/// two-qubit generator drawn uniformly from `{XX, XY, YX, YY}`. That is
/// `2n - 1` parameters per block. Parameters are uniform in `(-π, π)`.
#[derive(Clone, Copy, Debug)]
pub struct AnsatzBuilder {
    pub n: usize,
    pub blocks: Option<usize>,
}

impl AnsatzBuilder {
    pub fn new(n: usize) -> Self {
        Self { n, blocks: None }
    }

    pub fn blocks(mut self, blocks: usize) -> Self {
        self.blocks = Some(blocks);
        self
    }

    pub fn build(&self, seed: u64) -> Result<Circuit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.build_with_rng(&mut rng)
    }

    pub fn build_with_rng<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Circuit> {
        let n = self.n;
        if n < 2 {
            return Err(Error::TooFewQubits(n));
        }
        let blocks = self.blocks.unwrap_or(n);
        let mut gates = Vec::with_capacity(blocks * (2 * n - 1));
        for block in 0..blocks {
            for site in 0..n {
                gates.push(Gate {
                    generator: Generator::new(GeneratorKind::Z(site), n)?,
                    slot: GateSlot {
                        block,
                        layer: 1,
                        position: site,
                    },
                });
            }
            for (layer, first) in [(2, 0), (3, 1)] {
                for bond in (first..n - 1).step_by(2) {
                    let kind = GeneratorKind::TWO_SITE[rng.gen_range(0..4)](bond);
                    gates.push(Gate {
                        generator: Generator::new(kind, n)?,
                        slot: GateSlot {
                            block,
                            layer,
                            position: bond,
                        },
                    });
                }
            }
        }
        let theta = (0..gates.len())
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        Circuit::new(n, gates, theta)
    }
}

pub fn build_ansatz(n: usize, seed: u64) -> Result<Circuit> {
    AnsatzBuilder::new(n).build(seed)
}

/// Qubit count, Majorana support and grade.
type TableKey = (usize, (usize, usize), usize);

/// Shared, lazily built gate tables keyed by Majorana support and grade.
#[derive(Debug, Default)]
pub struct TableCache {
    tables: Mutex<HashMap<TableKey, Arc<GateTable>>>,
}

impl TableCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, generator: &Generator, kappa: usize) -> Result<Arc<GateTable>> {
        let key = (generator.n(), generator.support(), kappa);
        if let Some(t) = self.tables.lock().expect("table cache poisoned").get(&key) {
            return Ok(Arc::clone(t));
        }
        let table = Arc::new(GateTable::build(generator, kappa)?);
        let mut map = self.tables.lock().expect("table cache poisoned");
        Ok(Arc::clone(map.entry(key).or_insert(table)))
    }

    /// One table per gate of `circuit`, in gate order.
    pub fn for_circuit(&self, circuit: &Circuit, kappa: usize) -> Result<Vec<Arc<GateTable>>> {
        circuit
            .gates()
            .iter()
            .map(|g| self.get(&g.generator, kappa))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.tables.lock().expect("table cache poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::majorana_pauli;
    use crate::algebra::MajoranaIndex;
    use crate::combinatorics::unrank;
    use crate::modspace::project_basis_state;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn all_kinds(n: usize) -> Vec<GeneratorKind> {
        let mut v: Vec<GeneratorKind> = (0..n).map(GeneratorKind::Z).collect();
        for i in 0..n - 1 {
            v.extend(GeneratorKind::TWO_SITE.iter().map(|f| f(i)));
        }
        v
    }

    /// Brute force over every basis element: anticommutation by Pauli algebra,
    /// partner and sign from `iγ P_l`.
    fn brute_force_pairs(gen: &Generator, kappa: usize) -> Vec<(usize, usize, i8)> {
        let n = gen.n();
        let mut out = vec![];
        for l in 0..dim_module(kappa, n) {
            let s = unrank(l, kappa, 2 * n).unwrap();
            let p = basis_pauli(&s, n);
            if !gen.pauli().anticommutes(&p).unwrap() {
                continue;
            }
            let img = gen.pauli().with_phase(Phase::I).multiply(&p).unwrap();
            let lp = (0..dim_module(kappa, n))
                .find(|&m| basis_pauli(&unrank(m, kappa, 2 * n).unwrap(), n).same_letters(&img))
                .unwrap();
            let sign = img.phase().sign().unwrap();
            if l < lp {
                out.push((l, lp, sign));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn generator_words_are_quadratic_and_involutory() {
        for n in 2..=5 {
            for kind in all_kinds(n) {
                let g = Generator::new(kind, n).unwrap();
                let (a, b) = g.support();
                let prod = majorana_pauli(MajoranaIndex(a), n)
                    .unwrap()
                    .multiply(&majorana_pauli(MajoranaIndex(b), n).unwrap())
                    .unwrap();
                assert!(prod.same_letters(g.pauli()));
                assert_eq!(
                    g.pauli().multiply(g.pauli()).unwrap(),
                    PauliString::identity(n).unwrap()
                );
            }
        }
        assert_eq!(
            Generator::new(GeneratorKind::Z(0), 2).unwrap().support(),
            (0, 1)
        );
        assert_eq!(
            Generator::new(GeneratorKind::XX(0), 2).unwrap().support(),
            (1, 2)
        );
        assert!(Generator::new(GeneratorKind::XX(1), 2).is_err());
    }

    #[test]
    fn table_examples() {
        let z1 = Generator::new(GeneratorKind::Z(0), 2).unwrap();
        let t = GateTable::build(&z1, 2).unwrap();
        assert_eq!(t.pair_count(), 2);
        let mut ranks: Vec<usize> = t.pairs().flat_map(|(l, h, _)| [l, h]).collect();
        ranks.sort();
        let expected: Vec<usize> = (0..6)
            .filter(|&l| {
                let s = unrank(l, 2, 4).unwrap();
                s.iter().filter(|&&i| i < 2).count() == 1
            })
            .collect();
        assert_eq!(ranks, expected);

        let xx = Generator::new(GeneratorKind::XX(1), 3).unwrap();
        let t = GateTable::build(&xx, 4).unwrap();
        assert_eq!(t.pair_count(), 4);
        assert_eq!(t.pairs().count() * 2, 8);

        // elements containing both or neither support index are absent
        let (a, b) = xx.support();
        for (l, h, _) in t.pairs() {
            for r in [l, h] {
                let s = unrank(r, 4, 6).unwrap();
                assert_eq!(s.contains(&a) as u8 + s.contains(&b) as u8, 1);
            }
        }
    }

    #[test]
    fn tables_match_brute_force() {
        for n in 2..=5 {
            for kind in all_kinds(n) {
                let g = Generator::new(kind, n).unwrap();
                for kappa in [2, 4] {
                    let t = GateTable::build(&g, kappa).unwrap();
                    let mut got: Vec<_> = t.pairs().collect();
                    got.sort();
                    assert_eq!(got, brute_force_pairs(&g, kappa), "{kind} kappa={kappa}");
                }
            }
        }
    }

    #[test]
    fn pair_counts_follow_closed_form() {
        for n in 2..=8 {
            for kind in all_kinds(n) {
                let g = Generator::new(kind, n).unwrap();
                for kappa in [2, 4] {
                    let t = GateTable::build(&g, kappa).unwrap();
                    assert_eq!(t.pair_count(), GateTable::expected_pair_count(kappa, n));
                    let mut seen = std::collections::HashSet::new();
                    for (l, h, _) in t.pairs() {
                        assert!(l < h);
                        assert!(seen.insert(l) && seen.insert(h));
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_special_angles() {
        let g = Generator::new(GeneratorKind::XY(0), 3).unwrap();
        let t = GateTable::build(&g, 4).unwrap();
        let coeffs: Vec<f64> = (0..15).map(|k| (k as f64 * 0.37).sin()).collect();
        let v0 = ModuleVector::from_coeffs(3, 4, coeffs).unwrap();

        let mut v = v0.clone();
        apply_gate(&mut v, &t, 0.0).unwrap();
        assert_eq!(v, v0);

        let mut v = v0.clone();
        apply_gate(&mut v, &t, std::f64::consts::FRAC_PI_2).unwrap();
        let paired: std::collections::HashSet<usize> =
            t.pairs().flat_map(|(l, h, _)| [l, h]).collect();
        for l in 0..15 {
            let want = if paired.contains(&l) {
                -v0.coeffs()[l]
            } else {
                v0.coeffs()[l]
            };
            assert_abs_diff_eq!(v.coeffs()[l], want, epsilon = 1e-15);
        }

        // Z1 commutes with the Z1 Z2 element that carries |00>
        let z1 = Generator::new(GeneratorKind::Z(0), 2).unwrap();
        let t = GateTable::build(&z1, 4).unwrap();
        let phi = project_basis_state::<f64>(&"00".parse().unwrap(), 4).unwrap();
        for theta in [0.1, 1.0, -2.3] {
            let mut v = phi.clone();
            apply_gate(&mut v, &t, theta).unwrap();
            assert_eq!(v, phi);
        }

        let mut wrong = ModuleVector::<f64>::zeros(2, 2);
        assert!(matches!(
            apply_gate(&mut wrong, &t, 0.1),
            Err(Error::ModuleMismatch { .. })
        ));
    }

    #[test]
    fn ansatz_shape() {
        let c = build_ansatz(2, 1).unwrap();
        assert_eq!(c.num_params(), 6);
        assert_eq!(c.gates().len(), 6);
        let c = build_ansatz(4, 1).unwrap();
        assert_eq!(c.num_params(), 28);
        for n in 2..=9 {
            let c = build_ansatz(n, 7).unwrap();
            assert_eq!(c.num_params(), n * (2 * n - 1));
            for b in 0..n {
                let block: Vec<_> = c.gates().iter().filter(|g| g.slot.block == b).collect();
                assert_eq!(block.iter().filter(|g| g.slot.layer == 1).count(), n);
                assert_eq!(block.iter().filter(|g| g.slot.layer > 1).count(), n - 1);
            }
            assert!(c.theta().iter().all(|t| t.abs() < std::f64::consts::PI));
        }
        assert_eq!(build_ansatz(5, 9).unwrap(), build_ansatz(5, 9).unwrap());
        assert_ne!(
            build_ansatz(5, 9).unwrap().theta(),
            build_ansatz(5, 10).unwrap().theta()
        );
        assert_eq!(build_ansatz(1, 0), Err(Error::TooFewQubits(1)));
        assert_eq!(
            AnsatzBuilder::new(4)
                .blocks(2)
                .build(0)
                .unwrap()
                .num_params(),
            14
        );
    }

    #[test]
    fn cache_shares_tables() {
        let cache = TableCache::new();
        let c = build_ansatz(4, 3).unwrap();
        let tables = cache.for_circuit(&c, 4).unwrap();
        assert_eq!(tables.len(), c.num_params());
        assert!(cache.len() <= 4 + 4 * 3);
        let again = cache.for_circuit(&c, 4).unwrap();
        assert!(tables.iter().zip(&again).all(|(a, b)| Arc::ptr_eq(a, b)));
    }

    #[test]
    fn rotation_works_in_single_precision() {
        let g = Generator::new(GeneratorKind::YX(1), 4).unwrap();
        let t = GateTable::build(&g, 4).unwrap();
        let mut v =
            ModuleVector::<f32>::from_coeffs(4, 4, (0..70).map(|k| k as f32 / 70.0).collect())
                .unwrap();
        let before = v.norm();
        apply_gate(&mut v, &t, 0.7f32).unwrap();
        assert!((v.norm() - before).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn rotations_are_isometries_and_invertible(
            seed in any::<u64>(), theta in -4.0f64..4.0, which in 0usize..24,
        ) {
            let n = 5;
            let kinds = all_kinds(n);
            let g = Generator::new(kinds[which % kinds.len()], n).unwrap();
            let t = GateTable::build(&g, 4).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coeffs: Vec<f64> = (0..dim_module(4, n)).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let v0 = ModuleVector::from_coeffs(n, 4, coeffs).unwrap();
            let mut v = v0.clone();
            apply_gate(&mut v, &t, theta).unwrap();
            prop_assert!((v.norm() - v0.norm()).abs() < 1e-12);
            apply_gate(&mut v, &t, -theta).unwrap();
            for (a, b) in v.coeffs().iter().zip(v0.coeffs()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
