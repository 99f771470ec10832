//! Majorana grade modules `B_κ`: basis indexing, the real phase convention,
//! and projections of computational-basis states and Ising Hamiltonians.
//!
//! Basis element `l` of `B_κ` is the κ-subset of Majorana indices with colex
//! rank `l`. Its normalized operator is `b_l = i^s c_{i1}...c_{iκ} / 2^{n/2}`
//! where `s` cancels the phase of the Majorana product, so `b_l` is the bare
//! Hermitian Pauli word divided by `2^{n/2}`. Every projection below is then
//! real.

use serde::Serialize;

use crate::algebra::{majorana_product, majorana_product_raw, MajoranaIndex, PauliString};
use crate::bits::BitString;
use crate::combinatorics::{binomial, for_each_subset, rank, rank_unchecked, unrank};
use crate::dense::{walsh_hadamard, DensityMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Scalar;

/// `dim(B_κ) = C(2n, κ)`.
pub fn dim_module(kappa: usize, n: usize) -> usize {
    binomial(2 * n, kappa)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisElement {
    n: usize,
    indices: Vec<usize>,
    rank: usize,
}

impl BasisElement {
    pub fn from_indices(n: usize, indices: &[MajoranaIndex]) -> Result<Self> {
        let raw: Vec<usize> = indices.iter().map(|m| m.0).collect();
        let rank = rank(&raw, 2 * n)?;
        Ok(Self {
            n,
            indices: raw,
            rank,
        })
    }

    pub fn from_rank(n: usize, kappa: usize, rank: usize) -> Result<Self> {
        let indices = unrank(rank, kappa, 2 * n)?;
        Ok(Self { n, indices, rank })
    }

    pub fn kappa(&self) -> usize {
        self.indices.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// The raw Majorana product with its phase.
    pub fn majorana_product(&self) -> Result<PauliString> {
        let idx: Vec<MajoranaIndex> = self.indices.iter().map(|&i| MajoranaIndex(i)).collect();
        majorana_product(&idx, self.n)
    }

    /// Hermitian word `i^s c_{i1}...c_{iκ}` (phase `+1`); the basis operator
    /// is this divided by `2^{n/2}`.
    pub fn pauli(&self) -> PauliString {
        basis_pauli(&self.indices, self.n)
    }
}

#[inline]
pub(crate) fn basis_pauli(indices: &[usize], n: usize) -> PauliString {
    majorana_product_raw(indices.iter().copied(), n).with_phase(crate::algebra::Phase::ONE)
}

/// Exponent `s` with `i^s · product = +P` for the element's Majorana product.
pub fn basis_phase_convention(element: &BasisElement) -> Result<u8> {
    let p = element.majorana_product()?;
    Ok(p.phase().conj().exponent())
}

/// Dense real coefficient vector over `B_κ`; the Euclidean norm equals the
/// Hilbert–Schmidt norm of the represented operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleVector<T> {
    n: usize,
    kappa: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> ModuleVector<T> {
    pub fn zeros(n: usize, kappa: usize) -> Self {
        Self {
            n,
            kappa,
            coeffs: vec![T::zero(); dim_module(kappa, n)],
        }
    }

    pub fn from_coeffs(n: usize, kappa: usize, coeffs: Vec<T>) -> Result<Self> {
        let expected = dim_module(kappa, n);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { n, kappa, coeffs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn norm(&self) -> T {
        self.coeffs.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        if self.kappa != other.kappa {
            return Err(Error::ModuleMismatch {
                expected: self.kappa,
                got: other.kappa,
            });
        }
        if self.n != other.n {
            return Err(Error::QubitMismatch(self.n, other.n));
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| a * b)
            .sum())
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> Vec<usize> {
        (0..self.coeffs.len())
            .filter(|&l| self.coeffs[l] != T::zero())
            .collect()
    }
}

/// Majorana subset `{c^X_s, c^Y_s : s ∈ sites}`; its basis word is `Π Z_s`.
fn site_pairs(sites: &[usize]) -> Vec<usize> {
    sites.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect()
}

/// Coefficients `Tr[b_l ρ]` of a computational-basis state in `B_κ`.
pub fn project_basis_state<T: Scalar>(bits: &BitString, kappa: usize) -> Result<ModuleVector<T>> {
    let n = bits.len();
    crate::algebra::PauliString::identity(n)?;
    if kappa % 2 == 1 || kappa > 2 * n {
        return Err(Error::UnsupportedGrade(kappa));
    }
    let mut v = ModuleVector::<T>::zeros(n, kappa);
    let mag = T::from_f64_lossy((-(n as f64) / 2.0).exp2());
    for_each_subset(n, kappa / 2, |sites| {
        let flips = sites.iter().filter(|&&s| bits.get(s)).count();
        let l = rank_unchecked(&site_pairs(sites));
        v.coeffs[l] = if flips % 2 == 0 { mag } else { -mag };
    });
    Ok(v)
}

/// Coefficients `Tr[b_l H]` of `H = Σ w_ij Z_i Z_j` in `B_4`.
pub fn project_maxcut<T: Scalar>(graph: &Graph) -> Result<ModuleVector<T>> {
    let n = graph.n();
    crate::algebra::PauliString::identity(n)?;
    let mut v = ModuleVector::<T>::zeros(n, 4);
    let scale = (n as f64 / 2.0).exp2();
    for e in graph.edges() {
        let l = rank_unchecked(&site_pairs(&[e.u - 1, e.v - 1]));
        v.coeffs[l] = v.coeffs[l] + T::from_f64_lossy(e.weight as f64 * scale);
    }
    Ok(v)
}

/// Hilbert–Schmidt norms `‖ρ_κ‖` for `κ = 0..=2n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleWeights(Vec<f64>);

impl ModuleWeights {
    pub fn from_vec(weights: Vec<f64>) -> Self {
        Self(weights)
    }

    pub fn get(&self, kappa: usize) -> f64 {
        self.0.get(kappa).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &ModuleWeights) -> f64 {
        (0..self.0.len().max(other.0.len()))
            .map(|k| (self.get(k) - other.get(k)).abs())
            .fold(0.0, f64::max)
    }

    /// `Σ_κ ‖ρ^a_κ‖ ‖ρ^b_κ‖`.
    pub fn overlap_cap(&self, other: &ModuleWeights) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn squared_sum(&self) -> f64 {
        self.0.iter().map(|w| w * w).sum()
    }
}

/// Majorana grade of every Pauli word, indexed by `x | z << n`.
pub(crate) fn pauli_grades(n: usize) -> Vec<u8> {
    let total = 1usize << (2 * n);
    let mut letters = vec![0usize; total];
    let mut grade = vec![0u8; total];
    let maj: Vec<usize> = (0..2 * n)
        .map(|i| {
            let (x, z) = crate::algebra::majorana_masks(i);
            (x as usize) | ((z as usize) << n)
        })
        .collect();
    for s in 1..total {
        let low = s.trailing_zeros() as usize;
        let word = letters[s & (s - 1)] ^ maj[low];
        letters[s] = word;
        grade[word] = s.count_ones() as u8;
    }
    grade
}

/// Dense verification oracle: per-grade Hilbert–Schmidt norms of `ρ`.
pub fn module_weights_dense(state: &DensityMatrix) -> ModuleWeights {
    let n = state.n();
    let d = state.dim();
    let grades = pauli_grades(n);
    let mut sq = vec![0.0f64; 2 * n + 1];
    let mut buf = vec![num_complex::Complex64::new(0.0, 0.0); d];
    for x in 0..d {
        for (r, slot) in buf.iter_mut().enumerate() {
            *slot = state.get(r, r ^ x);
        }
        walsh_hadamard(&mut buf);
        for (z, val) in buf.iter().enumerate() {
            sq[grades[x | (z << n)] as usize] += val.norm_sqr();
        }
    }
    let scale = 1.0 / d as f64;
    ModuleWeights(sq.into_iter().map(|s| (s * scale).sqrt()).collect())
}
