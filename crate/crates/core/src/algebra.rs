//! Phase-tracked Pauli words in symplectic form and the Jordan–Wigner
//! Majorana operators built from them.
//!
//! A [`PauliString`] stores one x-bit and one z-bit per site (bit `k` is
//! qubit `k + 1`) together with a power of `i`. The letters are always the
//! Hermitian ones (`Y` is stored as `x = z = 1`), so a word with phase
//! exponent 0 or 2 is a Hermitian operator.

use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};

/// Largest supported register; words are packed into `u128` masks.
pub const MAX_QUBITS: usize = 128;

/// Element of the cyclic group `{1, i, -1, -i}` stored as an exponent of `i`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(e: u32) -> Self {
        Phase((e & 3) as u8)
    }

    pub fn exponent(self) -> u8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 & 1 == 0
    }

    /// `+1` or `-1` for real phases.
    pub fn sign(self) -> Option<i8> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn conj(self) -> Self {
        Phase((4 - self.0) & 3)
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) & 3)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::UnsupportedQubitCount(n));
    }
    Ok(())
}

fn low_mask(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// An `n`-site Pauli word with an exact phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u128,
    z: u128,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(Self {
            n,
            x: 0,
            z: 0,
            phase: Phase::ONE,
        })
    }

    /// Builds a word from raw symplectic masks. Bits above `n` are rejected.
    pub fn from_masks(n: usize, x: u128, z: u128, phase: Phase) -> Result<Self> {
        check_n(n)?;
        let m = low_mask(n);
        if x & !m != 0 || z & !m != 0 {
            return Err(Error::UnsupportedQubitCount(n));
        }
        Ok(Self { n, x, z, phase })
    }

    pub fn from_letters(letters: &[Pauli], phase: Phase) -> Result<Self> {
        check_n(letters.len())?;
        let (mut x, mut z) = (0u128, 0u128);
        for (k, p) in letters.iter().enumerate() {
            let (xb, zb) = p.bits();
            x |= (xb as u128) << k;
            z |= (zb as u128) << k;
        }
        Ok(Self {
            n: letters.len(),
            x,
            z,
            phase,
        })
    }

    /// Parses words like `"ZXI"` (qubit 1 first).
    pub fn parse(s: &str) -> Result<Self> {
        let letters: Vec<Pauli> = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse {
                    line: 0,
                    msg: format!("bad Pauli letter {other:?}"),
                }),
            })
            .collect::<Result<_>>()?;
        Self::from_letters(&letters, Phase::ONE)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u128 {
        self.x
    }

    pub fn z_mask(&self) -> u128 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, site: usize) -> Pauli {
        Pauli::from_bits((self.x >> site) & 1 == 1, (self.z >> site) & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n).map(|k| self.letter(k)).collect()
    }

    /// Same letters, ignoring phase.
    pub fn same_letters(&self, other: &PauliString) -> bool {
        self.n == other.n && self.x == other.x && self.z == other.z
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// True when every letter is `I` or `Z`.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        if self.n != other.n {
            return Err(Error::QubitMismatch(self.n, other.n));
        }
        Ok(self.mul_unchecked(other))
    }

    /// Site-wise product. With Hermitian letters `P = i^{|x&z|} X^x Z^z`, so
    /// `P1 P2 = i^{|x1&z1| + |x2&z2| + 2|z1&x2| - |x3&z3|} P3`.
    pub(crate) fn mul_unchecked(&self, other: &PauliString) -> PauliString {
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let e = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * MAX_QUBITS as u32
            - (x & z).count_ones();
        PauliString {
            n: self.n,
            x,
            z,
            phase: self.phase * other.phase * Phase::from_exponent(e),
        }
    }

    pub fn anticommutes(&self, other: &PauliString) -> Result<bool> {
        if self.n != other.n {
            return Err(Error::QubitMismatch(self.n, other.n));
        }
        Ok(self.anticommutes_unchecked(other))
    }

    pub(crate) fn anticommutes_unchecked(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) & 1 == 1
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        for k in 0..self.n {
            write!(f, "{}", self.letter(k))?;
        }
        Ok(())
    }
}

/// One of the `2n` Majorana operators. `value = 2(site) + flavor` with
/// zero-based `site` and flavor 0 for `c^X`, 1 for `c^Y`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MajoranaIndex(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    X,
    Y,
}

impl MajoranaIndex {
    pub fn new(site: usize, flavor: Flavor) -> Self {
        MajoranaIndex(2 * site + matches!(flavor, Flavor::Y) as usize)
    }

    /// Zero-based site.
    pub fn site(self) -> usize {
        self.0 / 2
    }

    pub fn flavor(self) -> Flavor {
        if self.0.is_multiple_of(2) {
            Flavor::X
        } else {
            Flavor::Y
        }
    }
}

/// Symplectic masks of a Majorana operator; phase is always `+1`.
#[inline]
pub(crate) fn majorana_masks(index: usize) -> (u128, u128) {
    let site = index / 2;
    let x = 1u128 << site;
    let below = x - 1;
    let z = if index.is_multiple_of(2) {
        below
    } else {
        below | x
    };
    (x, z)
}

/// Jordan–Wigner string: `Z` on every site below the Majorana's site,
/// then `X` or `Y`, then identities.
pub fn majorana_pauli(idx: MajoranaIndex, n: usize) -> Result<PauliString> {
    check_n(n)?;
    if idx.0 >= 2 * n {
        return Err(Error::MajoranaOutOfRange { index: idx.0, n });
    }
    let (x, z) = majorana_masks(idx.0);
    Ok(PauliString {
        n,
        x,
        z,
        phase: Phase::ONE,
    })
}

pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    a.multiply(b)
}

pub fn anticommutes(a: &PauliString, b: &PauliString) -> Result<bool> {
    a.anticommutes(b)
}

/// Ordered product `c_{i1} c_{i2} ... c_{ik}` of strictly increasing indices.
pub fn majorana_product(indices: &[MajoranaIndex], n: usize) -> Result<PauliString> {
    check_n(n)?;
    for w in indices.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::UnsortedIndices);
        }
    }
    if let Some(last) = indices.last() {
        if last.0 >= 2 * n {
            return Err(Error::MajoranaOutOfRange { index: last.0, n });
        }
    }
    Ok(majorana_product_raw(indices.iter().map(|m| m.0), n))
}

/// Unchecked product over raw indices; callers guarantee validity.
pub(crate) fn majorana_product_raw(
    indices: impl IntoIterator<Item = usize>,
    n: usize,
) -> PauliString {
    let mut acc = PauliString {
        n,
        x: 0,
        z: 0,
        phase: Phase::ONE,
    };
    for i in indices {
        let (x, z) = majorana_masks(i);
        acc = acc.mul_unchecked(&PauliString {
            n,
            x,
            z,
            phase: Phase::ONE,
        });
    }
    acc
}
