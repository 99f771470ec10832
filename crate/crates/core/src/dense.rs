//! Dense `2^n` statevectors and density matrices for small-n oracles.
//!
//! Basis index bit `k` is qubit `k + 1`, matching [`BitString::to_mask`].

use num_complex::Complex64;

use crate::algebra::PauliString;
use crate::bits::BitString;
use crate::error::{Error, Result};

pub const MAX_DENSE_QUBITS: usize = 12;

fn check_dense(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::DenseTooLarge {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

/// `P |r> = phase(r) |r ^ x>` for a Pauli word.
#[inline]
fn pauli_action(p: &PauliString, r: usize) -> (usize, Complex64) {
    let x = p.x_mask() as usize;
    let z = p.z_mask() as usize;
    // P = i^e i^{|x&z|} X^x Z^z
    let mut e = p.phase().exponent() as u32 + (x & z).count_ones();
    if (z & r).count_ones() & 1 == 1 {
        e += 2;
    }
    (r ^ x, I_POW[(e & 3) as usize])
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(bits: &BitString) -> Result<Self> {
        let n = bits.len();
        check_dense(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[bits.to_mask() as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    /// `|+>^{⊗n}`.
    pub fn plus(n: usize) -> Result<Self> {
        check_dense(n)?;
        let a = (1.0 / (1u64 << n) as f64).sqrt();
        Ok(Self {
            n,
            amps: vec![Complex64::new(a, 0.0); 1 << n],
        })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_dense(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `psi <- exp(i theta P) psi = cos(theta) psi + i sin(theta) P psi` for
    /// an involutory Hermitian word `P`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::QubitMismatch(p.n(), self.n));
        }
        let (c, s) = (theta.cos(), theta.sin());
        let is = Complex64::new(0.0, s);
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (r, &a) in self.amps.iter().enumerate() {
            out[r] += a * c;
            let (t, ph) = pauli_action(p, r);
            out[t] += is * ph * a;
        }
        self.amps = out;
        Ok(())
    }

    /// `<psi| P |psi>`.
    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        if p.n() != self.n {
            return Err(Error::QubitMismatch(p.n(), self.n));
        }
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(r, &a)| {
                let (t, ph) = pauli_action(p, r);
                self.amps[t].conj() * ph * a
            })
            .sum())
    }

    /// `<psi| D |psi>` for a diagonal observable given by its diagonal.
    pub fn diagonal_expectation(&self, diag: &[f64]) -> Result<f64> {
        if diag.len() != self.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                got: diag.len(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(diag)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum())
    }

    pub fn density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mut data = vec![Complex64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[r * d + c] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix { n: self.n, data }
    }
}

/// Row-major `2^n x 2^n` density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    /// Checks Hermiticity and unit trace.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dense(n)?;
        let d = 1usize << n;
        if data.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                got: data.len(),
            });
        }
        for r in 0..d {
            for c in r..d {
                if (data[r * d + c] - data[c * d + r].conj()).norm() > 1e-10 {
                    return Err(Error::NotHermitian);
                }
            }
        }
        let tr: f64 = (0..d).map(|k| data[k * d + k].re).sum();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(tr));
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim() + c]
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn pauli_trace(&self, p: &PauliString) -> Complex64 {
        // Tr[rho P] = sum_r <r| rho P |r>
        (0..self.dim())
            .map(|r| {
                let (t, ph) = pauli_action(p, r);
                self.get(r, t) * ph
            })
            .sum()
    }
}

/// In-place unnormalized Walsh–Hadamard transform.
pub(crate) fn walsh_hadamard(v: &mut [Complex64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for k in block..block + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_rotation_matches_closed_form() {
        // exp(i theta X2 X3) |000> = cos|000> + i sin|011>
        let mut psi = StateVector::basis(&"000".parse().unwrap()).unwrap();
        let xx = PauliString::parse("IXX").unwrap();
        let t = 0.3;
        psi.apply_pauli_rotation(&xx, t).unwrap();
        assert!((psi.amplitudes()[0] - Complex64::new(t.cos(), 0.0)).norm() < 1e-15);
        assert!((psi.amplitudes()[0b110] - Complex64::new(0.0, t.sin())).norm() < 1e-15);
    }

    #[test]
    fn y_action() {
        // Y|0> = i|1>
        let psi = StateVector::basis(&"0".parse().unwrap()).unwrap();
        let y = PauliString::parse("Y").unwrap();
        let (t, ph) = pauli_action(&y, 0);
        assert_eq!(t, 1);
        assert_eq!(ph, Complex64::new(0.0, 1.0));
        assert_eq!(psi.pauli_expectation(&y).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn density_validation() {
        let rho = StateVector::plus(2).unwrap().density();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let mut bad = rho.data.clone();
        bad[0] *= 2.0;
        assert!(matches!(
            DensityMatrix::new(2, bad),
            Err(Error::NotNormalized(_))
        ));
        assert!(matches!(
            StateVector::plus(13),
            Err(Error::DenseTooLarge { .. })
        ));
    }

    #[test]
    fn wht_of_delta_is_flat() {
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[0] = Complex64::new(1.0, 0.0);
        walsh_hadamard(&mut v);
        assert!(v
            .iter()
            .all(|x| (x - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }
}
