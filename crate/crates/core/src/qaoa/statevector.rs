//! Exact statevector kernel: 2^n complex amplitudes, variable 0 at the least
//! significant bit of the index.

use num_complex::Complex64;

use crate::qubo::IsingModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Uniform superposition: every amplitude `2^(-n/2)`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Statevector { n, amps: vec![amp; dim] }
    }

    /// Computational basis state `|index>`.
    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        assert!(index < dim);
        let mut amps = vec![Complex64::ZERO; dim];
        amps[index] = Complex64::ONE;
        Statevector { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Reset to the uniform superposition without reallocating.
    pub fn reset_uniform(&mut self) {
        let amp = Complex64::new(1.0 / (self.dim() as f64).sqrt(), 0.0);
        self.amps.iter_mut().for_each(|a| *a = amp);
    }
}

/// Precomputed Ising energies per basis index (offset excluded: in the phase
/// it is global, and expectations add it back at the end).
#[derive(Debug, Clone)]
pub struct CostDiagonal {
    energies: Vec<f64>,
    offset: f64,
}

impl CostDiagonal {
    /// Build by single-bit recursion: `E(x)` extends `E(x without its lowest
    /// set bit)` with the field and coupling changes of that one spin flip,
    /// `O(n 2^n)` total.
    pub fn new(ising: &IsingModel) -> Self {
        let n = ising.n_spins();
        let dim = 1usize << n;
        let mut energies = vec![0.0; dim];

        // All-zeros bitstring: every spin +1.
        let mut e0 = 0.0;
        for i in 0..n {
            e0 += ising.field(i);
            for j in i + 1..n {
                e0 += ising.coupling(i, j);
            }
        }
        energies[0] = e0;

        for x in 1..dim {
            let bit = x.trailing_zeros() as usize;
            let prev = x ^ (1 << bit);
            // Spin `bit` flips +1 -> -1 relative to `prev`.
            let mut delta = -2.0 * ising.field(bit);
            for j in 0..n {
                if j != bit {
                    let zj = if prev >> j & 1 == 1 { -1.0 } else { 1.0 };
                    delta -= 2.0 * ising.coupling(bit, j) * zj;
                }
            }
            energies[x] = energies[prev] + delta;
        }
        CostDiagonal { energies, offset: ising.offset() }
    }

    pub fn energy(&self, index: usize) -> f64 {
        self.energies[index]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Cost layer `U_P(gamma)`: multiply each amplitude by `exp(-i gamma E(x))`.
pub fn apply_phase(psi: &mut Statevector, diag: &CostDiagonal, gamma: f64) {
    debug_assert_eq!(psi.dim(), diag.energies.len());
    for (amp, &e) in psi.amps.iter_mut().zip(&diag.energies) {
        *amp *= Complex64::from_polar(1.0, -gamma * e);
    }
}

/// Mixer layer `U_M(beta) = exp(-i beta sum_i X_i)`: per qubit, the pair
/// `(a, b)` becomes `(cos b a - i sin b b, -i sin b a + cos b b)`.
pub fn apply_mixer(psi: &mut Statevector, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    let minus_i_s = Complex64::new(0.0, -s);
    let n = psi.n;
    for qubit in 0..n {
        let stride = 1usize << qubit;
        let mut base = 0;
        while base < psi.amps.len() {
            for low in base..base + stride {
                let a = psi.amps[low];
                let b = psi.amps[low + stride];
                psi.amps[low] = c * a + minus_i_s * b;
                psi.amps[low + stride] = minus_i_s * a + c * b;
            }
            base += stride << 1;
        }
    }
}

/// `<psi| H_P |psi>` including the constant offset.
pub fn expectation_with(psi: &Statevector, diag: &CostDiagonal) -> f64 {
    debug_assert_eq!(psi.dim(), diag.energies.len());
    let mut acc = 0.0;
    for (amp, &e) in psi.amps.iter().zip(&diag.energies) {
        acc += amp.norm_sqr() * (e + diag.offset);
    }
    acc
}
