//! Statevector over (ancilla qubits ⊗ system register) and the structured
//! application of every operator the quantum engines use.
//!
//! Amplitudes are real: every state and operator in the simulated
//! algorithms is real-valued. The vector of length `2^q · dim_sys` is
//! indexed as `anc * dim_sys + s`; qubit 1 is the leftmost ket factor, so
//! qubit `i` lives at bit `q − i` of the ancilla integer and prepending a
//! qubit concatenates amplitude blocks.
//!
//! Operators are never materialized: each application walks the amplitude
//! vector once, so the per-step cost is `O(2^q · dim_sys)` instead of its
//! square. The [`dense`] submodule builds the same operators literally as
//! matrices, at small sizes, as an independent oracle for tests.

pub mod dense;

use ndarray::Array1;
use serde_json::json;

use crate::error::{Error, Result};

/// Default ceiling on amplitude-vector length; runs that would exceed it
/// are refused rather than silently truncated.
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 26;

/// Tolerance for the unit-norm invariant of states.
pub const NORM_TOL: f64 = 1e-10;

/// Real statevector over `q` ancilla qubits and a power-of-two system
/// register.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    q: usize,
    dim_sys: usize,
    amps: Vec<f64>,
    /// One label per ancilla qubit, position 0 = qubit 1 (leftmost).
    labels: Vec<String>,
}

impl SimState {
    /// State with no ancillas holding the given unit system vector.
    pub fn from_system_vector(v: &[f64]) -> Result<Self> {
        Self::from_system_with_ancillas(0, v)
    }

    /// State `|0⟩^{⊗q} ⊗ |v⟩` for a unit vector `v`.
    pub fn from_system_with_ancillas(q: usize, v: &[f64]) -> Result<Self> {
        let dim_sys = v.len();
        if !dim_sys.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim_sys.next_power_of_two(),
                found: dim_sys,
            });
        }
        let norm = norm_of(v);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm {
                what: "system vector",
                norm,
            });
        }
        let mut amps = vec![0.0; (1usize << q) * dim_sys];
        amps[..dim_sys].copy_from_slice(v);
        Ok(Self {
            q,
            dim_sys,
            amps,
            labels: (0..q).rev().map(|i| format!("anc{}", i + 1)).collect(),
        })
    }

    /// State from a full amplitude vector over `2^q · dim_sys` entries.
    pub fn from_amplitudes(q: usize, dim_sys: usize, amps: Vec<f64>) -> Result<Self> {
        if !dim_sys.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim_sys.next_power_of_two(),
                found: dim_sys,
            });
        }
        let expected = (1usize << q) * dim_sys;
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: amps.len(),
            });
        }
        let norm = norm_of(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnitNorm {
                what: "amplitude vector",
                norm,
            });
        }
        Ok(Self {
            q,
            dim_sys,
            amps,
            labels: (0..q).rev().map(|i| format!("anc{}", i + 1)).collect(),
        })
    }

    /// Basis state `|index⟩` on the system register, no ancillas.
    pub fn basis(dim_sys: usize, index: usize) -> Result<Self> {
        if index >= dim_sys {
            return Err(Error::InvalidIndex {
                index,
                limit: dim_sys,
            });
        }
        let mut v = vec![0.0; dim_sys];
        v[index] = 1.0;
        Self::from_system_vector(&v)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn dim_sys(&self) -> usize {
        self.dim_sys
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.amps)
    }

    /// Register labels, qubit 1 first, system register last.
    pub fn layout(&self) -> Vec<String> {
        let mut out = self.labels.clone();
        out.push(format!("system[{}]", self.dim_sys));
        out
    }

    fn bit_position(&self, qubit: usize) -> Result<usize> {
        if qubit == 0 || qubit > self.q {
            return Err(Error::InvalidQubit {
                qubit,
                total: self.q,
            });
        }
        Ok(self.q - qubit)
    }

    /// Unnormalized system vector at the given ancilla bit pattern, plus
    /// its norm. Pure read.
    pub fn extract_block(&self, pattern: &str) -> Result<(Array1<f64>, f64)> {
        if pattern.len() != self.q {
            return Err(Error::PatternLengthMismatch {
                pattern: pattern.len(),
                qubits: self.q,
            });
        }
        let mut anc = 0usize;
        for c in pattern.chars() {
            anc = (anc << 1)
                | match c {
                    '0' => 0,
                    '1' => 1,
                    other => return Err(Error::Parse(format!("bad pattern bit '{other}'"))),
                };
        }
        let block = &self.amps[anc * self.dim_sys..(anc + 1) * self.dim_sys];
        Ok((Array1::from_vec(block.to_vec()), norm_of(block)))
    }

    /// The all-zeros-ancilla block, which carries the encoded iterate.
    pub fn zero_block(&self) -> (Array1<f64>, f64) {
        let block = &self.amps[..self.dim_sys];
        (Array1::from_vec(block.to_vec()), norm_of(block))
    }

    /// `β |0⟩⊗a + γ |1⟩⊗b` on a fresh leftmost qubit.
    pub fn prepend_superposed_ancilla(
        a: &SimState,
        b: &SimState,
        beta: f64,
        gamma: f64,
    ) -> Result<SimState> {
        if a.q != b.q || a.dim_sys != b.dim_sys {
            return Err(Error::DimensionMismatch {
                expected: a.amps.len(),
                found: b.amps.len(),
            });
        }
        if (beta * beta + gamma * gamma - 1.0).abs() > 1e-12 {
            return Err(Error::BadConvexWeights { beta, gamma });
        }
        let mut amps = Vec::with_capacity(a.amps.len() * 2);
        amps.extend(a.amps.iter().map(|x| beta * x));
        amps.extend(b.amps.iter().map(|x| gamma * x));
        let mut labels = Vec::with_capacity(a.q + 1);
        labels.push(format!("anc{}", a.q + 1));
        labels.extend(a.labels.iter().cloned());
        Ok(SimState {
            q: a.q + 1,
            dim_sys: a.dim_sys,
            amps,
            labels,
        })
    }

    /// `|0⟩^{⊗count} ⊗ self`: zero qubits prepended on the left.
    pub fn prepend_zero_ancillas(&self, count: usize) -> SimState {
        let mut amps = vec![0.0; self.amps.len() << count];
        amps[..self.amps.len()].copy_from_slice(&self.amps);
        let mut labels = Vec::with_capacity(self.q + count);
        for i in 0..count {
            labels.push(format!("anc{}", self.q + count - i));
        }
        labels.extend(self.labels.iter().cloned());
        SimState {
            q: self.q + count,
            dim_sys: self.dim_sys,
            amps,
            labels,
        }
    }

    /// Exchanges ancilla qubits `i` and `j` (1-based, qubit 1 leftmost).
    pub fn swap_qubits(&mut self, i: usize, j: usize) -> Result<()> {
        let pi = self.bit_position(i)?;
        let pj = self.bit_position(j)?;
        if i == j {
            return Ok(());
        }
        let dim = self.dim_sys;
        for anc in 0..(1usize << self.q) {
            if (anc >> pi) & 1 == 1 && (anc >> pj) & 1 == 0 {
                let partner = anc ^ (1 << pi) ^ (1 << pj);
                for s in 0..dim {
                    self.amps.swap(anc * dim + s, partner * dim + s);
                }
            }
        }
        self.labels.swap(i - 1, j - 1);
        Ok(())
    }

    /// Applies a 2×2 orthogonal matrix to one ancilla qubit (identity
    /// elsewhere). `m[r][c]` is row `r`, column `c`; column 0 is the image
    /// of `|0⟩`.
    pub fn apply_ancilla_rotation(&mut self, qubit: usize, m: [[f64; 2]; 2]) -> Result<()> {
        let p = self.bit_position(qubit)?;
        let dim = self.dim_sys;
        for anc in 0..(1usize << self.q) {
            if (anc >> p) & 1 == 0 {
                let partner = anc | (1 << p);
                for s in 0..dim {
                    let x0 = self.amps[anc * dim + s];
                    let x1 = self.amps[partner * dim + s];
                    self.amps[anc * dim + s] = m[0][0] * x0 + m[0][1] * x1;
                    self.amps[partner * dim + s] = m[1][0] * x0 + m[1][1] * x1;
                }
            }
        }
        Ok(())
    }

    /// The step-`k` mixing rotation `[[√(k+1), 1], [−1, √(k+1)]] / √(k+2)`
    /// on the given qubit.
    pub fn apply_gk(&mut self, k: usize, qubit: usize) -> Result<()> {
        self.apply_ancilla_rotation(qubit, gk_matrix(k))
    }

    /// Reflection-controlled bit flip on (target qubit ⊗ system): within
    /// each setting of the other ancillas, the component along `a` of the
    /// two target branches is exchanged and the orthogonal complement is
    /// untouched.
    pub fn apply_ut(&mut self, a: &[f64], target_qubit: usize) -> Result<()> {
        let p = self.bit_position(target_qubit)?;
        if a.len() != self.dim_sys {
            return Err(Error::DimensionMismatch {
                expected: self.dim_sys,
                found: a.len(),
            });
        }
        let dim = self.dim_sys;
        for anc in 0..(1usize << self.q) {
            if (anc >> p) & 1 == 0 {
                let partner = anc | (1 << p);
                let (lower, upper) = self.amps.split_at_mut(partner * dim);
                let block0 = &mut lower[anc * dim..anc * dim + dim];
                let block1 = &mut upper[..dim];
                let mut d0 = 0.0;
                let mut d1 = 0.0;
                for ((av, x0), x1) in a.iter().zip(block0.iter()).zip(block1.iter()) {
                    d0 += av * x0;
                    d1 += av * x1;
                }
                let delta = d1 - d0;
                for ((av, x0), x1) in a.iter().zip(block0.iter_mut()).zip(block1.iter_mut()) {
                    *x0 += delta * av;
                    *x1 -= delta * av;
                }
            }
        }
        Ok(())
    }

    /// Three-block column-transfer operator on an ancilla qubit pair
    /// `(i, j)`: pair values 00 and 11 are fixed; between 01 and 10 the
    /// basis component `t` of the system register is exchanged and the
    /// rest is fixed.
    pub fn apply_wt(&mut self, t: usize, qubit_pair: (usize, usize)) -> Result<()> {
        let (i, j) = qubit_pair;
        let pi = self.bit_position(i)?;
        let pj = self.bit_position(j)?;
        if i == j {
            return Err(Error::Unsupported(
                "column-transfer operator needs two distinct qubits".into(),
            ));
        }
        if t >= self.dim_sys {
            return Err(Error::InvalidIndex {
                index: t,
                limit: self.dim_sys,
            });
        }
        let dim = self.dim_sys;
        for anc in 0..(1usize << self.q) {
            // Pair value 01: qubit i is 0, qubit j is 1.
            if (anc >> pi) & 1 == 0 && (anc >> pj) & 1 == 1 {
                let partner = anc ^ (1 << pi) ^ (1 << pj);
                self.amps.swap(anc * dim + t, partner * dim + t);
            }
        }
        Ok(())
    }

    /// Applies `f` to every system block, or only to the block matching an
    /// exact ancilla pattern.
    pub fn for_each_system_block_mut<F>(&mut self, pattern: Option<&str>, mut f: F) -> Result<()>
    where
        F: FnMut(&mut [f64]),
    {
        match pattern {
            None => {
                for block in self.amps.chunks_exact_mut(self.dim_sys) {
                    f(block);
                }
            }
            Some(pat) => {
                if pat.len() != self.q {
                    return Err(Error::PatternLengthMismatch {
                        pattern: pat.len(),
                        qubits: self.q,
                    });
                }
                let mut anc = 0usize;
                for c in pat.chars() {
                    anc = (anc << 1)
                        | match c {
                            '0' => 0,
                            '1' => 1,
                            other => {
                                return Err(Error::Parse(format!("bad pattern bit '{other}'")))
                            }
                        };
                }
                f(&mut self.amps[anc * self.dim_sys..(anc + 1) * self.dim_sys]);
            }
        }
        Ok(())
    }

    /// JSON snapshot: blocks with norm above 1e-14, vectors included only
    /// when the system register is at most `vector_threshold` long.
    pub fn debug_dump(&self, vector_threshold: usize) -> serde_json::Value {
        let mut blocks = Vec::new();
        for anc in 0..(1usize << self.q) {
            let chunk = &self.amps[anc * self.dim_sys..(anc + 1) * self.dim_sys];
            let norm = norm_of(chunk);
            if norm <= 1e-14 {
                continue;
            }
            let pattern: String = (0..self.q)
                .map(|i| {
                    if (anc >> (self.q - 1 - i)) & 1 == 1 {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect();
            let mut entry = json!({ "pattern": pattern, "norm": norm });
            if self.dim_sys <= vector_threshold {
                entry["vector"] = json!(chunk.to_vec());
            }
            blocks.push(entry);
        }
        json!({ "q": self.q, "dim_sys": self.dim_sys, "blocks": blocks })
    }
}

/// Entries of the step-`k` mixing rotation.
pub fn gk_matrix(k: usize) -> [[f64; 2]; 2] {
    let root = ((k + 2) as f64).sqrt();
    let c = ((k + 1) as f64).sqrt() / root;
    let s = 1.0 / root;
    [[c, s], [-s, c]]
}

pub(crate) fn norm_of(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
