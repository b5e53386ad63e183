//! Bipartite entanglement entropy, trace distance and the Fannes–Audenaert
//! continuity check.
//!
//! All logarithms are base 2, so entropies are in bits. Only contiguous cuts
//! are considered: cut `k` splits qubits `0..k` from `k..N`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcgrid::DiscretizedState;
use crate::linalg::{numerical_rank, sym_eigenvalues};
use crate::mps::{schmidt_spectrum_dense, MatrixProductState, RANK_THRESHOLD};

/// Largest `N` for which spectra are taken from the dense reshaping.
pub const DENSE_CAP: usize = 20;

const NORMALIZATION_TOL: f64 = 1e-8;
const BOUND_TOL: f64 = 1e-9;

/// Anything that can produce Schmidt spectra at every interior cut.
pub trait SchmidtSource {
    fn n_qubits(&self) -> usize;

    /// Spectra for cuts `1..N`, in order.
    fn spectra(&self) -> Result<Vec<Vec<f64>>>;
}

impl SchmidtSource for DiscretizedState {
    fn n_qubits(&self) -> usize {
        DiscretizedState::n_qubits(self)
    }

    fn spectra(&self) -> Result<Vec<Vec<f64>>> {
        let n = DiscretizedState::n_qubits(self);
        if n > DENSE_CAP {
            return Err(Error::CapExceeded {
                what: "N (dense path)",
                value: n,
                cap: DENSE_CAP,
            });
        }
        (1..n)
            .into_par_iter()
            .map(|k| schmidt_spectrum_dense(self, k))
            .collect()
    }
}

impl SchmidtSource for MatrixProductState {
    fn n_qubits(&self) -> usize {
        MatrixProductState::n_qubits(self)
    }

    fn spectra(&self) -> Result<Vec<Vec<f64>>> {
        self.bond_spectra()
    }
}

/// `-Σ σ_i² log₂ σ_i²` with `0 log 0 = 0`.
pub fn von_neumann(spectrum: &[f64]) -> Result<f64> {
    let total: f64 = spectrum.iter().map(|s| s * s).sum();
    if total.is_nan() || (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(total));
    }
    let h: f64 = spectrum
        .iter()
        .map(|s| s * s)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum();
    Ok(h.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutEntropy {
    pub cut: usize,
    /// Entropy in bits.
    pub entropy: f64,
    /// Numerical Schmidt rank at this cut.
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyProfile {
    pub n_qubits: usize,
    pub per_cut: Vec<CutEntropy>,
    pub s_max: f64,
    /// First cut attaining `s_max`; 0 for a single qubit.
    pub argmax_cut: usize,
}

impl EntropyProfile {
    pub fn at(&self, cut: usize) -> Option<&CutEntropy> {
        self.per_cut.iter().find(|c| c.cut == cut)
    }
}

pub fn entropy_profile<S: SchmidtSource + ?Sized>(input: &S) -> Result<EntropyProfile> {
    let spectra = input.spectra()?;
    let per_cut = spectra
        .iter()
        .enumerate()
        .map(|(i, s)| {
            Ok(CutEntropy {
                cut: i + 1,
                entropy: von_neumann(s)?,
                rank: numerical_rank(s, RANK_THRESHOLD),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax_cut, s_max) = per_cut.iter().fold((0, 0.0), |(k, best), c| {
        if c.entropy > best {
            (c.cut, c.entropy)
        } else {
            (k, best)
        }
    });
    // all-zero profiles still point at the first cut
    let argmax_cut = if argmax_cut == 0 && !per_cut.is_empty() {
        1
    } else {
        argmax_cut
    };
    Ok(EntropyProfile {
        n_qubits: input.n_qubits(),
        per_cut,
        s_max,
        argmax_cut,
    })
}

/// `√(1 - ⟨f, g⟩²)`, the trace distance between two pure states.
pub fn trace_distance_from_overlap(overlap: f64) -> f64 {
    (1.0 - overlap * overlap).max(0.0).sqrt()
}

/// Same as [`trace_distance_from_overlap`] but computed as `‖f - g‖ ‖f + g‖ / 2`,
/// which stays accurate when the states nearly coincide.
pub fn trace_distance_pure(f: &DiscretizedState, g: &DiscretizedState) -> Result<f64> {
    if f.values().len() != g.values().len() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit and {}-qubit states",
            f.n_qubits(),
            g.n_qubits()
        )));
    }
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in f.values().iter().zip(g.values()) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    Ok((0.5 * (minus * plus).sqrt()).min(1.0))
}

/// Trace distance between the reduced density matrices of `f` and `g` on the
/// smaller side of cut `k`.
pub fn reduced_trace_distance(f: &DiscretizedState, g: &DiscretizedState, k: usize) -> Result<f64> {
    let n = f.n_qubits();
    if g.n_qubits() != n {
        return Err(Error::DimensionMismatch(format!(
            "{n}-qubit and {}-qubit states",
            g.n_qubits()
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidCut { cut: k, n });
    }
    if n > DENSE_CAP {
        return Err(Error::CapExceeded {
            what: "N (dense path)",
            value: n,
            cap: DENSE_CAP,
        });
    }
    let reduced = |s: &DiscretizedState| {
        let m = DMatrix::from_row_slice(1 << k, 1 << (n - k), s.values());
        if k <= n - k {
            &m * m.transpose()
        } else {
            m.transpose() * &m
        }
    };
    let diff = reduced(f) - reduced(g);
    let eig = sym_eigenvalues(diff)?;
    Ok(0.5 * eig.iter().map(|e| e.abs()).sum::<f64>())
}

/// `H₂(t)` with `H₂(0) = H₂(1) = 0`.
pub fn binary_entropy(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        -t * t.log2() - (1.0 - t) * (1.0 - t).log2()
    }
}

/// `T log₂(2^N - 1) + H₂(T)`.
pub fn fannes_audenaert_rhs(t: f64, n: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfRange(format!("trace distance {t}")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let log_dim = ((n as f64).exp2() - 1.0).log2();
    Ok(t * log_dim + binary_entropy(t))
}

/// Largest value of [`fannes_audenaert_rhs`] over `[0, t]`.
///
/// The bound holds for the reduced trace distance, which never exceeds the
/// global one; past `T = 1 - 2^{-m}` the expression starts to decrease, so a
/// global `T` may only be used through this running maximum (which equals
/// `m` there).
pub fn fannes_audenaert_envelope(t: f64, m: usize) -> Result<f64> {
    let peak = 1.0 - (-(m as f64)).exp2();
    fannes_audenaert_rhs(t.min(peak), m)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FannesCheck {
    pub cut: usize,
    /// `S_f(k) - S_g(k)`, signed.
    pub entropy_diff: f64,
    /// Bound on the `2^m`-dimensional reduced space, `m = min(k, N - k)`.
    pub rhs_reduced: f64,
    /// The looser full-system form `T log₂(2^N - 1) + H₂(T)`.
    pub rhs_full: f64,
    /// `rhs_reduced - |entropy_diff|`.
    pub slack: f64,
    pub satisfied: bool,
}

/// Checks `|S_f(k) - S_g(k)| ≤ T log₂(2^m - 1) + H₂(T)` at cut `k`, where `T`
/// bounds the trace distance between the two states (global or reduced).
pub fn check_fannes(
    f_profile: &EntropyProfile,
    g_profile: &EntropyProfile,
    t: f64,
    n: usize,
    k: usize,
) -> Result<FannesCheck> {
    let missing = || Error::InvalidCut { cut: k, n };
    let sf = f_profile.at(k).ok_or_else(missing)?.entropy;
    let sg = g_profile.at(k).ok_or_else(missing)?.entropy;
    let m = k.min(n - k);
    let rhs_reduced = fannes_audenaert_envelope(t, m)?;
    let rhs_full = fannes_audenaert_rhs(t, n)?;
    let diff = sf - sg;
    let slack = rhs_reduced - diff.abs();
    Ok(FannesCheck {
        cut: k,
        entropy_diff: diff,
        rhs_reduced,
        rhs_full,
        slack,
        satisfied: slack >= -BOUND_TOL,
    })
}
