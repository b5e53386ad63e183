//! Open-boundary matrix product states over qubits.
//!
//! A state on `N` qubits is a chain of order-3 cores `A_k[l, s, r]` with
//! physical index `s ∈ {0, 1}`:
//!
//! ```text
//!  1 ── A_0 ── A_1 ── … ── A_{N-1} ── 1
//!        │      │            │
//!        s_0    s_1          s_{N-1}
//! ```
//!
//! Amplitude `ψ[i]` with `i = Σ s_k 2^{N-1-k}` is the matrix product
//! `A_0[s_0] A_1[s_1] ⋯ A_{N-1}[s_{N-1}]`. Bond `k` (between cores `k - 1` and
//! `k`) realizes the cut that separates the first `k` qubits from the rest.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcgrid::{DiscretizedState, Domain};
use crate::linalg::{numerical_rank, singular_values, thin_svd};
use crate::polyapprox::{ChebyshevPoly, DEFAULT_DEGREE_CAP};

/// Singular values at or below this fraction of the largest one count as zero.
pub const RANK_THRESHOLD: f64 = 1e-12;

/// Largest `N` that [`to_state_vector`] will expand.
pub const CONTRACTION_CAP: usize = 24;

const ORTHOGONALITY_TOL: f64 = 1e-10;

/// One order-3 tensor, stored row-major in `(left, physical, right)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MpsCore {
    left: usize,
    right: usize,
    data: Vec<f64>,
}

impl MpsCore {
    pub fn new(left: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::DimensionMismatch(
                "bond dimensions must be positive".into(),
            ));
        }
        if data.len() != left * 2 * right {
            return Err(Error::DimensionMismatch(format!(
                "core ({left}, 2, {right}) needs {} entries, got {}",
                left * 2 * right,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("core entry".into()));
        }
        Ok(MpsCore { left, right, data })
    }

    fn zeros(left: usize, right: usize) -> Self {
        MpsCore {
            left,
            right,
            data: vec![0.0; left * 2 * right],
        }
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn idx(&self, l: usize, s: usize, r: usize) -> usize {
        (l * 2 + s) * self.right + r
    }

    pub fn get(&self, l: usize, s: usize, r: usize) -> f64 {
        self.data[self.idx(l, s, r)]
    }

    fn set(&mut self, l: usize, s: usize, r: usize, v: f64) {
        let i = self.idx(l, s, r);
        self.data[i] = v;
    }

    /// `A[s]` as a `left × right` matrix.
    pub fn slice(&self, s: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.left, self.right, |l, r| self.get(l, s, r))
    }

    /// `(left·2) × right`; the layout matches the storage order.
    fn left_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left * 2, self.right, &self.data)
    }

    /// `left × (2·right)`; also storage order.
    fn right_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.left, 2 * self.right, &self.data)
    }

    fn from_matrix(left: usize, right: usize, m: &DMatrix<f64>) -> Self {
        // both unfoldings are row-major views of the same buffer
        let cols = m.ncols();
        let data = (0..m.nrows() * cols)
            .map(|i| m[(i / cols, i % cols)])
            .collect();
        MpsCore { left, right, data }
    }

    fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Contracts `m` (`left' × left`) into the left bond.
    fn absorb_left(&self, m: &DMatrix<f64>) -> Self {
        let out = m * self.right_matrix();
        Self::from_matrix(m.nrows(), self.right, &out)
    }

    /// Contracts `m` (`right × right'`) into the right bond.
    fn absorb_right(&self, m: &DMatrix<f64>) -> Self {
        let out = self.left_matrix() * m;
        Self::from_matrix(self.left, m.ncols(), &out)
    }

    fn left_orthogonality_error(&self) -> f64 {
        let m = self.left_matrix();
        (m.transpose() * m - DMatrix::identity(self.right, self.right))
            .abs()
            .max()
    }

    fn right_orthogonality_error(&self) -> f64 {
        let m = self.right_matrix();
        (&m * m.transpose() - DMatrix::identity(self.left, self.left))
            .abs()
            .max()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Canonical {
    #[default]
    None,
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixProductState {
    cores: Vec<MpsCore>,
    canonical: Canonical,
}

impl MatrixProductState {
    /// Validates bond matching, boundary dimensions and the claimed gauge.
    pub fn new(cores: Vec<MpsCore>, canonical: Canonical) -> Result<Self> {
        let (first, last) = match (cores.first(), cores.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => {
                return Err(Error::DimensionMismatch(
                    "an MPS needs at least one core".into(),
                ))
            }
        };
        if first.left != 1 || last.right != 1 {
            return Err(Error::DimensionMismatch(
                "boundary bonds must have dimension 1".into(),
            ));
        }
        for (k, pair) in cores.windows(2).enumerate() {
            if pair[0].right != pair[1].left {
                return Err(Error::DimensionMismatch(format!(
                    "bond {}: core {k} has right dimension {}, core {} has left dimension {}",
                    k + 1,
                    pair[0].right,
                    k + 1,
                    pair[1].left
                )));
            }
        }
        let mps = MatrixProductState { cores, canonical };
        let worst = match canonical {
            Canonical::None => 0.0,
            Canonical::Left => mps
                .cores
                .iter()
                .map(MpsCore::left_orthogonality_error)
                .fold(0.0, f64::max),
            Canonical::Right => mps
                .cores
                .iter()
                .map(MpsCore::right_orthogonality_error)
                .fold(0.0, f64::max),
        };
        if worst > ORTHOGONALITY_TOL {
            return Err(Error::OutOfRange(format!(
                "cores violate {canonical:?}-orthogonality by {worst:e}"
            )));
        }
        Ok(mps)
    }

    /// Product state with the given single-qubit amplitudes `(a_k, b_k)`.
    pub fn product(sites: &[(f64, f64)]) -> Result<Self> {
        let cores = sites
            .iter()
            .map(|&(a, b)| MpsCore::new(1, 1, vec![a, b]))
            .collect::<Result<_>>()?;
        Self::new(cores, Canonical::None)
    }

    pub fn n_qubits(&self) -> usize {
        self.cores.len()
    }

    pub fn cores(&self) -> &[MpsCore] {
        &self.cores
    }

    pub fn canonical(&self) -> Canonical {
        self.canonical
    }

    /// `[1, χ_1, …, χ_{N-1}, 1]`.
    pub fn bond_dims(&self) -> Vec<usize> {
        std::iter::once(1)
            .chain(self.cores.iter().map(|c| c.right))
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn norm(&self) -> f64 {
        mps_inner(self, self).map(f64::sqrt).unwrap_or(f64::NAN)
    }

    /// Exact QR sweep into left-canonical form. The norm ends up in the last core.
    pub fn left_canonicalize(&self) -> Result<Self> {
        if self.canonical == Canonical::Left {
            return Ok(self.clone());
        }
        let n = self.cores.len();
        let mut cores = Vec::with_capacity(n);
        let mut carry: Option<DMatrix<f64>> = None;
        for (k, core) in self.cores.iter().enumerate() {
            let core = match &carry {
                Some(r) => core.absorb_left(r),
                None => core.clone(),
            };
            if k == n - 1 {
                cores.push(core);
                break;
            }
            let qr = core.left_matrix().qr();
            let (q, r) = (qr.q(), qr.r());
            cores.push(MpsCore::from_matrix(core.left, q.ncols(), &q));
            carry = Some(r);
        }
        Ok(MatrixProductState {
            cores,
            canonical: Canonical::Left,
        })
    }

    /// Schmidt coefficients at every cut `1..N`, each normalized to unit
    /// squared sum.
    pub fn bond_spectra(&self) -> Result<Vec<Vec<f64>>> {
        let policy = TruncationPolicy {
            chi_max: None,
            sv_threshold: 0.0,
        };
        let sweep = right_sweep(&self.left_canonicalize()?, &policy)?;
        Ok(sweep.spectra.into_iter().map(normalize_spectrum).collect())
    }

    /// Schmidt coefficients across cut `k` from the canonical bond matrix.
    pub fn schmidt_spectrum(&self, k: usize) -> Result<Vec<f64>> {
        check_cut(k, self.n_qubits())?;
        Ok(self.bond_spectra()?.swap_remove(k - 1))
    }
}

fn check_cut(k: usize, n: usize) -> Result<()> {
    if k == 0 || k >= n {
        Err(Error::InvalidCut { cut: k, n })
    } else {
        Ok(())
    }
}

fn normalize_spectrum(mut s: Vec<f64>) -> Vec<f64> {
    let total = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if total > 0.0 {
        s.iter_mut().for_each(|v| *v /= total);
    }
    s
}

/// Rank cap and singular-value cutoff applied at every bond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// `None` keeps every bond at full rank.
    pub chi_max: Option<usize>,
    /// Drop singular values at or below this fraction of the largest one at
    /// the same bond.
    pub sv_threshold: f64,
}

impl TruncationPolicy {
    pub fn rank(chi_max: usize) -> Self {
        TruncationPolicy {
            chi_max: Some(chi_max),
            sv_threshold: 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.chi_max == Some(0) {
            return Err(Error::OutOfRange("chi_max must be at least 1".into()));
        }
        if self.sv_threshold.is_nan() || self.sv_threshold < 0.0 {
            return Err(Error::OutOfRange(format!(
                "sv_threshold {}",
                self.sv_threshold
            )));
        }
        Ok(())
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            chi_max: None,
            sv_threshold: RANK_THRESHOLD,
        }
    }
}

/// Result of [`truncate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation {
    /// Unit-norm, right-canonical approximation.
    pub state: MatrixProductState,
    /// Squared weight dropped at each bond `1..N`, in sweep units (relative to
    /// the unit-norm input).
    pub discarded: Vec<f64>,
}

impl Truncation {
    pub fn total_discarded(&self) -> f64 {
        self.discarded.iter().sum()
    }
}

struct Sweep {
    cores: Vec<MpsCore>,
    spectra: Vec<Vec<f64>>,
    discarded: Vec<f64>,
}

/// Right-to-left SVD sweep over a left-canonical state. Produces a
/// right-canonical chain with the norm in core 0.
fn right_sweep(mps: &MatrixProductState, policy: &TruncationPolicy) -> Result<Sweep> {
    debug_assert_eq!(mps.canonical, Canonical::Left);
    let n = mps.cores.len();
    let mut cores = mps.cores.clone();
    let mut spectra = vec![Vec::new(); n.saturating_sub(1)];
    let mut discarded = vec![0.0; n.saturating_sub(1)];
    for k in (1..n).rev() {
        let core = &cores[k];
        let svd = thin_svd(core.right_matrix())?;
        let mut keep = if policy.sv_threshold > 0.0 {
            numerical_rank(&svd.s, policy.sv_threshold)
        } else {
            svd.s.len()
        };
        if let Some(chi) = policy.chi_max {
            keep = keep.min(chi);
        }
        discarded[k - 1] = svd.s[keep..].iter().map(|v| v * v).sum();
        let v_t = svd.v_t.rows(0, keep).into_owned();
        let us = DMatrix::from_fn(svd.u.nrows(), keep, |r, c| svd.u[(r, c)] * svd.s[c]);
        cores[k] = MpsCore::from_matrix(keep, core.right, &v_t);
        cores[k - 1] = cores[k - 1].absorb_right(&us);
        spectra[k - 1] = svd.s;
    }
    Ok(Sweep {
        cores,
        spectra,
        discarded,
    })
}

/// Exact TT-SVD factorization into left-canonical form.
///
/// Bond `k` keeps the singular values of the `k`-th unfolding above
/// [`RANK_THRESHOLD`] times the largest, so `bond_dims` are the numerical
/// Schmidt ranks.
pub fn from_state_vector(state: &DiscretizedState) -> Result<MatrixProductState> {
    from_amplitudes(state.values(), RANK_THRESHOLD)
}

pub(crate) fn from_amplitudes(values: &[f64], rel_threshold: f64) -> Result<MatrixProductState> {
    let n = values.len().trailing_zeros() as usize;
    if values.len() != 1 << n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} amplitudes is not 2^N",
            values.len()
        )));
    }
    let mut cores = Vec::with_capacity(n);
    let mut left = 1;
    // rows: (left bond, current qubit); columns: remaining qubits
    let mut rest = DMatrix::from_row_slice(2, values.len() / 2, values);
    for _ in 0..n - 1 {
        let svd = thin_svd(rest)?;
        let rank = numerical_rank(&svd.s, rel_threshold);
        let u = svd.u.columns(0, rank).into_owned();
        cores.push(MpsCore::from_matrix(left, rank, &u));
        let tail = svd.v_t.ncols();
        // diag(s) V^T, then move the next qubit from the columns into the rows
        rest = DMatrix::from_fn(rank * 2, tail / 2, |row, col| {
            let (j, s) = (row / 2, row % 2);
            svd.s[j] * svd.v_t[(j, s * (tail / 2) + col)]
        });
        left = rank;
    }
    cores.push(MpsCore::from_matrix(left, 1, &rest));
    Ok(MatrixProductState {
        cores,
        canonical: Canonical::Left,
    })
}

/// Full contraction to `2^N` amplitudes in big-endian index order.
pub fn to_state_vector(mps: &MatrixProductState) -> Result<Vec<f64>> {
    to_state_vector_capped(mps, CONTRACTION_CAP)
}

pub fn to_state_vector_capped(mps: &MatrixProductState, cap: usize) -> Result<Vec<f64>> {
    let n = mps.n_qubits();
    if n > cap {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap,
        });
    }
    // acc is row-major (prefix index, bond)
    let mut acc = vec![1.0];
    let mut bond = 1;
    for core in &mps.cores {
        let prefixes = acc.len() / bond;
        let mut next = vec![0.0; prefixes * 2 * core.right];
        for p in 0..prefixes {
            for l in 0..bond {
                let a = acc[p * bond + l];
                if a == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    let out = &mut next[(p * 2 + s) * core.right..][..core.right];
                    let row = &core.data[core.idx(l, s, 0)..][..core.right];
                    for (o, &c) in out.iter_mut().zip(row) {
                        *o += a * c;
                    }
                }
            }
        }
        acc = next;
        bond = core.right;
    }
    Ok(acc)
}

/// `⟨a, b⟩` by transfer-matrix contraction, `O(N χ³)`.
pub fn mps_inner(a: &MatrixProductState, b: &MatrixProductState) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "{}-qubit and {}-qubit states",
            a.n_qubits(),
            b.n_qubits()
        )));
    }
    let mut env = DMatrix::from_element(1, 1, 1.0);
    for (ca, cb) in a.cores.iter().zip(&b.cores) {
        let mut next = DMatrix::zeros(ca.right, cb.right);
        for s in 0..2 {
            next += ca.slice(s).transpose() * &env * cb.slice(s);
        }
        env = next;
    }
    Ok(env[(0, 0)])
}

/// Rank-capped approximation by one right-to-left SVD sweep from
/// left-canonical form, renormalized to unit norm.
///
/// With `chi_max = 1` this is the sweep's best product state.
pub fn truncate(mps: &MatrixProductState, policy: &TruncationPolicy) -> Result<Truncation> {
    policy.validate()?;
    let left = mps.left_canonicalize()?;
    let norm_sq = left
        .cores
        .last()
        .map_or(0.0, |c| c.data.iter().map(|v| v * v).sum::<f64>());
    if norm_sq == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let Sweep {
        mut cores,
        discarded,
        ..
    } = right_sweep(&left, policy)?;
    let kept: f64 = cores[0].data.iter().map(|v| v * v).sum::<f64>().sqrt();
    if kept == 0.0 {
        return Err(Error::ZeroFunction);
    }
    cores[0].scale(1.0 / kept);
    Ok(Truncation {
        state: MatrixProductState {
            cores,
            canonical: Canonical::Right,
        },
        discarded: discarded.into_iter().map(|d| d / norm_sq).collect(),
    })
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut table = vec![vec![0.0; n + 1]; n + 1];
    for j in 0..=n {
        table[j][0] = 1.0;
        for i in 1..=j {
            table[j][i] = table[j - 1][i - 1] + if i < j { table[j - 1][i] } else { 0.0 };
        }
    }
    table
}

/// Explicit bond-dimension-`(p + 1)` encoding of a degree-`p` polynomial
/// sampled on the `2^N` grid of `domain`, normalized to unit norm.
///
/// With `t = i / (2^N - 1) = Σ_k s_k w_k` and `w_k = 2^{N-1-k} / (2^N - 1)`,
/// the polynomial variable is affine in the bits: `u = u_0 + Δ Σ_k s_k w_k`.
/// Bond `k` carries the powers `1, v, …, v^p` of the partial sum
/// `v = u_0 + Δ Σ_{m<k} s_m w_m`; each core advances them by one bit through
/// `(v + s Δ w_k)^j = Σ_i C(j, i) v^i (s Δ w_k)^{j-i}`, and the last core
/// contracts the powers against the monomial coefficients.
pub fn poly_to_mps(poly: &ChebyshevPoly, n: usize, domain: &Domain) -> Result<MatrixProductState> {
    let p = poly.degree();
    if p > DEFAULT_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            cap: DEFAULT_DEGREE_CAP,
        });
    }
    if n == 0 || n >= 64 {
        return Err(Error::OutOfRange(format!("N = {n}")));
    }
    let to_unit = |x: f64| 2.0 * (x - poly.domain().lo()) / poly.domain().width() - 1.0;
    let u0 = to_unit(domain.lo());
    let delta = to_unit(domain.hi()) - u0;
    let denom = 2f64.powi(n as i32) - 1.0;
    let step = |k: usize| delta * 2f64.powi((n - 1 - k) as i32) / denom;

    let a = poly.monomial_coeffs();
    let binom = binomials(p);
    let dim = p + 1;
    // Σ_{j≥i} a_j C(j, i) x^{j-i}
    let tail = |i: usize, x: f64| -> f64 {
        (i..dim)
            .map(|j| a[j] * binom[j][i] * x.powi((j - i) as i32))
            .sum()
    };

    let mut cores = Vec::with_capacity(n);
    if n == 1 {
        let mut core = MpsCore::zeros(1, 1);
        for s in 0..2 {
            core.set(0, s, 0, tail(0, u0 + s as f64 * step(0)));
        }
        cores.push(core);
    } else {
        let mut first = MpsCore::zeros(1, dim);
        for s in 0..2 {
            let v = u0 + s as f64 * step(0);
            for j in 0..dim {
                first.set(0, s, j, v.powi(j as i32));
            }
        }
        cores.push(first);
        for k in 1..n - 1 {
            let mut core = MpsCore::zeros(dim, dim);
            let h = step(k);
            for i in 0..dim {
                core.set(i, 0, i, 1.0);
                for (j, row) in binom.iter().enumerate().take(dim).skip(i) {
                    core.set(i, 1, j, row[i] * h.powi((j - i) as i32));
                }
            }
            cores.push(core);
        }
        let mut last = MpsCore::zeros(dim, 1);
        let h = step(n - 1);
        for i in 0..dim {
            last.set(i, 0, 0, tail(i, 0.0));
            last.set(i, 1, 0, tail(i, h));
        }
        cores.push(last);
    }
    if cores.iter().any(|c| c.data.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("polynomial MPS core".into()));
    }
    let mut mps = MatrixProductState {
        cores,
        canonical: Canonical::None,
    };
    let norm = mps.norm();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::ZeroFunction);
    }
    mps.cores[0].scale(1.0 / norm);
    Ok(mps)
}

/// Singular values of the `2^k × 2^{N-k}` reshaping, descending, normalized to
/// unit squared sum.
pub fn schmidt_spectrum_dense(state: &DiscretizedState, k: usize) -> Result<Vec<f64>> {
    let n = state.n_qubits();
    check_cut(k, n)?;
    let m = DMatrix::from_row_slice(1 << k, 1 << (n - k), state.values());
    singular_values(m).map(normalize_spectrum)
}
