//! Closed-form bounds and their empirical checks.
//!
//! Every check returns a [`BoundReport`] pairing the theoretical value with
//! the measured one. Inequalities are accepted within [`BOUND_TOL`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_profile, EntropyProfile, DENSE_CAP};
use crate::error::{Error, Result};
use crate::funcgrid::{discretize, one_norm, DiscretizedState, Domain, FunctionSpec};
use crate::mps::{from_state_vector, mps_inner, truncate, TruncationPolicy};
use crate::polyapprox::{degree_for_overlap_real, minimal_degree_search};

pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub theoretical: f64,
    pub measured: f64,
    pub satisfied: bool,
    /// Distance to the bound in the direction of the inequality; negative when
    /// violated.
    pub slack: f64,
    pub params: BTreeMap<String, f64>,
}

impl BoundReport {
    /// `measured ≤ theoretical`.
    pub fn upper(name: impl Into<String>, measured: f64, theoretical: f64) -> Self {
        Self::from_slack(name, measured, theoretical, theoretical - measured)
    }

    /// `measured ≥ theoretical`.
    pub fn lower(name: impl Into<String>, measured: f64, theoretical: f64) -> Self {
        Self::from_slack(name, measured, theoretical, measured - theoretical)
    }

    fn from_slack(name: impl Into<String>, measured: f64, theoretical: f64, slack: f64) -> Self {
        BoundReport {
            name: name.into(),
            theoretical,
            measured,
            satisfied: slack >= -BOUND_TOL,
            slack,
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("δ = {delta} must lie in (0, 1)")))
    }
}

/// Largest pointwise error that keeps `⟨f, g⟩ ≥ 1 - δ`: `√δ · 2^{-(N-1)/2}`.
pub fn required_epsilon(delta: f64, n: usize) -> Result<f64> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    Ok(delta.sqrt() * (-((n - 1) as f64) / 2.0).exp2())
}

/// `1 - ε² 2^{N-1}`; may be negative.
pub fn lemma3_overlap_bound(eps: f64, n: usize) -> f64 {
    1.0 - eps * eps * ((n as f64) - 1.0).exp2()
}

/// `‖f‖₁ ≤ 2^{N/2}`.
pub fn check_lemma2(state: &DiscretizedState) -> BoundReport {
    let n = state.n_qubits();
    BoundReport::upper("lemma2_one_norm", one_norm(state), (n as f64 / 2.0).exp2())
        .with("n", n as f64)
}

/// Perturbs `f` entrywise by uniform noise in `[-ε, ε]`, renormalizes, and
/// checks `⟨f, g⟩ ≥ 1 - ε'² 2^{N-1}` with `ε' = ‖f - g‖∞` measured after
/// renormalization. Reports the trial with the least slack.
pub fn verify_lemma3(
    f: &DiscretizedState,
    trials: usize,
    eps_target: f64,
    seed: u64,
) -> Result<BoundReport> {
    if !(eps_target >= 0.0 && eps_target.is_finite()) {
        return Err(Error::OutOfRange(format!("ε target {eps_target}")));
    }
    let n = f.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, f64, f64)> = None; // (slack, overlap, bound)
    let mut violations = 0usize;
    let mut g = vec![0.0; f.values().len()];
    for _ in 0..trials {
        for (gi, fi) in g.iter_mut().zip(f.values()) {
            *gi = fi + rng.random_range(-eps_target..=eps_target);
        }
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        g.iter_mut().for_each(|v| *v /= norm);
        let eps = f
            .values()
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let overlap: f64 = f.values().iter().zip(&g).map(|(a, b)| a * b).sum();
        let bound = lemma3_overlap_bound(eps, n);
        let slack = overlap - bound;
        if slack < -BOUND_TOL {
            violations += 1;
        }
        if worst.is_none_or(|(s, _, _)| slack < s) {
            worst = Some((slack, overlap, bound));
        }
    }
    let (_, overlap, bound) = worst.unwrap_or((0.0, 1.0, 1.0));
    Ok(BoundReport::lower("lemma3_overlap", overlap, bound)
        .with("n", n as f64)
        .with("trials", trials as f64)
        .with("eps_target", eps_target)
        .with("seed", seed as f64)
        .with("violations", violations as f64))
}

/// `log₂(p + 1)` with the unrounded degree `p` that keeps the overlap above
/// `1 - δ`.
pub fn entropy_upper_bound(n: usize, delta: f64, gamma: f64, width: f64) -> Result<f64> {
    check_delta(delta)?;
    let p = degree_for_overlap_real(delta, n, gamma, width)
        .map_err(|e| Error::OutOfRange(e.to_string()))?;
    Ok((p + 1.0).log2())
}

/// Entropy bound for `spec` on `domain`: [`entropy_upper_bound`] with the
/// family's `γ_f`, tightened to `log₂(d + 1)` for exact polynomials of degree
/// `d`.
pub fn theorem1_bound(spec: &FunctionSpec, domain: &Domain, n: usize, delta: f64) -> Result<f64> {
    let gamma = spec.deriv_bound(domain).gamma;
    let general = entropy_upper_bound(n, delta, gamma, domain.width())?;
    Ok(match spec.polynomial_degree() {
        Some(d) => general.min(((d + 1) as f64).log2()),
        None => general,
    })
}

/// `S_max ≤ bound`.
pub fn check_theorem1(profile: &EntropyProfile, bound: f64) -> BoundReport {
    BoundReport::upper("theorem1_entropy", profile.s_max, bound)
        .with("n", profile.n_qubits as f64)
        .with("argmax_cut", profile.argmax_cut as f64)
}

/// Caller-supplied constants of the rank-2 accuracy expressions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary2Constants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
}

impl Default for Corollary2Constants {
    /// Illustrative values only; the constants are not determined analytically.
    fn default() -> Self {
        Corollary2Constants {
            c0: 1.0,
            c1: 0.0,
            c2: 2.0,
            delta: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corollary2 {
    /// `2 C0 log₂(N - log₂ δ + C1 - 2 log₂ C2) / (N log₂ C2)`.
    pub trace_lower: f64,
    /// `√(1 - trace_lower²)`, clamped to `[0, 1]`.
    pub fidelity_upper: f64,
    /// `A = 2 C0 / log₂ C2`, so that `trace_lower = A log₂(N + B) / N`.
    pub a: f64,
    /// `B = -log₂ δ + C1 - 2 log₂ C2`.
    pub b: f64,
}

pub fn corollary2_eval(n: usize, delta: f64, c0: f64, c1: f64, c2: f64) -> Result<Corollary2> {
    if c2.is_nan() || c2 <= 1.0 {
        return Err(Error::OutOfRange(format!("C2 = {c2} must exceed 1")));
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::OutOfRange(format!("δ = {delta} must be positive")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let log_c2 = c2.log2();
    let b = -delta.log2() + c1 - 2.0 * log_c2;
    let arg = n as f64 + b;
    if arg.is_nan() || arg <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "logarithm argument {arg} is not positive"
        )));
    }
    let a = 2.0 * c0 / log_c2;
    let trace_lower = a * arg.log2() / n as f64;
    let fidelity_upper = (1.0 - trace_lower * trace_lower).max(0.0).sqrt().min(1.0);
    Ok(Corollary2 {
        trace_lower,
        fidelity_upper,
        a,
        b,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub fidelity: f64,
    pub s_max: f64,
}

/// Overlap of the exact state with its rank-2 truncation, for each `N`.
pub fn rank2_fidelity_trend(
    spec: &FunctionSpec,
    domain: &Domain,
    n_list: &[usize],
) -> Result<Vec<TrendRow>> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::OutOfRange(
            "N list must be strictly ascending".into(),
        ));
    }
    n_list
        .iter()
        .map(|&n| {
            let state = discretize(spec, domain, n)?;
            let exact = from_state_vector(&state)?;
            let approx = truncate(&exact, &TruncationPolicy::rank(2))?;
            let profile = if n <= DENSE_CAP {
                entropy_profile(&state)?
            } else {
                entropy_profile(&exact)?
            };
            Ok(TrendRow {
                n,
                fidelity: mps_inner(&exact, &approx.state)?,
                s_max: profile.s_max,
            })
        })
        .collect()
}

/// Least-squares line through the minimal degrees as a function of
/// `log₂(1/ε)`, compared with the predicted slope `1 / log₂ α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeGrowth {
    pub tolerances: Vec<f64>,
    pub degrees: Vec<usize>,
    pub slope: f64,
    pub intercept: f64,
    pub predicted_slope: f64,
    pub residuals: Vec<f64>,
}

impl DegreeGrowth {
    pub fn slope_ratio(&self) -> f64 {
        self.slope / self.predicted_slope
    }

    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Slope within a factor of 2 of the prediction and residuals under 2.
    pub fn report(&self) -> BoundReport {
        let ratio = self.slope_ratio();
        let in_window = ratio > 0.5 && ratio < 2.0 && self.slope > 0.0;
        let within = self.max_abs_residual() < 2.0;
        let mut r = BoundReport::upper("lemma1_slope_ratio", ratio, 2.0)
            .with("slope", self.slope)
            .with("predicted_slope", self.predicted_slope)
            .with("max_residual", self.max_abs_residual());
        r.slack = r.slack.min(ratio - 0.5);
        r.satisfied = in_window && within;
        r
    }
}

pub fn degree_growth(
    spec: &FunctionSpec,
    domain: &Domain,
    tolerances: &[f64],
    n: usize,
) -> Result<DegreeGrowth> {
    if tolerances.len() < 2 {
        return Err(Error::MissingData(
            "need at least two tolerances for a slope".into(),
        ));
    }
    let gamma = spec.deriv_bound(domain).gamma;
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "{spec} has γ_f = {gamma}; no finite slope"
        )));
    }
    let degrees = tolerances
        .iter()
        .map(|&eps| minimal_degree_search(spec, domain, eps, n).map(|r| r.degree))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = tolerances.iter().map(|e| (1.0 / e).log2()).collect();
    let ys: Vec<f64> = degrees.iter().map(|&d| d as f64).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::OutOfRange("tolerances must be distinct".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - (slope * x + intercept))
        .collect();
    Ok(DegreeGrowth {
        tolerances: tolerances.to_vec(),
        degrees,
        slope,
        intercept,
        predicted_slope: 1.0 / (1.0 + 2.0 / (gamma * domain.width())).log2(),
        residuals,
    })
}
