//! Chebyshev interpolants and polynomial-degree formulas.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcgrid::{discretize, DiscretizedState, Domain, FunctionSpec};

/// Largest degree accepted by the degree search and the MPS encoder.
pub const DEFAULT_DEGREE_CAP: usize = 64;

/// Degree-`p` polynomial in the Chebyshev basis `T_k(u)`, where
/// `u = 2 (x - lo) / |D| - 1` maps the domain onto `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPoly {
    domain: Domain,
    coeffs: Vec<f64>,
}

impl ChebyshevPoly {
    pub fn new(domain: Domain, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::OutOfRange(
                "a polynomial needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("Chebyshev coefficient".into()));
        }
        Ok(ChebyshevPoly { domain, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn to_unit(&self, x: f64) -> f64 {
        2.0 * (x - self.domain.lo()) / self.domain.width() - 1.0
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let u = self.to_unit(x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let b0 = 2.0 * u * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        u * b1 - b2 + self.coeffs[0]
    }

    /// Coefficients `a_j` of `Σ a_j u^j` in the rescaled variable `u ∈ [-1, 1]`.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let n = self.coeffs.len();
        let mut out = vec![0.0; n];
        let mut prev = vec![0.0; n];
        let mut cur = vec![0.0; n];
        prev[0] = 1.0; // T_0
        if n > 1 {
            cur[1] = 1.0; // T_1
        }
        for (k, &c) in self.coeffs.iter().enumerate() {
            let t = match k {
                0 => &prev,
                _ => &cur,
            };
            for (o, &tj) in out.iter_mut().zip(t) {
                *o += c * tj;
            }
            if k >= 1 && k + 1 < n {
                // T_{k+1} = 2u T_k - T_{k-1}
                let mut next = vec![0.0; n];
                for j in 0..n - 1 {
                    next[j + 1] += 2.0 * cur[j];
                }
                for j in 0..n {
                    next[j] -= prev[j];
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub degree: usize,
    pub linf_error: f64,
    pub grid_n: usize,
}

/// Interpolates `spec` at the `p + 1` Chebyshev–Gauss nodes of `domain`.
pub fn fit_chebyshev(spec: &FunctionSpec, domain: &Domain, p: usize) -> Result<ChebyshevPoly> {
    let m = p + 1;
    let theta: Vec<f64> = (0..m).map(|j| PI * (j as f64 + 0.5) / m as f64).collect();
    let samples: Vec<f64> = theta
        .iter()
        .map(|&t| {
            let x = domain.lo() + 0.5 * (t.cos() + 1.0) * domain.width();
            spec.eval(x)
        })
        .collect();
    if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{spec} at Chebyshev node {j}")));
    }
    let coeffs = (0..m)
        .map(|k| {
            let s: f64 = samples
                .iter()
                .zip(&theta)
                .map(|(f, t)| f * (k as f64 * t).cos())
                .sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect();
    ChebyshevPoly::new(*domain, coeffs)
}

/// Max entrywise distance between the normalized grid vectors of `target` and
/// `poly` on the same `2^N` grid.
pub fn linf_error(poly: &ChebyshevPoly, target: &DiscretizedState) -> Result<f64> {
    if poly.domain() != target.domain() {
        return Err(Error::DimensionMismatch(format!(
            "polynomial domain {:?} vs state domain {:?}",
            poly.domain(),
            target.domain()
        )));
    }
    let approx = poly_grid_state(poly, target.n_qubits())?;
    Ok(target
        .values()
        .iter()
        .zip(approx.values())
        .map(|(f, g)| (f - g).abs())
        .fold(0.0, f64::max))
}

/// [`linf_error`] against `spec` discretized on the polynomial's domain.
pub fn linf_error_for(poly: &ChebyshevPoly, spec: &FunctionSpec, n: usize) -> Result<f64> {
    let target = discretize(spec, &poly.domain(), n)?;
    linf_error(poly, &target)
}

/// Normalized grid evaluation of `poly`.
pub fn poly_grid_state(poly: &ChebyshevPoly, n: usize) -> Result<DiscretizedState> {
    let values = poly
        .domain()
        .grid(n)
        .into_iter()
        .map(|x| poly.eval(x))
        .collect();
    DiscretizedState::from_amplitudes(n, poly.domain(), values)
}

fn ceil_degree(p: f64) -> usize {
    // absorb rounding noise so that exact integers stay put
    (p - 1e-9).ceil().max(0.0) as usize
}

fn convergence_base(gamma: f64, width: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::OutOfRange(format!("derivative scale {gamma}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::OutOfRange(format!("domain width {width}")));
    }
    // log₂ α with α = 1 + 2 / (γ |D|)
    Ok((2.0 / (gamma * width)).ln_1p() / std::f64::consts::LN_2)
}

/// Unrounded `log_α(1/ε) + C`.
pub fn required_degree_real(eps: f64, gamma: f64, width: f64, c: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidTolerance(eps));
    }
    if gamma <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "derivative scale {gamma} must be positive"
        )));
    }
    let log_alpha = convergence_base(gamma, width)?;
    Ok((1.0 / eps).log2() / log_alpha + c)
}

/// Degree sufficient for pointwise accuracy `eps` on a domain of the given
/// width, for a function with derivative scale `gamma`; `c` is the additive
/// constant (0 by default).
pub fn required_degree(eps: f64, gamma: f64, width: f64, c: f64) -> Result<usize> {
    required_degree_real(eps, gamma, width, c).map(ceil_degree)
}

/// Unrounded `((N - 1) - log₂ δ) / (2 log₂ α)`.
pub fn degree_for_overlap_real(delta: f64, n: usize, gamma: f64, width: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidTolerance(delta));
    }
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let log_alpha = convergence_base(gamma, width)?;
    if log_alpha.is_infinite() {
        return Ok(0.0);
    }
    Ok(((n - 1) as f64 - delta.log2()) / (2.0 * log_alpha))
}

/// Degree that keeps the overlap with the exact `N`-qubit state above `1 - δ`.
pub fn degree_for_overlap(delta: f64, n: usize, gamma: f64, width: f64) -> Result<usize> {
    degree_for_overlap_real(delta, n, gamma, width).map(ceil_degree)
}

/// Smallest Chebyshev degree whose grid error is at most `eps`.
pub fn minimal_degree_search(
    spec: &FunctionSpec,
    domain: &Domain,
    eps: f64,
    n: usize,
) -> Result<ApproxReport> {
    minimal_degree_search_capped(spec, domain, eps, n, DEFAULT_DEGREE_CAP)
}

pub fn minimal_degree_search_capped(
    spec: &FunctionSpec,
    domain: &Domain,
    eps: f64,
    n: usize,
    cap: usize,
) -> Result<ApproxReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidTolerance(eps));
    }
    let target = discretize(spec, domain, n)?;
    for p in 0..=cap {
        let poly = fit_chebyshev(spec, domain, p)?;
        let err = match linf_error(&poly, &target) {
            Ok(e) => e,
            // an interpolant that vanishes on the grid cannot be normalized
            Err(Error::ZeroFunction) => continue,
            Err(e) => return Err(e),
        };
        if err <= eps {
            return Ok(ApproxReport {
                degree: p,
                linf_error: err,
                grid_n: n,
            });
        }
    }
    Err(Error::DegreeCapExceeded { cap })
}
