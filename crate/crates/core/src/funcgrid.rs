//! Function families and their unit-normalized dyadic discretizations.
//!
//! A [`DiscretizedState`] holds `2^N` samples of a function on an
//! endpoint-inclusive grid `x_i = lo + i (hi - lo) / (2^N - 1)`, scaled to unit
//! ℓ2 norm. Sample index `i` is read as an `N`-bit string in big-endian order,
//! so qubit 0 is the most significant bit and a cut after qubit `k` separates
//! coarse position (the first `k` bits) from fine position.
//!
//! # Function grammar
//!
//! ```text
//! spec   := family [ ":" param ( "," param )* ]
//! param  := key "=" real
//! family := gaussian | sine | exponential | lognormal | polynomial
//!         | linear-ramp | constant | step
//! ```
//!
//! Whitespace around tokens is ignored. Keys accepted by every family:
//!
//! | key     | meaning                                   |
//! |---------|-------------------------------------------|
//! | `lo`    | left endpoint of the default domain       |
//! | `hi`    | right endpoint of the default domain      |
//! | `gamma` | override of the derivative scale `γ_f`    |
//! | `cf`    | override of the derivative constant `C_f` |
//!
//! Family parameters and defaults:
//!
//! | family        | formula                                   | params (default)                         | domain           |
//! |---------------|-------------------------------------------|------------------------------------------|------------------|
//! | `gaussian`    | `amp·exp(-(x-mu)²/(2 sigma²))`            | `mu` (0), `sigma` (1), `amp` (1)         | `mu ± 4 sigma`   |
//! | `sine`        | `amp·sin(freq·x + phase)`                 | `freq` (1), `phase` (0), `amp` (1)       | `[0, 2π]`        |
//! | `exponential` | `amp·exp(rate·x)`                         | `rate` (1), `amp` (1)                    | `[0, 1]`         |
//! | `lognormal`   | log-normal density, 0 for `x ≤ 0`         | `mu` (0), `sigma` (1)                    | `[0.05, 4]`      |
//! | `polynomial`  | `Σ c_j x^j`                               | `c0`, `c1`, … (`c3 = 1` if none given)   | `[-1, 1]`        |
//! | `linear-ramp` | `slope·x + intercept`                     | `slope` (1), `intercept` (0)             | `[0, 1]`         |
//! | `constant`    | `value`                                   | `value` (1)                              | `[0, 1]`         |
//! | `step`        | `low` for `x < at`, `high` otherwise      | `at` (domain midpoint), `low` (0), `high` (1) | `[0, 1]`    |
//!
//! # Derivative constants
//!
//! Every smooth family carries a default pair `(C_f, γ_f)` satisfying
//! `‖f⁽ⁿ⁾‖∞ ≤ C_f γ_fⁿ n!` on its domain:
//!
//! * `gaussian`: Cauchy estimate on disks of radius `sigma`. On such a disk
//!   `|f(x + iy)| ≤ |amp| e^{y²/2σ²} ≤ |amp| e^{1/2}`, so `γ_f = 1/sigma` and
//!   `C_f = |amp| √e`.
//! * `sine`: `|f⁽ⁿ⁾| ≤ |amp| |freq|ⁿ ≤ |amp| |freq|ⁿ n!`, so `γ_f = |freq|`,
//!   `C_f = |amp|`.
//! * `exponential`: entire, so every Cauchy radius is admissible. The radius is
//!   fixed at `r = 4/|rate|`, giving `γ_f = |rate|/4` and
//!   `C_f = |amp| exp(max(rate·lo, rate·hi) + 4)`.
//! * `lognormal`: analytic on the right half plane only. The radius is half
//!   the distance from the domain to the singularity at 0 (`γ_f = 2/lo`), or,
//!   when the domain reaches 0, half the mode `e^{mu - sigma²}`. No closed-form
//!   `C_f` is provided.
//! * `polynomial` and `linear-ramp`: `γ_f = 1/|D|`; these families are also
//!   handled exactly through their degree.
//! * `constant`: `γ_f = 0`, `C_f = |value|`.
//! * `step` is not smooth. It gets the nominal `γ_f = 1/|D|` and is reported as
//!   a non-SDR control wherever bounds are checked.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    lo: f64,
    hi: f64,
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo < hi && (hi - lo).is_finite() {
            Ok(Domain { lo, hi })
        } else {
            Err(Error::InvalidDomain { lo, hi })
        }
    }

    /// The interval `[0, 1]`.
    pub fn unit() -> Self {
        Domain { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// `|D| = hi - lo`.
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Endpoint-inclusive dyadic grid with `2^n` points.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        let len = 1usize << n;
        if len == 1 {
            return vec![self.lo];
        }
        let step = self.width() / (len - 1) as f64;
        (0..len)
            .map(|i| {
                if i == len - 1 {
                    self.hi
                } else {
                    self.lo + i as f64 * step
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    Sine,
    Exponential,
    Lognormal,
    Polynomial,
    LinearRamp,
    Constant,
    Step,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Gaussian,
        Family::Sine,
        Family::Exponential,
        Family::Lognormal,
        Family::Polynomial,
        Family::LinearRamp,
        Family::Constant,
        Family::Step,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Sine => "sine",
            Family::Exponential => "exponential",
            Family::Lognormal => "lognormal",
            Family::Polynomial => "polynomial",
            Family::LinearRamp => "linear-ramp",
            Family::Constant => "constant",
            Family::Step => "step",
        }
    }

    /// Smooth with factorially bounded derivatives. Only `step` is not.
    pub fn is_sdr(self) -> bool {
        !matches!(self, Family::Step)
    }

    fn param_defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Family::Gaussian => &[("mu", 0.0), ("sigma", 1.0), ("amp", 1.0)],
            Family::Sine => &[("freq", 1.0), ("phase", 0.0), ("amp", 1.0)],
            Family::Exponential => &[("rate", 1.0), ("amp", 1.0)],
            Family::Lognormal => &[("mu", 0.0), ("sigma", 1.0)],
            Family::Polynomial => &[],
            Family::LinearRamp => &[("slope", 1.0), ("intercept", 0.0)],
            Family::Constant => &[("value", 1.0)],
            Family::Step => &[("low", 0.0), ("high", 1.0)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|fam| fam.name() == s)
            .ok_or_else(|| Error::SpecParse {
                input: s.to_string(),
                reason: format!("unknown family `{s}`"),
            })
    }
}

/// A member of one of the built-in function families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub family: Family,
    /// Fully resolved family parameters (defaults filled in).
    pub params: BTreeMap<String, f64>,
    /// Override for `γ_f`.
    pub deriv_scale: Option<f64>,
    /// Override for `C_f`.
    pub deriv_const: Option<f64>,
    /// Domain given in the function string, if any.
    pub domain: Option<Domain>,
}

/// `(C_f, γ_f)` with `‖f⁽ⁿ⁾‖∞ ≤ C_f γ_fⁿ n!`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivBound {
    pub c_f: Option<f64>,
    pub gamma: f64,
}

impl FunctionSpec {
    /// A family member with default parameters.
    pub fn new(family: Family) -> Self {
        let mut params: BTreeMap<String, f64> = family
            .param_defaults()
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        if family == Family::Polynomial {
            params.insert("c3".into(), 1.0);
        }
        let mut spec = FunctionSpec {
            family,
            params,
            deriv_scale: None,
            deriv_const: None,
            domain: None,
        };
        if family == Family::Step {
            let mid = spec.default_domain().midpoint();
            spec.params.insert("at".into(), mid);
        }
        spec
    }

    pub fn gaussian(mu: f64, sigma: f64) -> Self {
        Self::new(Family::Gaussian)
            .with_param("mu", mu)
            .with_param("sigma", sigma)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(Family::Constant).with_param("value", value)
    }

    pub fn linear_ramp(slope: f64, intercept: f64) -> Self {
        Self::new(Family::LinearRamp)
            .with_param("slope", slope)
            .with_param("intercept", intercept)
    }

    pub fn exponential(rate: f64) -> Self {
        Self::new(Family::Exponential).with_param("rate", rate)
    }

    pub fn sine(freq: f64, phase: f64) -> Self {
        Self::new(Family::Sine)
            .with_param("freq", freq)
            .with_param("phase", phase)
    }

    /// `Σ coeffs[j] x^j`.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let mut spec = Self::new(Family::Polynomial);
        spec.params.clear();
        for (j, &c) in coeffs.iter().enumerate() {
            spec.params.insert(format!("c{j}"), c);
        }
        spec
    }

    pub fn step(at: f64, low: f64, high: f64) -> Self {
        Self::new(Family::Step)
            .with_param("at", at)
            .with_param("low", low)
            .with_param("high", high)
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_deriv_scale(mut self, gamma: f64) -> Self {
        self.deriv_scale = Some(gamma);
        self
    }

    fn param(&self, key: &str) -> f64 {
        self.params.get(key).copied().unwrap_or(0.0)
    }

    /// Monomial coefficients of a `polynomial` spec, lowest order first.
    fn monomial_coeffs(&self) -> Vec<f64> {
        let top = self
            .params
            .keys()
            .filter_map(|k| k.strip_prefix('c')?.parse::<usize>().ok())
            .max();
        match top {
            Some(top) => (0..=top).map(|j| self.param(&format!("c{j}"))).collect(),
            None => Vec::new(),
        }
    }

    /// Domain from the function string, or the family default.
    pub fn default_domain(&self) -> Domain {
        if let Some(d) = self.domain {
            return d;
        }
        let (lo, hi) = match self.family {
            Family::Gaussian => {
                let (mu, sigma) = (self.param("mu"), self.param("sigma").abs());
                (mu - 4.0 * sigma, mu + 4.0 * sigma)
            }
            Family::Sine => (0.0, TAU),
            Family::Lognormal => (0.05, 4.0),
            Family::Polynomial => (-1.0, 1.0),
            Family::Exponential | Family::LinearRamp | Family::Constant | Family::Step => {
                (0.0, 1.0)
            }
        };
        Domain::new(lo, hi).unwrap_or_else(|_| Domain::unit())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            Family::Gaussian => {
                let z = (x - self.param("mu")) / self.param("sigma");
                self.param("amp") * (-0.5 * z * z).exp()
            }
            Family::Sine => {
                self.param("amp") * (self.param("freq") * x + self.param("phase")).sin()
            }
            Family::Exponential => self.param("amp") * (self.param("rate") * x).exp(),
            Family::Lognormal => {
                if x <= 0.0 {
                    return 0.0;
                }
                let sigma = self.param("sigma");
                let z = (x.ln() - self.param("mu")) / sigma;
                (-0.5 * z * z).exp() / (x * sigma * (2.0 * PI).sqrt())
            }
            Family::Polynomial => self
                .monomial_coeffs()
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * x + c),
            Family::LinearRamp => self.param("slope") * x + self.param("intercept"),
            Family::Constant => self.param("value"),
            Family::Step => {
                if x < self.param("at") {
                    self.param("low")
                } else {
                    self.param("high")
                }
            }
        }
    }

    /// Exact degree for the polynomial families, `None` otherwise.
    pub fn polynomial_degree(&self) -> Option<usize> {
        let coeffs = match self.family {
            Family::Constant => vec![self.param("value")],
            Family::LinearRamp => vec![self.param("intercept"), self.param("slope")],
            Family::Polynomial => self.monomial_coeffs(),
            _ => return None,
        };
        Some(coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0))
    }

    /// Derivative constants on `domain`, honouring any overrides.
    pub fn deriv_bound(&self, domain: &Domain) -> DerivBound {
        let width = domain.width();
        let (c_f, gamma) = match self.family {
            Family::Gaussian => (
                Some(self.param("amp").abs() * 0.5f64.exp()),
                1.0 / self.param("sigma").abs(),
            ),
            Family::Sine => (Some(self.param("amp").abs()), self.param("freq").abs()),
            Family::Exponential => {
                let rate = self.param("rate");
                let top = (rate * domain.lo()).max(rate * domain.hi());
                let c = if rate == 0.0 {
                    top.exp()
                } else {
                    (top + 4.0).exp()
                };
                (Some(self.param("amp").abs() * c), rate.abs() / 4.0)
            }
            Family::Lognormal => {
                let gamma = if domain.lo() > 0.0 {
                    2.0 / domain.lo()
                } else {
                    let sigma = self.param("sigma");
                    2.0 / (self.param("mu") - sigma * sigma).exp()
                };
                (None, gamma)
            }
            Family::Polynomial | Family::LinearRamp | Family::Step => (None, 1.0 / width),
            Family::Constant => (Some(self.param("value").abs()), 0.0),
        };
        DerivBound {
            c_f: self.deriv_const.or(c_f),
            gamma: self.deriv_scale.unwrap_or(gamma),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::SpecParse {
            input: self.to_string(),
            reason,
        };
        if self.params.values().any(|v| !v.is_finite()) {
            return Err(bad("parameters must be finite".into()));
        }
        for (key, value) in [("gamma", self.deriv_scale), ("cf", self.deriv_const)] {
            if matches!(value, Some(v) if !(v >= 0.0 && v.is_finite())) {
                return Err(bad(format!("`{key}` must be a finite nonnegative number")));
            }
        }
        if matches!(self.family, Family::Gaussian | Family::Lognormal) && self.param("sigma") <= 0.0
        {
            return Err(bad("`sigma` must be positive".into()));
        }
        Ok(())
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let err = |reason: String| Error::SpecParse {
            input: input.to_string(),
            reason,
        };
        let (family, rest) = match input.split_once(':') {
            Some((f, rest)) => (f.trim(), rest.trim()),
            None => (input.trim(), ""),
        };
        let family: Family = family
            .parse()
            .map_err(|_| err(format!("unknown family `{family}`")))?;

        let mut given = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found `{item}`")))?;
            let key = key.trim();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
            if given.insert(key.to_string(), value).is_some() {
                return Err(err(format!("duplicate key `{key}`")));
            }
        }

        let explicit_at = given.contains_key("at");
        let mut spec = FunctionSpec::new(family);
        if family == Family::Polynomial && given.keys().any(|k| is_coeff_key(k)) {
            spec.params.clear();
        }
        let lo = given.remove("lo");
        let hi = given.remove("hi");
        spec.deriv_scale = given.remove("gamma");
        spec.deriv_const = given.remove("cf");
        if lo.is_some() || hi.is_some() {
            let default = spec.default_domain();
            spec.domain = Some(Domain::new(
                lo.unwrap_or(default.lo()),
                hi.unwrap_or(default.hi()),
            )?);
        }
        for (key, value) in given {
            let known = family.param_defaults().iter().any(|&(k, _)| k == key)
                || (family == Family::Polynomial && is_coeff_key(&key))
                || (family == Family::Step && key == "at");
            if !known {
                return Err(err(format!("unknown parameter `{key}` for {family}")));
            }
            spec.params.insert(key, value);
        }
        if family == Family::Step && !explicit_at {
            let mid = spec.default_domain().midpoint();
            spec.params.insert("at".into(), mid);
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn is_coeff_key(key: &str) -> bool {
    key.strip_prefix('c')
        .is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        let mut items: Vec<String> = self
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        if let Some(d) = self.domain {
            items.push(format!("lo={}", d.lo()));
            items.push(format!("hi={}", d.hi()));
        }
        if let Some(g) = self.deriv_scale {
            items.push(format!("gamma={g}"));
        }
        if let Some(c) = self.deriv_const {
            items.push(format!("cf={c}"));
        }
        if !items.is_empty() {
            write!(f, ":{}", items.join(","))?;
        }
        Ok(())
    }
}

/// Unit-norm vector of `2^N` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedState {
    n_qubits: usize,
    domain: Domain,
    values: Vec<f64>,
}

impl DiscretizedState {
    /// Normalizes `values` into a state. The length must be `2^n_qubits`.
    pub fn from_amplitudes(n_qubits: usize, domain: Domain, mut values: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits >= usize::BITS as usize {
            return Err(Error::OutOfRange(format!("qubit count {n_qubits}")));
        }
        if values.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_qubits} qubits",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("amplitude {i} = {}", values[i])));
        }
        let norm = l2_norm(&values);
        if norm == 0.0 {
            return Err(Error::ZeroFunction);
        }
        values.iter_mut().for_each(|v| *v /= norm);
        Ok(DiscretizedState {
            n_qubits,
            domain,
            values,
        })
    }

    /// `|0…0⟩`-style computational basis state `e_index` on the unit domain.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let len = 1usize << n_qubits;
        if index >= len {
            return Err(Error::OutOfRange(format!("basis index {index} >= {len}")));
        }
        let mut values = vec![0.0; len];
        values[index] = 1.0;
        Self::from_amplitudes(n_qubits, Domain::unit(), values)
    }

    pub fn uniform(n_qubits: usize) -> Result<Self> {
        if n_qubits >= 40 {
            return Err(Error::CapExceeded {
                what: "N",
                value: n_qubits,
                cap: 39,
            });
        }
        Self::from_amplitudes(n_qubits, Domain::unit(), vec![1.0; 1usize << n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        comp += if sum.abs() >= t.abs() {
            (sum - next) + t
        } else {
            (t - next) + sum
        };
        sum = next;
    }
    sum + comp
}

pub(crate) fn l2_norm(values: &[f64]) -> f64 {
    // scaled accumulation keeps tiny amplitudes from underflowing
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * compensated_sum(values.iter().map(|v| (v / scale).powi(2))).sqrt()
}

/// Samples `spec` on the `2^n` grid over `domain` and normalizes.
pub fn discretize(spec: &FunctionSpec, domain: &Domain, n: usize) -> Result<DiscretizedState> {
    if n == 0 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    if n >= 40 {
        return Err(Error::CapExceeded {
            what: "N",
            value: n,
            cap: 39,
        });
    }
    let values: Vec<f64> = domain.grid(n).into_iter().map(|x| spec.eval(x)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{spec} at grid point {i}")));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroFunction);
    }
    DiscretizedState::from_amplitudes(n, *domain, values)
}

/// `Σ |v_i|`; at most `2^{N/2}` for a unit state.
pub fn one_norm(state: &DiscretizedState) -> f64 {
    compensated_sum(state.values.iter().map(|v| v.abs()))
}

pub fn inner(a: &DiscretizedState, b: &DiscretizedState) -> Result<f64> {
    dot(&a.values, &b.values)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(compensated_sum(a.iter().zip(b).map(|(x, y)| x * y)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_one_norm_saturates_exactly() {
        for n in 1..=20 {
            let u = DiscretizedState::uniform(n).unwrap();
            assert!(
                (one_norm(&u) - (n as f64 / 2.0).exp2()).abs() <= 1e-12,
                "n={n}"
            );
        }
        assert_eq!(compensated_sum([1e16, 1.0, -1e16]), 1.0);
    }

    // numpy: exp(-x²/2) on 16 inclusive points of [-4, 4], normalized
    #[allow(clippy::excessive_precision)]
    const GAUSSIAN_N4: [f64; 8] = [
        1.8401619262806515e-04,
        1.3476732531189127e-03,
        7.4264374057003337e-03,
        3.0792417609685568e-02,
        9.6067037585455275e-02,
        2.2551340193912911e-01,
        3.9832508890280416e-01,
        5.2938339447514049e-01,
    ];

    fn gaussian_n4() -> DiscretizedState {
        let dom = Domain::new(-4.0, 4.0).unwrap();
        discretize(&FunctionSpec::gaussian(0.0, 1.0), &dom, 4).unwrap()
    }

    #[test]
    fn domain_rejects_degenerate_intervals() {
        assert!(Domain::new(1.0, 1.0).is_err());
        assert!(Domain::new(2.0, 1.0).is_err());
        assert!(Domain::new(0.0, f64::INFINITY).is_err());
        assert!(Domain::new(f64::NAN, 1.0).is_err());
        assert!(Domain::new(-f64::MAX, f64::MAX).is_err());
    }

    #[test]
    fn grid_includes_both_endpoints() {
        let g = Domain::new(-4.0, 4.0).unwrap().grid(3);
        assert_eq!(g.len(), 8);
        assert_eq!(g[0], -4.0);
        assert_eq!(g[7], 4.0);
    }

    #[test]
    fn constant_is_uniform() {
        let s = discretize(&FunctionSpec::constant(3.0), &Domain::unit(), 2).unwrap();
        assert_eq!(s.values(), &[0.5; 4]);
    }

    #[test]
    fn ramp_on_two_points() {
        let s = discretize(&FunctionSpec::linear_ramp(1.0, 0.0), &Domain::unit(), 1).unwrap();
        assert_eq!(s.values(), &[0.0, 1.0]);
    }

    #[test]
    fn gaussian_matches_direct_evaluation() {
        let s = gaussian_n4();
        for (i, &want) in GAUSSIAN_N4.iter().enumerate() {
            assert!((s.values()[i] - want).abs() < 1e-15, "entry {i}");
            assert!(
                (s.values()[15 - i] - want).abs() < 1e-15,
                "entry {}",
                15 - i
            );
        }
    }

    #[test]
    fn one_norm_examples() {
        assert!((one_norm(&DiscretizedState::uniform(2).unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(one_norm(&DiscretizedState::basis(5, 0).unwrap()), 1.0);
        let g = one_norm(&gaussian_n4());
        assert!((g - 2.578078934727324).abs() < 1e-12);
        assert!(g < 4.0);
    }

    #[test]
    fn inner_examples() {
        let f = gaussian_n4();
        assert!((inner(&f, &f).unwrap() - 1.0).abs() < 1e-12);
        let e0 = DiscretizedState::basis(3, 0).unwrap();
        let e1 = DiscretizedState::basis(3, 1).unwrap();
        assert_eq!(inner(&e0, &e1).unwrap(), 0.0);

        let u = DiscretizedState::uniform(2).unwrap();
        let shifted: Vec<f64> = u.values().iter().map(|v| v - 0.1).collect();
        let g = DiscretizedState::from_amplitudes(2, Domain::unit(), shifted).unwrap();
        assert!((inner(&u, &g).unwrap() - 1.0).abs() < 1e-15);

        assert!(matches!(inner(&u, &f), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zero_and_nonfinite_functions_are_rejected() {
        let zero = FunctionSpec::constant(0.0);
        assert!(matches!(
            discretize(&zero, &Domain::unit(), 3),
            Err(Error::ZeroFunction)
        ));
        let blowup = FunctionSpec::exponential(1000.0);
        assert!(matches!(
            discretize(&blowup, &Domain::unit(), 3),
            Err(Error::NonFinite(_))
        ));
        assert!(discretize(&FunctionSpec::constant(1.0), &Domain::unit(), 0).is_err());
    }

    #[test]
    fn parse_grammar() {
        let s: FunctionSpec = "gaussian:mu=0,sigma=1".parse().unwrap();
        assert_eq!(s, FunctionSpec::gaussian(0.0, 1.0));
        assert_eq!(s.default_domain(), Domain::new(-4.0, 4.0).unwrap());

        let s: FunctionSpec = " sine : freq = 2 , lo=0, hi=3.5, gamma=0.5 "
            .parse()
            .unwrap();
        assert_eq!(s.family, Family::Sine);
        assert_eq!(s.params["freq"], 2.0);
        assert_eq!(s.default_domain(), Domain::new(0.0, 3.5).unwrap());
        assert_eq!(s.deriv_bound(&s.default_domain()).gamma, 0.5);

        let s: FunctionSpec = "polynomial:c0=1,c2=-3".parse().unwrap();
        assert_eq!(s.polynomial_degree(), Some(2));
        assert_eq!(s.eval(2.0), 1.0 - 12.0);

        let s: FunctionSpec = "step:lo=2,hi=4".parse().unwrap();
        assert_eq!(s.params["at"], 3.0);

        for bad in [
            "gauss",
            "gaussian:mu",
            "gaussian:mu=x",
            "gaussian:nu=1",
            "gaussian:sigma=0",
            "gaussian:mu=1,mu=2",
            "sine:lo=3,hi=1",
            "sine:gamma=-1",
        ] {
            assert!(bad.parse::<FunctionSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for input in [
            "gaussian:mu=0.5,sigma=2,lo=-1,hi=3",
            "polynomial:c0=1,c3=2",
            "step",
            "lognormal:cf=2",
        ] {
            let s: FunctionSpec = input.parse().unwrap();
            let again: FunctionSpec = s.to_string().parse().unwrap();
            assert_eq!(s, again, "{input}");
        }
    }

    #[test]
    fn polynomial_degrees() {
        assert_eq!(FunctionSpec::constant(2.0).polynomial_degree(), Some(0));
        assert_eq!(
            FunctionSpec::linear_ramp(1.0, 0.0).polynomial_degree(),
            Some(1)
        );
        assert_eq!(
            FunctionSpec::linear_ramp(0.0, 1.0).polynomial_degree(),
            Some(0)
        );
        assert_eq!(
            FunctionSpec::new(Family::Polynomial).polynomial_degree(),
            Some(3)
        );
        assert_eq!(FunctionSpec::gaussian(0.0, 1.0).polynomial_degree(), None);
    }

    #[test]
    fn deriv_bounds_are_nonnegative_and_valid() {
        // spot-check ‖f⁽ⁿ⁾‖∞ ≤ C γⁿ n! for exp on [0, 1] against the exact derivatives
        let spec = FunctionSpec::exponential(1.0);
        let d = Domain::unit();
        let b = spec.deriv_bound(&d);
        let c = b.c_f.unwrap();
        let mut fact = 1.0;
        for n in 0..30 {
            if n > 0 {
                fact *= n as f64;
            }
            assert!(
                1f64.exp() <= c * b.gamma.powi(n) * fact * (1.0 + 1e-12),
                "n = {n}"
            );
        }
        for fam in Family::ALL {
            let s = FunctionSpec::new(fam);
            let b = s.deriv_bound(&s.default_domain());
            assert!(b.gamma >= 0.0 && b.gamma.is_finite(), "{fam}");
            assert!(b.c_f.is_none_or(|c| c >= 0.0), "{fam}");
        }
    }

    #[test]
    fn every_family_evaluates_finite_on_default_domain() {
        for fam in Family::ALL {
            let s = FunctionSpec::new(fam);
            let d = s.default_domain();
            let st = discretize(&s, &d, 8).unwrap();
            assert!(st.values().iter().all(|v| v.is_finite()), "{fam}");
        }
    }

    fn random_unit(n: usize, raw: &[f64]) -> Option<DiscretizedState> {
        DiscretizedState::from_amplitudes(n, Domain::unit(), raw[..1 << n].to_vec()).ok()
    }

    proptest! {
        #[test]
        fn one_norm_obeys_cauchy_schwarz(n in 1usize..=8, raw in prop::collection::vec(-1.0f64..1.0, 256)) {
            if let Some(s) = random_unit(n, &raw) {
                prop_assert!((l2_norm(s.values()) - 1.0).abs() <= 1e-12);
                prop_assert!(one_norm(&s) <= 2f64.powf(n as f64 / 2.0) + 1e-9);
            }
        }

        #[test]
        fn even_functions_discretize_symmetrically(n in 1usize..=10, mu in -2.0f64..2.0, sigma in 0.2f64..3.0) {
            let dom = Domain::new(mu - 3.0, mu + 3.0).unwrap();
            let s = discretize(&FunctionSpec::gaussian(mu, sigma), &dom, n).unwrap();
            let v = s.values();
            for i in 0..v.len() {
                prop_assert!((v[i] - v[v.len() - 1 - i]).abs() <= 1e-12);
            }
        }

        #[test]
        fn discretize_is_deterministic(n in 1usize..=10, freq in 0.1f64..5.0) {
            let spec = FunctionSpec::sine(freq, 0.3);
            let dom = spec.default_domain();
            let a = discretize(&spec, &dom, n).unwrap();
            let b = discretize(&spec, &dom, n).unwrap();
            prop_assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn only_uniform_saturates_one_norm() {
        for n in 1..=10 {
            let u = DiscretizedState::uniform(n).unwrap();
            assert!((one_norm(&u) - 2f64.powf(n as f64 / 2.0)).abs() < 1e-12);
        }
        let mut v = vec![1.0; 16];
        v[3] = 1.01;
        let near = DiscretizedState::from_amplitudes(4, Domain::unit(), v).unwrap();
        assert!(one_norm(&near) < 4.0 - 1e-12);
    }
}
