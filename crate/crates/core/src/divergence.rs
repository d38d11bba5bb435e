//! Divergence generators, convex conjugates and conditional phi-divergences.
//!
//! A generator `phi` is continuous, strictly convex and nonnegative on
//! `[0, inf)` with `phi(1) = 0` and `phi(t) / t -> inf`. Its conjugate is
//! taken over the half line only:
//!
//! ```text
//! phi*(m) = sup_{t >= 0} { m t - phi(t) }
//! ```
//!
//! which is real valued, increasing and convex with `phi*(0) = 0` and
//! `(phi*)'(0) = 1`. The conditional divergence of a measure `nu` that agrees
//! with `mu` on G is `D(nu || mu) = E_mu[phi(dnu/dmu) | G]`, and it is the
//! pointwise supremum of `E_nu[z | G] - E_mu[phi*(z) | G]` over payoffs `z`.

use std::fmt;
use std::sync::Arc;

use crate::error::{CondRiskError, Result};
use crate::probspace::{cond_expectation, ConditionalValue, FiniteProbabilitySpace, Partition, RandomVariable};
use crate::scalar::bisect_nonincreasing;

/// Tolerance for the per-atom mass constraints of densities and measures.
pub const MASS_TOL: f64 = 1e-10;

/// Default horizon up to which superlinearity is checked.
pub const DEFAULT_T_CHECK: f64 = 1e6;

/// Largest bracket end tried by [`numeric_conjugate`].
pub const CONJUGATE_BRACKET_CAP: f64 = 1e12;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Kl,
    Chi2,
    Power(f64),
    Custom {
        phi: Arc<ScalarFn>,
        phi_prime: Arc<ScalarFn>,
    },
}

/// A member of the generator class together with its conjugate.
#[derive(Clone)]
pub struct DivergenceGenerator {
    name: String,
    kind: Kind,
}

impl fmt::Debug for DivergenceGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DivergenceGenerator")
            .field("name", &self.name)
            .field("has_closed_forms", &self.has_closed_forms())
            .finish()
    }
}

fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

impl DivergenceGenerator {
    /// Kullback-Leibler: `phi(t) = t ln t - t + 1`, `phi*(m) = e^m - 1`.
    pub fn kl() -> Self {
        Self {
            name: "kl".into(),
            kind: Kind::Kl,
        }
    }

    /// Pearson chi-square: `phi(t) = (t - 1)^2`.
    pub fn chi2() -> Self {
        Self {
            name: "chi2".into(),
            kind: Kind::Chi2,
        }
    }

    /// Power family `phi(t) = (t^a - a t + a - 1) / (a (a - 1))`, `a > 1`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(CondRiskError::InvalidGenerator {
                name: format!("power:{alpha}"),
                reason: "alpha must be a finite number greater than 1".into(),
            });
        }
        Ok(Self {
            name: format!("power:{alpha}"),
            kind: Kind::Power(alpha),
        })
    }

    /// A user-supplied generator. `phi_prime` must be the right derivative.
    /// The conjugate is computed numerically. The generator is validated on a
    /// grid before it is returned.
    pub fn custom(
        name: impl Into<String>,
        phi: impl Fn(f64) -> f64 + Send + Sync + 'static,
        phi_prime: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let gen = Self {
            name: name.into(),
            kind: Kind::Custom {
                phi: Arc::new(phi),
                phi_prime: Arc::new(phi_prime),
            },
        };
        gen.validate(DEFAULT_T_CHECK)?;
        Ok(gen)
    }

    /// Parses `"kl"`, `"chi2"` or `"power:<alpha>"`.
    pub fn from_name(name: &str) -> Result<Self> {
        let name = name.trim();
        match name {
            "kl" => Ok(Self::kl()),
            "chi2" => Ok(Self::chi2()),
            _ => {
                let alpha = name
                    .strip_prefix("power:")
                    .and_then(|a| a.trim().parse::<f64>().ok())
                    .ok_or_else(|| CondRiskError::UnknownGenerator { name: name.into() })?;
                Self::power(alpha)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn has_closed_forms(&self) -> bool {
        !matches!(self.kind, Kind::Custom { .. })
    }

    /// `phi(t)`; `+inf` for `t < 0` (the lower semicontinuous extension).
    pub fn phi(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            Kind::Kl => xlogx(t) - t + 1.0,
            Kind::Chi2 => (t - 1.0) * (t - 1.0),
            Kind::Power(a) => (t.powf(*a) - a * t + a - 1.0) / (a * (a - 1.0)),
            Kind::Custom { phi, .. } => phi(t),
        }
    }

    /// Right derivative of `phi` at `t >= 0` (may be `-inf` at zero).
    pub fn phi_prime(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Kl => t.ln(),
            Kind::Chi2 => 2.0 * (t - 1.0),
            Kind::Power(a) => (t.powf(a - 1.0) - 1.0) / (a - 1.0),
            Kind::Custom { phi_prime, .. } => phi_prime(t),
        }
    }

    /// `phi*(m) = sup_{t >= 0} { m t - phi(t) }`. Custom generators return
    /// NaN if the numeric conjugate fails.
    pub fn phi_star(&self, m: f64) -> f64 {
        match &self.kind {
            Kind::Kl => m.exp_m1(),
            Kind::Chi2 => {
                if m >= -2.0 {
                    m + 0.25 * m * m
                } else {
                    -1.0
                }
            }
            Kind::Power(a) => {
                let u = 1.0 + (a - 1.0) * m;
                if u <= 0.0 {
                    -1.0 / a
                } else {
                    (u.powf(a / (a - 1.0)) - 1.0) / a
                }
            }
            Kind::Custom { .. } => numeric_conjugate_solution(self, m).map(|s| s.value).unwrap_or(f64::NAN),
        }
    }

    /// `(phi*)'(m)`, which is also the maximizing `t` in the conjugate.
    pub fn phi_star_prime(&self, m: f64) -> f64 {
        match &self.kind {
            Kind::Kl => m.exp(),
            Kind::Chi2 => (1.0 + 0.5 * m).max(0.0),
            Kind::Power(a) => {
                let u = 1.0 + (a - 1.0) * m;
                if u <= 0.0 {
                    0.0
                } else {
                    u.powf(1.0 / (a - 1.0))
                }
            }
            Kind::Custom { .. } => numeric_conjugate_solution(self, m)
                .map(|s| s.argmax)
                .unwrap_or(f64::NAN),
        }
    }

    /// An argument `m` with `-phi*(m) = phi(0)` up to rounding, used where a
    /// density vanishes. Finite whenever `phi'(0+)` is finite; otherwise the
    /// first `-2^k` at which the gap drops below `1e-16`.
    pub fn zero_density_argument(&self) -> f64 {
        let d0 = self.phi_prime(0.0);
        if d0.is_finite() {
            return d0;
        }
        let floor = -self.phi(0.0);
        let mut m = -1.0;
        while self.phi_star(m) - floor > 1e-16 && m > -1e6 {
            m *= 2.0;
        }
        m
    }

    /// Grid checks of the generator-class conditions: `phi(1) = 0`,
    /// nonnegativity, strict midpoint convexity, growth of `phi(t)/t` beyond
    /// `t_check`, conjugacy against the numeric conjugate, `(phi*)'(0) = 1`.
    pub fn validate(&self, t_check: f64) -> Result<()> {
        let fail = |reason: String| CondRiskError::InvalidGenerator {
            name: self.name.clone(),
            reason,
        };
        if self.phi(1.0).abs() > 1e-12 {
            return Err(fail(format!("phi(1) = {} instead of 0", self.phi(1.0))));
        }
        let grid: Vec<f64> = (0..=80).map(|i| i as f64 * 0.125).collect();
        for &t in &grid {
            let v = self.phi(t);
            if !v.is_finite() || v < -1e-12 {
                return Err(fail(format!("phi({t}) = {v} is not a finite nonnegative number")));
            }
        }
        for (i, &t1) in grid.iter().enumerate() {
            for &t2 in grid.iter().skip(i + 1).step_by(7) {
                let mid = self.phi(0.5 * (t1 + t2));
                let chord = 0.5 * (self.phi(t1) + self.phi(t2));
                if mid.partial_cmp(&chord) != Some(std::cmp::Ordering::Less) {
                    return Err(fail(format!("not strictly convex between {t1} and {t2}")));
                }
            }
        }
        let ratios: Vec<f64> = [1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|k| self.phi(k * t_check) / (k * t_check))
            .collect();
        if ratios
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(fail(format!("phi(t)/t is not increasing beyond {t_check}")));
        }
        for i in -20..=20 {
            let m = i as f64 * 0.25;
            let numeric = numeric_conjugate(self, m)?;
            let stated = self.phi_star(m);
            if (numeric - stated).abs() > 1e-8 {
                return Err(fail(format!("phi*({m}) = {stated} but numeric sup is {numeric}")));
            }
        }
        let d = self.phi_star_prime(0.0);
        if (d - 1.0).abs() > 1e-8 {
            return Err(fail(format!("(phi*)'(0) = {d} instead of 1")));
        }
        Ok(())
    }
}

/// Parses a generator name; see [`DivergenceGenerator::from_name`].
pub fn builtin_generator(name: &str) -> Result<DivergenceGenerator> {
    DivergenceGenerator::from_name(name)
}

/// Numeric conjugate value and maximizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateSolution {
    pub value: f64,
    pub argmax: f64,
    pub iterations: usize,
}

/// `sup_{t >= 0} { m t - phi(t) }` by bisection on the derivative
/// `m - phi'(t)`. The bracket `[0, T]` starts at `T = 1` and doubles until the
/// derivative turns negative at `T`.
pub fn numeric_conjugate(gen: &DivergenceGenerator, m: f64) -> Result<f64> {
    numeric_conjugate_solution(gen, m).map(|s| s.value)
}

pub fn numeric_conjugate_solution(gen: &DivergenceGenerator, m: f64) -> Result<ConjugateSolution> {
    if !m.is_finite() {
        return Err(CondRiskError::NonFiniteEvaluation {
            context: "numeric conjugate",
            argument: m,
        });
    }
    let slope = |t: f64| m - gen.phi_prime(t);
    if slope(0.0) <= 0.0 {
        return Ok(ConjugateSolution {
            value: -gen.phi(0.0),
            argmax: 0.0,
            iterations: 0,
        });
    }
    let mut hi = 1.0;
    while slope(hi) >= 0.0 {
        hi *= 2.0;
        if hi > CONJUGATE_BRACKET_CAP {
            return Err(CondRiskError::BracketExpansion {
                context: "bracketing the conjugate maximizer",
                cap: CONJUGATE_BRACKET_CAP,
            });
        }
    }
    let sol = bisect_nonincreasing(slope, 0.0, hi, 1e-14 * hi.max(1.0), 400);
    let t = sol.x;
    let value = m * t - gen.phi(t);
    if !value.is_finite() {
        return Err(CondRiskError::NonFiniteEvaluation {
            context: "numeric conjugate",
            argument: m,
        });
    }
    Ok(ConjugateSolution {
        value,
        argmax: t,
        iterations: sol.iterations,
    })
}

fn check_atom_masses(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    weights: &[f64],
    what: &str,
) -> std::result::Result<(), String> {
    let p = space.probs();
    for (a, atom) in g.atoms().iter().enumerate() {
        let target: f64 = atom.iter().map(|&s| p[s]).sum();
        let got: f64 = atom.iter().map(|&s| weights[s]).sum();
        if (got - target).abs() > MASS_TOL {
            return Err(format!(
                "{what} mass on atom {a} is {got} but the base measure gives {target}"
            ));
        }
    }
    Ok(())
}

fn check_nonnegative(values: &[f64], what: &str) -> std::result::Result<(), String> {
    for (s, &v) in values.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(format!("{what} at state {s} is {v}; must be finite and nonnegative"));
        }
    }
    Ok(())
}

fn check_lengths(space: &FiniteProbabilitySpace, g: &Partition, len: usize, context: &'static str) -> Result<()> {
    g.check(space)?;
    if len != space.len() {
        return Err(CondRiskError::DimensionMismatch {
            context,
            expected: space.len(),
            actual: len,
        });
    }
    Ok(())
}

/// A nonnegative `y` with `E_mu[y | G] = 1` on every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDensity {
    values: Vec<f64>,
}

impl ConditionalDensity {
    pub fn new(space: &FiniteProbabilitySpace, g: &Partition, values: Vec<f64>) -> Result<Self> {
        check_lengths(space, g, values.len(), "conditional density")?;
        check_nonnegative(&values, "density").map_err(CondRiskError::InvalidDensity)?;
        let weighted: Vec<f64> = values.iter().zip(space.probs()).map(|(y, p)| y * p).collect();
        check_atom_masses(space, g, &weighted, "density-weighted").map_err(CondRiskError::InvalidDensity)?;
        Ok(Self { values })
    }

    /// Rescales nonnegative `raw` on each atom so its conditional mean is one.
    /// Atoms where `raw` vanishes get the constant density.
    pub fn normalized(space: &FiniteProbabilitySpace, g: &Partition, raw: Vec<f64>) -> Result<Self> {
        check_lengths(space, g, raw.len(), "conditional density")?;
        check_nonnegative(&raw, "density").map_err(CondRiskError::InvalidDensity)?;
        let mut values = raw;
        let p = space.probs();
        for atom in g.atoms() {
            let mass: f64 = atom.iter().map(|&s| p[s]).sum();
            let mean = atom.iter().map(|&s| p[s] * values[s]).sum::<f64>() / mass;
            for &s in atom {
                values[s] = if mean > 0.0 { values[s] / mean } else { 1.0 };
            }
        }
        Ok(Self { values })
    }

    /// The constant density, i.e. `nu = mu`.
    pub fn one(n_states: usize) -> Self {
        Self {
            values: vec![1.0; n_states],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_random_variable(&self) -> RandomVariable {
        RandomVariable::from_raw(self.values.clone())
    }
}

/// A probability measure `nu << mu` with `nu = mu` on G.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentConditionalMeasure {
    weights: Vec<f64>,
}

impl EquivalentConditionalMeasure {
    pub fn new(space: &FiniteProbabilitySpace, g: &Partition, weights: Vec<f64>) -> Result<Self> {
        check_lengths(space, g, weights.len(), "measure")?;
        check_nonnegative(&weights, "measure weight").map_err(CondRiskError::InvalidMeasure)?;
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(CondRiskError::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        check_atom_masses(space, g, &weights, "measure").map_err(CondRiskError::InvalidMeasure)?;
        Ok(Self { weights })
    }

    /// The base measure itself.
    pub fn base(space: &FiniteProbabilitySpace) -> Self {
        Self {
            weights: space.probs().to_vec(),
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// `D(nu || mu)` on each atom: `sum_{s in A} (p_s / mu(A)) phi(nu_s / p_s)`.
pub fn cond_divergence(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    nu: &EquivalentConditionalMeasure,
) -> Result<ConditionalValue> {
    check_lengths(space, g, nu.weights.len(), "cond_divergence")?;
    let p = space.probs();
    let ratio = RandomVariable::from_raw(nu.weights.iter().zip(p).map(|(w, p)| gen.phi(w / p)).collect());
    cond_expectation(space, g, &ratio)
}

/// `nu_s = p_s y_s`.
pub fn density_to_measure(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    y: &ConditionalDensity,
) -> Result<EquivalentConditionalMeasure> {
    check_lengths(space, g, y.values.len(), "density_to_measure")?;
    Ok(EquivalentConditionalMeasure {
        weights: y.values.iter().zip(space.probs()).map(|(y, p)| y * p).collect(),
    })
}

/// `y_s = nu_s / p_s`.
pub fn measure_to_density(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    nu: &EquivalentConditionalMeasure,
) -> Result<ConditionalDensity> {
    check_lengths(space, g, nu.weights.len(), "measure_to_density")?;
    Ok(ConditionalDensity {
        values: nu.weights.iter().zip(space.probs()).map(|(w, p)| w / p).collect(),
    })
}

/// `E_nu[x | G]`.
pub fn cond_expectation_under(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    nu: &EquivalentConditionalMeasure,
    x: &RandomVariable,
) -> Result<ConditionalValue> {
    check_lengths(space, g, nu.weights.len(), "cond_expectation_under")?;
    space.check_rv(x, "cond_expectation_under")?;
    let out = g
        .atoms()
        .iter()
        .enumerate()
        .map(|(a, atom)| {
            let (num, den) = atom
                .iter()
                .fold((0.0, 0.0), |(n, d), &s| (n + nu.weights[s] * x[s], d + nu.weights[s]));
            if den > 0.0 {
                Ok(num / den)
            } else {
                Err(CondRiskError::ZeroMass { atom: a })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalValue::from_raw(out))
}

/// `E_nu[z | G] - E_mu[phi*(z) | G]`, a lower bound for `D(nu || mu)`.
pub fn donsker_varadhan_value(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    nu: &EquivalentConditionalMeasure,
    z: &RandomVariable,
) -> Result<ConditionalValue> {
    let gain = cond_expectation_under(space, g, nu, z)?;
    let cost = cond_expectation(space, g, &z.map(|m| gen.phi_star(m)))?;
    Ok(&gain - &cost)
}

/// The payoff attaining the Donsker-Varadhan supremum: `phi'(y_s)` where the
/// density `y = dnu/dmu` is positive and different from one, zero where it
/// equals one, and [`DivergenceGenerator::zero_density_argument`] where it
/// vanishes.
pub fn donsker_varadhan_maximizer(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    nu: &EquivalentConditionalMeasure,
) -> Result<RandomVariable> {
    let y = measure_to_density(space, g, nu)?;
    let at_zero = gen.zero_density_argument();
    Ok(RandomVariable::from_raw(
        y.values
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    at_zero
                } else if t == 1.0 {
                    0.0
                } else {
                    gen.phi_prime(t)
                }
            })
            .collect(),
    ))
}
