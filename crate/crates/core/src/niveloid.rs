//! Niveloidification of conditional operators.
//!
//! For an operator `I` from payoffs to G-measurable values,
//!
//! ```text
//! I_niv(x) = sup { a + I(y) : a in L^0(G), a + y <= x }
//! ```
//!
//! is the smallest monotone, G-translation-invariant operator above `I`. When
//! `I` is monotone the inner supremum over `y` is attained at `y = x - a`, and
//! when `I` is concave (hence local) the remaining supremum over `a` splits
//! into one scalar concave problem per atom. Operators outside that regime
//! only get the grid oracle [`niveloidify_bruteforce`].

use std::cell::RefCell;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::divergence::{ConditionalDensity, DivergenceGenerator};
use crate::error::{CondRiskError, Result};
use crate::oce::{entropic_risk, i_phi, oce_primal_with, SolverOptions};
use crate::probspace::{
    cond_expectation, cond_sup_norm, embed, restrict_mask, ConditionalValue, FiniteProbabilitySpace, Partition,
    RandomVariable,
};
use crate::scalar::{bracket_max, golden_max, MaxBracket};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OperatorFlags {
    pub concave: bool,
    pub monotone: bool,
    pub local: bool,
}

impl OperatorFlags {
    pub const NONE: Self = Self {
        concave: false,
        monotone: false,
        local: false,
    };
    pub const CONCAVE_MONOTONE: Self = Self {
        concave: true,
        monotone: true,
        local: true,
    };
}

/// A map from payoffs to G-measurable values. Implementations must be pure:
/// they may be called concurrently and repeatedly on the same input.
pub trait ConditionalOperator: Send + Sync {
    fn name(&self) -> &str;

    fn flags(&self) -> OperatorFlags;

    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue>;
}

/// `x -> E_mu[x | G]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CondExpectation;

impl ConditionalOperator for CondExpectation {
    fn name(&self) -> &str {
        "expectation"
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        cond_expectation(space, g, x)
    }
}

/// `x -> min_{s in A} x_s` on every atom.
#[derive(Debug, Clone, Copy, Default)]
pub struct AtomMin;

impl ConditionalOperator for AtomMin {
    fn name(&self) -> &str {
        "atom-min"
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        g.check(space)?;
        space.check_rv(x, "atom-min")?;
        Ok(ConditionalValue::from_raw(
            g.atoms()
                .iter()
                .map(|atom| atom.iter().map(|&s| x[s]).fold(f64::INFINITY, f64::min))
                .collect(),
        ))
    }
}

/// `x -> -ln E_mu[e^{-x} | G]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Entropic;

impl ConditionalOperator for Entropic {
    fn name(&self) -> &str {
        "entropic"
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        entropic_risk(space, g, x)
    }
}

/// `x -> -E_mu[phi*(-x) | G]`.
#[derive(Debug, Clone)]
pub struct IPhi {
    name: String,
    gen: DivergenceGenerator,
}

impl IPhi {
    pub fn new(gen: DivergenceGenerator) -> Self {
        Self {
            name: format!("iphi:{}", gen.name()),
            gen,
        }
    }
}

impl ConditionalOperator for IPhi {
    fn name(&self) -> &str {
        &self.name
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        i_phi(space, g, &self.gen, x)
    }
}

/// The primal OCE as an operator.
#[derive(Debug, Clone)]
pub struct Oce {
    name: String,
    gen: DivergenceGenerator,
    opts: SolverOptions,
}

impl Oce {
    pub fn new(gen: DivergenceGenerator, opts: SolverOptions) -> Self {
        Self {
            name: format!("oce:{}", gen.name()),
            gen,
            opts,
        }
    }
}

impl ConditionalOperator for Oce {
    fn name(&self) -> &str {
        &self.name
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        Ok(oce_primal_with(space, g, &self.gen, x, &self.opts)?.value)
    }
}

type OperatorFn =
    dyn Fn(&FiniteProbabilitySpace, &Partition, &RandomVariable) -> Result<ConditionalValue> + Send + Sync;

/// An operator given by a closure and caller-declared flags.
pub struct FnOperator {
    name: String,
    flags: OperatorFlags,
    f: Box<OperatorFn>,
}

impl FnOperator {
    pub fn new(
        name: impl Into<String>,
        flags: OperatorFlags,
        f: impl Fn(&FiniteProbabilitySpace, &Partition, &RandomVariable) -> Result<ConditionalValue> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            flags,
            f: Box::new(f),
        }
    }
}

impl fmt::Debug for FnOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOperator")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .finish()
    }
}

impl ConditionalOperator for FnOperator {
    fn name(&self) -> &str {
        &self.name
    }
    fn flags(&self) -> OperatorFlags {
        self.flags
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        (self.f)(space, g, x)
    }
}

/// `x -> E_mu[x | G]^2`: concave in nothing, translation invariant in
/// nothing. Useful as a negative control.
pub fn squared_expectation() -> FnOperator {
    FnOperator::new("squared-expectation", OperatorFlags::NONE, |space, g, x| {
        Ok(cond_expectation(space, g, x)?.map(|v| v * v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NiveloidOptions {
    /// Bracket width for the scalar search over `a`.
    pub tol: f64,
    pub max_iter: usize,
    /// Objective or bracket magnitude beyond which the supremum is reported
    /// as `+inf`.
    pub ceiling: f64,
}

impl Default for NiveloidOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 300,
            ceiling: 1e6,
        }
    }
}

/// Evaluates `t + op(x - t 1_A)[A]`, remembering the first operator error.
struct AtomObjective<'a> {
    space: &'a FiniteProbabilitySpace,
    g: &'a Partition,
    op: &'a dyn ConditionalOperator,
    x: &'a RandomVariable,
    atom: usize,
    error: RefCell<Option<CondRiskError>>,
}

impl AtomObjective<'_> {
    fn eval(&self, t: f64) -> f64 {
        let mut shift = vec![0.0; self.g.len()];
        shift[self.atom] = t;
        let shifted = match embed(self.g, &ConditionalValue::from_raw(shift)) {
            Ok(s) => self.x - &s,
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        };
        match self.op.evaluate(self.space, self.g, &shifted) {
            Ok(v) => t + v[self.atom],
            Err(e) => {
                self.error.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }
}

pub fn niveloidify(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    x: &RandomVariable,
    tol: f64,
) -> Result<ConditionalValue> {
    let opts = NiveloidOptions {
        tol,
        ..NiveloidOptions::default()
    };
    niveloidify_with(space, g, op, x, &opts)
}

/// `sup_a { a + op(x - a) }` per atom for monotone concave `op`; atoms where
/// the objective grows past the ceiling get `+inf`.
pub fn niveloidify_with(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    x: &RandomVariable,
    opts: &NiveloidOptions,
) -> Result<ConditionalValue> {
    let flags = op.flags();
    if !(flags.monotone && flags.concave) {
        return Err(CondRiskError::MissingFlags(format!(
            "{} must be declared monotone and concave for the scalar path; use the brute-force oracle",
            op.name()
        )));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(CondRiskError::InvalidParameter(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    g.check(space)?;
    space.check_rv(x, "niveloidify")?;
    let mut out = Vec::with_capacity(g.len());
    for atom in 0..g.len() {
        let (lo, hi) = g
            .atom(atom)
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &s| {
                (lo.min(x[s]), hi.max(x[s]))
            });
        let obj = AtomObjective {
            space,
            g,
            op,
            x,
            atom,
            error: RefCell::new(None),
        };
        let bracket = bracket_max(|t| obj.eval(t), lo - 1.0, hi + 1.0, opts.ceiling, opts.tol);
        if let Some(e) = obj.error.take() {
            return Err(e);
        }
        let value = match bracket {
            MaxBracket::Unbounded => f64::INFINITY,
            MaxBracket::Found { lo, hi } => {
                let (_, v) = golden_max(|t| obj.eval(t), lo, hi, opts.tol, opts.max_iter);
                if let Some(e) = obj.error.take() {
                    return Err(e);
                }
                v
            }
        };
        out.push(value);
    }
    Ok(ConditionalValue::from_raw(out))
}

/// `x -> niveloidify(op, x)` as an operator in its own right.
pub struct Niveloidified<'a> {
    name: String,
    op: &'a dyn ConditionalOperator,
    opts: NiveloidOptions,
}

impl<'a> Niveloidified<'a> {
    pub fn new(op: &'a dyn ConditionalOperator, opts: NiveloidOptions) -> Self {
        Self {
            name: format!("niv({})", op.name()),
            op,
            opts,
        }
    }
}

impl ConditionalOperator for Niveloidified<'_> {
    fn name(&self) -> &str {
        &self.name
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(&self, space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
        niveloidify_with(space, g, self.op, x, &self.opts)
    }
}

/// Which of the two equivalent formulas the grid oracle enumerates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceOrder {
    /// `sup_a sup_{y <= x - a} { a + I(y) }` with `y` on a fixed absolute grid.
    Joint,
    /// `sup_{y <= x} sup_a { a + I(y - a) }` with `y` on offsets below `x`.
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceGrid {
    /// Number of intervals on the per-atom grid for `a`.
    pub a_steps: usize,
    /// Number of steps below `x` for each coordinate of `y`.
    pub y_steps: usize,
}

impl Default for BruteForceGrid {
    fn default() -> Self {
        Self {
            a_steps: 80,
            y_steps: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Grid maximum; a lower bound on the true supremum.
    pub value: ConditionalValue,
    /// Larger of the two grid spacings.
    pub resolution: f64,
}

/// Largest instance accepted by [`niveloidify_bruteforce`].
pub const BRUTEFORCE_MAX_STATES: usize = 3;

fn cartesian(lists: &[Vec<f64>]) -> Vec<Vec<f64>> {
    lists.iter().fold(vec![Vec::new()], |acc, list| {
        acc.iter()
            .flat_map(|prefix| {
                list.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

/// Grid oracle for the niveloidification of an arbitrary operator on at most
/// three states. Both orders enumerate `a` over the same per-atom grid
/// spanning `[min x - w, max x + w]` (`w` = spread of `x` plus one) and `y`
/// over `y_steps` decrements of size `w / y_steps`; they differ in how the
/// `y` grid is anchored.
pub fn niveloidify_bruteforce(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    x: &RandomVariable,
    grid: &BruteForceGrid,
    order: BruteForceOrder,
) -> Result<BruteForceResult> {
    g.check(space)?;
    space.check_rv(x, "niveloidify_bruteforce")?;
    if space.len() > BRUTEFORCE_MAX_STATES {
        return Err(CondRiskError::TooLarge(format!(
            "{} states (at most {BRUTEFORCE_MAX_STATES})",
            space.len()
        )));
    }
    if grid.a_steps == 0 {
        return Err(CondRiskError::InvalidParameter("a_steps must be positive".into()));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo + 1.0;
    let (a_lo, a_hi) = (lo - width, hi + width);
    let a_step = (a_hi - a_lo) / grid.a_steps as f64;
    let y_step = if grid.y_steps == 0 {
        0.0
    } else {
        width / grid.y_steps as f64
    };
    let a_axis: Vec<f64> = (0..=grid.a_steps).map(|k| a_lo + k as f64 * a_step).collect();
    let a_grid = cartesian(&vec![a_axis; g.len()]);

    let mut best = vec![f64::NEG_INFINITY; g.len()];
    let mut consider = |a: &[f64], arg: RandomVariable| -> Result<()> {
        let v = op.evaluate(space, g, &arg)?;
        for (b, (&ai, vi)) in best.iter_mut().zip(a.iter().zip(v.iter())) {
            *b = b.max(ai + vi);
        }
        Ok(())
    };

    match order {
        BruteForceOrder::Nested => {
            let offsets: Vec<Vec<f64>> = x
                .iter()
                .map(|&xs| (0..=grid.y_steps).map(|j| xs - j as f64 * y_step).collect())
                .collect();
            for y in cartesian(&offsets) {
                for a in &a_grid {
                    let shift = embed(g, &ConditionalValue::from_raw(a.clone()))?;
                    let arg = RandomVariable::from_raw(y.iter().zip(shift.iter()).map(|(y, s)| y - s).collect());
                    consider(a, arg)?;
                }
            }
        }
        BruteForceOrder::Joint => {
            let floor = a_lo.min(lo) - width;
            for a in &a_grid {
                let shift = embed(g, &ConditionalValue::from_raw(a.clone()))?;
                // y_s <= x_s - a_s: the cap itself plus absolute grid points
                // `floor + k y_step` strictly below it, nearest first.
                let choices: Vec<Vec<f64>> = x
                    .iter()
                    .zip(shift.iter())
                    .map(|(&xs, &sh)| {
                        let cap = xs - sh;
                        let mut list = vec![cap];
                        if y_step > 0.0 {
                            let mut k = ((cap - floor) / y_step).ceil() - 1.0;
                            while list.len() <= grid.y_steps && k >= 0.0 {
                                list.push(floor + k * y_step);
                                k -= 1.0;
                            }
                        }
                        list
                    })
                    .collect();
                for y in cartesian(&choices) {
                    consider(a, RandomVariable::from_raw(y))?;
                }
            }
        }
    }
    Ok(BruteForceResult {
        value: ConditionalValue::from_raw(best),
        resolution: a_step.max(y_step),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyOptions {
    /// Maximum number of coordinate sweeps.
    pub sweeps: usize,
    /// Stop once a sweep improves the total by less than this.
    pub min_improvement: f64,
    pub tol: f64,
    pub ceiling: f64,
}

impl Default for PenaltyOptions {
    fn default() -> Self {
        Self {
            sweeps: 500,
            min_improvement: 1e-12,
            tol: 1e-10,
            ceiling: 1e6,
        }
    }
}

/// Coordinate-ascent lower bound for `c(y) = sup_z { op(z) - E_mu[z y | G] }`.
pub fn penalty(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    y: &ConditionalDensity,
    ascent_iters: usize,
) -> Result<ConditionalValue> {
    let opts = PenaltyOptions {
        sweeps: ascent_iters,
        ..PenaltyOptions::default()
    };
    penalty_with(space, g, op, y, &opts)
}

pub fn penalty_with(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    y: &ConditionalDensity,
    opts: &PenaltyOptions,
) -> Result<ConditionalValue> {
    if !op.flags().concave {
        return Err(CondRiskError::MissingFlags(format!(
            "{} must be declared concave for coordinate ascent",
            op.name()
        )));
    }
    g.check(space)?;
    if y.values().len() != space.len() {
        return Err(CondRiskError::DimensionMismatch {
            context: "penalty",
            expected: space.len(),
            actual: y.values().len(),
        });
    }
    let density = y.as_random_variable();
    let objective = |z: &RandomVariable| -> Result<ConditionalValue> {
        let gain = op.evaluate(space, g, z)?;
        let cost = cond_expectation(space, g, &z.zip_with(&density, |a, b| a * b))?;
        Ok(&gain - &cost)
    };

    let mut z = vec![0.0; space.len()];
    let mut current = objective(&RandomVariable::from_raw(z.clone()))?;
    for _ in 0..opts.sweeps {
        let before: f64 = current.iter().sum();
        for s in 0..space.len() {
            let atom = g.atom_of(s);
            let error = RefCell::new(None);
            let coord = |t: f64| -> f64 {
                let mut trial = z.clone();
                trial[s] = t;
                match objective(&RandomVariable::from_raw(trial)) {
                    Ok(v) => v[atom],
                    Err(e) => {
                        error.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            };
            let start = z[s];
            let (t, v) = match bracket_max(coord, start - 1.0, start + 1.0, opts.ceiling, 0.0) {
                MaxBracket::Found { lo, hi } => {
                    let (sol, v) = golden_max(coord, lo, hi, opts.tol, 300);
                    (sol.x, v)
                }
                MaxBracket::Unbounded => {
                    let up = coord(start + opts.ceiling);
                    let down = coord(start - opts.ceiling);
                    if up >= down {
                        (start + opts.ceiling, up)
                    } else {
                        (start - opts.ceiling, down)
                    }
                }
            };
            if let Some(e) = error.into_inner() {
                return Err(e);
            }
            if v > current[atom] {
                z[s] = t;
                current = objective(&RandomVariable::from_raw(z.clone()))?;
            }
        }
        let after: f64 = current.iter().sum();
        if after - before < opts.min_improvement {
            break;
        }
    }
    Ok(current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axiom {
    TranslationInvariance,
    Monotonicity,
    Concavity,
    Locality,
    Regularity,
    Lipschitz,
}

impl Axiom {
    pub const ALL: [Axiom; 6] = [
        Axiom::TranslationInvariance,
        Axiom::Monotonicity,
        Axiom::Concavity,
        Axiom::Locality,
        Axiom::Regularity,
        Axiom::Lipschitz,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Axiom::TranslationInvariance => "translation-invariance",
            Axiom::Monotonicity => "monotonicity",
            Axiom::Concavity => "concavity",
            Axiom::Locality => "locality",
            Axiom::Regularity => "regularity",
            Axiom::Lipschitz => "lipschitz",
        }
    }
}

/// Inputs that broke an axiom, with the two sides of the failed comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub x: RandomVariable,
    pub y: Option<RandomVariable>,
    pub shift: Option<ConditionalValue>,
    pub atom: usize,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomOutcome {
    pub axiom: Axiom,
    pub checked: usize,
    pub worst_violation: f64,
    pub counterexample: Option<Counterexample>,
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub operator: String,
    pub tolerance: f64,
    pub outcomes: Vec<AxiomOutcome>,
}

impl AxiomReport {
    pub fn outcome(&self, axiom: Axiom) -> &AxiomOutcome {
        self.outcomes
            .iter()
            .find(|o| o.axiom == axiom)
            .expect("every axiom is checked")
    }

    /// Monotone and G-translation invariant on every sample.
    pub fn is_niveloid(&self) -> bool {
        self.outcome(Axiom::TranslationInvariance).passed() && self.outcome(Axiom::Monotonicity).passed()
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(AxiomOutcome::passed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxiomCheckConfig {
    pub samples: usize,
    /// Allowed violation; use about `1e-9` for closed-form operators and twice
    /// the solver tolerance for solver-backed ones.
    pub tolerance: f64,
    pub seed: u64,
    /// Payoff entries are drawn uniformly from `[-scale, scale]`.
    pub scale: f64,
}

impl Default for AxiomCheckConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            tolerance: 1e-9,
            seed: 0x5eed,
            scale: 5.0,
        }
    }
}

struct Tracker {
    outcome: AxiomOutcome,
    tol: f64,
}

impl Tracker {
    fn new(axiom: Axiom, tol: f64) -> Self {
        Self {
            outcome: AxiomOutcome {
                axiom,
                checked: 0,
                worst_violation: 0.0,
                counterexample: None,
            },
            tol,
        }
    }

    /// Records the requirement `lhs >= rhs - tol` (or `|lhs - rhs| <= tol`
    /// when `exact`), keeping the worst offender as the counterexample.
    fn record(&mut self, lhs: f64, rhs: f64, exact: bool, witness: impl FnOnce(f64, f64) -> Counterexample) {
        self.outcome.checked += 1;
        let violation = if exact { (lhs - rhs).abs() } else { rhs - lhs };
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        if violation > self.outcome.worst_violation {
            self.outcome.worst_violation = violation;
            if violation > self.tol {
                self.outcome.counterexample = Some(witness(lhs, rhs));
            }
        }
    }
}

/// Samples random payoffs, G-measurable shifts and weights, and checks the
/// niveloid axioms together with concavity, locality, regularity and the
/// conditional sup-norm Lipschitz bound.
pub fn check_niveloid_axioms(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    op: &dyn ConditionalOperator,
    config: &AxiomCheckConfig,
) -> Result<AxiomReport> {
    g.check(space)?;
    if config.samples == 0 {
        return Err(CondRiskError::InvalidParameter("samples must be at least 1".into()));
    }
    let n = space.len();
    let k = g.len();
    let tol = config.tolerance;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let draw_rv = |rng: &mut ChaCha8Rng| {
        RandomVariable::from_raw((0..n).map(|_| rng.random_range(-config.scale..=config.scale)).collect())
    };
    let mut trackers: Vec<Tracker> = Axiom::ALL.iter().map(|&a| Tracker::new(a, tol)).collect();
    let eval = |x: &RandomVariable| op.evaluate(space, g, x);

    for _ in 0..config.samples {
        let x = draw_rv(&mut rng);
        let y = draw_rv(&mut rng);
        let shift =
            ConditionalValue::from_raw((0..k).map(|_| rng.random_range(-config.scale..=config.scale)).collect());
        let lambda = ConditionalValue::from_raw((0..k).map(|_| rng.random::<f64>()).collect());
        let fx = eval(&x)?;
        let fy = eval(&y)?;

        // translation invariance
        let shifted = eval(&(&x + &embed(g, &shift)?))?;
        for atom in 0..k {
            trackers[0].record(shifted[atom], fx[atom] + shift[atom], true, |lhs, rhs| Counterexample {
                x: x.clone(),
                y: None,
                shift: Some(shift.clone()),
                atom,
                lhs,
                rhs,
            });
        }

        // monotonicity: x >= x - |y|
        let lower = x.zip_with(&y, |a, b| a - b.abs());
        let f_lower = eval(&lower)?;
        for atom in 0..k {
            trackers[1].record(fx[atom], f_lower[atom], false, |lhs, rhs| Counterexample {
                x: x.clone(),
                y: Some(lower.clone()),
                shift: None,
                atom,
                lhs,
                rhs,
            });
        }

        // concavity with G-measurable weights
        let lam = embed(g, &lambda)?;
        let mix = RandomVariable::from_raw((0..n).map(|s| lam[s] * x[s] + (1.0 - lam[s]) * y[s]).collect());
        let f_mix = eval(&mix)?;
        for atom in 0..k {
            let rhs = lambda[atom] * fx[atom] + (1.0 - lambda[atom]) * fy[atom];
            trackers[2].record(f_mix[atom], rhs, false, |lhs, rhs| Counterexample {
                x: x.clone(),
                y: Some(y.clone()),
                shift: Some(lambda.clone()),
                atom,
                lhs,
                rhs,
            });
        }

        // locality and regularity, one atom at a time
        let zero = RandomVariable::zeros(n);
        for atom in 0..k {
            let only = restrict_mask(g, atom, &x, &zero)?;
            let f_only = eval(&only)?;
            trackers[3].record(f_only[atom], fx[atom], true, |lhs, rhs| Counterexample {
                x: x.clone(),
                y: None,
                shift: None,
                atom,
                lhs,
                rhs,
            });
            let glued = restrict_mask(g, atom, &x, &y)?;
            let f_glued = eval(&glued)?;
            for other in 0..k {
                let rhs = if other == atom { fx[other] } else { fy[other] };
                trackers[4].record(f_glued[other], rhs, true, |lhs, rhs| Counterexample {
                    x: x.clone(),
                    y: Some(y.clone()),
                    shift: None,
                    atom: other,
                    lhs,
                    rhs,
                });
            }
        }

        // |f(x) - f(y)| <= ||x - y||_inf^G
        let norm = cond_sup_norm(space, g, &(&x - &y))?;
        for atom in 0..k {
            trackers[5].record(norm[atom], (fx[atom] - fy[atom]).abs(), false, |lhs, rhs| {
                Counterexample {
                    x: x.clone(),
                    y: Some(y.clone()),
                    shift: None,
                    atom,
                    lhs,
                    rhs,
                }
            });
        }
    }

    Ok(AxiomReport {
        operator: op.name().to_string(),
        tolerance: tol,
        outcomes: trackers.into_iter().map(|t| t.outcome).collect(),
    })
}
