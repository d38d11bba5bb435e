//! Primal conditional optimized certainty equivalent
//!
//! ```text
//! OCE(x) = sup_{a in L^0(G)} { a - E_mu[phi*(a - x) | G] }
//! ```
//!
//! The objective only couples `a[A]` with the states of atom `A`, so the
//! supremum splits into one scalar concave problem per atom. Its derivative
//! `1 - sum_s w_s (phi*)'(a - x_s)` is nonincreasing, nonnegative at
//! `min_A x` and nonpositive at `max_A x` because `(phi*)'(0) = 1`.

use crate::divergence::DivergenceGenerator;
use crate::error::{CondRiskError, Result};
use crate::probspace::{ConditionalValue, FiniteProbabilitySpace, Partition, RandomVariable};
use crate::scalar::{bisect_nonincreasing, golden_max};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Width of the final bracket on the argmax / multiplier.
    pub tol: f64,
    /// Per-atom iteration cap; hitting it is reported through the residual.
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Result<Self> {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CondRiskError::InvalidParameter(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        Ok(Self { tol, ..Self::default() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OceSolution {
    pub value: ConditionalValue,
    pub optimal_a: ConditionalValue,
    pub iterations: Vec<usize>,
    /// Final bracket width around `optimal_a`, per atom.
    pub residuals: Vec<f64>,
}

/// Per-atom view of a payoff: conditional weights and the payoff values.
pub(crate) struct AtomSlice {
    pub weights: Vec<f64>,
    pub xs: Vec<f64>,
    pub lo: f64,
    pub hi: f64,
}

pub(crate) fn atom_slices(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    x: &RandomVariable,
    context: &'static str,
) -> Result<Vec<AtomSlice>> {
    g.check(space)?;
    space.check_rv(x, context)?;
    Ok((0..g.len())
        .map(|a| {
            let xs: Vec<f64> = g.atom(a).iter().map(|&s| x[s]).collect();
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            AtomSlice {
                weights: g.conditional_weights(space, a),
                xs,
                lo,
                hi,
            }
        })
        .collect())
}

fn objective(gen: &DivergenceGenerator, atom: &AtomSlice, a: f64) -> f64 {
    a - atom
        .weights
        .iter()
        .zip(&atom.xs)
        .map(|(w, x)| w * gen.phi_star(a - x))
        .sum::<f64>()
}

/// `sum_s w_s (phi*)'(m - x_s)`: the conditional mass of the candidate
/// density at level `m`. Shared with the dual solver.
pub(crate) fn density_mass(gen: &DivergenceGenerator, atom: &AtomSlice, m: f64) -> f64 {
    atom.weights
        .iter()
        .zip(&atom.xs)
        .map(|(w, x)| w * gen.phi_star_prime(m - x))
        .sum()
}

pub fn oce_primal(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    tol: f64,
) -> Result<OceSolution> {
    oce_primal_with(space, g, gen, x, &SolverOptions::with_tol(tol)?)
}

pub fn oce_primal_with(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    opts: &SolverOptions,
) -> Result<OceSolution> {
    let atoms = atom_slices(space, g, x, "oce_primal")?;
    let mut value = Vec::with_capacity(atoms.len());
    let mut optimal_a = Vec::with_capacity(atoms.len());
    let mut iterations = Vec::with_capacity(atoms.len());
    let mut residuals = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let (a, iters, width) = if atom.hi - atom.lo <= 0.0 {
            (atom.lo, 0, 0.0)
        } else if gen.has_closed_forms() {
            let s = bisect_nonincreasing(
                |a| 1.0 - density_mass(gen, atom, a),
                atom.lo,
                atom.hi,
                opts.tol,
                opts.max_iter,
            );
            (s.x, s.iterations, s.width)
        } else {
            let (s, _) = golden_max(|a| objective(gen, atom, a), atom.lo, atom.hi, opts.tol, opts.max_iter);
            (s.x, s.iterations, s.width)
        };
        let v = objective(gen, atom, a);
        if !v.is_finite() {
            return Err(CondRiskError::NonFiniteEvaluation {
                context: "primal OCE objective",
                argument: a,
            });
        }
        value.push(v);
        optimal_a.push(a);
        iterations.push(iters);
        residuals.push(width);
    }
    Ok(OceSolution {
        value: ConditionalValue::from_raw(value),
        optimal_a: ConditionalValue::from_raw(optimal_a),
        iterations,
        residuals,
    })
}

/// `I_phi(x) = -E_mu[phi*(-x) | G]`.
pub fn i_phi(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
) -> Result<ConditionalValue> {
    let atoms = atom_slices(space, g, x, "i_phi")?;
    Ok(ConditionalValue::from_raw(
        atoms
            .iter()
            .map(|atom| {
                -atom
                    .weights
                    .iter()
                    .zip(&atom.xs)
                    .map(|(w, x)| w * gen.phi_star(-x))
                    .sum::<f64>()
            })
            .collect(),
    ))
}

/// Entropic risk `-ln E_mu[e^{-x} | G]`, shifted by the atom minimum so
/// that large payoffs do not overflow.
pub fn entropic_risk(space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
    let atoms = atom_slices(space, g, x, "entropic_risk")?;
    Ok(ConditionalValue::from_raw(
        atoms
            .iter()
            .map(|atom| {
                let sum: f64 = atom
                    .weights
                    .iter()
                    .zip(&atom.xs)
                    .map(|(w, x)| w * (-(x - atom.lo)).exp())
                    .sum();
                atom.lo - sum.ln()
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probspace::cond_expectation;

    fn rv(v: &[f64]) -> RandomVariable {
        RandomVariable::new(v.to_vec()).unwrap()
    }

    fn gens() -> Vec<DivergenceGenerator> {
        vec![
            DivergenceGenerator::kl(),
            DivergenceGenerator::chi2(),
            DivergenceGenerator::power(2.0).unwrap(),
            DivergenceGenerator::power(3.0).unwrap(),
        ]
    }

    #[test]
    fn constant_payoff() {
        let space = FiniteProbabilitySpace::from_probs(vec![0.2, 0.3, 0.5]).unwrap();
        let g = Partition::new(vec![vec![0, 2], vec![1]], 3).unwrap();
        for gen in gens() {
            let sol = oce_primal(&space, &g, &gen, &RandomVariable::constant(3, 1.25), 1e-10).unwrap();
            assert_eq!(sol.value.values(), &[1.25, 1.25]);
            assert_eq!(sol.optimal_a.values(), &[1.25, 1.25]);
        }
    }

    #[test]
    fn kl_two_state_matches_closed_form() {
        let space = FiniteProbabilitySpace::uniform(2).unwrap();
        let g = Partition::trivial(2);
        let x = rv(&[0.0, 4f64.ln()]);
        let expected = (8.0f64 / 5.0).ln();
        let sol = oce_primal(&space, &g, &DivergenceGenerator::kl(), &x, 1e-10).unwrap();
        assert!((sol.value[0] - expected).abs() < 1e-12);
        assert!((sol.value[0] - 0.4700036292457356).abs() < 1e-12);
        let e = entropic_risk(&space, &g, &x).unwrap();
        assert!((e[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn chi2_below_expectation() {
        let space = FiniteProbabilitySpace::from_probs(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let x = rv(&[-3.0, 4.0, 0.5, 9.0]);
        let sol = oce_primal(&space, &g, &DivergenceGenerator::chi2(), &x, 1e-10).unwrap();
        let e = cond_expectation(&space, &g, &x).unwrap();
        for a in 0..2 {
            assert!(sol.value[a] <= e[a] + 1e-12);
        }
    }

    #[test]
    fn i_phi_examples() {
        let space = FiniteProbabilitySpace::uniform(3).unwrap();
        let g = Partition::trivial(3);
        for gen in gens() {
            assert_eq!(
                i_phi(&space, &g, &gen, &RandomVariable::zeros(3)).unwrap().values(),
                &[0.0]
            );
        }
        let v = i_phi(
            &space,
            &g,
            &DivergenceGenerator::kl(),
            &RandomVariable::constant(3, 2f64.ln()),
        )
        .unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
        let lo = rv(&[0.0, -1.0, 2.0]);
        let hi = rv(&[0.5, -1.0, 2.5]);
        for gen in gens() {
            assert!(i_phi(&space, &g, &gen, &hi).unwrap()[0] >= i_phi(&space, &g, &gen, &lo).unwrap()[0]);
        }
    }

    #[test]
    fn entropic_examples() {
        let space = FiniteProbabilitySpace::from_probs(vec![0.25, 0.75]).unwrap();
        let g = Partition::trivial(2);
        assert!((entropic_risk(&space, &g, &RandomVariable::constant(2, -3.0)).unwrap()[0] + 3.0).abs() < 1e-15);
        let x = rv(&[1.0, 5.0]);
        assert!(entropic_risk(&space, &g, &x).unwrap()[0] <= cond_expectation(&space, &g, &x).unwrap()[0]);
        let big = rv(&[-700.0, 700.0]);
        assert!(entropic_risk(&space, &g, &big).unwrap()[0].is_finite());
    }

    #[test]
    fn rejects_bad_tolerance() {
        let space = FiniteProbabilitySpace::uniform(2).unwrap();
        let g = Partition::trivial(2);
        assert!(oce_primal(&space, &g, &DivergenceGenerator::kl(), &rv(&[0.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn custom_generator_takes_golden_section_path() {
        let space = FiniteProbabilitySpace::uniform(2).unwrap();
        let g = Partition::trivial(2);
        let custom = DivergenceGenerator::custom(
            "kl-numeric",
            |t: f64| if t == 0.0 { 1.0 } else { t * t.ln() - t + 1.0 },
            |t: f64| t.ln(),
        )
        .unwrap();
        let x = rv(&[0.0, 4f64.ln()]);
        let sol = oce_primal(&space, &g, &custom, &x, 1e-10).unwrap();
        assert!((sol.value[0] - (8.0f64 / 5.0).ln()).abs() < 1e-9);
    }
}
