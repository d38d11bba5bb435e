//! Dual conditional OCE
//!
//! ```text
//! inf_{nu in M(G)} { E_nu[x | G] + D(nu || mu) }
//! ```
//!
//! solved per atom over conditional densities `y >= 0` with
//! `sum_s w_s y_s = 1`. Stationarity gives `y_s = (phi*)'(lambda - x_s)` and
//! the multiplier `lambda` is found by bisection on the (nondecreasing)
//! conditional mass of that family. The multiplier solves the same equation
//! as the primal first-order condition, so `lambda` and the primal argmax
//! coincide at the optimum.

use crate::divergence::{ConditionalDensity, DivergenceGenerator};
use crate::error::{CondRiskError, Result};
use crate::oce::{atom_slices, density_mass, oce_primal_with, OceSolution, SolverOptions};
use crate::probspace::{cond_expectation, ConditionalValue, FiniteProbabilitySpace, Partition, RandomVariable};
use crate::scalar::bisect_nonincreasing;

/// Slack allowed on the mass at the bracket ends before the constraint map is
/// declared non-monotone.
const MONOTONE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub value: ConditionalValue,
    pub optimal_density: ConditionalDensity,
    pub multiplier: ConditionalValue,
    pub iterations: Vec<usize>,
    /// `|sum_s w_s y_s(lambda) - 1|` before the final renormalization.
    pub residuals: Vec<f64>,
}

pub fn oce_dual(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    tol: f64,
) -> Result<DualSolution> {
    oce_dual_with(space, g, gen, x, &SolverOptions::with_tol(tol)?)
}

pub fn oce_dual_with(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    opts: &SolverOptions,
) -> Result<DualSolution> {
    let atoms = atom_slices(space, g, x, "oce_dual")?;
    let mut density = vec![0.0; space.len()];
    let mut value = Vec::with_capacity(atoms.len());
    let mut multiplier = Vec::with_capacity(atoms.len());
    let mut iterations = Vec::with_capacity(atoms.len());
    let mut residuals = Vec::with_capacity(atoms.len());

    for (index, atom) in atoms.iter().enumerate() {
        let states = g.atom(index);
        if atom.hi - atom.lo <= 0.0 {
            // Constant payoff on the atom (including single-state atoms):
            // nu = mu is optimal and the value is the payoff itself.
            for &s in states {
                density[s] = 1.0;
            }
            value.push(atom.lo);
            multiplier.push(atom.lo);
            iterations.push(0);
            residuals.push(0.0);
            continue;
        }
        let mass_lo = density_mass(gen, atom, atom.lo);
        let mass_hi = density_mass(gen, atom, atom.hi);
        if !mass_lo.is_finite() || !mass_hi.is_finite() {
            return Err(CondRiskError::NonFiniteEvaluation {
                context: "dual constraint map",
                argument: if mass_lo.is_finite() { atom.hi } else { atom.lo },
            });
        }
        if mass_lo > 1.0 + MONOTONE_SLACK || mass_hi < 1.0 - MONOTONE_SLACK || mass_hi < mass_lo {
            return Err(CondRiskError::NonMonotone { atom: index });
        }
        // Bisect down to adjacent floats: where (phi*)' is steep the mass
        // constraint would otherwise be off by far more than tol.
        let sol = bisect_nonincreasing(
            |m| 1.0 - density_mass(gen, atom, m),
            atom.lo,
            atom.hi,
            0.0,
            opts.max_iter,
        );
        if sol.width > opts.tol && sol.iterations >= opts.max_iter {
            return Err(CondRiskError::NotConverged {
                atom: index,
                residual: sol.width,
                tol: opts.tol,
            });
        }
        let lambda = sol.x;
        let raw: Vec<f64> = atom.xs.iter().map(|x| gen.phi_star_prime(lambda - x)).collect();
        let mass: f64 = atom.weights.iter().zip(&raw).map(|(w, y)| w * y).sum();
        if mass.is_nan() || mass <= 0.0 {
            return Err(CondRiskError::NonMonotone { atom: index });
        }
        let mut v = 0.0;
        for ((&s, &w), (&x, &y)) in states.iter().zip(&atom.weights).zip(atom.xs.iter().zip(&raw)) {
            let y = y / mass;
            density[s] = y;
            v += w * (x * y + gen.phi(y));
        }
        value.push(v);
        multiplier.push(lambda);
        iterations.push(sol.iterations);
        residuals.push((mass - 1.0).abs());
    }

    Ok(DualSolution {
        value: ConditionalValue::from_raw(value),
        optimal_density: ConditionalDensity::new(space, g, density)?,
        multiplier: ConditionalValue::from_raw(multiplier),
        iterations,
        residuals,
    })
}

/// Dual objective `E_mu[x y | G] + E_mu[phi(y) | G]` at a given density.
pub fn dual_objective(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    y: &ConditionalDensity,
) -> Result<ConditionalValue> {
    space.check_rv(x, "dual_objective")?;
    let integrand = RandomVariable::from_raw(x.iter().zip(y.values()).map(|(&x, &y)| x * y + gen.phi(y)).collect());
    cond_expectation(space, g, &integrand)
}

/// Primal and dual solutions side by side.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub primal: OceSolution,
    pub dual: DualSolution,
    /// `|primal - dual|` per atom.
    pub gap: ConditionalValue,
    /// `|optimal_a - lambda|` per atom.
    pub multiplier_link: Vec<f64>,
}

impl GapReport {
    pub fn max_gap(&self) -> f64 {
        self.gap.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_link(&self) -> f64 {
        self.multiplier_link.iter().copied().fold(0.0, f64::max)
    }
}

pub fn duality_gap(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    tol: f64,
) -> Result<GapReport> {
    let opts = SolverOptions::with_tol(tol)?;
    let primal = oce_primal_with(space, g, gen, x, &opts)?;
    let dual = oce_dual_with(space, g, gen, x, &opts)?;
    let gap = primal.value.zip_with(&dual.value, |p, d| (p - d).abs());
    let multiplier_link = primal
        .optimal_a
        .iter()
        .zip(dual.multiplier.iter())
        .map(|(a, l)| (a - l).abs())
        .collect();
    Ok(GapReport {
        primal,
        dual,
        gap,
        multiplier_link,
    })
}

/// Largest atom size accepted by [`dual_bruteforce`].
pub const BRUTEFORCE_MAX_ATOM: usize = 3;

/// Grid search over the conditional simplex of each atom: the conditional
/// law `q` of `nu` on an atom runs over `{k / grid_n}` barycentric points and
/// the objective is `sum_s q_s x_s + w_s phi(q_s / w_s)`. Test oracle only.
pub fn dual_bruteforce(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    gen: &DivergenceGenerator,
    x: &RandomVariable,
    grid_n: usize,
) -> Result<ConditionalValue> {
    if grid_n < 100 {
        return Err(CondRiskError::InvalidParameter(format!(
            "grid_n must be at least 100, got {grid_n}"
        )));
    }
    let atoms = atom_slices(space, g, x, "dual_bruteforce")?;
    let n = grid_n as f64;
    let mut out = Vec::with_capacity(atoms.len());
    for atom in &atoms {
        let k = atom.xs.len();
        if k > BRUTEFORCE_MAX_ATOM {
            return Err(CondRiskError::TooLarge(format!(
                "atom with {k} states (at most {BRUTEFORCE_MAX_ATOM})"
            )));
        }
        let eval = |q: &[f64]| -> f64 {
            q.iter()
                .zip(&atom.weights)
                .zip(&atom.xs)
                .map(|((&q, &w), &x)| q * x + w * gen.phi(q / w))
                .sum()
        };
        let mut best = f64::INFINITY;
        match k {
            1 => best = atom.xs[0],
            2 => {
                for i in 0..=grid_n {
                    let q0 = i as f64 / n;
                    best = best.min(eval(&[q0, 1.0 - q0]));
                }
            }
            _ => {
                for i in 0..=grid_n {
                    for j in 0..=(grid_n - i) {
                        let q0 = i as f64 / n;
                        let q1 = j as f64 / n;
                        best = best.min(eval(&[q0, q1, (1.0 - q0 - q1).max(0.0)]));
                    }
                }
            }
        }
        out.push(best);
    }
    Ok(ConditionalValue::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::EquivalentConditionalMeasure;

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
    fn constant_payoff_gives_base_measure() {
        let space = FiniteProbabilitySpace::from_probs(vec![0.2, 0.3, 0.5]).unwrap();
        let g = Partition::new(vec![vec![0, 1], vec![2]], 3).unwrap();
        for gen in gens() {
            let sol = oce_dual(&space, &g, &gen, &RandomVariable::constant(3, -0.75), 1e-10).unwrap();
            assert_eq!(sol.value.values(), &[-0.75, -0.75]);
            assert_eq!(sol.optimal_density.values(), &[1.0, 1.0, 1.0]);
            assert_eq!(sol.multiplier.values(), &[-0.75, -0.75]);
            let gap = duality_gap(&space, &g, &gen, &RandomVariable::constant(3, -0.75), 1e-10).unwrap();
            assert!(gap.max_gap() <= 1e-12);
        }
    }

    #[test]
    fn kl_two_state_gibbs_density() {
        let space = FiniteProbabilitySpace::uniform(2).unwrap();
        let g = Partition::trivial(2);
        let x = rv(&[0.0, 4f64.ln()]);
        let sol = oce_dual(&space, &g, &DivergenceGenerator::kl(), &x, 1e-10).unwrap();
        assert!((sol.value[0] - (8.0f64 / 5.0).ln()).abs() < 1e-12);
        let y = sol.optimal_density.values();
        assert!((y[0] - 1.6).abs() < 1e-9 && (y[1] - 0.4).abs() < 1e-9);
        let bf = dual_bruteforce(&space, &g, &DivergenceGenerator::kl(), &x, 1000).unwrap();
        assert!(bf[0] >= sol.value[0] - 1e-12);
        assert!(bf[0] - sol.value[0] < 1e-5);
    }

    #[test]
    fn value_between_primal_and_expectation() {
        let space = FiniteProbabilitySpace::from_probs(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = Partition::new(vec![vec![0, 3], vec![1, 2]], 4).unwrap();
        let x = rv(&[2.0, -4.0, 1.5, -0.5]);
        let tol = 1e-10;
        let e = cond_expectation(&space, &g, &x).unwrap();
        for gen in gens() {
            let rep = duality_gap(&space, &g, &gen, &x, tol).unwrap();
            for a in 0..2 {
                assert!(rep.dual.value[a] >= rep.primal.value[a] - 2.0 * tol);
                assert!(rep.dual.value[a] <= e[a] + 1e-12);
            }
            assert!(rep.max_gap() < 1e-9, "{}: {}", gen.name(), rep.max_gap());
            assert!(rep.max_link() <= 10.0 * tol);
        }
    }

    #[test]
    fn chi2_zeroes_out_states() {
        let space = FiniteProbabilitySpace::uniform(3).unwrap();
        let g = Partition::trivial(3);
        let x = rv(&[0.0, 0.1, 20.0]);
        let sol = oce_dual(&space, &g, &DivergenceGenerator::chi2(), &x, 1e-12).unwrap();
        assert_eq!(sol.optimal_density.values()[2], 0.0);
        let bf = dual_bruteforce(&space, &g, &DivergenceGenerator::chi2(), &x, 600).unwrap();
        assert!(bf[0] >= sol.value[0] - 1e-12 && bf[0] - sol.value[0] < 1e-3);
    }

    #[test]
    fn base_measure_has_zero_penalty() {
        let space = FiniteProbabilitySpace::uniform(3).unwrap();
        let g = Partition::trivial(3);
        for gen in gens() {
            let d = crate::divergence::cond_divergence(&space, &g, &gen, &EquivalentConditionalMeasure::base(&space))
                .unwrap();
            assert_eq!(d.values(), &[0.0]);
        }
    }

    #[test]
    fn bruteforce_guards() {
        let space = FiniteProbabilitySpace::uniform(4).unwrap();
        let g = Partition::trivial(4);
        let x = rv(&[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            dual_bruteforce(&space, &g, &DivergenceGenerator::kl(), &x, 100),
            Err(CondRiskError::TooLarge(_))
        ));
        let g2 = Partition::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        assert!(dual_bruteforce(&space, &g2, &DivergenceGenerator::kl(), &x, 99).is_err());
        let bf = dual_bruteforce(
            &space,
            &g2,
            &DivergenceGenerator::kl(),
            &RandomVariable::constant(4, 3.0),
            100,
        )
        .unwrap();
        assert!(bf.iter().all(|&v| (v - 3.0).abs() < 1e-15));
    }
}
