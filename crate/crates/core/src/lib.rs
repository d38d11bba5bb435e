//! # condrisk
//!
//! Conditional risk measures on finite probability spaces.
//!
//! A finite space with strictly positive state probabilities carries a
//! sub-sigma-algebra G given as a partition into atoms. On top of that the
//! crate provides:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`probspace`] | spaces, partitions, conditional expectation and norms |
//! | [`lattice`] | coordinatewise sup/inf of G-measurable families |
//! | [`divergence`] | generators `phi`, conjugates `phi*`, conditional divergences, Donsker-Varadhan |
//! | [`oce`] | primal conditional OCE, `I_phi`, entropic risk |
//! | [`dual`] | divergence-penalized dual OCE, duality gap, grid oracle |
//! | [`niveloid`] | niveloidification, penalty functions, axiom checker |
//!
//! ```
//! use condrisk::{DivergenceGenerator, FiniteProbabilitySpace, Partition, RandomVariable};
//! use condrisk::{duality_gap, entropic_risk};
//!
//! let space = FiniteProbabilitySpace::uniform(2).unwrap();
//! let g = Partition::trivial(2);
//! let x = RandomVariable::new(vec![0.0, 4f64.ln()]).unwrap();
//!
//! let report = duality_gap(&space, &g, &DivergenceGenerator::kl(), &x, 1e-10).unwrap();
//! let closed = entropic_risk(&space, &g, &x).unwrap();
//! assert!((report.primal.value[0] - closed[0]).abs() < 1e-10);
//! assert!(report.max_gap() < 1e-10);
//! ```

pub mod divergence;
pub mod dual;
pub mod error;
pub mod lattice;
pub mod niveloid;
pub mod oce;
pub mod probspace;
pub mod scalar;

pub use divergence::{
    builtin_generator, cond_divergence, cond_expectation_under, density_to_measure, donsker_varadhan_maximizer,
    donsker_varadhan_value, measure_to_density, numeric_conjugate, ConditionalDensity, DivergenceGenerator,
    EquivalentConditionalMeasure,
};
pub use dual::{dual_bruteforce, duality_gap, oce_dual, oce_dual_with, DualSolution, GapReport};
pub use error::{CondRiskError, Result};
pub use niveloid::{
    check_niveloid_axioms, niveloidify, niveloidify_bruteforce, penalty, AxiomCheckConfig, AxiomReport,
    ConditionalOperator, OperatorFlags,
};
pub use oce::{entropic_risk, i_phi, oce_primal, oce_primal_with, OceSolution, SolverOptions};
pub use probspace::{
    cond_expectation, cond_p_norm, cond_sup_norm, embed, restrict_mask, ConditionalValue, FiniteProbabilitySpace,
    Partition, RandomVariable,
};
