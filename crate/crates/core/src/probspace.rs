//! Finite probability spaces, partitions and conditional expectation.
//!
//! The state set is finite and every state carries strictly positive mass, so
//! every subset is measurable and every identity below holds exactly (up to
//! floating rounding) rather than almost surely. A sub-sigma-algebra is given
//! by a [`Partition`] of the states into atoms; G-measurable quantities are
//! stored per atom as [`ConditionalValue`]s and payoffs per state as
//! [`RandomVariable`]s.

use std::collections::HashSet;
use std::ops::{Add, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{CondRiskError, Result};

/// Tolerance on the raw probability total accepted at construction.
pub const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteProbabilitySpace {
    names: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteProbabilitySpace {
    /// Builds a space from named states. Probabilities must be strictly
    /// positive and sum to one within [`PROB_SUM_TOL`]; they are renormalized
    /// once here so downstream arithmetic sees an exact-as-possible measure.
    pub fn new<S: Into<String>>(names: Vec<S>, probs: Vec<f64>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if probs.is_empty() {
            return Err(CondRiskError::InvalidSpace("no states".into()));
        }
        if names.len() != probs.len() {
            return Err(CondRiskError::DimensionMismatch {
                context: "state names vs probabilities",
                expected: probs.len(),
                actual: names.len(),
            });
        }
        let mut seen = HashSet::with_capacity(names.len());
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(CondRiskError::InvalidSpace(format!("duplicate state name {name:?}")));
            }
        }
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(CondRiskError::NonFinite {
                    context: "probabilities",
                    index: i,
                });
            }
            if p <= 0.0 {
                return Err(CondRiskError::InvalidSpace(format!(
                    "state {:?} has non-positive probability {p}",
                    names[i]
                )));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(CondRiskError::InvalidSpace(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { names, probs })
    }

    /// Builds a space with states `s1..sn` and the given weights.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let names = (1..=probs.len()).map(|i| format!("s{i}")).collect();
        Self::new(names, probs)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Expectation of `x` under the base measure.
    pub fn expectation(&self, x: &RandomVariable) -> Result<f64> {
        self.check_rv(x, "expectation")?;
        Ok(self.probs.iter().zip(x.values()).map(|(p, v)| p * v).sum())
    }

    pub(crate) fn check_rv(&self, x: &RandomVariable, context: &'static str) -> Result<()> {
        if x.len() != self.len() {
            return Err(CondRiskError::DimensionMismatch {
                context,
                expected: self.len(),
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// A partition of the state indices into nonempty, disjoint atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    atoms: Vec<Vec<usize>>,
    atom_of: Vec<usize>,
}

impl Partition {
    pub fn new(atoms: Vec<Vec<usize>>, n_states: usize) -> Result<Self> {
        if atoms.is_empty() {
            return Err(CondRiskError::InvalidPartition("no atoms".into()));
        }
        let mut atom_of = vec![usize::MAX; n_states];
        for (a, atom) in atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(CondRiskError::InvalidPartition(format!("atom {a} is empty")));
            }
            for &s in atom {
                if s >= n_states {
                    return Err(CondRiskError::InvalidPartition(format!(
                        "atom {a} references state {s} but there are only {n_states} states"
                    )));
                }
                if atom_of[s] != usize::MAX {
                    return Err(CondRiskError::InvalidPartition(format!(
                        "state {s} appears in atoms {} and {a}",
                        atom_of[s]
                    )));
                }
                atom_of[s] = a;
            }
        }
        if let Some(s) = atom_of.iter().position(|&a| a == usize::MAX) {
            return Err(CondRiskError::InvalidPartition(format!(
                "state {s} is not covered by any atom"
            )));
        }
        Ok(Self { atoms, atom_of })
    }

    /// The trivial sigma-algebra: a single atom holding every state.
    pub fn trivial(n_states: usize) -> Self {
        Self {
            atoms: vec![(0..n_states).collect()],
            atom_of: vec![0; n_states],
        }
    }

    /// The discrete sigma-algebra: one atom per state.
    pub fn discrete(n_states: usize) -> Self {
        Self {
            atoms: (0..n_states).map(|s| vec![s]).collect(),
            atom_of: (0..n_states).collect(),
        }
    }

    /// Number of atoms.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn n_states(&self) -> usize {
        self.atom_of.len()
    }

    pub fn atoms(&self) -> &[Vec<usize>] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &[usize] {
        &self.atoms[index]
    }

    pub fn atom_of(&self, state: usize) -> usize {
        self.atom_of[state]
    }

    /// Base-measure mass of every atom.
    pub fn masses(&self, space: &FiniteProbabilitySpace) -> Vec<f64> {
        let p = space.probs();
        self.atoms.iter().map(|atom| atom.iter().map(|&s| p[s]).sum()).collect()
    }

    /// Conditional weights `probs[s] / mu(A)` for the states of atom `index`.
    pub fn conditional_weights(&self, space: &FiniteProbabilitySpace, index: usize) -> Vec<f64> {
        let p = space.probs();
        let atom = &self.atoms[index];
        let mass: f64 = atom.iter().map(|&s| p[s]).sum();
        atom.iter().map(|&s| p[s] / mass).collect()
    }

    pub(crate) fn check(&self, space: &FiniteProbabilitySpace) -> Result<()> {
        if self.n_states() != space.len() {
            return Err(CondRiskError::DimensionMismatch {
                context: "partition vs probability space",
                expected: space.len(),
                actual: self.n_states(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_cv(&self, a: &ConditionalValue, context: &'static str) -> Result<()> {
        if a.len() != self.len() {
            return Err(CondRiskError::DimensionMismatch {
                context,
                expected: self.len(),
                actual: a.len(),
            });
        }
        Ok(())
    }
}

macro_rules! real_vector {
    ($(#[$meta:meta])* $name:ident, $context:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<f64>);

        impl $name {
            /// Rejects NaN and infinite entries.
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if let Some(index) = values.iter().position(|v| !v.is_finite()) {
                    return Err(CondRiskError::NonFinite { context: $context, index });
                }
                Ok(Self(values))
            }

            pub fn constant(len: usize, c: f64) -> Self {
                Self(vec![c; len])
            }

            pub fn zeros(len: usize) -> Self {
                Self(vec![0.0; len])
            }

            pub fn values(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn iter(&self) -> std::slice::Iter<'_, f64> {
                self.0.iter()
            }

            pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
                Self(self.0.iter().map(|&v| f(v)).collect())
            }

            /// Componentwise combination. Panics on length mismatch.
            pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
                assert_eq!(self.len(), other.len(), "length mismatch");
                Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
            }

            /// `self >= other` in every coordinate.
            pub fn dominates(&self, other: &Self) -> bool {
                self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                self.zip_with(other, |a, b| (a - b).abs())
                    .0
                    .into_iter()
                    .fold(0.0, f64::max)
            }

            #[allow(dead_code)]
            pub(crate) fn from_raw(values: Vec<f64>) -> Self {
                Self(values)
            }
        }

        impl Index<usize> for $name {
            type Output = f64;
            fn index(&self, i: usize) -> &f64 {
                &self.0[i]
            }
        }

        impl From<$name> for Vec<f64> {
            fn from(v: $name) -> Vec<f64> {
                v.0
            }
        }

        impl Add for &$name {
            type Output = $name;
            fn add(self, rhs: &$name) -> $name {
                self.zip_with(rhs, |a, b| a + b)
            }
        }

        impl Sub for &$name {
            type Output = $name;
            fn sub(self, rhs: &$name) -> $name {
                self.zip_with(rhs, |a, b| a - b)
            }
        }

        impl Neg for &$name {
            type Output = $name;
            fn neg(self) -> $name {
                self.map(|v| -v)
            }
        }

        impl Mul<f64> for &$name {
            type Output = $name;
            fn mul(self, rhs: f64) -> $name {
                self.map(|v| v * rhs)
            }
        }
    };
}

real_vector!(
    /// A payoff: one real value per state.
    RandomVariable,
    "random variable"
);

real_vector!(
    /// A G-measurable quantity stored once per atom.
    ///
    /// Solver outputs may carry `+inf` on atoms where a supremum diverges;
    /// user-constructed values are always finite.
    ConditionalValue,
    "conditional value"
);

/// `E_mu[x | G]` evaluated atom by atom.
pub fn cond_expectation(space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
    g.check(space)?;
    space.check_rv(x, "cond_expectation")?;
    let p = space.probs();
    let out = g
        .atoms()
        .iter()
        .map(|atom| {
            let (num, den) = atom.iter().fold((0.0, 0.0), |(n, d), &s| (n + p[s] * x[s], d + p[s]));
            num / den
        })
        .collect();
    Ok(ConditionalValue(out))
}

/// Conditional essential supremum norm: largest `|x|` on each atom.
pub fn cond_sup_norm(space: &FiniteProbabilitySpace, g: &Partition, x: &RandomVariable) -> Result<ConditionalValue> {
    g.check(space)?;
    space.check_rv(x, "cond_sup_norm")?;
    let out = g
        .atoms()
        .iter()
        .map(|atom| atom.iter().map(|&s| x[s].abs()).fold(0.0, f64::max))
        .collect();
    Ok(ConditionalValue(out))
}

/// Conditional `p`-norm `E_mu[|x|^p | G]^(1/p)`, `p >= 1`.
pub fn cond_p_norm(
    space: &FiniteProbabilitySpace,
    g: &Partition,
    x: &RandomVariable,
    p: f64,
) -> Result<ConditionalValue> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(CondRiskError::InvalidParameter(format!(
            "conditional p-norm needs finite p >= 1, got {p}"
        )));
    }
    let abs_p = x.map(|v| v.abs().powf(p));
    let m = cond_expectation(space, g, &abs_p)?;
    Ok(m.map(|v| v.powf(1.0 / p)))
}

/// Lifts a per-atom value to a state-indexed vector.
pub fn embed(g: &Partition, a: &ConditionalValue) -> Result<RandomVariable> {
    g.check_cv(a, "embed")?;
    Ok(RandomVariable((0..g.n_states()).map(|s| a[g.atom_of(s)]).collect()))
}

/// `1_A x + 1_{A^c} y` for the atom `A` with index `atom_index`.
pub fn restrict_mask(
    g: &Partition,
    atom_index: usize,
    x: &RandomVariable,
    y: &RandomVariable,
) -> Result<RandomVariable> {
    if atom_index >= g.len() {
        return Err(CondRiskError::InvalidAtom {
            index: atom_index,
            atoms: g.len(),
        });
    }
    for v in [x, y] {
        if v.len() != g.n_states() {
            return Err(CondRiskError::DimensionMismatch {
                context: "restrict_mask",
                expected: g.n_states(),
                actual: v.len(),
            });
        }
    }
    Ok(RandomVariable(
        (0..g.n_states())
            .map(|s| if g.atom_of(s) == atom_index { x[s] } else { y[s] })
            .collect(),
    ))
}
