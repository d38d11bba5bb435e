//! Order operations on finite families of G-measurable values.
//!
//! `L^0(G)` is a Riesz space under the coordinatewise (per atom) order, so
//! the supremum of a finite family is its coordinatewise maximum.

use crate::error::{CondRiskError, Result};
use crate::probspace::ConditionalValue;

fn check_family(family: &[ConditionalValue]) -> Result<usize> {
    let first = family
        .first()
        .ok_or_else(|| CondRiskError::InvalidParameter("empty family".into()))?;
    let n = first.len();
    if let Some(bad) = family.iter().find(|v| v.len() != n) {
        return Err(CondRiskError::DimensionMismatch {
            context: "lattice family",
            expected: n,
            actual: bad.len(),
        });
    }
    Ok(n)
}

fn fold(family: &[ConditionalValue], init: f64, pick: fn(f64, f64) -> f64) -> Result<ConditionalValue> {
    let n = check_family(family)?;
    let mut out = vec![init; n];
    for v in family {
        for (o, &x) in out.iter_mut().zip(v.iter()) {
            *o = pick(*o, x);
        }
    }
    Ok(ConditionalValue::from_raw(out))
}

/// Coordinatewise supremum of a nonempty family.
pub fn sup(family: &[ConditionalValue]) -> Result<ConditionalValue> {
    fold(family, f64::NEG_INFINITY, f64::max)
}

/// Coordinatewise infimum of a nonempty family.
pub fn inf(family: &[ConditionalValue]) -> Result<ConditionalValue> {
    fold(family, f64::INFINITY, f64::min)
}

/// The translated family `{x + y : y in family}`.
pub fn translate(x: &ConditionalValue, family: &[ConditionalValue]) -> Vec<ConditionalValue> {
    family.iter().map(|y| x + y).collect()
}

/// The scaled family `{a y : y in family}` with `a` G-measurable.
pub fn scale(a: &ConditionalValue, family: &[ConditionalValue]) -> Vec<ConditionalValue> {
    family.iter().map(|y| a.zip_with(y, |s, v| s * v)).collect()
}

/// `{f_i + g_j}` over the product index set.
pub fn sum_product(f: &[ConditionalValue], g: &[ConditionalValue]) -> Vec<ConditionalValue> {
    f.iter().flat_map(|fi| g.iter().map(move |gj| fi + gj)).collect()
}

/// `sup_a inf_b table[a][b]`.
pub fn sup_inf(table: &[Vec<ConditionalValue>]) -> Result<ConditionalValue> {
    let rows = table.iter().map(|row| inf(row)).collect::<Result<Vec<_>>>()?;
    sup(&rows)
}

/// `inf_b sup_a table[a][b]`.
pub fn inf_sup(table: &[Vec<ConditionalValue>]) -> Result<ConditionalValue> {
    let width = table
        .first()
        .map(Vec::len)
        .ok_or_else(|| CondRiskError::InvalidParameter("empty table".into()))?;
    let cols = (0..width)
        .map(|b| {
            let col: Vec<_> = table.iter().map(|row| row[b].clone()).collect();
            sup(&col)
        })
        .collect::<Result<Vec<_>>>()?;
    inf(&cols)
}
