//! Browser demo for `condrisk`.
//!
//! Three operations are exported to JavaScript, each returning a JSON
//! document:
//!
//! * [`conjugate`]: `phi`, the closed-form `phi*` and the numerically
//!   computed conjugate of a generator;
//! * [`two_state`]: primal OCE, dual OCE, optimal density and the primal
//!   objective for a single two-state atom;
//! * [`sweep`]: the OCE of the payoff `(0, t)` as `t` varies, for several
//!   generators at once.
//!
//! The plain Rust functions behind them are public so they can be tested
//! natively.

use condrisk::{
    cond_divergence, density_to_measure, duality_gap, entropic_risk, numeric_conjugate, oce_primal,
    DivergenceGenerator, FiniteProbabilitySpace, Partition, RandomVariable,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-10;
pub const MAX_POINTS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateCurve {
    pub generator: String,
    pub t: Vec<f64>,
    pub phi: Vec<f64>,
    pub m: Vec<f64>,
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoState {
    pub generator: String,
    pub p: f64,
    pub x: [f64; 2],
    pub expectation: f64,
    pub entropic: f64,
    pub oce: f64,
    pub optimal_a: f64,
    pub dual: f64,
    pub multiplier: f64,
    pub gap: f64,
    pub density: [f64; 2],
    /// Divergence of the optimal measure from the base measure.
    pub divergence: f64,
    /// Primal objective `a - E[phi*(a - x)]` on a grid of `a`.
    pub a: Vec<f64>,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub generator: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub p: f64,
    pub t: Vec<f64>,
    pub expectation: Vec<f64>,
    pub minimum: Vec<f64>,
    pub series: Vec<Series>,
}

fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

fn check_range(lo: f64, hi: f64, points: usize) -> Result<(), String> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("invalid range [{lo}, {hi}]"));
    }
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(format!("points must be between 2 and {MAX_POINTS}"));
    }
    Ok(())
}

fn generator(name: &str) -> Result<DivergenceGenerator, String> {
    DivergenceGenerator::from_name(name).map_err(|e| e.to_string())
}

fn two_state_space(p: f64) -> Result<(FiniteProbabilitySpace, Partition), String> {
    if !(p > 0.0 && p < 1.0) {
        return Err(format!("p must lie strictly between 0 and 1, got {p}"));
    }
    let space = FiniteProbabilitySpace::new(vec!["up", "down"], vec![p, 1.0 - p]).map_err(|e| e.to_string())?;
    Ok((space, Partition::trivial(2)))
}

pub fn conjugate_curve(name: &str, m_lo: f64, m_hi: f64, points: usize) -> Result<ConjugateCurve, String> {
    check_range(m_lo, m_hi, points)?;
    let gen = generator(name)?;
    let t = linspace(0.0, 4.0, points);
    let phi = t.iter().map(|&t| gen.phi(t)).collect();
    let m = linspace(m_lo, m_hi, points);
    let analytic: Vec<f64> = m.iter().map(|&m| gen.phi_star(m)).collect();
    let numeric = m
        .iter()
        .map(|&m| numeric_conjugate(&gen, m).map_err(|e| e.to_string()))
        .collect::<Result<Vec<f64>, String>>()?;
    let max_error = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ConjugateCurve {
        generator: gen.name().to_string(),
        t,
        phi,
        m,
        analytic,
        numeric,
        max_error,
    })
}

pub fn two_state_report(name: &str, p: f64, x1: f64, x2: f64) -> Result<TwoState, String> {
    let gen = generator(name)?;
    let (space, g) = two_state_space(p)?;
    let x = RandomVariable::new(vec![x1, x2]).map_err(|e| e.to_string())?;
    let report = duality_gap(&space, &g, &gen, &x, TOL).map_err(|e| e.to_string())?;
    let entropic = entropic_risk(&space, &g, &x).map_err(|e| e.to_string())?;
    let nu = density_to_measure(&space, &g, &report.dual.optimal_density).map_err(|e| e.to_string())?;
    let divergence = cond_divergence(&space, &g, &gen, &nu).map_err(|e| e.to_string())?;
    let (lo, hi) = (x1.min(x2) - 1.0, x1.max(x2) + 1.0);
    let a = linspace(lo, hi, 201);
    let objective = a
        .iter()
        .map(|&a| a - p * gen.phi_star(a - x1) - (1.0 - p) * gen.phi_star(a - x2))
        .collect();
    let y = report.dual.optimal_density.values();
    Ok(TwoState {
        generator: gen.name().to_string(),
        p,
        x: [x1, x2],
        expectation: p * x1 + (1.0 - p) * x2,
        entropic: entropic[0],
        oce: report.primal.value[0],
        optimal_a: report.primal.optimal_a[0],
        dual: report.dual.value[0],
        multiplier: report.dual.multiplier[0],
        gap: report.gap[0],
        density: [y[0], y[1]],
        divergence: divergence[0],
        a,
        objective,
    })
}

/// OCE of the payoff `(0, t)` for each generator in `names`.
pub fn oce_sweep(names: &[&str], p: f64, t_lo: f64, t_hi: f64, points: usize) -> Result<Sweep, String> {
    check_range(t_lo, t_hi, points)?;
    let (space, g) = two_state_space(p)?;
    let gens = names.iter().map(|n| generator(n)).collect::<Result<Vec<_>, _>>()?;
    let t = linspace(t_lo, t_hi, points);
    let mut series: Vec<Series> = gens
        .iter()
        .map(|gen| Series {
            generator: gen.name().to_string(),
            values: Vec::with_capacity(points),
        })
        .collect();
    for &ti in &t {
        let x = RandomVariable::new(vec![0.0, ti]).map_err(|e| e.to_string())?;
        for (gen, s) in gens.iter().zip(series.iter_mut()) {
            let v = oce_primal(&space, &g, gen, &x, TOL).map_err(|e| e.to_string())?;
            s.values.push(v.value[0]);
        }
    }
    Ok(Sweep {
        p,
        expectation: t.iter().map(|&ti| (1.0 - p) * ti).collect(),
        minimum: t.iter().map(|&ti| ti.min(0.0)).collect(),
        t,
        series,
    })
}

fn to_js<T: Serialize>(value: Result<T, String>) -> Result<String, JsValue> {
    let value = value.map_err(|e| JsValue::from_str(&e))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

/// JSON-encoded [`ConjugateCurve`].
#[wasm_bindgen]
pub fn conjugate(generator: &str, m_lo: f64, m_hi: f64, points: usize) -> Result<String, JsValue> {
    to_js(conjugate_curve(generator, m_lo, m_hi, points))
}

/// JSON-encoded [`TwoState`].
#[wasm_bindgen]
pub fn two_state(generator: &str, p: f64, x1: f64, x2: f64) -> Result<String, JsValue> {
    to_js(two_state_report(generator, p, x1, x2))
}

/// JSON-encoded [`Sweep`]; `generators` is a comma-separated list.
#[wasm_bindgen]
pub fn sweep(generators: &str, p: f64, t_lo: f64, t_hi: f64, points: usize) -> Result<String, JsValue> {
    let names: Vec<&str> = generators.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(JsValue::from_str("no generators given"));
    }
    to_js(oce_sweep(&names, p, t_lo, t_hi, points))
}
