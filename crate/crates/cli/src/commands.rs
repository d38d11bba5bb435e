use std::collections::BTreeMap;

use condrisk::niveloid::{
    niveloidify_with, AtomMin, CondExpectation, Entropic, IPhi, NiveloidOptions, Oce, OperatorFlags,
};
use condrisk::{
    check_niveloid_axioms, cond_divergence, entropic_risk, oce_dual_with, oce_primal_with, AxiomCheckConfig,
    ConditionalOperator, ConditionalValue, DivergenceGenerator, FiniteProbabilitySpace, Partition, RandomVariable,
    SolverOptions,
};

use crate::report::{AxiomRow, Format, Report, ReportRow, Row};
use crate::scenario::Scenario;
use crate::{CheckArgs, CliError, Command, Common, DivergenceArgs, EntropicArgs, Output, SolverArgs, Status};

/// Tolerance for axioms of closed-form operators, where only rounding error
/// is expected.
const CLOSED_FORM_TOL: f64 = 1e-9;

pub fn run(command: &Command) -> Result<Output, CliError> {
    let common = command.common();
    if common.echo_input && common.format != Format::Json {
        return Err(CliError::Usage("--echo-input requires --format json".into()));
    }
    let scenario = Scenario::load(&common.file)?;
    match command {
        Command::Oce(args) => oce(&scenario, args),
        Command::Dual(args) => dual(&scenario, args),
        Command::Gap(args) => gap(&scenario, args),
        Command::Entropic(args) => entropic(&scenario, args),
        Command::Divergence(args) => divergence(&scenario, args),
        Command::Check(args) => check(&scenario, args),
    }
}

fn generator(name: &str) -> Result<DivergenceGenerator, CliError> {
    DivergenceGenerator::from_name(name).map_err(|e| CliError::Usage(e.to_string()))
}

fn finish<R: Row>(
    scenario: &Scenario,
    common: &Common,
    command: &str,
    mut parameters: BTreeMap<String, String>,
    rows: Vec<R>,
    status: Status,
) -> Result<Output, CliError> {
    parameters.insert("tol".into(), format!("{:e}", common.tol));
    let mut report = Report::new(command, parameters, rows);
    if common.echo_input {
        report.input = Some(scenario.file.clone());
    }
    Ok(Output {
        text: report.render(common.format)?,
        status,
    })
}

fn solver_parameters(args: &SolverArgs, gen: &DivergenceGenerator) -> BTreeMap<String, String> {
    let mut p = BTreeMap::new();
    p.insert("divergence".into(), gen.name().to_string());
    if let Some(pos) = &args.position {
        p.insert("position".into(), pos.clone());
    }
    p
}

fn oce(scenario: &Scenario, args: &SolverArgs) -> Result<Output, CliError> {
    let gen = generator(&args.divergence)?;
    let opts = SolverOptions::with_tol(args.common.tol)?;
    let mut rows = Vec::new();
    let mut status = Status::Ok;
    for (label, x) in scenario.selected(args.position.as_deref())? {
        let sol = oce_primal_with(&scenario.space, &scenario.partition, &gen, x, &opts)?;
        for (a, atom) in scenario.atom_labels.iter().enumerate() {
            if sol.residuals[a] > args.common.tol {
                status = Status::Residual;
            }
            rows.push(ReportRow {
                residual: Some(sol.residuals[a]),
                iterations: Some(sol.iterations[a]),
                argmax: Some(sol.optimal_a[a]),
                ..ReportRow::closed_form(label, atom, "oce", sol.value[a])
            });
        }
    }
    finish(
        scenario,
        &args.common,
        "oce",
        solver_parameters(args, &gen),
        rows,
        status,
    )
}

fn dual(scenario: &Scenario, args: &SolverArgs) -> Result<Output, CliError> {
    let gen = generator(&args.divergence)?;
    let opts = SolverOptions::with_tol(args.common.tol)?;
    let mut rows = Vec::new();
    let mut status = Status::Ok;
    for (label, x) in scenario.selected(args.position.as_deref())? {
        let sol = oce_dual_with(&scenario.space, &scenario.partition, &gen, x, &opts)?;
        for (a, atom) in scenario.atom_labels.iter().enumerate() {
            if sol.residuals[a] > args.common.tol {
                status = Status::Residual;
            }
            rows.push(ReportRow {
                residual: Some(sol.residuals[a]),
                iterations: Some(sol.iterations[a]),
                multiplier: Some(sol.multiplier[a]),
                ..ReportRow::closed_form(label, atom, "dual", sol.value[a])
            });
        }
        for (s, name) in scenario.space.names().iter().enumerate() {
            let atom = &scenario.atom_labels[scenario.partition.atom_of(s)];
            rows.push(ReportRow::closed_form(
                label,
                atom,
                &format!("density[{name}]"),
                sol.optimal_density.values()[s],
            ));
        }
    }
    finish(
        scenario,
        &args.common,
        "dual",
        solver_parameters(args, &gen),
        rows,
        status,
    )
}

fn gap(scenario: &Scenario, args: &SolverArgs) -> Result<Output, CliError> {
    let gen = generator(&args.divergence)?;
    let tol = args.common.tol;
    let opts = SolverOptions::with_tol(tol)?;
    let mut rows = Vec::new();
    let (mut residual_exceeded, mut gap_exceeded) = (false, false);
    for (label, x) in scenario.selected(args.position.as_deref())? {
        let primal = oce_primal_with(&scenario.space, &scenario.partition, &gen, x, &opts)?;
        let dual = oce_dual_with(&scenario.space, &scenario.partition, &gen, x, &opts)?;
        for (a, atom) in scenario.atom_labels.iter().enumerate() {
            let gap = (primal.value[a] - dual.value[a]).abs();
            let residual = primal.residuals[a].max(dual.residuals[a]);
            residual_exceeded |= residual > tol;
            gap_exceeded |= gap > tol;
            rows.push(ReportRow {
                residual: Some(primal.residuals[a]),
                iterations: Some(primal.iterations[a]),
                argmax: Some(primal.optimal_a[a]),
                ..ReportRow::closed_form(label, atom, "primal", primal.value[a])
            });
            rows.push(ReportRow {
                residual: Some(dual.residuals[a]),
                iterations: Some(dual.iterations[a]),
                multiplier: Some(dual.multiplier[a]),
                ..ReportRow::closed_form(label, atom, "dual", dual.value[a])
            });
            rows.push(ReportRow {
                residual: Some(residual),
                argmax: Some(primal.optimal_a[a]),
                multiplier: Some(dual.multiplier[a]),
                ..ReportRow::closed_form(label, atom, "gap", gap)
            });
        }
    }
    let status = if gap_exceeded {
        Status::Gap
    } else if residual_exceeded {
        Status::Residual
    } else {
        Status::Ok
    };
    finish(
        scenario,
        &args.common,
        "gap",
        solver_parameters(args, &gen),
        rows,
        status,
    )
}

fn entropic(scenario: &Scenario, args: &EntropicArgs) -> Result<Output, CliError> {
    let mut rows = Vec::new();
    for (label, x) in scenario.selected(args.position.as_deref())? {
        let value = entropic_risk(&scenario.space, &scenario.partition, x)?;
        for (a, atom) in scenario.atom_labels.iter().enumerate() {
            rows.push(ReportRow::closed_form(label, atom, "entropic", value[a]));
        }
    }
    let mut p = BTreeMap::new();
    if let Some(pos) = &args.position {
        p.insert("position".into(), pos.clone());
    }
    finish(scenario, &args.common, "entropic", p, rows, Status::Ok)
}

fn divergence(scenario: &Scenario, args: &DivergenceArgs) -> Result<Output, CliError> {
    let gen = generator(&args.divergence)?;
    let nu = scenario.measure(&args.measure)?;
    let d = cond_divergence(&scenario.space, &scenario.partition, &gen, &nu)?;
    let rows = scenario
        .atom_labels
        .iter()
        .enumerate()
        .map(|(a, atom)| ReportRow::closed_form(&args.measure, atom, "divergence", d[a]))
        .collect();
    let mut p = BTreeMap::new();
    p.insert("divergence".into(), gen.name().to_string());
    p.insert("measure".into(), args.measure.clone());
    finish(scenario, &args.common, "divergence", p, rows, Status::Ok)
}

/// `x -> sup_{a + y <= x} { a + op(y) }` for an owned inner operator.
struct Niveloidified {
    name: String,
    inner: Box<dyn ConditionalOperator>,
    opts: NiveloidOptions,
}

impl ConditionalOperator for Niveloidified {
    fn name(&self) -> &str {
        &self.name
    }
    fn flags(&self) -> OperatorFlags {
        OperatorFlags::CONCAVE_MONOTONE
    }
    fn evaluate(
        &self,
        space: &FiniteProbabilitySpace,
        g: &Partition,
        x: &RandomVariable,
    ) -> condrisk::Result<ConditionalValue> {
        niveloidify_with(space, g, self.inner.as_ref(), x, &self.opts)
    }
}

/// Parses an operator name; the flag says whether it involves a solver.
fn operator(name: &str, tol: f64) -> Result<(Box<dyn ConditionalOperator>, bool), CliError> {
    let name = name.trim();
    if let Some(inner) = name.strip_prefix("niv:") {
        let (inner, _) = operator(inner, tol)?;
        let flags = inner.flags();
        if !(flags.concave && flags.monotone) {
            return Err(CliError::Usage(format!(
                "niv: needs a concave monotone operator; {} is not",
                inner.name()
            )));
        }
        let opts = NiveloidOptions {
            tol,
            ..NiveloidOptions::default()
        };
        let op = Niveloidified {
            name: format!("niv({})", inner.name()),
            inner,
            opts,
        };
        return Ok((Box::new(op), true));
    }
    if let Some(gen) = name.strip_prefix("iphi:") {
        return Ok((Box::new(IPhi::new(generator(gen)?)), false));
    }
    if let Some(gen) = name.strip_prefix("oce:") {
        return Ok((Box::new(Oce::new(generator(gen)?, SolverOptions::with_tol(tol)?)), true));
    }
    let op: Box<dyn ConditionalOperator> = match name {
        "expectation" => Box::new(CondExpectation),
        "entropic" => Box::new(Entropic),
        "atom-min" => Box::new(AtomMin),
        "squared-expectation" => Box::new(condrisk::niveloid::squared_expectation()),
        _ => {
            return Err(CliError::Usage(format!(
                "unknown operator {name:?}; valid operators are expectation, entropic, atom-min, \
                 squared-expectation, iphi:<gen>, oce:<gen>, niv:<operator>"
            )))
        }
    };
    Ok((op, false))
}

fn check(scenario: &Scenario, args: &CheckArgs) -> Result<Output, CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    let (op, solver) = operator(&args.operator, args.common.tol)?;
    let tolerance = if solver { 2.0 * args.common.tol } else { CLOSED_FORM_TOL };
    let config = AxiomCheckConfig {
        samples: args.samples,
        tolerance,
        seed: args.seed,
        ..AxiomCheckConfig::default()
    };
    let report = check_niveloid_axioms(&scenario.space, &scenario.partition, op.as_ref(), &config)?;
    let rows: Vec<AxiomRow> = report
        .outcomes
        .iter()
        .map(|o| AxiomRow {
            operator: op.name().to_string(),
            axiom: o.axiom.label().to_string(),
            checked: o.checked,
            worst_violation: o.worst_violation,
            tolerance,
            passed: o.passed(),
            counterexample: o.counterexample.as_ref().map(|c| {
                let mut s = format!(
                    "{}: lhs {} rhs {} x {:?}",
                    scenario.atom_labels[c.atom],
                    c.lhs,
                    c.rhs,
                    c.x.values()
                );
                if let Some(y) = &c.y {
                    s.push_str(&format!(" y {:?}", y.values()));
                }
                if let Some(b) = &c.shift {
                    s.push_str(&format!(" shift {:?}", b.values()));
                }
                s
            }),
        })
        .collect();
    let status = if report.all_passed() {
        Status::Ok
    } else {
        Status::AxiomFailed
    };
    let mut p = BTreeMap::new();
    p.insert("operator".into(), op.name().to_string());
    p.insert("samples".into(), args.samples.to_string());
    p.insert("seed".into(), args.seed.to_string());
    finish(scenario, &args.common, "check", p, rows, status)
}
