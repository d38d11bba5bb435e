//! Scenario files: a single JSON document describing the state space, the
//! partition and the payoffs.
//!
//! ```json
//! {
//!   "states": [{"name": "up", "prob": 0.5}, {"name": "down", "prob": 0.5}],
//!   "atoms": [["up", "down"]],
//!   "positions": {"x": [1.3862943611198906, 0.0]},
//!   "measures": {"tilted": [0.75, 0.25]}
//! }
//! ```
//!
//! `measures` is optional. A report written with `--format json --echo-input`
//! carries the scenario under `input` and loads like the original file.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use condrisk::{EquivalentConditionalMeasure, FiniteProbabilitySpace, Partition, RandomVariable};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub name: String,
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub states: Vec<StateEntry>,
    pub atoms: Vec<Vec<String>>,
    pub positions: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub measures: BTreeMap<String, Vec<f64>>,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub space: FiniteProbabilitySpace,
    pub partition: Partition,
    pub positions: BTreeMap<String, RandomVariable>,
    pub atom_labels: Vec<String>,
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Scenario {
        field: field.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::parse(&text)
    }

    /// Parses either a scenario document or a report that echoes one.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file = match serde_json::from_str::<serde_json::Value>(text) {
            Ok(serde_json::Value::Object(map)) if !map.contains_key("states") && map.contains_key("input") => {
                serde_json::from_value::<ScenarioFile>(map["input"].clone()).map_err(|e| CliError::Json {
                    line: None,
                    message: format!("input: {e}"),
                })?
            }
            _ => serde_json::from_str::<ScenarioFile>(text).map_err(|e| CliError::Json {
                line: Some((e.line(), e.column())),
                message: e.to_string(),
            })?,
        };
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, CliError> {
        if file.states.is_empty() {
            return Err(invalid("states", "at least one state is required"));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (i, state) in file.states.iter().enumerate() {
            if state.name.is_empty() {
                return Err(invalid(format!("states[{i}].name"), "must not be empty"));
            }
            if index.insert(state.name.as_str(), i).is_some() {
                return Err(invalid(
                    format!("states[{i}].name"),
                    format!("duplicate state {:?}", state.name),
                ));
            }
            if !(state.prob.is_finite() && state.prob > 0.0) {
                return Err(invalid(
                    format!("states[{i}].prob"),
                    format!("must be a positive finite number, got {}", state.prob),
                ));
            }
        }
        let names: Vec<String> = file.states.iter().map(|s| s.name.clone()).collect();
        let probs: Vec<f64> = file.states.iter().map(|s| s.prob).collect();
        let space = FiniteProbabilitySpace::new(names, probs).map_err(|e| invalid("states", e.to_string()))?;

        let n = space.len();
        let mut owner: Vec<Option<usize>> = vec![None; n];
        let mut atoms = Vec::with_capacity(file.atoms.len());
        for (a, atom) in file.atoms.iter().enumerate() {
            if atom.is_empty() {
                return Err(invalid(format!("atoms[{a}]"), "atom is empty"));
            }
            let mut members = Vec::with_capacity(atom.len());
            for (j, name) in atom.iter().enumerate() {
                let s = *index
                    .get(name.as_str())
                    .ok_or_else(|| invalid(format!("atoms[{a}][{j}]"), format!("unknown state {name:?}")))?;
                if let Some(prev) = owner[s] {
                    return Err(invalid(
                        format!("atoms[{a}][{j}]"),
                        format!("state {name:?} already belongs to atoms[{prev}]"),
                    ));
                }
                owner[s] = Some(a);
                members.push(s);
            }
            atoms.push(members);
        }
        if let Some(s) = owner.iter().position(Option::is_none) {
            return Err(invalid(
                "atoms",
                format!("state {:?} is not covered by any atom", space.names()[s]),
            ));
        }
        let partition = Partition::new(atoms, n).map_err(|e| invalid("atoms", e.to_string()))?;

        if file.positions.is_empty() {
            return Err(invalid("positions", "at least one position is required"));
        }
        let mut positions = BTreeMap::new();
        for (label, values) in &file.positions {
            let field = format!("positions.{label}");
            if values.len() != n {
                return Err(invalid(
                    field,
                    format!("expected {n} values (one per state), found {}", values.len()),
                ));
            }
            let x = RandomVariable::new(values.clone()).map_err(|e| invalid(field, e.to_string()))?;
            positions.insert(label.clone(), x);
        }
        for (label, values) in &file.measures {
            if values.len() != n {
                return Err(invalid(
                    format!("measures.{label}"),
                    format!("expected {n} values (one per state), found {}", values.len()),
                ));
            }
        }

        let atom_labels = (0..partition.len()).map(|a| format!("A{a}")).collect();
        Ok(Self {
            file,
            space,
            partition,
            positions,
            atom_labels,
        })
    }

    fn unknown_position(&self, label: &str) -> CliError {
        CliError::Usage(format!(
            "unknown position {label:?}; available: {}",
            self.positions.keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    }

    pub fn position(&self, label: &str) -> Result<&RandomVariable, CliError> {
        self.positions.get(label).ok_or_else(|| self.unknown_position(label))
    }

    /// Selected positions, or all of them in label order.
    pub fn selected(&self, label: Option<&str>) -> Result<Vec<(&str, &RandomVariable)>, CliError> {
        match label {
            Some(l) => {
                let (k, v) = self
                    .positions
                    .get_key_value(l)
                    .ok_or_else(|| self.unknown_position(l))?;
                Ok(vec![(k.as_str(), v)])
            }
            None => Ok(self.positions.iter().map(|(k, v)| (k.as_str(), v)).collect()),
        }
    }

    /// Looks `label` up among the declared measures, then among positions,
    /// and validates it as a measure equal to the base measure on G.
    pub fn measure(&self, label: &str) -> Result<EquivalentConditionalMeasure, CliError> {
        let (field, weights) = if let Some(w) = self.file.measures.get(label) {
            (format!("measures.{label}"), w.clone())
        } else if let Some(w) = self.file.positions.get(label) {
            (format!("positions.{label}"), w.clone())
        } else {
            return Err(CliError::Usage(format!("unknown measure {label:?}")));
        };
        EquivalentConditionalMeasure::new(&self.space, &self.partition, weights)
            .map_err(|e| invalid(field, e.to_string()))
    }
}
