//! Multi-valued state variables from invariant instances: a greedy cover of
//! the modifiable ground atoms by mutex groups, each with a null value, and
//! binary variables for the rest.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::canon::{CanonicalDomain, GroundAtom};
use crate::oracle::GroundProblem;
use crate::template::{enumerate_instances, instance_weight, instantiate, Template, TemplateInstance};
use crate::FORMAT_HEADER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// One binary variable per modifiable atom.
    Bis,
    Sis,
    Tis,
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Bis => "bis",
            Encoding::Sis => "sis",
            Encoding::Tis => "tis",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Instance { template: String, instance: Vec<String> },
    Binary { atom: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateVariable {
    pub id: usize,
    /// The non-null values; the null value is implicit and always present.
    pub values: Vec<GroundAtom>,
    pub source: Source,
}

impl StateVariable {
    /// Number of values including null.
    pub fn domain_size(&self) -> usize {
        self.values.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodingStats {
    pub variable_count: usize,
    /// Sum of domain sizes; the mean is `total_values / variable_count`.
    pub total_values: usize,
}

impl EncodingStats {
    pub fn mean(&self) -> f64 {
        if self.variable_count == 0 {
            0.0
        } else {
            self.total_values as f64 / self.variable_count as f64
        }
    }

    /// The mean as a reduced fraction, or `0` for no variables.
    pub fn mean_fraction(&self) -> String {
        if self.variable_count == 0 {
            return "0".to_string();
        }
        let g = gcd(self.total_values, self.variable_count);
        let (n, d) = (self.total_values / g, self.variable_count / g);
        if d == 1 {
            n.to_string()
        } else {
            format!("{n}/{d}")
        }
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Encoded {
    pub mode: Encoding,
    pub stats: EncodingStats,
    pub variables: Vec<StateVariable>,
    /// Instances dropped because the initial state gives them weight two
    /// or more.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Atoms of modifiable relations that occur in the initial state or in
/// some ground action of the problem.
pub fn modifiable_atoms(d: &CanonicalDomain, gp: &GroundProblem) -> BTreeSet<GroundAtom> {
    (0..gp.atom_count() as u32).map(|i| gp.atom(i)).filter(|a| d.is_modifiable(&a.rel)).cloned().collect()
}

/// Builds the variables. In BIS mode `invariants` is ignored.
pub fn build_state_variables(invariants: &[Template], d: &CanonicalDomain, gp: &GroundProblem, mode: Encoding) -> Encoded {
    let mut pool = modifiable_atoms(d, gp);
    let init = gp.logical_atoms(&gp.initial_state());
    let mut warnings = Vec::new();
    let mut groups: Vec<(String, TemplateInstance, BTreeSet<GroundAtom>)> = Vec::new();
    if mode != Encoding::Bis {
        for t in invariants {
            for g in enumerate_instances(t, &gp.objects) {
                let atoms = instantiate(t, &g, &gp.objects);
                if instance_weight(&init, &atoms) >= 2 {
                    let w = format!("instance {g} of {t} has weight two or more in the initial state; dropped");
                    log::warn!("{w}");
                    warnings.push(w);
                    continue;
                }
                let atoms: BTreeSet<GroundAtom> = atoms.intersection(&pool).cloned().collect();
                if atoms.len() >= 2 {
                    groups.push((t.key().to_string(), g, atoms));
                }
            }
        }
    }
    let mut chosen: Vec<(String, TemplateInstance, Vec<GroundAtom>)> = Vec::new();
    loop {
        // Largest remaining group; ties go to the first in key order.
        let best =
            groups.iter().enumerate().map(|(i, (k, g, atoms))| (atoms.intersection(&pool).count(), std::cmp::Reverse((k, g)), i)).max();
        let Some((n, _, i)) = best else { break };
        if n < 2 {
            break;
        }
        let (k, g, atoms) = groups.swap_remove(i);
        let values: Vec<GroundAtom> = atoms.intersection(&pool).cloned().collect();
        for a in &values {
            pool.remove(a);
        }
        chosen.push((k, g, values));
    }
    chosen.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut variables: Vec<StateVariable> = chosen
        .into_iter()
        .map(|(template, g, values)| StateVariable { id: 0, values, source: Source::Instance { template, instance: g.0 } })
        .collect();
    variables.extend(pool.into_iter().map(|a| StateVariable { id: 0, source: Source::Binary { atom: a.to_string() }, values: vec![a] }));
    for (i, v) in variables.iter_mut().enumerate() {
        v.id = i;
    }
    let stats = EncodingStats { variable_count: variables.len(), total_values: variables.iter().map(StateVariable::domain_size).sum() };
    Encoded { mode, stats, variables, warnings }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

impl Encoded {
    pub fn emit(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut s = format!(
                    "{FORMAT_HEADER}\n; mode {} variables {} mean {}\n",
                    self.mode,
                    self.stats.variable_count,
                    self.stats.mean_fraction()
                );
                for v in &self.variables {
                    let vals: Vec<String> = v.values.iter().map(|a| a.to_string()).chain(["<none>".to_string()]).collect();
                    s.push_str(&format!("var{}: {}\n", v.id, vals.join(" | ")));
                }
                s
            }
            Format::Json => {
                let doc = serde_json::json!({
                    "format": FORMAT_HEADER,
                    "mode": self.mode,
                    "stats": {
                        "variable_count": self.stats.variable_count,
                        "total_values": self.stats.total_values,
                        "mean": self.stats.mean_fraction(),
                    },
                    "variables": self.variables.iter().map(|v| serde_json::json!({
                        "id": v.id,
                        "values": v.values.iter().map(|a| a.to_string()).chain(["<none>".to_string()]).collect::<Vec<_>>(),
                        "source": v.source,
                    })).collect::<Vec<_>>(),
                });
                let mut s = serde_json::to_string_pretty(&doc).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}
