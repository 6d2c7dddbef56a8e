use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use rbmcompose::tasks::{factor_tasks, random_tasks, success_curve, write_curve_csv, SolveSettings};
use rbmcompose::{MergedModel64, Operation, TaskSpec};
use serde::{Deserialize, Serialize};

use crate::config::DEFAULT_SHARPNESS;
use crate::models;

/// A benchmark suite: every model is run on every task set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    #[serde(default)]
    pub seed: u64,
    /// Pooled sample counts at which accuracy is read off.
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub sharpness: Option<f64>,
    #[serde(default)]
    pub sampler: SuiteSampler,
    /// Also write each model's dense weight matrix.
    #[serde(default)]
    pub dump_weights: bool,
    pub models: Vec<SuiteModel>,
    pub tasks: Vec<SuiteTasks>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSampler {
    pub chains: usize,
    pub burn_in: usize,
    pub thin: usize,
}

impl Default for SuiteSampler {
    fn default() -> Self {
        Self {
            chains: 1,
            burn_in: 0,
            thin: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteModel {
    /// Label used in output file names.
    pub name: String,
    pub model: String,
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub adder_base: Option<String>,
    #[serde(default)]
    pub sharpness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteTasks {
    pub operation: String,
    pub width: usize,
    pub count: usize,
    /// Offset added to the suite seed for this task set.
    #[serde(default)]
    pub seed: u64,
    /// Semiprime range for `factor`.
    #[serde(default)]
    pub lo: Option<u64>,
    #[serde(default)]
    pub hi: Option<u64>,
}

impl SuiteTasks {
    pub fn label(&self) -> String {
        format!("{}{}", self.operation, self.width)
    }

    pub fn generate(&self, suite_seed: u64) -> Result<Vec<TaskSpec>> {
        let op = Operation::from_name(&self.operation)
            .with_context(|| format!("unknown operation `{}`", self.operation))?;
        let seed = suite_seed.wrapping_add(self.seed);
        Ok(match op {
            Operation::Factor => {
                let (Some(lo), Some(hi)) = (self.lo, self.hi) else {
                    bail!("factor tasks need lo and hi");
                };
                factor_tasks(lo, hi, self.width, self.count, seed)?
            }
            _ => random_tasks(op, self.width, self.count, seed)?,
        })
    }
}

impl Suite {
    /// Checks the suite and makes model file references absolute
    /// (relative ones are taken relative to `base_dir`).
    pub fn resolve(mut self, base_dir: &Path) -> Result<Self> {
        if self.checkpoints.is_empty() {
            bail!("suite has an empty checkpoint list");
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) || self.checkpoints[0] == 0 {
            bail!("checkpoints must be positive and increasing");
        }
        if self.models.is_empty() || self.tasks.is_empty() {
            bail!("suite needs at least one model and one task set");
        }
        let mut names: Vec<&str> = self.models.iter().map(|m| m.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            bail!("model names must be unique");
        }
        for m in &mut self.models {
            if m.name.is_empty() || !m.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
                bail!("model name `{}` is not usable in a file name", m.name);
            }
            m.model = models::resolve_ref(&m.model, base_dir)?;
            if let Some(b) = &m.base {
                m.base = Some(models::resolve_ref(b, base_dir)?);
            }
            if let Some(b) = &m.adder_base {
                m.adder_base = Some(models::resolve_ref(b, base_dir)?);
            }
        }
        Ok(self)
    }

    fn settings(&self) -> SolveSettings {
        SolveSettings {
            n_chains: self.sampler.chains,
            samples: *self.checkpoints.last().expect("resolved suite has checkpoints"),
            burn_in: self.sampler.burn_in,
            thin: self.sampler.thin,
            seed: self.seed,
        }
    }

    /// Runs the suite, writing files into `out_dir`; returns their names.
    pub fn run(&self, out_dir: &Path) -> Result<Vec<String>> {
        let task_sets: Vec<Vec<TaskSpec>> = self.tasks.iter().map(|t| t.generate(self.seed)).collect::<Result<_>>()?;
        let settings = self.settings();
        let mut outputs = Vec::new();
        let mut summary = String::from("model,task,samples,accuracy\n");
        for m in &self.models {
            let c = m.sharpness.or(self.sharpness).unwrap_or(DEFAULT_SHARPNESS);
            let model = models::construct(&m.model, m.base.as_deref(), m.adder_base.as_deref(), c)
                .with_context(|| format!("model `{}`", m.name))?;
            if self.dump_weights {
                let name = format!("weights_{}.csv", m.name);
                write_weights(&model, &out_dir.join(&name))?;
                outputs.push(name);
            }
            for (spec, tasks) in self.tasks.iter().zip(&task_sets) {
                let curve = success_curve(&model, tasks, &self.checkpoints, &settings)
                    .with_context(|| format!("model `{}` on {}", m.name, spec.label()))?;
                let name = format!("curve_{}_{}.csv", m.name, spec.label());
                let mut w = BufWriter::new(File::create(out_dir.join(&name))?);
                write_curve_csv(&mut w, &curve)?;
                w.flush()?;
                outputs.push(name);
                for p in &curve {
                    summary.push_str(&format!("{},{},{},{}\n", m.name, spec.label(), p.samples, p.accuracy));
                }
            }
        }
        fs::write(out_dir.join("bench_summary.csv"), summary)?;
        outputs.push("bench_summary.csv".into());
        Ok(outputs)
    }
}

/// Dense weight matrix: one row per visible unit, one column per hidden unit.
pub fn write_weights(model: &MergedModel64, path: &Path) -> Result<()> {
    let rbm = &model.rbm;
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write!(w, "unit")?;
    for j in 0..rbm.n_hidden() {
        write!(w, ",h{j}")?;
    }
    writeln!(w)?;
    for (i, name) in rbm.visible_names().iter().enumerate() {
        write!(w, "{name}")?;
        for x in rbm.weight_row(i) {
            write!(w, ",{x}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn suite(checkpoints: Vec<usize>) -> Suite {
        Suite {
            seed: 1,
            checkpoints,
            sharpness: None,
            sampler: SuiteSampler::default(),
            dump_weights: false,
            models: vec![SuiteModel {
                name: "a2".into(),
                model: "adder2".into(),
                base: None,
                adder_base: None,
                sharpness: Some(6.0),
            }],
            tasks: vec![SuiteTasks {
                operation: "add".into(),
                width: 2,
                count: 3,
                seed: 0,
                lo: None,
                hi: None,
            }],
        }
    }

    #[test]
    fn empty_checkpoints_rejected() {
        let err = suite(vec![]).resolve(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("empty checkpoint"));
        assert!(suite(vec![10, 5]).resolve(Path::new(".")).is_err());
    }

    #[test]
    fn run_writes_one_curve_per_model_and_task() {
        let dir = tempfile::tempdir().unwrap();
        let s = suite(vec![10, 50]).resolve(Path::new(".")).unwrap();
        let out = s.run(dir.path()).unwrap();
        assert_eq!(out, ["curve_a2_add2.csv", "bench_summary.csv"]);
        let text = fs::read_to_string(dir.path().join("curve_a2_add2.csv")).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("samples,accuracy\n10,"));
    }

    #[test]
    fn factor_needs_a_range() {
        let t = SuiteTasks {
            operation: "factor".into(),
            width: 4,
            count: 2,
            seed: 0,
            lo: None,
            hi: None,
        };
        assert!(t.generate(0).is_err());
        let t = SuiteTasks { lo: Some(10), hi: Some(60), ..t };
        assert_eq!(t.generate(0).unwrap().len(), 2);
    }
}
