use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rbmcompose::exact::{
    delta_bound, delta_exact, exact_visible_distribution_with, gibbs_transition_matrix, kl_divergence, tv_decay,
    Limits, SweepOrder,
};
use rbmcompose::synthesis::{adder_table, multiplier_table, Cnf};
use rbmcompose::tasks::{solve, solve_exact, Solution, SolveSettings};
use rbmcompose::training::{train, write_metrics_csv};
use rbmcompose::{compose, ClampMask, GateKind, MergedModel64, Operation, TaskSpec, TrainConfig, TrainTask, TruthTable};

use crate::args::*;
use crate::bench::{write_weights, Suite};
use crate::config::{self, FileConfig, DEFAULT_SHARPNESS};
use crate::{manifest, models};

/// Exit status for a run whose answer did not match.
pub const EXIT_MISMATCH: u8 = 1;

struct Run {
    /// The command with every setting resolved, as recorded in the manifest.
    resolved: Command,
    out_dir: PathBuf,
    outputs: Vec<String>,
    exit: u8,
}

/// Runs a command, writes its manifest and returns the exit status.
pub fn execute(cmd: Command) -> Result<u8> {
    let run = match cmd {
        Command::Replay(r) => {
            let m = manifest::read(&r.manifest)?;
            let mut command = m.command;
            if let Some(dir) = r.out_dir {
                common_mut(&mut command).out_dir = Some(dir);
            }
            return execute(command);
        }
        Command::Build(a) => build(a)?,
        Command::Train(a) => train_cmd(a)?,
        Command::Solve(a) => solve_cmd(a)?,
        Command::Bench(a) => bench(a)?,
        Command::Diagnose(a) => diagnose(a)?,
        Command::Inspect(a) => inspect(a)?,
    };
    let path = manifest::write(&run.out_dir, &run.resolved, run.outputs)?;
    eprintln!("manifest: {}", path.display());
    Ok(run.exit)
}

fn common_mut(cmd: &mut Command) -> &mut Common {
    match cmd {
        Command::Build(a) => &mut a.common,
        Command::Train(a) => &mut a.common,
        Command::Solve(a) => &mut a.common,
        Command::Bench(a) => &mut a.common,
        Command::Diagnose(a) => &mut a.common,
        Command::Inspect(a) => &mut a.common,
        Command::Replay(_) => unreachable!("replay manifests never record replay"),
    }
}

/// Loads the config file and fixes the output directory.
fn prepare(common: &mut Common) -> Result<(FileConfig, PathBuf)> {
    let cfg = config::load(common.config.as_deref())?;
    let out_dir = config::resolve_out_dir(common.out_dir.as_deref())?;
    common.out_dir = Some(out_dir.clone());
    common.config = None;
    Ok((cfg, out_dir))
}

fn cwd() -> Result<PathBuf> {
    Ok(std::env::current_dir()?)
}

fn resolve_opt(spec: &mut Option<String>) -> Result<()> {
    if let Some(s) = spec {
        *s = models::resolve_ref(s, &cwd()?)?;
    }
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn exported(model: &MergedModel64) -> usize {
    model.rbm.visible_names().iter().filter(|n| !n.contains('.')).count()
}

fn write_pairs(path: &Path, header: &str, rows: &[(String, String)]) -> Result<()> {
    let mut text = format!("{header}\n");
    for (k, v) in rows {
        writeln!(text, "{k},{v}")?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn build(mut a: BuildArgs) -> Result<Run> {
    let (cfg, out_dir) = prepare(&mut a.common)?;
    a.target = models::resolve_ref(&a.target, &cwd()?)?;
    resolve_opt(&mut a.base)?;
    resolve_opt(&mut a.adder_base)?;
    let c = *a.sharpness.get_or_insert(cfg.sharpness.unwrap_or(DEFAULT_SHARPNESS));
    let output = a
        .output
        .get_or_insert_with(|| models::default_output(&a.target, a.base.as_deref()))
        .clone();
    let model = models::construct(&a.target, a.base.as_deref(), a.adder_base.as_deref(), c)?;
    let path = out_dir.join(&output);
    model.save(&path)?;
    println!(
        "{}: {} exported terminals, {} visible, {} hidden",
        path.display(),
        exported(&model),
        model.rbm.n_visible(),
        model.rbm.n_hidden()
    );
    let outputs = vec![
        output.to_string_lossy().into_owned(),
        file_name(&MergedModel64::sidecar_path(&output)),
    ];
    Ok(Run {
        resolved: Command::Build(a),
        out_dir,
        outputs,
        exit: 0,
    })
}

fn train_config(a: &TrainArgs, cfg: &FileConfig) -> TrainConfig {
    let mut t = cfg.train.clone().unwrap_or_default();
    macro_rules! over {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { t.$f = v; } )* };
    }
    over!(k, k_max, learning_rate, epochs_per_stage, copies_per_epoch, weight_decay, batch_size, patience, seed);
    if a.max_dataset.is_some() {
        t.max_dataset = a.max_dataset;
    }
    t
}

fn train_cmd(mut a: TrainArgs) -> Result<Run> {
    let (cfg, out_dir) = prepare(&mut a.common)?;
    let task = TrainTask::parse(&a.task)?;
    let config = match a.resolved.clone() {
        Some(c) => c,
        None => train_config(&a, &cfg),
    };
    a.resolved = Some(config.clone());
    let hidden = match a.hidden.or(task.default_hidden()) {
        Some(h) => h,
        None => bail!("no reference hidden count for {}; pass --hidden", task.name()),
    };
    a.hidden = Some(hidden);
    let output = a.output.get_or_insert_with(|| PathBuf::from(format!("{}.json", task.name()))).clone();
    let outcome = train::<f64>(task, hidden, &config)?;
    let path = out_dir.join(&output);
    outcome.rbm.save(&path)?;
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let metrics = output.with_file_name(format!("{stem}.metrics.csv"));
    let mut w = BufWriter::new(File::create(out_dir.join(&metrics))?);
    write_metrics_csv(&mut w, &outcome.metrics)?;
    w.flush()?;
    let best = &outcome.metrics[outcome.best];
    println!(
        "{}: {} hidden, accuracy {} (stage {}, epoch {})",
        path.display(),
        hidden,
        best.task_accuracy,
        best.stage,
        best.epoch
    );
    Ok(Run {
        resolved: Command::Train(a),
        out_dir,
        outputs: vec![output.to_string_lossy().into_owned(), metrics.to_string_lossy().into_owned()],
        exit: 0,
    })
}

fn parse_assignment(s: &str) -> Result<(String, u64)> {
    let (k, v) = s.split_once('=').with_context(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v = v.trim();
    let value = match v.strip_prefix("0b") {
        Some(bits) => u64::from_str_radix(bits, 2),
        None => v.parse(),
    }
    .with_context(|| format!("bad value in `{s}`"))?;
    Ok((k.trim().to_string(), value))
}

fn solve_task(a: &SolveArgs) -> Result<TaskSpec> {
    let op = Operation::from_name(&a.op).with_context(|| format!("unknown operation `{}`", a.op))?;
    let mut task = if op == Operation::Sat {
        let path = a.cnf.as_ref().context("sat needs --cnf")?;
        ensure!(a.set.is_empty() && a.expect.is_empty(), "sat clamps variables with --bit");
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        TaskSpec::sat(Cnf::parse_dimacs(&text)?)
    } else {
        ensure!(a.cnf.is_none(), "--cnf only applies to sat");
        let mut t = TaskSpec::new(op, a.width);
        for s in &a.set {
            let (k, v) = parse_assignment(s)?;
            t = t.operand(&k, v);
        }
        if matches!(op, Operation::Add | Operation::Subtract | Operation::ReverseCarry) && !t.operands.contains_key("Cin")
        {
            t = t.operand("Cin", 0);
        }
        for s in &a.expect {
            let (k, v) = parse_assignment(s)?;
            t = t.expect(&k, v);
        }
        t
    };
    for s in &a.bits {
        let (k, v) = parse_assignment(s)?;
        ensure!(v <= 1, "bit clamp `{s}` must be 0 or 1");
        task.bits.insert(k, v == 1);
    }
    task.validate()?;
    Ok(task)
}

fn write_solution(path: &Path, sol: &Solution, top: usize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let cols: Vec<String> = sol.ranked.first().map(|(a, _)| a.keys().cloned().collect()).unwrap_or_default();
    writeln!(w, "rank,{},weight,frequency", cols.join(","))?;
    for (i, (ans, weight)) in sol.ranked.iter().take(top).enumerate() {
        let values: Vec<String> = cols.iter().map(|c| ans[c].to_string()).collect();
        let freq = if sol.total > 0.0 { weight / sol.total } else { 0.0 };
        writeln!(w, "{},{},{},{}", i + 1, values.join(","), weight, freq)?;
    }
    w.flush()?;
    Ok(())
}

fn solve_cmd(mut a: SolveArgs) -> Result<Run> {
    let (cfg, out_dir) = prepare(&mut a.common)?;
    resolve_opt(&mut a.model)?;
    if let Some(p) = &a.cnf {
        a.cnf = Some(std::path::absolute(p)?);
    }
    let s = &cfg.sampler;
    let c = *a.sharpness.get_or_insert(cfg.sharpness.unwrap_or(DEFAULT_SHARPNESS));
    let settings = SolveSettings {
        n_chains: *a.chains.get_or_insert(s.chains.unwrap_or(1)),
        samples: *a.samples.get_or_insert(s.samples.unwrap_or(1000)),
        burn_in: *a.burn_in.get_or_insert(s.burn_in.unwrap_or(0)),
        thin: *a.thin.get_or_insert(s.thin.unwrap_or(1)),
        seed: *a.seed.get_or_insert(s.seed.unwrap_or(0)),
    };
    let task = solve_task(&a)?;
    let model = match (&a.model, &task.cnf) {
        (Some(m), _) => models::construct(m, None, None, c)?,
        (None, Some(cnf)) => compose(&cnf.netlist(c)?)?,
        (None, None) => bail!("--model is required for {}", a.op),
    };
    let sol = if a.exact {
        solve_exact(&model, &task, Limits::wide_hidden())?
    } else {
        solve(&model, &task, &settings)?
    };
    match &sol.answer {
        Some(ans) => {
            let parts: Vec<String> = ans.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("answer: {}", parts.join(" "));
            println!("frequency: {}", sol.frequency);
        }
        None => println!("answer: none"),
    }
    println!("correct: {}", sol.correct);
    write_solution(&out_dir.join("solution.csv"), &sol, a.top)?;
    Ok(Run {
        resolved: Command::Solve(a),
        out_dir,
        outputs: vec!["solution.csv".into()],
        exit: if sol.correct { 0 } else { EXIT_MISMATCH },
    })
}

fn bench(mut a: BenchArgs) -> Result<Run> {
    let (_, out_dir) = prepare(&mut a.common)?;
    let suite = match a.resolved.take() {
        Some(s) => s,
        None => {
            let path = a.suite.as_ref().context("bench needs a suite file")?;
            let path = std::path::absolute(path)?;
            let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
            let suite: Suite = config::read_structured(&path)?;
            a.suite = Some(path);
            suite.resolve(&dir)?
        }
    };
    let outputs = suite.run(&out_dir)?;
    for o in &outputs {
        println!("{}", out_dir.join(o).display());
    }
    a.resolved = Some(suite);
    Ok(Run {
        resolved: Command::Bench(a),
        out_dir,
        outputs,
        exit: 0,
    })
}

fn ideal_table(name: &str) -> Result<TruthTable> {
    if let Some(g) = GateKind::from_name(name) {
        return Ok(g.truth_table());
    }
    let width = |p: &str| name.strip_prefix(p).and_then(|w| w.parse::<usize>().ok());
    if let Some(w) = width("adder") {
        return Ok(adder_table(w)?);
    }
    if let Some(w) = width("mult") {
        return Ok(multiplier_table(w)?);
    }
    bail!("unknown table `{name}` (expected a gate name, adder<n> or mult<n>)")
}

fn diagnose(mut a: DiagnoseArgs) -> Result<Run> {
    let (cfg, out_dir) = prepare(&mut a.common)?;
    a.model = models::resolve_ref(&a.model, &cwd()?)?;
    let c = *a.sharpness.get_or_insert(cfg.sharpness.unwrap_or(DEFAULT_SHARPNESS));
    let model = models::construct(&a.model, None, None, c)?;
    let rbm = &model.rbm;
    let order = match a.order {
        Order::HiddenFirst => SweepOrder::HiddenFirst,
        Order::VisibleFirst => SweepOrder::VisibleFirst,
    };
    let mut rows = vec![
        ("n_visible".to_string(), rbm.n_visible().to_string()),
        ("n_hidden".to_string(), rbm.n_hidden().to_string()),
    ];
    let mut clamps = ClampMask::new();
    for (t, &b) in &model.constants {
        clamps.set(t.clone(), b);
    }
    let clamp = clamps.resolve_model(&model)?;
    let dist = exact_visible_distribution_with(rbm, Some(&clamp), Limits::wide_hidden())?;
    rows.push(("log_partition".into(), dist.log_partition.to_string()));
    let delta = delta_exact(rbm).ok();
    if let Some(d) = delta {
        rows.push(("delta_exact".into(), d.to_string()));
    }
    rows.push(("delta_bound".into(), delta_bound(rbm).to_string()));
    if let Some(name) = &a.table {
        let table = ideal_table(name)?;
        let units: Vec<usize> = table
            .names()
            .iter()
            .map(|n| {
                model
                    .terminal_map
                    .get(n)
                    .copied()
                    .or_else(|| rbm.visible_index(n))
                    .with_context(|| format!("model has no terminal `{n}` for table {name}"))
            })
            .collect::<Result<_>>()?;
        let marginal = dist.marginal(&units)?;
        let project = |v: &[bool]| -> Vec<bool> { units.iter().map(|&u| v[u]).collect() };
        let ideal = marginal.uniform_where(|v| table.contains(&project(v)))?;
        rows.push(("kl_ideal".into(), kl_divergence(&ideal, &marginal)?.to_string()));
        rows.push(("valid_mass".into(), marginal.mass_where(|v| table.contains(&project(v))).to_string()));
    }
    if let Ok(slem) = gibbs_transition_matrix(rbm, order).and_then(|p| p.slem()) {
        rows.push(("slem".into(), slem.to_string()));
    }
    write_pairs(&out_dir.join("diagnose.csv"), "metric,value", &rows)?;
    let mut outputs = vec!["diagnose.csv".to_string()];
    if dist.len() <= 1 << 16 {
        let mut text = String::from("state_index,probability\n");
        for (k, p) in dist.probabilities.iter().enumerate() {
            writeln!(text, "{k},{p}")?;
        }
        fs::write(out_dir.join("distribution.csv"), text)?;
        outputs.push("distribution.csv".into());
    }
    if let Some(steps) = a.decay_steps {
        let delta = delta.context("decay needs delta_exact, which is out of range for this model")?;
        let n = 1usize << (rbm.n_visible() + rbm.n_hidden());
        let mut start = vec![0.0; n];
        start[0] = 1.0;
        let curve = tv_decay(rbm, &start, steps, order, delta)?;
        let mut text = String::from("n,tv_observed,tv_bound\n");
        for p in curve {
            writeln!(text, "{},{},{}", p.step, p.tv_observed, p.tv_bound)?;
        }
        fs::write(out_dir.join("decay.csv"), text)?;
        outputs.push("decay.csv".into());
    }
    for (k, v) in &rows {
        println!("{k}: {v}");
    }
    Ok(Run {
        resolved: Command::Diagnose(a),
        out_dir,
        outputs,
        exit: 0,
    })
}

fn inspect(mut a: InspectArgs) -> Result<Run> {
    let (cfg, out_dir) = prepare(&mut a.common)?;
    a.model = models::resolve_ref(&a.model, &cwd()?)?;
    let c = *a.sharpness.get_or_insert(cfg.sharpness.unwrap_or(DEFAULT_SHARPNESS));
    let model = models::construct(&a.model, None, None, c)?;
    let rbm = &model.rbm;
    let w = rbm.weights();
    let abs = |xs: &[f64]| xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let nonzero = w.iter().filter(|x| x.abs() > a.tolerance).count();
    let n = w.len().max(1) as f64;
    let rows: Vec<(String, String)> = [
        ("n_visible", rbm.n_visible().to_string()),
        ("n_hidden", rbm.n_hidden().to_string()),
        ("n_exported", exported(&model).to_string()),
        ("n_constants", model.constants.len().to_string()),
        ("n_weights", w.len().to_string()),
        ("nonzero_weights", nonzero.to_string()),
        ("weight_density", (nonzero as f64 / n).to_string()),
        ("max_abs_weight", abs(w).to_string()),
        ("mean_abs_weight", (w.iter().map(|x| x.abs()).sum::<f64>() / n).to_string()),
        ("weight_rms", (w.iter().map(|x| x * x).sum::<f64>() / n).sqrt().to_string()),
        ("max_abs_visible_bias", abs(rbm.visible_bias()).to_string()),
        ("max_abs_hidden_bias", abs(rbm.hidden_bias()).to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    write_pairs(&out_dir.join("inspect.csv"), "metric,value", &rows)?;
    let mut outputs = vec!["inspect.csv".to_string()];
    if a.dump_weights {
        write_weights(&model, &out_dir.join("weights.csv"))?;
        outputs.push("weights.csv".into());
    }
    for (k, v) in &rows {
        println!("{k}: {v}");
    }
    Ok(Run {
        resolved: Command::Inspect(a),
        out_dir,
        outputs,
        exit: 0,
    })
}
