//! Contrastive-divergence training of adder and multiplier units.
//!
//! The schedule runs stages of `epochs_per_stage` epochs at a fixed CD-k,
//! then raises k by one. An epoch is `copies_per_epoch` shuffled copies of
//! the dataset. Training stops once the score (task accuracy, ties broken
//! by the mean exact log-probability of the correct answer) has not
//! improved for `patience` stages, or k would exceed `k_max`; the best
//! epoch's parameters are returned.

use std::io::{self, Write};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Limits;
use crate::merge::MergedModel;
use crate::rbm::{index_to_bits, Rbm};
use crate::scalar::{sigmoid, Scalar};
use crate::synthesis::{adder_names, adder_row, multiplier_names, multiplier_row};
use crate::tasks::{solve, solve_exact, SolveSettings, TaskSpec};

/// Largest dataset [`generate_dataset`] enumerates without a cap.
pub const MAX_ENUMERATED_ROWS: u128 = 1 << 24;

/// A unit to train on the joint distribution of an arithmetic operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bits")]
pub enum TrainTask {
    Adder(usize),
    Multiplier(usize),
}

impl TrainTask {
    /// Parses `adder<n>` or `mult<n>`.
    pub fn parse(name: &str) -> Result<Self> {
        let width = |p: &str| name.strip_prefix(p).and_then(|w| w.parse().ok()).filter(|&w: &usize| (1..=32).contains(&w));
        if let Some(w) = width("adder") {
            Ok(TrainTask::Adder(w))
        } else if let Some(w) = width("mult") {
            Ok(TrainTask::Multiplier(w))
        } else {
            Err(Error::InvalidArgument(format!("unknown training task `{name}`")))
        }
    }

    pub fn name(self) -> String {
        match self {
            TrainTask::Adder(n) => format!("adder{n}"),
            TrainTask::Multiplier(n) => format!("mult{n}"),
        }
    }

    pub fn width(self) -> usize {
        match self {
            TrainTask::Adder(n) | TrainTask::Multiplier(n) => n,
        }
    }

    pub fn visible_names(self) -> Vec<String> {
        match self {
            TrainTask::Adder(n) => adder_names(n),
            TrainTask::Multiplier(n) => multiplier_names(n),
        }
    }

    /// Number of valid rows (input combinations).
    pub fn n_rows(self) -> u128 {
        match self {
            TrainTask::Adder(n) => 1u128 << (2 * n + 1),
            TrainTask::Multiplier(n) => 1u128 << (2 * n),
        }
    }

    /// Row `index`, with inputs packed as `a + 2^n·b (+ 2^{2n}·cin)`.
    pub fn row(self, index: u64) -> Vec<bool> {
        match self {
            TrainTask::Adder(n) => {
                let bits = index_to_bits(index, 2 * n + 1);
                let a = crate::tasks::decode_int(&bits[..n]).expect("fits");
                let b = crate::tasks::decode_int(&bits[n..2 * n]).expect("fits");
                adder_row(n, a, b, bits[2 * n])
            }
            TrainTask::Multiplier(n) => {
                let m = (1u64 << n) - 1;
                multiplier_row(n, index & m, (index >> n) & m)
            }
        }
    }

    /// The forward task for input row `index`.
    pub fn instance(self, index: u64) -> TaskSpec {
        match self {
            TrainTask::Adder(n) => {
                let m = (1u64 << n) - 1;
                TaskSpec::add(n, index & m, (index >> n) & m, (index >> (2 * n)) & 1 == 1)
            }
            TrainTask::Multiplier(n) => {
                let m = (1u64 << n) - 1;
                TaskSpec::multiply(n, index & m, (index >> n) & m)
            }
        }
    }

    /// Hidden-unit counts of the reference training table, when listed.
    pub fn default_hidden(self) -> Option<usize> {
        match self {
            TrainTask::Adder(1) => Some(6),
            TrainTask::Adder(2) => Some(28),
            TrainTask::Adder(4) => Some(64),
            TrainTask::Adder(8) => Some(96),
            TrainTask::Adder(16) => Some(128),
            TrainTask::Adder(32) => Some(192),
            TrainTask::Multiplier(1) => Some(4),
            TrainTask::Multiplier(2) => Some(12),
            TrainTask::Multiplier(4) => Some(64),
            TrainTask::Multiplier(8) => Some(96),
            _ => None,
        }
    }
}

/// Valid rows of `task`; with `cap` below the row count, a uniform random
/// subset of `cap` distinct rows.
pub fn generate_dataset<R: Rng + ?Sized>(task: TrainTask, cap: Option<usize>, rng: &mut R) -> Result<Vec<Vec<bool>>> {
    let total = task.n_rows();
    match cap {
        Some(0) => Err(Error::InvalidArgument("dataset cap must be ≥ 1".into())),
        Some(c) if (c as u128) < total => {
            if total > usize::MAX as u128 {
                return Err(Error::InvalidArgument("row space exceeds the address space".into()));
            }
            let mut idx = sample(rng, total as usize, c).into_vec();
            idx.sort_unstable();
            Ok(idx.into_iter().map(|i| task.row(i as u64)).collect())
        }
        _ if total > MAX_ENUMERATED_ROWS => Err(Error::StateSpaceTooLarge {
            units: (127 - total.leading_zeros()) as usize,
            limit: 24,
        }),
        _ => Ok((0..total as u64).map(|i| task.row(i)).collect()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Initial CD steps.
    pub k: usize,
    pub k_max: usize,
    pub learning_rate: f64,
    pub epochs_per_stage: usize,
    pub copies_per_epoch: usize,
    pub weight_decay: f64,
    /// Upper bound on the mini-batch; smaller datasets use smaller
    /// batches so an epoch makes at least `min_updates_per_epoch` updates.
    pub batch_size: usize,
    pub min_updates_per_epoch: usize,
    /// Use the final reconstruction's visible probabilities, not sampled
    /// bits, in the negative statistics.
    pub mean_field_negative: bool,
    /// Draw a fresh random subset of this many rows each epoch.
    pub max_dataset: Option<usize>,
    /// Stages without improvement before stopping.
    pub patience: usize,
    /// Standard deviation of the initial weights.
    pub init_std: f64,
    /// Evaluate on at most this many input instances (all when `None`).
    pub eval_instances: Option<usize>,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            k: 2,
            k_max: 10,
            learning_rate: 1.0,
            epochs_per_stage: 10,
            copies_per_epoch: 4,
            weight_decay: 1e-4,
            batch_size: 32,
            min_updates_per_epoch: 8,
            mean_field_negative: true,
            max_dataset: None,
            patience: 2,
            init_std: 0.01,
            eval_instances: None,
            seed: 0,
        }
    }
}

impl TrainConfig {
    /// Batch size used for an epoch of `rows` rows.
    pub fn effective_batch(&self, rows: usize) -> usize {
        self.batch_size.min(rows / self.min_updates_per_epoch.max(1)).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.k == 0 || self.k > self.k_max {
            return bad("need 1 ≤ k ≤ k_max");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and ≥ 0");
        }
        if self.epochs_per_stage == 0 || self.copies_per_epoch == 0 || self.batch_size == 0 {
            return bad("epochs, copies and batch size must be ≥ 1");
        }
        if self.weight_decay.is_nan() || self.weight_decay < 0.0 || self.init_std.is_nan() || self.init_std < 0.0 {
            return bad("weight_decay and init_std must be ≥ 0");
        }
        Ok(())
    }
}

/// Mutable parameter view used during training.
#[derive(Clone, Debug)]
struct Params<T> {
    nv: usize,
    nh: usize,
    w: Vec<T>,
    b: Vec<T>,
    a: Vec<T>,
    names: Vec<String>,
}

impl<T: Scalar> Params<T> {
    fn from_rbm(rbm: &Rbm<T>) -> Self {
        let (w, b, a, names) = rbm.clone().into_parts();
        Self {
            nv: rbm.n_visible(),
            nh: rbm.n_hidden(),
            w,
            b,
            a,
            names,
        }
    }

    fn to_rbm(&self) -> Result<Rbm<T>> {
        Rbm::from_flat(self.w.clone(), self.b.clone(), self.a.clone(), self.names.clone())
    }

    fn hidden_probs(&self, v: &[T], out: &mut [T]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut x = self.a[j];
            for i in 0..self.nv {
                if v[i] != T::zero() {
                    x = x + v[i] * self.w[i * self.nh + j];
                }
            }
            *o = sigmoid(x);
        }
    }

    fn visible_probs(&self, h: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.w[i * self.nh..(i + 1) * self.nh];
            let x = row
                .iter()
                .zip(h)
                .filter(|(_, &hj)| hj != T::zero())
                .fold(self.b[i], |acc, (&w, &hj)| acc + w * hj);
            *o = sigmoid(x);
        }
    }

    /// One CD-k update on `batch`; returns the mean squared one-step
    /// reconstruction error.
    #[allow(clippy::too_many_arguments)]
    fn cd_update<R: Rng + ?Sized>(
        &mut self,
        batch: &[Vec<bool>],
        k: usize,
        lr: f64,
        decay: f64,
        mean_field: bool,
        rng: &mut R,
    ) -> f64 {
        let (nv, nh) = (self.nv, self.nh);
        let bern = |p: T, rng: &mut R| if rng.random::<f64>() < p.as_f64() { T::one() } else { T::zero() };
        let mut dw = vec![T::zero(); nv * nh];
        let mut db = vec![T::zero(); nv];
        let mut da = vec![T::zero(); nh];
        let mut v0 = vec![T::zero(); nv];
        let mut ph0 = vec![T::zero(); nh];
        let mut h = vec![T::zero(); nh];
        let mut pv = vec![T::zero(); nv];
        let mut v = vec![T::zero(); nv];
        let mut ph = vec![T::zero(); nh];
        let mut recon = 0.0;
        for row in batch {
            for (x, &bit) in v0.iter_mut().zip(row) {
                *x = if bit { T::one() } else { T::zero() };
            }
            self.hidden_probs(&v0, &mut ph0);
            for j in 0..nh {
                h[j] = bern(ph0[j], rng);
            }
            for step in 0..k {
                self.visible_probs(&h, &mut pv);
                if step == 0 {
                    recon += v0.iter().zip(&pv).map(|(&x, &p)| (x - p).as_f64().powi(2)).sum::<f64>();
                }
                for i in 0..nv {
                    v[i] = if mean_field && step + 1 == k { pv[i] } else { bern(pv[i], rng) };
                }
                self.hidden_probs(&v, &mut ph);
                if step + 1 < k {
                    for j in 0..nh {
                        h[j] = bern(ph[j], rng);
                    }
                }
            }
            for i in 0..nv {
                for j in 0..nh {
                    dw[i * nh + j] = dw[i * nh + j] + v0[i] * ph0[j] - v[i] * ph[j];
                }
                db[i] = db[i] + v0[i] - v[i];
            }
            for j in 0..nh {
                da[j] = da[j] + ph0[j] - ph[j];
            }
        }
        let scale = T::of(lr / batch.len() as f64);
        let shrink = T::of(lr * decay);
        for (w, d) in self.w.iter_mut().zip(&dw) {
            *w = *w + scale * *d - shrink * *w;
        }
        for (b, d) in self.b.iter_mut().zip(&db) {
            *b = *b + scale * *d;
        }
        for (a, d) in self.a.iter_mut().zip(&da) {
            *a = *a + scale * *d;
        }
        recon / (batch.len() * nv) as f64
    }

    fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.a).chain(&self.b).all(|x| x.is_finite())
    }
}

/// One CD-k step on a batch, returning the updated model:
/// `ΔW = lr·(⟨v hᵀ⟩_data − ⟨v hᵀ⟩_recon) − lr·decay·W`, with batch means,
/// hidden probabilities on both sides, and biases updated likewise without
/// decay. The reconstruction runs k sweeps from the data row.
pub fn cd_step<T: Scalar, R: Rng + ?Sized>(
    rbm: &Rbm<T>,
    batch: &[Vec<bool>],
    config: &TrainConfig,
    rng: &mut R,
) -> Result<Rbm<T>> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    if let Some(row) = batch.iter().find(|r| r.len() != rbm.n_visible()) {
        return Err(Error::DimensionMismatch {
            what: "batch row",
            expected: rbm.n_visible(),
            found: row.len(),
        });
    }
    let mut p = Params::from_rbm(rbm);
    p.cd_update(batch, config.k, config.learning_rate, config.weight_decay, config.mean_field_negative, rng);
    if !p.is_finite() {
        return Err(Error::Divergence("non-finite parameter after CD step".into()));
    }
    p.to_rbm()
}

/// How [`evaluate_accuracy`] reads answers.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalMode {
    /// Mode of the exact conditional distribution.
    Exact,
    Sampled(SolveSettings),
}

/// Accuracy and mean log-probability of the correct answers (exact mode only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub log_likelihood: Option<f64>,
}

/// Fraction of forward instances (addition or multiplication) whose
/// clamped-inference mode is correct. Uses every input when
/// `n_instances` is `None` or covers the input space, else a random
/// subset drawn with `seed`.
pub fn evaluate_accuracy<T: Scalar>(
    model: &MergedModel<T>,
    task: TrainTask,
    n_instances: Option<usize>,
    mode: &EvalMode,
    seed: u64,
) -> Result<Evaluation> {
    let total = task.n_rows();
    let indices: Vec<u64> = match n_instances {
        Some(n) if (n as u128) < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v: Vec<u64> = sample(&mut rng, total as usize, n).into_iter().map(|i| i as u64).collect();
            v.sort_unstable();
            v
        }
        _ => (0..total as u64).collect(),
    };
    if indices.is_empty() {
        return Err(Error::InvalidArgument("no evaluation instances".into()));
    }
    let mut correct = 0usize;
    let mut ll = 0.0;
    for (i, &idx) in indices.iter().enumerate() {
        let t = task.instance(idx);
        let sol = match mode {
            EvalMode::Exact => solve_exact(model, &t, Limits::wide_hidden())?,
            EvalMode::Sampled(s) => solve(
                model,
                &t,
                &SolveSettings {
                    seed: s.seed.wrapping_add(i as u64),
                    ..s.clone()
                },
            )?,
        };
        correct += usize::from(sol.correct);
        if matches!(mode, EvalMode::Exact) {
            let expected = t.expected.as_ref().expect("forward tasks carry answers");
            let p = sol
                .ranked
                .iter()
                .find(|(a, _)| a == expected)
                .map_or(0.0, |(_, w)| *w);
            ll += p.max(1e-300).ln();
        }
    }
    let n = indices.len() as f64;
    Ok(Evaluation {
        accuracy: correct as f64 / n,
        log_likelihood: matches!(mode, EvalMode::Exact).then_some(ll / n),
    })
}

/// Per-epoch training record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub stage: usize,
    pub k: usize,
    pub epoch: usize,
    pub reconstruction_error: f64,
    pub task_accuracy: f64,
    pub log_likelihood: f64,
}

pub fn write_metrics_csv(mut w: impl Write, metrics: &[EpochMetrics]) -> io::Result<()> {
    writeln!(w, "stage,k,epoch,reconstruction_error,task_accuracy,log_likelihood")?;
    for m in metrics {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            m.stage, m.k, m.epoch, m.reconstruction_error, m.task_accuracy, m.log_likelihood
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    /// Parameters of the best-scoring epoch.
    pub rbm: Rbm<T>,
    pub metrics: Vec<EpochMetrics>,
    /// Index into `metrics` of the returned checkpoint.
    pub best: usize,
}

fn score(e: &Evaluation) -> (f64, f64) {
    (e.accuracy, e.log_likelihood.unwrap_or(f64::NEG_INFINITY))
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 > b.1)
}

/// Trains a fresh RBM with `n_hidden` hidden units on `task`.
pub fn train<T: Scalar>(task: TrainTask, n_hidden: usize, config: &TrainConfig) -> Result<TrainOutcome<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let names = task.visible_names();
    let nv = names.len();
    let normal = Normal::new(0.0, config.init_std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let w: Vec<T> = (0..nv * n_hidden).map(|_| T::of(normal.sample(&mut rng))).collect();
    let mut params = Params::from_rbm(&Rbm::from_flat(w, vec![T::zero(); nv], vec![T::zero(); n_hidden], names)?);

    let fixed = match config.max_dataset {
        Some(c) if (c as u128) < task.n_rows() => None,
        _ => Some(generate_dataset(task, None, &mut rng)?),
    };
    let eval_seed = config.seed ^ 0x5eed;
    let mut metrics = Vec::new();
    let mut best: Option<((f64, f64), Rbm<T>, usize)> = None;
    let mut stale = 0;
    let mut k = config.k;
    let mut stage = 0;
    while k <= config.k_max && stale < config.patience {
        let stage_start = best.as_ref().map(|b| b.0);
        for epoch in 0..config.epochs_per_stage {
            let data = match &fixed {
                Some(d) => d.clone(),
                None => generate_dataset(task, config.max_dataset, &mut rng)?,
            };
            let mut epoch_rows: Vec<&Vec<bool>> = Vec::with_capacity(data.len() * config.copies_per_epoch);
            for _ in 0..config.copies_per_epoch {
                epoch_rows.extend(data.iter());
            }
            epoch_rows.shuffle(&mut rng);
            let mut recon = 0.0;
            let mut batches = 0;
            for chunk in epoch_rows.chunks(config.effective_batch(epoch_rows.len())) {
                let batch: Vec<Vec<bool>> = chunk.iter().map(|r| (*r).clone()).collect();
                recon += params.cd_update(
                    &batch,
                    k,
                    config.learning_rate,
                    config.weight_decay,
                    config.mean_field_negative,
                    &mut rng,
                );
                batches += 1;
            }
            if !params.is_finite() {
                return Err(Error::Divergence(format!(
                    "non-finite parameters at stage {stage}, epoch {epoch} (k = {k})"
                )));
            }
            let rbm = params.to_rbm()?;
            let eval = evaluate_accuracy(&MergedModel::from(rbm.clone()), task, config.eval_instances, &EvalMode::Exact, eval_seed)?;
            metrics.push(EpochMetrics {
                stage,
                k,
                epoch,
                reconstruction_error: recon / batches as f64,
                task_accuracy: eval.accuracy,
                log_likelihood: eval.log_likelihood.unwrap_or(f64::NAN),
            });
            let s = score(&eval);
            if best.as_ref().is_none_or(|b| better(s, b.0)) {
                best = Some((s, rbm, metrics.len() - 1));
            }
        }
        let improved = match (stage_start, best.as_ref()) {
            (None, _) => true,
            (Some(prev), Some(b)) => better(b.0, prev),
            _ => false,
        };
        stale = if improved { 0 } else { stale + 1 };
        k += 1;
        stage += 1;
    }
    let (_, rbm, best) = best.expect("at least one epoch ran");
    Ok(TrainOutcome { rbm, metrics, best })
}
