//! Clamped block Gibbs sampling.
//!
//! A sweep resamples every hidden unit given the visible layer, then every
//! free visible unit given the hidden layer. Random numbers come from
//! `ChaCha8Rng::seed_from_u64(seed)`; chain `i` of a multistart run uses
//! stream `i` of that generator, so chain 0 reproduces [`run_chain`].
//! Each sweep draws one uniform `f64` per hidden unit, then one per free
//! visible unit, both in index order.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::merge::MergedModel;
use crate::rbm::{BinaryState, Rbm};
use crate::scalar::{sigmoid, Scalar};

/// Partial assignment of visible terminals, by name.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClampMask {
    pub assignments: BTreeMap<String, bool>,
}

impl ClampMask {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, terminal: impl Into<String>, bit: bool) -> &mut Self {
        self.assignments.insert(terminal.into(), bit);
        self
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Per-unit clamp vector for `rbm`.
    pub fn resolve<T: Scalar>(&self, rbm: &Rbm<T>) -> Result<Vec<Option<bool>>> {
        let mut out = vec![None; rbm.n_visible()];
        for (name, &bit) in &self.assignments {
            out[rbm.require_index(name)?] = Some(bit);
        }
        Ok(out)
    }

    /// Like [`ClampMask::resolve`], but also accepts original component
    /// terminal names and adds the model's constant terminals.
    pub fn resolve_model<T: Scalar>(&self, model: &MergedModel<T>) -> Result<Vec<Option<bool>>> {
        let rbm = &model.rbm;
        let mut out = vec![None; rbm.n_visible()];
        let mut put = |name: &str, bit: bool| -> Result<()> {
            let i = rbm
                .visible_index(name)
                .or_else(|| model.terminal_map.get(name).copied())
                .ok_or_else(|| Error::UnknownTerminal(name.to_string()))?;
            match out[i] {
                Some(prev) if prev != bit => Err(Error::ConstantConflict(name.to_string())),
                _ => {
                    out[i] = Some(bit);
                    Ok(())
                }
            }
        };
        for (name, &bit) in &model.constants {
            put(name, bit)?;
        }
        for (name, &bit) in &self.assignments {
            put(name, bit)?;
        }
        Ok(out)
    }
}

fn check_clamp(n_visible: usize, clamp: &[Option<bool>]) -> Result<()> {
    if clamp.len() != n_visible {
        return Err(Error::DimensionMismatch {
            what: "clamp",
            expected: n_visible,
            found: clamp.len(),
        });
    }
    Ok(())
}

/// One block Gibbs sweep on the dense model, in place.
pub fn gibbs_sweep<T: Scalar, R: Rng + ?Sized>(
    rbm: &Rbm<T>,
    state: &mut BinaryState,
    clamp: &[Option<bool>],
    rng: &mut R,
) -> Result<()> {
    check_clamp(rbm.n_visible(), clamp)?;
    for (i, (c, &v)) in clamp.iter().zip(&state.visible).enumerate() {
        if matches!(c, Some(bit) if *bit != v) {
            return Err(Error::InconsistentClamp(rbm.visible_names()[i].clone()));
        }
    }
    let ph = rbm.hidden_conditional(&state.visible)?;
    if state.hidden.len() != ph.len() {
        return Err(Error::DimensionMismatch {
            what: "hidden state",
            expected: ph.len(),
            found: state.hidden.len(),
        });
    }
    for (h, p) in state.hidden.iter_mut().zip(ph) {
        *h = rng.random::<f64>() < p.as_f64();
    }
    let pv = rbm.visible_conditional(&state.hidden)?;
    for (i, p) in pv.into_iter().enumerate() {
        if clamp[i].is_none() {
            state.visible[i] = rng.random::<f64>() < p.as_f64();
        }
    }
    Ok(())
}

/// Sparse copy of an RBM for fast sweeps. Zero weights are dropped; sums
/// run in the same order as the dense routines, so results are identical.
#[derive(Clone, Debug)]
pub struct CompiledRbm<T> {
    rbm: Arc<Rbm<T>>,
    /// For each hidden unit, its nonzero `(visible, weight)` pairs.
    hidden_ptr: Vec<usize>,
    hidden_adj: Vec<(u32, T)>,
    /// For each visible unit, its nonzero `(hidden, weight)` pairs.
    visible_ptr: Vec<usize>,
    visible_adj: Vec<(u32, T)>,
}

impl<T: Scalar> CompiledRbm<T> {
    pub fn new(rbm: &Rbm<T>) -> Self {
        let (nv, nh) = (rbm.n_visible(), rbm.n_hidden());
        let mut visible_ptr = vec![0];
        let mut visible_adj = Vec::new();
        for i in 0..nv {
            for (j, &w) in rbm.weight_row(i).iter().enumerate() {
                if w != T::zero() {
                    visible_adj.push((j as u32, w));
                }
            }
            visible_ptr.push(visible_adj.len());
        }
        let mut hidden_ptr = vec![0];
        let mut hidden_adj = Vec::new();
        for j in 0..nh {
            for i in 0..nv {
                let w = rbm.weight(i, j);
                if w != T::zero() {
                    hidden_adj.push((i as u32, w));
                }
            }
            hidden_ptr.push(hidden_adj.len());
        }
        Self {
            rbm: Arc::new(rbm.clone()),
            hidden_ptr,
            hidden_adj,
            visible_ptr,
            visible_adj,
        }
    }

    pub fn rbm(&self) -> &Rbm<T> {
        &self.rbm
    }

    /// Fraction of nonzero weights.
    pub fn density(&self) -> f64 {
        let total = self.rbm.n_visible() * self.rbm.n_hidden();
        if total == 0 {
            0.0
        } else {
            self.visible_adj.len() as f64 / total as f64
        }
    }

    fn hidden_preactivation_into(&self, v: &[bool], out: &mut [T]) {
        let hb = self.rbm.hidden_bias();
        for (j, p) in out.iter_mut().enumerate() {
            let edges = &self.hidden_adj[self.hidden_ptr[j]..self.hidden_ptr[j + 1]];
            *p = edges
                .iter()
                .filter(|(i, _)| v[*i as usize])
                .fold(hb[j], |acc, &(_, w)| acc + w);
        }
    }

    fn visible_preactivation(&self, i: usize, h: &[bool]) -> T {
        let edges = &self.visible_adj[self.visible_ptr[i]..self.visible_ptr[i + 1]];
        edges
            .iter()
            .filter(|(j, _)| h[*j as usize])
            .fold(self.rbm.visible_bias()[i], |acc, &(_, w)| acc + w)
    }
}

/// A running Gibbs chain over a compiled model.
#[derive(Clone, Debug)]
pub struct Chain<'a, T> {
    model: &'a CompiledRbm<T>,
    clamp: Vec<Option<bool>>,
    free: Vec<usize>,
    state: BinaryState,
    pre: Vec<T>,
    rng: ChaCha8Rng,
}

impl<'a, T: Scalar> Chain<'a, T> {
    /// Starts a chain with free visible bits drawn uniformly at random.
    pub fn new(model: &'a CompiledRbm<T>, clamp: &[Option<bool>], seed: u64, stream: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let nv = model.rbm.n_visible();
        check_clamp(nv, clamp)?;
        let free: Vec<usize> = (0..nv).filter(|&i| clamp[i].is_none()).collect();
        let mut visible: Vec<bool> = clamp.iter().map(|c| c.unwrap_or(false)).collect();
        for &i in &free {
            visible[i] = rng.random::<bool>();
        }
        Self::from_state(model, clamp, BinaryState::new(visible, vec![false; model.rbm.n_hidden()]), rng)
    }

    /// Starts a chain from an explicit state with a caller-provided generator.
    pub fn from_state(
        model: &'a CompiledRbm<T>,
        clamp: &[Option<bool>],
        state: BinaryState,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        let rbm = &model.rbm;
        check_clamp(rbm.n_visible(), clamp)?;
        if state.visible.len() != rbm.n_visible() || state.hidden.len() != rbm.n_hidden() {
            return Err(Error::DimensionMismatch {
                what: "chain state",
                expected: rbm.n_visible() + rbm.n_hidden(),
                found: state.visible.len() + state.hidden.len(),
            });
        }
        for (i, c) in clamp.iter().enumerate() {
            if matches!(c, Some(bit) if *bit != state.visible[i]) {
                return Err(Error::InconsistentClamp(rbm.visible_names()[i].clone()));
            }
        }
        let mut pre = vec![T::zero(); rbm.n_hidden()];
        model.hidden_preactivation_into(&state.visible, &mut pre);
        Ok(Self {
            model,
            clamp: clamp.to_vec(),
            free: (0..rbm.n_visible()).filter(|&i| clamp[i].is_none()).collect(),
            state,
            pre,
            rng,
        })
    }

    pub fn sweep(&mut self) {
        for (h, &p) in self.state.hidden.iter_mut().zip(&self.pre) {
            *h = self.rng.random::<f64>() < sigmoid(p).as_f64();
        }
        for &i in &self.free {
            let p = sigmoid(self.model.visible_preactivation(i, &self.state.hidden));
            self.state.visible[i] = self.rng.random::<f64>() < p.as_f64();
        }
        self.model.hidden_preactivation_into(&self.state.visible, &mut self.pre);
    }

    pub fn state(&self) -> &BinaryState {
        &self.state
    }

    pub fn visible(&self) -> &[bool] {
        &self.state.visible
    }

    pub fn clamp(&self) -> &[Option<bool>] {
        &self.clamp
    }

    pub fn free_energy(&self) -> f64 {
        self.model
            .rbm
            .free_energy_from_preactivation(&self.state.visible, &self.pre)
            .as_f64()
    }
}

/// Visible-state counts over a chosen set of units.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Histogram {
    /// Visible units whose bits form each key, in key order.
    pub units: Vec<usize>,
    pub counts: BTreeMap<Vec<bool>, u64>,
    pub total: u64,
}

impl Histogram {
    pub fn new(units: Vec<usize>) -> Self {
        Self {
            units,
            ..Self::default()
        }
    }

    pub fn add(&mut self, key: Vec<bool>) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn observe(&mut self, visible: &[bool]) {
        let key = self.units.iter().map(|&u| visible[u]).collect();
        self.add(key);
    }

    /// Adds another histogram's counts.
    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.units != other.units {
            return Err(Error::InvalidArgument("histograms observe different units".into()));
        }
        for (k, &c) in &other.counts {
            *self.counts.entry(k.clone()).or_insert(0) += c;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn frequency(&self, key: &[bool]) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.get(key).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Entries by decreasing count, ties in key order.
    pub fn ranked(&self) -> Vec<(&Vec<bool>, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(k, &c)| (k, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        v
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "assignment,count")?;
        for (k, c) in &self.counts {
            writeln!(w, "{},{c}", bit_string(k))?;
        }
        Ok(())
    }
}

/// Bits as a `0`/`1` string, index 0 first.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Most frequent key; ties go to the lexicographically smallest key.
pub fn mode_estimate(h: &Histogram) -> Result<(Vec<bool>, u64)> {
    let mut best: Option<(&Vec<bool>, u64)> = None;
    for (k, &c) in &h.counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((k, c));
        }
    }
    best.filter(|_| h.total > 0)
        .map(|(k, c)| (k.clone(), c))
        .ok_or(Error::EmptyHistogram)
}

/// Settings for a single chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n_sweeps: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Keep every recorded visible vector in the trace.
    pub keep_states: bool,
    /// Units observed by the histogram; all free units when `None`.
    pub observed: Option<Vec<usize>>,
}

impl ChainConfig {
    pub fn new(n_sweeps: usize, seed: u64) -> Self {
        Self {
            n_sweeps,
            burn_in: 0,
            thin: 1,
            seed,
            keep_states: true,
            observed: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_sweeps <= self.burn_in {
            return Err(Error::InvalidArgument(format!(
                "n_sweeps ({}) must exceed burn_in ({})",
                self.n_sweeps, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidArgument("thin must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Recorded output of one chain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrace {
    pub seed: u64,
    /// Sweep number (1-based) of each record.
    pub steps: Vec<usize>,
    /// Recorded visible vectors; empty unless `keep_states` was set.
    pub states: Vec<Vec<bool>>,
    pub energy_trace: Vec<f64>,
}

impl ChainTrace {
    /// `0/1` trace of one visible unit, when states were kept.
    pub fn bit_trace(&self, unit: usize) -> Option<Vec<f64>> {
        if self.states.is_empty() && !self.steps.is_empty() {
            return None;
        }
        Some(self.states.iter().map(|s| if s[unit] { 1.0 } else { 0.0 }).collect())
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "step,free_energy")?;
        for (s, e) in self.steps.iter().zip(&self.energy_trace) {
            writeln!(w, "{s},{e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainRun {
    pub trace: ChainTrace,
    pub histogram: Histogram,
}

fn observed_units(nv: usize, clamp: &[Option<bool>], observed: Option<&[usize]>) -> Result<Vec<usize>> {
    match observed {
        None => Ok((0..nv).filter(|&i| clamp[i].is_none()).collect()),
        Some(units) => {
            if let Some(&bad) = units.iter().find(|&&u| u >= nv) {
                return Err(Error::InvalidArgument(format!("observed unit {bad} out of range")));
            }
            Ok(units.to_vec())
        }
    }
}

/// Runs `n_records` recorded samples after `burn_in` sweeps, calling
/// `record` with the sweep number and the chain.
fn drive<T: Scalar>(
    chain: &mut Chain<'_, T>,
    burn_in: usize,
    thin: usize,
    n_records: usize,
    mut record: impl FnMut(usize, &Chain<'_, T>),
) {
    for _ in 0..burn_in {
        chain.sweep();
    }
    let mut sweep = burn_in;
    for _ in 0..n_records {
        for _ in 0..thin {
            chain.sweep();
        }
        sweep += thin;
        record(sweep, chain);
    }
}

/// Runs one chain and records its trace and histogram.
pub fn run_chain<T: Scalar>(rbm: &Rbm<T>, clamp: &[Option<bool>], config: &ChainConfig) -> Result<ChainRun> {
    let compiled = CompiledRbm::new(rbm);
    run_compiled_chain(&compiled, clamp, config, 0)
}

fn run_compiled_chain<T: Scalar>(
    compiled: &CompiledRbm<T>,
    clamp: &[Option<bool>],
    config: &ChainConfig,
    stream: u64,
) -> Result<ChainRun> {
    config.validate()?;
    let nv = compiled.rbm.n_visible();
    check_clamp(nv, clamp)?;
    let units = observed_units(nv, clamp, config.observed.as_deref())?;
    let mut chain = Chain::new(compiled, clamp, config.seed, stream)?;
    let n_records = (config.n_sweeps - config.burn_in) / config.thin;
    let mut trace = ChainTrace {
        seed: config.seed,
        steps: Vec::with_capacity(n_records),
        states: Vec::new(),
        energy_trace: Vec::with_capacity(n_records),
    };
    let mut histogram = Histogram::new(units);
    drive(&mut chain, config.burn_in, config.thin, n_records, |sweep, c| {
        trace.steps.push(sweep);
        trace.energy_trace.push(c.free_energy());
        if config.keep_states {
            trace.states.push(c.visible().to_vec());
        }
        histogram.observe(c.visible());
    });
    Ok(ChainRun { trace, histogram })
}

/// Settings for a pooled multistart run.
#[derive(Clone, Debug, PartialEq)]
pub struct MultistartConfig {
    pub n_chains: usize,
    pub sweeps_per_chain: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub observed: Option<Vec<usize>>,
}

impl MultistartConfig {
    pub fn new(n_chains: usize, sweeps_per_chain: usize, seed: u64) -> Self {
        Self {
            n_chains,
            sweeps_per_chain,
            burn_in: 0,
            thin: 1,
            seed,
            observed: None,
        }
    }

    fn chain_config(&self) -> ChainConfig {
        ChainConfig {
            n_sweeps: self.sweeps_per_chain,
            burn_in: self.burn_in,
            thin: self.thin,
            seed: self.seed,
            keep_states: false,
            observed: self.observed.clone(),
        }
    }
}

/// Runs independent chains in parallel and pools their histograms.
pub fn multistart<T: Scalar>(rbm: &Rbm<T>, clamp: &[Option<bool>], config: &MultistartConfig) -> Result<Histogram> {
    Ok(multistart_runs(rbm, clamp, config)?
        .into_iter()
        .fold(None::<Histogram>, |acc, run| match acc {
            None => Some(run.histogram),
            Some(mut h) => {
                h.merge(&run.histogram).expect("same observed units");
                Some(h)
            }
        })
        .expect("at least one chain"))
}

/// Per-chain results of a multistart run, in chain order.
pub fn multistart_runs<T: Scalar>(
    rbm: &Rbm<T>,
    clamp: &[Option<bool>],
    config: &MultistartConfig,
) -> Result<Vec<ChainRun>> {
    if config.n_chains == 0 {
        return Err(Error::InvalidArgument("n_chains must be ≥ 1".into()));
    }
    let compiled = CompiledRbm::new(rbm);
    let chain_config = config.chain_config();
    (0..config.n_chains as u64)
        .into_par_iter()
        .map(|i| run_compiled_chain(&compiled, clamp, &chain_config, i))
        .collect()
}

/// Pooled histograms after each checkpoint number of samples.
///
/// Samples are pooled round-robin: pooled sample `t` is record `t / C`
/// of chain `t mod C`, so a checkpoint of `s` samples takes the first
/// `⌈(s − i) / C⌉` records of chain `i`.
pub fn pooled_checkpoints<T: Scalar>(
    compiled: &CompiledRbm<T>,
    clamp: &[Option<bool>],
    config: &MultistartConfig,
    checkpoints: &[usize],
) -> Result<Vec<Histogram>> {
    if config.n_chains == 0 || config.thin == 0 {
        return Err(Error::InvalidArgument("n_chains and thin must be ≥ 1".into()));
    }
    if checkpoints.is_empty() || checkpoints.contains(&0) {
        return Err(Error::InvalidArgument("checkpoints must be nonempty and ≥ 1".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be increasing".into()));
    }
    let nv = compiled.rbm.n_visible();
    check_clamp(nv, clamp)?;
    let units = observed_units(nv, clamp, config.observed.as_deref())?;
    let n_chains = config.n_chains;
    let last = *checkpoints.last().expect("nonempty");
    let keys: Vec<Vec<Vec<bool>>> = (0..n_chains as u64)
        .into_par_iter()
        .map(|i| {
            let mut chain = Chain::new(compiled, clamp, config.seed, i)?;
            let n = last.saturating_sub(i as usize).div_ceil(n_chains);
            let mut out = Vec::with_capacity(n);
            drive(&mut chain, config.burn_in, config.thin, n, |_, c| {
                out.push(units.iter().map(|&u| c.visible()[u]).collect());
            });
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut hist = Histogram::new(units);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut taken = 0;
    for &cp in checkpoints {
        while taken < cp {
            hist.add(keys[taken % n_chains][taken / n_chains].clone());
            taken += 1;
        }
        out.push(hist.clone());
    }
    Ok(out)
}

fn centered(trace: &[f64]) -> Result<Vec<f64>> {
    let mean = trace.iter().sum::<f64>() / trace.len() as f64;
    let x: Vec<f64> = trace.iter().map(|t| t - mean).collect();
    if x.iter().all(|&d| d == 0.0) {
        return Err(Error::ConstantTrace);
    }
    Ok(x)
}

/// `AR(k) = Σ_t (x_t − x̄)(x_{t+k} − x̄) / Σ_t (x_t − x̄)²` for `k = 0..=max_lag`,
/// by direct summation.
pub fn autocorrelation(trace: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if max_lag == 0 || trace.len() <= max_lag {
        return Err(Error::InvalidArgument(format!(
            "need trace length > max_lag ≥ 1, got length {} and max_lag {max_lag}",
            trace.len()
        )));
    }
    let x = centered(trace)?;
    let var: f64 = x.iter().map(|d| d * d).sum();
    Ok((0..=max_lag)
        .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / var)
        .collect())
}

/// Autocorrelation at every lag `0..len`, computed with an FFT.
pub fn autocorrelation_fft(trace: &[f64]) -> Result<Vec<f64>> {
    let x = centered(trace)?;
    let n = x.len();
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|&r| Complex::new(r, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let zero = buf[0].re;
    Ok(buf[..n].iter().map(|z| z.re / zero).collect())
}

/// Window constant for the self-consistent IAT window `M ≥ c·τ(M)`.
pub const IAT_WINDOW: f64 = 5.0;

/// Integrated autocorrelation time `τ = 1 + 2 Σ_{k=1}^{M} AR(k)`, with the
/// window `M` chosen as the smallest lag satisfying `M ≥ 5·τ(M)`.
pub fn integrated_autocorrelation_time(trace: &[f64]) -> Result<f64> {
    if trace.len() < 2 {
        return Err(Error::InvalidArgument("trace too short".into()));
    }
    let ar = autocorrelation_fft(trace)?;
    let mut tau = 1.0;
    for (m, r) in ar.iter().enumerate().skip(1) {
        tau += 2.0 * r;
        if m as f64 >= IAT_WINDOW * tau {
            return Ok(tau);
        }
    }
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use crate::exact::{exact_visible_distribution, gibbs_transition_matrix, SweepOrder};
    use crate::rbm::testing::random_rbm;
    use crate::rbm::bits_to_index;
    use crate::synthesis::{full_adder, gate, GateKind};
    use proptest::prelude::*;

    #[test]
    fn clamp_resolution() {
        let fa = full_adder::<f64>(12.0).unwrap();
        let mut m = ClampMask::new();
        m.set("A", true).set("xor1.in2", false);
        let c = m.resolve_model(&fa).unwrap();
        assert_eq!(c[fa.rbm.require_index("A").unwrap()], Some(true));
        assert_eq!(c[fa.rbm.require_index("B").unwrap()], Some(false));
        assert!(m.resolve(&fa.rbm).is_err());
        let mut bad = ClampMask::new();
        bad.set("nope", true);
        assert!(matches!(bad.resolve_model(&fa), Err(Error::UnknownTerminal(_))));
        let mut conflict = ClampMask::new();
        conflict.set("A", true).set("xor1.in1", false);
        assert!(conflict.resolve_model(&fa).is_err());
    }

    #[test]
    fn compiled_chain_matches_reference_sweep() {
        let rbm = random_rbm(5, 4, 1.5, 11);
        let clamp = [None, Some(true), None, None, Some(false)];
        let compiled = CompiledRbm::new(&rbm);
        let start = BinaryState::new(vec![false, true, true, false, false], vec![false; 4]);
        let mut chain = Chain::from_state(&compiled, &clamp, start.clone(), ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mut state = start;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            gibbs_sweep(&rbm, &mut state, &clamp, &mut rng).unwrap();
            chain.sweep();
            assert_eq!(chain.state(), &state);
            assert_eq!(chain.free_energy(), rbm.free_energy(&state.visible).unwrap());
        }
    }

    #[test]
    fn sweep_rejects_inconsistent_clamp() {
        let rbm = random_rbm(2, 1, 1.0, 1);
        let mut s = BinaryState::zeros(2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            gibbs_sweep(&rbm, &mut s, &[Some(true), None], &mut rng),
            Err(Error::InconsistentClamp(_))
        ));
    }

    #[test]
    fn fully_clamped_visible_is_invariant() {
        let rbm = random_rbm(3, 2, 2.0, 4);
        let clamp = [Some(true), Some(false), Some(true)];
        let mut s = BinaryState::new(vec![true, false, true], vec![false, false]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            gibbs_sweep(&rbm, &mut s, &clamp, &mut rng).unwrap();
            assert_eq!(s.visible, vec![true, false, true]);
        }
    }

    #[test]
    fn zero_model_gives_fair_coins() {
        let rbm = Rbm::<f64>::zeros(Rbm::<f64>::default_names(2), 2).unwrap();
        let run = run_chain(&rbm, &[None, None], &ChainConfig::new(40_000, 5)).unwrap();
        // chi-square with 3 degrees of freedom, 0.999 quantile 16.27
        let expected = 10_000.0;
        let chi2: f64 = crate::rbm::all_bit_vectors(2)
            .map(|k| {
                let c = run.histogram.counts.get(&k).copied().unwrap_or(0) as f64;
                (c - expected).powi(2) / expected
            })
            .sum();
        assert!(chi2 < 16.27, "chi2 {chi2}");
    }

    #[test]
    fn one_sweep_frequencies_match_transition_rows() {
        let rbm = random_rbm(2, 2, 1.0, 12);
        let op = gibbs_transition_matrix(&rbm, SweepOrder::HiddenFirst).unwrap();
        let compiled = CompiledRbm::new(&rbm);
        let start = BinaryState::new(vec![true, false], vec![false, true]);
        let x = (bits_to_index(&start.visible) | bits_to_index(&start.hidden) << 2) as usize;
        let trials = 40_000;
        let mut counts = [0u64; 16];
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..trials {
            let mut chain = Chain::from_state(&compiled, &[None, None], start.clone(), rng.clone()).unwrap();
            chain.sweep();
            rng = chain.rng.clone();
            let s = chain.state();
            counts[(bits_to_index(&s.visible) | bits_to_index(&s.hidden) << 2) as usize] += 1;
        }
        // a hidden-first sweep from x lands on y with P(x,y) where x's
        // hidden part is ignored; compare against the exact row
        for (y, &c) in counts.iter().enumerate() {
            let p = op.entry(x, y);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let f = c as f64 / trials as f64;
            assert!((f - p).abs() <= 3.0 * sigma + 1e-3, "state {y}: {f} vs {p}");
        }
    }

    #[test]
    fn and_gate_clamped_inference() {
        let g = gate::<f64>(GateKind::And, 12.0).unwrap();
        let mut m = ClampMask::new();
        m.set("in1", true).set("in2", true);
        let clamp = m.resolve(&g).unwrap();
        let run = run_chain(&g, &clamp, &ChainConfig::new(10_000, 1)).unwrap();
        assert!(run.histogram.frequency(&[true]) >= 0.99);
        for s in &run.trace.states {
            assert!(s[0] && s[1]);
        }
    }

    #[test]
    fn full_adder_histogram_approaches_exact() {
        // at c = 12 a single chain stays trapped for far longer than 10^5
        // sweeps; c = 4 mixes within a few sweeps
        let fa = full_adder::<f64>(4.0).unwrap();
        let clamp = vec![None; fa.rbm.n_visible()];
        let exact = exact_visible_distribution(&fa.rbm, None).unwrap();
        let run = run_chain(&fa.rbm, &clamp, &ChainConfig { keep_states: false, ..ChainConfig::new(100_000, 2) }).unwrap();
        let tv: f64 = 0.5
            * exact
                .support()
                .zip(&exact.probabilities)
                .map(|(v, &p)| (run.histogram.frequency(&v) - p).abs())
                .sum::<f64>();
        assert!(tv <= 0.05, "tv {tv}");
    }

    #[test]
    fn runs_are_deterministic() {
        let rbm = random_rbm(4, 3, 2.0, 5);
        let clamp = [None, Some(true), None, None];
        let cfg = ChainConfig {
            burn_in: 7,
            thin: 3,
            ..ChainConfig::new(500, 42)
        };
        let a = run_chain(&rbm, &clamp, &cfg).unwrap();
        let b = run_chain(&rbm, &clamp, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.steps.len(), (500 - 7) / 3);
        assert_eq!(a.trace.steps[0], 10);
        let c = run_chain(&rbm, &clamp, &ChainConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.trace.energy_trace, c.trace.energy_trace);
    }

    #[test]
    fn invalid_chain_parameters() {
        let rbm = random_rbm(2, 1, 1.0, 5);
        let clamp = [None, None];
        assert!(run_chain(&rbm, &clamp, &ChainConfig { burn_in: 10, ..ChainConfig::new(10, 0) }).is_err());
        assert!(run_chain(&rbm, &clamp, &ChainConfig { thin: 0, ..ChainConfig::new(10, 0) }).is_err());
        assert!(multistart(&rbm, &clamp, &MultistartConfig::new(0, 10, 0)).is_err());
    }

    #[test]
    fn single_chain_multistart_equals_run_chain() {
        let rbm = random_rbm(3, 3, 1.0, 6);
        let clamp = [None, None, Some(false)];
        let h = multistart(&rbm, &clamp, &MultistartConfig::new(1, 300, 8)).unwrap();
        let run = run_chain(&rbm, &clamp, &ChainConfig::new(300, 8)).unwrap();
        assert_eq!(h, run.histogram);
    }

    #[test]
    fn pooled_total_is_sum_of_chains() {
        let rbm = random_rbm(3, 2, 1.0, 7);
        let clamp = [None; 3];
        let cfg = MultistartConfig::new(4, 250, 1);
        let runs = multistart_runs(&rbm, &clamp, &cfg).unwrap();
        let pooled = multistart(&rbm, &clamp, &cfg).unwrap();
        assert_eq!(pooled.total, runs.iter().map(|r| r.histogram.total).sum::<u64>());
        assert_eq!(pooled.total, 1000);
        assert_eq!(pooled.counts.values().sum::<u64>(), pooled.total);
    }

    #[test]
    fn pooled_checkpoints_split_round_robin() {
        let rbm = random_rbm(3, 2, 1.0, 8);
        let clamp = [None; 3];
        let compiled = CompiledRbm::new(&rbm);
        let cfg = MultistartConfig::new(3, 0, 4);
        let hs = pooled_checkpoints(&compiled, &clamp, &cfg, &[1, 5, 10]).unwrap();
        assert_eq!(hs.iter().map(|h| h.total).collect::<Vec<_>>(), vec![1, 5, 10]);
        // 10 pooled samples = 4 + 3 + 3 records of chains 0, 1, 2
        let mut expected = Histogram::new(vec![0, 1, 2]);
        for (stream, records) in [(0u64, 4usize), (1, 3), (2, 3)] {
            let run = run_compiled_chain(&compiled, &clamp, &ChainConfig::new(records, 4), stream).unwrap();
            expected.merge(&run.histogram).unwrap();
        }
        assert_eq!(hs[2], expected);
        assert!(pooled_checkpoints(&compiled, &clamp, &cfg, &[]).is_err());
        assert!(pooled_checkpoints(&compiled, &clamp, &cfg, &[0, 3]).is_err());
        assert!(pooled_checkpoints(&compiled, &clamp, &cfg, &[3, 2]).is_err());
    }

    #[test]
    fn bimodal_toy_multistart_finds_both_modes() {
        let table = crate::synthesis::TruthTable::new(
            Rbm::<f64>::default_names(8),
            vec![vec![false; 8], vec![true; 8]],
        )
        .unwrap();
        let rbm = crate::synthesis::rbm_from_truth_table::<f64>(&table, 16.0).unwrap();
        let exact = exact_visible_distribution(&rbm, None).unwrap();
        let zeros = exact.probabilities[0];
        assert!((zeros - exact.probabilities[255]).abs() < 1e-12 && zeros > 0.45);
        let clamp = [None; 8];
        // states off both rows form a flat plateau that chains leave after
        // ~10^2 sweeps; once in a mode a chain stays, so the pooled split
        // follows which mode each of the 128 chains found first
        let cfg = MultistartConfig { burn_in: 500, ..MultistartConfig::new(128, 2000, 3) };
        let h = multistart(&rbm, &clamp, &cfg).unwrap();
        for key in [vec![false; 8], vec![true; 8]] {
            let f = h.frequency(&key);
            assert!((f - zeros).abs() < 0.12, "{f}");
        }
    }

    #[test]
    fn mode_tie_rule() {
        let mut h = Histogram::new(vec![0, 1]);
        assert!(matches!(mode_estimate(&h), Err(Error::EmptyHistogram)));
        h.add(vec![true, false]);
        assert_eq!(mode_estimate(&h).unwrap(), (vec![true, false], 1));
        for _ in 0..4 {
            h.add(vec![true, false]);
            h.add(vec![false, true]);
        }
        h.add(vec![false, true]);
        assert_eq!(mode_estimate(&h).unwrap(), (vec![false, true], 5));
    }

    #[test]
    fn full_adder_mode_under_clamp() {
        let fa = full_adder::<f64>(6.0).unwrap();
        let mut m = ClampMask::new();
        m.set("A", true).set("B", true).set("Cin", false);
        let clamp = m.resolve_model(&fa).unwrap();
        let observed = vec![fa.rbm.require_index("S").unwrap(), fa.rbm.require_index("Cout").unwrap()];
        let run = run_chain(&fa.rbm, &clamp, &ChainConfig { observed: Some(observed), ..ChainConfig::new(10_000, 4) }).unwrap();
        assert_eq!(mode_estimate(&run.histogram).unwrap().0, vec![false, true]);
    }

    #[test]
    fn autocorrelation_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise: Vec<f64> = (0..100_000).map(|_| rng.random::<f64>()).collect();
        let ar = autocorrelation(&noise, 10).unwrap();
        assert_eq!(ar[0], 1.0);
        assert!(ar[1..].iter().all(|r| r.abs() <= 0.02));
        let alt: Vec<f64> = (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let ar = autocorrelation(&alt, 2).unwrap();
        assert!((ar[1] + 1.0).abs() < 2e-3);
        assert!(matches!(autocorrelation(&[2.0; 10], 3), Err(Error::ConstantTrace)));
        assert!(autocorrelation(&alt[..3], 3).is_err());
        assert!(autocorrelation(&alt, 0).is_err());
    }

    #[test]
    fn fft_autocorrelation_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = 0.0;
        let ar1: Vec<f64> = (0..3000)
            .map(|_| {
                x = 0.9 * x + rng.random::<f64>() - 0.5;
                x
            })
            .collect();
        let direct = autocorrelation(&ar1, 50).unwrap();
        let fft = autocorrelation_fft(&ar1).unwrap();
        for k in 0..=50 {
            assert!((direct[k] - fft[k]).abs() < 1e-10);
        }
        // AR(1) with φ = 0.9 has τ = (1 + φ)/(1 − φ) = 19
        let tau = integrated_autocorrelation_time(&ar1).unwrap();
        assert!((10.0..30.0).contains(&tau), "tau {tau}");
        let noise: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        assert!((integrated_autocorrelation_time(&noise).unwrap() - 1.0).abs() < 0.1);
    }

    #[test]
    fn csv_exports() {
        let rbm = random_rbm(2, 1, 1.0, 3);
        let run = run_chain(&rbm, &[None, None], &ChainConfig::new(3, 1)).unwrap();
        let mut buf = Vec::new();
        run.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("step,free_energy\n1,"));
        let mut buf = Vec::new();
        run.histogram.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("assignment,count\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn clamp_is_never_violated(seed in 0u64..1000, mask in 0u8..32, bits in 0u8..32) {
            let rbm = random_rbm(5, 3, 3.0, seed);
            let clamp: Vec<Option<bool>> = (0..5)
                .map(|i| (mask >> i & 1 == 1).then_some(bits >> i & 1 == 1))
                .collect();
            let run = run_chain(&rbm, &clamp, &ChainConfig::new(200, seed)).unwrap();
            for s in &run.trace.states {
                for (c, &v) in clamp.iter().zip(s) {
                    prop_assert!(c.is_none_or(|b| b == v));
                }
            }
        }
    }
}
