//! Arithmetic and satisfiability tasks on composed models: integer
//! encoding, clamping, solving by exact enumeration or sampling, and
//! success-versus-samples curves.
//!
//! Clamping table (bus operands are little-endian integers):
//!
//! | operation       | clamped            | answer        |
//! |-----------------|--------------------|---------------|
//! | `add`           | A, B, Cin          | S, Cout       |
//! | `subtract`      | S, B, Cin (+ Cout) | A (+ Cout)    |
//! | `reverse_carry` | S, Cout, Cin       | A, B          |
//! | `multiply`      | A, B               | P             |
//! | `divide`        | P, A               | B             |
//! | `factor`        | P                  | A, B          |
//! | `sat`           | any variables      | free `x{k}`   |
//!
//! Subtraction leaves `Cout` free unless the task clamps it, so a borrow
//! (`S < B + Cin`) still has the unique answer `A = S − B − Cin mod 2^n`.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{exact_visible_distribution_with, Limits};
use crate::merge::MergedModel;
use crate::rbm::Rbm;
use crate::sampler::{pooled_checkpoints, ClampMask, CompiledRbm, Histogram, MultistartConfig};
use crate::scalar::Scalar;
use crate::synthesis::{bus_terminal, Cnf};

/// Little-endian bits of `x`.
pub fn encode_int(x: u64, n_bits: usize) -> Result<Vec<bool>> {
    if n_bits < 64 && x >> n_bits != 0 {
        return Err(Error::Overflow { value: x, bits: n_bits });
    }
    Ok((0..n_bits).map(|i| i < 64 && (x >> i) & 1 == 1).collect())
}

/// Integer from little-endian bits.
pub fn decode_int(bits: &[bool]) -> Result<u64> {
    if bits.iter().skip(64).any(|&b| b) {
        return Err(Error::InvalidArgument("value exceeds 64 bits".into()));
    }
    Ok(bits
        .iter()
        .take(64)
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | (u64::from(b) << i)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operation {
    Add,
    Subtract,
    ReverseCarry,
    Multiply,
    Divide,
    Factor,
    Sat,
}

impl Operation {
    pub const ALL: [Operation; 7] = [
        Operation::Add,
        Operation::Subtract,
        Operation::ReverseCarry,
        Operation::Multiply,
        Operation::Divide,
        Operation::Factor,
        Operation::Sat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Operation::Add => "add",
            Operation::Subtract => "subtract",
            Operation::ReverseCarry => "reverse_carry",
            Operation::Multiply => "multiply",
            Operation::Divide => "divide",
            Operation::Factor => "factor",
            Operation::Sat => "sat",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == name)
    }

    /// Operands that must be clamped.
    pub fn required(self) -> &'static [&'static str] {
        match self {
            Operation::Add => &["A", "B", "Cin"],
            Operation::Subtract => &["S", "B", "Cin"],
            Operation::ReverseCarry => &["S", "Cout", "Cin"],
            Operation::Multiply => &["A", "B"],
            Operation::Divide => &["P", "A"],
            Operation::Factor => &["P"],
            Operation::Sat => &[],
        }
    }

    /// Operands this operation may clamp.
    fn allowed(self) -> &'static [&'static str] {
        match self {
            Operation::Subtract => &["S", "B", "Cin", "Cout"],
            op => op.required(),
        }
    }

    fn is_adder(self) -> bool {
        matches!(self, Operation::Add | Operation::Subtract | Operation::ReverseCarry)
    }

    /// Answer operands, given what is clamped.
    fn answers(self, clamped: &BTreeMap<String, u64>) -> Vec<&'static str> {
        match self {
            Operation::Add => vec!["S", "Cout"],
            Operation::Subtract if clamped.contains_key("Cout") => vec!["A"],
            Operation::Subtract => vec!["A", "Cout"],
            Operation::ReverseCarry | Operation::Factor => vec!["A", "B"],
            Operation::Multiply => vec!["P"],
            Operation::Divide => vec!["B"],
            Operation::Sat => vec![],
        }
    }
}

/// Bit width of operand `name` for an `n`-bit task.
pub fn operand_width(name: &str, n: usize) -> usize {
    match name {
        "Cin" | "Cout" => 1,
        "P" => 2 * n,
        _ => n,
    }
}

/// An arithmetic or satisfiability problem for a composed model.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub operation: Operation,
    pub bit_width: usize,
    /// Clamped operands by name (`A`, `B`, `S`, `P`, `Cin`, `Cout`).
    #[serde(default)]
    pub operands: BTreeMap<String, u64>,
    /// Additional clamps on individual terminals.
    #[serde(default)]
    pub bits: BTreeMap<String, bool>,
    /// Expected answer values; factor pairs compare unordered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<BTreeMap<String, u64>>,
    /// Formula for `sat` tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cnf: Option<Cnf>,
}

/// A decoded answer: operand name → value.
pub type Assignment = BTreeMap<String, u64>;

impl TaskSpec {
    pub fn new(operation: Operation, bit_width: usize) -> Self {
        Self {
            operation,
            bit_width,
            operands: BTreeMap::new(),
            bits: BTreeMap::new(),
            expected: None,
            cnf: None,
        }
    }

    pub fn operand(mut self, name: &str, value: u64) -> Self {
        self.operands.insert(name.to_string(), value);
        self
    }

    pub fn expect(mut self, name: &str, value: u64) -> Self {
        self.expected.get_or_insert_with(BTreeMap::new).insert(name.to_string(), value);
        self
    }

    pub fn add(n: usize, a: u64, b: u64, cin: bool) -> Self {
        let sum = a + b + u64::from(cin);
        Self::new(Operation::Add, n)
            .operand("A", a)
            .operand("B", b)
            .operand("Cin", u64::from(cin))
            .expect("S", sum & mask(n))
            .expect("Cout", sum >> n)
    }

    /// Recover `A` from `S`, `B` and `Cin`, with `Cout` free.
    pub fn subtract(n: usize, s: u64, b: u64, cin: bool) -> Self {
        let diff = s.wrapping_sub(b).wrapping_sub(u64::from(cin));
        Self::new(Operation::Subtract, n)
            .operand("S", s)
            .operand("B", b)
            .operand("Cin", u64::from(cin))
            .expect("A", diff & mask(n))
            .expect("Cout", u64::from(s < b + u64::from(cin)))
    }

    pub fn reverse_carry(n: usize, s: u64, cout: bool, cin: bool) -> Self {
        Self::new(Operation::ReverseCarry, n)
            .operand("S", s)
            .operand("Cout", u64::from(cout))
            .operand("Cin", u64::from(cin))
    }

    pub fn multiply(n: usize, a: u64, b: u64) -> Self {
        Self::new(Operation::Multiply, n)
            .operand("A", a)
            .operand("B", b)
            .expect("P", a * b)
    }

    pub fn divide(n: usize, p: u64, a: u64) -> Self {
        let mut t = Self::new(Operation::Divide, n).operand("P", p).operand("A", a);
        if a != 0 && p.is_multiple_of(a) {
            t = t.expect("B", p / a);
        }
        t
    }

    pub fn factor(n: usize, p: u64) -> Self {
        Self::new(Operation::Factor, n).operand("P", p)
    }

    pub fn sat(cnf: Cnf) -> Self {
        let mut t = Self::new(Operation::Sat, 0);
        t.cnf = Some(cnf);
        t
    }

    pub fn validate(&self) -> Result<()> {
        let op = self.operation;
        if op != Operation::Sat && self.bit_width == 0 {
            return Err(Error::InvalidArgument("bit_width must be ≥ 1".into()));
        }
        if op == Operation::Sat && self.cnf.is_none() {
            return Err(Error::InvalidArgument("sat task needs a formula".into()));
        }
        for name in op.required() {
            if !self.operands.contains_key(*name) {
                return Err(Error::InvalidArgument(format!(
                    "{} requires operand {name}",
                    op.name()
                )));
            }
        }
        for (name, &value) in &self.operands {
            if !op.allowed().contains(&name.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "{} does not clamp operand {name}",
                    op.name()
                )));
            }
            encode_int(value, operand_width(name, self.bit_width))?;
        }
        Ok(())
    }

    /// Answer operands for this task.
    pub fn answer_operands(&self) -> Vec<&'static str> {
        self.operation.answers(&self.operands)
    }

    fn value(&self, answer: &Assignment, name: &str) -> Option<u64> {
        answer.get(name).or_else(|| self.operands.get(name)).copied()
    }

    /// Whether `answer` solves the task.
    pub fn is_correct(&self, answer: &Assignment) -> bool {
        let n = self.bit_width as u32;
        let get = |name: &str| self.value(answer, name);
        let valid = match self.operation {
            op if op.is_adder() => match (get("A"), get("B"), get("Cin"), get("S"), get("Cout")) {
                (Some(a), Some(b), Some(cin), Some(s), Some(cout)) => {
                    a as u128 + b as u128 + cin as u128 == s as u128 + ((cout as u128) << n)
                }
                _ => false,
            },
            Operation::Sat => {
                let cnf = self.cnf.as_ref().expect("validated");
                let assignment: Option<Vec<bool>> = (1..=cnf.n_vars)
                    .map(|k| {
                        let name = format!("x{k}");
                        answer
                            .get(&name)
                            .map(|&v| v == 1)
                            .or_else(|| self.bits.get(&name).copied())
                    })
                    .collect();
                assignment.is_some_and(|a| cnf.is_satisfied(&a))
            }
            _ => match (get("A"), get("B"), get("P")) {
                (Some(a), Some(b), Some(p)) => {
                    a as u128 * b as u128 == p as u128
                        && (self.operation != Operation::Factor || (a != 1 && b != 1))
                }
                _ => false,
            },
        };
        valid
            && self.expected.as_ref().is_none_or(|exp| {
                if self.operation == Operation::Factor {
                    let mut want = [exp.get("A").copied(), exp.get("B").copied()];
                    let mut got = [get("A"), get("B")];
                    want.sort();
                    got.sort();
                    want == got
                } else {
                    exp.iter().all(|(k, &v)| get(k) == Some(v))
                }
            })
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Visible units a task reads its answer from, grouped per operand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerLayout {
    pub operands: Vec<(String, Vec<usize>)>,
}

impl AnswerLayout {
    pub fn units(&self) -> Vec<usize> {
        self.operands.iter().flat_map(|(_, u)| u.iter().copied()).collect()
    }

    /// Decodes a histogram key laid out as [`AnswerLayout::units`].
    pub fn decode(&self, key: &[bool]) -> Assignment {
        let mut out = Assignment::new();
        let mut pos = 0;
        for (name, units) in &self.operands {
            let bits = &key[pos..pos + units.len()];
            out.insert(name.clone(), decode_int(bits).expect("operand fits in 64 bits"));
            pos += units.len();
        }
        out
    }
}

fn operand_terminals<T: Scalar>(rbm: &Rbm<T>, name: &str, n: usize) -> Result<Vec<String>> {
    match name {
        "Cin" | "Cout" => {
            rbm.require_index(name)?;
            Ok(vec![name.to_string()])
        }
        _ => (0..operand_width(name, n))
            .map(|i| bus_terminal(rbm, name, i))
            .collect(),
    }
}

/// Clamp vector (including model constants) and answer layout for a task.
pub fn prepare<T: Scalar>(model: &MergedModel<T>, task: &TaskSpec) -> Result<(Vec<Option<bool>>, AnswerLayout)> {
    task.validate()?;
    let rbm = &model.rbm;
    let n = task.bit_width;
    let mut mask = ClampMask::new();
    for (name, &value) in &task.operands {
        let terms = operand_terminals(rbm, name, n)?;
        for (t, bit) in terms.into_iter().zip(encode_int(value, operand_width(name, n))?) {
            mask.set(t, bit);
        }
    }
    for (t, &bit) in &task.bits {
        mask.set(t.clone(), bit);
    }
    let clamp = mask.resolve_model(model)?;
    let operands = if task.operation == Operation::Sat {
        let cnf = task.cnf.as_ref().expect("validated");
        (1..=cnf.n_vars)
            .map(|k| format!("x{k}"))
            .filter(|name| !task.bits.contains_key(name))
            .map(|name| Ok((name.clone(), vec![rbm.require_index(&name)?])))
            .collect::<Result<_>>()?
    } else {
        task.answer_operands()
            .into_iter()
            .map(|name| {
                let units = operand_terminals(rbm, name, n)?
                    .iter()
                    .map(|t| rbm.require_index(t))
                    .collect::<Result<_>>()?;
                Ok((name.to_string(), units))
            })
            .collect::<Result<_>>()?
    };
    Ok((clamp, AnswerLayout { operands }))
}

/// Candidate answers with their weights (sample counts or probabilities).
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Best answer, or `None` when every candidate was filtered out.
    pub answer: Option<Assignment>,
    /// Weight of the best answer divided by the total weight.
    pub frequency: f64,
    pub correct: bool,
    /// Candidates by decreasing weight (ties in key order).
    pub ranked: Vec<(Assignment, f64)>,
    pub total: f64,
}

/// Aggregates weighted answer keys into a solution. Factor tasks pool
/// `(a, b)` with `(b, a)` and drop the trivial pairs containing 1.
fn summarize(task: &TaskSpec, layout: &AnswerLayout, entries: impl Iterator<Item = (Vec<bool>, f64)>) -> Solution {
    let mut pooled: BTreeMap<Vec<bool>, (Assignment, f64)> = BTreeMap::new();
    let mut total = 0.0;
    for (key, w) in entries {
        total += w;
        let mut answer = layout.decode(&key);
        let mut key = key;
        if task.operation == Operation::Factor {
            let (a, b) = (answer["A"], answer["B"]);
            if a == 1 || b == 1 {
                continue;
            }
            if a > b {
                answer.insert("A".into(), b);
                answer.insert("B".into(), a);
                let w = task.bit_width;
                key = crate::rbm::index_to_bits(b, w);
                key.extend(crate::rbm::index_to_bits(a, w));
            }
        }
        pooled.entry(key).or_insert_with(|| (answer, 0.0)).1 += w;
    }
    // key order breaks ties, matching `mode_estimate`
    let mut ranked: Vec<(Vec<bool>, Assignment, f64)> =
        pooled.into_iter().map(|(k, (a, w))| (k, a, w)).collect();
    ranked.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| x.0.cmp(&y.0)));
    let ranked: Vec<(Assignment, f64)> = ranked.into_iter().map(|(_, a, w)| (a, w)).collect();
    let answer = ranked.first().map(|(a, _)| a.clone());
    let frequency = ranked.first().map_or(0.0, |(_, w)| if total > 0.0 { w / total } else { 0.0 });
    let correct = answer.as_ref().is_some_and(|a| task.is_correct(a));
    Solution {
        answer,
        frequency,
        correct,
        ranked,
        total,
    }
}

fn histogram_solution(task: &TaskSpec, layout: &AnswerLayout, h: &Histogram) -> Result<Solution> {
    if h.total == 0 {
        return Err(Error::EmptyHistogram);
    }
    Ok(summarize(task, layout, h.counts.iter().map(|(k, &c)| (k.clone(), c as f64))))
}

/// Exact conditional distribution of the answer operands; the mode of
/// that marginal is the answer.
pub fn solve_exact<T: Scalar>(model: &MergedModel<T>, task: &TaskSpec, limits: Limits) -> Result<Solution> {
    let (clamp, layout) = prepare(model, task)?;
    let dist = exact_visible_distribution_with(&model.rbm, Some(&clamp), limits)?;
    let units = layout.units();
    let free: Vec<usize> = units.iter().copied().filter(|u| clamp[*u].is_none()).collect();
    let marginal = dist.marginal(&free)?;
    let entries = (0..marginal.len()).map(|k| {
        let v = marginal.state(k);
        (units.iter().map(|&u| v[u]).collect::<Vec<bool>>(), marginal.probabilities[k])
    });
    Ok(summarize(task, &layout, entries))
}

/// Settings for sampled solving: `samples` counts recorded sweeps pooled
/// over all chains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub n_chains: usize,
    pub samples: usize,
    #[serde(default)]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    pub seed: u64,
}

fn one() -> usize {
    1
}

impl SolveSettings {
    pub fn new(n_chains: usize, samples: usize, seed: u64) -> Self {
        Self {
            n_chains,
            samples,
            burn_in: 0,
            thin: 1,
            seed,
        }
    }

    fn multistart(&self, seed: u64, observed: Vec<usize>) -> MultistartConfig {
        MultistartConfig {
            n_chains: self.n_chains,
            sweeps_per_chain: 0,
            burn_in: self.burn_in,
            thin: self.thin,
            seed,
            observed: Some(observed),
        }
    }
}

/// Solves a task by pooled multistart sampling.
pub fn solve<T: Scalar>(model: &MergedModel<T>, task: &TaskSpec, settings: &SolveSettings) -> Result<Solution> {
    let compiled = CompiledRbm::new(&model.rbm);
    let (clamp, layout) = prepare(model, task)?;
    let cfg = settings.multistart(settings.seed, layout.units());
    let h = pooled_checkpoints(&compiled, &clamp, &cfg, &[settings.samples])?;
    histogram_solution(task, &layout, &h[0])
}

/// One point of a success curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub samples: usize,
    pub accuracy: f64,
}

/// Per-task correctness at each checkpoint.
pub fn checkpoint_outcomes<T: Scalar>(
    model: &MergedModel<T>,
    tasks: &[TaskSpec],
    checkpoints: &[usize],
    settings: &SolveSettings,
) -> Result<Vec<Vec<bool>>> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument("no checkpoints".into()));
    }
    if let Some(&cp) = checkpoints.iter().find(|&&cp| cp > settings.samples) {
        return Err(Error::CheckpointOutOfRange {
            checkpoint: cp,
            collected: settings.samples,
        });
    }
    let compiled = CompiledRbm::new(&model.rbm);
    tasks
        .par_iter()
        .enumerate()
        .map(|(i, task)| {
            let (clamp, layout) = prepare(model, task)?;
            let cfg = settings.multistart(settings.seed.wrapping_add(i as u64), layout.units());
            pooled_checkpoints(&compiled, &clamp, &cfg, checkpoints)?
                .iter()
                .map(|h| Ok(histogram_solution(task, &layout, h)?.correct))
                .collect()
        })
        .collect()
}

/// Fraction of tasks whose mode is correct after each checkpoint. Task
/// `i` samples with seed `settings.seed + i`.
pub fn success_curve<T: Scalar>(
    model: &MergedModel<T>,
    tasks: &[TaskSpec],
    checkpoints: &[usize],
    settings: &SolveSettings,
) -> Result<Vec<CurvePoint>> {
    if tasks.is_empty() {
        return Err(Error::InvalidArgument("no tasks".into()));
    }
    let outcomes = checkpoint_outcomes(model, tasks, checkpoints, settings)?;
    Ok(checkpoints
        .iter()
        .enumerate()
        .map(|(c, &samples)| CurvePoint {
            samples,
            accuracy: outcomes.iter().filter(|o| o[c]).count() as f64 / tasks.len() as f64,
        })
        .collect())
}

pub fn write_curve_csv(mut w: impl Write, curve: &[CurvePoint]) -> io::Result<()> {
    writeln!(w, "samples,accuracy")?;
    for p in curve {
        writeln!(w, "{},{}", p.samples, p.accuracy)?;
    }
    Ok(())
}

/// `count` random instances of an arithmetic operation (`Cin = 0`).
pub fn random_tasks(operation: Operation, n: usize, count: usize, seed: u64) -> Result<Vec<TaskSpec>> {
    if n == 0 || n > 32 {
        return Err(Error::InvalidArgument(format!("bit width {n} outside 1..=32")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = 1u64 << n;
    (0..count)
        .map(|_| {
            let a = rng.random_range(0..top);
            let b = rng.random_range(0..top);
            Ok(match operation {
                Operation::Add => TaskSpec::add(n, a, b, false),
                Operation::Subtract => TaskSpec::subtract(n, (a + b) & mask(n), b, false),
                Operation::ReverseCarry => TaskSpec::reverse_carry(n, (a + b) & mask(n), a + b >= top, false),
                Operation::Multiply => TaskSpec::multiply(n, a, b),
                Operation::Divide => {
                    let a = a.max(1);
                    TaskSpec::divide(n, a * b, a)
                }
                Operation::Factor | Operation::Sat => {
                    return Err(Error::InvalidArgument(format!(
                        "no random generator for {}",
                        operation.name()
                    )))
                }
            })
        })
        .collect()
}

fn is_prime(x: u64) -> bool {
    x >= 2 && (2..).take_while(|d| d * d <= x).all(|d| !x.is_multiple_of(d))
}

/// Products `p·q` of two primes in `[lo, hi]` whose factors fit in `n` bits.
pub fn semiprimes(lo: u64, hi: u64, n: usize) -> Vec<(u64, u64, u64)> {
    (lo..=hi)
        .filter_map(|x| {
            let p = (2..).take_while(|d| d * d <= x).find(|d| x % d == 0)?;
            let q = x / p;
            (is_prime(q) && q < (1 << n)).then_some((x, p, q))
        })
        .collect()
}

/// `count` factoring tasks drawn without replacement from the semiprimes in
/// `[lo, hi]`, in increasing order.
pub fn factor_tasks(lo: u64, hi: u64, n: usize, count: usize, seed: u64) -> Result<Vec<TaskSpec>> {
    let all = semiprimes(lo, hi, n);
    if count > all.len() {
        return Err(Error::InvalidArgument(format!(
            "only {} semiprimes in [{lo}, {hi}]",
            all.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, all.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked
        .into_iter()
        .map(|i| {
            let (x, p, q) = all[i];
            TaskSpec::factor(n, x).expect("A", p).expect("B", q)
        })
        .collect())
}
