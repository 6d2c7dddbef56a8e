//! Brute-force analysis of small models: exact visible distributions,
//! KL divergences, the maximum energy gap `Δ`, the geometric convergence
//! bound of block Gibbs sampling, and the Gibbs transition operator itself.
//!
//! Distances: `tv_distance` is the total variation distance `½‖μ − ν‖₁`
//! and `l1_distance` is `‖μ − ν‖₁ ∈ [0, 2]`. The convergence bound is
//! stated as `TV(μPⁿ, π) ≤ ½‖μ − π‖₁ (1 − e^{−2Δ})ⁿ`.

use std::cmp::Ordering;

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rbm::{bits_to_index, index_to_bits, BinaryState, Rbm};
use crate::scalar::{softplus, Scalar};

/// Size limits for enumeration routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_free_visible: usize,
    pub max_hidden: usize,
    /// Visible plus hidden units, for routines over joint states.
    pub max_joint: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_free_visible: 24,
            max_hidden: 30,
            max_joint: 20,
        }
    }
}

impl Limits {
    /// No practical cap on hidden units; the free-energy route is linear in them.
    pub fn wide_hidden() -> Self {
        Self {
            max_hidden: usize::MAX,
            ..Self::default()
        }
    }
}

/// Exact distribution over the free visible units of a model.
///
/// State `k` assigns bit `i` of `k` to `free_units[i]`; clamped units take
/// their values from `template`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub free_units: Vec<usize>,
    pub template: Vec<bool>,
    pub probabilities: Vec<f64>,
    /// `log Σ exp(−F(v))` over the support.
    pub log_partition: f64,
}

impl ExactDistribution {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn partition_function(&self) -> f64 {
        self.log_partition.exp()
    }

    /// Free-unit bits of state `k`.
    pub fn free_bits(&self, k: usize) -> Vec<bool> {
        index_to_bits(k as u64, self.free_units.len())
    }

    /// Full visible vector of state `k`.
    pub fn state(&self, k: usize) -> Vec<bool> {
        let mut v = self.template.clone();
        for (i, &u) in self.free_units.iter().enumerate() {
            v[u] = (k >> i) & 1 == 1;
        }
        v
    }

    /// Full visible vectors in support order.
    pub fn support(&self) -> impl Iterator<Item = Vec<bool>> + '_ {
        (0..self.len()).map(|k| self.state(k))
    }

    pub fn index_of(&self, visible: &[bool]) -> Option<usize> {
        let bits: Vec<bool> = self.free_units.iter().map(|&u| visible[u]).collect();
        let k = bits_to_index(&bits) as usize;
        (self.state(k) == visible).then_some(k)
    }

    /// Total probability of states satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&[bool]) -> bool) -> f64 {
        self.support()
            .zip(&self.probabilities)
            .filter(|(v, _)| pred(v))
            .map(|(_, &p)| p)
            .sum()
    }

    /// Marginal over a subset of the free units.
    pub fn marginal(&self, units: &[usize]) -> Result<ExactDistribution> {
        let positions: Vec<usize> = units
            .iter()
            .map(|u| {
                self.free_units.iter().position(|f| f == u).ok_or_else(|| {
                    Error::InvalidArgument(format!("unit {u} is not free in this distribution"))
                })
            })
            .collect::<Result<_>>()?;
        let mut probs = vec![0.0; 1 << units.len()];
        for (k, &p) in self.probabilities.iter().enumerate() {
            let m = positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &pos)| acc | (((k >> pos) & 1) << i));
            probs[m] += p;
        }
        Ok(ExactDistribution {
            free_units: units.to_vec(),
            template: self.template.clone(),
            probabilities: probs,
            log_partition: self.log_partition,
        })
    }

    /// Most probable state; ties go to the lexicographically smallest
    /// free-bit vector.
    pub fn mode(&self) -> (usize, f64) {
        let n = self.free_units.len();
        let lex = |k: usize| reverse_bits(k, n);
        let mut best = 0;
        for k in 1..self.len() {
            match self.probabilities[k].partial_cmp(&self.probabilities[best]) {
                Some(Ordering::Greater) => best = k,
                Some(Ordering::Equal) if lex(k) < lex(best) => best = k,
                _ => {}
            }
        }
        (best, self.probabilities[best])
    }

    /// Uniform distribution over the states of this support satisfying `pred`.
    pub fn uniform_where(&self, pred: impl Fn(&[bool]) -> bool) -> Result<ExactDistribution> {
        let mask: Vec<bool> = self.support().map(|v| pred(&v)).collect();
        let count = mask.iter().filter(|&&m| m).count();
        if count == 0 {
            return Err(Error::InvalidArgument("no state satisfies the predicate".into()));
        }
        Ok(ExactDistribution {
            free_units: self.free_units.clone(),
            template: self.template.clone(),
            probabilities: mask
                .iter()
                .map(|&m| if m { 1.0 / count as f64 } else { 0.0 })
                .collect(),
            log_partition: (count as f64).ln(),
        })
    }
}

fn reverse_bits(k: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| acc | (((k >> i) & 1) << (n - 1 - i)))
}

/// Exact distribution of the free visible units given `clamp`
/// (`clamp[i] = Some(bit)` fixes unit `i`).
pub fn exact_visible_distribution<T: Scalar>(
    rbm: &Rbm<T>,
    clamp: Option<&[Option<bool>]>,
) -> Result<ExactDistribution> {
    exact_visible_distribution_with(rbm, clamp, Limits::default())
}

pub fn exact_visible_distribution_with<T: Scalar>(
    rbm: &Rbm<T>,
    clamp: Option<&[Option<bool>]>,
    limits: Limits,
) -> Result<ExactDistribution> {
    let nv = rbm.n_visible();
    let (free_units, template): (Vec<usize>, Vec<bool>) = match clamp {
        None => ((0..nv).collect(), vec![false; nv]),
        Some(c) => {
            if c.len() != nv {
                return Err(Error::DimensionMismatch {
                    what: "clamp",
                    expected: nv,
                    found: c.len(),
                });
            }
            (
                (0..nv).filter(|&i| c[i].is_none()).collect(),
                c.iter().map(|x| x.unwrap_or(false)).collect(),
            )
        }
    };
    if free_units.len() > limits.max_free_visible {
        return Err(Error::StateSpaceTooLarge {
            units: free_units.len(),
            limit: limits.max_free_visible,
        });
    }
    if rbm.n_hidden() > limits.max_hidden {
        return Err(Error::StateSpaceTooLarge {
            units: rbm.n_hidden(),
            limit: limits.max_hidden,
        });
    }
    let log_weights = negative_free_energies(rbm, &free_units, &template);
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut probabilities: Vec<f64> = log_weights.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(ExactDistribution {
        free_units,
        template,
        probabilities,
        log_partition: max + total.ln(),
    })
}

/// `−F(v)` for every completion of `template`, visited in Gray-code order
/// so each step updates the hidden pre-activations by a single row.
fn negative_free_energies<T: Scalar>(rbm: &Rbm<T>, free: &[usize], template: &[bool]) -> Vec<f64> {
    const REFRESH: usize = 4096;
    let k = free.len();
    let mut out = vec![0.0; 1 << k];
    let mut v = template.to_vec();
    for &u in free {
        v[u] = false;
    }
    let mut pre: Vec<f64> = rbm
        .hidden_preactivation(&v)
        .expect("template has model dimensions")
        .into_iter()
        .map(Scalar::as_f64)
        .collect();
    let vb: Vec<f64> = rbm.visible_bias().iter().map(|x| x.as_f64()).collect();
    let mut linear: f64 = v.iter().zip(&vb).filter(|(&on, _)| on).map(|(_, b)| b).sum();
    for step in 0..(1usize << k) {
        if step > 0 {
            let bit = step.trailing_zeros() as usize;
            let u = free[bit];
            v[u] = !v[u];
            if step % REFRESH == 0 {
                pre = rbm
                    .hidden_preactivation(&v)
                    .expect("dimensions checked")
                    .into_iter()
                    .map(Scalar::as_f64)
                    .collect();
                linear = v.iter().zip(&vb).filter(|(&on, _)| on).map(|(_, b)| b).sum();
            } else {
                let sign = if v[u] { 1.0 } else { -1.0 };
                for (p, w) in pre.iter_mut().zip(rbm.weight_row(u)) {
                    *p += sign * w.as_f64();
                }
                linear += sign * vb[u];
            }
        }
        let gray = step ^ (step >> 1);
        out[gray] = linear + pre.iter().map(|&x| softplus(x)).sum::<f64>();
    }
    out
}

/// `Σ q log(q / p)` with `0 log 0 = 0`.
pub fn kl_divergence(q: &ExactDistribution, p: &ExactDistribution) -> Result<f64> {
    if q.free_units != p.free_units || q.len() != p.len() || q.template != p.template {
        return Err(Error::SupportMismatch);
    }
    let mut kl = 0.0;
    for (k, (&qk, &pk)) in q.probabilities.iter().zip(&p.probabilities).enumerate() {
        if qk > 0.0 {
            if pk <= 0.0 {
                return Err(Error::NotAbsolutelyContinuous(k));
            }
            kl += qk * (qk / pk).ln();
        }
    }
    Ok(kl.max(0.0))
}

pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * l1_distance(a, b)
}

fn check_joint<T: Scalar>(rbm: &Rbm<T>, limit: usize) -> Result<()> {
    let units = rbm.n_visible() + rbm.n_hidden();
    if units > limit {
        return Err(Error::StateSpaceTooLarge { units, limit });
    }
    Ok(())
}

/// `max E − min E` over all joint states. Visible states are enumerated;
/// for each one the hidden extremes are taken in closed form.
pub fn delta_exact<T: Scalar>(rbm: &Rbm<T>) -> Result<f64> {
    delta_exact_with(rbm, Limits::default())
}

pub fn delta_exact_with<T: Scalar>(rbm: &Rbm<T>, limits: Limits) -> Result<f64> {
    check_joint(rbm, limits.max_joint)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in crate::rbm::all_bit_vectors(rbm.n_visible()) {
        let pre = rbm.hidden_preactivation(&v)?;
        let linear: f64 = v
            .iter()
            .zip(rbm.visible_bias())
            .filter(|(&on, _)| on)
            .map(|(_, b)| b.as_f64())
            .sum();
        let gain: f64 = pre.iter().map(|p| p.as_f64().max(0.0)).sum();
        let loss: f64 = pre.iter().map(|p| p.as_f64().min(0.0)).sum();
        lo = lo.min(-linear - gain);
        hi = hi.max(-linear - loss);
    }
    Ok(hi - lo)
}

/// Sum of absolute parameter values, an upper bound on `Δ`.
pub fn delta_bound<T: Scalar>(rbm: &Rbm<T>) -> f64 {
    rbm.weights()
        .iter()
        .chain(rbm.visible_bias())
        .chain(rbm.hidden_bias())
        .map(|x| x.as_f64().abs())
        .sum()
}

/// `½ · initial_l1 · (1 − e^{−2Δ})ⁿ`.
pub fn convergence_bound(delta: f64, initial_l1: f64, steps: u32) -> Result<f64> {
    if delta.is_nan() || delta < 0.0 || delta.is_infinite() {
        return Err(Error::InvalidArgument(format!("delta must be ≥ 0, got {delta}")));
    }
    if !(0.0..=2.0).contains(&initial_l1) {
        return Err(Error::InvalidArgument(format!(
            "initial distance must lie in [0, 2], got {initial_l1}"
        )));
    }
    Ok(0.5 * initial_l1 * (1.0 - (-2.0 * delta).exp()).powi(steps as i32))
}

/// Exact joint distribution over `(v, h)`, indexed `v | h << n_visible`.
pub fn exact_joint_distribution<T: Scalar>(rbm: &Rbm<T>, max_joint: usize) -> Result<Vec<f64>> {
    check_joint(rbm, max_joint)?;
    let (nv, nh) = (rbm.n_visible(), rbm.n_hidden());
    let mut neg_e = Vec::with_capacity(1 << (nv + nh));
    for x in 0..(1u64 << (nv + nh)) {
        let s = BinaryState::new(index_to_bits(x, nv), index_to_bits(x >> nv, nh));
        neg_e.push(-rbm.energy(&s)?.as_f64());
    }
    let max = neg_e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = neg_e.iter().map(|x| (x - max).exp()).collect();
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= z);
    Ok(p)
}

/// Which layer a block Gibbs transition resamples first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepOrder {
    /// `P = P_v P_h`: visible given hidden, then hidden given visible.
    VisibleFirst,
    /// `P = P_h P_v`, the order used by the sampler's sweep.
    HiddenFirst,
}

/// The block Gibbs transition over joint states, stored in factored form.
///
/// States are indexed `v | h << n_visible`. The dense matrix is never
/// needed to apply the operator; [`GibbsTransition::dense`] builds it for
/// tiny models.
#[derive(Clone, Debug)]
pub struct GibbsTransition {
    n_visible: usize,
    n_hidden: usize,
    order: SweepOrder,
    /// `p(v | h)` at `h << n_visible | v`.
    visible_given_hidden: Vec<f64>,
    /// `p(h | v)` at `v << n_hidden | h`.
    hidden_given_visible: Vec<f64>,
}

/// Joint-unit limit for the transition operator.
pub const MAX_TRANSITION_UNITS: usize = 14;
/// Joint-unit limit for materializing the dense transition matrix.
pub const MAX_DENSE_UNITS: usize = 12;
const SCHUR_MAX_ITER: usize = 10_000;

fn layer_table(probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    (0..(1u64 << n))
        .map(|k| {
            probs
                .iter()
                .enumerate()
                .map(|(i, &p)| if (k >> i) & 1 == 1 { p } else { 1.0 - p })
                .product()
        })
        .collect()
}

/// Builds the Gibbs transition operator of a small model.
pub fn gibbs_transition_matrix<T: Scalar>(rbm: &Rbm<T>, order: SweepOrder) -> Result<GibbsTransition> {
    check_joint(rbm, MAX_TRANSITION_UNITS)?;
    let (nv, nh) = (rbm.n_visible(), rbm.n_hidden());
    let mut vgh = Vec::with_capacity(1 << (nv + nh));
    for h in 0..(1u64 << nh) {
        let probs: Vec<f64> = rbm
            .visible_conditional(&index_to_bits(h, nh))?
            .into_iter()
            .map(Scalar::as_f64)
            .collect();
        vgh.extend(layer_table(&probs));
    }
    let mut hgv = Vec::with_capacity(1 << (nv + nh));
    for v in 0..(1u64 << nv) {
        let probs: Vec<f64> = rbm
            .hidden_conditional(&index_to_bits(v, nv))?
            .into_iter()
            .map(Scalar::as_f64)
            .collect();
        hgv.extend(layer_table(&probs));
    }
    Ok(GibbsTransition {
        n_visible: nv,
        n_hidden: nh,
        order,
        visible_given_hidden: vgh,
        hidden_given_visible: hgv,
    })
}

impl GibbsTransition {
    pub fn n_states(&self) -> usize {
        1 << (self.n_visible + self.n_hidden)
    }

    pub fn order(&self) -> SweepOrder {
        self.order
    }

    fn split(&self, x: usize) -> (usize, usize) {
        (x & ((1 << self.n_visible) - 1), x >> self.n_visible)
    }

    fn p_v(&self, v: usize, h: usize) -> f64 {
        self.visible_given_hidden[(h << self.n_visible) | v]
    }

    fn p_h(&self, h: usize, v: usize) -> f64 {
        self.hidden_given_visible[(v << self.n_hidden) | h]
    }

    /// Transition probability from joint state `x` to `y`.
    pub fn entry(&self, x: usize, y: usize) -> f64 {
        let (xv, xh) = self.split(x);
        let (yv, yh) = self.split(y);
        match self.order {
            SweepOrder::VisibleFirst => self.p_v(yv, xh) * self.p_h(yh, yv),
            SweepOrder::HiddenFirst => self.p_h(yh, xv) * self.p_v(yv, yh),
        }
    }

    pub fn row(&self, x: usize) -> Vec<f64> {
        (0..self.n_states()).map(|y| self.entry(x, y)).collect()
    }

    fn resample_visible(&self, mu: &[f64]) -> Vec<f64> {
        let nvs = 1 << self.n_visible;
        let mut out = vec![0.0; mu.len()];
        for h in 0..(1 << self.n_hidden) {
            let mass: f64 = mu[h * nvs..(h + 1) * nvs].iter().sum();
            for v in 0..nvs {
                out[h * nvs + v] = mass * self.p_v(v, h);
            }
        }
        out
    }

    fn resample_hidden(&self, mu: &[f64]) -> Vec<f64> {
        let nvs = 1 << self.n_visible;
        let mut out = vec![0.0; mu.len()];
        for v in 0..nvs {
            let mass: f64 = (0..(1 << self.n_hidden)).map(|h| mu[h * nvs + v]).sum();
            for h in 0..(1 << self.n_hidden) {
                out[h * nvs + v] = mass * self.p_h(h, v);
            }
        }
        out
    }

    /// `μP` for a row distribution `μ` over joint states.
    pub fn apply(&self, mu: &[f64]) -> Vec<f64> {
        assert_eq!(mu.len(), self.n_states(), "distribution length");
        match self.order {
            SweepOrder::VisibleFirst => self.resample_hidden(&self.resample_visible(mu)),
            SweepOrder::HiddenFirst => self.resample_visible(&self.resample_hidden(mu)),
        }
    }

    /// Dense row-stochastic matrix.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let units = self.n_visible + self.n_hidden;
        if units > MAX_DENSE_UNITS {
            return Err(Error::StateSpaceTooLarge {
                units,
                limit: MAX_DENSE_UNITS,
            });
        }
        let n = self.n_states();
        Ok(DMatrix::from_fn(n, n, |x, y| self.entry(x, y)))
    }

    /// Second largest eigenvalue modulus of the dense matrix.
    pub fn slem(&self) -> Result<f64> {
        let m = self.dense()?;
        // the unbounded QR iteration can cycle forever on near-deterministic
        // chains at machine precision; 1e-12 converges on those
        let schur = [f64::EPSILON, 1e-12]
            .into_iter()
            .find_map(|eps| Schur::try_new(m.clone(), eps, SCHUR_MAX_ITER))
            .ok_or_else(|| Error::NoConvergence("eigenvalue iteration".into()))?;
        let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        Ok(moduli.get(1).copied().unwrap_or(0.0))
    }
}

/// One row of a bound-curve report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayPoint {
    pub step: u32,
    pub tv_observed: f64,
    pub tv_bound: f64,
}

/// Observed `TV(μPⁿ, π)` against the convergence bound for `n = 0..=steps`.
pub fn tv_decay<T: Scalar>(
    rbm: &Rbm<T>,
    start: &[f64],
    steps: u32,
    order: SweepOrder,
    delta: f64,
) -> Result<Vec<DecayPoint>> {
    let op = gibbs_transition_matrix(rbm, order)?;
    let pi = exact_joint_distribution(rbm, MAX_TRANSITION_UNITS)?;
    if start.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            what: "start distribution",
            expected: pi.len(),
            found: start.len(),
        });
    }
    let initial = l1_distance(start, &pi).min(2.0);
    let mut mu = start.to_vec();
    let mut out = Vec::with_capacity(steps as usize + 1);
    for n in 0..=steps {
        if n > 0 {
            mu = op.apply(&mu);
        }
        out.push(DecayPoint {
            step: n,
            tv_observed: tv_distance(&mu, &pi),
            tv_bound: convergence_bound(delta, initial, n)?,
        });
    }
    Ok(out)
}
