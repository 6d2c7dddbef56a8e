//! The restricted Boltzmann machine data model and its elementary
//! energy, free-energy and conditional computations.
//!
//! Units are binary `{0, 1}`. With visible state `v`, hidden state `h`,
//! weights `W` (visible × hidden), visible biases `b` and hidden biases `a`:
//!
//! ```text
//! E(v, h) = -vᵀWh - aᵀh - bᵀv
//! F(v)    = -bᵀv - Σ_j log(1 + exp(a_j + (Wᵀv)_j))
//! ```

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{sigmoid, softplus, Scalar};

/// Joint assignment of visible and hidden units.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryState {
    pub visible: Vec<bool>,
    pub hidden: Vec<bool>,
}

impl BinaryState {
    pub fn new(visible: Vec<bool>, hidden: Vec<bool>) -> Self {
        Self { visible, hidden }
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            visible: vec![false; n_visible],
            hidden: vec![false; n_hidden],
        }
    }
}

/// A restricted Boltzmann machine with named visible terminals.
///
/// Weights are stored row-major: row `i` holds visible unit `i`'s
/// connections to every hidden unit. Instances are immutable once built;
/// every transformation returns a new value.
#[derive(Clone, Debug)]
pub struct Rbm<T> {
    n_visible: usize,
    n_hidden: usize,
    weights: Vec<T>,
    visible_bias: Vec<T>,
    hidden_bias: Vec<T>,
    visible_names: Vec<String>,
    index: HashMap<String, usize>,
}

impl<T: PartialEq> PartialEq for Rbm<T> {
    fn eq(&self, other: &Self) -> bool {
        self.n_visible == other.n_visible
            && self.n_hidden == other.n_hidden
            && self.weights == other.weights
            && self.visible_bias == other.visible_bias
            && self.hidden_bias == other.hidden_bias
            && self.visible_names == other.visible_names
    }
}

impl<T: Scalar> Rbm<T> {
    /// Builds a model from a flat row-major weight buffer.
    pub fn from_flat(
        weights: Vec<T>,
        visible_bias: Vec<T>,
        hidden_bias: Vec<T>,
        visible_names: Vec<String>,
    ) -> Result<Self> {
        let n_visible = visible_bias.len();
        let n_hidden = hidden_bias.len();
        if n_visible == 0 {
            return Err(Error::NoVisibleUnits);
        }
        if visible_names.len() != n_visible {
            return Err(Error::DimensionMismatch {
                what: "visible_names",
                expected: n_visible,
                found: visible_names.len(),
            });
        }
        if weights.len() != n_visible * n_hidden {
            return Err(Error::DimensionMismatch {
                what: "weights",
                expected: n_visible * n_hidden,
                found: weights.len(),
            });
        }
        for (what, xs) in [
            ("weights", &weights),
            ("visible_bias", &visible_bias),
            ("hidden_bias", &hidden_bias),
        ] {
            if xs.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(what.to_string()));
            }
        }
        let mut index = HashMap::with_capacity(n_visible);
        for (i, name) in visible_names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Self {
            n_visible,
            n_hidden,
            weights,
            visible_bias,
            hidden_bias,
            visible_names,
            index,
        })
    }

    /// Builds a model from one weight row per visible unit.
    pub fn new(
        weights: Vec<Vec<T>>,
        visible_bias: Vec<T>,
        hidden_bias: Vec<T>,
        visible_names: Vec<String>,
    ) -> Result<Self> {
        let n_hidden = hidden_bias.len();
        if weights.len() != visible_bias.len() {
            return Err(Error::DimensionMismatch {
                what: "weight rows",
                expected: visible_bias.len(),
                found: weights.len(),
            });
        }
        let mut flat = Vec::with_capacity(weights.len() * n_hidden);
        for row in weights {
            if row.len() != n_hidden {
                return Err(Error::DimensionMismatch {
                    what: "weight row",
                    expected: n_hidden,
                    found: row.len(),
                });
            }
            flat.extend(row);
        }
        Self::from_flat(flat, visible_bias, hidden_bias, visible_names)
    }

    /// All-zero parameters over the given terminals.
    pub fn zeros(visible_names: Vec<String>, n_hidden: usize) -> Result<Self> {
        let n = visible_names.len();
        Self::from_flat(
            vec![T::zero(); n * n_hidden],
            vec![T::zero(); n],
            vec![T::zero(); n_hidden],
            visible_names,
        )
    }

    /// Terminals named `v0, v1, ...`.
    pub fn default_names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.n_hidden + j]
    }

    pub fn weight_row(&self, i: usize) -> &[T] {
        &self.weights[i * self.n_hidden..(i + 1) * self.n_hidden]
    }

    pub fn visible_bias(&self) -> &[T] {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &[T] {
        &self.hidden_bias
    }

    pub fn visible_names(&self) -> &[String] {
        &self.visible_names
    }

    pub fn visible_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require_index(&self, name: &str) -> Result<usize> {
        self.visible_index(name)
            .ok_or_else(|| Error::UnknownTerminal(name.to_string()))
    }

    /// Decomposes into `(weights, visible_bias, hidden_bias, names)`.
    pub fn into_parts(self) -> (Vec<T>, Vec<T>, Vec<T>, Vec<String>) {
        (
            self.weights,
            self.visible_bias,
            self.hidden_bias,
            self.visible_names,
        )
    }

    /// Same parameters, new terminal names.
    pub fn with_names(&self, names: Vec<String>) -> Result<Self> {
        Self::from_flat(
            self.weights.clone(),
            self.visible_bias.clone(),
            self.hidden_bias.clone(),
            names,
        )
    }

    /// Converts the parameters to another scalar type.
    pub fn cast<U: Scalar>(&self) -> Rbm<U> {
        let conv = |xs: &[T]| xs.iter().map(|x| U::of(x.as_f64())).collect::<Vec<U>>();
        Rbm {
            n_visible: self.n_visible,
            n_hidden: self.n_hidden,
            weights: conv(&self.weights),
            visible_bias: conv(&self.visible_bias),
            hidden_bias: conv(&self.hidden_bias),
            visible_names: self.visible_names.clone(),
            index: self.index.clone(),
        }
    }

    fn check_visible(&self, v: &[bool]) -> Result<()> {
        if v.len() != self.n_visible {
            return Err(Error::DimensionMismatch {
                what: "visible state",
                expected: self.n_visible,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_hidden(&self, h: &[bool]) -> Result<()> {
        if h.len() != self.n_hidden {
            return Err(Error::DimensionMismatch {
                what: "hidden state",
                expected: self.n_hidden,
                found: h.len(),
            });
        }
        Ok(())
    }

    /// `a + Wᵀv`.
    pub fn hidden_preactivation(&self, v: &[bool]) -> Result<Vec<T>> {
        self.check_visible(v)?;
        let mut pre = self.hidden_bias.clone();
        for (i, _) in v.iter().enumerate().filter(|(_, &on)| on) {
            for (p, &w) in pre.iter_mut().zip(self.weight_row(i)) {
                *p = *p + w;
            }
        }
        Ok(pre)
    }

    /// `b + Wh`.
    pub fn visible_preactivation(&self, h: &[bool]) -> Result<Vec<T>> {
        self.check_hidden(h)?;
        Ok((0..self.n_visible)
            .map(|i| {
                self.weight_row(i)
                    .iter()
                    .zip(h)
                    .filter(|(_, &on)| on)
                    .fold(self.visible_bias[i], |acc, (&w, _)| acc + w)
            })
            .collect())
    }

    /// Energy of a joint state.
    pub fn energy(&self, state: &BinaryState) -> Result<T> {
        self.check_visible(&state.visible)?;
        self.check_hidden(&state.hidden)?;
        let mut e = T::zero();
        for (i, _) in state.visible.iter().enumerate().filter(|(_, &on)| on) {
            e = e - self.visible_bias[i];
            for (j, &w) in self.weight_row(i).iter().enumerate() {
                if state.hidden[j] {
                    e = e - w;
                }
            }
        }
        for (j, &a) in self.hidden_bias.iter().enumerate() {
            if state.hidden[j] {
                e = e - a;
            }
        }
        Ok(e)
    }

    /// Free energy of a visible state with the hidden layer summed out.
    pub fn free_energy(&self, v: &[bool]) -> Result<T> {
        let pre = self.hidden_preactivation(v)?;
        Ok(self.free_energy_from_preactivation(v, &pre))
    }

    /// Free energy given an already computed `a + Wᵀv`.
    pub(crate) fn free_energy_from_preactivation(&self, v: &[bool], pre: &[T]) -> T {
        let linear = v
            .iter()
            .zip(&self.visible_bias)
            .filter(|(&on, _)| on)
            .fold(T::zero(), |acc, (_, &b)| acc + b);
        -linear - pre.iter().map(|&x| softplus(x)).sum::<T>()
    }

    /// `p(h_j = 1 | v)` for every hidden unit.
    pub fn hidden_conditional(&self, v: &[bool]) -> Result<Vec<T>> {
        Ok(self
            .hidden_preactivation(v)?
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    /// `p(v_i = 1 | h)` for every visible unit.
    pub fn visible_conditional(&self, h: &[bool]) -> Result<Vec<T>> {
        Ok(self
            .visible_preactivation(h)?
            .into_iter()
            .map(sigmoid)
            .collect())
    }

    /// Largest absolute parameter value.
    pub fn max_abs_parameter(&self) -> T {
        self.weights
            .iter()
            .chain(&self.visible_bias)
            .chain(&self.hidden_bias)
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Serializes to the interchange JSON document.
    pub fn to_json(&self) -> String {
        let doc = RbmDocument {
            visible: self
                .visible_names
                .iter()
                .zip(&self.visible_bias)
                .map(|(name, b)| VisibleEntry {
                    name: name.clone(),
                    bias: b.as_f64(),
                })
                .collect(),
            hidden_bias: self.hidden_bias.iter().map(|x| x.as_f64()).collect(),
            weights: (0..self.n_visible)
                .map(|i| self.weight_row(i).iter().map(|x| x.as_f64()).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: RbmDocument = serde_json::from_str(text)?;
        let (names, vb): (Vec<_>, Vec<_>) = doc
            .visible
            .into_iter()
            .map(|e| (e.name, T::of(e.bias)))
            .unzip();
        let rows = doc
            .weights
            .into_iter()
            .map(|r| r.into_iter().map(T::of).collect())
            .collect();
        Self::new(
            rows,
            vb,
            doc.hidden_bias.into_iter().map(T::of).collect(),
            names,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.to_json();
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct VisibleEntry {
    name: String,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RbmDocument {
    visible: Vec<VisibleEntry>,
    hidden_bias: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

/// Iterates all bit vectors of length `n`, little-endian in the counter.
pub fn all_bit_vectors(n: usize) -> impl Iterator<Item = Vec<bool>> {
    assert!(n < 64, "enumeration of {n} bits is not supported");
    (0u64..(1u64 << n)).map(move |k| index_to_bits(k, n))
}

pub fn index_to_bits(k: u64, n: usize) -> Vec<bool> {
    (0..n).map(|i| (k >> i) & 1 == 1).collect()
}

pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i))
}
