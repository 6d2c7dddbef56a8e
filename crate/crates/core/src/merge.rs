//! Combining RBMs by identifying visible units.
//!
//! Merging visible unit `k` of `A` with unit `l` of `B` stacks the two
//! weight matrices block-diagonally, sums rows `k` and `l` into one row
//! and adds their biases. Hidden units are never merged. The energy of
//! the merged model is exactly the sum of the component energies, so its
//! distribution is the product of the components' distributions
//! restricted to states where identified units agree.
//!
//! [`compose`] generalizes the pairwise operation to a netlist of many
//! components where one wire may feed several terminals.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rbm::Rbm;
use crate::scalar::Scalar;

/// A composed model plus the bookkeeping needed to address it.
#[derive(Clone, Debug, PartialEq)]
pub struct MergedModel<T> {
    pub rbm: Rbm<T>,
    /// Every original `component.terminal` name, mapped to its merged
    /// visible index.
    pub terminal_map: BTreeMap<String, usize>,
    /// Terminals that must be clamped to a fixed bit during inference.
    pub constants: BTreeMap<String, bool>,
}

impl<T: Scalar> From<Rbm<T>> for MergedModel<T> {
    fn from(rbm: Rbm<T>) -> Self {
        let terminal_map = rbm
            .visible_names()
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self {
            rbm,
            terminal_map,
            constants: BTreeMap::new(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    terminal_map: BTreeMap<String, usize>,
    #[serde(default)]
    constants: BTreeMap<String, bool>,
}

impl<T: Scalar> MergedModel<T> {
    /// Path of the terminal-map sidecar that accompanies a model file.
    pub fn sidecar_path(model_path: &Path) -> PathBuf {
        let stem = model_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        model_path.with_file_name(format!("{stem}.terminals.json"))
    }

    pub fn sidecar_json(&self) -> String {
        let doc = Sidecar {
            terminal_map: self.terminal_map.clone(),
            constants: self.constants.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("sidecar serializes")
    }

    /// Writes the model JSON and its sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.rbm.save(path)?;
        let mut text = self.sidecar_json();
        text.push('\n');
        fs::write(Self::sidecar_path(path), text)?;
        Ok(())
    }

    /// Loads a model file, picking up its sidecar when one exists.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rbm = Rbm::<T>::load(path)?;
        let sidecar = Self::sidecar_path(path);
        if sidecar.exists() {
            let doc: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar)?)?;
            for name in doc.constants.keys() {
                rbm.require_index(name)?;
            }
            Ok(Self {
                rbm,
                terminal_map: doc.terminal_map,
                constants: doc.constants,
            })
        } else {
            Ok(Self::from(rbm))
        }
    }
}

/// Places `a` and `b` side by side with no shared units.
pub fn disjoint_union<T: Scalar>(a: &Rbm<T>, b: &Rbm<T>) -> Result<Rbm<T>> {
    let nh = a.n_hidden() + b.n_hidden();
    let mut w = Vec::with_capacity((a.n_visible() + b.n_visible()) * nh);
    for i in 0..a.n_visible() {
        w.extend_from_slice(a.weight_row(i));
        w.extend(std::iter::repeat_n(T::zero(), b.n_hidden()));
    }
    for i in 0..b.n_visible() {
        w.extend(std::iter::repeat_n(T::zero(), a.n_hidden()));
        w.extend_from_slice(b.weight_row(i));
    }
    let vb = a.visible_bias().iter().chain(b.visible_bias()).copied().collect();
    let hb = a.hidden_bias().iter().chain(b.hidden_bias()).copied().collect();
    let names: Vec<String> = a
        .visible_names()
        .iter()
        .chain(b.visible_names())
        .cloned()
        .collect();
    Rbm::from_flat(w, vb, hb, names).map_err(|e| match e {
        Error::DuplicateName(n) => Error::NameCollision(n),
        e => e,
    })
}

/// Merges `b` into `a`, identifying each `(terminal of a, terminal of b)`.
///
/// The result lists `a`'s units first, then `b`'s unmerged units, and has
/// `a.n_hidden() + b.n_hidden()` hidden units. Merged units keep `a`'s name.
pub fn merge_pair<T: Scalar>(
    a: &Rbm<T>,
    b: &Rbm<T>,
    pairs: &[(&str, &str)],
) -> Result<Rbm<T>> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("merge needs at least one pair".into()));
    }
    // partner[l] = k when b's unit l merges into a's unit k
    let mut partner: Vec<Option<usize>> = vec![None; b.n_visible()];
    let mut used_a = vec![false; a.n_visible()];
    for &(ta, tb) in pairs {
        let k = a.require_index(ta)?;
        let l = b.require_index(tb)?;
        if std::mem::replace(&mut used_a[k], true) {
            return Err(Error::DuplicateTerminal(ta.to_string()));
        }
        if partner[l].replace(k).is_some() {
            return Err(Error::DuplicateTerminal(tb.to_string()));
        }
    }
    let (ra, rb) = (a.n_hidden(), b.n_hidden());
    let mut rows: Vec<Vec<T>> = (0..a.n_visible())
        .map(|i| {
            let mut row = a.weight_row(i).to_vec();
            row.resize(ra + rb, T::zero());
            row
        })
        .collect();
    let mut vb = a.visible_bias().to_vec();
    let mut names = a.visible_names().to_vec();
    for l in 0..b.n_visible() {
        match partner[l] {
            Some(k) => {
                rows[k][ra..].copy_from_slice(b.weight_row(l));
                vb[k] = vb[k] + b.visible_bias()[l];
            }
            None => {
                let mut row = vec![T::zero(); ra];
                row.extend_from_slice(b.weight_row(l));
                rows.push(row);
                vb.push(b.visible_bias()[l]);
                names.push(b.visible_names()[l].clone());
            }
        }
    }
    let hb = a.hidden_bias().iter().chain(b.hidden_bias()).copied().collect();
    Rbm::new(rows, vb, hb, names).map_err(|e| match e {
        Error::DuplicateName(n) => Error::NameCollision(n),
        e => e,
    })
}

/// Identifies two terminals of one model. `t1` survives in place; `t2`'s
/// row and bias are added into it and `t2` is removed.
pub fn tie_terminals<T: Scalar>(rbm: &Rbm<T>, t1: &str, t2: &str) -> Result<Rbm<T>> {
    let i1 = rbm.require_index(t1)?;
    let i2 = rbm.require_index(t2)?;
    if i1 == i2 {
        return Err(Error::SameTerminal(t1.to_string()));
    }
    let mut rows = Vec::with_capacity(rbm.n_visible() - 1);
    let mut vb = Vec::with_capacity(rbm.n_visible() - 1);
    let mut names = Vec::with_capacity(rbm.n_visible() - 1);
    for i in (0..rbm.n_visible()).filter(|&i| i != i2) {
        let mut row = rbm.weight_row(i).to_vec();
        let mut bias = rbm.visible_bias()[i];
        if i == i1 {
            for (x, &y) in row.iter_mut().zip(rbm.weight_row(i2)) {
                *x = *x + y;
            }
            bias = bias + rbm.visible_bias()[i2];
        }
        rows.push(row);
        vb.push(bias);
        names.push(rbm.visible_names()[i].clone());
    }
    Rbm::new(rows, vb, rbm.hidden_bias().to_vec(), names)
}

/// Recipe for a composed model: components, wires between their
/// terminals, public names, and constant terminals.
///
/// Terminals are addressed as `component_id.terminal`.
#[derive(Clone, Debug, Default)]
pub struct Netlist<T> {
    pub components: Vec<(String, MergedModel<T>)>,
    pub connections: Vec<(String, String)>,
    pub exports: BTreeMap<String, String>,
    pub constants: BTreeMap<String, bool>,
}

impl<T: Scalar> Netlist<T> {
    pub fn new() -> Self {
        Self {
            components: Vec::new(),
            connections: Vec::new(),
            exports: BTreeMap::new(),
            constants: BTreeMap::new(),
        }
    }

    pub fn component(&mut self, id: impl Into<String>, model: impl Into<MergedModel<T>>) -> &mut Self {
        self.components.push((id.into(), model.into()));
        self
    }

    pub fn connect(&mut self, a: impl Into<String>, b: impl Into<String>) -> &mut Self {
        self.connections.push((a.into(), b.into()));
        self
    }

    pub fn export(&mut self, terminal: impl Into<String>, name: impl Into<String>) -> &mut Self {
        self.exports.insert(terminal.into(), name.into());
        self
    }

    pub fn constant(&mut self, terminal: impl Into<String>, bit: bool) -> &mut Self {
        self.constants.insert(terminal.into(), bit);
        self
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // the smaller index is the root, keeping classes ordered by first member
        if ra < rb {
            self.0[rb] = ra;
        } else {
            self.0[ra] = rb;
        }
    }
}

/// Composes a netlist into one RBM.
///
/// Merged units are ordered by the position of their first member in the
/// concatenation of all components, which makes the result independent of
/// connection order. A merged unit takes its export name when one is
/// given, else the lexicographically smallest member name.
pub fn compose<T: Scalar>(netlist: &Netlist<T>) -> Result<MergedModel<T>> {
    let mut offsets = HashMap::new();
    let mut global_names: Vec<String> = Vec::new();
    let mut global_index: HashMap<String, usize> = HashMap::new();
    let mut hidden_offsets = Vec::with_capacity(netlist.components.len());
    let mut total_hidden = 0;
    for (id, model) in &netlist.components {
        if id.is_empty() || id.contains('.') {
            return Err(Error::InvalidArgument(format!("bad component id `{id}`")));
        }
        if offsets.insert(id.clone(), global_names.len()).is_some() {
            return Err(Error::DuplicateComponent(id.clone()));
        }
        for name in model.rbm.visible_names() {
            let full = format!("{id}.{name}");
            global_index.insert(full.clone(), global_names.len());
            global_names.push(full);
        }
        hidden_offsets.push(total_hidden);
        total_hidden += model.rbm.n_hidden();
    }
    if global_names.is_empty() {
        return Err(Error::NoVisibleUnits);
    }
    let lookup = |t: &str| {
        global_index
            .get(t)
            .copied()
            .ok_or_else(|| Error::DanglingEndpoint(t.to_string()))
    };

    let mut uf = UnionFind((0..global_names.len()).collect());
    for (a, b) in &netlist.connections {
        let (ia, ib) = (lookup(a)?, lookup(b)?);
        uf.union(ia, ib);
    }

    // merged index per class root, in order of first member
    let mut class_of = vec![0usize; global_names.len()];
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for g in 0..global_names.len() {
        let root = uf.find(g);
        let slot = *root_slot.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        members[slot].push(g);
        class_of[g] = slot;
    }
    let n_visible = members.len();

    let mut export_name: Vec<Option<String>> = vec![None; n_visible];
    for (term, public) in &netlist.exports {
        let slot = class_of[lookup(term)?];
        match &export_name[slot] {
            Some(existing) if existing != public => {
                return Err(Error::ExportCollision(public.clone()))
            }
            _ => export_name[slot] = Some(public.clone()),
        }
    }
    let names: Vec<String> = members
        .iter()
        .zip(export_name)
        .map(|(m, export)| {
            export.unwrap_or_else(|| {
                m.iter()
                    .map(|&g| &global_names[g])
                    .min()
                    .expect("class is nonempty")
                    .clone()
            })
        })
        .collect();

    let mut weights = vec![T::zero(); n_visible * total_hidden];
    let mut vb = vec![T::zero(); n_visible];
    let mut hb = Vec::with_capacity(total_hidden);
    let mut g = 0;
    for (c, (_, model)) in netlist.components.iter().enumerate() {
        let rbm = &model.rbm;
        let h0 = hidden_offsets[c];
        for i in 0..rbm.n_visible() {
            let slot = class_of[g];
            let row = &mut weights[slot * total_hidden + h0..slot * total_hidden + h0 + rbm.n_hidden()];
            for (x, &w) in row.iter_mut().zip(rbm.weight_row(i)) {
                *x = *x + w;
            }
            vb[slot] = vb[slot] + rbm.visible_bias()[i];
            g += 1;
        }
        hb.extend_from_slice(rbm.hidden_bias());
    }
    let rbm = Rbm::from_flat(weights, vb, hb, names).map_err(|e| match e {
        Error::DuplicateName(n) => Error::ExportCollision(n),
        e => e,
    })?;

    let terminal_map: BTreeMap<String, usize> = global_names
        .iter()
        .enumerate()
        .map(|(g, n)| (n.clone(), class_of[g]))
        .collect();

    let mut constants: BTreeMap<String, bool> = BTreeMap::new();
    let mut set_constant = |slot: usize, bit: bool, origin: &str| -> Result<()> {
        let name = rbm.visible_names()[slot].clone();
        match constants.insert(name, bit) {
            Some(prev) if prev != bit => Err(Error::ConstantConflict(origin.to_string())),
            _ => Ok(()),
        }
    };
    for (id, model) in &netlist.components {
        for (term, &bit) in &model.constants {
            let full = format!("{id}.{term}");
            set_constant(class_of[lookup(&full)?], bit, &full)?;
        }
    }
    for (term, &bit) in &netlist.constants {
        set_constant(class_of[lookup(term)?], bit, term)?;
    }

    Ok(MergedModel {
        rbm,
        terminal_map,
        constants,
    })
}

/// On-disk netlist description. `model` is a builtin name or a path to a
/// model file, resolved relative to the netlist file.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct NetlistDocument {
    pub components: Vec<ComponentEntry>,
    #[serde(default)]
    pub connections: Vec<(String, String)>,
    #[serde(default)]
    pub exports: BTreeMap<String, String>,
    #[serde(default)]
    pub constants: BTreeMap<String, bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ComponentEntry {
    pub id: String,
    pub model: String,
}

impl NetlistDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves every component reference into a [`Netlist`].
    pub fn resolve<T: Scalar>(
        &self,
        mut resolver: impl FnMut(&str) -> Result<MergedModel<T>>,
    ) -> Result<Netlist<T>> {
        let mut net = Netlist::new();
        for c in &self.components {
            net.component(c.id.clone(), resolver(&c.model)?);
        }
        net.connections = self.connections.clone();
        net.exports = self.exports.clone();
        net.constants = self.constants.clone();
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::testing::random_rbm;
    use crate::rbm::{all_bit_vectors, BinaryState};

    fn named(rbm: Rbm<f64>, prefix: &str) -> Rbm<f64> {
        let names = (0..rbm.n_visible()).map(|i| format!("{prefix}{i}")).collect();
        rbm.with_names(names).unwrap()
    }

    #[test]
    fn merge_pair_shape() {
        let a = named(random_rbm(3, 2, 1.0, 1), "a");
        let b = named(random_rbm(2, 1, 1.0, 2), "b");
        let m = merge_pair(&a, &b, &[("a1", "b0")]).unwrap();
        assert_eq!((m.n_visible(), m.n_hidden()), (4, 3));
        assert_eq!(m.visible_names(), &["a0", "a1", "a2", "b1"]);
    }

    #[test]
    fn smallest_merge() {
        let a = Rbm::new(vec![vec![0.7]], vec![0.1], vec![-0.2], vec!["x".into()]).unwrap();
        let b = Rbm::new(vec![vec![-1.5]], vec![0.4], vec![0.3], vec!["y".into()]).unwrap();
        let m = merge_pair(&a, &b, &[("x", "y")]).unwrap();
        assert_eq!(m.weights(), &[0.7, -1.5]);
        assert_eq!(m.visible_bias(), &[0.1 + 0.4]);
        assert_eq!(m.hidden_bias(), &[-0.2, 0.3]);
        assert_eq!(m.visible_names(), &["x"]);
    }

    #[test]
    fn merged_energy_is_sum_of_parts() {
        let a = named(random_rbm(4, 3, 1.0, 3), "a");
        let b = named(random_rbm(5, 2, 1.0, 4), "b");
        let m = merge_pair(&a, &b, &[("a0", "b3"), ("a2", "b1")]).unwrap();
        assert_eq!(m.n_visible(), 7);
        for v in all_bit_vectors(7) {
            for h in all_bit_vectors(5) {
                let va: Vec<bool> = v[..4].to_vec();
                let vb = vec![v[4], v[2], v[5], v[0], v[6]];
                let e = m.energy(&BinaryState::new(v.clone(), h.clone())).unwrap();
                let ea = a.energy(&BinaryState::new(va, h[..3].to_vec())).unwrap();
                let eb = b.energy(&BinaryState::new(vb, h[3..].to_vec())).unwrap();
                assert!((e - (ea + eb)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn merge_pair_errors() {
        let a = named(random_rbm(2, 1, 1.0, 5), "a");
        let b = named(random_rbm(2, 1, 1.0, 6), "b");
        assert!(matches!(
            merge_pair(&a, &b, &[("zz", "b0")]),
            Err(Error::UnknownTerminal(_))
        ));
        assert!(matches!(
            merge_pair(&a, &b, &[("a0", "b0"), ("a1", "b0")]),
            Err(Error::DuplicateTerminal(_))
        ));
        let clash = named(random_rbm(2, 1, 1.0, 7), "a");
        assert!(matches!(
            merge_pair(&a, &clash, &[("a0", "a0")]),
            Err(Error::NameCollision(_))
        ));
        assert!(merge_pair(&a, &b, &[]).is_err());
    }

    #[test]
    fn tie_zero_units_adds_biases() {
        let rbm = Rbm::from_flat(
            vec![0.0; 4],
            vec![0.25, 0.5],
            vec![0.0, 0.0],
            vec!["p".into(), "q".into()],
        )
        .unwrap();
        let t = tie_terminals(&rbm, "p", "q").unwrap();
        assert_eq!(t.visible_bias(), &[0.75]);
        assert_eq!(t.weights(), &[0.0, 0.0]);
    }

    #[test]
    fn tie_restricts_energy() {
        let rbm = random_rbm(3, 2, 1.5, 8);
        let t = tie_terminals(&rbm, "v0", "v2").unwrap();
        for v in all_bit_vectors(2) {
            for h in all_bit_vectors(2) {
                let full = vec![v[0], v[1], v[0]];
                let e1 = t.energy(&BinaryState::new(v.clone(), h.clone())).unwrap();
                let e0 = rbm.energy(&BinaryState::new(full, h)).unwrap();
                assert!((e1 - e0).abs() < 1e-12);
            }
        }
        assert!(matches!(
            tie_terminals(&rbm, "v1", "v1"),
            Err(Error::SameTerminal(_))
        ));
        assert!(tie_terminals(&rbm, "v1", "nope").is_err());
    }

    #[test]
    fn merge_pair_equals_tie_on_union() {
        let a = named(random_rbm(3, 2, 1.0, 9), "a");
        let b = named(random_rbm(3, 4, 1.0, 10), "b");
        let merged = merge_pair(&a, &b, &[("a1", "b2")]).unwrap();
        let union = disjoint_union(&a, &b).unwrap();
        let tied = tie_terminals(&union, "a1", "b2").unwrap();
        assert_eq!(merged, tied);
    }

    #[test]
    fn compose_single_component_is_identity() {
        let rbm = random_rbm(3, 2, 1.0, 11);
        let mut net = Netlist::new();
        net.component("g", rbm.clone());
        let m = compose(&net).unwrap();
        assert_eq!(m.rbm.weights(), rbm.weights());
        assert_eq!(m.rbm.visible_names(), &["g.v0", "g.v1", "g.v2"]);
        assert_eq!(m.terminal_map["g.v2"], 2);
    }

    #[test]
    fn compose_multiway_and_ordering() {
        let x = random_rbm(2, 1, 1.0, 12);
        let mut net = Netlist::new();
        net.component("a", x.clone())
            .component("b", x.clone())
            .component("c", x.clone())
            .connect("c.v0", "b.v1")
            .connect("a.v1", "c.v0")
            .export("a.v0", "IN");
        let m = compose(&net).unwrap();
        assert_eq!(m.rbm.n_visible(), 4);
        assert_eq!(m.rbm.n_hidden(), 3);
        assert_eq!(m.rbm.visible_names(), &["IN", "a.v1", "b.v0", "c.v1"]);
        assert_eq!(m.terminal_map["b.v1"], 1);
        assert_eq!(m.terminal_map["c.v0"], 1);

        let mut reordered = net.clone();
        reordered.connections.reverse();
        assert_eq!(compose(&reordered).unwrap(), m);
    }

    #[test]
    fn compose_matches_pairwise_merge() {
        let a = random_rbm(3, 2, 1.0, 13);
        let b = random_rbm(2, 3, 1.0, 14);
        let mut net = Netlist::new();
        net.component("a", a.clone())
            .component("b", b.clone())
            .connect("a.v2", "b.v0");
        let m = compose(&net).unwrap();
        let pa = a.with_names(vec!["a.v0".into(), "a.v1".into(), "a.v2".into()]).unwrap();
        let pb = b.with_names(vec!["b.v0".into(), "b.v1".into()]).unwrap();
        assert_eq!(m.rbm, merge_pair(&pa, &pb, &[("a.v2", "b.v0")]).unwrap());
    }

    #[test]
    fn compose_errors() {
        let x = random_rbm(2, 1, 1.0, 15);
        let mut net = Netlist::new();
        net.component("a", x.clone()).connect("a.v0", "b.v0");
        assert!(matches!(compose(&net), Err(Error::DanglingEndpoint(_))));

        let mut net = Netlist::new();
        net.component("a", x.clone())
            .export("a.v0", "Q")
            .export("a.v1", "Q");
        assert!(matches!(compose(&net), Err(Error::ExportCollision(_))));

        let mut net = Netlist::new();
        net.component("a", x.clone()).component("a", x.clone());
        assert!(matches!(compose(&net), Err(Error::DuplicateComponent(_))));

        let mut net = Netlist::new();
        net.component("a", x.clone())
            .component("b", x)
            .connect("a.v0", "b.v0")
            .constant("a.v0", true)
            .constant("b.v0", false);
        assert!(matches!(compose(&net), Err(Error::ConstantConflict(_))));
    }

    #[test]
    fn constants_follow_merged_names() {
        let x = random_rbm(2, 1, 1.0, 16);
        let mut inner = Netlist::new();
        inner.component("g", x.clone()).constant("g.v1", false);
        let inner = compose(&inner).unwrap();
        let mut outer = Netlist::new();
        outer
            .component("u", inner)
            .component("w", x)
            .connect("u.g.v1", "w.v0")
            .export("w.v0", "Z");
        let m = compose(&outer).unwrap();
        assert_eq!(m.constants.get("Z"), Some(&false));
    }

    #[test]
    fn netlist_document_round_trip() {
        let text = r#"{
            "components": [{"id": "a", "model": "and"}, {"id": "b", "model": "or"}],
            "connections": [["a.out", "b.in1"]],
            "exports": {"a.in1": "X"}
        }"#;
        let doc = NetlistDocument::parse(text).unwrap();
        assert_eq!(doc.components.len(), 2);
        assert_eq!(doc.connections[0].1, "b.in1");
        let err = NetlistDocument::parse("{\"components\": [}").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
