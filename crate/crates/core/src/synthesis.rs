//! Building RBMs without training: directly calculated units from truth
//! tables, logic gates, and adder/multiplier circuit generators.
//!
//! A directly calculated unit spends one hidden unit per valid row `x`:
//! weights `c·(2x − 1)` and hidden bias `c·(1/2 − |x|₁)`. The hidden
//! pre-activation at visible state `v` is then `c·(1/2 − d_H(v, x))`, so
//! the unit switches on with margin `c/2` exactly when `v = x`.
//!
//! Bit order is little-endian everywhere: bus terminal `A0` is the least
//! significant bit of operand `A`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::merge::{compose, MergedModel, Netlist};
use crate::rbm::{index_to_bits, Rbm};
use crate::scalar::Scalar;

/// Default sharpness `c` for directly calculated units.
pub const DEFAULT_SHARPNESS: f64 = 12.0;

/// Upper bound on operand width for directly calculated adders and
/// multipliers (their hidden layer grows as `2^(2w)`).
pub const MAX_DIRECT_WIDTH: usize = 5;

/// The valid assignments of a set of named binary terminals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    names: Vec<String>,
    rows: Vec<Vec<bool>>,
}

impl TruthTable {
    pub fn new(names: Vec<String>, rows: Vec<Vec<bool>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut seen = BTreeSet::new();
        for row in &rows {
            if row.len() != names.len() {
                return Err(Error::InvalidTable(format!(
                    "row of length {} for {} terminals",
                    row.len(),
                    names.len()
                )));
            }
            if !seen.insert(row.clone()) {
                return Err(Error::InvalidTable("duplicate row".into()));
            }
        }
        Ok(Self { names, rows })
    }

    /// Table whose rows are all assignments satisfying `predicate`.
    pub fn from_predicate(names: Vec<String>, predicate: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let n = names.len();
        if n >= 32 {
            return Err(Error::StateSpaceTooLarge { units: n, limit: 31 });
        }
        let rows = crate::rbm::all_bit_vectors(n)
            .filter(|r| predicate(r))
            .collect();
        Self::new(names, rows)
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }

    pub fn contains(&self, v: &[bool]) -> bool {
        self.rows.iter().any(|r| r == v)
    }
}

/// Directly calculated RBM encoding a truth table at sharpness `c`.
pub fn rbm_from_truth_table<T: Scalar>(table: &TruthTable, sharpness: f64) -> Result<Rbm<T>> {
    if !(sharpness > 0.0 && sharpness.is_finite()) {
        return Err(Error::InvalidSharpness(sharpness));
    }
    let c = sharpness;
    let nv = table.arity();
    let nh = table.rows.len();
    let mut w = vec![T::zero(); nv * nh];
    for (j, row) in table.rows.iter().enumerate() {
        for (i, &bit) in row.iter().enumerate() {
            w[i * nh + j] = T::of(if bit { c } else { -c });
        }
    }
    let hb = table
        .rows
        .iter()
        .map(|row| T::of(c * (0.5 - row.iter().filter(|&&b| b).count() as f64)))
        .collect();
    Rbm::from_flat(w, vec![T::zero(); nv], hb, table.names.clone())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Nand,
    Not,
    Copy,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Not,
        GateKind::Copy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xor => "xor",
            GateKind::Nand => "nand",
            GateKind::Not => "not",
            GateKind::Copy => "copy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|g| g.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Not | GateKind::Copy => 1,
            _ => 2,
        }
    }

    pub fn eval(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] && inputs[1],
            GateKind::Or => inputs[0] || inputs[1],
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Nand => !(inputs[0] && inputs[1]),
            GateKind::Not => !inputs[0],
            GateKind::Copy => inputs[0],
        }
    }

    /// Valid `(inputs..., out)` rows, inputs enumerated little-endian.
    pub fn truth_table(self) -> TruthTable {
        let k = self.arity();
        let mut names: Vec<String> = (1..=k).map(|i| format!("in{i}")).collect();
        names.push("out".into());
        let rows = crate::rbm::all_bit_vectors(k)
            .map(|mut inputs| {
                let out = self.eval(&inputs);
                inputs.push(out);
                inputs
            })
            .collect();
        TruthTable::new(names, rows).expect("gate tables are well formed")
    }
}

/// Directly calculated logic gate with terminals `in1`, `in2`, `out`.
pub fn gate<T: Scalar>(kind: GateKind, sharpness: f64) -> Result<Rbm<T>> {
    rbm_from_truth_table(&kind.truth_table(), sharpness)
}

/// Standard five-gate full adder:
/// `xor1(A,B)→t1`, `xor2(t1,Cin)→S`, `and1(A,B)→t2`, `and2(t1,Cin)→t3`,
/// `or1(t2,t3)→Cout`.
pub fn full_adder_netlist<T: Scalar>(sharpness: f64) -> Result<Netlist<T>> {
    let xor = gate::<T>(GateKind::Xor, sharpness)?;
    let and = gate::<T>(GateKind::And, sharpness)?;
    let or = gate::<T>(GateKind::Or, sharpness)?;
    let mut net = Netlist::new();
    net.component("xor1", xor.clone())
        .component("xor2", xor)
        .component("and1", and.clone())
        .component("and2", and)
        .component("or1", or)
        // A, B fan out to xor1 and and1
        .connect("xor1.in1", "and1.in1")
        .connect("xor1.in2", "and1.in2")
        // t1
        .connect("xor1.out", "xor2.in1")
        .connect("xor1.out", "and2.in1")
        // Cin
        .connect("xor2.in2", "and2.in2")
        // t2, t3
        .connect("and1.out", "or1.in1")
        .connect("and2.out", "or1.in2")
        .export("xor1.in1", "A")
        .export("xor1.in2", "B")
        .export("xor2.in2", "Cin")
        .export("xor2.out", "S")
        .export("or1.out", "Cout");
    Ok(net)
}

/// Gate-built full adder (`fa1`).
pub fn full_adder<T: Scalar>(sharpness: f64) -> Result<MergedModel<T>> {
    compose(&full_adder_netlist(sharpness)?)
}

fn bus(prefix: &str, width: usize) -> Vec<String> {
    (0..width).map(|i| format!("{prefix}{i}")).collect()
}

fn single_bit_names(names: Vec<String>, width: usize) -> Vec<String> {
    if width != 1 {
        return names;
    }
    names
        .into_iter()
        .map(|n| match n.as_str() {
            "A0" => "A".into(),
            "B0" => "B".into(),
            "S0" => "S".into(),
            _ => n,
        })
        .collect()
}

/// Terminal names of a `w`-bit adder: `A.., B.., Cin, S.., Cout`
/// (`A, B, Cin, S, Cout` when `w = 1`).
pub fn adder_names(width: usize) -> Vec<String> {
    let mut names = bus("A", width);
    names.extend(bus("B", width));
    names.push("Cin".into());
    names.extend(bus("S", width));
    names.push("Cout".into());
    single_bit_names(names, width)
}

/// The valid adder row for inputs `a`, `b`, `cin`, in [`adder_names`] order.
pub fn adder_row(width: usize, a: u64, b: u64, cin: bool) -> Vec<bool> {
    let mut row = index_to_bits(a, width);
    row.extend(index_to_bits(b, width));
    row.push(cin);
    row.extend(index_to_bits(a + b + u64::from(cin), width + 1));
    row
}

/// Terminal names of a `w`-bit multiplier: `A.., B.., P..`.
pub fn multiplier_names(width: usize) -> Vec<String> {
    let mut names = bus("A", width);
    names.extend(bus("B", width));
    names.extend(bus("P", 2 * width));
    names
}

/// The valid multiplier row for inputs `a`, `b`.
pub fn multiplier_row(width: usize, a: u64, b: u64) -> Vec<bool> {
    let mut row = index_to_bits(a, width);
    row.extend(index_to_bits(b, width));
    row.extend(index_to_bits(a * b, 2 * width));
    row
}

/// Valid rows of `w`-bit addition, ordered by `a + 2^w·b + 2^{2w}·cin`.
pub fn adder_table(width: usize) -> Result<TruthTable> {
    if width == 0 || width > 15 {
        return Err(Error::InvalidArgument(format!("adder width {width}")));
    }
    let mut rows = Vec::with_capacity(1 << (2 * width + 1));
    for cin in [false, true] {
        for b in 0..(1u64 << width) {
            for a in 0..(1u64 << width) {
                rows.push(adder_row(width, a, b, cin));
            }
        }
    }
    TruthTable::new(adder_names(width), rows)
}

/// Valid rows of `w`-bit unsigned multiplication, ordered by `a + 2^w·b`.
pub fn multiplier_table(width: usize) -> Result<TruthTable> {
    if width == 0 || width > 15 {
        return Err(Error::InvalidArgument(format!("multiplier width {width}")));
    }
    let mut rows = Vec::with_capacity(1 << (2 * width));
    for b in 0..(1u64 << width) {
        for a in 0..(1u64 << width) {
            rows.push(multiplier_row(width, a, b));
        }
    }
    TruthTable::new(multiplier_names(width), rows)
}

/// Directly calculated `w`-bit adder unit.
pub fn direct_adder<T: Scalar>(width: usize, sharpness: f64) -> Result<Rbm<T>> {
    if width > MAX_DIRECT_WIDTH {
        return Err(Error::InvalidArgument(format!(
            "direct adder width {width} exceeds {MAX_DIRECT_WIDTH}"
        )));
    }
    rbm_from_truth_table(&adder_table(width)?, sharpness)
}

/// Directly calculated `w`-bit multiplier unit.
pub fn direct_multiplier<T: Scalar>(width: usize, sharpness: f64) -> Result<Rbm<T>> {
    if width > MAX_DIRECT_WIDTH {
        return Err(Error::InvalidArgument(format!(
            "direct multiplier width {width} exceeds {MAX_DIRECT_WIDTH}"
        )));
    }
    rbm_from_truth_table(&multiplier_table(width)?, sharpness)
}

/// Name of bit `i` of bus `prefix`: `A3`, or plain `A` on a one-bit bus.
pub fn bus_terminal<T: Scalar>(rbm: &Rbm<T>, prefix: &str, i: usize) -> Result<String> {
    let indexed = format!("{prefix}{i}");
    if rbm.visible_index(&indexed).is_some() {
        return Ok(indexed);
    }
    if i == 0 && rbm.visible_index(prefix).is_some() {
        return Ok(prefix.to_string());
    }
    Err(Error::UnknownTerminal(indexed))
}

/// Number of bits on bus `prefix`.
pub fn bus_width<T: Scalar>(rbm: &Rbm<T>, prefix: &str) -> usize {
    let indexed = (0..)
        .take_while(|i| rbm.visible_index(&format!("{prefix}{i}")).is_some())
        .count();
    if indexed == 0 && rbm.visible_index(prefix).is_some() {
        1
    } else {
        indexed
    }
}

/// Cascades copies of a `w`-bit adder unit into an `n`-bit ripple adder
/// by tying each unit's `Cout` to the next unit's `Cin`.
pub fn build_adder<T: Scalar>(n_bits: usize, base: &MergedModel<T>) -> Result<MergedModel<T>> {
    let rbm = &base.rbm;
    let w = bus_width(rbm, "A");
    if w == 0 || bus_width(rbm, "B") != w || bus_width(rbm, "S") != w {
        return Err(Error::WidthMismatch(
            "adder base must export A, B and S buses of equal width".into(),
        ));
    }
    rbm.require_index("Cin")?;
    rbm.require_index("Cout")?;
    if n_bits == 0 || !n_bits.is_multiple_of(w) {
        return Err(Error::WidthMismatch(format!(
            "base width {w} does not divide {n_bits}"
        )));
    }
    let copies = n_bits / w;
    let mut net = Netlist::new();
    for u in 0..copies {
        let id = format!("u{u}");
        net.component(id.clone(), base.clone());
        for k in 0..w {
            let bit = u * w + k;
            for bus_name in ["A", "B", "S"] {
                net.export(
                    format!("{id}.{}", bus_terminal(rbm, bus_name, k)?),
                    format!("{bus_name}{bit}"),
                );
            }
        }
        if u > 0 {
            net.connect(format!("u{}.Cout", u - 1), format!("{id}.Cin"));
        }
    }
    net.export("u0.Cin", "Cin");
    net.export(format!("u{}.Cout", copies - 1), "Cout");
    compose(&net)
}

/// Builds an `n`-bit multiplier from four `n/2`-bit multipliers and
/// ripple adders that sum the shifted partial products:
///
/// ```text
/// P = LL + 2^h·(LH + HL) + 2^n·HH,   h = n/2
/// s1 = LH + HL                       (n-bit adder, carry c1)
/// s2 = [LL >> h | HH mod 2^h] + s1   (n-bit adder, carry c2) → P[h..3h)
/// s3 = (HH >> h) + c1 + c2           (h-bit adder)           → P[3h..4h)
/// ```
///
/// Unused adder inputs and the final carry are constant-zero terminals.
pub fn build_multiplier<T: Scalar>(
    n_bits: usize,
    base_mult: &MergedModel<T>,
    base_adder: &MergedModel<T>,
) -> Result<MergedModel<T>> {
    if n_bits < 2 || !n_bits.is_multiple_of(2) {
        return Err(Error::WidthMismatch(format!(
            "multiplier width {n_bits} must be even"
        )));
    }
    let h = n_bits / 2;
    let m = &base_mult.rbm;
    if bus_width(m, "A") != h || bus_width(m, "B") != h || bus_width(m, "P") != 2 * h {
        return Err(Error::WidthMismatch(format!(
            "base multiplier must have {h}-bit inputs and a {}-bit product",
            2 * h
        )));
    }
    let wide = build_adder(n_bits, base_adder)?;
    let narrow = build_adder(h, base_adder)?;

    let mut net = Netlist::new();
    for id in ["mLL", "mLH", "mHL", "mHH"] {
        net.component(id, base_mult.clone());
    }
    net.component("s1", wide.clone())
        .component("s2", wide)
        .component("s3", narrow);

    for k in 0..h {
        // operand halves: m{X}{Y} multiplies A_X by B_Y
        net.connect(format!("mLL.A{k}"), format!("mLH.A{k}"))
            .connect(format!("mHL.A{k}"), format!("mHH.A{k}"))
            .connect(format!("mLL.B{k}"), format!("mHL.B{k}"))
            .connect(format!("mLH.B{k}"), format!("mHH.B{k}"))
            .export(format!("mLL.A{k}"), format!("A{k}"))
            .export(format!("mHL.A{k}"), format!("A{}", h + k))
            .export(format!("mLL.B{k}"), format!("B{k}"))
            .export(format!("mLH.B{k}"), format!("B{}", h + k))
            .export(format!("mLL.P{k}"), format!("P{k}"));
    }
    for k in 0..n_bits {
        net.connect(format!("s1.A{k}"), format!("mLH.P{k}"))
            .connect(format!("s1.B{k}"), format!("mHL.P{k}"))
            .connect(format!("s2.B{k}"), format!("s1.S{k}"))
            .export(format!("s2.S{k}"), format!("P{}", h + k));
        let upper = if k < h {
            format!("mLL.P{}", h + k)
        } else {
            format!("mHH.P{}", k - h)
        };
        net.connect(format!("s2.A{k}"), upper);
    }
    for k in 0..h {
        net.connect(format!("s3.A{k}"), format!("mHH.P{}", h + k))
            .export(format!("s3.S{k}"), format!("P{}", 3 * h + k));
        if k > 0 {
            net.constant(format!("s3.B{k}"), false);
        }
    }
    net.connect("s3.B0", "s1.Cout")
        .connect("s3.Cin", "s2.Cout")
        .constant("s1.Cin", false)
        .constant("s2.Cin", false)
        .constant("s3.Cout", false);
    compose(&net)
}

fn parse_width(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok().filter(|&w| w > 0)
}

/// Resolves a builtin component name.
///
/// * `and`, `or`, `xor`, `nand`, `not`, `copy`: directly calculated gates
/// * `fa1`: gate-built full adder; `fa<w>` for `w ≥ 2`: directly calculated `w`-bit adder
/// * `dfa<w>`, `dmult<w>`: directly calculated adder / multiplier units
/// * `adder<n>`: `n` cascaded `fa1` units
/// * `mult<n>`: `n ≤ 2` directly calculated, otherwise built recursively
///   from `mult<n/2>` with `fa1` adders
pub fn builtin<T: Scalar>(name: &str, sharpness: f64) -> Result<MergedModel<T>> {
    if let Some(kind) = GateKind::from_name(name) {
        return Ok(gate(kind, sharpness)?.into());
    }
    if name == "fa1" {
        return full_adder(sharpness);
    }
    if let Some(w) = parse_width(name, "dfa") {
        return Ok(direct_adder(w, sharpness)?.into());
    }
    if let Some(w) = parse_width(name, "dmult") {
        return Ok(direct_multiplier(w, sharpness)?.into());
    }
    if let Some(w) = parse_width(name, "fa") {
        return Ok(direct_adder(w, sharpness)?.into());
    }
    if let Some(n) = parse_width(name, "adder") {
        return build_adder(n, &full_adder(sharpness)?);
    }
    if let Some(n) = parse_width(name, "mult") {
        return multiplier(n, sharpness);
    }
    Err(Error::UnknownBuiltin(name.to_string()))
}

fn multiplier<T: Scalar>(n: usize, sharpness: f64) -> Result<MergedModel<T>> {
    if n <= 2 {
        return Ok(direct_multiplier(n, sharpness)?.into());
    }
    if !n.is_multiple_of(2) {
        return Err(Error::WidthMismatch(format!("mult{n}: width must be even")));
    }
    build_multiplier(n, &multiplier(n / 2, sharpness)?, &full_adder(sharpness)?)
}

/// A CNF formula over variables `1..=n_vars`; literals are signed indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    pub n_vars: usize,
    pub clauses: Vec<Vec<i64>>,
}

impl Cnf {
    /// Parses DIMACS text (`c` comments, `p cnf V C` header, `0`-terminated clauses).
    pub fn parse_dimacs(text: &str) -> Result<Self> {
        let mut n_vars = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 || parts[0] != "cnf" {
                    return Err(Error::Parse {
                        line: ln + 1,
                        column: 1,
                        message: "expected `p cnf <vars> <clauses>`".into(),
                    });
                }
                n_vars = Some(parts[1].parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    column: 7,
                    message: "bad variable count".into(),
                })?);
                continue;
            }
            for tok in line.split_whitespace() {
                let lit: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: ln + 1,
                    column: line.find(tok).unwrap_or(0) + 1,
                    message: format!("bad literal `{tok}`"),
                })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        let n_vars = n_vars.unwrap_or_else(|| {
            clauses
                .iter()
                .flatten()
                .map(|l: &i64| l.unsigned_abs() as usize)
                .max()
                .unwrap_or(0)
        });
        let cnf = Self { n_vars, clauses };
        cnf.validate()?;
        Ok(cnf)
    }

    fn validate(&self) -> Result<()> {
        for clause in &self.clauses {
            if clause.is_empty() {
                return Err(Error::InvalidArgument("empty clause".into()));
            }
            if let Some(l) = clause.iter().find(|l| l.unsigned_abs() as usize > self.n_vars) {
                return Err(Error::InvalidArgument(format!("literal {l} out of range")));
            }
        }
        Ok(())
    }

    /// `assignment[k]` is the value of variable `k + 1`.
    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| {
            c.iter()
                .any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        })
    }

    /// Netlist whose constrained distribution concentrates on satisfying
    /// assignments: each clause is an OR chain whose output is clamped to
    /// one, negated literals pass through NOT gates, and variable `k` is
    /// exported as `x{k}`.
    pub fn netlist<T: Scalar>(&self, sharpness: f64) -> Result<Netlist<T>> {
        self.validate()?;
        let pin = Rbm::<T>::zeros(vec!["v".into()], 0)?;
        let or = gate::<T>(GateKind::Or, sharpness)?;
        let not = gate::<T>(GateKind::Not, sharpness)?;
        let mut net = Netlist::new();
        for k in 1..=self.n_vars {
            net.component(format!("x{k}"), pin.clone())
                .export(format!("x{k}.v"), format!("x{k}"));
        }
        let mut negated = BTreeSet::new();
        for &l in self.clauses.iter().flatten() {
            if l < 0 && negated.insert(l.unsigned_abs()) {
                let k = l.unsigned_abs();
                net.component(format!("n{k}"), not.clone())
                    .connect(format!("n{k}.in1"), format!("x{k}.v"));
            }
        }
        let literal = |l: i64| {
            if l > 0 {
                format!("x{l}.v")
            } else {
                format!("n{}.out", l.unsigned_abs())
            }
        };
        for (ci, clause) in self.clauses.iter().enumerate() {
            if clause.len() == 1 {
                net.constant(literal(clause[0]), true);
                continue;
            }
            let mut carry = literal(clause[0]);
            for (gi, &l) in clause[1..].iter().enumerate() {
                let id = format!("c{ci}o{gi}");
                net.component(id.clone(), or.clone())
                    .connect(format!("{id}.in1"), carry)
                    .connect(format!("{id}.in2"), literal(l));
                carry = format!("{id}.out");
            }
            net.constant(carry, true);
        }
        Ok(net)
    }
}
