//! The composed multiplier's consistent assignments are strict local
//! minima of its free energy.
//!
//! The consistent assignment is worked out independently of the model:
//! values are pushed through each component with plain arithmetic until
//! every visible unit is known.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbmcompose::synthesis::{build_multiplier, builtin};
use rbmcompose::MergedModel64;

fn bus(terms: &BTreeMap<String, usize>, prefix: &str) -> Vec<usize> {
    (0..)
        .map_while(|i| terms.get(&format!("{prefix}{i}")).copied())
        .collect()
}

fn read(values: &[Option<bool>], units: &[usize]) -> Option<u64> {
    units
        .iter()
        .enumerate()
        .try_fold(0u64, |acc, (i, &u)| values[u].map(|b| acc | (u64::from(b) << i)))
}

fn assign(values: &mut [Option<bool>], unit: usize, bit: bool, what: &str) -> bool {
    match values[unit] {
        Some(old) => {
            assert_eq!(old, bit, "conflicting values for {what}");
            false
        }
        None => {
            values[unit] = Some(bit);
            true
        }
    }
}

/// Pushes `a`, `b` through every component. `unit_width` is the width of
/// the adder units, which fixes where internal carries sit.
fn consistent_state(model: &MergedModel64, n: usize, a: u64, b: u64, unit_width: usize) -> Vec<bool> {
    let rbm = &model.rbm;
    let mut values = vec![None; rbm.n_visible()];
    for i in 0..n {
        values[rbm.visible_index(&format!("A{i}")).unwrap()] = Some((a >> i) & 1 == 1);
        values[rbm.visible_index(&format!("B{i}")).unwrap()] = Some((b >> i) & 1 == 1);
    }
    for (t, &bit) in &model.constants {
        values[model.terminal_map[t]] = Some(bit);
    }
    let mut components: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    for (key, &u) in &model.terminal_map {
        if let Some((comp, term)) = key.split_once('.') {
            components.entry(comp).or_default().insert(term.to_string(), u);
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (comp, terms) in &components {
            let (ua, ub) = (bus(terms, "A"), bus(terms, "B"));
            let (Some(x), Some(y)) = (read(&values, &ua), read(&values, &ub)) else {
                continue;
            };
            let mut outputs: Vec<(usize, bool, String)> = Vec::new();
            if terms.contains_key("P0") {
                let p = x * y;
                for (k, &u) in bus(terms, "P").iter().enumerate() {
                    outputs.push((u, (p >> k) & 1 == 1, format!("{comp}.P{k}")));
                }
            } else {
                let Some(cin) = values[terms["Cin"]] else {
                    continue;
                };
                let w = ua.len();
                let sum = x + y + u64::from(cin);
                for (k, &u) in bus(terms, "S").iter().enumerate() {
                    outputs.push((u, (sum >> k) & 1 == 1, format!("{comp}.S{k}")));
                }
                outputs.push((terms["Cout"], (sum >> w) & 1 == 1, format!("{comp}.Cout")));
                for k in 0.. {
                    let Some(&u) = terms.get(&format!("u{k}.Cout")) else {
                        break;
                    };
                    let low = unit_width * (k + 1);
                    let mask = (1u64 << low) - 1;
                    let carry = ((x & mask) + (y & mask) + u64::from(cin)) >> low;
                    outputs.push((u, carry == 1, format!("{comp}.u{k}.Cout")));
                }
            }
            for (u, bit, what) in outputs {
                changed |= assign(&mut values, u, bit, &what);
            }
        }
    }
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v.unwrap_or_else(|| panic!("unit {} never determined", rbm.visible_names()[i])))
        .collect()
}

fn check_minimum(model: &MergedModel64, n: usize, a: u64, b: u64, unit_width: usize) {
    let v = consistent_state(model, n, a, b, unit_width);
    let rbm = &model.rbm;
    let p: u64 = (0..2 * n)
        .map(|k| u64::from(v[rbm.visible_index(&format!("P{k}")).unwrap()]) << k)
        .sum();
    assert_eq!(p, a * b);
    let f = rbm.free_energy(&v).unwrap();
    for i in 0..v.len() {
        let mut w = v.clone();
        w[i] = !w[i];
        let name = &rbm.visible_names()[i];
        // an input flip can land on another circuit state (a·0 = a'·0)
        if let Some(k) = name.strip_prefix('A').and_then(|k| k.parse::<u32>().ok()) {
            if consistent_state(model, n, a ^ (1 << k), b, unit_width) == w {
                continue;
            }
        }
        if let Some(k) = name.strip_prefix('B').and_then(|k| k.parse::<u32>().ok()) {
            if consistent_state(model, n, a, b ^ (1 << k), unit_width) == w {
                continue;
            }
        }
        let g = rbm.free_energy(&w).unwrap();
        assert!(
            g > f + 1.0,
            "{a}*{b}: flipping {} lowers free energy ({g} vs {f})",
            rbm.visible_names()[i]
        );
    }
}

#[test]
fn four_bit_multiplier_assignments_are_local_minima() {
    let model = build_multiplier(4, &builtin("dmult2", 12.0).unwrap(), &builtin("dfa2", 12.0).unwrap()).unwrap();
    for a in 0..16 {
        for b in 0..16 {
            check_minimum(&model, 4, a, b, 2);
        }
    }
}

#[test]
fn eight_bit_multiplier_assignments_are_local_minima() {
    let model = build_multiplier(8, &builtin("dmult4", 12.0).unwrap(), &builtin("dfa4", 12.0).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (a, b) in [(0, 0), (255, 255), (11, 13), (179, 199)] {
        check_minimum(&model, 8, a, b, 4);
    }
    for _ in 0..40 {
        check_minimum(&model, 8, rng.random_range(0..256), rng.random_range(0..256), 4);
    }
}
