use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rbmcompose::synthesis::{build_adder, build_multiplier, builtin};
use rbmcompose::{compose, MergedModel64, NetlistDocument};

/// Turns a model reference into the form recorded in manifests: an
/// absolute path when it names an existing file (relative to `base_dir`),
/// otherwise the string unchanged (a builtin or generator name).
pub fn resolve_ref(spec: &str, base_dir: &Path) -> Result<String> {
    let p = base_dir.join(spec);
    if p.is_file() {
        Ok(std::path::absolute(&p)?.to_string_lossy().into_owned())
    } else {
        Ok(spec.to_string())
    }
}

fn is_netlist(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .is_some_and(|v| v.get("components").is_some())
}

/// Loads a model file or netlist file, or builds a builtin.
pub fn load(spec: &str, sharpness: f64) -> Result<MergedModel64> {
    let path = Path::new(spec);
    if !path.is_file() {
        return builtin(spec, sharpness).with_context(|| format!("no model file or builtin named `{spec}`"));
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
    if is_netlist(&text) {
        let doc = NetlistDocument::parse(&text).with_context(|| format!("parsing netlist {spec}"))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let net = doc.resolve(|m| {
            let r = resolve_ref(m, &dir).map_err(|e| rbmcompose::Error::InvalidArgument(e.to_string()))?;
            load(&r, sharpness).map_err(|e| rbmcompose::Error::InvalidArgument(format!("{e:#}")))
        })?;
        return Ok(compose(&net)?);
    }
    MergedModel64::load(path).with_context(|| format!("loading model {spec}"))
}

fn generator_width(name: &str, prefix: &str) -> Option<usize> {
    name.strip_prefix(prefix)?.parse().ok()
}

/// Builds `target`, using `base` / `adder_base` units for the `adder<n>`
/// and `mult<n>` generators when given.
pub fn construct(target: &str, base: Option<&str>, adder_base: Option<&str>, sharpness: f64) -> Result<MergedModel64> {
    let Some(base) = base else {
        if adder_base.is_some() {
            bail!("--adder-base needs --base");
        }
        return load(target, sharpness);
    };
    if let Some(n) = generator_width(target, "adder") {
        if adder_base.is_some() {
            bail!("--adder-base only applies to mult<n>");
        }
        return Ok(build_adder(n, &load(base, sharpness)?)?);
    }
    if let Some(n) = generator_width(target, "mult") {
        let adder = load(adder_base.unwrap_or("fa1"), sharpness)?;
        return Ok(build_multiplier(n, &load(base, sharpness)?, &adder)?);
    }
    bail!("--base only applies to the adder<n> and mult<n> generators, not `{target}`")
}

/// Default output name for a built target.
pub fn default_output(target: &str, base: Option<&str>) -> PathBuf {
    let stem = |s: &str| {
        Path::new(s)
            .file_stem()
            .map_or_else(|| s.to_string(), |x| x.to_string_lossy().into_owned())
    };
    match base {
        Some(b) => PathBuf::from(format!("{}_{}.json", stem(target), stem(b))),
        None => PathBuf::from(format!("{}.json", stem(target))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_and_generator_agree() {
        let a = construct("adder2", None, None, 12.0).unwrap();
        let b = construct("adder2", Some("fa1"), None, 12.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn netlist_components_resolve_relative_to_the_file() {
        let dir = tempfile::tempdir().unwrap();
        load("and", 12.0).unwrap().save(dir.path().join("g.json")).unwrap();
        let net = r#"{"components": [{"id": "g", "model": "g.json"}, {"id": "n", "model": "not"}],
                      "connections": [["g.out", "n.in1"]],
                      "exports": {"g.in1": "a", "g.in2": "b", "n.out": "y"}}"#;
        let p = dir.path().join("nand.json");
        fs::write(&p, net).unwrap();
        let m = load(p.to_str().unwrap(), 12.0).unwrap();
        assert_eq!(m.rbm.n_visible(), 4);
        assert!(m.terminal_map.contains_key("g.in1"));
    }

    #[test]
    fn base_rejected_for_plain_builtins() {
        assert!(construct("fa1", Some("fa1"), None, 12.0).is_err());
        assert!(construct("nonesuch", None, None, 12.0).is_err());
    }

    #[test]
    fn default_names() {
        assert_eq!(default_output("adder16", Some("fa4")), PathBuf::from("adder16_fa4.json"));
        assert_eq!(default_output("dir/net.json", None), PathBuf::from("net.json"));
    }
}
