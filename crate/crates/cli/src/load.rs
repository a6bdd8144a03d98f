//! Config files: bundled names or paths, TOML with line-precise errors.

use std::path::Path;

use pvlab::experiments::ExperimentConfig;
use pvlab::PvError;

/// Configs shipped with the binary, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[
    ("ball-d2", include_str!("../configs/ball-d2.toml")),
    ("ball-d3", include_str!("../configs/ball-d3.toml")),
    ("square-d2", include_str!("../configs/square-d2.toml")),
    ("blob-d2", include_str!("../configs/blob-d2.toml")),
    ("affine-ball-d2", include_str!("../configs/affine-ball-d2.toml")),
    ("zone-ball-d2", include_str!("../configs/zone-ball-d2.toml")),
    ("maxima-subgraph-d2", include_str!("../configs/maxima-subgraph-d2.toml")),
    ("iterate-ball-d2", include_str!("../configs/iterate-ball-d2.toml")),
];

/// Reads `spec` as a bundled config name or a file path.
pub fn read_config(spec: &str) -> Result<(String, ExperimentConfig), PvError> {
    let (origin, text) = match BUNDLED.iter().find(|(n, _)| *n == spec) {
        Some((n, t)) => (format!("<bundled {n}>"), t.to_string()),
        None => {
            let p = Path::new(spec);
            let text = std::fs::read_to_string(p).map_err(|e| {
                let names: Vec<&str> = BUNDLED.iter().map(|b| b.0).collect();
                PvError::Config(format!(
                    "cannot read config `{spec}`: {e} (bundled configs: {})",
                    names.join(", ")
                ))
            })?;
            (spec.to_string(), text)
        }
    };
    let cfg = parse_config(&text, &origin)?;
    Ok((text, cfg))
}

pub fn parse_config(text: &str, origin: &str) -> Result<ExperimentConfig, PvError> {
    toml::from_str::<ExperimentConfig>(text).map_err(|e| PvError::Config(describe(text, origin, &e)))
}

pub fn emit_config(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("configs serialize to TOML")
}

/// `origin:line:col: message`, with a nearest-key hint for unknown keys.
fn describe(text: &str, origin: &str, e: &toml::de::Error) -> String {
    let msg = e.message().trim().to_string();
    let at = e
        .span()
        .map(|s| {
            let before = &text[..s.start.min(text.len())];
            let line = before.matches('\n').count() + 1;
            let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            format!("{origin}:{line}:{col}")
        })
        .unwrap_or_else(|| origin.to_string());
    match unknown_key_hint(&msg) {
        Some(h) => format!("{at}: {msg}; {h}"),
        None => format!("{at}: {msg}"),
    }
}

/// Serde reports unknown fields and variants as
/// "unknown field `x`, expected one of `a`, `b`"; picks the closest candidate.
fn unknown_key_hint(msg: &str) -> Option<String> {
    let rest = msg
        .strip_prefix("unknown field `")
        .or_else(|| msg.strip_prefix("unknown variant `"))?;
    let (key, tail) = rest.split_once('`')?;
    let candidates: Vec<&str> = tail.split('`').skip(1).step_by(2).collect();
    let best = candidates
        .iter()
        .max_by(|a, b| strsim::jaro_winkler(a, key).total_cmp(&strsim::jaro_winkler(b, key)))?;
    Some(format!("did you mean `{best}`?"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_name_the_nearest_valid_key() {
        let text = "name = \"x\"\ndim = 2\nlambda_grid = [100.0]\nreplicates = 3\nreplicatse = 4\n\n[shape]\nkind = \"ball\"\ncenter = [0.0, 0.0]\nradius = 0.25\n";
        let e = parse_config(text, "t.toml").unwrap_err().to_string();
        assert!(e.contains("t.toml:5:1"), "{e}");
        assert!(e.contains("`replicatse`") && e.contains("did you mean `replicates`"), "{e}");
    }

    #[test]
    fn schema_violations_carry_line_numbers() {
        let text = "name = \"x\"\ndim = \"two\"\n";
        let e = parse_config(text, "t.toml").unwrap_err().to_string();
        assert!(e.contains("t.toml:2:"), "{e}");
    }

    #[test]
    fn bundled_configs_round_trip_and_validate() {
        for (name, text) in BUNDLED {
            let c = parse_config(text, name).unwrap();
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(&c.name, name);
            let back = parse_config(&emit_config(&c), name).unwrap();
            assert_eq!(back, c, "{name}");
        }
    }
}
