//! Deterministic text renderings shared by the pipeline artifacts.

use citescope_core::metrics::format_value;

/// Flat JSON object with one field per line; values are JSON literals.
pub fn json_object(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("  \"{k}\": {v}")).collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

pub fn json_num(x: f64) -> String {
    format_value(x)
}

/// `# config_hash=<hash>` header line.
pub fn header(hash: &str) -> String {
    format!("# config_hash={hash}\n")
}
