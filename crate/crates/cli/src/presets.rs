//! Sweeps shipped with the binary.

use crate::config::Sweep;
use crate::error::CliError;

const PRESETS: [(&str, &str); 6] = [
    ("fig1", include_str!("../presets/fig1.json")),
    ("fig2-top", include_str!("../presets/fig2-top.json")),
    ("fig2-bottom", include_str!("../presets/fig2-bottom.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("lower-bound", include_str!("../presets/lower-bound.json")),
    ("sensing", include_str!("../presets/sensing.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Result<Sweep, CliError> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        CliError::Config(format!("unknown preset {name:?} (available: {})", names().collect::<Vec<_>>().join(", ")))
    })?;
    Sweep::from_json_str(text)
}
