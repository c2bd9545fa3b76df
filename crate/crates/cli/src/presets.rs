//! Built-in run configurations. `omtk preset <name>` prints one so it can
//! be saved and edited.

pub const NAMES: [&str; 3] = ["paper", "three-tone", "desk-sweep"];

pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "paper" => Some(include_str!("../presets/paper.toml")),
        "three-tone" => Some(include_str!("../presets/three-tone.toml")),
        "desk-sweep" => Some(include_str!("../presets/desk-sweep.toml")),
        _ => None,
    }
}
