//! Model files shipped with the crate.

pub const EXAMPLE1: &str = include_str!("../models/example1.g2t");
pub const EXAMPLE2: &str = include_str!("../models/example2.g2t");
pub const EXAMPLE3: &str = include_str!("../models/example3.g2t");

/// Looks up a bundled model by name (`example1`, `example2`, `example3`).
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "example1" => Some(EXAMPLE1),
        "example2" => Some(EXAMPLE2),
        "example3" => Some(EXAMPLE3),
        _ => None,
    }
}

pub const NAMES: [&str; 3] = ["example1", "example2", "example3"];
