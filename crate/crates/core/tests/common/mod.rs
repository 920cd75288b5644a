#![allow(dead_code)]

use std::path::PathBuf;

use fiberloom::project::Project;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(format!("{name}.toml"))
}

pub fn fixture(name: &str) -> Project {
    Project::load(&fixture_path(name)).unwrap()
}
