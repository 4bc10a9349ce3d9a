//! Fixtures for the acceptance run: figure configurations and a scoreboard
//! that prints one verdict line per check.

use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use boussinesq_core::RunConfig;

/// Directory holding the shipped `figN.toml` files.
pub fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/configs")
}

/// Loads `<name>.toml` from [`config_dir`]; panics on a broken checked-in file.
pub fn figure(name: &str) -> RunConfig {
    let path = config_dir().join(format!("{name}.toml"));
    RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub struct Scoreboard {
    started: Instant,
    passed: usize,
    failed: Vec<String>,
}

impl Default for Scoreboard {
    fn default() -> Self {
        Self::new()
    }
}

impl Scoreboard {
    pub fn new() -> Self {
        Self {
            started: Instant::now(),
            passed: 0,
            failed: Vec::new(),
        }
    }

    pub fn record(&mut self, id: &str, pass: bool, detail: impl Display) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:<3} {verdict}  {detail}");
        if pass {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }

    pub fn finish(self) -> ExitCode {
        println!(
            "acceptance: {} passed, {} failed{} ({:.1} s)",
            self.passed,
            self.failed.len(),
            if self.failed.is_empty() {
                String::new()
            } else {
                format!(" [{}]", self.failed.join(", "))
            },
            self.started.elapsed().as_secs_f64()
        );
        if self.failed.is_empty() {
            ExitCode::SUCCESS
        } else {
            ExitCode::FAILURE
        }
    }
}
