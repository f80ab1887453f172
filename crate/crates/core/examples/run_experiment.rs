//! Runs a runner subcommand in-process from a TOML string and prints the
//! CSV it would write.
//!
//! cargo run --release --example run_experiment

use treeperc::runner::{csv_bytes, run, Command, ExperimentConfig};

const CONFIG: &str = r#"
graph = "txt"
d = 3
seed = 42
p = [0.18, 0.2151]

[connprob]
max_norm = 4
trials = 2000
specs = [[2, 2]]
"#;

fn main() {
    let cfg = ExperimentConfig::from_toml(CONFIG).unwrap();
    cfg.validate().unwrap();
    let art = run(Command::Connprob, &cfg).unwrap();
    print!("{}", String::from_utf8(csv_bytes(&art.records)).unwrap());
}
