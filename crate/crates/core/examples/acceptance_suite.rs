//! Runs acceptance criteria and prints one line each.
//!
//! cargo run --release --example acceptance_suite -- [smoke|full] [ids...]

use treeperc::acceptance::{run, Context, Scale};

fn main() {
    let mut args = std::env::args().skip(1).peekable();
    let scale = match args.peek().map(String::as_str) {
        Some("smoke") => {
            args.next();
            Scale::smoke()
        }
        Some("full") => {
            args.next();
            Scale::full()
        }
        _ => Scale::full(),
    };
    let mut ids: Vec<u8> = args.map(|a| a.parse().expect("criterion id")).collect();
    if ids.is_empty() {
        ids = (1..=14).collect();
    }
    let ctx = Context::new(scale, 2024);
    for id in ids {
        let out = run(id, &ctx);
        println!("{}", out.line());
        for w in &out.warnings {
            println!("       warning: {w}");
        }
    }
}
