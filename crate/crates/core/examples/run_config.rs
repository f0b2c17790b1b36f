//! Drive the scenario runner from code: parse a JSON config with an
//! override, run it on two workers and list what was written.
//!
//! cargo run --example run_config [output-dir]

use mazerlab::runner::{parse_config, parse_override, run};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir().join("mazerlab-example").display().to_string()
    });
    let text = r#"{
        "scenario": "stationary",
        "lambda": 1.0,
        "cavity_length": 2.0,
        "ks": [0.5, 1.0, 1.5, 2.0],
        "deltas": [0.0, 0.5, 1.0],
        "weights": {"0": 0.7, "1": 0.3}
    }"#;
    let overrides = [
        parse_override("lambda=1.5").unwrap(),
        parse_override(&format!("output_dir={out}")).unwrap(),
    ];
    let config = match parse_config(text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config: {e}");
            std::process::exit(2);
        }
    };
    match run(&config, 2) {
        Ok(o) => {
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            println!("manifest {}", o.manifest.display());
            let csv = std::fs::read_to_string(&o.files[0]).unwrap();
            for line in csv.lines().take(5) {
                println!("  {line}");
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
