//! Parse a config, then run the cheap validation suites into a temp dir.
use qsdlab::commands::{cmd_validate, summary_lines, ValidateHooks};
use qsdlab::config::parse_config_str;

const CONFIG: &str = r#"
alpha = 1.5
sigma.kind = "polynomial"
sigma.gamma = 2.0
grid.n = 200
validate.suites = ["kernel", "entrance", "spectral"]
"#;

fn main() -> qsdlab::Result<()> {
    // Every violation is reported at once.
    if let Err(e) = parse_config_str("alpha = 2.5\nsim.bogus = 1\nsim.dt = \"x\"\n", ".".as_ref()) {
        println!("{e}\n");
    }
    let cfg = parse_config_str(CONFIG, ".".as_ref())?;
    let out = std::env::temp_dir().join("qsdlab-validate-example");
    let report = cmd_validate(&cfg, &out, ValidateHooks::default())?;
    for line in summary_lines(&report) {
        println!("{line}");
    }
    println!("report written to {}", out.join("report.json").display());
    Ok(())
}
