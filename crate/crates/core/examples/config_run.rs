//! Config file in, CSV and JSON out, the same path the binary takes.
//!
//! cargo run --release --example config_run

use fvsolve::cli::{
    parse_config, read_csv_energies, run, write_output, Command, Format, RunOptions,
};

const CONFIG: &str = "\
# Coulomb plus linear, j = 3/2 (p and d waves)
problem.kind = fv12
problem.j = 1.5
potential.vector = coulomb -1
potential.direct = linear 1
search.e_min = 1
search.e_max = 4
search.grid_points = 61
numerics.cf_depth = 1000
";

fn main() {
    let cfg = parse_config(CONFIG).unwrap();
    println!("canonical form:\n{}", cfg.to_text());
    let outcome = run(Command::Solve, &cfg, RunOptions::default()).unwrap();
    let csv = write_output(&outcome.records, Format::Csv);
    print!("{}", String::from_utf8_lossy(&csv));
    for (label, e) in read_csv_energies(&csv).unwrap() {
        println!("{label}: {:.12}", e.re);
    }
    let json = write_output(&outcome.records[..1], Format::Json);
    print!("{}", String::from_utf8_lossy(&json));
}
