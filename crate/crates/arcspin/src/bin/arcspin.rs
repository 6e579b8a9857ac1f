use std::process::exit;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    exit(arcspin::cli::run_cli(&args) as i32);
}
