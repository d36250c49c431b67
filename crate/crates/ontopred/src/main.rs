use std::process::exit;

fn main() {
    exit(ontopred::cli::dispatch(std::env::args()));
}
