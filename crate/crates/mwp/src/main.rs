//! `mwp` binary entry point.

fn main() {
    std::process::exit(mwp::cli::run(std::env::args()));
}
