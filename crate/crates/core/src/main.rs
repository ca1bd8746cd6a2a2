use std::io;

fn main() {
    let code = mrp_sim::cli::run_cli(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
