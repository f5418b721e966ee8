use clap::Parser;

use tbgroup::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let (output, code) = run(cli);
    if code == 0 || code == 2 {
        print!("{output}");
    } else {
        eprint!("{output}");
    }
    std::process::exit(code);
}
