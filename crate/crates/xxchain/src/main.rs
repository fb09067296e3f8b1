use clap::Parser;

fn main() {
    let cli = xxchain::Cli::parse();
    let code = xxchain::execute(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
