use clap::Parser;

fn main() -> std::process::ExitCode {
    let cli = safin::cli::Cli::parse();
    match safin::cli::run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
