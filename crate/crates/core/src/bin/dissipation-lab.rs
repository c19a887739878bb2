fn main() {
    // Placeholder entry point; the CLI is wired up in the runner module.
    eprintln!("dissipation-lab: CLI not yet wired");
    std::process::exit(2);
}
