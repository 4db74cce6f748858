fn main() {
    let out = gosphere_cli::run(std::env::args_os());
    if out.code == 2 {
        eprint!("{}", out.stdout);
    } else {
        print!("{}", out.stdout);
    }
    std::process::exit(out.code);
}
